// src/hlf.cc

// Copyright  2026  pmtl authors

// See ../COPYING for clarification regarding multiple authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "hlf.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "common.h"
#include "corpus.h"

namespace pmtl {

HighLevelFeatureVector ComputeHlf(const nn::Matrix &p, double theta) {
  if (p.rows() < 1) Fail(ErrorCode::kInvalidArgument, "empty posterior sequence");
  if (p.cols() != kNumEmotions)
    Fail(ErrorCode::kInvalidArgument, "posteriors must have 4 columns");
  if (!(theta > 0.0 && theta < 1.0))
    Fail(ErrorCode::kInvalidArgument, "theta must lie in (0, 1)");
  for (int64_t r = 0; r < p.rows(); ++r) {
    if (!p.row(r).allFinite() || (p.row(r).array() < 0.0).any() ||
        std::abs(p.row(r).sum() - 1.0) > 1e-6)
      Fail(ErrorCode::kInvalidArgument,
           "posterior row " + std::to_string(r) + " is not a probability vector");
  }
  HighLevelFeatureVector out;
  out.theta = theta;
  const double n = static_cast<double>(p.rows());
  for (int k = 0; k < kNumEmotions; ++k) {
    auto col = p.col(k);
    int64_t above = 0;
    for (int64_t r = 0; r < p.rows(); ++r)
      if (col(r) > theta) ++above;
    out.values[4 * k + 0] = col.minCoeff();
    out.values[4 * k + 1] = col.maxCoeff();
    // Clamp guards against the mean drifting a ulp outside [min, max].
    out.values[4 * k + 2] = std::clamp(col.sum() / n, out.values[4 * k], out.values[4 * k + 1]);
    out.values[4 * k + 3] = static_cast<double>(above) / n;
  }
  return out;
}

const std::array<std::string, kHlfDim> &HlfColumnNames() {
  static const std::array<std::string, kHlfDim> names = [] {
    std::array<std::string, kHlfDim> n;
    const char *fn[4] = {"min", "max", "mean", "frac"};
    for (int k = 0; k < kNumEmotions; ++k)
      for (int f = 0; f < 4; ++f)
        n[4 * k + f] = std::string(ToString(static_cast<Emotion>(k))) + "_" + fn[f];
    return n;
  }();
  return names;
}

namespace {
constexpr const char *kLabelColumns[] = {"emotion", "gender", "naturalness", "speaker_id",
                                         "corpus_id", "partition"};
}  // namespace

void WriteHlfCsv(const std::filesystem::path &path, const std::vector<HlfRow> &rows) {
  std::ofstream os(path);
  if (!os) Fail(ErrorCode::kIo, "cannot write " + path.string());
  os << "utterance_id";
  for (const auto &n : HlfColumnNames()) os << ',' << n;
  for (const char *n : kLabelColumns) os << ',' << n;
  os << '\n';
  os.precision(17);
  for (const auto &r : rows) {
    os << r.utterance_id;
    for (double v : r.hlf.values) os << ',' << v;
    os << ',' << ToString(r.emotion) << ',' << ToString(r.gender) << ','
       << ToString(r.naturalness) << ',' << r.speaker_id << ',' << r.corpus_id << ','
       << r.partition << '\n';
  }
}

std::vector<HlfRow> ReadHlfCsv(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) Fail(ErrorCode::kIo, "cannot read " + path.string());
  std::string line;
  if (!std::getline(is, line)) Fail(ErrorCode::kParse, path.string() + ": empty HLF table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = SplitCsvLine(line);
  const size_t width = 1 + kHlfDim + std::size(kLabelColumns);
  bool ok = header.size() == width && header[0] == "utterance_id";
  for (int k = 0; ok && k < kHlfDim; ++k) ok = header[1 + k] == HlfColumnNames()[k];
  if (!ok) Fail(ErrorCode::kParse, path.string() + ": not an HLF table header");
  std::vector<HlfRow> rows;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = SplitCsvLine(line);
    if (f.size() != width)
      Fail(ErrorCode::kParse, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                  std::to_string(width) + " fields");
    HlfRow r;
    r.utterance_id = f[0];
    for (int k = 0; k < kHlfDim; ++k) {
      size_t used = 0;
      try {
        r.hlf.values[k] = std::stod(f[1 + k], &used);
      } catch (const std::exception &) {
        used = 0;
      }
      if (used != f[1 + k].size() || f[1 + k].empty())
        Fail(ErrorCode::kParse, path.string() + ":" + std::to_string(line_no) +
                                    ": bad number '" + f[1 + k] + "'");
    }
    size_t c = 1 + kHlfDim;
    r.emotion = ParseEmotion(f[c]);
    r.gender = ParseGender(f[c + 1]);
    r.naturalness = ParseNaturalness(f[c + 2]);
    r.speaker_id = f[c + 3];
    r.corpus_id = f[c + 4];
    r.partition = f[c + 5];
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace pmtl
