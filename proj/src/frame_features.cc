// src/frame_features.cc

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

#include "frame_features.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <map>
#include <mutex>

#include "common.h"

namespace pmtl {

namespace {

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// FFTW plans are created once per size; planning is not thread-safe but
// executing an existing plan on new arrays is.
fftw_plan R2cPlan(int n) {
  static std::mutex mu;
  static std::map<int, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto it = plans.find(n);
  if (it != plans.end()) return it->second;
  std::vector<double> in(n);
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_plan p = fftw_plan_dft_r2c_1d(n, in.data(),
                                     reinterpret_cast<fftw_complex *>(out.data()),
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans.emplace(n, p);
  return p;
}

double ToFloat(double v) { return static_cast<double>(static_cast<float>(v)); }

// Tables shared by all frames of one extraction.
class FrameAnalyzer {
 public:
  FrameAnalyzer(int sample_rate, const FeatureConfig &cfg)
      : sr_(sample_rate), cfg_(cfg), n_(cfg.WindowSamples(sample_rate)) {
    cfg.Validate(sample_rate);
    hamming_.resize(n_);
    for (int i = 0; i < n_; ++i)
      hamming_[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / (n_ - 1));

    const int n_bins = cfg.fft_size / 2 + 1;
    const int m = cfg.n_mel_filters;
    const double mel_lo = HzToMel(0.0), mel_hi = HzToMel(sample_rate / 2.0);
    std::vector<double> edges(m + 2);
    for (int i = 0; i < m + 2; ++i)
      edges[i] = MelToHz(mel_lo + (mel_hi - mel_lo) * i / (m + 1));
    mel_.assign(m, std::vector<double>(n_bins, 0.0));
    for (int f = 0; f < m; ++f) {
      for (int k = 0; k < n_bins; ++k) {
        double hz = static_cast<double>(k) * sample_rate / cfg.fft_size;
        double w = 0.0;
        if (hz > edges[f] && hz <= edges[f + 1])
          w = (hz - edges[f]) / (edges[f + 1] - edges[f]);
        else if (hz > edges[f + 1] && hz < edges[f + 2])
          w = (edges[f + 2] - hz) / (edges[f + 2] - edges[f + 1]);
        mel_[f][k] = w;
      }
    }
    dct_.assign(cfg.n_mfcc, std::vector<double>(m));
    for (int c = 0; c < cfg.n_mfcc; ++c)
      for (int j = 0; j < m; ++j)
        dct_[c][j] = std::sqrt(2.0 / m) * std::cos(M_PI * (c + 1) * (j + 0.5) / m);
    plan_ = R2cPlan(cfg.fft_size);
    fft_in_.assign(cfg.fft_size, 0.0);
    fft_out_.resize(n_bins);
  }

  std::array<double, kNumStatic> Analyze(std::span<const double> frame) {
    if (static_cast<int>(frame.size()) != n_)
      Fail(ErrorCode::kInvalidArgument, "frame length does not match the analysis window");
    std::array<double, kNumStatic> out{};
    auto [f0, vp] = Pitch(frame);
    out[0] = f0;
    out[1] = vp;

    int crossings = 0;
    for (int i = 0; i + 1 < n_; ++i)
      if (frame[i] * frame[i + 1] < 0.0) ++crossings;
    out[2] = static_cast<double>(crossings) / (n_ - 1);

    double energy = 0.0;
    for (double x : frame) energy += x * x;
    out[3] = std::log(std::max(energy, 1e-10));

    std::fill(fft_in_.begin(), fft_in_.end(), 0.0);
    for (int i = 0; i < n_; ++i) {
      double prev = i > 0 ? frame[i - 1] : frame[0];
      fft_in_[i] = (frame[i] - cfg_.pre_emphasis * prev) * hamming_[i];
    }
    fftw_execute_dft_r2c(plan_, fft_in_.data(),
                         reinterpret_cast<fftw_complex *>(fft_out_.data()));
    std::vector<double> logmel(cfg_.n_mel_filters);
    for (int f = 0; f < cfg_.n_mel_filters; ++f) {
      double e = 0.0;
      for (size_t k = 0; k < fft_out_.size(); ++k)
        if (mel_[f][k] != 0.0) e += mel_[f][k] * std::norm(fft_out_[k]);
      logmel[f] = std::log(std::max(e, 1e-10));
    }
    for (int c = 0; c < cfg_.n_mfcc && c < 12; ++c) {
      double acc = 0.0;
      for (int j = 0; j < cfg_.n_mel_filters; ++j) acc += dct_[c][j] * logmel[j];
      out[4 + c] = acc;
    }
    return out;
  }

 private:
  // Normalised autocorrelation of the DC-removed frame over the F0 lag range.
  std::pair<double, double> Pitch(std::span<const double> frame) const {
    std::vector<double> x(frame.begin(), frame.end());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n_;
    double total = 0.0;
    for (double &v : x) {
      v -= mean;
      total += v * v;
    }
    if (total <= 1e-20) return {0.0, 0.0};

    // prefix[i] = sum_{n<i} x[n]^2
    std::vector<double> prefix(n_ + 1, 0.0);
    for (int i = 0; i < n_; ++i) prefix[i + 1] = prefix[i] + x[i] * x[i];

    const int lag_lo = std::max(1, static_cast<int>(std::floor(sr_ / cfg_.f0_max_hz)));
    const int lag_hi = std::min(n_ - 2, static_cast<int>(std::ceil(sr_ / cfg_.f0_min_hz)));
    // r[l - lag_lo + 1] for l in [lag_lo - 1, lag_hi + 1]
    std::vector<double> r(lag_hi - lag_lo + 3, 0.0);
    for (int l = lag_lo - 1; l <= lag_hi + 1; ++l) {
      if (l < 1 || l >= n_) continue;
      double acc = 0.0;
      for (int i = 0; i + l < n_; ++i) acc += x[i] * x[i + l];
      double e1 = prefix[n_ - l];
      double e2 = prefix[n_] - prefix[l];
      double denom = std::sqrt(e1 * e2);
      r[l - lag_lo + 1] = denom > 1e-20 ? acc / denom : 0.0;
    }
    auto at = [&](int l) { return r[l - lag_lo + 1]; };

    int best = lag_lo;
    double best_r = -2.0;
    for (int l = lag_lo; l <= lag_hi; ++l)
      if (at(l) > best_r) {
        best_r = at(l);
        best = l;
      }
    // Prefer the shortest lag whose local peak is close to the global one;
    // multiples of the period score almost as high.
    for (int l = lag_lo; l <= lag_hi; ++l) {
      if (at(l) >= at(l - 1) && at(l) >= at(l + 1) && at(l) >= 0.9 * best_r) {
        best = l;
        break;
      }
    }
    double peak = at(best);
    double vp = std::clamp(peak, 0.0, 1.0);
    if (peak < cfg_.voicing_threshold) return {0.0, vp};

    double a = at(best - 1), b = peak, c = at(best + 1);
    double den = a - 2.0 * b + c;
    double shift = den < 0.0 ? std::clamp(0.5 * (a - c) / den, -0.5, 0.5) : 0.0;
    double f0 = sr_ / (best + shift);
    return {std::clamp(f0, cfg_.f0_min_hz, cfg_.f0_max_hz), vp};
  }

  int sr_;
  FeatureConfig cfg_;
  int n_;
  std::vector<double> hamming_;
  std::vector<std::vector<double>> mel_;
  std::vector<std::vector<double>> dct_;
  fftw_plan plan_ = nullptr;
  std::vector<double> fft_in_;
  std::vector<std::complex<double>> fft_out_;
};

}  // namespace

int FeatureConfig::WindowSamples(int sample_rate) const {
  return static_cast<int>(std::lround(window_ms * sample_rate / 1000.0));
}

int FeatureConfig::HopSamples(int sample_rate) const {
  return static_cast<int>(std::lround(hop_ms * sample_rate / 1000.0));
}

void FeatureConfig::Validate(int sample_rate) const {
  if (!(hop_ms > 0 && window_ms > hop_ms))
    Fail(ErrorCode::kInvalidArgument, "feature config needs window_ms > hop_ms > 0");
  if (!(f0_min_hz > 0 && f0_min_hz < f0_max_hz && f0_max_hz < sample_rate / 2.0))
    Fail(ErrorCode::kInvalidArgument, "feature config needs 0 < f0_min < f0_max < sr/2");
  if (fft_size < WindowSamples(sample_rate) || (fft_size & (fft_size - 1)) != 0)
    Fail(ErrorCode::kInvalidArgument, "fft_size must be a power of two >= the window");
  if (n_mfcc != 12)
    Fail(ErrorCode::kInvalidArgument, "the 32-column layout requires n_mfcc = 12");
  if (n_mel_filters <= n_mfcc)
    Fail(ErrorCode::kInvalidArgument, "n_mel_filters must exceed n_mfcc");
  if (delta_window < 1) Fail(ErrorCode::kInvalidArgument, "delta_window must be >= 1");
}

const std::array<std::string, kFeatureDim> &FeatureColumnNames() {
  static const std::array<std::string, kFeatureDim> names = [] {
    std::array<std::string, kFeatureDim> n;
    const char *base[4] = {"f0", "voice_prob", "zcr", "log_energy"};
    for (int i = 0; i < 4; ++i) n[i] = base[i];
    for (int i = 0; i < 12; ++i) n[4 + i] = "mfcc" + std::to_string(i + 1);
    for (int i = 0; i < kNumStatic; ++i) n[kNumStatic + i] = "d_" + n[i];
    return n;
  }();
  return names;
}

std::vector<double> NormalizeGain(std::span<const double> samples) {
  std::vector<double> out(samples.begin(), samples.end());
  double peak = 0.0;
  for (double s : samples) peak = std::max(peak, std::abs(s));
  if (peak > 0.0)
    for (double &s : out) s /= peak;
  return out;
}

std::vector<std::vector<double>> FrameSignal(std::span<const double> samples,
                                             int sample_rate, const FeatureConfig &cfg) {
  cfg.Validate(sample_rate);
  const size_t win = cfg.WindowSamples(sample_rate);
  const size_t hop = cfg.HopSamples(sample_rate);
  if (samples.size() < win)
    Fail(ErrorCode::kInvalidArgument, "utterance too short: " +
                                          std::to_string(samples.size()) +
                                          " samples, need at least " + std::to_string(win));
  size_t n_frames = (samples.size() - win) / hop + 1;
  std::vector<std::vector<double>> frames(n_frames);
  for (size_t f = 0; f < n_frames; ++f)
    frames[f].assign(samples.begin() + f * hop, samples.begin() + f * hop + win);
  return frames;
}

std::array<double, kNumStatic> FrameDescriptors(std::span<const double> frame,
                                                int sample_rate,
                                                const FeatureConfig &cfg) {
  FrameAnalyzer analyzer(sample_rate, cfg);
  return analyzer.Analyze(frame);
}

RowMatrix ComputeDeltas(const RowMatrix &x, const FeatureConfig &cfg) {
  const int64_t n = x.rows();
  const int w = cfg.delta_window;
  double denom = 0.0;
  for (int k = 1; k <= w; ++k) denom += 2.0 * k * k;
  RowMatrix d = RowMatrix::Zero(n, x.cols());
  for (int64_t t = 0; t < n; ++t) {
    for (int k = 1; k <= w; ++k) {
      int64_t fwd = std::min(t + k, n - 1);
      int64_t back = std::max<int64_t>(t - k, 0);
      d.row(t) += k * (x.row(fwd) - x.row(back));
    }
  }
  return d / denom;
}

FrameFeatureMatrix ExtractFeatures(std::span<const double> samples, int sample_rate,
                                   const FeatureConfig &cfg) {
  std::vector<double> norm = NormalizeGain(samples);
  auto frames = FrameSignal(norm, sample_rate, cfg);
  FrameAnalyzer analyzer(sample_rate, cfg);
  RowMatrix statics(static_cast<int64_t>(frames.size()), kNumStatic);
  for (size_t f = 0; f < frames.size(); ++f) {
    auto desc = analyzer.Analyze(frames[f]);
    for (int c = 0; c < kNumStatic; ++c) statics(f, c) = ToFloat(desc[c]);
  }
  RowMatrix deltas = ComputeDeltas(statics, cfg);
  FrameFeatureMatrix out;
  out.data.resize(statics.rows(), kFeatureDim);
  out.data.leftCols(kNumStatic) = statics;
  out.data.rightCols(kNumStatic) = deltas.unaryExpr(&ToFloat);
  return out;
}

Standardizer Standardizer::Fit(std::span<const FrameFeatureMatrix *const> training) {
  int64_t cols = -1, total = 0;
  for (const auto *m : training) {
    if (cols >= 0 && m->data.cols() != cols)
      Fail(ErrorCode::kInvalidArgument, "standardizer inputs differ in width");
    cols = m->data.cols();
    total += m->data.rows();
  }
  if (total < 2) Fail(ErrorCode::kInvalidArgument, "standardizer needs at least 2 training frames");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(cols);
  for (const auto *m : training) mean += m->data.colwise().sum().transpose();
  mean /= static_cast<double>(total);
  Eigen::VectorXd var = Eigen::VectorXd::Zero(cols);
  for (const auto *m : training)
    var += (m->data.rowwise() - mean.transpose()).array().square().colwise().sum().matrix().transpose();
  var /= static_cast<double>(total);
  Eigen::VectorXd sd = var.array().sqrt().max(kStdFloor).matrix();
  return Standardizer(std::move(mean), std::move(sd));
}

Standardizer Standardizer::Fit(std::span<const FrameFeatureMatrix> training) {
  std::vector<const FrameFeatureMatrix *> ptrs;
  for (const auto &m : training) ptrs.push_back(&m);
  return Fit(std::span<const FrameFeatureMatrix *const>(ptrs));
}

RowMatrix Standardizer::Apply(const RowMatrix &m) const {
  if (!fitted()) Fail(ErrorCode::kState, "standardizer is not fitted");
  if (m.cols() != mean_.size())
    Fail(ErrorCode::kInvalidArgument, "standardizer width mismatch");
  RowMatrix out(m.rows(), m.cols());
  for (int64_t c = 0; c < m.cols(); ++c) {
    if (stddev_[c] <= kStdFloor)
      out.col(c).setZero();  // constant column in the training data
    else
      out.col(c) = (m.col(c).array() - mean_[c]) / stddev_[c];
  }
  return out;
}

void WriteFeatureFile(const std::filesystem::path &path, const FrameFeatureMatrix &m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail(ErrorCode::kIo, "cannot write feature file " + path.string());
  os.write("PMTL1", 5);
  WriteU32(os, static_cast<uint32_t>(m.data.rows()));
  WriteU32(os, static_cast<uint32_t>(m.data.cols()));
  for (int64_t r = 0; r < m.data.rows(); ++r)
    for (int64_t c = 0; c < m.data.cols(); ++c) WriteF32(os, static_cast<float>(m.data(r, c)));
  if (!os) Fail(ErrorCode::kIo, "short write to " + path.string());
}

FrameFeatureMatrix ReadFeatureFile(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorCode::kIo, "cannot open feature file " + path.string());
  char magic[5];
  if (!is.read(magic, 5) || std::string(magic, 5) != "PMTL1")
    Fail(ErrorCode::kParse, "bad feature file magic in " + path.string());
  uint32_t rows = ReadU32(is), cols = ReadU32(is);
  if (cols != kFeatureDim)
    Fail(ErrorCode::kParse, "feature file width must be 32, got " + std::to_string(cols));
  FrameFeatureMatrix m;
  m.data.resize(rows, cols);
  for (uint32_t r = 0; r < rows; ++r)
    for (uint32_t c = 0; c < cols; ++c) m.data(r, c) = ReadF32(is);
  if (is.peek() != std::char_traits<char>::eof())
    Fail(ErrorCode::kParse, "trailing bytes in feature file " + path.string());
  return m;
}

void WriteFeatureCsv(const std::filesystem::path &path, const FrameFeatureMatrix &m) {
  std::ofstream os(path);
  if (!os) Fail(ErrorCode::kIo, "cannot write " + path.string());
  const auto &names = FeatureColumnNames();
  os << "frame";
  for (const auto &n : names) os << ',' << n;
  os << '\n';
  os.precision(9);
  for (int64_t r = 0; r < m.data.rows(); ++r) {
    os << r;
    for (int64_t c = 0; c < m.data.cols(); ++c) os << ',' << m.data(r, c);
    os << '\n';
  }
}

}  // namespace pmtl
