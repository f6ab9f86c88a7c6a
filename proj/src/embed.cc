// src/embed.cc

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

#include "embed.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "common.h"

namespace pmtl {

using nn::Matrix;

namespace {

constexpr double kPerplexityTol = 1e-5;  // tighter than the 1e-4 contract
constexpr int kMaxBisection = 50;
constexpr double kMinBandwidth = 1e-12;

Matrix SquaredDistances(const Matrix &x) {
  const int64_t n = x.rows();
  Matrix d(n, n);
  for (int64_t i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (int64_t j = i + 1; j < n; ++j) {
      double s = (x.row(i) - x.row(j)).squaredNorm();
      d(i, j) = d(j, i) = s;
    }
  }
  return d;
}

// Fills p (length n, p[i] = 0) for precision beta; returns the entropy in
// nats.
double RowDistribution(const Matrix &d, int64_t i, double min_d, double beta,
                       std::vector<double> *p) {
  const int64_t n = d.cols();
  double sum = 0.0, weighted = 0.0;
  for (int64_t j = 0; j < n; ++j) {
    if (j == i) {
      (*p)[j] = 0.0;
      continue;
    }
    double shifted = d(i, j) - min_d;
    double v = std::exp(-beta * shifted);
    (*p)[j] = v;
    sum += v;
    weighted += shifted * v;
  }
  for (int64_t j = 0; j < n; ++j) (*p)[j] /= sum;
  return std::log(sum) + beta * weighted / sum;
}

}  // namespace

void TsneConfig::Validate(int64_t n_points) const {
  if (out_dims != 2 && out_dims != 3) Fail(ErrorCode::kInvalidArgument, "out_dims must be 2 or 3");
  if (!(perplexity > 0)) Fail(ErrorCode::kInvalidArgument, "perplexity must be positive");
  if (!(3.0 * perplexity < static_cast<double>(n_points)))
    Fail(ErrorCode::kInvalidArgument, "perplexity must be below n_points / 3 (n=" +
                                          std::to_string(n_points) + ")");
  if (n_iter < 1) Fail(ErrorCode::kInvalidArgument, "n_iter must be >= 1");
  if (!(learning_rate > 0)) Fail(ErrorCode::kInvalidArgument, "learning_rate must be positive");
}

Affinities ComputeAffinities(const Matrix &x, double perplexity) {
  const int64_t n = x.rows();
  if (!(3.0 * perplexity <= static_cast<double>(n)))
    Fail(ErrorCode::kInvalidArgument, "t-SNE needs n >= 3 * perplexity");
  if (!x.allFinite()) Fail(ErrorCode::kInvalidArgument, "non-finite t-SNE input");
  const Matrix d = SquaredDistances(x);
  const double target = std::log(perplexity);
  const double beta_cap = 1.0 / (2.0 * kMinBandwidth * kMinBandwidth);

  Affinities a;
  a.conditional = Matrix::Zero(n, n);
  a.row_perplexity.resize(n);
  a.beta.resize(n);
  std::vector<double> p(n);
  for (int64_t i = 0; i < n; ++i) {
    double min_d = std::numeric_limits<double>::infinity(), mean_d = 0.0;
    for (int64_t j = 0; j < n; ++j)
      if (j != i) min_d = std::min(min_d, d(i, j));
    for (int64_t j = 0; j < n; ++j)
      if (j != i) mean_d += d(i, j) - min_d;
    mean_d /= static_cast<double>(n - 1);
    double beta = mean_d > 0 ? 1.0 / mean_d : 1.0;
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double h = RowDistribution(d, i, min_d, beta, &p);
    for (int it = 0; it < kMaxBisection; ++it) {
      if (std::abs(std::exp(h) - perplexity) < kPerplexityTol) break;
      if (h > target) {  // too flat: sharpen
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = 0.5 * (beta + lo);
      }
      beta = std::min(beta, beta_cap);
      h = RowDistribution(d, i, min_d, beta, &p);
    }
    a.beta[i] = beta;
    a.row_perplexity[i] = std::exp(h);
    for (int64_t j = 0; j < n; ++j) a.conditional(i, j) = p[j];
  }
  a.joint = (a.conditional + a.conditional.transpose()) / (2.0 * static_cast<double>(n));
  return a;
}

Matrix TsneQ(const Matrix &y) {
  const int64_t n = y.rows();
  Matrix num(n, n);
  double sum = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    num(i, i) = 0.0;
    for (int64_t j = i + 1; j < n; ++j) {
      double v = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
      num(i, j) = num(j, i) = v;
      sum += 2.0 * v;
    }
  }
  return num / sum;
}

double TsneKl(const Matrix &p, const Matrix &y) {
  const Matrix q = TsneQ(y);
  double kl = 0.0;
  for (int64_t i = 0; i < p.rows(); ++i)
    for (int64_t j = 0; j < p.cols(); ++j)
      if (i != j && p(i, j) > 0.0) kl += p(i, j) * std::log(p(i, j) / std::max(q(i, j), 1e-300));
  return kl;
}

Matrix TsneGradient(const Matrix &p, const Matrix &y) {
  const int64_t n = y.rows();
  Matrix num(n, n);
  double sum = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    num(i, i) = 0.0;
    for (int64_t j = i + 1; j < n; ++j) {
      double v = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
      num(i, j) = num(j, i) = v;
      sum += 2.0 * v;
    }
  }
  Matrix g = Matrix::Zero(n, y.cols());
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double coeff = 4.0 * (p(i, j) - num(i, j) / sum) * num(i, j);
      g.row(i) += coeff * (y.row(i) - y.row(j));
    }
  }
  return g;
}

TsneResult TsneEmbed(const Matrix &x, const TsneConfig &cfg) {
  cfg.Validate(x.rows());
  const int64_t n = x.rows();
  const Matrix p = ComputeAffinities(x, cfg.perplexity).joint;

  Rng rng(DeriveSeed(cfg.seed, "tsne-init"));
  Matrix y(n, cfg.out_dims);
  for (int64_t i = 0; i < y.size(); ++i) y.data()[i] = 1e-4 * rng.Normal();
  Matrix velocity = Matrix::Zero(n, cfg.out_dims);
  Matrix gains = Matrix::Ones(n, cfg.out_dims);

  TsneResult res;
  res.kl_trace.reserve(cfg.n_iter);
  for (int it = 0; it < cfg.n_iter; ++it) {
    const bool exaggerate = it < cfg.exaggeration_iters;
    Matrix g = TsneGradient(exaggerate ? Matrix(p * cfg.early_exaggeration) : p, y);
    for (int64_t k = 0; k < g.size(); ++k) {
      double &gain = gains.data()[k];
      bool same_sign = (g.data()[k] > 0) == (velocity.data()[k] > 0);
      gain = same_sign ? gain * 0.8 : gain + 0.2;
      gain = std::max(gain, 0.01);
    }
    const double momentum = it < cfg.momentum_switch_iter ? cfg.initial_momentum
                                                          : cfg.final_momentum;
    velocity = momentum * velocity - cfg.learning_rate * gains.cwiseProduct(g);
    Matrix next = y + velocity;
    next.rowwise() -= next.colwise().mean();
    double kl = TsneKl(p, next);
    // Once P is fixed, a step that raises KL is rejected: momentum and gains
    // restart and a plain gradient step is halved until KL does not rise.
    if (!exaggerate && !res.kl_trace.empty() && !(kl <= res.kl_trace.back())) {
      velocity.setZero();
      gains.setOnes();
      double step = cfg.learning_rate;
      next = y;
      kl = res.kl_trace.back();
      for (int tries = 0; tries < 40; ++tries, step *= 0.5) {
        Matrix trial = y - step * g;
        trial.rowwise() -= trial.colwise().mean();
        double trial_kl = TsneKl(p, trial);
        if (trial_kl <= kl) {
          next = std::move(trial);
          kl = trial_kl;
          velocity = -step * g;
          break;
        }
      }
    }
    y = std::move(next);
    if (!std::isfinite(kl))
      Fail(ErrorCode::kNumeric, "t-SNE diverged: non-finite KL at iteration " + std::to_string(it + 1));
    res.kl_trace.push_back(kl);
  }
  res.embedding = std::move(y);
  return res;
}

void WriteEmbeddingCsv(const std::filesystem::path &path, const Matrix &e,
                       const std::vector<EmbeddingRow> &rows) {
  if (static_cast<int64_t>(rows.size()) != e.rows())
    Fail(ErrorCode::kInvalidArgument, "embedding and metadata row counts differ");
  std::ofstream os(path);
  if (!os) Fail(ErrorCode::kIo, "cannot write " + path.string());
  os << "utterance_id,x,y";
  if (e.cols() == 3) os << ",z";
  os << ",emotion,gender,naturalness,corpus_id\n";
  os.precision(9);
  for (size_t i = 0; i < rows.size(); ++i) {
    os << rows[i].utterance_id;
    for (int64_t c = 0; c < e.cols(); ++c) os << ',' << e(i, c);
    os << ',' << rows[i].emotion << ',' << rows[i].gender << ',' << rows[i].naturalness << ','
       << rows[i].corpus_id << '\n';
  }
}

void WriteEmbeddingSvg(const std::filesystem::path &path, const Matrix &e,
                       const std::vector<EmbeddingRow> &rows) {
  if (static_cast<int64_t>(rows.size()) != e.rows() || e.cols() < 2)
    Fail(ErrorCode::kInvalidArgument, "SVG export needs a 2-D embedding with metadata");
  std::ofstream os(path);
  if (!os) Fail(ErrorCode::kIo, "cannot write " + path.string());
  const double size = 600.0, margin = 20.0;
  double xmin = e.col(0).minCoeff(), xmax = e.col(0).maxCoeff();
  double ymin = e.col(1).minCoeff(), ymax = e.col(1).maxCoeff();
  double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
  auto color = [](const std::string &emotion) {
    if (emotion == "neutral") return "#2ca02c";
    if (emotion == "happy") return "#ff7f0e";
    if (emotion == "sad") return "#1f77b4";
    if (emotion == "angry") return "#d62728";
    return "#7f7f7f";
  };
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
     << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os.precision(6);
  for (size_t i = 0; i < rows.size(); ++i) {
    double cx = margin + (e(i, 0) - xmin) / span * (size - 2 * margin);
    double cy = size - margin - (e(i, 1) - ymin) / span * (size - 2 * margin);
    os << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"3\" fill=\""
       << color(rows[i].emotion) << "\" fill-opacity=\"0.8\"/>\n";
  }
  const char *names[4] = {"neutral", "happy", "sad", "angry"};
  for (int k = 0; k < 4; ++k)
    os << "<text x=\"" << margin << "\" y=\"" << margin + 14 * k << "\" font-size=\"12\" fill=\""
       << color(names[k]) << "\">" << names[k] << "</text>\n";
  os << "</svg>\n";
}

}  // namespace pmtl
