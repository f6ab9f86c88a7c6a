// tests/test_elm.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "elm.h"
#include "test_util.h"

using namespace pmtl;
using nn::Matrix;

namespace {

// Gaussian elimination with partial pivoting on a dense square system with
// several right-hand sides.
Matrix SolveByElimination(Matrix a, Matrix b) {
  const int n = static_cast<int>(a.rows());
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    a.row(c).swap(a.row(piv));
    b.row(c).swap(b.row(piv));
    for (int r = c + 1; r < n; ++r) {
      double f = a(r, c) / a(c, c);
      a.row(r) -= f * a.row(c);
      b.row(r) -= f * b.row(c);
    }
  }
  Matrix x(n, b.cols());
  for (int r = n - 1; r >= 0; --r) {
    x.row(r) = b.row(r);
    for (int c = r + 1; c < n; ++c) x.row(r) -= a(r, c) * x.row(c);
    x.row(r) /= a(r, r);
  }
  return x;
}

// Output weights (k x n_hidden) from the normal equations, using only the
// model's hidden-layer draw.
Matrix OracleOutput(const ElmModel &m, const Matrix &x, const Matrix &y, double ridge) {
  const int L = static_cast<int>(m.input_weight.rows());
  Matrix h(x.rows(), L);
  for (int r = 0; r < x.rows(); ++r)
    for (int j = 0; j < L; ++j) {
      double z = m.input_bias(0, j);
      for (int i = 0; i < x.cols(); ++i) z += m.input_weight(j, i) * x(r, i);
      h(r, j) = 1.0 / (1.0 + std::exp(-z));
    }
  Matrix g = h.transpose() * h;
  for (int j = 0; j < L; ++j) g(j, j) += ridge;
  return SolveByElimination(g, h.transpose() * y).transpose();
}

Matrix OneHot(const std::vector<int> &labels, int k) {
  Matrix y = Matrix::Zero(labels.size(), k);
  for (size_t i = 0; i < labels.size(); ++i) y(i, labels[i]) = 1.0;
  return y;
}

}  // namespace

TEST_CASE("output weights match the normal equations on 20 instances") {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    CAPTURE(t);
    int n = 10 + static_cast<int>(rng.Below(60));
    int d = 2 + static_cast<int>(rng.Below(16));
    ElmConfig cfg;
    cfg.n_hidden = 5 + static_cast<int>(rng.Below(40));
    cfg.ridge = t % 2 ? 1e-3 : 1e-1;
    cfg.seed = t;
    Matrix x(n, d);
    for (int64_t i = 0; i < x.size(); ++i) x.data()[i] = rng.Normal();
    if (t % 5 == 0) {
      // Rank-deficient hidden matrix: few distinct rows, more units than rows.
      cfg.n_hidden = 40;
      for (int r = 3; r < n; ++r) x.row(r) = x.row(r % 3);
    }
    std::vector<int> labels(n);
    for (int &l : labels) l = static_cast<int>(rng.Below(4));
    Matrix y = OneHot(labels, 4);
    ElmModel m = ElmFit(x, y, cfg);
    Matrix ref = OracleOutput(m, x, y, cfg.ridge);
    CHECK((m.output_weight - ref).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("hidden layer depends on the seed only") {
  ElmConfig cfg;
  cfg.n_hidden = 8;
  cfg.seed = 3;
  auto a = ElmInit(5, cfg), b = ElmInit(5, cfg);
  CHECK(a.input_weight == b.input_weight);
  CHECK(a.input_weight.maxCoeff() <= 1.0);
  CHECK(a.input_weight.minCoeff() >= -1.0);
  cfg.seed = 4;
  CHECK(ElmInit(5, cfg).input_weight != a.input_weight);
}

TEST_CASE("separable data is learned") {
  Rng rng(2);
  const int n = 200;
  Matrix x(n, 4);
  std::vector<int> labels(n);
  for (int r = 0; r < n; ++r) {
    labels[r] = r % 4;
    for (int c = 0; c < 4; ++c) x(r, c) = 0.3 * rng.Normal() + (c == labels[r] ? 2.0 : 0.0);
  }
  ElmConfig cfg;
  cfg.n_hidden = 60;
  auto m = ElmFit(x, OneHot(labels, 4), cfg);
  auto p = ElmPredict(m, x);
  int correct = 0;
  for (int r = 0; r < n; ++r) correct += p.labels[r] == labels[r];
  CHECK(correct >= 195);
}

TEST_CASE("argmax ties go to the lowest index") {
  Matrix s(2, 3);
  s << 1, 1, 0,
       0, 2, 2;
  CHECK(ArgmaxRows(s) == std::vector<int>{0, 1});
}

TEST_CASE("elm checkpoints reload") {
  testing::TempDir dir;
  Rng rng(5);
  Matrix x(30, 6);
  for (int64_t i = 0; i < x.size(); ++i) x.data()[i] = rng.Normal();
  std::vector<int> labels(30);
  for (int i = 0; i < 30; ++i) labels[i] = i % 4;
  ElmConfig cfg;
  cfg.n_hidden = 12;
  cfg.seed = 9;
  auto m = ElmFit(x, OneHot(labels, 4), cfg);
  SaveElm(m, dir / "e.ckpt");
  auto r = LoadElm(dir / "e.ckpt");
  CHECK(r.config.n_hidden == 12);
  CHECK(r.config.seed == 9);
  CHECK(r.input_weight == m.input_weight);
  CHECK(r.input_bias == m.input_bias);
  CHECK((r.output_weight - m.output_weight).cwiseAbs().maxCoeff() <
        1e-6 * (1 + m.output_weight.cwiseAbs().maxCoeff()));
  CHECK_THROWS_AS(ElmPredict(ElmModel{}, x), Error);
  CHECK_THROWS_AS(ElmPredict(m, Matrix::Zero(2, 5)), Error);
}
