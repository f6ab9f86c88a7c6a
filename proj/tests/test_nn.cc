// tests/test_nn.cc

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

#include "nn.h"
#include "test_util.h"

using namespace pmtl;
using namespace pmtl::nn;

namespace {

Matrix RandomMatrix(int r, int c, Rng *rng, double scale = 1.0) {
  Matrix m(r, c);
  for (int64_t i = 0; i < m.size(); ++i) m.data()[i] = scale * rng->Normal();
  return m;
}

std::vector<int> RandomLabels(int n, int k, Rng *rng) {
  std::vector<int> y(n);
  for (int &v : y) v = static_cast<int>(rng->Below(k));
  return y;
}

}  // namespace

TEST_CASE("glorot bounds") {
  Rng rng(1);
  Matrix w = GlorotUniform(30, 20, 20, 30, &rng);
  double lim = std::sqrt(6.0 / 50.0);
  CHECK(w.maxCoeff() <= lim);
  CHECK(w.minCoeff() >= -lim);
  CHECK(w.maxCoeff() > 0.8 * lim);
}

TEST_CASE("dense forward matches the definition") {
  Rng rng(2);
  Dense d("d", 3, 2, Activation::kRelu, &rng);
  Matrix x = RandomMatrix(4, 3, &rng);
  Matrix y = d.Forward(x);
  for (int r = 0; r < 4; ++r)
    for (int o = 0; o < 2; ++o) {
      double z = d.bias().value(0, o);
      for (int i = 0; i < 3; ++i) z += x(r, i) * d.weight().value(o, i);
      CHECK(y(r, o) == doctest::Approx(std::max(z, 0.0)));
    }
  CHECK(d.Apply(x) == y);
}

TEST_CASE("dense gradients match central differences") {
  for (Activation act : {Activation::kSigmoid, Activation::kLinear, Activation::kRelu}) {
    CAPTURE(ToString(act));
    Rng rng(3);
    Dense d("d", 5, 4, act, &rng);
    Param x{"x", RandomMatrix(6, 5, &rng), {}};
    auto labels = RandomLabels(6, 4, &rng);
    std::vector<Param *> params = {&d.weight(), &d.bias(), &x};
    auto fb = [&] {
      auto res = SoftmaxXent(d.Forward(x.value), labels);
      x.grad = d.Backward(res.grad);
      return res.loss;
    };
    auto f = [&] { return SoftmaxXent(d.Apply(x.value), labels).loss; };
    auto rep = GradCheck(params, fb, f, 50, 7);
    CHECK(rep.max_rel_error < 1e-4);
    CHECK(rep.checked == 20 + 4 + 30);
  }
}

TEST_CASE("lstm gradients through seven steps") {
  Rng rng(4);
  const int steps = 7, batch = 3, in = 4, hidden = 5;
  Lstm lstm("l", in, hidden, &rng);
  Dense out("o", hidden, 3, Activation::kLinear, &rng);
  Param x{"x", RandomMatrix(steps * batch, in, &rng), {}};
  auto labels = RandomLabels(steps * batch, 3, &rng);
  std::vector<double> weights(steps * batch, 1.0);
  weights[steps * batch - 1] = 0.0;  // a masked padding row
  std::vector<Param *> params = {&lstm.input_weight(), &lstm.recurrent_weight(), &lstm.bias(),
                                 &out.weight(), &out.bias(), &x};
  auto fb = [&] {
    SequenceBatch sb{steps, batch, x.value};
    SequenceBatch h = lstm.Forward(sb);
    auto res = SoftmaxXent(out.Forward(h.data), labels, weights);
    SequenceBatch dh{steps, batch, out.Backward(res.grad)};
    x.grad = lstm.Backward(dh).data;
    return res.loss;
  };
  auto f = [&] {
    SequenceBatch sb{steps, batch, x.value};
    return SoftmaxXent(out.Apply(lstm.Apply(sb).data), labels, weights).loss;
  };
  auto rep = GradCheck(params, fb, f, 1000, 9);
  CAPTURE(rep.worst);
  CHECK(rep.max_rel_error < 1e-4);
}

TEST_CASE("lstm gate layout and state") {
  Rng rng(5);
  Lstm lstm("l", 2, 3, &rng);
  lstm.input_weight().value.setZero();
  lstm.recurrent_weight().value.setZero();
  lstm.bias().value.setZero();
  // Forget gate saturated open, input gate open, cell candidate = tanh(1).
  for (int j = 0; j < 3; ++j) {
    lstm.bias().value(0, j) = 50.0;          // input
    lstm.bias().value(0, 3 + j) = 50.0;      // forget
    lstm.bias().value(0, 6 + j) = 50.0;      // output
    lstm.bias().value(0, 9 + j) = 1.0;       // cell
  }
  SequenceBatch x{3, 1, Matrix::Zero(3, 2)};
  SequenceBatch h = lstm.Forward(x);
  for (int t = 0; t < 3; ++t)
    CHECK(h.data(t, 0) == doctest::Approx(std::tanh((t + 1) * std::tanh(1.0))));
  CHECK(lstm.gates().cols() == 12);
}

TEST_CASE("softmax cross-entropy gradients and forms agree") {
  Rng rng(6);
  Param z{"z", RandomMatrix(5, 4, &rng, 3.0), {}};
  auto labels = RandomLabels(5, 4, &rng);
  std::vector<double> w = {1, 0.5, 0, 2, 1};
  std::vector<Param *> params = {&z};
  auto fb = [&] {
    auto r = SoftmaxXent(z.value, labels, w);
    z.grad = r.grad;
    return r.loss;
  };
  auto f = [&] { return SoftmaxXent(z.value, labels, w).loss; };
  CHECK(GradCheck(params, fb, f, 100, 1).max_rel_error < 1e-4);

  Matrix onehot = Matrix::Zero(5, 4);
  for (int r = 0; r < 5; ++r) onehot(r, labels[r]) = 1;
  auto a = SoftmaxXent(z.value, onehot);
  auto b = SoftmaxXent(z.value, labels);
  CHECK(a.loss == doctest::Approx(b.loss));
  CHECK((a.grad - b.grad).cwiseAbs().maxCoeff() < 1e-15);
  double ref = 0;
  for (int r = 0; r < 5; ++r) ref -= std::log(Softmax(z.value)(r, labels[r])) / 5;
  CHECK(b.loss == doctest::Approx(ref));

  Matrix big(1, 3);
  big << 1000, 0, -1000;
  auto s = Softmax(big);
  CHECK(s.allFinite());
  CHECK(s(0, 0) == doctest::Approx(1.0));
  onehot(0, 1) = 1;
  CHECK_THROWS_AS(SoftmaxXent(z.value, onehot), Error);
}

TEST_CASE("grad check catches a wrong gradient") {
  Rng rng(7);
  Dense d("d", 3, 3, Activation::kSigmoid, &rng);
  Param x{"x", RandomMatrix(4, 3, &rng), {}};
  auto labels = RandomLabels(4, 3, &rng);
  std::vector<Param *> params = {&d.weight(), &d.bias()};
  auto fb = [&] {
    auto res = SoftmaxXent(d.Forward(x.value), labels);
    d.Backward(res.grad);
    d.weight().grad *= 1.01;  // injected fault
    return res.loss;
  };
  auto f = [&] { return SoftmaxXent(d.Apply(x.value), labels).loss; };
  auto rep = GradCheck(params, fb, f, 100, 2);
  CHECK(rep.max_rel_error > 1e-3);
  CHECK(rep.worst.rfind("d.", 0) == 0);
}

TEST_CASE("adam follows the scalar recurrence") {
  Param p{"p", Matrix::Constant(1, 1, 1.0), Matrix::Zero(1, 1)};
  std::vector<Param *> params = {&p};
  AdamState s;
  s.lr = 0.01;
  double m = 0, v = 0, theta = 1.0;
  const double grads[] = {0.5, -1.0, 2.0, 0.1, 0.0, -0.3};
  int t = 0;
  for (double g : grads) {
    ++t;
    p.grad(0, 0) = g;
    AdamStep(&s, params);
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    double mh = m / (1 - std::pow(0.9, t)), vh = v / (1 - std::pow(0.999, t));
    theta -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
    CHECK(p.value(0, 0) == doctest::Approx(theta).epsilon(1e-14));
  }
  p.grad(0, 0) = NAN;
  double before = p.value(0, 0);
  CHECK_THROWS_AS(AdamStep(&s, params), Error);
  CHECK(p.value(0, 0) == before);
}

TEST_CASE("dropout keeps the expected fraction and scale") {
  Rng rng(8);
  Matrix x = Matrix::Ones(200, 500);
  Matrix mask;
  Matrix y = Dropout(x, {0.5, DropoutSpec::Mode::kTrain}, &rng, &mask);
  double kept = (y.array() != 0.0).cast<double>().mean();
  CHECK(std::abs(kept - 0.5) < 0.01);
  CHECK(std::abs(y.mean() - 1.0) < 0.02);
  CHECK(y.maxCoeff() == 2.0);
  CHECK(mask == y);
  Matrix e = Dropout(x, {0.5, DropoutSpec::Mode::kEval}, &rng, &mask);
  CHECK(e == x);
  CHECK(mask == Matrix::Ones(200, 500));
  CHECK_THROWS_AS(Dropout(x, {1.0, DropoutSpec::Mode::kTrain}, &rng), Error);
}

TEST_CASE("global norm clipping") {
  Param a{"a", Matrix::Zero(1, 2), Matrix(1, 2)}, b{"b", Matrix::Zero(1, 1), Matrix(1, 1)};
  a.grad << 3, 4;
  b.grad << 12;
  std::vector<Param *> ps = {&a, &b};
  CHECK(ClipGlobalNorm(ps, 5.0) == doctest::Approx(13.0));
  CHECK(a.grad(0, 0) == doctest::Approx(3.0 * 5 / 13));
  CHECK(std::sqrt(a.grad.squaredNorm() + b.grad.squaredNorm()) == doctest::Approx(5.0));
  CHECK(ClipGlobalNorm(ps, 10.0) == doctest::Approx(5.0));
}

TEST_CASE("checkpoint container round trip") {
  testing::TempDir dir;
  Rng rng(9);
  std::vector<CheckpointTensor> ts = {{"w", RandomMatrix(3, 4, &rng)}, {"b", RandomMatrix(1, 4, &rng)}};
  for (auto &t : ts) t.value = t.value.cast<float>().cast<double>();
  WriteCheckpoint(dir / "c.ckpt", R"({"kind":"test"})", ts);
  std::vector<CheckpointTensor> back;
  std::string header = ReadCheckpoint(dir / "c.ckpt", &back);
  CHECK(header.find("\"kind\":\"test\"") != std::string::npos);
  REQUIRE(back.size() == 2);
  CHECK(back[0].name == "w");
  CHECK(back[0].value == ts[0].value);
  CHECK(back[1].value == ts[1].value);

  auto bytes = testing::ReadBytes(dir / "c.ckpt");
  testing::WriteText(dir / "t.ckpt", bytes + "x");
  CHECK_THROWS_AS(ReadCheckpoint(dir / "t.ckpt", &back), Error);
  testing::WriteText(dir / "m.ckpt", "PMTLCKP2" + bytes.substr(8));
  CHECK_THROWS_AS(ReadCheckpoint(dir / "m.ckpt", &back), Error);
}
