// tests/test_config.cc

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

#include <functional>

#include "config.h"
#include "test_util.h"

using namespace pmtl;

namespace {

ErrorCode CodeOf(const std::function<void()> &f) {
  try {
    f();
  } catch (const Error &e) {
    return e.code();
  }
  return ErrorCode::kState;
}

}  // namespace

TEST_CASE("run config round trips through json") {
  RunConfig c;
  c.seed = 99;
  c.protocol = Protocol::kAggregated;
  c.group_key = GroupKey::kCorpusNaturalness;
  c.manifests = {"a.csv", "b.csv"};
  c.grid = true;
  c.jobs = 3;
  c.synth = SynthConfig{};
  c.synth->class_balance = std::array<double, 4>{1, 2, 3, 4};
  c.network = MtlNetworkConfig::Defaults(TrunkType::kDnn);
  c.network.layer_sizes = {32, 32};
  c.train.max_epochs = 7;
  c.train.patience = 3;
  c.elm.n_hidden = 50;
  c.hlf_theta = 0.3;
  c.tsne.perplexity = 12;

  Json j = ToJson(c);
  CHECK_FALSE(j["train"].contains("seed"));
  RunConfig back;
  FromJson(j, &back);
  CHECK(ToJson(back) == j);
  CHECK(back.network.context_frames == 25);
  CHECK(back.synth->class_balance == c.synth->class_balance);
}

TEST_CASE("trunk key resets trunk-dependent defaults") {
  MtlNetworkConfig n;
  FromJson(ParseJson(R"({"trunk":"dnn"})", "t"), &n);
  CHECK(n.layer_sizes == std::vector<int>{256, 256, 256});
  CHECK(n.context_frames == 25);
  FromJson(ParseJson(R"({"trunk":"lstm","layer_sizes":[32,32]})", "t"), &n);
  CHECK(n.layer_sizes == std::vector<int>{32, 32});
  CHECK(n.context_frames == 1);
  FromJson(ParseJson(R"({"subtasks":"gender"})", "t"), &n);
  CHECK(n.subtasks == SubtaskMode::kGenderOnly);
}

TEST_CASE("partial objects keep existing values") {
  TrainConfig t;
  t.lr = 0.5;
  FromJson(ParseJson(R"({"batch_size":16})", "t"), &t);
  CHECK(t.batch_size == 16);
  CHECK(t.lr == 0.5);
}

TEST_CASE("malformed configuration is rejected with parse errors") {
  RunConfig c;
  CHECK(CodeOf([&] { FromJson(ParseJson(R"({"sed":1})", "t"), &c); }) == ErrorCode::kParse);
  CHECK(CodeOf([&] { FromJson(ParseJson(R"({"train":{"epochs":1}})", "t"), &c); }) ==
        ErrorCode::kParse);
  CHECK(CodeOf([&] { FromJson(ParseJson(R"({"seed":-1})", "t"), &c); }) == ErrorCode::kParse);
  CHECK(CodeOf([&] { FromJson(ParseJson(R"({"jobs":1.5})", "t"), &c); }) == ErrorCode::kParse);
  CHECK(CodeOf([&] { FromJson(ParseJson(R"({"protocol":3})", "t"), &c); }) == ErrorCode::kParse);
  CHECK(CodeOf([&] { FromJson(ParseJson(R"({"protocol":"loso"})", "t"), &c); }) ==
        ErrorCode::kParse);
  CHECK(CodeOf([&] { FromJson(ParseJson(R"([1,2])", "t"), &c); }) == ErrorCode::kParse);
  CHECK(CodeOf([&] { ParseJson("{", "t"); }) == ErrorCode::kParse);
  CHECK(CodeOf([&] { ReadJsonFile("/nonexistent/x.json"); }) == ErrorCode::kIo);
}

TEST_CASE("semantic validation") {
  RunConfig c;
  CHECK_NOTHROW(c.Validate());
  c.hlf_theta = 1.0;
  CHECK(CodeOf([&] { c.Validate(); }) == ErrorCode::kInvalidArgument);
  c = {};
  c.jobs = 0;
  CHECK_THROWS_AS(c.Validate(), Error);
  c = {};
  c.network.trunk = TrunkType::kLstm;
  c.network.context_frames = 5;
  CHECK_THROWS_AS(c.Validate(), Error);
}

TEST_CASE("json files are written deterministically") {
  testing::TempDir dir;
  RunConfig c;
  WriteJsonFile((dir / "a.json").string(), ToJson(c));
  WriteJsonFile((dir / "b.json").string(), ToJson(c));
  auto a = testing::ReadBytes(dir / "a.json");
  CHECK(a == testing::ReadBytes(dir / "b.json"));
  CHECK(a.back() == '\n');
  CHECK(ReadJsonFile((dir / "a.json").string()) == ToJson(c));
}
