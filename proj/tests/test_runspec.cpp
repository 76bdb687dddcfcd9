#include <doctest.h>

#include "memlab/runspec.hpp"

using namespace memlab;

TEST_SUITE("runspec") {

TEST_CASE("defaults materialize from an empty document") {
  const auto spec = runspec::parse_spec(nlohmann::json::object(), "test");
  CHECK(spec.seed == 1);
  CHECK(spec.trials == 600);
  CHECK(spec.replications == 4);
  CHECK(spec.study.exposures == 3);
  CHECK(spec.model.n_layers == 4);
  CHECK(spec.model.d_model == 128);
  CHECK(spec.model.context_len == 128);
  CHECK(spec.sweep.lrs.size() == 7);
  CHECK(spec.sweep.batch_sizes == std::vector<int>{8, 16, 32, 64});
  CHECK(spec.retention_schedule.steps ==
        std::vector<std::int64_t>{0, 1, 3, 10, 30, 100, 300, 1000, 3000, 10000});
  CHECK(spec.experiments == std::vector<int>{1, 2, 3, 4, 5, 6});
  CHECK(spec.random_word_count == 25);
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK_THROWS_WITH_AS(runspec::parse_spec({{"sede", 3}}, "t"),
                       doctest::Contains("sede"), runspec::SpecError);
  CHECK_THROWS_AS(runspec::parse_spec({{"study", {{"exposure", 2}}}}, "t"),
                  runspec::SpecError);
  CHECK_THROWS_AS(runspec::parse_spec({{"model", {{"dmodel", 64}}}}, "t"),
                  runspec::SpecError);
}

TEST_CASE("values flow through and invalid ones are refused") {
  nlohmann::json doc{
      {"seed", 99},
      {"trials", 60},
      {"experiments", {1, 4}},
      {"study", {{"exposures", 2}, {"lr", 5e-4}, {"batch_size", 8}}},
      {"retention", {{"schedule", {0, 1, 10}}, {"lr", 2e-4}}},
  };
  const auto spec = runspec::parse_spec(doc, "t");
  CHECK(spec.seed == 99);
  CHECK(spec.study.exposures == 2);
  CHECK(spec.study.seed == 99);
  CHECK(spec.retention_lr.has_value());
  CHECK(*spec.retention_lr == 2e-4);
  CHECK(spec.experiments == std::vector<int>{1, 4});

  CHECK_THROWS(runspec::parse_spec({{"experiments", {0}}}, "t"));
  CHECK_THROWS(runspec::parse_spec({{"study", {{"exposures", 4}}}}, "t"));
  CHECK_THROWS(runspec::parse_spec({{"retention", {{"schedule", {1, 2}}}}}, "t"));
  CHECK_THROWS(runspec::parse_spec({{"sweep", {{"metric", "nonsense"}}}}, "t"));
}

TEST_CASE("the resolved document echoes every field") {
  const auto spec = runspec::parse_spec({{"seed", 12}, {"trials", 30}}, "t");
  const auto j = spec.resolved();
  CHECK(j["seed"] == 12);
  CHECK(j["trials"] == 30);
  CHECK(j.contains("model"));
  CHECK(j.contains("study"));
  CHECK(j.contains("sweep"));
  CHECK(j.contains("retention"));
  CHECK(j["retention"]["lr"] == j["study"]["lr"]);  // default follows study lr
}

TEST_CASE("missing spec files raise an error naming the path") {
  CHECK_THROWS_WITH_AS(runspec::load_spec("definitely_missing.json"),
                       doctest::Contains("definitely_missing.json"),
                       runspec::SpecError);
}

}  // TEST_SUITE
