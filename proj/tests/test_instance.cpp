#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "procure/instance.hpp"
#include "procure/rng.hpp"
#include "test_support.hpp"

using namespace procure;
using procure::testing::tiny;

namespace {

EffectFunction table_one_fn() {
  EffectFunction fn;
  fn.groups = {{{0, 0.4}, {1, 0.6}}, {{2, 1.0}}, {{3, 0.2}, {4, 0.8}}, {{5, 1.0}}};
  return fn;
}

std::string tiny_text() {
  std::ifstream in(procure::testing::data_path("tiny.json"));
  return std::string(std::istreambuf_iterator<char>(in), {});
}

EffectFunction random_fn(Rng& rng, std::size_t items) {
  EffectFunction fn;
  for (std::size_t j = 0; j < items; ++j) {
    if (fn.groups.empty() || uniform01(rng) < 0.5) fn.groups.emplace_back();
    fn.groups.back().push_back({static_cast<int>(j), uniform_real(rng, 0.05, 1.0)});
  }
  for (auto& g : fn.groups) {
    double sum = 0;
    for (auto& w : g) sum += w.weight;
    for (auto& w : g) w.weight /= sum;
  }
  return fn;
}

}  // namespace

TEST_CASE("eval_effect on the epidemic structure") {
  const auto fn = table_one_fn();
  const std::vector<double> ones(6, 1.0);
  CHECK(eval_effect(fn, ones) == doctest::Approx(1.0).epsilon(1e-15));
  std::vector<double> body = ones;
  body[0] = 0.7;
  CHECK(eval_effect(fn, body) == doctest::Approx(0.88).epsilon(1e-12));
}

TEST_CASE("eval_effect weighted sum and size mismatch") {
  EffectFunction fn;
  fn.groups = {{{0, 0.5}, {1, 0.5}}};
  const std::vector<double> e{0.2, 0.6};
  CHECK(eval_effect(fn, e) == doctest::Approx(0.4).epsilon(1e-15));
  const std::vector<double> short_e{0.2};
  CHECK_THROWS_AS(eval_effect(fn, short_e), StructuralError);
  CHECK(fn.arity() == 2);
}

TEST_CASE("eval_effect stays in [0,1] and is monotone") {
  Rng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 6);
    const auto fn = random_fn(rng, n);
    std::vector<double> e(n);
    for (auto& v : e) v = uniform01(rng);
    const double base = eval_effect(fn, e);
    REQUIRE(base >= 0.0);
    REQUIRE(base <= 1.0 + 1e-12);
    const std::size_t j = uniform_index(rng, n);
    e[j] = uniform_real(rng, e[j], 1.0);
    REQUIRE(eval_effect(fn, e) >= base - 1e-15);
  }
}

TEST_CASE("suspected case count") {
  auto inst = tiny();
  CHECK(inst.epidemic.suspected_cases == 1);

  inst.diseases[0].suspect_prob = 0.1;
  inst.diseases[0].companion_suspect_prob = 0.05;
  inst.diseases[0].companions = 2.0;
  inst.diseases[0].upper_cases = 100;
  inst.diseases[0].expected_cases = 50;
  CHECK(compute_suspected_cases(inst) == 20);
  CHECK(inst.epidemic.suspected_cases == 20);

  inst.diseases[0].suspect_prob = 0.0;
  inst.diseases[0].companion_suspect_prob = 0.0;
  CHECK(suspected_cases(inst) == 0);

  inst.diseases.clear();
  CHECK(suspected_cases(inst) == 0);
}

TEST_CASE("suspected case count is monotone") {
  auto inst = tiny();
  Count prev = suspected_cases(inst);
  for (int step = 0; step < 20; ++step) {
    inst.diseases[0].suspect_prob = std::min(1.0, inst.diseases[0].suspect_prob + 0.03);
    const Count now = suspected_cases(inst);
    CHECK(now >= prev);
    prev = now;
  }
  for (Count r = 4; r < 40; ++r) {
    inst.diseases[0].upper_cases = r;
    const Count now = suspected_cases(inst);
    CHECK(now >= prev);
    prev = now;
  }
}

TEST_CASE("TINY loads with canonical order and profile accessors") {
  const auto inst = tiny();
  CHECK(inst.supply_count() == 6);
  CHECK(inst.profile_count() == 2);
  CHECK(inst.profile(0).mandatory_count() == 1);
  CHECK(inst.profile(1).alternative_items().size() == 1);
  CHECK(inst.expected_profile_cases(0) == 1);
  CHECK(inst.expected_profile_cases(1) == 4);
  CHECK(inst.diseases[0].working_hours() == 8);
  const auto split = supply_split(inst);
  CHECK(split.epidemic == 3);
  CHECK(split.common == 3);
}

TEST_CASE("save and load round trip") {
  const auto inst = tiny();
  const auto path = std::filesystem::temp_directory_path() / "procure_roundtrip.json";
  save_instance(inst, path);
  CHECK(load_instance(path) == inst);
  CHECK(instance_from_json(instance_to_json(inst)) == inst);
  std::filesystem::remove(path);
}

TEST_CASE("canonical order is restored on load") {
  auto j = nlohmann::json::parse(tiny_text());
  auto& alts = j["diseases"][0]["items"][1]["alternatives"];
  std::swap(alts[0], alts[1]);
  const auto inst = instance_from_json(j.dump());
  const auto& a = inst.diseases[0].items[1].alternatives;
  CHECK(a[0].supply == 5);
  CHECK(a[1].supply == 6);
  CHECK(inst == tiny());
}

TEST_CASE("validation and parse errors") {
  const auto base = nlohmann::json::parse(tiny_text());

  auto bad_weights = base;
  bad_weights["diseases"][0]["effect_groups"][0][0]["weight"] = 0.9;
  CHECK_THROWS_AS(instance_from_json(bad_weights.dump()), ValidationError);

  auto unknown_supply = base;
  unknown_supply["diseases"][0]["items"][1]["alternatives"][0]["supply"] = 42;
  CHECK_THROWS_AS(instance_from_json(unknown_supply.dump()), ValidationError);

  auto bad_cases = base;
  bad_cases["diseases"][0]["lower_cases"] = 5;
  CHECK_THROWS_AS(instance_from_json(bad_cases.dump()), ValidationError);

  auto bad_effect = base;
  bad_effect["diseases"][0]["items"][1]["alternatives"][1]["effect"] = 1.5;
  CHECK_THROWS_AS(instance_from_json(bad_effect.dump()), ValidationError);

  auto neg_price = base;
  neg_price["supplies"][2]["price_cents"] = -1;
  CHECK_THROWS_AS(instance_from_json(neg_price.dump()), ValidationError);

  auto extra_key = base;
  extra_key["diseases"][0]["colour"] = "red";
  CHECK_THROWS_AS(instance_from_json(extra_key.dump()), ParseError);

  auto missing_key = base;
  missing_key.erase("budget_cents");
  CHECK_THROWS_AS(instance_from_json(missing_key.dump()), ParseError);

  auto wrong_type = base;
  wrong_type["supplies"][0]["inventory"] = "many";
  CHECK_THROWS_AS(instance_from_json(wrong_type.dump()), ParseError);

  CHECK_THROWS_AS(instance_from_json("{not json"), ParseError);
}

TEST_CASE("parse errors name the location") {
  auto j = nlohmann::json::parse(tiny_text());
  j["diseases"][0]["items"][1]["alternatives"][0]["qty"] = "two";
  try {
    instance_from_json(j.dump());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("diseases") != std::string::npos);
    CHECK(std::string(e.what()).find("qty") != std::string::npos);
  }
}
