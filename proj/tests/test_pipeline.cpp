#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "sopt/pipeline.hpp"

using namespace sopt;

namespace {

namespace fs = std::filesystem;

fs::path temp_path(const char* name) {
  fs::path p = fs::temp_directory_path() / name;
  fs::remove(p);
  return p;
}

long bucket_sum(const OptimizeResult& r) {
  return r.skipped + r.pruned_quickcheck + r.pruned_model + r.oracle_calls +
         r.cache_hits;
}

Block mul2_lhs() {
  return parse_block("%0:i8 = var\n%1:i8 = mul %0, 2:i8\ninfer %1\n");
}

// scores everything strictly inside (0, 1); with threshold 0 it keeps all
// candidates, with a threshold above 1 it drops them all
Model dummy_model(double threshold) {
  Model m;
  for (int i = 0; i < kFeatureCount; i++) {
    m.mask.push_back(i);
    m.scaler.mean.push_back(0.0);
    m.scaler.std.push_back(1.0);
  }
  Rng rng(5);
  m.net = Net::init({kFeatureCount, 4, 1}, rng);
  m.threshold = threshold;
  return m;
}

}  // namespace

TEST_CASE("strategy names round-trip and accept the combined alias") {
  for (Strategy s : kAllStrategies) {
    auto back = strategy_from_name(strategy_name(s));
    REQUIRE(back.has_value());
    CHECK(*back == s);
  }
  CHECK(strategy_from_name("combined") == Strategy::PrediPruneQuickCheck);
  CHECK(!strategy_from_name("turbo").has_value());
}

TEST_CASE("the verdict cache persists across reopen") {
  auto path = temp_path("sopt_cache_test.bin");
  OracleConfig cfg;
  Verdict eq;
  eq.kind = VerdictKind::Equivalent;
  Verdict ne;
  ne.kind = VerdictKind::NotEquivalent;
  ne.sampled = true;
  InputAssignment cx;
  cx.values = {{0, 7}, {3, 250}};
  cx.phi_selectors = {{1, 1}};
  ne.counterexample = cx;

  {
    CacheStore store = CacheStore::open(path.string());
    CHECK(store.enabled());
    CHECK(store.size() == 0);
    store.put("lhs-a", "rhs-a", cfg, eq);
    store.put("lhs-a", "rhs-b", cfg, ne);
    CHECK(store.size() == 2);
    auto got = store.get("lhs-a", "rhs-a", cfg);
    REQUIRE(got.has_value());
    CHECK(got->kind == VerdictKind::Equivalent);
  }
  {
    CacheStore store = CacheStore::open(path.string());
    CHECK(store.size() == 2);
    auto got = store.get("lhs-a", "rhs-b", cfg);
    REQUIRE(got.has_value());
    CHECK(got->kind == VerdictKind::NotEquivalent);
    CHECK(got->sampled);
    REQUIRE(got->counterexample.has_value());
    CHECK(*got->counterexample == cx);
    // the oracle settings are part of the key
    OracleConfig other = cfg;
    other.seed = 1;
    CHECK(!store.get("lhs-a", "rhs-b", other).has_value());
    CHECK(!store.get("lhs-a", "rhs-c", cfg).has_value());
  }
  fs::remove(path);
}

TEST_CASE("unknown verdicts are not cached") {
  auto path = temp_path("sopt_cache_unknown.bin");
  CacheStore store = CacheStore::open(path.string());
  store.put("l", "r", OracleConfig{}, Verdict{});
  CHECK(store.size() == 0);
  CHECK(!store.get("l", "r", OracleConfig{}).has_value());
  fs::remove(path);
}

TEST_CASE("a torn tail is truncated, a corrupt record raises") {
  auto path = temp_path("sopt_cache_torn.bin");
  OracleConfig cfg;
  Verdict eq;
  eq.kind = VerdictKind::Equivalent;
  {
    CacheStore store = CacheStore::open(path.string());
    store.put("l1", "r1", cfg, eq);
    store.put("l2", "r2", cfg, eq);
  }
  auto clean_size = fs::file_size(path);
  {
    std::ofstream f(path, std::ios::binary | std::ios::app);
    f.write("\x05\x00\x00\x00garbage", 4);  // a length with no body behind it
  }
  {
    CacheStore store = CacheStore::open(path.string());
    CHECK(store.size() == 2);
  }
  CHECK(fs::file_size(path) == clean_size);  // reopen repaired the file

  // flip one byte inside the first record body
  {
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(8 + 4 + 2);
    f.put('\xff');
  }
  CHECK_THROWS_AS(CacheStore::open(path.string()), std::runtime_error);
  fs::remove(path);

  atomic_write(path.string(), "NOTACACHE");
  CHECK_THROWS_AS(CacheStore::open(path.string()), std::runtime_error);
  fs::remove(path);
}

TEST_CASE("a disabled cache misses and swallows puts") {
  CacheStore store;
  CHECK(!store.enabled());
  Verdict eq;
  eq.kind = VerdictKind::Equivalent;
  store.put("l", "r", OracleConfig{}, eq);
  CHECK(!store.get("l", "r", OracleConfig{}).has_value());
  CHECK(store.size() == 0);
}

TEST_CASE("baseline finds the cheapest equivalent rewrite") {
  PipelineConfig cfg;
  OptimizeResult r = optimize_lhs(mul2_lhs(), Strategy::Baseline, cfg, nullptr,
                                  nullptr);
  CHECK(r.lhs_cost == 2);
  CHECK(r.best_cost == 1);
  REQUIRE(r.best.has_value());
  CHECK(print_block(*r.best) == "%0:i8 = var\n%2:i8 = add %0, %0\nresult %2\n");
  // the var and four constant leaves verify first, then the winner
  CHECK(r.oracle_calls == 6);
  CHECK(r.pruned_quickcheck == 0);
  CHECK(r.pruned_model == 0);
  CHECK(r.cache_hits == 0);
  CHECK(r.unknown == 0);
  CHECK(bucket_sum(r) == r.generated);
}

TEST_CASE("probe pruning removes almost every inequivalent candidate") {
  PipelineConfig cfg;
  OptimizeResult base =
      optimize_lhs(mul2_lhs(), Strategy::Baseline, cfg, nullptr, nullptr);
  OptimizeResult quick =
      optimize_lhs(mul2_lhs(), Strategy::QuickCheck, cfg, nullptr, nullptr);
  CHECK(quick.generated == base.generated);
  CHECK(quick.pruned_quickcheck > 0);
  CHECK(quick.oracle_calls == 1);  // survivors start with the true rewrite
  CHECK(quick.best_cost == base.best_cost);
  CHECK(print_block(*quick.best) == print_block(*base.best));
  CHECK(bucket_sum(quick) == quick.generated);
}

TEST_CASE("a zero threshold model prunes nothing, an impossible one everything") {
  PipelineConfig cfg;
  Model keep_all = dummy_model(0.0);
  OptimizeResult base =
      optimize_lhs(mul2_lhs(), Strategy::Baseline, cfg, nullptr, nullptr);
  OptimizeResult open =
      optimize_lhs(mul2_lhs(), Strategy::PrediPrune, cfg, &keep_all, nullptr);
  CHECK(open.pruned_model == 0);
  CHECK(open.oracle_calls == base.oracle_calls);
  CHECK(print_block(*open.best) == print_block(*base.best));

  Model drop_all = dummy_model(1.1);
  OptimizeResult closed =
      optimize_lhs(mul2_lhs(), Strategy::PrediPrune, cfg, &drop_all, nullptr);
  CHECK(!closed.best.has_value());
  CHECK(closed.oracle_calls == 0);
  CHECK(closed.best_cost == closed.lhs_cost);
  CHECK(closed.pruned_model == closed.generated - closed.skipped);
  CHECK(bucket_sum(closed) == closed.generated);

  CHECK_THROWS_AS(
      optimize_lhs(mul2_lhs(), Strategy::PrediPrune, cfg, nullptr, nullptr),
      std::invalid_argument);
}

TEST_CASE("the combined strategy stacks probes before the model") {
  PipelineConfig cfg;
  Model keep_all = dummy_model(0.0);
  OptimizeResult quick =
      optimize_lhs(mul2_lhs(), Strategy::QuickCheck, cfg, nullptr, nullptr);
  OptimizeResult both = optimize_lhs(mul2_lhs(), Strategy::PrediPruneQuickCheck,
                                     cfg, &keep_all, nullptr);
  CHECK(both.pruned_quickcheck == quick.pruned_quickcheck);
  CHECK(both.pruned_model == 0);
  CHECK(both.oracle_calls == quick.oracle_calls);
  CHECK(bucket_sum(both) == both.generated);
}

TEST_CASE("a warm cache eliminates oracle calls and keeps outcomes") {
  auto path = temp_path("sopt_cache_warm.bin");
  PipelineConfig cfg;
  OptimizeResult cold, warm;
  {
    CacheStore store = CacheStore::open(path.string());
    cold = optimize_lhs(mul2_lhs(), Strategy::Baseline, cfg, nullptr, &store);
  }
  {
    CacheStore store = CacheStore::open(path.string());
    warm = optimize_lhs(mul2_lhs(), Strategy::Baseline, cfg, nullptr, &store);
  }
  CHECK(cold.oracle_calls == 6);
  CHECK(cold.cache_hits == 0);
  CHECK(warm.oracle_calls == 0);
  CHECK(warm.cache_hits == cold.oracle_calls);
  CHECK(warm.best_cost == cold.best_cost);
  CHECK(print_block(*warm.best) == print_block(*cold.best));
  CHECK(bucket_sum(warm) == warm.generated);

  // a different oracle configuration must not reuse those verdicts
  PipelineConfig other = cfg;
  other.oracle.seed = 7;
  {
    CacheStore store = CacheStore::open(path.string());
    OptimizeResult miss =
        optimize_lhs(mul2_lhs(), Strategy::Baseline, other, nullptr, &store);
    CHECK(miss.cache_hits == 0);
    CHECK(miss.oracle_calls == 6);
  }
  fs::remove(path);
}

TEST_CASE("run_strategy aggregates counters over the corpus") {
  std::vector<std::pair<std::string, LhsPattern>> patterns = {
      {"a", mul2_lhs()},
      {"b", parse_block("%0:i8 = var\n%1:i8 = add %0, 0:i8\ninfer %1\n")}};
  PipelineConfig cfg;
  StrategyReport rep =
      run_strategy(patterns, Strategy::Baseline, cfg, nullptr, nullptr);
  CHECK(rep.lhs_count == 2);
  CHECK(rep.optimized == 2);  // add-zero collapses to the bare variable
  CHECK(rep.cost_before == 3);
  CHECK(rep.cost_after == 1);
  CHECK(rep.cost_decrease() == 2);
  CHECK(rep.skipped + rep.pruned_quickcheck + rep.pruned_model +
            rep.oracle_calls + rep.cache_hits ==
        rep.generated);

  CsvTable t = reports_to_csv({rep});
  CHECK(t.column("strategy") == 0);
  CHECK(t.column("wall_time_s") == static_cast<int>(t.header.size()) - 1);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][0] == "baseline");
  CHECK(t.rows[0][t.column("cost_decrease")] == "2");
}

TEST_CASE("pareto marking keeps only undominated points") {
  std::vector<ParetoPoint> pts = {{"a", 10, 5, false},
                                  {"b", 8, 5, false},
                                  {"c", 8, 3, false},
                                  {"d", 12, 6, false}};
  mark_pareto_front(pts);
  CHECK(!pts[0].on_front);  // beaten by b on calls
  CHECK(pts[1].on_front);
  CHECK(!pts[2].on_front);  // beaten by b on decrease
  CHECK(pts[3].on_front);   // most decrease, nothing beats it

  // duplicate points survive as ties
  std::vector<ParetoPoint> dup = {{"x", 1, 1, false}, {"y", 1, 1, false}};
  mark_pareto_front(dup);
  CHECK(dup[0].on_front);
  CHECK(dup[1].on_front);
}

TEST_CASE("corpus loading orders by filename and requires parseable files") {
  auto dir = fs::temp_directory_path() / "sopt_corpus_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  atomic_write((dir / "b_second.sir").string(),
               "%0:i8 = var\n%1:i8 = add %0, %0\ninfer %1\n");
  atomic_write((dir / "a_first.sir").string(), "%0:i4 = var\ninfer %0\n");
  atomic_write((dir / "notes.txt").string(), "ignored");

  auto patterns = load_corpus(dir.string());
  REQUIRE(patterns.size() == 2);
  CHECK(patterns[0].first == "a_first");
  CHECK(patterns[1].first == "b_second");
  CHECK(patterns[0].second.role == BlockRole::Lhs);

  atomic_write((dir / "c_broken.sir").string(), "%0:i8 = nonsense\ninfer %0\n");
  CHECK_THROWS_AS(load_corpus(dir.string()), std::runtime_error);
  fs::remove_all(dir);

  CHECK_THROWS_AS(load_corpus((dir / "missing").string()), std::runtime_error);
}
