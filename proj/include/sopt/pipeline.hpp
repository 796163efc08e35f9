#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sopt/io.hpp"
#include "sopt/mlp.hpp"
#include "sopt/semantics.hpp"
#include "sopt/synth.hpp"

namespace sopt {

// End-to-end optimization: enumerate candidates for a pattern, prune, verify
// survivors cheapest-first, and keep the first equivalent improvement.

enum class Strategy {
  Baseline,              // verify every viable candidate
  QuickCheck,            // drop candidates that fail concrete probe rows
  PrediPrune,            // drop candidates the classifier scores below threshold
  PrediPruneQuickCheck,  // probes first, then the classifier
};

inline constexpr Strategy kAllStrategies[] = {
    Strategy::Baseline, Strategy::QuickCheck, Strategy::PrediPrune,
    Strategy::PrediPruneQuickCheck};

std::string strategy_name(Strategy s);
// Accepts the canonical names plus "combined" for the probes+classifier stack.
std::optional<Strategy> strategy_from_name(const std::string& name);

// Append-only verdict cache keyed by (pattern text, candidate text, oracle
// config). Records carry a checksum; a torn final record (interrupted write)
// is discarded on open, a failed checksum raises. Unknown verdicts are never
// stored so a later run with more budget can retry them.
class CacheStore {
 public:
  CacheStore() = default;  // disabled: get misses, put is a no-op

  static CacheStore open(const std::string& path);

  bool enabled() const { return !path_.empty(); }
  size_t size() const { return entries_.size(); }

  std::optional<Verdict> get(const std::string& lhs_text,
                             const std::string& rhs_text,
                             const OracleConfig& cfg) const;
  void put(const std::string& lhs_text, const std::string& rhs_text,
           const OracleConfig& cfg, const Verdict& verdict);

 private:
  std::string path_;
  std::map<uint64_t, Verdict> entries_;
  std::ofstream out_;
};

struct PipelineConfig {
  SynthConfig synth;
  OracleConfig oracle;
  FeatureConfig features;
  CostModel costs = CostModel::standard();
  int quickcheck_probes = 64;
};

struct OptimizeResult {
  std::optional<RhsCandidate> best;  // cheapest equivalent strict improvement
  int lhs_cost = 0;
  int best_cost = 0;  // equals lhs_cost when nothing was found

  // Every generated candidate lands in exactly one bucket:
  // skipped + pruned_quickcheck + pruned_model + oracle_calls + cache_hits
  // == generated.
  long generated = 0;
  long skipped = 0;  // not a cost improvement, or after the accepted winner
  long pruned_quickcheck = 0;
  long pruned_model = 0;
  long oracle_calls = 0;
  long cache_hits = 0;
  long unknown = 0;  // oracle calls that timed out (counted in oracle_calls)
};

// model may be null unless the strategy consults the classifier; cache may be
// null to disable caching.
OptimizeResult optimize_lhs(const LhsPattern& lhs, Strategy strategy,
                            const PipelineConfig& cfg, const Model* model,
                            CacheStore* cache);

struct StrategyReport {
  Strategy strategy = Strategy::Baseline;
  long lhs_count = 0;
  long optimized = 0;  // patterns where an improvement was found
  long generated = 0;
  long skipped = 0;
  long pruned_quickcheck = 0;
  long pruned_model = 0;
  long oracle_calls = 0;
  long cache_hits = 0;
  long unknown = 0;
  long cost_before = 0;
  long cost_after = 0;
  double wall_time_s = 0;

  long cost_decrease() const { return cost_before - cost_after; }
};

StrategyReport run_strategy(
    const std::vector<std::pair<std::string, LhsPattern>>& patterns,
    Strategy strategy, const PipelineConfig& cfg, const Model* model,
    CacheStore* cache);

// One row per report; wall_time_s is the only non-reproducible column.
CsvTable reports_to_csv(const std::vector<StrategyReport>& reports);

struct ParetoPoint {
  std::string label;
  double oracle_calls = 0;
  double cost_decrease = 0;
  bool on_front = false;
};

// Marks the points not dominated under (fewer oracle calls, larger cost
// decrease). Ties are kept on the front.
void mark_pareto_front(std::vector<ParetoPoint>& points);

// All *.sir files under dir in filename order, parsed as patterns and named
// by their file stem.
std::vector<std::pair<std::string, LhsPattern>> load_corpus(
    const std::string& dir);

}  // namespace sopt
