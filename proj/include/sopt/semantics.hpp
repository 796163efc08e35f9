#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "sopt/ir.hpp"

namespace sopt {

// Concrete interpretation: wrapping two's-complement arithmetic at the
// instruction width. Division and shift edge cases follow the usual bitvector
// conventions so every opcode is total (see eval in semantics.cpp).

struct InputAssignment {
  std::map<int, uint32_t> values;      // var id -> value, reduced mod 2^width
  std::map<int, int> phi_selectors;    // block id -> chosen predecessor

  friend bool operator==(const InputAssignment&, const InputAssignment&) = default;
};

struct OracleConfig {
  int exhaustive_bit_budget = 20;  // free input bits tolerated for full sweeps
  int sample_count = 100000;       // random assignments in the sampled regime
  uint64_t seed = 42;
  std::chrono::milliseconds per_candidate_timeout{5000};
  std::chrono::milliseconds per_lhs_time_limit{300000};

  std::string key_string() const;  // stable serialization for cache keys
};

enum class VerdictKind : uint8_t { Equivalent, NotEquivalent, Unknown };

struct Verdict {
  VerdictKind kind = VerdictKind::Unknown;
  bool sampled = false;  // equivalence established by sampling, not a sweep
  std::optional<InputAssignment> counterexample;
};

// Value of the root under the given inputs. Requires a value for every var;
// missing phi selectors default to 0.
uint32_t eval(const Block& b, const InputAssignment& a);

// Deterministic probe set over the block's inputs: corner assignments first
// (all-zeros, all-ones, one, sign bit, per-var mixes, deduplicated), then
// seeded uniform values, truncated or extended to exactly n. Phi selectors
// cycle over predecessor indices.
std::vector<InputAssignment> probe_vectors(const Block& b, int n, uint64_t seed);

// Equivalence under all (or sampled) shared inputs. Blocks must have equal
// root widths; shared var ids must agree on width. When the free input bits
// fit the budget the sweep is exhaustive, otherwise corners plus sample_count
// seeded assignments are tested and an Equivalent verdict is flagged sampled.
// The per-candidate timeout yields Unknown.
Verdict check_equivalence(const Block& lhs, const Block& rhs, const OracleConfig& cfg);

}  // namespace sopt
