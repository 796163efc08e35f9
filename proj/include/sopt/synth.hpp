#pragma once

#include <cstdint>
#include <vector>

#include "sopt/ir.hpp"

namespace sopt {

// Binary and select opcodes with distinct semantics; nsw variants and phi are
// left out (nsw duplicates the wrapping ops under total semantics).
std::vector<Opcode> default_opcode_set();

struct SynthConfig {
  int max_instructions = 3;  // non-leaf instructions per candidate
  std::vector<int64_t> constant_pool = {0, 1, 2, -1};
  int candidate_cap = 300;
  std::vector<Opcode> opcode_set = default_opcode_set();
  // Deterministic generation valve: once the interned term pool exceeds this
  // many entries no further terms are built. Keeps pathological configs
  // bounded without disturbing determinism.
  long term_limit = 50000;
};

// All well-typed expressions over the pattern's inputs and the constant pool,
// built from opcode_set with at most max_instructions operations per
// expression tree. Shared subexpressions are emitted once, candidates are
// deduplicated structurally, the candidate identical to the pattern itself is
// excluded, and the result is sorted by (block cost, canonical text) and
// truncated to candidate_cap.
std::vector<RhsCandidate> enumerate_candidates(const Block& lhs,
                                               const SynthConfig& cfg,
                                               const CostModel& costs);

// Post-dedup, pre-truncation candidate count for the same space.
long count_space(const Block& lhs, const SynthConfig& cfg);

}  // namespace sopt
