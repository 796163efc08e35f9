#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>

#include "sopt/ir.hpp"

namespace sopt {

// Similarity and difference features over a (pattern, candidate) pair, used
// as classifier inputs. Set features work on normalized opcode multisets with
// var/const/block filtered out; string features work on the canonical token
// string with one byte per instruction.

struct TokenSet {
  std::map<Token, int> counts;
  int total() const;
};

TokenSet op_tokens(const Block& b);
std::string token_string(const Block& b);

// LZW output length with the dictionary pre-seeded with all 256 byte values.
int lzw_size(std::string_view s);

// Compression-distance similarity 1 - (Z(x++y) - Z(y)) / Z(x), clamped to
// [0, 1]. x must be non-empty.
double icd_similarity(std::string_view x, std::string_view y);

// Longest-common-subsequence length over lhs_text, as a fraction of
// lhs_text's length.
double lcs_ratio(std::string_view lhs_text, std::string_view rhs_text);

struct SetSimilarities {
  double jaccard = 0;
  double overlap_min = 0;
  double overlap_max = 0;
  double dice = 0;
  double tversky = 0;
};

// Multiset similarity family. Both sets empty scores 1 across the board;
// exactly one empty scores 0. Tversky uses a = min(|x\y|, |y\x|) and
// b = max(|x\y|, |y\x|) weighted by alpha inside the beta term.
SetSimilarities set_similarities(const TokenSet& x, const TokenSet& y,
                                 double alpha, double beta);

// Cosine of degree-centrality profiles: degree/(n-1) per node (1.0 for a
// single-node graph), sorted descending, zero-padded to equal length.
double centrality_cosine(const DataflowGraph& gl, const DataflowGraph& gr);

struct CountFeatures {
  int d_constants = 0;
  int d_arith = 0;
  int d_compares = 0;
  int d_tree_depth = 0;
  int d_operands = 0;
  int d_instructions = 0;
  int d_unique_opcodes = 0;
  int d_vars = 0;
  int d_selects = 0;
  int d_bitwidth_ops = 0;  // shl/lshr/ashr before normalization
  int d_block_insts = 0;
  int d_phi_insts = 0;
};

CountFeatures count_features(const Block& lhs, const Block& rhs);

inline constexpr int kFeatureCount = 20;

// Canonical feature order; every dataset column, mask index and model input
// follows it.
enum FeatureIndex {
  kIcdSim = 0,
  kLcsRatio,
  kCosineCentrality,
  kDConstants,
  kDArith,
  kDice,
  kTversky,
  kJaccard,
  kOverlapMax,
  kDCompares,
  kDTreeDepth,
  kDOperands,
  kDInstructions,
  kDUniqueOpcodes,
  kDVars,
  kDSelects,
  kOverlapMin,
  kDBitwidthOps,
  kDBlockInsts,
  kDPhiInsts,
};

extern const std::array<std::string_view, kFeatureCount> kFeatureNames;

struct FeatureConfig {
  double tversky_alpha = 0.5;
  double tversky_beta = 0.25;
};

using FeatureVector = std::array<double, kFeatureCount>;

FeatureVector extract(const Block& lhs, const Block& rhs,
                      const FeatureConfig& cfg = {});

}  // namespace sopt
