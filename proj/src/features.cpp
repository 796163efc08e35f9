#include "sopt/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace sopt {

int TokenSet::total() const {
  int t = 0;
  for (auto& [tok, n] : counts) t += n;
  return t;
}

TokenSet op_tokens(const Block& b) {
  TokenSet s;
  for (const auto& inst : b.instructions) {
    Token t = normalize_opcode(inst.op);
    if (t == Token::Var || t == Token::Const || t == Token::Block) continue;
    s.counts[t]++;
  }
  return s;
}

std::string token_string(const Block& b) {
  std::string s;
  s.reserve(b.instructions.size());
  for (const auto& inst : b.instructions) s += token_char(normalize_opcode(inst.op));
  return s;
}

int lzw_size(std::string_view s) {
  if (s.empty()) return 0;
  // Dictionary holds all single bytes up front; longer entries are keyed by
  // (prefix code, next byte) so no string storage is needed.
  std::unordered_map<uint64_t, int> dict;
  int next_code = 256;
  int out = 0;
  int cur = static_cast<unsigned char>(s[0]);
  for (size_t i = 1; i < s.size(); i++) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    uint64_t key = (static_cast<uint64_t>(cur) << 8) | c;
    auto it = dict.find(key);
    if (it != dict.end()) {
      cur = it->second;
    } else {
      out++;
      dict.emplace(key, next_code++);
      cur = c;
    }
  }
  out++;  // flush the pending phrase
  return out;
}

double icd_similarity(std::string_view x, std::string_view y) {
  if (x.empty()) throw std::invalid_argument("icd_similarity: x must be non-empty");
  std::string xy;
  xy.reserve(x.size() + y.size());
  xy.append(x);
  xy.append(y);
  double zx = lzw_size(x);
  double zy = lzw_size(y);
  double zxy = lzw_size(xy);
  double sim = 1.0 - (zxy - zy) / zx;
  return std::clamp(sim, 0.0, 1.0);
}

double lcs_ratio(std::string_view lhs_text, std::string_view rhs_text) {
  size_t n = lhs_text.size(), m = rhs_text.size();
  if (n == 0) return 0.0;
  std::vector<int> prev(m + 1, 0), cur(m + 1, 0);
  for (size_t i = 1; i <= n; i++) {
    for (size_t j = 1; j <= m; j++) {
      if (lhs_text[i - 1] == rhs_text[j - 1])
        cur[j] = prev[j - 1] + 1;
      else
        cur[j] = std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return static_cast<double>(prev[m]) / static_cast<double>(n);
}

SetSimilarities set_similarities(const TokenSet& x, const TokenSet& y,
                                 double alpha, double beta) {
  int inter = 0, uni = 0, nx = 0, ny = 0;
  std::set<Token> keys;
  for (auto& [t, c] : x.counts) keys.insert(t);
  for (auto& [t, c] : y.counts) keys.insert(t);
  for (Token t : keys) {
    auto ix = x.counts.find(t);
    auto iy = y.counts.find(t);
    int cx = ix == x.counts.end() ? 0 : ix->second;
    int cy = iy == y.counts.end() ? 0 : iy->second;
    inter += std::min(cx, cy);
    uni += std::max(cx, cy);
    nx += cx;
    ny += cy;
  }
  SetSimilarities r;
  if (nx == 0 && ny == 0) {
    r.jaccard = r.overlap_min = r.overlap_max = r.dice = r.tversky = 1.0;
    return r;
  }
  if (nx == 0 || ny == 0) return r;  // all zeros
  r.jaccard = static_cast<double>(inter) / uni;
  r.overlap_min = static_cast<double>(inter) / std::min(nx, ny);
  r.overlap_max = static_cast<double>(inter) / std::max(nx, ny);
  r.dice = 2.0 * inter / (nx + ny);
  int a = std::min(nx - inter, ny - inter);
  int b = std::max(nx - inter, ny - inter);
  r.tversky = inter / (inter + beta * (alpha * a + (1 - alpha) * b));
  return r;
}

namespace {

std::vector<double> centrality_profile(const DataflowGraph& g) {
  size_t n = g.node_ids.size();
  if (n == 0) return {};
  if (n == 1) return {1.0};
  std::map<int, int> degree;
  for (int id : g.node_ids) degree[id] = 0;
  for (auto& [from, to] : g.edges) {
    degree[from]++;
    degree[to]++;
  }
  std::vector<double> prof;
  prof.reserve(n);
  for (auto& [id, d] : degree)
    prof.push_back(static_cast<double>(d) / static_cast<double>(n - 1));
  std::sort(prof.begin(), prof.end(), std::greater<>());
  return prof;
}

}  // namespace

double centrality_cosine(const DataflowGraph& gl, const DataflowGraph& gr) {
  std::vector<double> a = centrality_profile(gl);
  std::vector<double> b = centrality_profile(gr);
  size_t n = std::max(a.size(), b.size());
  a.resize(n, 0.0);
  b.resize(n, 0.0);
  double dot = 0, na = 0, nb = 0;
  for (size_t i = 0; i < n; i++) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  // rounding in the norms can push parallel profiles a hair past 1
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

namespace {

struct BlockCounts {
  int constants = 0;
  int arith = 0;
  int compares = 0;
  int tree_depth = 0;
  int operands = 0;
  int instructions = 0;
  int unique_opcodes = 0;
  int vars = 0;
  int selects = 0;
  int bitwidth_ops = 0;
  int block_insts = 0;
  int phi_insts = 0;
};

BlockCounts block_counts(const Block& b) {
  BlockCounts c;
  c.instructions = static_cast<int>(b.instructions.size());
  c.tree_depth = tree_depth(b);
  std::set<Opcode> ops_seen;
  std::set<int> refs;
  std::set<std::pair<uint32_t, int>> lits;
  for (const auto& inst : b.instructions) {
    ops_seen.insert(inst.op);
    switch (inst.op) {
      case Opcode::Const: c.constants++; break;
      case Opcode::Var: c.vars++; break;
      case Opcode::Select: c.selects++; break;
      case Opcode::Block: c.block_insts++; break;
      case Opcode::Phi: c.phi_insts++; break;
      case Opcode::Shl:
      case Opcode::Lshr:
      case Opcode::Ashr: c.bitwidth_ops++; break;
      default: break;
    }
    switch (normalize_opcode(inst.op)) {
      case Token::Add:
      case Token::Sub:
      case Token::Mul:
      case Token::Div:
      case Token::Rem: c.arith++; break;
      case Token::Eq:
      case Token::Ne:
      case Token::Lt:
      case Token::Le: c.compares++; break;
      default: break;
    }
    for (const auto& opnd : inst.operands) {
      if (opnd.is_ref())
        refs.insert(opnd.id);
      else
        lits.insert({opnd.lit.value, opnd.lit.width});
    }
  }
  c.unique_opcodes = static_cast<int>(ops_seen.size());
  c.operands = static_cast<int>(refs.size() + lits.size());
  return c;
}

}  // namespace

CountFeatures count_features(const Block& lhs, const Block& rhs) {
  BlockCounts l = block_counts(lhs);
  BlockCounts r = block_counts(rhs);
  CountFeatures d;
  d.d_constants = std::abs(l.constants - r.constants);
  d.d_arith = std::abs(l.arith - r.arith);
  d.d_compares = std::abs(l.compares - r.compares);
  d.d_tree_depth = std::abs(l.tree_depth - r.tree_depth);
  d.d_operands = std::abs(l.operands - r.operands);
  d.d_instructions = std::abs(l.instructions - r.instructions);
  d.d_unique_opcodes = std::abs(l.unique_opcodes - r.unique_opcodes);
  d.d_vars = std::abs(l.vars - r.vars);
  d.d_selects = std::abs(l.selects - r.selects);
  d.d_bitwidth_ops = std::abs(l.bitwidth_ops - r.bitwidth_ops);
  d.d_block_insts = std::abs(l.block_insts - r.block_insts);
  d.d_phi_insts = std::abs(l.phi_insts - r.phi_insts);
  return d;
}

const std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "icd_sim",        "lcs_ratio",       "cosine_centrality",
    "d_constants",    "d_arith",         "dice",
    "tversky",        "jaccard",         "overlap_max",
    "d_compares",     "d_tree_depth",    "d_operands",
    "d_instructions", "d_unique_opcodes", "d_vars",
    "d_selects",      "overlap_min",     "d_bitwidth_ops",
    "d_block_insts",  "d_phi_insts",
};

FeatureVector extract(const Block& lhs, const Block& rhs,
                      const FeatureConfig& cfg) {
  std::string lt = token_string(lhs);
  std::string rt = token_string(rhs);
  TokenSet ls = op_tokens(lhs);
  TokenSet rs = op_tokens(rhs);
  SetSimilarities ss = set_similarities(ls, rs, cfg.tversky_alpha, cfg.tversky_beta);
  CountFeatures cf = count_features(lhs, rhs);

  FeatureVector v{};
  // Compression distance runs candidate-first: x is the candidate string, y
  // the pattern string. Every block prints at least one instruction so rt is
  // never empty.
  v[kIcdSim] = icd_similarity(rt, lt);
  v[kLcsRatio] = lcs_ratio(lt, rt);
  v[kCosineCentrality] = centrality_cosine(build_dfg(lhs), build_dfg(rhs));
  v[kDConstants] = cf.d_constants;
  v[kDArith] = cf.d_arith;
  v[kDice] = ss.dice;
  v[kTversky] = ss.tversky;
  v[kJaccard] = ss.jaccard;
  v[kOverlapMax] = ss.overlap_max;
  v[kDCompares] = cf.d_compares;
  v[kDTreeDepth] = cf.d_tree_depth;
  v[kDOperands] = cf.d_operands;
  v[kDInstructions] = cf.d_instructions;
  v[kDUniqueOpcodes] = cf.d_unique_opcodes;
  v[kDVars] = cf.d_vars;
  v[kDSelects] = cf.d_selects;
  v[kOverlapMin] = ss.overlap_min;
  v[kDBitwidthOps] = cf.d_bitwidth_ops;
  v[kDBlockInsts] = cf.d_block_insts;
  v[kDPhiInsts] = cf.d_phi_insts;
  return v;
}

}  // namespace sopt
