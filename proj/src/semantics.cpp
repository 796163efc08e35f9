#include "sopt/semantics.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sopt/rng.hpp"

namespace sopt {

namespace {

uint32_t mask_of(int w) { return w >= 32 ? 0xffffffffu : ((1u << w) - 1); }

int64_t sign_extend(uint32_t v, int w) {
  uint64_t sign = 1ull << (w - 1);
  return static_cast<int64_t>(v ^ sign) - static_cast<int64_t>(sign);
}

int64_t min_signed(int w) { return -(1ll << (w - 1)); }

// Operand resolved to either a literal or a slot in the value array.
struct CompiledOperand {
  bool lit;
  uint32_t value;  // literal payload
  int slot;        // producer slot otherwise
};

struct CompiledInst {
  Opcode op;
  int width;
  uint32_t mask;
  uint32_t cvalue = 0;  // const payload
  int cmp_width = 0;    // operand width for comparisons
  int sel_index = -1;   // phi: index into the selector array
  std::vector<CompiledOperand> ops;
};

struct CompiledBlock {
  std::vector<CompiledInst> code;
  int root_slot = -1;
  std::vector<std::pair<int, int>> var_slots;    // (var id, slot)
  std::vector<std::pair<int, int>> block_preds;  // (block id, pred count)
};

CompiledBlock compile(const Block& b) {
  CompiledBlock cb;
  std::map<int, int> slot_of;
  std::map<int, int> selector_index;
  std::map<int, int> width_of;
  for (const Instruction& ins : b.instructions) {
    int slot = static_cast<int>(cb.code.size());
    slot_of[ins.id] = slot;
    width_of[ins.id] = ins.width;
    CompiledInst ci;
    ci.op = ins.op;
    ci.width = ins.width;
    ci.mask = ins.width > 0 ? mask_of(ins.width) : 0;
    ci.cvalue = ins.const_value;
    if (ins.op == Opcode::Var) {
      cb.var_slots.emplace_back(ins.id, slot);
    } else if (ins.op == Opcode::Block) {
      selector_index[ins.id] = static_cast<int>(cb.block_preds.size());
      cb.block_preds.emplace_back(ins.id, ins.pred_count);
    }
    size_t first = 0;
    if (ins.op == Opcode::Phi) {
      ci.sel_index = selector_index.at(ins.operands[0].id);
      first = 1;  // the block reference itself carries no value
    }
    for (size_t i = first; i < ins.operands.size(); ++i) {
      const Operand& o = ins.operands[i];
      if (o.is_ref())
        ci.ops.push_back({false, 0, slot_of.at(o.id)});
      else
        ci.ops.push_back({true, o.lit.value, -1});
    }
    if (is_compare(ins.op)) {
      const Operand& o = ins.operands[0];
      ci.cmp_width = o.is_ref() ? width_of.at(o.id) : o.lit.width;
    }
    cb.code.push_back(std::move(ci));
  }
  cb.root_slot = slot_of.at(b.root);
  return cb;
}

// vals needs one entry per instruction; var slots are pre-filled by the
// caller. selectors is indexed in cb.block_preds order and may be empty when
// the block declares no phi blocks.
uint32_t run(const CompiledBlock& cb, std::vector<uint32_t>& vals,
             const std::vector<int>& selectors) {
  for (size_t i = 0; i < cb.code.size(); ++i) {
    const CompiledInst& ci = cb.code[i];
    auto arg = [&](int k) -> uint32_t {
      const CompiledOperand& o = ci.ops[k];
      return o.lit ? o.value : vals[o.slot];
    };
    uint32_t r = 0;
    switch (ci.op) {
      case Opcode::Var:
        continue;  // pre-filled
      case Opcode::Const:
        r = ci.cvalue;
        break;
      case Opcode::Block:
        r = 0;
        break;
      case Opcode::Add:
      case Opcode::AddNsw:
        r = (arg(0) + arg(1)) & ci.mask;
        break;
      case Opcode::Sub:
      case Opcode::SubNsw:
        r = (arg(0) - arg(1)) & ci.mask;
        break;
      case Opcode::Mul:
      case Opcode::MulNsw:
        r = static_cast<uint32_t>(static_cast<uint64_t>(arg(0)) *
                                  static_cast<uint64_t>(arg(1))) &
            ci.mask;
        break;
      case Opcode::Udiv: {
        uint32_t a = arg(0), b = arg(1);
        r = b == 0 ? ci.mask : a / b;
        break;
      }
      case Opcode::Urem: {
        uint32_t a = arg(0), b = arg(1);
        r = b == 0 ? a : a % b;
        break;
      }
      case Opcode::Sdiv: {
        uint32_t a = arg(0), b = arg(1);
        int64_t sa = sign_extend(a, ci.width);
        if (b == 0) {
          r = sa < 0 ? 1u : ci.mask;  // all-ones encodes -1
        } else {
          int64_t sb = sign_extend(b, ci.width);
          if (sa == min_signed(ci.width) && sb == -1)
            r = a;  // overflow wraps back to the minimum
          else
            r = static_cast<uint32_t>(sa / sb) & ci.mask;
        }
        break;
      }
      case Opcode::Srem: {
        uint32_t a = arg(0), b = arg(1);
        if (b == 0) {
          r = a;
        } else {
          int64_t sa = sign_extend(a, ci.width);
          int64_t sb = sign_extend(b, ci.width);
          r = (sa == min_signed(ci.width) && sb == -1)
                  ? 0
                  : static_cast<uint32_t>(sa % sb) & ci.mask;
        }
        break;
      }
      case Opcode::And:
        r = arg(0) & arg(1);
        break;
      case Opcode::Or:
        r = arg(0) | arg(1);
        break;
      case Opcode::Xor:
        r = arg(0) ^ arg(1);
        break;
      case Opcode::Shl: {
        uint32_t sh = arg(1);
        r = sh >= static_cast<uint32_t>(ci.width) ? 0 : (arg(0) << sh) & ci.mask;
        break;
      }
      case Opcode::Lshr: {
        uint32_t sh = arg(1);
        r = sh >= static_cast<uint32_t>(ci.width) ? 0 : arg(0) >> sh;
        break;
      }
      case Opcode::Ashr: {
        uint32_t a = arg(0), sh = arg(1);
        bool neg = (a >> (ci.width - 1)) & 1;
        if (sh >= static_cast<uint32_t>(ci.width))
          r = neg ? ci.mask : 0;
        else
          r = static_cast<uint32_t>(sign_extend(a, ci.width) >> sh) & ci.mask;
        break;
      }
      case Opcode::Eq:
        r = arg(0) == arg(1);
        break;
      case Opcode::Ne:
        r = arg(0) != arg(1);
        break;
      case Opcode::Ult:
        r = arg(0) < arg(1);
        break;
      case Opcode::Ule:
        r = arg(0) <= arg(1);
        break;
      case Opcode::Slt:
        r = sign_extend(arg(0), ci.cmp_width) < sign_extend(arg(1), ci.cmp_width);
        break;
      case Opcode::Sle:
        r = sign_extend(arg(0), ci.cmp_width) <= sign_extend(arg(1), ci.cmp_width);
        break;
      case Opcode::Select:
        r = arg(0) != 0 ? arg(1) : arg(2);
        break;
      case Opcode::Phi: {
        int sel = ci.sel_index < static_cast<int>(selectors.size())
                      ? selectors[ci.sel_index]
                      : 0;
        r = arg(sel % static_cast<int>(ci.ops.size()));
        break;
      }
    }
    vals[i] = r;
  }
  return vals[cb.root_slot];
}

// The joint input space of one or two blocks.
struct InputSpace {
  struct V {
    int id;
    int width;
  };
  struct B {
    int id;
    int preds;
  };
  std::vector<V> vars;    // sorted by id
  std::vector<B> blocks;  // sorted by id

  int free_bits() const {
    int bits = 0;
    for (const V& v : vars) bits += v.width;
    for (const B& b : blocks) {
      int need = 0;
      while ((1 << need) < b.preds) ++need;
      bits += need;
    }
    return bits;
  }
};

void merge_into(InputSpace& space, const Block& b) {
  for (const Instruction& ins : b.instructions) {
    if (ins.op == Opcode::Var) {
      auto it = std::find_if(space.vars.begin(), space.vars.end(),
                             [&](const auto& v) { return v.id == ins.id; });
      if (it == space.vars.end())
        space.vars.push_back({ins.id, ins.width});
      else if (it->width != ins.width)
        throw std::invalid_argument("shared var %" + std::to_string(ins.id) +
                                    " has conflicting widths");
    } else if (ins.op == Opcode::Block) {
      auto it = std::find_if(space.blocks.begin(), space.blocks.end(),
                             [&](const auto& blk) { return blk.id == ins.id; });
      if (it == space.blocks.end())
        space.blocks.push_back({ins.id, ins.pred_count});
      else if (it->preds != ins.pred_count)
        throw std::invalid_argument("shared block %" + std::to_string(ins.id) +
                                    " has conflicting predecessor counts");
    }
  }
  std::sort(space.vars.begin(), space.vars.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(space.blocks.begin(), space.blocks.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
}

// Corner value rows over the space's vars, deduplicated, order fixed.
std::vector<std::vector<uint32_t>> corner_rows(const InputSpace& space) {
  size_t k = space.vars.size();
  std::vector<std::vector<uint32_t>> rows;
  std::set<std::vector<uint32_t>> seen;
  auto push = [&](std::vector<uint32_t> row) {
    if (seen.insert(row).second) rows.push_back(std::move(row));
  };
  auto fill = [&](auto f) {
    std::vector<uint32_t> row(k);
    for (size_t i = 0; i < k; ++i) row[i] = f(space.vars[i].width);
    return row;
  };
  push(fill([](int) { return 0u; }));
  push(fill([](int w) { return mask_of(w); }));
  push(fill([](int w) { return 1u & mask_of(w); }));
  push(fill([](int w) { return 1u << (w - 1); }));
  for (size_t j = 0; j < k; ++j) {  // single hot var, rest zero
    std::vector<uint32_t> row(k, 0);
    row[j] = mask_of(space.vars[j].width);
    push(row);
    row[j] = 1u & mask_of(space.vars[j].width);
    push(std::move(row));
  }
  return rows;
}

std::vector<int> selectors_for(const InputSpace& space, size_t index) {
  std::vector<int> sel(space.blocks.size());
  for (size_t i = 0; i < space.blocks.size(); ++i)
    sel[i] = static_cast<int>(index % static_cast<size_t>(space.blocks[i].preds));
  return sel;
}

InputAssignment to_assignment(const InputSpace& space,
                              const std::vector<uint32_t>& row,
                              const std::vector<int>& selectors) {
  InputAssignment a;
  for (size_t i = 0; i < space.vars.size(); ++i)
    a.values[space.vars[i].id] = row[i];
  for (size_t i = 0; i < space.blocks.size(); ++i)
    a.phi_selectors[space.blocks[i].id] = selectors[i];
  return a;
}

// Corner rows first, then seeded uniform rows deduplicated while the domain
// allows it, truncated or extended to exactly n.
std::vector<std::vector<uint32_t>> probe_rows(const InputSpace& space, int n,
                                              uint64_t seed) {
  std::vector<std::vector<uint32_t>> rows = corner_rows(space);
  if (static_cast<int>(rows.size()) > n) rows.resize(n);
  std::set<std::vector<uint32_t>> seen(rows.begin(), rows.end());
  Rng rng(seed);
  long attempts = 0;
  long attempt_cap = 4l * n + 256;
  while (static_cast<int>(rows.size()) < n) {
    std::vector<uint32_t> row(space.vars.size());
    for (size_t i = 0; i < row.size(); ++i)
      row[i] = static_cast<uint32_t>(rng.below(1ull << space.vars[i].width));
    ++attempts;
    if (attempts <= attempt_cap && !seen.insert(row).second) continue;
    rows.push_back(std::move(row));
  }
  return rows;
}

// Binding of a compiled block into a shared input space.
struct Bound {
  CompiledBlock cb;
  std::vector<uint32_t> vals;
  std::vector<int> var_space_index;  // per var slot: index into space.vars
  std::vector<int> sel_space_index;  // per block: index into space.blocks

  Bound(const Block& b, const InputSpace& space) : cb(compile(b)) {
    vals.resize(cb.code.size());
    for (const auto& [id, slot] : cb.var_slots) {
      (void)slot;
      auto it = std::find_if(space.vars.begin(), space.vars.end(),
                             [&, vid = id](const auto& v) { return v.id == vid; });
      var_space_index.push_back(static_cast<int>(it - space.vars.begin()));
    }
    for (const auto& [id, preds] : cb.block_preds) {
      (void)preds;
      auto it = std::find_if(space.blocks.begin(), space.blocks.end(),
                             [&, bid = id](const auto& blk) { return blk.id == bid; });
      sel_space_index.push_back(static_cast<int>(it - space.blocks.begin()));
    }
  }

  uint32_t operator()(const std::vector<uint32_t>& row,
                      const std::vector<int>& selectors) {
    for (size_t i = 0; i < cb.var_slots.size(); ++i)
      vals[cb.var_slots[i].second] = row[var_space_index[i]];
    std::vector<int> own(sel_space_index.size());
    for (size_t i = 0; i < own.size(); ++i) own[i] = selectors[sel_space_index[i]];
    return run(cb, vals, own);
  }
};

}  // namespace

std::string OracleConfig::key_string() const {
  std::ostringstream out;
  out << "budget=" << exhaustive_bit_budget << ";samples=" << sample_count
      << ";seed=" << seed << ";cand_ms=" << per_candidate_timeout.count()
      << ";lhs_ms=" << per_lhs_time_limit.count();
  return out.str();
}

uint32_t eval(const Block& b, const InputAssignment& a) {
  CompiledBlock cb = compile(b);
  std::vector<uint32_t> vals(cb.code.size(), 0);
  for (const auto& [id, slot] : cb.var_slots) {
    auto it = a.values.find(id);
    if (it == a.values.end())
      throw std::logic_error("assignment missing var %" + std::to_string(id));
    vals[slot] = it->second & mask_of(cb.code[slot].width);
  }
  std::vector<int> selectors(cb.block_preds.size(), 0);
  for (size_t i = 0; i < cb.block_preds.size(); ++i) {
    auto it = a.phi_selectors.find(cb.block_preds[i].first);
    if (it != a.phi_selectors.end()) selectors[i] = it->second;
  }
  return run(cb, vals, selectors);
}

std::vector<InputAssignment> probe_vectors(const Block& b, int n, uint64_t seed) {
  InputSpace space;
  merge_into(space, b);
  auto rows = probe_rows(space, n, seed);
  std::vector<InputAssignment> out;
  out.reserve(rows.size());
  for (size_t j = 0; j < rows.size(); ++j)
    out.push_back(to_assignment(space, rows[j], selectors_for(space, j)));
  return out;
}

Verdict check_equivalence(const Block& lhs, const Block& rhs,
                          const OracleConfig& cfg) {
  if (lhs.at(lhs.root).width != rhs.at(rhs.root).width)
    throw std::invalid_argument("root widths differ");

  InputSpace space;
  merge_into(space, lhs);
  merge_into(space, rhs);

  Bound bl(lhs, space);
  Bound br(rhs, space);

  auto deadline = std::chrono::steady_clock::now() + cfg.per_candidate_timeout;
  auto timed_out = [&deadline]() {
    return std::chrono::steady_clock::now() > deadline;
  };

  if (space.free_bits() <= cfg.exhaustive_bit_budget) {
    // Odometer sweep over every var value and every phi selector combination.
    size_t k = space.vars.size();
    std::vector<uint32_t> row(k, 0);
    std::vector<int> sel(space.blocks.size(), 0);
    long steps = 0;
    while (true) {
      if (bl(row, sel) != br(row, sel)) {
        Verdict v;
        v.kind = VerdictKind::NotEquivalent;
        v.counterexample = to_assignment(space, row, sel);
        return v;
      }
      if ((++steps & 0xfff) == 0 && timed_out()) return Verdict{};

      size_t d = 0;
      for (; d < k; ++d) {
        row[d] = (row[d] + 1) & mask_of(space.vars[d].width);
        if (row[d] != 0) break;
      }
      if (d < k) continue;
      size_t s = 0;
      for (; s < sel.size(); ++s) {
        if (++sel[s] < space.blocks[s].preds) break;
        sel[s] = 0;
      }
      if (s >= sel.size()) break;  // full space covered
    }
    Verdict v;
    v.kind = VerdictKind::Equivalent;
    v.sampled = false;
    return v;
  }

  // Sampled regime: corners plus sample_count seeded assignments.
  auto corners = corner_rows(space);
  Rng rng(cfg.seed);
  long steps = 0;
  auto try_row = [&](const std::vector<uint32_t>& row,
                     size_t index) -> std::optional<Verdict> {
    std::vector<int> sel = selectors_for(space, index);
    if (bl(row, sel) != br(row, sel)) {
      Verdict v;
      v.kind = VerdictKind::NotEquivalent;
      v.counterexample = to_assignment(space, row, sel);
      return v;
    }
    if ((++steps & 0x3ff) == 0 && timed_out()) return Verdict{};
    return std::nullopt;
  };

  size_t index = 0;
  for (const auto& row : corners)
    if (auto v = try_row(row, index++)) return *v;
  for (int i = 0; i < cfg.sample_count; ++i) {
    std::vector<uint32_t> row(space.vars.size());
    for (size_t j = 0; j < row.size(); ++j)
      row[j] = static_cast<uint32_t>(rng.below(1ull << space.vars[j].width));
    if (auto v = try_row(row, index++)) return *v;
  }

  Verdict v;
  v.kind = VerdictKind::Equivalent;
  v.sampled = true;
  return v;
}

}  // namespace sopt
