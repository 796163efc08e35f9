#include "sopt/synth.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>
#include <unordered_set>

namespace sopt {

std::vector<Opcode> default_opcode_set() {
  return {Opcode::Add,  Opcode::Sub,  Opcode::Mul,  Opcode::Udiv, Opcode::Sdiv,
          Opcode::Urem, Opcode::Srem, Opcode::And,  Opcode::Or,   Opcode::Xor,
          Opcode::Shl,  Opcode::Lshr, Opcode::Ashr, Opcode::Eq,   Opcode::Ne,
          Opcode::Ult,  Opcode::Slt,  Opcode::Ule,  Opcode::Sle,  Opcode::Select};
}

namespace {

uint32_t reduce(int64_t v, int w) {
  uint64_t u = static_cast<uint64_t>(v);
  return w >= 32 ? static_cast<uint32_t>(u)
                 : static_cast<uint32_t>(u & ((1ull << w) - 1));
}

bool commutative(Opcode op) {
  switch (op) {
    case Opcode::Add:
    case Opcode::AddNsw:
    case Opcode::Mul:
    case Opcode::MulNsw:
    case Opcode::And:
    case Opcode::Or:
    case Opcode::Xor:
    case Opcode::Eq:
    case Opcode::Ne:
      return true;
    default:
      return false;
  }
}

struct Term {
  enum class Kind : uint8_t { VarLeaf, ConstLeaf, Op };
  Kind kind = Kind::Op;
  Opcode op = Opcode::Var;
  int width = 0;
  int var_id = -1;     // VarLeaf
  uint32_t value = 0;  // ConstLeaf
  std::array<int, 3> args{-1, -1, -1};
  int tree_ops = 0;
  bool uses_var = false;
};

class Enumerator {
 public:
  Enumerator(const Block& lhs, const SynthConfig& cfg) : lhs_(lhs), cfg_(cfg) {
    if (cfg.max_instructions < 0) throw std::invalid_argument("max_instructions < 0");
    if (cfg.candidate_cap < 1) throw std::invalid_argument("candidate_cap < 1");
    if (cfg.term_limit < 1) throw std::invalid_argument("term_limit < 1");
    root_width_ = lhs.at(lhs.root).width;
    levels_.resize(static_cast<size_t>(cfg.max_instructions) + 1);

    widths_.insert(root_width_);
    for (int id : lhs.inputs) widths_.insert(lhs.at(id).width);
    next_id_ = 0;
    for (const Instruction& ins : lhs.instructions)
      next_id_ = std::max(next_id_, ins.id + 1);

    seed_leaves();
    for (int l = 1; l <= cfg.max_instructions && !exhausted_; ++l) build_level(l);
  }

  // Unsorted candidate blocks: every term of root width, minus the one whose
  // shape matches the pattern, deduplicated by canonical text.
  std::vector<Block> candidates() {
    std::string lhs_shape = shape_string(lhs_);
    std::vector<Block> out;
    std::unordered_set<std::string> seen;
    for (size_t i = 0; i < pool_.size(); ++i) {
      if (pool_[i].width != root_width_) continue;
      Block b = materialize(static_cast<int>(i));
      if (shape_string(b) == lhs_shape) continue;
      if (!seen.insert(print_block(b)).second) continue;
      out.push_back(std::move(b));
    }
    return out;
  }

 private:
  using Key = std::tuple<int, int, int, int64_t, int, int, int>;

  Key key_of(const Term& t) const {
    int64_t payload = t.kind == Term::Kind::VarLeaf ? t.var_id
                                                    : static_cast<int64_t>(t.value);
    return {static_cast<int>(t.kind), static_cast<int>(t.op), t.width, payload,
            t.args[0], t.args[1], t.args[2]};
  }

  int intern(const Term& t) {
    auto [it, fresh] = index_.try_emplace(key_of(t), static_cast<int>(pool_.size()));
    if (fresh) {
      pool_.push_back(t);
      levels_[t.tree_ops][t.width].push_back(it->second);
      if (static_cast<long>(pool_.size()) > cfg_.term_limit) exhausted_ = true;
    }
    return it->second;
  }

  void seed_leaves() {
    for (int id : lhs_.inputs) {
      Term t;
      t.kind = Term::Kind::VarLeaf;
      t.width = lhs_.at(id).width;
      t.var_id = id;
      t.uses_var = true;
      intern(t);
    }
    for (int w : widths_) {
      for (int64_t c : cfg_.constant_pool) {
        Term t;
        t.kind = Term::Kind::ConstLeaf;
        t.width = w;
        t.value = reduce(c, w);
        intern(t);
      }
    }
  }

  const std::vector<int>& terms_at(int level, int width) {
    static const std::vector<int> empty;
    auto it = levels_[level].find(width);
    return it == levels_[level].end() ? empty : it->second;
  }

  void add_op(Opcode op, int width, std::array<int, 3> args, int nargs, int level) {
    Term t;
    t.kind = Term::Kind::Op;
    t.op = op;
    t.width = width;
    t.args = args;
    t.tree_ops = level;
    bool any_var = false;
    for (int i = 0; i < nargs; ++i) any_var = any_var || pool_[args[i]].uses_var;
    if (!any_var) return;  // input-independent expressions are just constants
    t.uses_var = true;
    intern(t);
  }

  void build_level(int level) {
    for (Opcode op : cfg_.opcode_set) {
      if (exhausted_) return;
      if (op == Opcode::Select) {
        for (int w : widths_) {
          for (int sc = 0; sc < level && !exhausted_; ++sc) {
            for (int sa = 0; sa + sc < level; ++sa) {
              int sb = level - 1 - sc - sa;
              for (int c : terms_at(sc, 1)) {
                for (int a : terms_at(sa, w)) {
                  for (int b : terms_at(sb, w)) {
                    add_op(op, w, {c, a, b}, 3, level);
                    if (exhausted_) return;
                  }
                }
              }
            }
          }
        }
      } else if (is_binary(op)) {
        int out_width = 0;  // set per operand width below
        for (int w : widths_) {
          if (w < 4) continue;  // width-1 values only feed select conditions
          out_width = is_compare(op) ? 1 : w;
          for (int s1 = 0; s1 < level; ++s1) {
            int s2 = level - 1 - s1;
            for (int a : terms_at(s1, w)) {
              for (int b : terms_at(s2, w)) {
                if (commutative(op) && a > b) continue;
                add_op(op, out_width, {a, b, -1}, 2, level);
                if (exhausted_) return;
              }
            }
          }
        }
      }
      // var/const/phi/block entries in opcode_set have no enumeration rule
    }
  }

  void collect_vars(int t, std::set<int>& out) const {
    const Term& tm = pool_[t];
    if (tm.kind == Term::Kind::VarLeaf) {
      out.insert(tm.var_id);
      return;
    }
    if (tm.kind == Term::Kind::Op)
      for (int a : tm.args)
        if (a >= 0) collect_vars(a, out);
  }

  Block materialize(int root_term) {
    Block out;
    out.role = BlockRole::Rhs;
    std::set<int> used;
    collect_vars(root_term, used);
    for (int id : lhs_.inputs) {
      if (!used.count(id)) continue;
      Instruction v;
      v.id = id;
      v.op = Opcode::Var;
      v.width = lhs_.at(id).width;
      out.instructions.push_back(v);
      out.inputs.push_back(id);
    }

    int next = next_id_;
    std::map<int, int> emitted;  // term index -> instruction id

    std::function<int(int)> emit_op = [&](int t) -> int {
      auto it = emitted.find(t);
      if (it != emitted.end()) return it->second;
      const Term& tm = pool_[t];
      Instruction ins;
      ins.op = tm.op;
      ins.width = tm.width;
      int nargs = tm.op == Opcode::Select ? 3 : 2;
      for (int i = 0; i < nargs; ++i) {
        const Term& child = pool_[tm.args[i]];
        if (child.kind == Term::Kind::VarLeaf)
          ins.operands.push_back(Operand::ref(child.var_id));
        else if (child.kind == Term::Kind::ConstLeaf)
          ins.operands.push_back(Operand::literal(child.value, child.width));
        else
          ins.operands.push_back(Operand::ref(emit_op(tm.args[i])));
      }
      ins.id = next++;
      out.instructions.push_back(ins);
      emitted[t] = ins.id;
      return ins.id;
    };

    const Term& rt = pool_[root_term];
    switch (rt.kind) {
      case Term::Kind::VarLeaf:
        out.root = rt.var_id;
        break;
      case Term::Kind::ConstLeaf: {
        Instruction c;
        c.id = next++;
        c.op = Opcode::Const;
        c.width = rt.width;
        c.const_value = rt.value;
        out.instructions.push_back(c);
        out.root = c.id;
        break;
      }
      case Term::Kind::Op:
        out.root = emit_op(root_term);
        break;
    }
    return out;
  }

  const Block& lhs_;
  const SynthConfig& cfg_;
  int root_width_ = 0;
  int next_id_ = 0;
  std::set<int> widths_;
  std::vector<Term> pool_;
  std::map<Key, int> index_;
  std::vector<std::map<int, std::vector<int>>> levels_;  // level -> width -> terms
  bool exhausted_ = false;
};

}  // namespace

std::vector<RhsCandidate> enumerate_candidates(const Block& lhs,
                                               const SynthConfig& cfg,
                                               const CostModel& costs) {
  Enumerator en(lhs, cfg);
  std::vector<Block> all = en.candidates();

  struct Scored {
    int cost;
    std::string text;
    size_t index;
  };
  std::vector<Scored> order;
  order.reserve(all.size());
  for (size_t i = 0; i < all.size(); ++i)
    order.push_back({block_cost(all[i], costs), print_block(all[i]), i});
  std::sort(order.begin(), order.end(), [](const Scored& a, const Scored& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    return a.text < b.text;
  });

  size_t n = std::min<size_t>(order.size(), static_cast<size_t>(cfg.candidate_cap));
  std::vector<RhsCandidate> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) out.push_back(std::move(all[order[i].index]));
  return out;
}

long count_space(const Block& lhs, const SynthConfig& cfg) {
  Enumerator en(lhs, cfg);
  return static_cast<long>(en.candidates().size());
}

}  // namespace sopt
