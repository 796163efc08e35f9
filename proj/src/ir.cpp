#include "sopt/ir.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace sopt {

namespace {

constexpr std::array<std::string_view, kOpcodeCount> kMnemonics = {
    "var",  "const",
    "add",  "addnsw", "sub",  "subnsw", "mul", "mulnsw",
    "udiv", "sdiv",   "urem", "srem",
    "and",  "or",     "xor",
    "shl",  "lshr",   "ashr",
    "eq",   "ne",     "ult",  "slt",    "ule", "sle",
    "select", "phi",  "block",
};

constexpr std::array<std::string_view, kTokenCount> kTokenNames = {
    "var", "const", "add", "sub", "mul", "div", "rem", "and", "or", "xor",
    "shr", "eq",    "ne",  "lt",  "le",  "select", "phi", "block",
};

constexpr std::array<char, kTokenCount> kTokenChars = {
    'v', 'c', 'a', 's', 'm', 'd', 'r', '&', '|', '^',
    '>', '=', '!', '<', 'l', '?', 'p', 'b',
};

bool valid_width(int w) { return w == 1 || w == 4 || w == 8 || w == 16 || w == 32; }

uint32_t reduce(uint64_t v, int w) {
  return w >= 32 ? static_cast<uint32_t>(v) : static_cast<uint32_t>(v & ((1ull << w) - 1));
}

}  // namespace

std::string_view mnemonic(Opcode op) { return kMnemonics[static_cast<size_t>(op)]; }

std::optional<Opcode> opcode_from_mnemonic(std::string_view name) {
  for (size_t i = 0; i < kMnemonics.size(); ++i)
    if (kMnemonics[i] == name) return static_cast<Opcode>(i);
  return std::nullopt;
}

bool is_compare(Opcode op) {
  switch (op) {
    case Opcode::Eq:
    case Opcode::Ne:
    case Opcode::Ult:
    case Opcode::Slt:
    case Opcode::Ule:
    case Opcode::Sle:
      return true;
    default:
      return false;
  }
}

bool is_shift(Opcode op) {
  return op == Opcode::Shl || op == Opcode::Lshr || op == Opcode::Ashr;
}

bool is_binary(Opcode op) {
  switch (op) {
    case Opcode::Var:
    case Opcode::Const:
    case Opcode::Select:
    case Opcode::Phi:
    case Opcode::Block:
      return false;
    default:
      return true;
  }
}

Token normalize_opcode(Opcode op) {
  switch (op) {
    case Opcode::Var: return Token::Var;
    case Opcode::Const: return Token::Const;
    case Opcode::Add:
    case Opcode::AddNsw: return Token::Add;
    case Opcode::Sub:
    case Opcode::SubNsw: return Token::Sub;
    case Opcode::Mul:
    case Opcode::MulNsw:
    case Opcode::Shl: return Token::Mul;
    case Opcode::Udiv:
    case Opcode::Sdiv: return Token::Div;
    case Opcode::Urem:
    case Opcode::Srem: return Token::Rem;
    case Opcode::And: return Token::And;
    case Opcode::Or: return Token::Or;
    case Opcode::Xor: return Token::Xor;
    case Opcode::Lshr:
    case Opcode::Ashr: return Token::Shr;
    case Opcode::Eq: return Token::Eq;
    case Opcode::Ne: return Token::Ne;
    case Opcode::Ult:
    case Opcode::Slt: return Token::Lt;
    case Opcode::Ule:
    case Opcode::Sle: return Token::Le;
    case Opcode::Select: return Token::Select;
    case Opcode::Phi: return Token::Phi;
    case Opcode::Block: return Token::Block;
  }
  return Token::Var;  // unreachable, keeps -Wreturn-type quiet
}

std::string_view token_name(Token t) { return kTokenNames[static_cast<size_t>(t)]; }
char token_char(Token t) { return kTokenChars[static_cast<size_t>(t)]; }

Operand Operand::ref(int id) {
  Operand o;
  o.kind = Kind::Ref;
  o.id = id;
  return o;
}

Operand Operand::literal(uint32_t value, int width) {
  Operand o;
  o.kind = Kind::Lit;
  o.lit = Literal{reduce(value, width), width};
  return o;
}

const Instruction* Block::find(int id) const {
  for (const auto& ins : instructions)
    if (ins.id == id) return &ins;
  return nullptr;
}

const Instruction& Block::at(int id) const {
  const Instruction* p = find(id);
  if (!p) throw std::out_of_range("no instruction %" + std::to_string(id));
  return *p;
}

bool structurally_equal(const Block& a, const Block& b) {
  return a.instructions == b.instructions && a.root == b.root && a.inputs == b.inputs;
}

ParseError::ParseError(int line, int col, const std::string& msg)
    : std::runtime_error("line " + std::to_string(line) + ", col " +
                         std::to_string(col) + ": " + msg),
      line_(line),
      col_(col) {}

namespace {

// One statement of the block grammar. Statements are separated by newlines;
// a ';' also separates statements on one line, and any ';' segment that does
// not start another statement begins a trailing comment.
struct StmtScanner {
  std::string_view s;
  int line;
  int base_col;  // 1-based column of s[0] in the original line
  size_t pos = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(line, base_col + static_cast<int>(pos), msg);
  }

  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }

  bool done() {
    skip_ws();
    return pos >= s.size();
  }

  char peek() const { return pos < s.size() ? s[pos] : '\0'; }

  void expect(char c, const char* what) {
    skip_ws();
    if (peek() != c) fail(std::string("expected ") + what);
    ++pos;
  }

  bool consume(char c) {
    skip_ws();
    if (peek() != c) return false;
    ++pos;
    return true;
  }

  uint64_t number() {
    skip_ws();
    if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected a number");
    uint64_t v = 0;
    int digits = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      v = v * 10 + static_cast<uint64_t>(s[pos] - '0');
      ++pos;
      if (++digits > 19) fail("numeric literal too long");
    }
    return v;
  }

  std::string word() {
    skip_ws();
    std::string w;
    while (pos < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) {
      w.push_back(s[pos]);
      ++pos;
    }
    if (w.empty()) fail("expected a word");
    return w;
  }

  int ref_id() {
    expect('%', "'%'");
    return static_cast<int>(number());
  }

  int width_suffix() {
    expect(':', "':'");
    if (peek() != 'i') fail("expected width 'i<bits>'");
    ++pos;
    int w = static_cast<int>(number());
    if (!valid_width(w)) fail("unsupported width i" + std::to_string(w));
    return w;
  }

  // literal operand: [-]<decimal>:i<width>
  Literal lit_operand() {
    skip_ws();
    bool neg = consume('-');
    uint64_t raw = number();
    int w = width_suffix();
    uint32_t v = reduce(raw, w);
    if (neg) v = reduce(~static_cast<uint64_t>(v) + 1, w);
    return Literal{v, w};
  }
};

struct Statement {
  enum class Kind { Instr, Root } kind;
  Instruction instr;
  int root_id = -1;
  BlockRole role = BlockRole::Lhs;
  int line = 0;
  int col = 0;
};

bool starts_statement(std::string_view seg) {
  size_t i = seg.find_first_not_of(" \t");
  if (i == std::string_view::npos) return false;
  if (seg[i] == '%') return true;
  return seg.substr(i).starts_with("infer") || seg.substr(i).starts_with("result");
}

Statement parse_statement(std::string_view text, int line, int base_col) {
  StmtScanner sc{text, line, base_col};
  Statement st;
  st.line = line;
  st.col = base_col;

  sc.skip_ws();
  if (sc.peek() != '%') {
    std::string kw = sc.word();
    if (kw != "infer" && kw != "result") sc.fail("unknown statement '" + kw + "'");
    st.kind = Statement::Kind::Root;
    st.role = (kw == "infer") ? BlockRole::Lhs : BlockRole::Rhs;
    st.root_id = sc.ref_id();
    if (!sc.done()) sc.fail("trailing text after root line");
    return st;
  }

  st.kind = Statement::Kind::Instr;
  Instruction& ins = st.instr;
  ins.id = sc.ref_id();

  sc.skip_ws();
  bool has_width = sc.peek() == ':';
  if (has_width) ins.width = sc.width_suffix();
  sc.expect('=', "'='");
  std::string name = sc.word();
  auto op = opcode_from_mnemonic(name);
  if (!op) sc.fail("unknown opcode '" + name + "'");
  ins.op = *op;

  if (ins.op == Opcode::Block) {
    if (has_width) sc.fail("block declarations carry no width");
    ins.width = 0;
    ins.pred_count = static_cast<int>(sc.number());
    if (ins.pred_count < 1) sc.fail("block needs at least one predecessor");
  } else {
    if (!has_width) sc.fail("missing width on instruction");
    if (ins.op == Opcode::Var) {
      // no operands
    } else if (ins.op == Opcode::Const) {
      Literal l = sc.lit_operand();
      if (l.width != ins.width) sc.fail("const literal width mismatch");
      ins.const_value = l.value;
    } else {
      // comma-separated operand list
      while (true) {
        sc.skip_ws();
        if (sc.peek() == '%') {
          ins.operands.push_back(Operand::ref(sc.ref_id()));
        } else {
          Literal l = sc.lit_operand();
          Operand o;
          o.kind = Operand::Kind::Lit;
          o.lit = l;
          ins.operands.push_back(o);
        }
        if (!sc.consume(',')) break;
      }
    }
  }
  if (!sc.done()) sc.fail("trailing text after instruction");
  return st;
}

class Assembler {
 public:
  void add(const Statement& st) {
    if (root_seen_) throw ParseError(st.line, st.col, "statement after root line");
    if (st.kind == Statement::Kind::Root) {
      if (!index_.count(st.root_id))
        throw ParseError(st.line, st.col,
                         "undefined id %" + std::to_string(st.root_id));
      root_ = st.root_id;
      role_ = st.role;
      root_seen_ = true;
      return;
    }

    const Instruction& ins = st.instr;
    if (index_.count(ins.id))
      throw ParseError(st.line, st.col, "duplicate id %" + std::to_string(ins.id));
    check(ins, st);
    index_.emplace(ins.id, instrs_.size());
    instrs_.push_back(ins);
  }

  Block finish(int last_line) {
    if (!root_seen_) throw ParseError(last_line, 1, "missing infer/result line");

    // Drop instructions not reachable from the root. Vars always stay: they
    // are the declared interface of the block.
    std::unordered_set<int> live;
    std::vector<int> work{root_};
    while (!work.empty()) {
      int id = work.back();
      work.pop_back();
      if (!live.insert(id).second) continue;
      const Instruction& ins = instrs_[index_.at(id)];
      for (const Operand& o : ins.operands)
        if (o.is_ref()) work.push_back(o.id);
    }

    Block b;
    b.root = root_;
    b.role = role_;
    for (const Instruction& ins : instrs_) {
      if (ins.op != Opcode::Var && !live.count(ins.id)) continue;
      if (ins.op == Opcode::Var) b.inputs.push_back(ins.id);
      b.instructions.push_back(ins);
    }
    return b;
  }

 private:
  int operand_width(const Operand& o) const {
    if (!o.is_ref()) return o.lit.width;
    return instrs_[index_.at(o.id)].width;
  }

  bool refers_to_block(const Operand& o) const {
    return o.is_ref() && instrs_[index_.at(o.id)].op == Opcode::Block;
  }

  void check(const Instruction& ins, const Statement& st) {
    auto fail = [&](const std::string& msg) -> void {
      throw ParseError(st.line, st.col, msg);
    };
    for (const Operand& o : ins.operands)
      if (o.is_ref() && !index_.count(o.id))
        fail("undefined id %" + std::to_string(o.id));

    switch (ins.op) {
      case Opcode::Var:
      case Opcode::Const:
      case Opcode::Block:
        break;
      case Opcode::Select: {
        if (ins.operands.size() != 3) fail("select takes three operands");
        for (int i : {1, 2})
          if (operand_width(ins.operands[i]) != ins.width)
            fail("select operand width mismatch");
        for (const Operand& o : ins.operands)
          if (refers_to_block(o)) fail("block used as a value");
        break;
      }
      case Opcode::Phi: {
        if (ins.operands.size() < 3) fail("phi takes a block and at least two values");
        if (!refers_to_block(ins.operands[0]))
          fail("phi first operand must reference a block");
        for (size_t i = 1; i < ins.operands.size(); ++i) {
          if (refers_to_block(ins.operands[i])) fail("block used as a value");
          if (operand_width(ins.operands[i]) != ins.width)
            fail("phi operand width mismatch");
        }
        break;
      }
      default: {  // binary ops and comparisons
        if (ins.operands.size() != 2) fail("expected two operands");
        for (const Operand& o : ins.operands)
          if (refers_to_block(o)) fail("block used as a value");
        int w0 = operand_width(ins.operands[0]);
        int w1 = operand_width(ins.operands[1]);
        if (is_compare(ins.op)) {
          if (ins.width != 1) fail("comparison result must be i1");
          if (w0 != w1) fail("comparison operand width mismatch");
        } else {
          if (w0 != ins.width || w1 != ins.width) fail("operand width mismatch");
        }
        break;
      }
    }
  }

  std::vector<Instruction> instrs_;
  std::unordered_map<int, size_t> index_;
  int root_ = -1;
  BlockRole role_ = BlockRole::Lhs;
  bool root_seen_ = false;
};

}  // namespace

Block parse_block(std::string_view text) {
  Assembler as;
  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    ++line_no;

    // split on ';': later segments either continue with statements or start a
    // trailing comment
    size_t seg_start = 0;
    bool first_seg = true;
    while (seg_start <= line.size()) {
      size_t semi = line.find(';', seg_start);
      if (semi == std::string_view::npos) semi = line.size();
      std::string_view seg = line.substr(seg_start, semi - seg_start);
      bool is_stmt = starts_statement(seg);
      if (!first_seg && !is_stmt) break;  // comment to end of line
      if (is_stmt)
        as.add(parse_statement(seg, line_no, static_cast<int>(seg_start) + 1));
      else if (first_seg && seg.find_first_not_of(" \t\r") != std::string_view::npos)
        throw ParseError(line_no, static_cast<int>(seg_start) + 1,
                         "expected an instruction or root line");
      first_seg = false;
      if (semi == line.size()) break;
      seg_start = semi + 1;
    }

    if (nl == text.size()) break;
    pos = nl + 1;
  }
  return as.finish(line_no);
}

namespace {

void print_operand(std::ostringstream& out, const Operand& o) {
  if (o.is_ref())
    out << '%' << o.id;
  else
    out << o.lit.value << ":i" << o.lit.width;
}

void print_instruction(std::ostringstream& out, const Instruction& ins,
                       const std::string& name) {
  if (ins.op == Opcode::Block) {
    out << name << " = block " << ins.pred_count << "\n";
    return;
  }
  out << name << ":i" << ins.width << " = " << mnemonic(ins.op);
  if (ins.op == Opcode::Const) {
    out << ' ' << ins.const_value << ":i" << ins.width;
  } else if (ins.op != Opcode::Var) {
    for (size_t i = 0; i < ins.operands.size(); ++i) {
      out << (i == 0 ? " " : ", ");
      print_operand(out, ins.operands[i]);
    }
  }
  out << "\n";
}

}  // namespace

std::string print_block(const Block& b) {
  std::ostringstream out;
  for (const Instruction& ins : b.instructions)
    print_instruction(out, ins, "%" + std::to_string(ins.id));
  out << (b.role == BlockRole::Lhs ? "infer %" : "result %") << b.root << "\n";
  return out.str();
}

std::string shape_string(const Block& b) {
  std::unordered_map<int, std::string> names;
  int next = 0;
  for (const Instruction& ins : b.instructions) {
    if (ins.op == Opcode::Var)
      names[ins.id] = "%" + std::to_string(ins.id);
    else
      names[ins.id] = "#" + std::to_string(next++);
  }
  std::ostringstream out;
  for (const Instruction& ins : b.instructions) {
    Instruction copy = ins;
    std::ostringstream line;
    if (copy.op == Opcode::Block) {
      line << names[ins.id] << " = block " << copy.pred_count << "\n";
    } else {
      line << names[ins.id] << ":i" << copy.width << " = " << mnemonic(copy.op);
      if (copy.op == Opcode::Const) {
        line << ' ' << copy.const_value << ":i" << copy.width;
      } else if (copy.op != Opcode::Var) {
        for (size_t i = 0; i < copy.operands.size(); ++i) {
          line << (i == 0 ? " " : ", ");
          const Operand& o = copy.operands[i];
          if (o.is_ref())
            line << names[o.id];
          else
            line << o.lit.value << ":i" << o.lit.width;
        }
      }
      line << "\n";
    }
    out << line.str();
  }
  out << "root " << names[b.root] << "\n";
  return out.str();
}

DataflowGraph build_dfg(const Block& b) {
  DataflowGraph g;
  for (const Instruction& ins : b.instructions) {
    g.node_ids.push_back(ins.id);
    g.node_ops.push_back(ins.op);
    for (const Operand& o : ins.operands)
      if (o.is_ref()) g.edges.emplace_back(o.id, ins.id);
  }
  return g;
}

int tree_depth(const Block& b) {
  std::unordered_map<int, int> memo;
  // instructions are topologically ordered, so one forward pass suffices
  for (const Instruction& ins : b.instructions) {
    int deepest = 0;
    for (const Operand& o : ins.operands)
      if (o.is_ref()) deepest = std::max(deepest, memo.at(o.id));
    memo[ins.id] = deepest + 1;
  }
  return memo.at(b.root);
}

CostModel CostModel::standard() {
  CostModel m;
  m.cycles.fill(1);
  auto set = [&m](Opcode op, int c) { m.cycles[static_cast<size_t>(op)] = c; };
  set(Opcode::Var, 0);
  set(Opcode::Const, 0);
  set(Opcode::Block, 0);
  set(Opcode::Mul, 2);
  set(Opcode::MulNsw, 2);
  set(Opcode::Udiv, 3);
  set(Opcode::Sdiv, 3);
  set(Opcode::Urem, 3);
  set(Opcode::Srem, 3);
  return m;
}

int block_cost(const Block& b, const CostModel& m) {
  int total = 0;
  for (const Instruction& ins : b.instructions) total += m.cost(ins.op);
  return total;
}

}  // namespace sopt
