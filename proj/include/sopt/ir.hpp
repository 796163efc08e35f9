#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sopt {

// Integer expression IR. A block is a topologically ordered DAG of
// instructions with a single root; operands reference earlier instructions or
// carry literal constants. Value widths are 4/8/16/32, plus width 1 for
// comparison results.

enum class Opcode : uint8_t {
  Var, Const,
  Add, AddNsw, Sub, SubNsw, Mul, MulNsw,
  Udiv, Sdiv, Urem, Srem,
  And, Or, Xor,
  Shl, Lshr, Ashr,
  Eq, Ne, Ult, Slt, Ule, Sle,
  Select, Phi, Block,
};
inline constexpr int kOpcodeCount = 27;

std::string_view mnemonic(Opcode op);
std::optional<Opcode> opcode_from_mnemonic(std::string_view name);

bool is_compare(Opcode op);  // eq/ne/ult/slt/ule/sle; result width 1
bool is_shift(Opcode op);    // shl/lshr/ashr
bool is_binary(Opcode op);   // two value operands (includes compares)

// Opcode vocabulary after filtering: nsw qualifiers stripped, signed and
// unsigned variants folded, shl grouped with mul, lshr/ashr grouped as shr.
enum class Token : uint8_t {
  Var, Const, Add, Sub, Mul, Div, Rem, And, Or, Xor, Shr,
  Eq, Ne, Lt, Le, Select, Phi, Block,
};
inline constexpr int kTokenCount = 18;

Token normalize_opcode(Opcode op);
std::string_view token_name(Token t);
char token_char(Token t);  // fixed one-byte encoding used by string features

struct Literal {
  uint32_t value = 0;  // reduced mod 2^width
  int width = 0;
  friend bool operator==(const Literal&, const Literal&) = default;
};

struct Operand {
  enum class Kind : uint8_t { Ref, Lit } kind = Kind::Ref;
  int id = -1;    // Kind::Ref
  Literal lit{};  // Kind::Lit

  static Operand ref(int id);
  static Operand literal(uint32_t value, int width);
  bool is_ref() const { return kind == Kind::Ref; }
  friend bool operator==(const Operand&, const Operand&) = default;
};

struct Instruction {
  int id = -1;
  Opcode op = Opcode::Var;
  int width = 0;  // result width; 0 for block declarations
  std::vector<Operand> operands;
  uint32_t const_value = 0;  // const payload, reduced mod 2^width
  int pred_count = 0;        // block payload
  friend bool operator==(const Instruction&, const Instruction&) = default;
};

// Root marker keyword: "infer" for patterns being optimized, "result" for
// synthesized replacement candidates.
enum class BlockRole : uint8_t { Lhs, Rhs };

struct Block {
  std::vector<Instruction> instructions;  // topological order
  int root = -1;
  std::vector<int> inputs;  // var ids in declaration order
  BlockRole role = BlockRole::Lhs;

  const Instruction* find(int id) const;
  const Instruction& at(int id) const;  // throws std::out_of_range
};

using LhsPattern = Block;
using RhsCandidate = Block;

// Compares instructions, root and inputs; the role keyword is presentation.
bool structurally_equal(const Block& a, const Block& b);

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int col, const std::string& msg);
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_;
  int col_;
};

Block parse_block(std::string_view text);
std::string print_block(const Block& b);

// Identity of the computation shape: like print_block, but non-var
// instructions are renumbered densely and the root keyword is dropped, so the
// same expression built with different instruction ids compares equal. Vars
// keep their ids because they are the shared interface between blocks.
std::string shape_string(const Block& b);

struct DataflowGraph {
  std::vector<int> node_ids;
  std::vector<Opcode> node_ops;
  std::vector<std::pair<int, int>> edges;  // producer id -> consumer id
};
DataflowGraph build_dfg(const Block& b);

// Longest operand-edge path from any leaf to the root, counting nodes.
// A single instruction has depth 1. Literal operands are not nodes.
int tree_depth(const Block& b);

struct CostModel {
  std::array<int, kOpcodeCount> cycles{};
  static CostModel standard();
  int cost(Opcode op) const { return cycles[static_cast<size_t>(op)]; }
};

int block_cost(const Block& b, const CostModel& m);

}  // namespace sopt
