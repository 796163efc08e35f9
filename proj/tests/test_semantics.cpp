#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "doctest.h"
#include "sopt/ir.hpp"
#include "sopt/rng.hpp"
#include "sopt/semantics.hpp"
#include "sopt/synth.hpp"

using namespace sopt;

namespace {

// Reference interpreter, deliberately built differently from the production
// one: recursive descent over the instruction DAG with sign-extended 64-bit
// host arithmetic, masked back to the width at the end of every node.
int64_t sx(uint32_t v, int w) {
  uint32_t x = v & (w == 32 ? 0xffffffffu : ((1u << w) - 1));
  if (w < 32) return (x >> (w - 1)) & 1 ? static_cast<int64_t>(x) - (1ll << w) : x;
  return static_cast<int32_t>(x);
}

uint32_t ref_node(const Block& b, int id, const InputAssignment& in,
                  std::map<int, uint32_t>& memo) {
  if (auto it = memo.find(id); it != memo.end()) return it->second;
  const Instruction& ins = b.at(id);
  uint64_t mask = ins.width == 32 ? 0xffffffffull : ((1ull << ins.width) - 1);
  auto arg = [&](size_t i) -> uint32_t {
    const Operand& o = ins.operands[i];
    if (o.is_ref()) return ref_node(b, o.id, in, memo);
    return o.lit.value;
  };
  auto width_of = [&](size_t i) {
    const Operand& o = ins.operands[i];
    return o.is_ref() ? b.at(o.id).width : o.lit.width;
  };
  uint64_t r = 0;
  switch (ins.op) {
    case Opcode::Var: r = in.values.at(id); break;
    case Opcode::Const: r = ins.const_value; break;
    case Opcode::Add:
    case Opcode::AddNsw: r = static_cast<uint64_t>(arg(0)) + arg(1); break;
    case Opcode::Sub:
    case Opcode::SubNsw: r = static_cast<uint64_t>(arg(0)) - arg(1); break;
    case Opcode::Mul:
    case Opcode::MulNsw: r = static_cast<uint64_t>(arg(0)) * arg(1); break;
    case Opcode::Udiv: r = arg(1) == 0 ? mask : (arg(0) & mask) / (arg(1) & mask); break;
    case Opcode::Urem: r = arg(1) == 0 ? arg(0) : (arg(0) & mask) % (arg(1) & mask); break;
    case Opcode::Sdiv: {
      int64_t a = sx(arg(0), ins.width), d = sx(arg(1), ins.width);
      if (d == 0)
        r = a < 0 ? 1 : static_cast<uint64_t>(-1);
      else if (a == -(1ll << (ins.width - 1)) && d == -1)
        r = static_cast<uint64_t>(a);
      else
        r = static_cast<uint64_t>(a / d);
      break;
    }
    case Opcode::Srem: {
      int64_t a = sx(arg(0), ins.width), d = sx(arg(1), ins.width);
      if (d == 0)
        r = static_cast<uint64_t>(a);
      else if (a == -(1ll << (ins.width - 1)) && d == -1)
        r = 0;
      else
        r = static_cast<uint64_t>(a % d);
      break;
    }
    case Opcode::And: r = arg(0) & arg(1); break;
    case Opcode::Or: r = arg(0) | arg(1); break;
    case Opcode::Xor: r = arg(0) ^ arg(1); break;
    case Opcode::Shl: r = arg(1) >= static_cast<uint32_t>(ins.width)
                              ? 0
                              : static_cast<uint64_t>(arg(0)) << arg(1);
      break;
    case Opcode::Lshr:
      r = arg(1) >= static_cast<uint32_t>(ins.width) ? 0 : (arg(0) & mask) >> arg(1);
      break;
    case Opcode::Ashr: {
      int64_t a = sx(arg(0), ins.width);
      r = arg(1) >= static_cast<uint32_t>(ins.width)
              ? (a < 0 ? mask : 0)
              : static_cast<uint64_t>(a >> arg(1));
      break;
    }
    case Opcode::Eq: r = arg(0) == arg(1); break;
    case Opcode::Ne: r = arg(0) != arg(1); break;
    case Opcode::Ult: r = arg(0) < arg(1); break;
    case Opcode::Ule: r = arg(0) <= arg(1); break;
    case Opcode::Slt: r = sx(arg(0), width_of(0)) < sx(arg(1), width_of(1)); break;
    case Opcode::Sle: r = sx(arg(0), width_of(0)) <= sx(arg(1), width_of(1)); break;
    case Opcode::Select: r = arg(0) != 0 ? arg(1) : arg(2); break;
    case Opcode::Phi: {
      int sel = 0;
      if (auto it = in.phi_selectors.find(ins.operands[0].id);
          it != in.phi_selectors.end())
        sel = it->second;
      size_t arity = ins.operands.size() - 1;
      r = arg(1 + static_cast<size_t>(sel) % arity);
      break;
    }
    case Opcode::Block: r = 0; break;
  }
  uint32_t out = static_cast<uint32_t>(r & mask);
  memo[id] = out;
  return out;
}

uint32_t ref_eval(const Block& b, const InputAssignment& in) {
  std::map<int, uint32_t> memo;
  return ref_node(b, b.root, in, memo);
}

uint32_t binop(const char* op, int w, uint32_t a, uint32_t b, int out_w = 0) {
  if (out_w == 0) out_w = w;
  std::string text = "%0:i" + std::to_string(w) + " = var\n%1:i" +
                     std::to_string(w) + " = var\n%2:i" + std::to_string(out_w) +
                     " = " + op + " %0, %1\ninfer %2\n";
  InputAssignment in;
  in.values[0] = a;
  in.values[1] = b;
  return eval(parse_block(text), in);
}

}  // namespace

TEST_CASE("every opcode is total with pinned edge cases") {
  CHECK(binop("add", 8, 200, 100) == 44);
  CHECK(binop("sub", 8, 5, 10) == 251);
  CHECK(binop("mul", 8, 16, 16) == 0);
  CHECK(binop("mulnsw", 8, 16, 16) == 0);  // nsw ops wrap identically here

  CHECK(binop("udiv", 8, 7, 2) == 3);
  CHECK(binop("udiv", 8, 5, 0) == 255);
  CHECK(binop("urem", 8, 7, 2) == 1);
  CHECK(binop("urem", 8, 5, 0) == 5);

  CHECK(binop("sdiv", 8, 250, 3) == 254);   // -6 / 3
  CHECK(binop("sdiv", 8, 128, 255) == 128); // most negative / -1 stays put
  CHECK(binop("sdiv", 8, 7, 0) == 255);
  CHECK(binop("sdiv", 8, 249, 0) == 1);
  CHECK(binop("srem", 8, 254, 3) == 254);   // -2 rem 3 truncates toward zero
  CHECK(binop("srem", 8, 128, 255) == 0);
  CHECK(binop("srem", 8, 5, 0) == 5);

  CHECK(binop("shl", 8, 1, 3) == 8);
  CHECK(binop("shl", 8, 1, 8) == 0);
  CHECK(binop("lshr", 8, 128, 7) == 1);
  CHECK(binop("lshr", 8, 128, 8) == 0);
  CHECK(binop("ashr", 8, 128, 2) == 224);
  CHECK(binop("ashr", 8, 128, 9) == 255);  // negative input sign-fills
  CHECK(binop("ashr", 8, 64, 9) == 0);

  CHECK(binop("eq", 8, 9, 9, 1) == 1);
  CHECK(binop("ne", 8, 9, 9, 1) == 0);
  CHECK(binop("ult", 8, 128, 0, 1) == 0);
  CHECK(binop("slt", 8, 128, 0, 1) == 1);  // -128 < 0
  CHECK(binop("ule", 8, 3, 3, 1) == 1);
  CHECK(binop("sle", 8, 255, 0, 1) == 1);  // -1 <= 0
  CHECK(binop("slt", 16, 0x8000, 1, 1) == 1);
}

TEST_CASE("select picks by nonzero condition and phi by selector") {
  Block sel = parse_block(
      "%0:i1 = var\n%1:i8 = var\n%2:i8 = var\n"
      "%3:i8 = select %0, %1, %2\ninfer %3\n");
  InputAssignment in;
  in.values = {{0, 1}, {1, 11}, {2, 22}};
  CHECK(eval(sel, in) == 11);
  in.values[0] = 0;
  CHECK(eval(sel, in) == 22);

  Block phi = parse_block(
      "%0 = block 2\n%1:i8 = var\n%2:i8 = var\n"
      "%3:i8 = phi %0, %1, %2\ninfer %3\n");
  InputAssignment pin;
  pin.values = {{1, 5}, {2, 9}};
  CHECK(eval(phi, pin) == 5);  // missing selector defaults to the first edge
  pin.phi_selectors[0] = 1;
  CHECK(eval(phi, pin) == 9);
  pin.phi_selectors[0] = 2;  // wraps modulo the value arity
  CHECK(eval(phi, pin) == 5);
}

TEST_CASE("eval requires a value for every var") {
  Block b = parse_block("%0:i8 = var\n%1:i8 = add %0, %0\ninfer %1\n");
  CHECK_THROWS_AS(eval(b, InputAssignment{}), std::logic_error);
}

TEST_CASE("the reference interpreter agrees on enumerated programs") {
  Block lhs = parse_block(
      "%0:i4 = var\n%1:i4 = var\n%2:i4 = add %0, %1\ninfer %2\n");
  SynthConfig cfg;
  cfg.max_instructions = 2;
  auto candidates = enumerate_candidates(lhs, cfg, CostModel::standard());
  REQUIRE(candidates.size() > 100);
  Rng rng(7);
  for (const auto& cand : candidates) {
    for (int trial = 0; trial < 8; trial++) {
      InputAssignment in;
      for (int input : cand.inputs)
        in.values[input] = static_cast<uint32_t>(rng.below(16));
      CHECK(eval(cand, in) == ref_eval(cand, in));
    }
  }
}

TEST_CASE("probe vectors start at the corners and hit the requested count") {
  Block b = parse_block(
      "%0:i8 = var\n%1:i8 = var\n%2:i8 = add %0, %1\ninfer %2\n");
  auto probes = probe_vectors(b, 64, 42);
  REQUIRE(probes.size() == 64);
  CHECK(probes[0].values.at(0) == 0);  // all-zeros comes first
  CHECK(probes[0].values.at(1) == 0);
  CHECK(probes[1].values.at(0) == 255);  // then all-ones
  CHECK(probes[1].values.at(1) == 255);
  std::set<std::pair<uint32_t, uint32_t>> distinct;
  for (const auto& p : probes) distinct.insert({p.values.at(0), p.values.at(1)});
  CHECK(distinct.size() == 64);
  // same seed reproduces, different seed diverges
  CHECK(probe_vectors(b, 64, 42) == probes);
  CHECK(probe_vectors(b, 64, 43) != probes);

  // a tiny input space pads with repeats after deduplication runs dry
  Block tiny = parse_block("%0:i1 = var\ninfer %0\n");
  auto tp = probe_vectors(tiny, 10, 42);
  CHECK(tp.size() == 10);
  std::set<uint32_t> tiny_vals;
  for (const auto& p : tp) tiny_vals.insert(p.values.at(0));
  CHECK(tiny_vals.size() == 2);
}

TEST_CASE("probe selectors stay within each block's predecessor range") {
  Block b = parse_block(
      "%0 = block 3\n%1:i4 = var\n%2:i4 = var\n%3:i4 = var\n"
      "%4:i4 = phi %0, %1, %2, %3\ninfer %4\n");
  for (const auto& p : probe_vectors(b, 32, 1)) {
    REQUIRE(p.phi_selectors.count(0) == 1);
    int sel = p.phi_selectors.at(0);
    CHECK(sel >= 0);
    CHECK(sel < 3);
  }
}

TEST_CASE("equivalence sweeps exhaustively inside the bit budget") {
  Block lhs = parse_block("%0:i8 = var\n%1:i8 = mul %0, 2:i8\ninfer %1\n");
  Block good = parse_block("%0:i8 = var\n%2:i8 = shl %0, 1:i8\nresult %2\n");
  Block bad = parse_block("%0:i8 = var\n%2:i8 = shl %0, 2:i8\nresult %2\n");

  OracleConfig cfg;
  Verdict eq = check_equivalence(lhs, good, cfg);
  CHECK(eq.kind == VerdictKind::Equivalent);
  CHECK(!eq.sampled);

  Verdict ne = check_equivalence(lhs, bad, cfg);
  REQUIRE(ne.kind == VerdictKind::NotEquivalent);
  REQUIRE(ne.counterexample.has_value());
  // the counterexample is a real witness: both sides re-evaluate differently
  CHECK(eval(lhs, *ne.counterexample) != eval(bad, *ne.counterexample));
}

TEST_CASE("wide input spaces fall back to sampling") {
  Block lhs = parse_block(
      "%0:i32 = var\n%1:i32 = var\n%2:i32 = add %0, %1\ninfer %2\n");
  Block rhs = parse_block(
      "%0:i32 = var\n%1:i32 = var\n%2:i32 = add %1, %0\nresult %2\n");
  OracleConfig cfg;
  cfg.sample_count = 2000;
  Verdict v = check_equivalence(lhs, rhs, cfg);
  CHECK(v.kind == VerdictKind::Equivalent);
  CHECK(v.sampled);

  Block off = parse_block(
      "%0:i32 = var\n%1:i32 = var\n%2:i32 = sub %0, %1\nresult %2\n");
  Verdict n = check_equivalence(lhs, off, cfg);
  CHECK(n.kind == VerdictKind::NotEquivalent);
  CHECK(n.counterexample.has_value());
}

TEST_CASE("phi selectors are part of the swept space") {
  Block lhs = parse_block(
      "%0 = block 2\n%1:i8 = var\n%2:i8 = var\n"
      "%3:i8 = phi %0, %1, %2\ninfer %3\n");
  // matching phi vs just the first value: differs when the selector is 1
  Block rhs = parse_block("%1:i8 = var\n%2:i8 = var\n%4:i8 = or %1, 0:i8\nresult %4\n");
  Verdict v = check_equivalence(lhs, rhs, OracleConfig{});
  REQUIRE(v.kind == VerdictKind::NotEquivalent);
  REQUIRE(v.counterexample.has_value());
  CHECK(eval(lhs, *v.counterexample) != eval(rhs, *v.counterexample));
}

TEST_CASE("conflicting shared inputs are rejected") {
  Block a = parse_block("%0:i8 = var\n%1:i8 = add %0, %0\ninfer %1\n");
  Block b = parse_block("%0:i16 = var\n%1:i16 = add %0, %0\nresult %1\n");
  CHECK_THROWS_AS(check_equivalence(a, b, OracleConfig{}), std::invalid_argument);

  Block c = parse_block("%0:i8 = var\n%1:i1 = eq %0, 0:i8\ninfer %1\n");
  CHECK_THROWS_AS(check_equivalence(a, c, OracleConfig{}), std::invalid_argument);
}

TEST_CASE("a spent budget yields unknown") {
  Block lhs = parse_block(
      "%0:i8 = var\n%1:i8 = var\n%2:i8 = add %0, %1\ninfer %2\n");
  Block rhs = parse_block(
      "%0:i8 = var\n%1:i8 = var\n%2:i8 = add %1, %0\nresult %2\n");
  OracleConfig cfg;
  cfg.per_candidate_timeout = std::chrono::milliseconds(0);
  Verdict v = check_equivalence(lhs, rhs, cfg);
  CHECK(v.kind == VerdictKind::Unknown);
}

TEST_CASE("oracle settings serialize into a stable cache key") {
  CHECK(OracleConfig{}.key_string() ==
        "budget=20;samples=100000;seed=42;cand_ms=5000;lhs_ms=300000");
}
