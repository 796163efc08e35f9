#!/usr/bin/env python3
"""Regenerate corpus/mini, the checked-in pattern set used by the benchmark
and acceptance tests.

Every pattern keeps its free input bits at or below the default exhaustive
budget (20), so equivalence verdicts over this corpus are exact and the
pipeline outputs are reproducible across runs.
"""

import os

PATTERNS = [
    # strength reductions: a strictly cheaper rewrite exists
    ("mul by 2 is a shift", "%0:i8 = var\n%1:i8 = mul %0, 2:i8\ninfer %1"),
    ("mul by 4 is a shift", "%0:i8 = var\n%1:i8 = mul %0, 4:i8\ninfer %1"),
    ("wide mul by 4 is a shift", "%0:i16 = var\n%1:i16 = mul %0, 4:i16\ninfer %1"),
    ("narrow mul by 2", "%0:i4 = var\n%1:i4 = mul %0, 2:i4\ninfer %1"),
    ("udiv by 2 is a shift", "%0:i8 = var\n%1:i8 = udiv %0, 2:i8\ninfer %1"),
    ("udiv by 4 is a shift", "%0:i16 = var\n%1:i16 = udiv %0, 4:i16\ninfer %1"),
    ("urem by 2 is a mask", "%0:i8 = var\n%1:i8 = urem %0, 2:i8\ninfer %1"),
    ("wide urem by 2 is a mask", "%0:i16 = var\n%1:i16 = urem %0, 2:i16\ninfer %1"),
    # identities that collapse to an input or a constant
    ("add zero", "%0:i8 = var\n%1:i8 = add %0, 0:i8\ninfer %1"),
    ("sub zero", "%0:i16 = var\n%1:i16 = sub %0, 0:i16\ninfer %1"),
    ("and all ones", "%0:i8 = var\n%1:i8 = and %0, 255:i8\ninfer %1"),
    ("and zero", "%0:i8 = var\n%1:i8 = and %0, 0:i8\ninfer %1"),
    ("or zero", "%0:i4 = var\n%1:i4 = or %0, 0:i4\ninfer %1"),
    ("or all ones", "%0:i8 = var\n%1:i8 = or %0, 255:i8\ninfer %1"),
    ("xor zero", "%0:i16 = var\n%1:i16 = xor %0, 0:i16\ninfer %1"),
    ("xor self", "%0:i8 = var\n%1:i8 = xor %0, %0\ninfer %1"),
    ("sub self", "%0:i16 = var\n%1:i16 = sub %0, %0\ninfer %1"),
    ("and self", "%0:i8 = var\n%1:i8 = and %0, %0\ninfer %1"),
    ("or self", "%0:i16 = var\n%1:i16 = or %0, %0\ninfer %1"),
    ("mul one", "%0:i8 = var\n%1:i8 = mul %0, 1:i8\ninfer %1"),
    ("mul zero", "%0:i16 = var\n%1:i16 = mul %0, 0:i16\ninfer %1"),
    ("udiv one", "%0:i8 = var\n%1:i8 = udiv %0, 1:i8\ninfer %1"),
    ("sdiv one", "%0:i8 = var\n%1:i8 = sdiv %0, 1:i8\ninfer %1"),
    ("urem one", "%0:i8 = var\n%1:i8 = urem %0, 1:i8\ninfer %1"),
    ("shl zero", "%0:i8 = var\n%1:i8 = shl %0, 0:i8\ninfer %1"),
    ("lshr zero", "%0:i16 = var\n%1:i16 = lshr %0, 0:i16\ninfer %1"),
    ("ashr zero", "%0:i4 = var\n%1:i4 = ashr %0, 0:i4\ninfer %1"),
    ("shl past width", "%0:i8 = var\n%1:i8 = shl %0, 8:i8\ninfer %1"),
    ("lshr past width", "%0:i4 = var\n%1:i4 = lshr %0, 4:i4\ninfer %1"),
    # two-step chains that fold
    ("add after sub cancels",
     "%0:i8 = var\n%1:i8 = var\n%2:i8 = sub %0, %1\n%3:i8 = add %2, %1\ninfer %3"),
    ("sub after add cancels",
     "%0:i8 = var\n%1:i8 = var\n%2:i8 = add %0, %1\n%3:i8 = sub %2, %1\ninfer %3"),
    ("double xor cancels",
     "%0:i8 = var\n%1:i8 = var\n%2:i8 = xor %0, %1\n%3:i8 = xor %2, %1\ninfer %3"),
    ("double complement",
     "%0:i8 = var\n%1:i8 = xor %0, 255:i8\n%2:i8 = xor %1, 255:i8\ninfer %2"),
    ("double negate",
     "%0:i8 = var\n%1:i8 = sub 0:i8, %0\n%2:i8 = sub 0:i8, %1\ninfer %2"),
    ("or absorbs and",
     "%0:i8 = var\n%1:i8 = var\n%2:i8 = and %0, %1\n%3:i8 = or %2, %0\ninfer %3"),
    ("and absorbs or",
     "%0:i8 = var\n%1:i8 = var\n%2:i8 = or %0, %1\n%3:i8 = and %2, %0\ninfer %3"),
    ("shift twice",
     "%0:i8 = var\n%1:i8 = shl %0, 1:i8\n%2:i8 = shl %1, 1:i8\ninfer %2"),
    ("add twice",
     "%0:i8 = var\n%1:i8 = add %0, 1:i8\n%2:i8 = add %1, 1:i8\ninfer %2"),
    ("mask twice",
     "%0:i8 = var\n%1:i8 = and %0, 3:i8\n%2:i8 = and %1, 6:i8\ninfer %2"),
    ("or twice with the same bit",
     "%0:i8 = var\n%1:i8 = or %0, 2:i8\n%2:i8 = or %1, 2:i8\ninfer %2"),
    ("xor unwraps to the other input",
     "%0:i8 = var\n%1:i8 = var\n%2:i8 = xor %1, %0\n%3:i8 = xor %0, %2\ninfer %3"),
    ("shift then mul",
     "%0:i8 = var\n%1:i8 = shl %0, 1:i8\n%2:i8 = mul %1, 2:i8\ninfer %2"),
    ("shifts keep only the low bit",
     "%0:i8 = var\n%1:i8 = shl %0, 7:i8\n%2:i8 = lshr %1, 7:i8\ninfer %2"),
    # compare tautologies
    ("eq self", "%0:i8 = var\n%1:i1 = eq %0, %0\ninfer %1"),
    ("ne self", "%0:i8 = var\n%1:i1 = ne %0, %0\ninfer %1"),
    ("ult self", "%0:i16 = var\n%1:i1 = ult %0, %0\ninfer %1"),
    ("sle self", "%0:i4 = var\n%1:i1 = sle %0, %0\ninfer %1"),
    ("nothing is below zero", "%0:i8 = var\n%1:i1 = ult %0, 0:i8\ninfer %1"),
    ("zero is below everything", "%0:i8 = var\n%1:i1 = ule 0:i8, %0\ninfer %1"),
    ("xor then test zero is eq",
     "%0:i8 = var\n%1:i8 = var\n%2:i8 = xor %0, %1\n%3:i1 = eq %2, 0:i8\ninfer %3"),
    ("and self then test zero",
     "%0:i8 = var\n%1:i8 = and %0, %0\n%2:i1 = ne %1, 0:i8\ninfer %2"),
    # select and phi collapses
    ("select between equal arms",
     "%0:i1 = var\n%1:i8 = var\n%2:i8 = select %0, %1, %1\ninfer %2"),
    ("select constant true",
     "%0:i8 = var\n%1:i8 = var\n%2:i8 = select 1:i1, %0, %1\ninfer %2"),
    ("select constant false",
     "%0:i8 = var\n%1:i8 = var\n%2:i8 = select 0:i1, %0, %1\ninfer %2"),
    ("phi of one value",
     "%0 = block 2\n%1:i8 = var\n%2:i8 = phi %0, %1, %1\ninfer %2"),
    ("three way phi of one value",
     "%0 = block 3\n%1:i8 = var\n%2:i8 = phi %0, %1, %1, %1\ninfer %2"),
    # overflow-flagged ops reduce like the plain ones
    ("flagged mul by 2", "%0:i8 = var\n%1:i8 = mulnsw %0, 2:i8\ninfer %1"),
    ("flagged sub zero", "%0:i8 = var\n%1:i8 = subnsw %0, 0:i8\ninfer %1"),
    ("flagged add zero", "%0:i16 = var\n%1:i16 = addnsw %0, 0:i16\ninfer %1"),
    # no strictly cheaper rewrite exists for these
    ("mul by 3 stays", "%0:i8 = var\n%1:i8 = mul %0, 3:i8\ninfer %1"),
    ("plain add stays", "%0:i8 = var\n%1:i8 = var\n%2:i8 = add %0, %1\ninfer %2"),
    ("plain mul stays", "%0:i4 = var\n%1:i4 = var\n%2:i4 = mul %0, %1\ninfer %2"),
    ("odd mask stays", "%0:i8 = var\n%1:i8 = and %0, 5:i8\ninfer %1"),
    ("mul add chain stays",
     "%0:i4 = var\n%1:i4 = var\n%2:i4 = var\n%3:i4 = mul %0, %1\n%4:i4 = add %3, %2\ninfer %4"),
    ("sub of doubled stays",
     "%0:i4 = var\n%1:i4 = var\n%2:i4 = add %1, %1\n%3:i4 = sub %0, %2\ninfer %3"),
    ("sdiv by 2 rounds toward zero", "%0:i8 = var\n%1:i8 = sdiv %0, 2:i8\ninfer %1"),
    ("negate stays", "%0:i8 = var\n%1:i8 = sub 0:i8, %0\ninfer %1"),
    ("doubling is already cheap", "%0:i8 = var\n%1:i8 = add %0, %0\ninfer %1"),
    ("below one stays", "%0:i8 = var\n%1:i1 = ult %0, 1:i8\ninfer %1"),
    ("sign test stays", "%0:i8 = var\n%1:i1 = slt %0, 0:i8\ninfer %1"),
    ("unsigned max stays",
     "%0:i8 = var\n%1:i8 = var\n%2:i1 = ult %0, %1\n%3:i8 = select %2, %1, %0\ninfer %3"),
    ("phi of two values stays",
     "%0 = block 2\n%1:i8 = var\n%2:i8 = var\n%3:i8 = phi %0, %1, %2\ninfer %3"),
    ("nibble sign extend stays",
     "%0:i8 = var\n%1:i8 = shl %0, 4:i8\n%2:i8 = ashr %1, 4:i8\ninfer %2"),
    ("rotate by four stays",
     "%0:i8 = var\n%1:i8 = shl %0, 4:i8\n%2:i8 = lshr %0, 4:i8\n%3:i8 = or %1, %2\ninfer %3"),
    ("shift add is as cheap as mul",
     "%0:i16 = var\n%1:i16 = shl %0, 1:i16\n%2:i16 = add %1, %0\ninfer %2"),
]


def main():
    out_dir = os.path.join(os.path.dirname(__file__), "..", "corpus", "mini")
    os.makedirs(out_dir, exist_ok=True)
    for i, (note, text) in enumerate(PATTERNS):
        path = os.path.join(out_dir, f"lhs_{i:03d}.sir")
        with open(path, "w") as f:
            f.write(f"; {note}\n{text}\n")
    print(f"wrote {len(PATTERNS)} patterns to {out_dir}")


if __name__ == "__main__":
    main()
