#!/usr/bin/env python3
"""End-to-end divergence hunt on a disjoint union of two bundled systems.

Loads two fixture systems, forms their disjoint union, classifies the
convergence behaviour of a start term, and prints the witness.

Usage:  python3 scripts/analyze_example.py [left right start-term]
Default: toyama-r toyama-s "F(0, 1, G(0, 1))"
"""

from __future__ import annotations

import sys

from itrsbench import (
    Budgets,
    LoopWitness,
    classify_convergence,
    parse,
    replay_loop,
    to_text,
)
from itrsbench.corpus import load_union


def main(argv: list[str]) -> int:
    left, right, text = argv if len(argv) == 3 else (
        "toyama-r", "toyama-s", "F(0, 1, G(0, 1))"
    )
    system, _coloring = load_union(left, right)
    start = parse(text, system.sig)
    print(f"union of {left} and {right}; start = {to_text(start)}")
    verdict = classify_convergence(system, start, Budgets(loop_states=5_000))
    print(f"verdict: {verdict.kind}")
    w = verdict.witness
    if isinstance(w, LoopWitness):
        print(f"loop of length {len(w.cycle)} from {to_text(w.base)}")
        for occ in w.cycle:
            pos = ".".join(map(str, occ.position)) or "root"
            print(f"  apply {occ.rule.name} at {pos}")
        print(f"witness replays: {replay_loop(system, w)}")
    elif w is not None:
        print(f"witness: {w}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
