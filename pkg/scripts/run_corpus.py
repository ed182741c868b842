#!/usr/bin/env python3
"""Run every bundled example fixture and print one pass/fail line per check.

Usage:  python3 scripts/run_corpus.py [fixture ...]
"""

from __future__ import annotations

import sys

from itrsbench.corpus import FIXTURES


def main(argv: list[str]) -> int:
    names = argv or sorted(FIXTURES)
    unknown = [n for n in names if n not in FIXTURES]
    if unknown:
        print(f"unknown fixture(s): {', '.join(unknown)}", file=sys.stderr)
        print(f"available: {', '.join(sorted(FIXTURES))}", file=sys.stderr)
        return 2
    failed = 0
    for name in names:
        report = FIXTURES[name]()
        for check in report.checks:
            status = "PASS" if check.passed else "FAIL"
            detail = f"  ({check.detail})" if check.detail and not check.passed else ""
            print(f"{status}  [{name}] {check.label}{detail}")
            failed += 0 if check.passed else 1
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
