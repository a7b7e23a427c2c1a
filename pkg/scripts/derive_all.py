#!/usr/bin/env python3
"""Derive every supported curvature report and print them (text + JSON).

Covers kdelta at dim 2, 4, 6 and nc4tori at dim 4; the JSON lines are
byte-stable across runs and suitable for freezing as fixtures.
"""

import argparse

from artifact.modular_function_engine import derive_curvature

CASES = [(2, "kdelta"), (4, "kdelta"), (6, "kdelta"), (4, "nc4tori")]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--json", action="store_true",
                        help="emit one JSON document per case instead of text")
    args = parser.parse_args()
    for dim, operator in CASES:
        report = derive_curvature(dim, operator)
        if args.json:
            print(report.to_json())
        else:
            print(report.to_text())
            print()


if __name__ == "__main__":
    main()
