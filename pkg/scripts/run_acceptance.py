"""Run the acceptance criteria and print one line each.

    python3 scripts/run_acceptance.py [--seed N] [--json report.json] [--only 3 7]
"""
import argparse
import sys
import time
from pathlib import Path

from cu_kit import acceptance


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", help="write the canonical JSON report here")
    p.add_argument("--only", type=int, nargs="*", help="criterion numbers (1-8); 9 needs all of them")
    args = p.parse_args(argv)

    numbers = args.only or list(range(1, 9))
    results = []
    for n in numbers:
        t = time.perf_counter()
        r = acceptance.CRITERIA[n - 1](args.seed)
        results.append(r)
        print(f"{r.line()} ({time.perf_counter() - t:.1f}s)", flush=True)
    text = acceptance.canonical_json(results)
    if not args.only:
        t = time.perf_counter()
        r = acceptance.criterion_9(text, args.seed)
        results.append(r)
        print(f"{r.line()} ({time.perf_counter() - t:.1f}s)")
    if args.json:
        Path(args.json).write_text(acceptance.canonical_json(results) + "\n", encoding="utf-8")
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
