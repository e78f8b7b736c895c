"""cu-kit command line: law suites, AF queries and oracle self-tests.

Reports are JSON only.  Exit codes: 0 success, 1 a check failed,
2 bad input, 3 the answer is Unknown at the horizon.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import af, oracle
from .core import check_laws, report_json, report_passed
from .instances import instance_by_name, sampler_for
from .limit import Tri, decode_thread, default_horizon, encode_thread, thread_leq, thread_way_below

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_UNKNOWN = 0, 1, 2, 3


class InputError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    instance: Optional[str] = None
    diagram: Optional[str] = None
    horizon: int = 40
    cases: int = 1000
    seed: int = 0
    output: Optional[str] = None

    def __post_init__(self):
        if self.horizon < 1:
            raise InputError("horizon must be >= 1")
        if self.cases < 1:
            raise InputError("cases must be >= 1")


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def emit(obj, output: Optional[str]):
    text = dumps(obj) + "\n"
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# --- commands ---------------------------------------------------------------------

def cmd_check_laws(cfg: RunConfig):
    try:
        inst = instance_by_name(cfg.instance)
    except KeyError:
        raise InputError(f"unknown instance {cfg.instance!r} (expected extnat, extnat^k or extrational)")
    results = check_laws(inst, sampler_for(inst), cfg.cases, cfg.seed)
    report = {"instance": inst.name, "cases": cfg.cases, "seed": cfg.seed,
              "passed": report_passed(results), "laws": report_json(results)}
    return report, EXIT_OK if report_passed(results) else EXIT_FAIL


def _load(cfg: RunConfig):
    try:
        b = af.load_diagram(cfg.diagram)
    except FileNotFoundError:
        raise InputError(f"no such diagram: {cfg.diagram}")
    except (af.BratteliError, json.JSONDecodeError) as e:
        raise InputError(f"bad diagram {cfg.diagram}: {e}")
    return b, af.to_cu_diagram(b)


def _thread(d, text: Optional[str], flag: str):
    if text is None:
        raise InputError(f"{flag} is required")
    try:
        return decode_thread(d, text)
    except (ValueError, IndexError) as e:
        raise InputError(f"cannot parse {flag} {text!r}: {e}")


def _verdict(v) -> tuple:
    out = {"result": v.value.value}
    if v.not_le and v.certificate:
        out["certificate"] = v.certificate
    if v.unknown:
        out["horizon"] = v.horizon
        return out, EXIT_UNKNOWN
    return out, EXIT_OK


def cmd_af(cfg: RunConfig, sub: str, a_text=None, b_text=None, count: int = 5):
    b, d = _load(cfg)
    a = _thread(d, a_text, "--a")
    h = cfg.horizon
    if sub == "compare":
        return _verdict(af.af_compare(b, a, _thread(d, b_text, "--b"), h))
    if sub == "interpolate":
        y = _thread(d, b_text, "--b")
        out, code = _verdict(thread_way_below(a, y, h))
        if out["result"] == Tri.LE.value:
            z = af._interpolant(a, y, d.clamp(h))
            if z is None:
                return {"result": Tri.UNKNOWN.value, "horizon": h}, EXIT_UNKNOWN
            out["interpolant"] = encode_thread(z)
        return out, code
    if sub == "compacts":
        try:
            terms = af.compacts_below(b, a, count, h)
        except af.CompactsUnresolved as e:
            out, code = _verdict(e.verdict)
            return out, code if code == EXIT_UNKNOWN else EXIT_FAIL
        return {"result": Tri.LE.value, "compacts": [encode_thread(t) for t in terms]}, EXIT_OK
    if sub == "trace":
        try:
            v = af.perron_trace(b, a)
        except af.NotPrimitive as e:
            raise InputError(str(e))
        if isinstance(v, af.ApproxValue):
            return {"value": repr(v.value), "error": v.error}, EXIT_OK
        return {"value": af.format_value(v)}, EXIT_OK
    raise InputError(f"unknown af subcommand {sub!r}")


def cmd_oracle_selftest(cfg: RunConfig, fixture: Optional[str] = None):
    pairs = None
    if fixture is not None:
        try:
            pairs = oracle.load_pairs(Path(fixture).read_text(encoding="utf-8"))
        except (OSError, ValueError, TypeError, KeyError, IndexError) as e:
            raise InputError(f"bad fixture {fixture}: {e}")
    n = cfg.cases
    results = (
        oracle.oracle_agreement_check(n, cfg.seed, pairs=pairs)
        + oracle.class_addition_check(min(n, 200), seed=cfg.seed)
        + oracle.eps_cut_checks(min(n, 200), seed=cfg.seed)
    )
    report = {
        "cases": n if pairs is None else len(pairs),
        "seed": cfg.seed,
        "passed": report_passed(results),
        "unstable": sum(r.unstable for r in results),
        "checks": report_json(results),
    }
    return report, EXIT_OK if report_passed(results) else EXIT_FAIL


# --- argument parsing -------------------------------------------------------------

def _common(p: argparse.ArgumentParser, cases: Optional[int] = None):
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", default=None)
    if cases is not None:
        p.add_argument("--cases", type=int, default=cases)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cu-kit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("check-laws", help="run the Cu law suite on an instance")
    p.add_argument("--instance", required=True)
    _common(p, cases=1000)
    p = sub.add_parser("af", help="queries on an AF algebra given by a Bratteli diagram")
    p.add_argument("sub", choices=("compare", "compacts", "interpolate", "trace"))
    p.add_argument("--diagram", required=True, help="JSON file or fixture name (uhf2, uhf6, fibonacci, nonsimple)")
    p.add_argument("--a", help="thread, e.g. @2:1 or @1:1,0;1,1|tail")
    p.add_argument("--b", help="second thread (compare, interpolate)")
    p.add_argument("--count", type=int, default=5, help="number of compacts to list")
    _common(p)
    p = sub.add_parser("oracle-selftest", help="matrix-oracle invariants")
    p.add_argument("--fixture", help="JSON file of positive-element pairs")
    _common(p, cases=500)
    return parser


def run(argv=None) -> tuple:
    """Parse and execute; returns ``(report or None, exit code)``."""
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return None, EXIT_INPUT if e.code else EXIT_OK
    try:
        cfg = RunConfig(
            command=ns.command,
            instance=getattr(ns, "instance", None),
            diagram=getattr(ns, "diagram", None),
            horizon=ns.horizon if ns.horizon is not None else default_horizon(),
            cases=getattr(ns, "cases", 1000),
            seed=ns.seed,
            output=ns.output,
        )
        if ns.command == "check-laws":
            report, code = cmd_check_laws(cfg)
        elif ns.command == "af":
            report, code = cmd_af(cfg, ns.sub, ns.a, ns.b, ns.count)
        else:
            report, code = cmd_oracle_selftest(cfg, ns.fixture)
    except InputError as e:
        print(f"cu-kit: error: {e}", file=sys.stderr)
        return None, EXIT_INPUT
    emit(report, cfg.output)
    return report, code


def main(argv=None) -> int:
    return run(argv)[1]


if __name__ == "__main__":
    sys.exit(main())
