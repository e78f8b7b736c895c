"""AF algebras from Bratteli diagrams, queried through the thread calculus."""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence, Union

from .core import INF, IncreasingSequence, LawResult, case_rng
from .limit import (
    CuDiagram,
    Thread,
    Tri,
    Verdict,
    default_horizon,
    embed,
    functional_value,
    limit_sup,
    matrix_diagram,
    rapid_representative,
    thread_equiv,
    thread_leq,
    thread_way_below,
)
from .perron import Functional, is_primitive, perron_functional


class BratteliError(ValueError):
    pass


@dataclass(frozen=True)
class BratteliDiagram:
    dims: tuple  # per stage: block sizes
    mults: tuple  # mults[i]: shape (len(dims[i+1]) x len(dims[i]))
    stationary: bool = False
    unital: bool = False
    name: str = ""

    def __post_init__(self):
        validate_bratteli(self)

    @property
    def tail_matrix(self):
        return self.mults[-1] if self.stationary else None


def _shape(m) -> tuple:
    return (len(m), len(m[0]) if m else 0)


def validate_bratteli(b: BratteliDiagram):
    n = len(b.dims)
    if n < 1:
        raise BratteliError("at least one stage is required")
    for i, d in enumerate(b.dims, start=1):
        if not d or any(not isinstance(x, int) or isinstance(x, bool) or x < 1 for x in d):
            raise BratteliError(f"stage {i}: block sizes must be positive integers")
    expected = (n - 1, n) if b.stationary else (n - 1,)
    if len(b.mults) not in expected or (b.stationary and not b.mults):
        raise BratteliError(
            f"{n} stages need {' or '.join(map(str, expected))} multiplicity matrices, got {len(b.mults)}"
        )
    for i, m in enumerate(b.mults, start=1):
        if not m or any(len(row) != len(m[0]) for row in m):
            raise BratteliError(f"stage {i}: multiplicity matrix is not rectangular")
        if any(not isinstance(e, int) or isinstance(e, bool) or e < 0 for row in m for e in row):
            raise BratteliError(f"stage {i}: multiplicities must be nonnegative integers")
        k_in = len(b.dims[i - 1])
        k_out = len(b.dims[i]) if i < n else k_in
        if _shape(m) != (k_out, k_in):
            raise BratteliError(
                f"stage {i}: multiplicity matrix has shape {_shape(m)}, expected {(k_out, k_in)}"
            )
        if b.unital and i < n:
            image = [sum(e * s for e, s in zip(row, b.dims[i - 1])) for row in m]
            if image != list(b.dims[i]):
                raise BratteliError(f"stage {i}: not unital, mults * dims = {image} != {list(b.dims[i])}")
    if b.stationary:
        m = b.mults[-1]
        if len(m) != len(m[0]):
            raise BratteliError(f"stage {len(b.mults)}: the repeating matrix must be square")


def parse_bratteli(text: Union[str, dict], name: str = "") -> BratteliDiagram:
    doc = json.loads(text) if isinstance(text, str) else text
    if not isinstance(doc, dict):
        raise BratteliError("document must be a JSON object")
    unknown = set(doc) - {"dims", "mults", "stationary", "unital"}
    if unknown:
        raise BratteliError(f"unknown keys: {sorted(unknown)}")
    if "dims" not in doc or "mults" not in doc:
        raise BratteliError("'dims' and 'mults' are required")
    dims, mults = doc["dims"], doc["mults"]
    if not isinstance(dims, list) or not all(isinstance(d, list) for d in dims):
        raise BratteliError("'dims' must be a list of lists of integers")
    if not isinstance(mults, list) or not all(
        isinstance(m, list) and all(isinstance(r, list) for r in m) for m in mults
    ):
        raise BratteliError("'mults' must be a list of integer matrices")
    for key in ("stationary", "unital"):
        if key in doc and not isinstance(doc[key], bool):
            raise BratteliError(f"'{key}' must be a boolean")
    return BratteliDiagram(
        tuple(tuple(d) for d in dims),
        tuple(tuple(tuple(r) for r in m) for m in mults),
        doc.get("stationary", False),
        doc.get("unital", False),
        name,
    )


def bratteli_to_json(b: BratteliDiagram) -> dict:
    return {
        "dims": [list(d) for d in b.dims],
        "mults": [[list(r) for r in m] for m in b.mults],
        "stationary": b.stationary,
        "unital": b.unital,
    }


_DIAGRAMS: dict = {}


def to_cu_diagram(b: BratteliDiagram) -> CuDiagram:
    """Stages Cu(sum of matrix blocks) = ExtNat^k, maps the multiplicity matrices.

    Cached per diagram value so that threads built twice compare over the
    same object.
    """
    key = (b.dims, b.mults, b.stationary)
    if key not in _DIAGRAMS:
        _DIAGRAMS[key] = matrix_diagram([len(d) for d in b.dims], b.mults, b.stationary, b.name)
    return _DIAGRAMS[key]


FIXTURE_NAMES = ("uhf2", "uhf6", "fibonacci", "nonsimple")


def load_fixture(name: str) -> BratteliDiagram:
    text = resources.files("cu_kit").joinpath("fixtures", f"{name}.json").read_text("utf-8")
    return parse_bratteli(text, name)


def load_diagram(path_or_name: str) -> BratteliDiagram:
    p = Path(path_or_name)
    if p.exists():
        return parse_bratteli(p.read_text("utf-8"), p.stem)
    stem = p.stem if p.suffix == ".json" else path_or_name
    if stem in FIXTURE_NAMES:
        return load_fixture(stem)
    raise FileNotFoundError(path_or_name)


# --- queries ------------------------------------------------------------------

def _diagram_of(b) -> CuDiagram:
    return b if isinstance(b, CuDiagram) else to_cu_diagram(b)


def af_compare(b, a: Thread, c: Thread, horizon: Optional[int] = None) -> Verdict:
    return thread_leq(a, c, horizon)


class CompactsUnresolved(RuntimeError):
    def __init__(self, verdict: Verdict):
        super().__init__(f"supremum of compacts not certified equivalent: {verdict.value.value}")
        self.verdict = verdict


def compact_sequence(a: Thread, horizon: int) -> IncreasingSequence:
    """``n -> embed(n, r_n)`` for a rapid representative ``(r_n)`` of ``a``."""
    d = a.diagram
    r = rapid_representative(a, horizon)
    return IncreasingSequence(lambda n: embed(d, n, r[n]), label="compacts")


def compacts_below(b, a: Thread, count: int, horizon: Optional[int] = None) -> list:
    """``count`` increasing compact classes below ``a`` whose supremum is ``a``."""
    if horizon is None:
        horizon = default_horizon()
    if a.described and all(x != INF for v in a.prefix for x in v):
        return [a] * count
    seq = compact_sequence(a, horizon)
    verdict = thread_equiv(limit_sup(seq, horizon), a, horizon)
    if not verdict.le:
        raise CompactsUnresolved(verdict)
    return [seq(n) for n in range(1, count + 1)]


def _interpolant(x: Thread, y: Thread, h: int) -> Optional[Thread]:
    """Search finite-vector classes ``z`` with ``x <= z <= y``."""
    d = x.diagram
    candidates = []
    if x.described and all(v != INF for e in x.prefix for v in e):
        candidates.append(x)
    for j in range(1, h + 1):
        t = d.stage(j).test_element(y[j], max(1, h - j + 1))
        candidates.append(embed(d, j, t))
    for z in candidates:
        if thread_leq(x, z, h).le and thread_leq(z, y, h).le:
            return z
    return None


@dataclass
class CheckResult(LawResult):
    unknown: int = 0

    def to_json(self) -> dict:
        out = super().to_json()
        out["unknown"] = self.unknown
        return out

    @property
    def unknown_rate(self) -> float:
        return self.unknown / self.cases if self.cases else 0.0


def compact_interpolation_check(b, pairs: Sequence, horizon: Optional[int] = None) -> list:
    """``x << y`` iff ``x <= z << z <= y`` for a compact ``z``, pair by pair."""
    if horizon is None:
        horizon = default_horizon()
    res = CheckResult("compact-interpolation")
    for x, y in pairs:
        h = x.diagram.clamp(horizon)
        wb = thread_way_below(x, y, h)
        if wb.unknown:
            res.cases += 1
            res.unknown += 1
            continue
        z = _interpolant(x, y, h)
        ok = (z is not None) == wb.le
        res.record(ok, lambda: f"x={x!r} y={y!r} way_below={wb.value.value} interpolant={z!r}")
    return [res]


def stagewise_domination(a: Thread, c: Thread, horizon: int) -> Optional[int]:
    d = a.diagram
    for j in range(a.start, d.clamp(horizon) + 1):
        if d.stage(j).leq(a[j], c[j]):
            return j
    return None


def order_equals_inclusion_check(b, pairs: Sequence, horizon: Optional[int] = None) -> list:
    """For compact classes: ``a <= c`` iff the entries are dominated at some stage."""
    if horizon is None:
        horizon = default_horizon()
    res = CheckResult("order-equals-inclusion")
    for a, c in pairs:
        v = thread_leq(a, c, horizon)
        j = stagewise_domination(a, c, horizon)
        if v.unknown:
            res.unknown += 1
            res.record(j is None, lambda: f"a={a!r} c={c!r} Unknown but dominated at stage {j}")
            continue
        res.record(v.le == (j is not None), lambda: f"a={a!r} c={c!r} {v.value.value} domination={j}")
    return [res]


@dataclass(frozen=True)
class ApproxValue:
    value: float
    error: float

    def __str__(self):
        return f"{self.value:.12g}±{self.error:.1g}"


class NotPrimitive(ValueError):
    pass


def _trace_functional(b) -> Functional:
    d = _diagram_of(b)
    if not d.stationary:
        raise NotPrimitive("trace needs a stationary diagram")
    m = d.tail_map.matrix
    if not is_primitive(m):
        raise NotPrimitive("trace needs a primitive repeating matrix")
    f = perron_functional(m)
    if f is None:
        raise NotPrimitive("no positive Perron vector")
    return f


def perron_trace(b, a: Thread):
    """Normalized Perron functional of the class: ``lam . s_J / rho^J``."""
    f = _trace_functional(b)
    if not a.described:
        raise ValueError("trace is evaluated on described threads only")
    v = functional_value(f, a)
    if v == INF or f.exact:
        return v
    return ApproxValue(float(v), 1e-9 * max(1.0, abs(float(v))))


def format_value(v) -> str:
    if v == INF:
        return "inf"
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return str(v)


# --- samplers -----------------------------------------------------------------

def sample_compact_class(d: CuDiagram, rng: random.Random, max_stage: int = 5, bound: int = 6) -> Thread:
    i = rng.randint(1, max_stage)
    k = d.stage(i).dim
    return embed(d, i, tuple(rng.randint(0, bound) for _ in range(k)))


def sample_class(d: CuDiagram, rng: random.Random, max_stage: int = 5, bound: int = 6,
                 inf_rate: float = 0.2) -> Thread:
    i = rng.randint(1, max_stage)
    k = d.stage(i).dim
    v = tuple(INF if rng.random() < inf_rate else rng.randint(0, bound) for _ in range(k))
    return embed(d, i, v)


def sample_pairs(d: CuDiagram, count: int, seed: int, sampler=sample_class, tag: str = "pairs") -> list:
    out = []
    for case in range(count):
        rng = case_rng(seed, tag, case)
        out.append((sampler(d, rng), sampler(d, rng)))
    return out


# --- example cones --------------------------------------------------------------

def identity_diagram() -> BratteliDiagram:
    """``C -> C -> ...`` with identity connecting maps; the limit is ExtNat."""
    return BratteliDiagram(((1,),), (((1,),),), stationary=True, name="identity")


def uhf2_rational_cone(i: int, v):
    """``psi_i(s) = s / 2^(i-1)`` from stage ``i`` of UHF-2 into ExtNonnegRational."""
    s = v[0]
    return INF if s == INF else Fraction(s, 2 ** (i - 1))


def identity_extnat_cone(i: int, v):
    return v[0]


def stage_element_sampler(inst, rng: random.Random, bound: int = 6, inf_rate: float = 0.15):
    return tuple(INF if rng.random() < inf_rate else rng.randint(0, bound) for _ in range(inst.dim))
