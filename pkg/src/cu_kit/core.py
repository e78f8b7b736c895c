"""Cu-objects as values: the instance contract, certified sequences, and a
seeded law-checking harness.

Elements of the shipped instances are plain Python values.  An extended
natural is an ``int`` or the float ``INF``; an extended nonnegative rational
is a ``Fraction`` or ``INF``; a vector is a tuple of extended naturals.
Python compares ``int``/``Fraction`` against ``math.inf`` exactly, so no
wrapper class is needed.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional, Sequence

INF = math.inf

Element = Any


def is_inf(x) -> bool:
    return x == INF


def fin(n: int) -> int:
    if isinstance(n, bool) or not isinstance(n, int) or n < 0:
        raise ValueError(f"not a finite extended natural: {n!r}")
    return n


# --- extended naturals ------------------------------------------------------

def extnat_add(a, b):
    if a == INF or b == INF:
        return INF
    return a + b


def extnat_leq(a, b) -> bool:
    return a <= b


def extnat_way_below(a, b) -> bool:
    # finite elements are compact; Inf << Inf fails against 1, 2, 3, ...
    return a != INF and a <= b


def encode_extnat(x) -> str:
    return "inf" if x == INF else str(int(x))


def decode_extnat(s: str):
    s = s.strip().lower()
    if s in ("inf", "∞"):
        return INF
    return fin(int(s))


# --- certified sequences ----------------------------------------------------

@dataclass(frozen=True)
class IncreasingSequence:
    """An increasing sequence n -> term(n), n >= 1, with a finite certificate.

    The certificate is what makes ``sup`` computable.  ``stabilization_index``
    pins the bounded part (``term(n) == term(m)`` for ``n >= m`` there);
    ``unbounded`` is ``True`` for scalars or a per-coordinate tuple of flags
    for vectors; ``limit`` is a declared supremum for sequences that converge
    without stabilizing (rational bases).
    """

    term: Callable[[int], Element]
    stabilization_index: Optional[int] = None
    unbounded: Any = False
    limit: Optional[Element] = None
    label: str = field(default="", compare=False)
    # optional closed form: least n with target <= term(n), None if there is none
    seek: Optional[Callable[[Element], Optional[int]]] = field(default=None, compare=False)

    def __call__(self, n: int) -> Element:
        if n < 1:
            raise IndexError("sequences are indexed from 1")
        return self.term(n)

    @property
    def certified(self) -> bool:
        return (
            self.stabilization_index is not None
            or self.limit is not None
            or _any_flag(self.unbounded)
        )


def _any_flag(flags) -> bool:
    if isinstance(flags, tuple):
        return any(flags)
    return bool(flags)


class UncertifiedSequence(ValueError):
    pass


def constant_sequence(x, label: str = "") -> IncreasingSequence:
    return IncreasingSequence(lambda n: x, stabilization_index=1, label=label)


def extnat_sup(s: IncreasingSequence):
    if s.unbounded is True:
        return INF
    if s.limit is not None:
        return s.limit
    if s.stabilization_index is None:
        raise UncertifiedSequence(
            "sequence carries neither a stabilization index nor an unboundedness declaration"
        )
    return s(s.stabilization_index)


def extnat_basis(x) -> IncreasingSequence:
    if x == INF:
        return IncreasingSequence(lambda n: n, unbounded=True, label="basis(inf)",
                                  seek=lambda t: None if t == INF else max(1, t))
    n0 = int(x)
    return IncreasingSequence(
        lambda n: min(n - 1, n0), stabilization_index=n0 + 1, label=f"basis({n0})",
        seek=lambda t: None if t == INF or t > n0 else t + 1,
    )


def extnat_probe(x, depth: int):
    return depth if x == INF else x


# --- the instance contract --------------------------------------------------

@dataclass(frozen=True)
class CuInstance:
    """Value-level description of an object of Cu.

    ``probe(x, k)`` is the depth-``k`` test element used by the thread
    calculus: some element way-below ``x``, increasing in ``k`` with
    supremum ``x``.  It defaults to ``basis(x)(k)``.
    """

    name: str
    zero: Element
    add: Callable[[Element, Element], Element]
    leq: Callable[[Element, Element], bool]
    way_below: Callable[[Element, Element], bool]
    sup: Callable[[IncreasingSequence], Element]
    basis: Callable[[Element], IncreasingSequence]
    encode: Callable[[Element], str] = str
    probe: Optional[Callable[[Element, int], Element]] = None
    dim: Optional[int] = None

    def test_element(self, x, depth: int):
        if self.probe is not None:
            return self.probe(x, depth)
        return self.basis(x)(depth)

    def eq(self, x, y) -> bool:
        return self.leq(x, y) and self.leq(y, x)

    def add_sequences(self, s: IncreasingSequence, t: IncreasingSequence) -> IncreasingSequence:
        """Pointwise sum, with the certificate combined structurally."""
        add = self.add
        term = lambda n: add(s(n), t(n))  # noqa: E731
        if s.limit is not None or t.limit is not None:
            # converging parts: the declared limits add, bounded parts are read off
            limit = add(_limit_or_stable(s), _limit_or_stable(t))
            return IncreasingSequence(term, limit=limit, label=f"({s.label})+({t.label})")
        stab = None
        if s.stabilization_index is not None or t.stabilization_index is not None:
            stab = max(s.stabilization_index or 1, t.stabilization_index or 1)
        return IncreasingSequence(
            term,
            stabilization_index=stab,
            unbounded=_or_flags(s.unbounded, t.unbounded),
            label=f"({s.label})+({t.label})",
        )


def _limit_or_stable(s: IncreasingSequence):
    if s.limit is not None:
        return s.limit
    if s.unbounded is True:
        return INF
    return s(s.stabilization_index)


def _or_flags(a, b):
    if isinstance(a, tuple) or isinstance(b, tuple):
        k = len(a) if isinstance(a, tuple) else len(b)
        a = a if isinstance(a, tuple) else (bool(a),) * k
        b = b if isinstance(b, tuple) else (bool(b),) * k
        return tuple(x or y for x, y in zip(a, b))
    return bool(a) or bool(b)


def is_compact(inst: CuInstance, x) -> bool:
    return inst.way_below(x, x)


def extnat_instance() -> CuInstance:
    return CuInstance(
        name="extnat",
        zero=0,
        add=extnat_add,
        leq=extnat_leq,
        way_below=extnat_way_below,
        sup=extnat_sup,
        basis=extnat_basis,
        encode=encode_extnat,
        probe=extnat_probe,
    )


# --- law harness ------------------------------------------------------------

# Probe indices: a dense head plus powers of two, so that closed-form
# unbounded sequences overtake any sampled competitor.
PROBE_INDICES: tuple = tuple(range(1, 17)) + tuple(2 ** k for k in range(5, 11))

LAWS = ("L1", "L2", "L3", "L4", "L5", "L6")


@dataclass
class LawResult:
    law: str
    cases: int = 0
    failures: int = 0
    first_counterexample: Optional[str] = None

    def record(self, ok: bool, counterexample: Callable[[], str]):
        self.cases += 1
        if not ok:
            self.failures += 1
            if self.first_counterexample is None:
                self.first_counterexample = counterexample()

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_json(self) -> dict:
        return {
            "law": self.law,
            "cases": self.cases,
            "failures": self.failures,
            "first_counterexample": self.first_counterexample,
        }


LawReport = list  # list[LawResult]


def report_json(report: Iterable[LawResult]) -> list:
    return [r.to_json() for r in report]


def report_passed(report: Iterable[LawResult]) -> bool:
    return all(r.passed for r in report)


def case_rng(seed: int, tag: str, case: int) -> random.Random:
    # string seeds hash through sha512: stable across processes
    return random.Random(f"{seed}:{tag}:{case}")


def sample_sequence(inst: CuInstance, sampler, rng: random.Random) -> IncreasingSequence:
    """A certified increasing sequence built from sampled elements."""
    kind = rng.randrange(3)
    if kind == 0:
        parts = [sampler(rng) for _ in range(rng.randint(1, 4))]
        partial = [inst.zero]
        for p in parts:
            partial.append(inst.add(partial[-1], p))
        partial = partial[1:]
        m = len(partial)
        return IncreasingSequence(
            lambda n: partial[min(n, m) - 1],
            stabilization_index=m,
            label="partial-sums[" + ";".join(inst.encode(p) for p in parts) + "]",
        )
    if kind == 1:
        x = sampler(rng)
        s = inst.basis(x)
        return s
    return inst.add_sequences(inst.basis(sampler(rng)), sample_sequence(inst, sampler, rng))


def _probe_terms(s: IncreasingSequence):
    return [s(n) for n in PROBE_INDICES]


def check_laws(inst: CuInstance, sampler, cases: int = 1000, seed: int = 0) -> list:
    """Run laws L1-L6 on ``cases`` seeded samples each.

    L1 ordered abelian monoid with zero least; L2 suprema are least upper
    bounds; L3 bases are rapid with the right supremum and ``way_below`` is
    sound against sampled sequences; L4 sup additivity; L5 << additivity;
    L6 interplay of <= and <<.
    """
    if cases < 1:
        raise ValueError("cases must be >= 1")
    enc = inst.encode
    add, leq, wb = inst.add, inst.leq, inst.way_below
    eq = inst.eq
    results = {law: LawResult(law) for law in LAWS}

    for case in range(cases):
        rng = case_rng(seed, "L1", case)
        x, y, z = sampler(rng), sampler(rng), sampler(rng)
        ok = (
            eq(add(add(x, y), z), add(x, add(y, z)))
            and eq(add(x, y), add(y, x))
            and eq(add(inst.zero, x), x)
            and leq(inst.zero, x)
            and leq(x, x)
            and (not (leq(x, y) and leq(y, x)) or x == y)
            and (not (leq(x, y) and leq(y, z)) or leq(x, z))
            and (not leq(x, y) or leq(add(x, z), add(y, z)))
        )
        results["L1"].record(ok, lambda: f"x={enc(x)} y={enc(y)} z={enc(z)}")

    for case in range(cases):
        rng = case_rng(seed, "L2", case)
        s = sample_sequence(inst, sampler, rng)
        c = sampler(rng)
        sup = inst.sup(s)
        terms = _probe_terms(s)
        upper = all(leq(t, sup) for t in terms)
        least = not all(leq(t, c) for t in terms) or leq(sup, c)
        monotone = all(leq(a, b) for a, b in zip(terms, terms[1:]))
        results["L2"].record(
            upper and least and monotone,
            lambda: f"seq={s.label} sup={enc(sup)} competitor={enc(c)}",
        )

    for case in range(cases):
        rng = case_rng(seed, "L3", case)
        x = sampler(rng)
        b = inst.basis(x)
        head = [b(n) for n in range(1, 18)]
        rapid = all(wb(p, q) for p, q in zip(head, head[1:]))
        sup_ok = eq(inst.sup(b), x)
        # soundness of way_below: x << y and sup(s) >= y force some term >= x
        y = sampler(rng) if rng.random() < 0.5 else x
        s = sample_sequence(inst, sampler, rng) if rng.random() < 0.5 else inst.basis(y)
        sound = True
        if wb(x, y) and leq(y, inst.sup(s)):
            sound = any(leq(x, t) for t in _probe_terms(s))
        results["L3"].record(
            rapid and sup_ok and sound,
            lambda: f"x={enc(x)} y={enc(y)} seq={s.label}",
        )

    for case in range(cases):
        rng = case_rng(seed, "L4", case)
        s = sample_sequence(inst, sampler, rng)
        t = sample_sequence(inst, sampler, rng)
        lhs = inst.sup(inst.add_sequences(s, t))
        rhs = add(inst.sup(s), inst.sup(t))
        results["L4"].record(eq(lhs, rhs), lambda: f"s={s.label} t={t.label}")

    for case in range(cases):
        rng = case_rng(seed, "L5", case)
        x1, y1, x2, y2 = (sampler(rng) for _ in range(4))
        if rng.random() < 0.5:
            # bias toward pairs where the hypothesis holds
            y1, y2 = add(x1, y1), add(x2, y2)
        ok = not (wb(x1, y1) and wb(x2, y2)) or wb(add(x1, x2), add(y1, y2))
        results["L5"].record(
            ok, lambda: f"x1={enc(x1)} y1={enc(y1)} x2={enc(x2)} y2={enc(y2)}"
        )

    for case in range(cases):
        rng = case_rng(seed, "L6", case)
        x, y, z = sampler(rng), sampler(rng), sampler(rng)
        ok = (not (leq(x, y) and wb(y, z)) or wb(x, z)) and (
            not (wb(x, y) and leq(y, z)) or leq(x, z)
        )
        results["L6"].record(ok, lambda: f"x={enc(x)} y={enc(y)} z={enc(z)}")

    return [results[law] for law in LAWS]


def extnat_sampler(rng: random.Random, bound: int = 20, inf_rate: float = 0.2):
    if rng.random() < inf_rate:
        return INF
    return rng.randint(0, bound)


def first_failures(report: Sequence[LawResult]) -> list:
    return [r.law for r in report if not r.passed]
