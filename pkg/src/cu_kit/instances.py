"""Concrete Cu-objects and the multiplicity morphisms between them."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

from .core import (
    INF,
    CuInstance,
    IncreasingSequence,
    LawResult,
    UncertifiedSequence,
    case_rng,
    decode_extnat,
    encode_extnat,
    extnat_add,
    extnat_instance,
    extnat_sampler,
    sample_sequence,
)

# --- ExtNatVector -----------------------------------------------------------

Vector = Tuple


def vec_add(a, b):
    # float inf saturates under +, so this is extnat_add coordinatewise
    return tuple([x + y for x, y in zip(a, b)])


def vec_leq(a, b) -> bool:
    return all(x <= y for x, y in zip(a, b))


def vec_way_below(a, b) -> bool:
    for x, y in zip(a, b):
        if x == INF or x > y:
            return False
    return True


def vec_is_finite(a) -> bool:
    return all(x != INF for x in a)


def encode_vector(v) -> str:
    return ",".join(encode_extnat(x) for x in v)


def decode_vector(text: str, dim: Optional[int] = None) -> tuple:
    v = tuple(decode_extnat(t) for t in text.split(","))
    if dim is not None and len(v) != dim:
        raise ValueError(f"expected a vector of length {dim}, got {text!r}")
    return v


def vec_basis(x) -> IncreasingSequence:
    finite = [c for c in x if c != INF]
    stab = (max(finite) + 1) if finite else None
    unbounded = tuple(c == INF for c in x)

    def term(n):
        return tuple(n if c == INF else min(n - 1, c) for c in x)

    def seek(t):
        k = 1
        for c, u in zip(x, t):
            if u == INF or (c != INF and u > c):
                return None
            k = max(k, u if c == INF else u + 1)
        return k

    return IncreasingSequence(
        term, stabilization_index=stab, unbounded=unbounded, label=f"basis({encode_vector(x)})",
        seek=seek,
    )


def vec_probe(x, depth: int):
    return tuple(depth if c == INF else c for c in x)


def make_vec_sup(k: int):
    def vec_sup(s: IncreasingSequence):
        flags = s.unbounded if isinstance(s.unbounded, tuple) else (bool(s.unbounded),) * k
        if s.limit is not None:
            return s.limit
        if not any(flags) and s.stabilization_index is None:
            raise UncertifiedSequence("vector sequence without certificate")
        if s.stabilization_index is None:
            if not all(flags):
                raise UncertifiedSequence("bounded coordinates need a stabilization index")
            return (INF,) * k
        stable = s(s.stabilization_index)
        return tuple(INF if f else c for f, c in zip(flags, stable))

    return vec_sup


def product_instance(k: int) -> CuInstance:
    if k < 1:
        raise ValueError("dimension must be >= 1")
    return CuInstance(
        name=f"extnat^{k}",
        zero=(0,) * k,
        add=vec_add,
        leq=vec_leq,
        way_below=vec_way_below,
        sup=make_vec_sup(k),
        basis=vec_basis,
        encode=encode_vector,
        probe=vec_probe,
        dim=k,
    )


def vector_sampler(k: int, bound: int = 12, inf_rate: float = 0.15):
    def sample(rng: random.Random):
        return tuple(extnat_sampler(rng, bound, inf_rate) for _ in range(k))

    return sample


# --- ExtNonnegRational ------------------------------------------------------

def rat_add(a, b):
    if a == INF or b == INF:
        return INF
    return a + b


def rat_way_below(a, b) -> bool:
    return a == 0 or (a != INF and a < b)


def encode_rational(x) -> str:
    if x == INF:
        return "inf"
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def decode_rational(text: str):
    text = text.strip().lower()
    return INF if text == "inf" else Fraction(text)


def rat_basis(x) -> IncreasingSequence:
    if x == INF:
        return IncreasingSequence(lambda n: Fraction(n), unbounded=True, label="basis(inf)")
    q = Fraction(x)
    if q == 0:
        return IncreasingSequence(lambda n: Fraction(0), stabilization_index=1, label="basis(0)")
    return IncreasingSequence(
        lambda n: q * (1 - Fraction(1, 2 ** n)), limit=q, label=f"basis({encode_rational(q)})"
    )


def rat_sup(s: IncreasingSequence):
    if s.unbounded is True:
        return INF
    if s.limit is not None:
        return s.limit
    if s.stabilization_index is None:
        raise UncertifiedSequence("rational sequence without certificate")
    return s(s.stabilization_index)


def extrational_instance() -> CuInstance:
    return CuInstance(
        name="extrational",
        zero=Fraction(0),
        add=rat_add,
        leq=lambda a, b: a <= b,
        way_below=rat_way_below,
        sup=rat_sup,
        basis=rat_basis,
        encode=encode_rational,
    )


def rational_sampler(rng: random.Random, inf_rate: float = 0.15):
    if rng.random() < inf_rate:
        return INF
    if rng.random() < 0.15:
        return Fraction(0)
    return Fraction(rng.randint(0, 40), rng.randint(1, 12))


# --- negative controls --------------------------------------------------------

def leq_as_way_below_instance() -> CuInstance:
    """ExtNat with << replaced by <=; claims Inf << Inf."""
    base = extnat_instance()
    return CuInstance(
        name="extnat[wb=leq]",
        zero=base.zero,
        add=base.add,
        leq=base.leq,
        way_below=base.leq,
        sup=base.sup,
        basis=base.basis,
        encode=base.encode,
    )


def nonstrict_rational_instance() -> CuInstance:
    """ExtNonnegRational with the ExtNat rule for <<; claims q << q."""
    base = extrational_instance()
    return CuInstance(
        name="extrational[wb=finite-leq]",
        zero=base.zero,
        add=base.add,
        leq=base.leq,
        way_below=lambda a, b: a != INF and a <= b,
        sup=base.sup,
        basis=base.basis,
        encode=base.encode,
    )


def instance_by_name(name: str) -> CuInstance:
    name = name.strip().lower()
    if name == "extnat":
        return extnat_instance()
    if name in ("extrational", "extnonnegrational"):
        return extrational_instance()
    if name.startswith("extnat^"):
        try:
            k = int(name.split("^", 1)[1])
        except ValueError:
            raise KeyError(name) from None
        if k < 1:
            raise KeyError(name)
        return product_instance(k)
    raise KeyError(name)


def sampler_for(inst: CuInstance):
    if inst.name.startswith("extrational"):
        return rational_sampler
    if inst.dim is not None:
        return vector_sampler(inst.dim)
    return extnat_sampler


# --- multiplicity maps --------------------------------------------------------

def _mul(m: int, x):
    # 0 * Inf = 0, m * Inf = Inf for m >= 1
    if m == 0:
        return 0
    return INF if x == INF else m * x


@dataclass(frozen=True)
class MatrixCuMap:
    matrix: tuple  # rows of nonnegative ints, shape (k_out, k_in)

    def __post_init__(self):
        rows = tuple(tuple(int(e) for e in row) for row in self.matrix)
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("matrix must be a non-empty rectangular array")
        if any(e < 0 for r in rows for e in r):
            raise ValueError("multiplicities must be nonnegative")
        object.__setattr__(self, "matrix", rows)
        object.__setattr__(self, "_memo", {})

    @property
    def k_out(self) -> int:
        return len(self.matrix)

    @property
    def k_in(self) -> int:
        return len(self.matrix[0])

    def __call__(self, v):
        if type(v) is not tuple:
            return apply_map(self, v)
        memo = self._memo
        r = memo.get(v)
        if r is None:
            r = apply_map(self, v)
            if len(memo) < 1 << 16:
                memo[v] = r
        return r

    def compose(self, first: "MatrixCuMap") -> "MatrixCuMap":
        """``self . first`` (apply ``first``, then ``self``)."""
        if self.k_in != first.k_out:
            raise ValueError("shape mismatch in composition")
        b = first.matrix
        return MatrixCuMap(
            tuple(
                tuple(sum(row[t] * b[t][j] for t in range(first.k_out)) for j in range(first.k_in))
                for row in self.matrix
            )
        )

    def image_flags(self, flags: tuple) -> tuple:
        return tuple(any(m and f for m, f in zip(row, flags)) for row in self.matrix)


def apply_map(m: MatrixCuMap, v) -> tuple:
    if len(v) != m.k_in:
        raise ValueError(f"dimension mismatch: map expects {m.k_in}, got {len(v)}")
    out = []
    for row in m.matrix:
        acc = 0
        for e, x in zip(row, v):
            if e:
                if x == INF:
                    acc = INF
                    break
                acc += e * x
        out.append(acc)
    return tuple(out)


def identity_map(k: int) -> MatrixCuMap:
    return MatrixCuMap(tuple(tuple(int(i == j) for j in range(k)) for i in range(k)))


MORPHISM_LAWS = ("zero", "additivity", "order", "way_below", "sup")


def check_morphism(m, sampler, cases: int = 500, seed: int = 0) -> list:
    """Preservation of zero, +, <=, << and certified sups by ``m``.

    ``m`` is a MatrixCuMap or any callable with ``k_in``/``k_out`` and
    ``image_flags`` (negative-control maps use this).
    """
    src = product_instance(m.k_in)
    dst = product_instance(m.k_out)
    enc = src.encode
    res = {name: LawResult(name) for name in MORPHISM_LAWS}
    for case in range(cases):
        rng = case_rng(seed, "morphism", case)
        x, y = sampler(rng), sampler(rng)
        if rng.random() < 0.5:
            y = vec_add(x, y)
        res["zero"].record(m(src.zero) == dst.zero, lambda: "zero")
        res["additivity"].record(
            m(vec_add(x, y)) == vec_add(m(x), m(y)), lambda: f"x={enc(x)} y={enc(y)}"
        )
        res["order"].record(
            not vec_leq(x, y) or vec_leq(m(x), m(y)), lambda: f"x={enc(x)} y={enc(y)}"
        )
        res["way_below"].record(
            not vec_way_below(x, y) or vec_way_below(m(x), m(y)),
            lambda: f"x={enc(x)} y={enc(y)}",
        )
        s = sample_sequence(src, sampler, rng)
        # with no stabilization index every source coordinate is unbounded,
        # so the bounded image coordinates are constantly zero
        img = IncreasingSequence(
            lambda n: m(s(n)),
            stabilization_index=s.stabilization_index or 1,
            unbounded=m.image_flags(
                s.unbounded if isinstance(s.unbounded, tuple) else (bool(s.unbounded),) * m.k_in
            ),
        )
        res["sup"].record(dst.sup(img) == m(src.sup(s)), lambda: f"seq={s.label}")
    return [res[k] for k in MORPHISM_LAWS]


@dataclass(frozen=True)
class ZeroTimesInfBroken(MatrixCuMap):
    """Negative control: uses m * Inf = 0 for every m."""

    def __call__(self, v):
        out = []
        for row in self.matrix:
            acc = 0
            for e, x in zip(row, v):
                acc = extnat_add(acc, 0 if x == INF else e * x)
            out.append(acc)
        return tuple(out)


def random_matrix_map(rng: random.Random, max_dim: int = 4, max_entry: int = 5) -> MatrixCuMap:
    k_out, k_in = rng.randint(1, max_dim), rng.randint(1, max_dim)
    return MatrixCuMap(
        tuple(tuple(rng.randint(0, max_entry) for _ in range(k_in)) for _ in range(k_out))
    )
