"""Left Perron functionals of nonnegative integer matrices.

A row vector ``lam >= 0`` with ``lam @ M == rho * lam`` gives an additive,
order-preserving functional ``v -> lam . v / rho**stage`` on the limit of a
stationary diagram ``v -> M v``.  Such functionals can refute comparisons
but never certify them.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .core import INF

# relative margin below which floating comparisons are not trusted
FLOAT_MARGIN = 1e-9


@dataclass(frozen=True)
class Functional:
    support: tuple  # coordinates where the eigenvector is positive
    weights: tuple  # Fractions when exact, floats otherwise; zero off support
    rho: object  # int/Fraction when exact, float otherwise
    exact: bool

    def evaluate(self, v, stage: int):
        """Value of the stage-``stage`` vector ``v``; INF if an Inf coordinate is weighted."""
        acc = Fraction(0) if self.exact else 0.0
        for w, x in zip(self.weights, v):
            if w == 0:
                continue
            if x == INF:
                return INF
            acc += w * x
        return acc / (self.rho ** stage)

    def exceeds(self, x, y) -> Optional[bool]:
        """Is ``x > y`` certain?  ``None`` when a float comparison is too close."""
        if x == INF:
            return y != INF
        if y == INF:
            return False
        if self.exact:
            return x > y
        scale = max(abs(x), abs(y), 1e-300)
        if abs(x - y) <= FLOAT_MARGIN * scale:
            return None
        return x > y


def _is_irreducible(m: np.ndarray) -> bool:
    k = m.shape[0]
    reach = (m > 0).astype(np.int64) + np.eye(k, dtype=np.int64)
    acc = np.linalg.matrix_power(reach, max(k - 1, 1))
    return bool((acc > 0).all())


def is_primitive(matrix: Sequence[Sequence[int]]) -> bool:
    m = np.asarray(matrix, dtype=np.int64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    k = m.shape[0]
    if not _is_irreducible(m):
        return False
    b = (m > 0).astype(np.int64)
    p = b.copy()
    for _ in range((k - 1) ** 2 + 1):
        if (p > 0).all():
            return True
        p = np.minimum(p @ b, 1)
    return bool((p > 0).all())


def _exact_nullvector(a: list) -> Optional[list]:
    """One nonzero vector in the null space of a square Fraction matrix, if any."""
    n = len(a)
    rows = [list(r) for r in a]
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, n) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(n):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    if len(free) != 1:
        return None
    f = free[0]
    vec = [Fraction(0)] * n
    vec[f] = Fraction(1)
    for i, c in enumerate(pivots):
        vec[c] = -rows[i][f]
    return vec


def perron_functional(matrix: Sequence[Sequence[int]]) -> Optional[Functional]:
    """Left Perron functional of an irreducible square matrix, normalized to sum 1."""
    m = np.asarray(matrix, dtype=np.int64)
    k = m.shape[0]
    if not _is_irreducible(m) or not (m.sum(axis=1) > 0).all():
        return None
    vals, vecs = np.linalg.eig(m.T.astype(float))
    idx = int(np.argmax(vals.real))
    rho_f = float(vals[idx].real)
    r = round(rho_f)
    if r >= 1 and abs(rho_f - r) < 1e-9:
        shifted = [
            [Fraction(int(m[j][i])) - (r if i == j else 0) for j in range(k)] for i in range(k)
        ]
        vec = _exact_nullvector(shifted)
        if vec is not None:
            if sum(vec) < 0:
                vec = [-x for x in vec]
            if all(x > 0 for x in vec):
                total = sum(vec)
                weights = tuple(x / total for x in vec)
                # exact verification of the eigen-equation
                for j in range(k):
                    lhs = sum(weights[i] * int(m[i][j]) for i in range(k))
                    if lhs != r * weights[j]:
                        break
                else:
                    return Functional(tuple(range(k)), weights, r, True)
    v = np.abs(vecs[:, idx].real)
    v = v / v.sum()
    if not (v > 0).all():
        return None
    return Functional(tuple(range(k)), tuple(float(x) for x in v), rho_f, False)


def closed_functionals(matrix: Sequence[Sequence[int]]) -> list:
    """Perron functionals of every predecessor-closed coordinate block.

    A set ``P`` is predecessor-closed when ``M[c][d] > 0`` and ``c in P``
    force ``d in P``; then ``(M v)|P`` depends on ``v|P`` only, and the
    Perron vector of ``M[P, P]`` extended by zero is a left eigenvector of
    ``M``.  Only irreducible blocks are used.
    """
    m = np.asarray(matrix, dtype=np.int64)
    k = m.shape[0]
    out = []
    for size in range(1, k + 1):
        for p in itertools.combinations(range(k), size):
            ps = set(p)
            if any(m[c][d] > 0 and d not in ps for c in p for d in range(k)):
                continue
            sub = m[np.ix_(p, p)]
            f = perron_functional(sub)
            if f is None:
                continue
            zero = Fraction(0) if f.exact else 0.0
            weights = [zero] * k
            for pos, c in enumerate(p):
                weights[c] = f.weights[pos]
            out.append(Functional(tuple(p), tuple(weights), f.rho, f.exact))
    return out
