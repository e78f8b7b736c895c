"""Finite-dimensional ground truth: positive elements of a direct sum of
matrix algebras, ``(a - eps)_+`` cuts, rank vectors and explicit witnesses
``c`` with ``c b c* = (a - eps)_+``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import LawResult, case_rng
from .instances import product_instance

RANK_TOL = 1e-8
RESIDUAL_TOL = 1e-6
PSD_TOL = -1e-10


class NumericalInstability(ArithmeticError):
    def __init__(self, msg, ranks=None):
        super().__init__(msg)
        self.ranks = ranks


class WitnessError(ValueError):
    pass


@dataclass(frozen=True)
class FiniteDimAlgebra:
    block_sizes: tuple

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.block_sizes)
        if not sizes or any(n < 1 for n in sizes):
            raise ValueError("block sizes must be a non-empty list of positive integers")
        object.__setattr__(self, "block_sizes", sizes)


class PositiveElement:
    """Block-diagonal positive semidefinite element; immutable by convention."""

    __slots__ = ("algebra", "blocks")

    def __init__(self, blocks: Sequence, algebra: Optional[FiniteDimAlgebra] = None):
        mats = []
        for k, b in enumerate(blocks):
            m = np.array(b, dtype=complex)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError(f"block {k} is not square")
            if np.abs(m - m.conj().T).max(initial=0.0) > 1e-6 * max(1.0, np.abs(m).max(initial=0.0)):
                raise ValueError(f"block {k} is not Hermitian")
            m = (m + m.conj().T) / 2
            if m.size and np.linalg.eigvalsh(m).min() < PSD_TOL * max(1.0, np.abs(m).max()):
                raise ValueError(f"block {k} is not positive semidefinite")
            m.setflags(write=False)
            mats.append(m)
        sizes = tuple(m.shape[0] for m in mats)
        if algebra is not None and algebra.block_sizes != sizes:
            raise ValueError(f"blocks {sizes} do not match the algebra {algebra.block_sizes}")
        self.algebra = algebra or FiniteDimAlgebra(sizes)
        self.blocks = tuple(mats)

    def __repr__(self):
        return f"PositiveElement(block_sizes={self.algebra.block_sizes})"

    def spectra(self) -> list:
        return [np.linalg.eigvalsh(b) for b in self.blocks]


def zero_element(alg: FiniteDimAlgebra) -> PositiveElement:
    return PositiveElement([np.zeros((n, n)) for n in alg.block_sizes], alg)


def diag_element(*diagonals) -> PositiveElement:
    return PositiveElement([np.diag(np.asarray(d, dtype=float)) for d in diagonals])


def _spectral_map(m: np.ndarray, f) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    return (v * f(w)) @ v.conj().T


def eps_cut(a: PositiveElement, eps: float) -> PositiveElement:
    if eps <= 0:
        raise ValueError("eps must be positive")
    return PositiveElement(
        [_spectral_map(b, lambda w: np.maximum(w - eps, 0.0)) for b in a.blocks], a.algebra
    )


def rank_vector(a: PositiveElement, tol: float = RANK_TOL, strict: bool = True) -> tuple:
    """Per-block count of eigenvalues above ``tol``.

    Raises NumericalInstability when an eigenvalue sits in ``(tol/10, 10 tol)``
    (unless ``strict`` is false).
    """
    ranks = []
    unstable = False
    for w in a.spectra():
        ranks.append(int((w > tol).sum()))
        if ((w > tol / 10) & (w < tol * 10)).any():
            unstable = True
    ranks = tuple(ranks)
    if unstable and strict:
        raise NumericalInstability(f"eigenvalue within a decade of tol={tol}", ranks)
    return ranks


def cuntz_subeq(a: PositiveElement, b: PositiveElement, tol: float = RANK_TOL) -> bool:
    if a.algebra != b.algebra:
        raise ValueError("elements live in different algebras")
    ra, rb = rank_vector(a, tol), rank_vector(b, tol)
    return all(x <= y for x, y in zip(ra, rb))


@dataclass(frozen=True)
class Witness:
    c: tuple  # blocks
    residual: float

    @property
    def certified(self) -> bool:
        return self.residual <= RESIDUAL_TOL


def apply_witness(c: Sequence[np.ndarray], b: PositiveElement) -> list:
    return [ck @ bk @ ck.conj().T for ck, bk in zip(c, b.blocks)]


def residual(c: Sequence[np.ndarray], b: PositiveElement, target: PositiveElement) -> float:
    """Operator-norm distance between ``c b c*`` and ``target``, maximized over blocks."""
    out = 0.0
    for x, t in zip(apply_witness(c, b), target.blocks):
        if x.size:
            out = max(out, float(np.linalg.norm(x - t, 2)))
    return out


def witness_construct(a: PositiveElement, b: PositiveElement, eps: float, tol: float = RANK_TOL) -> Witness:
    """``c = (a-eps)_+^{1/2} u (b^+)^{1/2}`` blockwise, ``u`` carrying the
    leading eigenvectors of ``b`` onto the support of ``(a-eps)_+``."""
    if a.algebra != b.algebra:
        raise ValueError("elements live in different algebras")
    cut = eps_cut(a, eps)
    cs = []
    for k, (ak, bk) in enumerate(zip(cut.blocks, b.blocks)):
        wa, va = np.linalg.eigh(ak)
        wb, vb = np.linalg.eigh(bk)
        sa = np.argsort(wa)[::-1]
        sb = np.argsort(wb)[::-1]
        wa, va, wb, vb = wa[sa], va[:, sa], wb[sb], vb[:, sb]
        ra, rb = int((wa > tol).sum()), int((wb > tol).sum())
        if ra > rb:
            raise WitnessError(f"block {k}: rank of (a-eps)_+ is {ra} but rank of b is {rb}")
        n = ak.shape[0]
        u = va[:, :ra] @ vb[:, :ra].conj().T
        a_half = (va[:, :ra] * np.sqrt(wa[:ra])) @ va[:, :ra].conj().T
        b_pinv_half = (vb[:, :rb] / np.sqrt(wb[:rb])) @ vb[:, :rb].conj().T
        cs.append(a_half @ u @ b_pinv_half if n else np.zeros((0, 0)))
    return Witness(tuple(cs), residual(cs, b, cut))


def direct_sum(a: PositiveElement, b: PositiveElement) -> PositiveElement:
    """``a ⊕ b`` in the algebra with every block size doubled."""
    if a.algebra != b.algebra:
        raise ValueError("elements live in different algebras")
    blocks = []
    for x, y in zip(a.blocks, b.blocks):
        n = x.shape[0]
        m = np.zeros((2 * n, 2 * n), dtype=complex)
        m[:n, :n], m[n:, n:] = x, y
        blocks.append(m)
    return PositiveElement(blocks)


# --- sampling -------------------------------------------------------------------

def random_positive(alg: FiniteDimAlgebra, rng: np.random.Generator, truncate: bool = True) -> PositiveElement:
    """``g g*`` for complex Gaussian ``g``; optionally rank-truncated by
    giving ``g`` fewer columns."""
    blocks = []
    for n in alg.block_sizes:
        r = int(rng.integers(0, n + 1)) if truncate else n
        g = (rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))) / np.sqrt(2)
        blocks.append(g @ g.conj().T)
    return PositiveElement(blocks, alg)


def random_algebra(rng: np.random.Generator, max_blocks: int = 2, max_size: int = 4) -> FiniteDimAlgebra:
    k = int(rng.integers(1, max_blocks + 1))
    return FiniteDimAlgebra(tuple(int(rng.integers(1, max_size + 1)) for _ in range(k)))


def np_rng(seed: int, tag: str, case: int) -> np.random.Generator:
    return np.random.default_rng(case_rng(seed, tag, case).getrandbits(64))


def falsification_probe(a: PositiveElement, b: PositiveElement, eps: float, candidates: int,
                        rng: np.random.Generator, threshold: float = 1e-3) -> float:
    """Lower bound on the smallest residual ``|c b c* - (a-eps)_+|`` over
    random candidates ``c``, exact for the candidates nearest to a fit.

    Also tries the best rank-limited approximant (the witness built against
    the truncation of ``(a-eps)_+`` to rank ``b``).  A result above
    ``threshold`` therefore proves that no candidate reached it.
    """
    cut = eps_cut(a, eps)
    best = np.inf
    per_block = []
    for ak, bk in zip(cut.blocks, b.blocks):
        n = ak.shape[0]
        g = (rng.standard_normal((candidates, n, n)) + 1j * rng.standard_normal((candidates, n, n)))
        g *= rng.exponential(1.0, (candidates, 1, 1))
        diff = g @ bk @ np.conj(np.transpose(g, (0, 2, 1))) - ak
        # Hermitian residuals: the operator norm is the largest |eigenvalue|;
        # |X|_F / sqrt(n) <= |X|_2 screens out hopeless candidates first
        lower = np.sqrt((np.abs(diff) ** 2).sum(axis=(1, 2)) / max(n, 1))
        norms = lower.copy()
        near = np.flatnonzero(lower <= max(threshold, np.sort(lower)[: 32][-1]))
        if near.size:
            norms[near] = np.abs(np.linalg.eigvalsh(diff[near])).max(axis=1)
        per_block.append(norms)
    best = float(np.max(np.stack(per_block), axis=0).min())
    # the optimal rank-limited candidate
    trunc = []
    for ak, bk in zip(cut.blocks, b.blocks):
        wa, va = np.linalg.eigh(ak)
        r = int((np.linalg.eigvalsh(bk) > RANK_TOL).sum())
        order = np.argsort(wa)[::-1]
        keep = order[:r]
        trunc.append((va[:, keep] * wa[keep]) @ va[:, keep].conj().T)
    t = PositiveElement(trunc)
    w = witness_construct(t, b, 1e-300) if _fits(t, b) else None
    if w is not None:
        best = min(best, residual(w.c, b, cut))
    return best


def _fits(t: PositiveElement, b: PositiveElement) -> bool:
    try:
        return cuntz_subeq(t, b)
    except NumericalInstability:
        return False


def eckart_young_bound(a: PositiveElement, b: PositiveElement, eps: float) -> float:
    """Lower bound on ``|c b c* - (a-eps)_+|`` over all ``c``: the largest
    eigenvalue of the cut beyond the rank of ``b``, per block."""
    cut = eps_cut(a, eps)
    out = 0.0
    for ak, bk in zip(cut.blocks, b.blocks):
        r = int((np.linalg.eigvalsh(bk) > RANK_TOL).sum())
        w = np.sort(np.linalg.eigvalsh(ak))[::-1]
        if r < len(w):
            out = max(out, float(w[r]))
    return out


# --- checks ----------------------------------------------------------------------

class OracleResult(LawResult):
    def __init__(self, law: str):
        super().__init__(law)
        self.unstable = 0

    def to_json(self) -> dict:
        out = super().to_json()
        out["unstable"] = self.unstable
        return out


def class_addition_check(samples: int = 100, tol: float = RANK_TOL, seed: int = 0) -> list:
    res = OracleResult("class-addition")
    for case in range(samples):
        rng = np_rng(seed, "addition", case)
        alg = random_algebra(rng)
        a, b = random_positive(alg, rng), random_positive(alg, rng)
        try:
            lhs = rank_vector(direct_sum(a, b), tol)
            rhs = tuple(x + y for x, y in zip(rank_vector(a, tol), rank_vector(b, tol)))
        except NumericalInstability:
            res.unstable += 1
            continue
        res.record(lhs == rhs, lambda: f"case={case} {lhs} != {rhs}")
    return [res]


def oracle_agreement_check(samples: int = 500, seed: int = 0, max_size: int = 4,
                           probe_candidates: int = 10_000, probe_every: int = 1,
                           pairs: Optional[list] = None) -> list:
    """Rank order vs ExtNatVector order, witness soundness and the falsification probe."""
    agree = OracleResult("rank-order-agreement")
    wit = OracleResult("witness-residual")
    probe = OracleResult("falsification-probe")
    n = len(pairs) if pairs is not None else samples
    for case in range(n):
        rng = np_rng(seed, "agreement", case)
        if pairs is not None:
            a, b = pairs[case]
        else:
            alg = random_algebra(rng, max_size=max_size)
            a, b = random_positive(alg, rng), random_positive(alg, rng)
        inst = product_instance(len(a.algebra.block_sizes))
        try:
            ra, rb = rank_vector(a), rank_vector(b)
            sub = cuntz_subeq(a, b)
        except NumericalInstability:
            agree.unstable += 1
            wit.unstable += 1
            probe.unstable += 1
            continue
        agree.record(sub == inst.leq(ra, rb), lambda: f"case={case} ranks {ra} vs {rb}")
        pos = [w[w > RANK_TOL] for w in a.spectra()]
        smallest = min((float(p.min()) for p in pos if p.size), default=1.0)
        eps = smallest / 2
        cut_ranks = rank_vector(eps_cut(a, eps), strict=False)
        if inst.leq(cut_ranks, rb):
            try:
                w = witness_construct(a, b, eps)
                ok = w.certified
                detail = f"residual={w.residual:.3g}"
            except WitnessError as e:
                ok, detail = False, str(e)
            wit.record(ok, lambda: f"case={case} {detail}")
        if not sub and case % probe_every == 0:
            best = falsification_probe(a, b, eps, probe_candidates, rng)
            probe.record(best > 1e-3, lambda: f"case={case} residual={best:.3g}")
    return [agree, wit, probe]


def eps_cut_checks(samples: int = 100, seed: int = 0, delta: float = 0.5) -> list:
    ident = OracleResult("eps-cut-composition")
    mono = OracleResult("eps-cut-monotone")
    rank = OracleResult("eps-cut-rank")
    for case in range(samples):
        rng = np_rng(seed, "epscut", case)
        alg = random_algebra(rng)
        a = random_positive(alg, rng)
        e1, e2 = float(rng.uniform(0.01, 1.0)), float(rng.uniform(0.01, 1.0))
        lhs, rhs = eps_cut(eps_cut(a, e1), e2), eps_cut(a, e1 + e2)
        err = max((float(np.abs(x - y).max(initial=0.0)) for x, y in zip(lhs.blocks, rhs.blocks)), default=0.0)
        ident.record(err <= 1e-9, lambda: f"case={case} err={err:.3g}")
        b = PositiveElement([x + y for x, y in zip(a.blocks, random_positive(alg, rng).blocks)], alg)
        try:
            ra = rank_vector(eps_cut(a, e1 * (1 + delta)))
            rb = rank_vector(eps_cut(b, e1))
            r0 = rank_vector(a)
            rc = rank_vector(eps_cut(a, e1))
        except NumericalInstability:
            mono.unstable += 1
            rank.unstable += 1
            continue
        mono.record(all(x <= y for x, y in zip(ra, rb)), lambda: f"case={case} {ra} vs {rb}")
        rank.record(all(x <= y for x, y in zip(rc, r0)), lambda: f"case={case} {rc} vs {r0}")
    return [ident, mono, rank]


# --- serialization ------------------------------------------------------------------

def element_to_json(a: PositiveElement) -> dict:
    return {
        "block_sizes": list(a.algebra.block_sizes),
        "blocks": [[[float(z.real), float(z.imag)] for z in b.reshape(-1)] for b in a.blocks],
    }


def element_from_json(doc: dict) -> PositiveElement:
    if not isinstance(doc, dict) or "block_sizes" not in doc or "blocks" not in doc:
        raise ValueError("positive element needs 'block_sizes' and 'blocks'")
    alg = FiniteDimAlgebra(tuple(doc["block_sizes"]))
    if len(doc["blocks"]) != len(alg.block_sizes):
        raise ValueError("number of blocks does not match block_sizes")
    blocks = []
    for n, flat in zip(alg.block_sizes, doc["blocks"]):
        if len(flat) != n * n or any(len(p) != 2 for p in flat):
            raise ValueError(f"block of size {n} needs {n * n} [re, im] pairs")
        blocks.append(np.array([complex(re, im) for re, im in flat]).reshape(n, n))
    return PositiveElement(blocks, alg)


def load_pairs(text: str) -> list:
    doc = json.loads(text)
    if not isinstance(doc, dict) or not isinstance(doc.get("pairs"), list):
        raise ValueError("fixture must be an object with a 'pairs' list")
    return [(element_from_json(p[0]), element_from_json(p[1])) for p in doc["pairs"]]
