"""Runners for the acceptance criteria; each returns a JSON-ready result.

Reports hold no timings or addresses, so reruns with the same seeds are
byte-identical.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import af, oracle
from .core import INF, LAWS, case_rng, check_laws, extnat_instance, report_json
from .instances import (
    check_morphism,
    extrational_instance,
    leq_as_way_below_instance,
    nonstrict_rational_instance,
    product_instance,
    random_matrix_map,
    sampler_for,
    vector_sampler,
)
from .limit import thread_calculus_check, thread_is_compact, thread_leq, universal_property_check

HORIZON = 40
CALCULUS_FIXTURES = ("uhf2", "uhf6", "fibonacci")


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    report: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"criterion {self.number} [{'PASS' if self.passed else 'FAIL'}] {self.title}: {self.detail}"

    def to_json(self) -> dict:
        return {"criterion": self.number, "passed": self.passed, "detail": self.detail, "report": self.report}


def _failures(results) -> int:
    return sum(r.failures for r in results)


def _first(results):
    return next((f"{r.law}: {r.first_counterexample}" for r in results if r.failures), None)


def criterion_1(seed: int = 0) -> CriterionResult:
    report, ok, notes = {}, True, []
    for name, inst in (("extnat", extnat_instance()), ("extnat^2", product_instance(2)),
                       ("extnat^4", product_instance(4)), ("extrational", extrational_instance())):
        res = check_laws(inst, sampler_for(inst), 1000, seed)
        report[name] = report_json(res)
        if _failures(res):
            ok = False
            notes.append(f"{name} {_first(res)}")
    for name, inst, sampler, law in (
        ("leq-as-way-below", leq_as_way_below_instance(), sampler_for(extnat_instance()), "L3"),
        ("nonstrict-rational", nonstrict_rational_instance(), sampler_for(extrational_instance()), "L3"),
    ):
        res = check_laws(inst, sampler, 1000, seed)
        report[name] = report_json(res)
        failing = sorted(r.law for r in res if r.failures)
        if failing != [law]:
            ok = False
            notes.append(f"{name} fails {failing}, expected [{law}]")
    detail = "; ".join(notes) or f"{len(LAWS)} laws x 4 instances clean, both controls fail L3 only"
    return CriterionResult(1, "law suite", ok, detail, report)


def criterion_2(seed: int = 0, maps: int = 500, cases: int = 40) -> CriterionResult:
    total = {}
    first = None
    for k in range(maps):
        m = random_matrix_map(case_rng(seed, "maps", k))
        res = check_morphism(m, vector_sampler(m.k_in), cases, seed + k)
        for r in res:
            agg = total.setdefault(r.law, [0, 0])
            agg[0] += r.cases
            agg[1] += r.failures
            if r.failures and first is None:
                first = f"map {m.matrix} {r.law}: {r.first_counterexample}"
    fails = sum(v[1] for v in total.values())
    report = {law: {"cases": c, "failures": f} for law, (c, f) in sorted(total.items())}
    detail = first or f"{maps} maps, {sum(v[0] for v in total.values())} checks, 0 failures"
    return CriterionResult(2, "morphism laws", fails == 0, detail, report)


def criterion_3(seed: int = 0) -> CriterionResult:
    report, notes = {}, []
    for name in CALCULUS_FIXTURES:
        d = af.to_cu_diagram(af.load_fixture(name))
        res = thread_calculus_check(d, af.sample_class, 200, 200, 100, seed, HORIZON)
        report[name] = report_json(res)
        if _failures(res):
            notes.append(f"{name} {_first(res)}")
    detail = "; ".join(notes) or "reflexivity, transitivity, additivity, sup additivity, rapid equivalence clean"
    return CriterionResult(3, "thread calculus", not notes, detail, report)


def criterion_4(seed: int = 0) -> CriterionResult:
    report, notes = {}, []
    cases = (
        ("uhf2->extrational", af.load_fixture("uhf2"), extrational_instance(), af.uhf2_rational_cone),
        ("identity->extnat", af.identity_diagram(), extnat_instance(), af.identity_extnat_cone),
    )
    for name, b, target, cone in cases:
        res = universal_property_check(af.to_cu_diagram(b), target, cone, af.stage_element_sampler,
                                       af.sample_class, 100, 100, seed, HORIZON)
        report[name] = report_json(res)
        if _failures(res):
            notes.append(f"{name} {_first(res)}")
    detail = "; ".join(notes) or "commutativity and induced-map laws clean"
    return CriterionResult(4, "universal property", not notes, detail, report)


def criterion_5(seed: int = 0) -> CriterionResult:
    report, notes = {}, []
    for name in af.FIXTURE_NAMES:
        b = af.load_fixture(name)
        d = af.to_cu_diagram(b)
        pairs = af.sample_pairs(d, 200, seed, af.sample_compact_class, "inclusion")
        res = af.order_equals_inclusion_check(b, pairs, HORIZON)
        report[name] = report_json(res)
        r = res[0]
        if r.failures or r.unknown_rate > 0.05:
            notes.append(f"{name} failures={r.failures} unknown={r.unknown}")
    detail = "; ".join(notes) or "no disagreements, Unknown <= 5% on every fixture"
    return CriterionResult(5, "order equals inclusion", not notes, detail, report)


def criterion_6(seed: int = 0, classes: int = 100, pairs: int = 200, count: int = 5) -> CriterionResult:
    report, notes = {}, []
    for name in af.FIXTURE_NAMES:
        b = af.load_fixture(name)
        d = af.to_cu_diagram(b)
        rec = af.CheckResult("compacts-below")
        for case in range(classes):
            a = af.sample_class(d, case_rng(seed, "compacts", case))
            try:
                terms = af.compacts_below(b, a, count, HORIZON)
            except af.CompactsUnresolved as e:
                rec.record(False, lambda: f"a={a!r} sup {e.verdict.value.value}")
                continue
            ok = all(thread_is_compact(t, HORIZON).le and thread_leq(t, a, HORIZON).le for t in terms)
            ok = ok and all(thread_leq(x, y, HORIZON).le for x, y in zip(terms, terms[1:]))
            rec.record(ok, lambda: f"a={a!r} terms={terms!r}")
        inter = af.compact_interpolation_check(
            b, af.sample_pairs(d, pairs, seed, af.sample_class, "interpolation"), HORIZON
        )[0]
        report[name] = report_json([rec, inter])
        if rec.failures:
            notes.append(f"{name} compacts {rec.first_counterexample}")
        if inter.failures or inter.unknown_rate > 0.05:
            notes.append(f"{name} interpolation failures={inter.failures} unknown={inter.unknown}")
    detail = "; ".join(notes) or "sups of compacts certified; interpolation biconditional, Unknown <= 5%"
    return CriterionResult(6, "compacts and interpolation", not notes, detail, report)


def criterion_7(seed: int = 0, samples: int = 500) -> CriterionResult:
    res = oracle.oracle_agreement_check(samples, seed)
    report = {"checks": report_json(res)}
    detail = _first(res) or (
        f"{samples} pairs: agreement on all stable samples, "
        f"{res[1].cases} witnesses certified, {res[2].cases} probes found no residual <= 1e-3"
    )
    return CriterionResult(7, "oracle agreement", not _failures(res), detail, report)


def criterion_8(seed: int = 0, samples: int = 200) -> CriterionResult:
    report, notes = {}, []
    for name in ("uhf2", "uhf6"):
        b = af.load_fixture(name)
        d = af.to_cu_diagram(b)
        rec = af.CheckResult("trace-monotone")
        for a, c in af.sample_pairs(d, samples, seed, af.sample_class, "trace"):
            v = thread_leq(a, c, HORIZON)
            if v.unknown:
                rec.unknown += 1
            if not v.le:
                continue
            ta, tc = af.perron_trace(b, a), af.perron_trace(b, c)
            exact = all(t == INF or isinstance(t, Fraction) for t in (ta, tc))
            ok = exact and (tc == INF or (ta != INF and ta <= tc))
            rec.record(ok, lambda: f"a={a!r} c={c!r} {af.format_value(ta)} > {af.format_value(tc)}")
        report[name] = report_json([rec])
        if rec.failures:
            notes.append(f"{name} {rec.first_counterexample}")
    detail = "; ".join(notes) or "trace(a) <= trace(b) on every certified LE pair (exact rationals)"
    return CriterionResult(8, "trace consistency", not notes, detail, report)


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8)


def canonical_json(results) -> str:
    return json.dumps([r.to_json() for r in results], sort_keys=True, separators=(",", ":"))


def _rerun(args):
    number, seed = args
    return CRITERIA[number - 1](seed)


def rerun_all(seed: int = 0, workers: Optional[int] = None) -> list:
    """Criteria 1-8 again; in fresh worker processes when several CPUs exist,
    so no cache is shared with the first run."""
    workers = workers or os.cpu_count() or 1
    jobs = [(n, seed) for n in range(1, len(CRITERIA) + 1)]
    if workers < 2:
        return [_rerun(j) for j in jobs]
    # the slow criteria first
    order = sorted(jobs, key=lambda j: (j[0] not in (3, 7), j[0]))
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        done = dict(zip(order, pool.map(_rerun, order)))
    return [done[j] for j in jobs]


def criterion_9(first_json: str, seed: int = 0, workers: Optional[int] = None) -> CriterionResult:
    again = canonical_json(rerun_all(seed, workers))
    same = again == first_json
    detail = f"rerun of criteria 1-8 {'is' if same else 'is NOT'} byte-identical ({len(again)} bytes)"
    return CriterionResult(9, "determinism", same, detail, {"bytes": len(again)})
