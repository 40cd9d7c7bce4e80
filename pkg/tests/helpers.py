"""Shared scenario/model builders and independent oracles for the tests.

The oracles here deliberately avoid the library's decision paths: global
search is plain itertools enumeration, rational rank is a fresh Gaussian
elimination, and LP answers are checked through duality certificates.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

import sheafkit as sk

HALF = Fraction(1, 2)


# ---------------------------------------------------------------------------
# Standard scenarios and models.


def triangle_scenario() -> sk.MeasurementScenario:
    return sk.build_scenario(
        [("x", 2), ("y", 2), ("z", 2)], [["x", "y"], ["y", "z"], ["z", "x"]]
    )


def bell_scenario() -> sk.MeasurementScenario:
    return sk.build_scenario(
        [("a1", 2), ("a2", 2), ("b1", 2), ("b2", 2)],
        [["a1", "b1"], ["a1", "b2"], ["a2", "b1"], ["a2", "b2"]],
    )


def pr_box_model() -> sk.EmpiricalModel:
    sc = bell_scenario()
    tables = {}
    for c in sc.cover:
        if set(c.members) == {"a2", "b2"}:
            tables[c.members] = {(0, 1): HALF, (1, 0): HALF}
        else:
            tables[c.members] = {(0, 0): HALF, (1, 1): HALF}
    return sk.build_model(sc, tables)


def triangle_anticorrelated_model() -> sk.EmpiricalModel:
    sc = triangle_scenario()
    return sk.build_model(
        sc, {c.members: {(0, 1): HALF, (1, 0): HALF} for c in sc.cover}
    )


def deterministic_model(assignment: dict[str, int] | None = None) -> sk.EmpiricalModel:
    sc = bell_scenario()
    g = assignment or {"a1": 0, "a2": 1, "b1": 0, "b2": 1}
    tables = {
        c.members: {tuple(g[m] for m in c.members): Fraction(1)} for c in sc.cover
    }
    return sk.build_model(sc, tables)


# ---------------------------------------------------------------------------
# Random generators (seeded by the caller).


def random_scenario(rng: random.Random, max_observables: int = 4) -> sk.MeasurementScenario:
    n = rng.randint(2, max_observables)
    ids = [f"o{i}" for i in range(n)]
    while True:
        k = rng.randint(1, min(4, n + 1))
        candidates = []
        for _ in range(k):
            size = rng.randint(1, n)
            candidates.append(tuple(sorted(rng.sample(ids, size))))
        # drop dominated candidates, keep one copy each
        maximal = [
            c
            for c in set(candidates)
            if not any(set(c) < set(d) for d in candidates)
        ]
        covered = {m for c in maximal for m in c}
        if covered == set(ids):
            return sk.build_scenario([(i, 2) for i in ids], maximal)


def random_global_model(
    rng: random.Random, scenario: sk.MeasurementScenario, sparse: bool = False
) -> sk.EmpiricalModel:
    """Project a random rational global distribution; noncontextual by build."""
    columns = list(sk.enumerate_globals(scenario))
    weights = [
        Fraction(0) if (sparse and rng.random() < 0.5) else Fraction(rng.randint(0, 8))
        for _ in columns
    ]
    if sum(weights) == 0:
        weights[rng.randrange(len(weights))] = Fraction(1)
    total = sum(weights)
    dist = {g: w / total for g, w in zip(columns, weights)}
    return sk.model_from_global_weights(scenario, dist)


def random_support_model(rng: random.Random, scenario: sk.MeasurementScenario) -> sk.SupportModel:
    """Rejection-sample possibilistically compatible supports."""
    while True:
        supports = {}
        for ctx in scenario.cover:
            sections = sk.enumerate_sections(ctx, scenario)
            chosen = [s for s in sections if rng.random() < 0.6]
            if not chosen:
                chosen = [rng.choice(sections)]
            supports[ctx] = frozenset(chosen)
        if _supports_compatible(scenario, supports):
            return sk.SupportModel(scenario, supports)


def _supports_compatible(scenario, supports) -> bool:
    for ca, cb in itertools.combinations(scenario.cover, 2):
        overlap = ca.intersect(cb)
        if not overlap.members:
            continue
        ra = {s.restrict(overlap) for s in supports[ca]}
        rb = {s.restrict(overlap) for s in supports[cb]}
        if ra != rb:
            return False
    return True


# ---------------------------------------------------------------------------
# Independent oracles.


def brute_force_globals(support_model: sk.SupportModel) -> list[dict[str, int]]:
    """All globally consistent assignments, by exhaustive enumeration."""
    scenario = support_model.scenario
    ids = scenario.observable_ids
    out = []
    for outs in itertools.product(*(range(scenario.arity(i)) for i in ids)):
        g = dict(zip(ids, outs))
        ok = True
        for ctx in scenario.cover:
            sec = sk.LocalSection(ctx.members, tuple(g[m] for m in ctx.members))
            if sec not in support_model.support(ctx):
                ok = False
                break
        if ok:
            out.append(g)
    return out


def brute_force_extends(support_model: sk.SupportModel, ctx_index: int,
                        section: sk.LocalSection) -> bool:
    scenario = support_model.scenario
    ctx = scenario.cover[ctx_index]
    target = dict(zip(section.members, section.outcomes))
    for g in brute_force_globals(support_model):
        if all(g[m] == target[m] for m in ctx.members):
            return True
    return False


def q_rank(rows: list[list[Fraction]]) -> int:
    """Rational rank by fresh Gaussian elimination."""
    m = [list(r) for r in rows]
    if not m:
        return 0
    rank, cols = 0, len(m[0])
    for c in range(cols):
        piv = next((i for i in range(rank, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = Fraction(1) / m[rank][c]
        m[rank] = [v * inv for v in m[rank]]
        for i in range(len(m)):
            if i != rank and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
        if rank == len(m):
            break
    return rank


def verify_fraction_certificate(model: sk.EmpiricalModel, report: sk.FractionReport) -> None:
    """Optimality of the fraction LP via exact weak-duality certificates."""
    incidence = report.incidence
    p = sk.gluing.probability_vector(model, incidence)
    n_rows, n_cols = len(incidence.rows), len(incidence.columns)
    # primal feasibility
    assert all(w >= 0 for w in report.weights)
    for r in range(n_rows):
        lhs = sum(incidence.entries[r][c] * report.weights[c] for c in range(n_cols))
        assert lhs <= p[r]
    assert sum(report.weights) == report.noncontextual_fraction
    # dual feasibility: y >= 0 and y.M >= 1 componentwise
    assert all(y >= 0 for y in report.dual)
    for c in range(n_cols):
        col = sum(report.dual[r] * incidence.entries[r][c] for r in range(n_rows))
        assert col >= 1
    # equal objectives close the duality gap
    dual_obj = sum(y * pi for y, pi in zip(report.dual, p))
    assert dual_obj == report.noncontextual_fraction


def verify_farkas_certificate(model: sk.EmpiricalModel, result: sk.NoncontextualityResult) -> None:
    """The separating vector proves incidence.x = p, x >= 0 infeasible."""
    assert result.separating is not None
    incidence = result.incidence
    p = sk.gluing.probability_vector(model, incidence)
    y = result.separating
    for c in range(len(incidence.columns)):
        col = sum(y[r] * incidence.entries[r][c] for r in range(len(incidence.rows)))
        assert col >= 0
    assert sum(yi * pi for yi, pi in zip(y, p)) < 0
