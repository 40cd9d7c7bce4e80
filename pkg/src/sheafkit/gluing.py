"""Global sections and the contextuality hierarchy.

A support model is strongly contextual when no outcome assignment over all
observables restricts into every context's support, and logically contextual
when some supported section extends to no such assignment.  At the
probabilistic level a model is noncontextual when a distribution over global
assignments reproduces every table; the noncontextual fraction generalizes
this to the maximal explainable subdistribution, computed exactly by the
rational simplex solver.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Sequence, Union

from . import simplex
from .errors import IncompatibleModel, SizeLimitExceeded
from .presheaf import (
    EmpiricalModel,
    LocalSection,
    SupportModel,
    build_model,
    check_compatibility,
    enumerate_sections,
    support_of,
)
from .scenario import Context, MeasurementScenario

Number = Union[Fraction, float]

#: Default ceiling on the number of global assignments enumerated.
GLOBAL_LIMIT = 2**24
#: Default ceiling on backtracking nodes in sheaf_check.
NODE_BUDGET = 10**8


@dataclass(frozen=True)
class GlobalAssignment:
    """An outcome for every observable, in scenario order."""

    members: tuple[str, ...]
    outcomes: tuple[int, ...]

    def value_of(self, obs_id: str) -> int:
        return self.outcomes[self.members.index(obs_id)]

    def restrict(self, context: Context) -> LocalSection:
        by_id = dict(zip(self.members, self.outcomes))
        return LocalSection(context.members, tuple(by_id[m] for m in context.members))

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.members, self.outcomes))


def global_count(scenario: MeasurementScenario) -> int:
    n = 1
    for o in scenario.observables:
        n *= o.arity
    return n


def enumerate_globals(
    scenario: MeasurementScenario, limit: int = GLOBAL_LIMIT
) -> Iterator[GlobalAssignment]:
    """Yield all global assignments in lexicographic outcome order."""
    if global_count(scenario) > limit:
        raise SizeLimitExceeded(f"more than {limit} global assignments")
    ids = scenario.observable_ids
    ranges = [range(o.arity) for o in scenario.observables]
    for outs in itertools.product(*ranges):
        yield GlobalAssignment(ids, outs)


# ---------------------------------------------------------------------------
# Possibilistic level: sheaf condition on supports.


@dataclass(frozen=True)
class ContextualityVerdict:
    """Hierarchy verdict; ``noncontextual`` is None when undecided.

    ``sheaf_check`` alone cannot affirm probabilistic noncontextuality, so it
    leaves the field None unless logical contextuality already refutes it;
    :func:`classify_contextuality` fills it from the linear program.
    ``global_section_unique`` reports uniqueness of the gluing on supports
    (meaningful only when a global support section exists).
    """

    noncontextual: bool | None
    logically_contextual: bool
    strongly_contextual: bool
    nonextendable_section: tuple[int, LocalSection] | None
    global_support_section: GlobalAssignment | None
    global_section_unique: bool | None


class _Backtracker:
    """Depth-first assignment search with per-context forward pruning."""

    def __init__(self, support_model: SupportModel, node_budget: int) -> None:
        scenario = support_model.scenario
        self.scenario = scenario
        self.node_budget = node_budget
        self.nodes = 0
        degree = {oid: 0 for oid in scenario.observable_ids}
        for ctx in scenario.cover:
            for m in ctx.members:
                degree[m] += 1
        # Descending cover-degree maximizes early pruning; ties keep scenario
        # order so runs are reproducible.
        self.order = sorted(
            scenario.observable_ids, key=lambda o: (-degree[o], scenario.index(o))
        )
        self.contexts = [
            (ctx.members, [s.outcomes for s in sorted(support_model.support(ctx),
                                                      key=lambda s: s.outcomes)])
            for ctx in scenario.cover
        ]

    def _consistent(self, asg: dict[str, int]) -> bool:
        for members, tuples in self.contexts:
            positions = [(i, asg[m]) for i, m in enumerate(members) if m in asg]
            if not positions:
                continue
            if not any(all(t[i] == v for i, v in positions) for t in tuples):
                return False
        return True

    def search(self, fixed: Mapping[str, int], max_solutions: int) -> list[GlobalAssignment]:
        solutions: list[GlobalAssignment] = []
        asg = dict(fixed)
        todo = [o for o in self.order if o not in fixed]
        if not self._consistent(asg):
            return []

        def recurse(depth: int) -> bool:
            self.nodes += 1
            if self.nodes > self.node_budget:
                raise SizeLimitExceeded(f"backtracking exceeded {self.node_budget} nodes")
            if depth == len(todo):
                ids = self.scenario.observable_ids
                solutions.append(GlobalAssignment(ids, tuple(asg[m] for m in ids)))
                return len(solutions) >= max_solutions
            obs = todo[depth]
            for value in range(self.scenario.arity(obs)):
                asg[obs] = value
                if self._consistent(asg) and recurse(depth + 1):
                    del asg[obs]
                    return True
                del asg[obs]
            return False

        recurse(0)
        return solutions


def sheaf_check(support_model: SupportModel, node_budget: int = NODE_BUDGET) -> ContextualityVerdict:
    """Decide strong/logical contextuality of a support model.

    Backtracks over observables with forward pruning against each context's
    support; witnesses are deterministic (cover order, then lexicographic
    section order).
    """
    bt = _Backtracker(support_model, node_budget)
    gluings = bt.search({}, max_solutions=2)
    strongly = not gluings

    nonextendable: tuple[int, LocalSection] | None = None
    for ci, ctx in enumerate(support_model.scenario.cover):
        for section in sorted(support_model.support(ctx), key=lambda s: s.outcomes):
            if strongly:
                nonextendable = (ci, section)
                break
            if not bt.search(section.as_dict(), max_solutions=1):
                nonextendable = (ci, section)
                break
        if nonextendable:
            break

    logically = nonextendable is not None
    return ContextualityVerdict(
        noncontextual=False if logically else None,
        logically_contextual=logically,
        strongly_contextual=strongly,
        nonextendable_section=nonextendable,
        global_support_section=gluings[0] if gluings else None,
        global_section_unique=(len(gluings) == 1) if gluings else None,
    )


# ---------------------------------------------------------------------------
# Probabilistic level: incidence matrix and linear programs.


@dataclass(frozen=True)
class IncidenceMatrix:
    """0/1 matrix pairing (cover context, section) rows with global columns.

    Every column holds exactly one 1 per cover context: the row of the
    section that the column's global assignment restricts to.
    """

    scenario: MeasurementScenario
    rows: tuple[tuple[int, LocalSection], ...]
    columns: tuple[GlobalAssignment, ...]
    entries: tuple[tuple[int, ...], ...]

    def row_of(self, context_index: int, section: LocalSection) -> int:
        return self.rows.index((context_index, section))


def build_incidence(scenario: MeasurementScenario, limit: int = GLOBAL_LIMIT) -> IncidenceMatrix:
    """Materialize the gluing-condition matrix for a scenario."""
    columns = tuple(enumerate_globals(scenario, limit))
    rows: list[tuple[int, LocalSection]] = []
    for ci, ctx in enumerate(scenario.cover):
        rows.extend((ci, s) for s in enumerate_sections(ctx, scenario))
    row_pos = {key: r for r, key in enumerate(rows)}
    entries = [[0] * len(columns) for _ in rows]
    for gi, g in enumerate(columns):
        for ci, ctx in enumerate(scenario.cover):
            entries[row_pos[(ci, g.restrict(ctx))]][gi] = 1
    return IncidenceMatrix(scenario, tuple(rows), columns, tuple(tuple(r) for r in entries))


def probability_vector(model: EmpiricalModel, incidence: IncidenceMatrix) -> list[Number]:
    """Model probabilities aligned with the incidence row order."""
    return [model.table(model.scenario.cover[ci])[sec] for ci, sec in incidence.rows]


def _lp_matrix(incidence: IncidenceMatrix, mode: str) -> list[list[Number]]:
    if mode == "rational":
        return [[Fraction(v) for v in row] for row in incidence.entries]
    return [[float(v) for v in row] for row in incidence.entries]


@dataclass(frozen=True)
class NoncontextualityResult:
    """Feasibility of incidence . x = p with x >= 0, plus a certificate.

    ``distribution`` maps global assignments to weights on success;
    ``separating`` is a Farkas vector y (y.M >= 0, y.p < 0) on failure,
    aligned with the incidence rows.
    """

    noncontextual: bool
    incidence: IncidenceMatrix
    distribution: Mapping[GlobalAssignment, Number] | None
    separating: tuple[Number, ...] | None


def is_noncontextual(
    model: EmpiricalModel,
    limit: int = GLOBAL_LIMIT,
    budget: int = simplex.PIVOT_BUDGET,
) -> NoncontextualityResult:
    """Decide existence of a global distribution reproducing every table."""
    incidence = build_incidence(model.scenario, limit)
    p = probability_vector(model, incidence)
    result = simplex.feasible_eq(_lp_matrix(incidence, model.mode), p, model.mode, budget)
    if result.status == "optimal":
        assert result.x is not None
        dist = {g: w for g, w in zip(incidence.columns, result.x) if w != 0}
        return NoncontextualityResult(True, incidence, dist, None)
    assert result.certificate is not None
    return NoncontextualityResult(False, incidence, None, tuple(result.certificate))


@dataclass(frozen=True)
class FractionReport:
    """Optimal noncontextually-explainable weight and its complement."""

    noncontextual_fraction: Number
    contextual_fraction: Number
    incidence: IncidenceMatrix
    weights: tuple[Number, ...]
    dual: tuple[Number, ...]


def contextual_fraction(
    model: EmpiricalModel,
    limit: int = GLOBAL_LIMIT,
    budget: int = simplex.PIVOT_BUDGET,
) -> FractionReport:
    """Maximize the total weight of a subdistribution on global assignments
    dominated by the model (incidence . x <= p, x >= 0)."""
    incidence = build_incidence(model.scenario, limit)
    p = probability_vector(model, incidence)
    one = Fraction(1) if model.mode == "rational" else 1.0
    c = [one] * len(incidence.columns)
    result = simplex.maximize_leq(c, _lp_matrix(incidence, model.mode), p, model.mode, budget)
    assert result.status == "optimal" and result.x is not None and result.dual is not None
    ncf = result.objective
    return FractionReport(ncf, one - ncf, incidence, tuple(result.x), tuple(result.dual))


def classify_contextuality(
    model: EmpiricalModel,
    node_budget: int = NODE_BUDGET,
    limit: int = GLOBAL_LIMIT,
) -> ContextualityVerdict:
    """Full hierarchy verdict for a compatible empirical model."""
    report = check_compatibility(model)
    if not report.ok:
        worst = max(report.violations, key=lambda v: v.discrepancy)
        raise IncompatibleModel(
            f"marginals disagree on {worst.overlap.label()} by {worst.discrepancy}"
        )
    verdict = sheaf_check(support_of(model), node_budget)
    if verdict.logically_contextual:
        return verdict
    lp = is_noncontextual(model, limit)
    return ContextualityVerdict(
        noncontextual=lp.noncontextual,
        logically_contextual=verdict.logically_contextual,
        strongly_contextual=verdict.strongly_contextual,
        nonextendable_section=verdict.nonextendable_section,
        global_support_section=verdict.global_support_section,
        global_section_unique=verdict.global_section_unique,
    )


def model_from_global_weights(
    scenario: MeasurementScenario,
    weights: Mapping[GlobalAssignment, Number] | Sequence[Number],
    mode: str = "rational",
) -> EmpiricalModel:
    """Project a distribution on global assignments to cover tables.

    Models built this way are compatible and noncontextual by construction,
    which makes this the canonical generator for round-trip tests.
    """
    columns = tuple(enumerate_globals(scenario))
    if not isinstance(weights, Mapping):
        weights = dict(zip(columns, weights))
    tables: dict[Context, dict[LocalSection, Number]] = {}
    for ctx in scenario.cover:
        dist: dict[LocalSection, Number] = {}
        for g, w in weights.items():
            sec = g.restrict(ctx)
            dist[sec] = dist.get(sec, 0) + w
        tables[ctx] = dist
    return build_model(scenario, tables, mode)
