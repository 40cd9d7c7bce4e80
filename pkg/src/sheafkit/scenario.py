"""Measurement scenarios and the combinatorial base they induce.

A scenario is a finite set of observables together with a cover of maximal
contexts (jointly measurable subsets).  Everything downstream lives over this
base: the nerve (pairwise and triple overlaps) carries the cochain complex,
and the inclusion poset carries restriction arrows.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .errors import (
    DominatedContext,
    DuplicateObservable,
    EmptyCover,
    InvalidScenario,
    ParseError,
    SizeLimitExceeded,
    UnknownObservable,
)

#: Default ceiling on the number of poset elements materialized.
POSET_LIMIT = 10**6


@dataclass(frozen=True)
class Observable:
    """A measurable quantity with outcomes canonicalized to 0..arity-1."""

    id: str
    arity: int

    def __post_init__(self) -> None:
        if self.arity < 2:
            raise InvalidScenario(f"observable {self.id!r} needs arity >= 2, got {self.arity}")


@dataclass(frozen=True)
class Context:
    """An ordered, duplicate-free set of observable ids.

    Instances produced by this module are canonical: members follow the
    owning scenario's observable order, so set-equal contexts compare equal.
    """

    members: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[str]:
        return iter(self.members)

    def __contains__(self, obs_id: object) -> bool:
        return obs_id in self.members

    def is_subset_of(self, other: "Context") -> bool:
        return set(self.members) <= set(other.members)

    def intersect(self, other: "Context") -> "Context":
        """Elementwise intersection; canonical order is preserved."""
        other_set = set(other.members)
        return Context(tuple(m for m in self.members if m in other_set))

    def label(self) -> str:
        return "{" + ",".join(self.members) + "}"


@dataclass(frozen=True)
class MeasurementScenario:
    """Validated observables plus a maximal cover."""

    observables: tuple[Observable, ...]
    cover: tuple[Context, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "_arity", {o.id: o.arity for o in self.observables})
        object.__setattr__(self, "_index", {o.id: i for i, o in enumerate(self.observables)})

    @property
    def observable_ids(self) -> tuple[str, ...]:
        return tuple(o.id for o in self.observables)

    def arity(self, obs_id: str) -> int:
        try:
            return self._arity[obs_id]  # type: ignore[attr-defined]
        except KeyError:
            raise UnknownObservable(f"unknown observable {obs_id!r}") from None

    def index(self, obs_id: str) -> int:
        try:
            return self._index[obs_id]  # type: ignore[attr-defined]
        except KeyError:
            raise UnknownObservable(f"unknown observable {obs_id!r}") from None

    def context(self, members: Iterable[str]) -> Context:
        """Canonicalize an id collection into a Context of this scenario."""
        members = list(members)
        if not members:
            raise InvalidScenario("a context must contain at least one observable")
        seen = set()
        for m in members:
            if m in seen:
                raise DuplicateObservable(f"duplicate observable {m!r} in context")
            seen.add(m)
            self.index(m)  # raises UnknownObservable
        return Context(tuple(sorted(seen, key=self.index)))


@dataclass(frozen=True)
class NerveEdge:
    """Non-empty pairwise overlap of cover contexts i < j."""

    i: int
    j: int
    context: Context


@dataclass(frozen=True)
class NerveTriangle:
    """Non-empty triple overlap of cover contexts i < j < k."""

    i: int
    j: int
    k: int
    context: Context


@dataclass(frozen=True)
class Nerve:
    """Cover contexts with their pairwise and triple overlaps.

    Higher intersections are never needed here: the cochain complex stops at
    degree two.
    """

    vertices: tuple[Context, ...]
    edges: tuple[NerveEdge, ...]
    triangles: tuple[NerveTriangle, ...]


@dataclass(frozen=True)
class ContextPoset:
    """Downward closure of the cover under inclusion.

    ``arrows`` lists the proper inclusions as (larger, smaller) pairs, i.e.
    one refinement arrow V -> U per strict inclusion U < V; identity arrows
    are left implicit.
    """

    elements: tuple[Context, ...]
    arrows: tuple[tuple[Context, Context], ...]


def build_scenario(
    observables: Iterable[Observable | tuple[str, int]],
    cover: Iterable[Iterable[str]],
) -> MeasurementScenario:
    """Validate and assemble a measurement scenario.

    Rejects duplicate observable ids, contexts naming unknown observables,
    an empty cover, cover contexts dominated by (contained in) another, and
    observables that appear in no cover context.
    """
    obs_list: list[Observable] = []
    for o in observables:
        obs_list.append(o if isinstance(o, Observable) else Observable(*o))
    ids = [o.id for o in obs_list]
    for i, oid in enumerate(ids):
        if oid in ids[:i]:
            raise DuplicateObservable(f"duplicate observable id {oid!r}")

    scenario = MeasurementScenario(tuple(obs_list), cover=())
    contexts = [scenario.context(c) for c in cover]
    if not contexts:
        raise EmptyCover("cover must contain at least one context")
    for a, b in itertools.permutations(contexts, 2):
        if a.is_subset_of(b):
            raise DominatedContext(f"cover context {a.label()} is contained in {b.label()}")
    covered = {m for c in contexts for m in c}
    missing = [oid for oid in ids if oid not in covered]
    if missing:
        raise InvalidScenario(f"observables in no cover context: {missing}")
    return MeasurementScenario(tuple(obs_list), tuple(contexts))


def build_nerve(scenario: MeasurementScenario) -> Nerve:
    """Enumerate each non-empty pairwise and triple overlap exactly once."""
    cover = scenario.cover
    edges = []
    for i, j in itertools.combinations(range(len(cover)), 2):
        inter = cover[i].intersect(cover[j])
        if inter.members:
            edges.append(NerveEdge(i, j, inter))
    triangles = []
    for i, j, k in itertools.combinations(range(len(cover)), 3):
        inter = cover[i].intersect(cover[j]).intersect(cover[k])
        if inter.members:
            triangles.append(NerveTriangle(i, j, k, inter))
    return Nerve(tuple(cover), tuple(edges), tuple(triangles))


def build_context_poset(scenario: MeasurementScenario, limit: int = POSET_LIMIT) -> ContextPoset:
    """All non-empty subsets of cover contexts, ordered by inclusion."""
    subsets: set[tuple[str, ...]] = set()
    for c in scenario.cover:
        members = c.members
        for r in range(1, len(members) + 1):
            for sub in itertools.combinations(members, r):
                subsets.add(sub)
                if len(subsets) > limit:
                    raise SizeLimitExceeded(
                        f"context poset exceeds {limit} elements"
                    )
    elements = sorted(
        (Context(s) for s in subsets),
        key=lambda c: (len(c.members), tuple(scenario.index(m) for m in c.members)),
    )
    if len(elements) ** 2 > limit:
        raise SizeLimitExceeded(f"context poset arrow count exceeds {limit}")
    arrows = []
    for big in elements:
        for small in elements:
            if small is not big and small.is_subset_of(big) and len(small) < len(big):
                arrows.append((big, small))
    return ContextPoset(tuple(elements), tuple(arrows))


# ---------------------------------------------------------------------------
# JSON scenario files: {"observables":[{"id":"a1","arity":2},...],
#                       "cover":[["a1","b1"],...]}

def scenario_from_dict(data: dict) -> MeasurementScenario:
    if not isinstance(data, dict):
        raise ParseError("scenario must be a JSON object")
    unknown = set(data) - {"observables", "cover"}
    if unknown:
        raise ParseError(f"unknown scenario keys: {sorted(unknown)}")
    try:
        raw_obs = data["observables"]
        raw_cover = data["cover"]
    except KeyError as exc:
        raise ParseError(f"scenario missing key {exc}") from None
    if not isinstance(raw_obs, list) or not isinstance(raw_cover, list):
        raise ParseError("scenario 'observables' and 'cover' must be lists")
    observables = []
    for entry in raw_obs:
        if not isinstance(entry, dict):
            raise ParseError("each observable must be an object")
        extra = set(entry) - {"id", "arity"}
        if extra:
            raise ParseError(f"unknown observable keys: {sorted(extra)}")
        if not isinstance(entry.get("id"), str) or not isinstance(entry.get("arity"), int):
            raise ParseError("observable needs string 'id' and integer 'arity'")
        observables.append(Observable(entry["id"], entry["arity"]))
    for ctx in raw_cover:
        if not isinstance(ctx, list) or not all(isinstance(m, str) for m in ctx):
            raise ParseError("each cover context must be a list of observable ids")
    return build_scenario(observables, raw_cover)


def scenario_to_dict(scenario: MeasurementScenario) -> dict:
    return {
        "observables": [{"id": o.id, "arity": o.arity} for o in scenario.observables],
        "cover": [list(c.members) for c in scenario.cover],
    }


def load_scenario(source: str | Path | dict) -> MeasurementScenario:
    """Load a scenario from a JSON file path or an already-parsed dict."""
    if isinstance(source, dict):
        return scenario_from_dict(source)
    try:
        text = Path(source).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read scenario file {source}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {source}: {exc}") from exc
    return scenario_from_dict(data)
