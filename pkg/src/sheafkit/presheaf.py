"""Local sections, empirical models, marginal compatibility, and supports.

The event presheaf assigns to each context the set of outcome assignments
over its members; restriction is projection.  An empirical model holds one
probability table per cover context; the compatibility law (no-signalling)
requires marginals to agree on overlaps.  The support model keeps only the
sections with probability above a threshold and is the coefficient base for
the cohomology module.

Two numeric modes are supported per model: exact rationals (the default for
analysis, so verdicts never hinge on rounding) and floats for ingest of
measured data.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Union

from .errors import (
    EmptySupport,
    InvalidModel,
    NotASubcontext,
    OutcomeOutOfRange,
    ParseError,
    SizeLimitExceeded,
)
from .scenario import Context, MeasurementScenario, load_scenario, scenario_from_dict, scenario_to_dict

#: Default ceiling on the number of sections enumerated for one context.
SECTION_LIMIT = 2**20
#: Tolerance for table sums and marginal agreement in float mode.
FLOAT_ATOL = 1e-9
#: Default support threshold in float mode (exact zero in rational mode).
FLOAT_SUPPORT_THRESHOLD = 1e-12

Number = Union[Fraction, float]


@dataclass(frozen=True)
class LocalSection:
    """An outcome assignment over exactly one context.

    ``members`` and ``outcomes`` are parallel tuples in the context's
    canonical member order.
    """

    members: tuple[str, ...]
    outcomes: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.members) != len(self.outcomes):
            raise InvalidModel("section members/outcomes length mismatch")

    def value_of(self, obs_id: str) -> int:
        try:
            return self.outcomes[self.members.index(obs_id)]
        except ValueError:
            raise KeyError(obs_id) from None

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.members, self.outcomes))

    def restrict(self, subcontext: Context | Iterable[str]) -> "LocalSection":
        return restrict(self, subcontext)

    def label(self) -> str:
        """Section key: concatenated digits, comma-joined above one digit."""
        if all(o < 10 for o in self.outcomes):
            return "".join(str(o) for o in self.outcomes)
        return ",".join(str(o) for o in self.outcomes)


def _member_tuple(context: Context | Iterable[str]) -> tuple[str, ...]:
    return context.members if isinstance(context, Context) else tuple(context)


def restrict(section: LocalSection, subcontext: Context | Iterable[str]) -> LocalSection:
    """Project a section onto a subcontext; identity on the full domain."""
    wanted = set(_member_tuple(subcontext))
    if not wanted <= set(section.members):
        raise NotASubcontext(
            f"{sorted(wanted)} is not contained in section domain {list(section.members)}"
        )
    pairs = [(m, o) for m, o in zip(section.members, section.outcomes) if m in wanted]
    return LocalSection(tuple(m for m, _ in pairs), tuple(o for _, o in pairs))


def section_count(context: Context, scenario: MeasurementScenario) -> int:
    n = 1
    for m in context.members:
        n *= scenario.arity(m)
    return n


def enumerate_sections(
    context: Context,
    scenario: MeasurementScenario,
    limit: int = SECTION_LIMIT,
) -> list[LocalSection]:
    """All sections of a context, lexicographic in the outcome tuple."""
    if section_count(context, scenario) > limit:
        raise SizeLimitExceeded(
            f"context {context.label()} has more than {limit} sections"
        )
    ranges = [range(scenario.arity(m)) for m in context.members]
    return [LocalSection(context.members, outs) for outs in itertools.product(*ranges)]


@dataclass(frozen=True)
class EmpiricalModel:
    """Per-cover-context probability tables over local sections.

    Tables are dense: every section of the context appears as a key, with
    zero probability where the data had no entry.
    """

    scenario: MeasurementScenario
    mode: str
    tables: Mapping[Context, Mapping[LocalSection, Number]]

    def table(self, context: Context) -> Mapping[LocalSection, Number]:
        return self.tables[context]

    @property
    def atol(self) -> float:
        return 0.0 if self.mode == "rational" else FLOAT_ATOL


def _coerce(value: object, mode: str) -> Number:
    if mode == "rational":
        if isinstance(value, float):
            raise InvalidModel(
                f"rational mode cannot ingest float {value!r}; use 'p/q' strings"
            )
        try:
            return Fraction(value)  # type: ignore[arg-type]
        except (ValueError, TypeError) as exc:
            raise InvalidModel(f"cannot read {value!r} as a rational") from exc
    try:
        # accept "p/q" strings too, so rational files can be re-read as float
        return float(Fraction(value)) if isinstance(value, str) else float(value)  # type: ignore[arg-type]
    except (ValueError, TypeError) as exc:
        raise InvalidModel(f"cannot read {value!r} as a float") from exc


def build_model(
    scenario: MeasurementScenario,
    tables: Mapping[object, Mapping[object, object]],
    mode: str = "rational",
) -> EmpiricalModel:
    """Validate tables (domains, non-negativity, normalization) into a model.

    ``tables`` maps each cover context (Context or iterable of ids) to a
    mapping from sections (LocalSection or outcome tuple) to probabilities.
    Missing sections read as zero.
    """
    if mode not in ("rational", "float"):
        raise InvalidModel(f"unknown numeric mode {mode!r}")
    by_context: dict[Context, dict[object, object]] = {}
    for raw_ctx, raw_table in tables.items():
        ctx = raw_ctx if isinstance(raw_ctx, Context) else scenario.context(_member_tuple(raw_ctx))
        if ctx in by_context:
            raise InvalidModel(f"two tables given for context {ctx.label()}")
        by_context[ctx] = dict(raw_table)
    missing = [c for c in scenario.cover if c not in by_context]
    if missing:
        raise InvalidModel(f"missing tables for {[c.label() for c in missing]}")
    extra = [c for c in by_context if c not in scenario.cover]
    if extra:
        raise InvalidModel(f"tables for non-cover contexts {[c.label() for c in extra]}")

    dense: dict[Context, dict[LocalSection, Number]] = {}
    zero: Number = Fraction(0) if mode == "rational" else 0.0
    for ctx in scenario.cover:
        full = {s: zero for s in enumerate_sections(ctx, scenario)}
        for raw_sec, raw_p in by_context[ctx].items():
            sec = _as_section(raw_sec, ctx, scenario)
            full[sec] = _coerce(raw_p, mode)
        total = sum(full.values())
        if any(p < 0 for p in full.values()):
            raise InvalidModel(f"negative probability in context {ctx.label()}")
        if mode == "rational":
            if total != 1:
                raise InvalidModel(f"table for {ctx.label()} sums to {total}, not 1")
        elif abs(total - 1.0) > FLOAT_ATOL:
            raise InvalidModel(f"table for {ctx.label()} sums to {total!r}, not 1")
        dense[ctx] = full
    return EmpiricalModel(scenario, mode, dense)


def _as_section(raw: object, ctx: Context, scenario: MeasurementScenario) -> LocalSection:
    if isinstance(raw, LocalSection):
        sec = raw
        if sec.members != ctx.members:
            raise InvalidModel(
                f"section over {list(sec.members)} in table for {ctx.label()}"
            )
    elif isinstance(raw, tuple):
        sec = LocalSection(ctx.members, tuple(int(o) for o in raw))
    else:
        raise InvalidModel(f"cannot read table key {raw!r} as a section")
    for m, o in zip(sec.members, sec.outcomes):
        if not 0 <= o < scenario.arity(m):
            raise OutcomeOutOfRange(f"outcome {o} out of range for observable {m!r}")
    return sec


def marginalize(
    table: Mapping[LocalSection, Number],
    overlap: Context | Iterable[str],
) -> dict[LocalSection, Number]:
    """Push a context's distribution down to a subcontext by summation."""
    if not table:
        raise InvalidModel("cannot marginalize an empty table")
    target = _member_tuple(overlap)
    out: dict[LocalSection, Number] = {}
    for section, p in table.items():
        sub = restrict(section, target)
        out[sub] = out.get(sub, 0) + p
    return out


@dataclass(frozen=True)
class CompatibilityViolation:
    pair: tuple[int, int]
    overlap: Context
    discrepancy: Number


@dataclass(frozen=True)
class CompatibilityReport:
    ok: bool
    violations: tuple[CompatibilityViolation, ...]


def check_compatibility(model: EmpiricalModel, atol: float | None = None) -> CompatibilityReport:
    """Check marginal agreement on every non-empty cover overlap.

    Failure is data, not an exception: violations carry the max-norm
    discrepancy per offending pair.
    """
    if atol is None:
        atol = model.atol
    cover = model.scenario.cover
    violations = []
    for i, j in itertools.combinations(range(len(cover)), 2):
        overlap = cover[i].intersect(cover[j])
        if not overlap.members:
            continue
        mi = marginalize(model.table(cover[i]), overlap)
        mj = marginalize(model.table(cover[j]), overlap)
        disc = max(abs(mi[s] - mj[s]) for s in mi)
        if disc > atol:
            violations.append(CompatibilityViolation((i, j), overlap, disc))
    return CompatibilityReport(not violations, tuple(violations))


@dataclass(frozen=True)
class SupportModel:
    """Per-cover-context sets of possible (above-threshold) sections."""

    scenario: MeasurementScenario
    supports: Mapping[Context, frozenset[LocalSection]]

    def support(self, context: Context) -> frozenset[LocalSection]:
        return self.supports[context]


def support_of(model: EmpiricalModel, threshold: Number | None = None) -> SupportModel:
    """Sections with probability strictly above the threshold, per context."""
    if threshold is None:
        threshold = Fraction(0) if model.mode == "rational" else FLOAT_SUPPORT_THRESHOLD
    if threshold < 0:
        raise InvalidModel(f"support threshold must be >= 0, got {threshold!r}")
    supports = {}
    for ctx in model.scenario.cover:
        supp = frozenset(s for s, p in model.table(ctx).items() if p > threshold)
        if not supp:
            raise EmptySupport(f"context {ctx.label()} has empty support")
        supports[ctx] = supp
    return SupportModel(model.scenario, supports)


def deterministic_support(scenario: MeasurementScenario, assignment: Mapping[str, int]) -> SupportModel:
    """Singleton supports obtained by restricting one global assignment."""
    supports = {}
    for ctx in scenario.cover:
        outs = tuple(assignment[m] for m in ctx.members)
        supports[ctx] = frozenset({LocalSection(ctx.members, outs)})
    return SupportModel(scenario, supports)


# ---------------------------------------------------------------------------
# JSON model files:
#   {"scenario": <inline object or path>, "mode": "rational"|"float",
#    "tables": [{"context": ["a1","b1"], "probs": {"00": "1/2", "11": "1/2"}}]}
# Section keys concatenate outcomes in the order the context is written in
# the file (comma-separated once any outcome needs more than one digit).

def _parse_section_key(key: str, declared: tuple[str, ...], scenario: MeasurementScenario) -> tuple[int, ...]:
    if "," in key:
        parts = key.split(",")
    else:
        parts = list(key)
    if len(parts) != len(declared):
        raise ParseError(f"section key {key!r} does not match context {list(declared)}")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise ParseError(f"non-integer outcome in section key {key!r}") from None


def model_from_dict(data: dict, base_dir: Path | None = None) -> EmpiricalModel:
    if not isinstance(data, dict):
        raise ParseError("model must be a JSON object")
    unknown = set(data) - {"scenario", "mode", "tables"}
    if unknown:
        raise ParseError(f"unknown model keys: {sorted(unknown)}")
    if "scenario" not in data or "tables" not in data:
        raise ParseError("model needs 'scenario' and 'tables' keys")
    raw_scenario = data["scenario"]
    if isinstance(raw_scenario, str):
        path = Path(raw_scenario)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        scenario = load_scenario(path)
    else:
        scenario = scenario_from_dict(raw_scenario)
    mode = data.get("mode", "rational")
    if mode not in ("rational", "float"):
        raise ParseError(f"unknown mode {mode!r}")

    tables: dict[Context, dict[tuple[int, ...], object]] = {}
    if not isinstance(data["tables"], list):
        raise ParseError("'tables' must be a list")
    for entry in data["tables"]:
        if not isinstance(entry, dict):
            raise ParseError("each table must be an object")
        extra = set(entry) - {"context", "probs"}
        if extra:
            raise ParseError(f"unknown table keys: {sorted(extra)}")
        if "context" not in entry or "probs" not in entry:
            raise ParseError("each table needs 'context' and 'probs'")
        declared = tuple(entry["context"])
        ctx = scenario.context(declared)
        probs: dict[tuple[int, ...], object] = {}
        if not isinstance(entry["probs"], dict):
            raise ParseError("'probs' must be an object")
        for key, value in entry["probs"].items():
            outs = _parse_section_key(key, declared, scenario)
            by_id = dict(zip(declared, outs))
            probs[tuple(by_id[m] for m in ctx.members)] = value
        tables[ctx] = probs
    try:
        return build_model(scenario, tables, mode)
    except (InvalidModel, OutcomeOutOfRange) as exc:
        raise ParseError(str(exc)) from exc


def model_to_dict(model: EmpiricalModel) -> dict:
    tables = []
    for ctx in model.scenario.cover:
        probs = {}
        for sec, p in model.table(ctx).items():
            if p == 0:
                continue
            probs[sec.label()] = str(p) if model.mode == "rational" else p
        tables.append({"context": list(ctx.members), "probs": probs})
    return {
        "scenario": scenario_to_dict(model.scenario),
        "mode": model.mode,
        "tables": tables,
    }


def load_model(source: str | Path | dict) -> EmpiricalModel:
    """Load an empirical model from a JSON file path or parsed dict."""
    if isinstance(source, dict):
        return model_from_dict(source)
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read model file {source}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {source}: {exc}") from exc
    return model_from_dict(data, base_dir=path.parent)
