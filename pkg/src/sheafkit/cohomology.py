"""Cech cohomology of a support model over the cover's nerve.

Coefficients live in the presheaf of free abelian groups generated by the
supported sections, so differences of restricted sections are meaningful.
The degree-0 coboundary takes a family (one section combination per cover
context) to its pairwise disagreements on overlaps; gluing is exactly its
kernel.  A supported section's obstruction asks for an integer-coefficient
family that extends it with all disagreements zero, decided exactly by Smith
normal form.  Non-vanishing certifies non-extendability; the converse is not
asserted anywhere.

Basis conventions: sections are ordered lexicographically within each cell,
cells by cover index (edges by (i, j), triangles by (i, j, k), i < j < k),
with the alternating signs that convention induces.  Invariants do not
depend on these choices.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import SizeLimitExceeded
from .intlinalg import ZMat, quotient_invariants, smith_normal_form, solve
from .presheaf import LocalSection, SupportModel, restrict
from .scenario import Context, Nerve, build_nerve

#: Default ceiling on coboundary matrix entries (rows x cols).
MATRIX_LIMIT = 10**8


@dataclass(frozen=True)
class FreeAbelianSection:
    """Finite integer combination of sections over one context."""

    context: Context
    coefficients: Mapping[LocalSection, int]

    def __post_init__(self) -> None:
        for sec in self.coefficients:
            if sec.members != self.context.members:
                raise ValueError(
                    f"section over {list(sec.members)} in group element over "
                    f"{self.context.label()}"
                )

    def is_zero(self) -> bool:
        return not self.coefficients


def fa_section(context: Context, coefficients: Mapping[LocalSection, int]) -> FreeAbelianSection:
    """Normalized constructor: zero coefficients are omitted."""
    return FreeAbelianSection(context, {s: c for s, c in coefficients.items() if c != 0})


def fa_sub(a: FreeAbelianSection, b: FreeAbelianSection) -> FreeAbelianSection:
    if a.context != b.context:
        raise ValueError("cannot combine group elements over different contexts")
    out = dict(a.coefficients)
    for s, c in b.coefficients.items():
        out[s] = out.get(s, 0) - c
    return fa_section(a.context, out)


def zf_restrict(element: FreeAbelianSection, subcontext: Context | Iterable[str]) -> FreeAbelianSection:
    """Linear extension of section restriction.

    Sections that restrict to the same sub-section pool their coefficients,
    so cancellation is possible.
    """
    target = subcontext if isinstance(subcontext, Context) else Context(tuple(subcontext))
    out: dict[LocalSection, int] = {}
    for sec, coef in element.coefficients.items():
        sub = restrict(sec, target)
        out[sub] = out.get(sub, 0) + coef
    return fa_section(target, out)


@dataclass(frozen=True)
class Cochain0:
    """One free-abelian element per nerve vertex."""

    components: tuple[FreeAbelianSection, ...]


@dataclass(frozen=True)
class Cochain1:
    """One free-abelian element per nerve edge."""

    components: tuple[FreeAbelianSection, ...]


@dataclass(frozen=True)
class Cochain2:
    """One free-abelian element per nerve triangle."""

    components: tuple[FreeAbelianSection, ...]


def coboundary0(cochain: Cochain0, nerve: Nerve) -> Cochain1:
    """Edge components s_j|overlap - s_i|overlap; zero iff the family glues."""
    if len(cochain.components) != len(nerve.vertices):
        raise ValueError("cochain is not indexed by the nerve's vertices")
    for comp, ctx in zip(cochain.components, nerve.vertices):
        if comp.context != ctx:
            raise ValueError(f"component context {comp.context.label()} != {ctx.label()}")
    parts = []
    for edge in nerve.edges:
        si = zf_restrict(cochain.components[edge.i], edge.context)
        sj = zf_restrict(cochain.components[edge.j], edge.context)
        parts.append(fa_sub(sj, si))
    return Cochain1(tuple(parts))


# ---------------------------------------------------------------------------
# Integer matrices of the complex over supported-section bases.


@dataclass(frozen=True)
class CoboundaryMatrices:
    """D0: C0 -> C1 and D1: C1 -> C2 over supported-section bases.

    Row/column index maps are stored alongside; D1 . D0 = 0 is verified at
    construction.
    """

    nerve: Nerve
    vertex_basis: tuple[tuple[int, LocalSection], ...]
    edge_basis: tuple[tuple[int, LocalSection], ...]
    triangle_basis: tuple[tuple[int, LocalSection], ...]
    d0: ZMat
    d1: ZMat

    def vertex_column(self, vertex: int, section: LocalSection) -> int:
        return self.vertex_basis.index((vertex, section))


def _sorted_support(support_model: SupportModel, ctx: Context) -> list[LocalSection]:
    return sorted(support_model.support(ctx), key=lambda s: s.outcomes)


def _restricted_basis(sections_by_vertex: list[list[LocalSection]], target: Context) -> list[LocalSection]:
    seen = {restrict(s, target) for group in sections_by_vertex for s in group}
    return sorted(seen, key=lambda s: s.outcomes)


def build_coboundary_matrices(
    support_model: SupportModel,
    nerve: Nerve | None = None,
    limit: int = MATRIX_LIMIT,
) -> CoboundaryMatrices:
    """Assemble the integer coboundary matrices of a support model."""
    scenario = support_model.scenario
    if nerve is None:
        nerve = build_nerve(scenario)
    supp = [_sorted_support(support_model, ctx) for ctx in nerve.vertices]

    vertex_basis: list[tuple[int, LocalSection]] = []
    for vi in range(len(nerve.vertices)):
        vertex_basis.extend((vi, s) for s in supp[vi])

    edge_sections: list[list[LocalSection]] = []
    edge_basis: list[tuple[int, LocalSection]] = []
    for ei, edge in enumerate(nerve.edges):
        sections = _restricted_basis([supp[edge.i], supp[edge.j]], edge.context)
        edge_sections.append(sections)
        edge_basis.extend((ei, s) for s in sections)

    triangle_basis: list[tuple[int, LocalSection]] = []
    for ti, tri in enumerate(nerve.triangles):
        sections = _restricted_basis([supp[tri.i], supp[tri.j], supp[tri.k]], tri.context)
        triangle_basis.extend((ti, s) for s in sections)

    if len(edge_basis) * max(len(vertex_basis), 1) > limit:
        raise SizeLimitExceeded("coboundary matrix exceeds the size budget")

    vcol = {key: idx for idx, key in enumerate(vertex_basis)}
    erow = {key: idx for idx, key in enumerate(edge_basis)}
    trow = {key: idx for idx, key in enumerate(triangle_basis)}

    d0 = ZMat.zeros(len(edge_basis), len(vertex_basis))
    for ei, edge in enumerate(nerve.edges):
        for vi, sign in ((edge.j, 1), (edge.i, -1)):
            for s in supp[vi]:
                row = erow[(ei, restrict(s, edge.context))]
                d0.a[row][vcol[(vi, s)]] += sign

    ecol = erow  # same indexing: edge basis is both D0's rows and D1's columns
    d1 = ZMat.zeros(len(triangle_basis), len(edge_basis))
    edge_index = {(e.i, e.j): ei for ei, e in enumerate(nerve.edges)}
    for ti, tri in enumerate(nerve.triangles):
        faces = (
            (edge_index[(tri.j, tri.k)], 1),
            (edge_index[(tri.i, tri.k)], -1),
            (edge_index[(tri.i, tri.j)], 1),
        )
        for ei, sign in faces:
            for s in edge_sections[ei]:
                row = trow[(ti, restrict(s, tri.context))]
                d1.a[row][ecol[(ei, s)]] += sign

    matrices = CoboundaryMatrices(
        nerve,
        tuple(vertex_basis),
        tuple(edge_basis),
        tuple(triangle_basis),
        d0,
        d1,
    )
    if not d1.matmul(d0).is_zero():
        raise AssertionError("coboundary composition is non-zero")
    return matrices


# ---------------------------------------------------------------------------
# Per-section obstruction and the cohomology invariants.


@dataclass(frozen=True)
class SectionObstruction:
    context_index: int
    section: LocalSection
    vanishes: bool
    witness: Cochain0 | None


def obstruction(
    support_model: SupportModel,
    context_index: int,
    section: LocalSection,
    matrices: CoboundaryMatrices | None = None,
) -> SectionObstruction:
    """Decide whether a compatible integer family extends the section.

    Solves D0 r = 0 over the integers with the component at the chosen
    context pinned to the section's generator.  A solution is returned as a
    witness family; unsolvability is the non-vanishing obstruction.
    """
    if matrices is None:
        matrices = build_coboundary_matrices(support_model)
    scenario = support_model.scenario
    ctx = scenario.cover[context_index]
    if section not in support_model.support(ctx):
        raise ValueError(f"section {section.label()} not in the support of {ctx.label()}")

    fixed = matrices.vertex_column(context_index, section)
    free_cols = [c for c, (vi, _) in enumerate(matrices.vertex_basis) if vi != context_index]
    rows = matrices.d0.m
    a = ZMat(rows, len(free_cols), [[matrices.d0.a[r][c] for c in free_cols] for r in range(rows)])
    rhs = [-matrices.d0.a[r][fixed] for r in range(rows)]
    u = solve(a, rhs)
    if u is None:
        return SectionObstruction(context_index, section, False, None)

    coeffs: list[dict[LocalSection, int]] = [dict() for _ in scenario.cover]
    coeffs[context_index][section] = 1
    for value, col in zip(u, free_cols):
        vi, s = matrices.vertex_basis[col]
        if value:
            coeffs[vi][s] = value
    witness = Cochain0(tuple(fa_section(c, m) for c, m in zip(scenario.cover, coeffs)))
    return SectionObstruction(context_index, section, True, witness)


@dataclass(frozen=True)
class CechInvariants:
    h0_rank: int
    h1_rank: int
    h1_torsion: tuple[int, ...]


def cech_invariants(
    support_model: SupportModel,
    matrices: CoboundaryMatrices | None = None,
) -> CechInvariants:
    """H0 = ker D0; H1 = ker D1 / im D0 via Smith normal form."""
    if matrices is None:
        matrices = build_coboundary_matrices(support_model)
    h0 = matrices.d0.n - smith_normal_form(matrices.d0).rank
    h1_rank, torsion = quotient_invariants(matrices.d1, matrices.d0)
    return CechInvariants(h0, h1_rank, tuple(torsion))


@dataclass(frozen=True)
class ObstructionReport:
    """Per-section verdicts plus the cover's cohomology invariants."""

    entries: tuple[SectionObstruction, ...]
    invariants: CechInvariants

    @property
    def all_nonvanishing(self) -> bool:
        return all(not e.vanishes for e in self.entries)

    @property
    def any_nonvanishing(self) -> bool:
        return any(not e.vanishes for e in self.entries)


def obstruction_report(
    support_model: SupportModel,
    threads: int = 1,
    matrix_limit: int = MATRIX_LIMIT,
) -> ObstructionReport:
    """Obstruction of every supported section, in deterministic order."""
    matrices = build_coboundary_matrices(support_model, limit=matrix_limit)
    work = [
        (ci, section)
        for ci, ctx in enumerate(support_model.scenario.cover)
        for section in _sorted_support(support_model, ctx)
    ]

    def run(item: tuple[int, LocalSection]) -> SectionObstruction:
        return obstruction(support_model, item[0], item[1], matrices)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            entries = list(pool.map(run, work))
    else:
        entries = [run(item) for item in work]
    return ObstructionReport(tuple(entries), cech_invariants(support_model, matrices))
