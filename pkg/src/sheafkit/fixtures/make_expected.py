#!/usr/bin/env python3
"""Regenerate the *.expected.json files next to the bundled fixtures.

Deliberately self-contained (stdlib only, no sheafkit imports): every
expected value is derived by brute force or by verifying an explicit
certificate, so the files are an independent reference for the test suite.

  * compatibility: direct marginal sums over each overlap;
  * strong/logical contextuality: exhaustive enumeration of global
    assignments against the supports;
  * contextual fraction: 1 is certified by showing every global assignment
    hits a zero-probability section (all weights forced to zero), 0 by
    checking an explicit global distribution reproduces the tables;
  * obstruction verdicts: non-vanishing is certified by rational
    infeasibility (Gaussian elimination) of the compatible-family system,
    which implies integer infeasibility; vanishing by an explicit
    extending global assignment.

Run from this directory:  python3 make_expected.py
"""

from __future__ import annotations

import itertools
import json
from fractions import Fraction
from pathlib import Path

HERE = Path(__file__).parent
FIXTURES = ["prbox", "bell_uniform", "triangle_anticorrelated", "deterministic", "signalling"]


def load(name):
    data = json.loads((HERE / f"{name}.json").read_text())
    obs = {o["id"]: o["arity"] for o in data["scenario"]["observables"]}
    order = [o["id"] for o in data["scenario"]["observables"]]
    cover = [tuple(sorted(c, key=order.index)) for c in data["scenario"]["cover"]]
    tables = {}
    for entry in data["tables"]:
        declared = tuple(entry["context"])
        ctx = tuple(sorted(declared, key=order.index))
        probs = {}
        for key, value in entry["probs"].items():
            outs = dict(zip(declared, (int(ch) for ch in key)))
            probs[tuple(outs[m] for m in ctx)] = Fraction(value)
        full = {}
        for outs in itertools.product(*(range(obs[m]) for m in ctx)):
            full[outs] = probs.get(outs, Fraction(0))
        tables[ctx] = full
    return order, obs, cover, tables


def marginal(ctx, table, sub):
    out = {}
    idx = [ctx.index(m) for m in sub]
    for outs, p in table.items():
        key = tuple(outs[i] for i in idx)
        out[key] = out.get(key, Fraction(0)) + p
    return out


def compatibility(order, cover, tables):
    violations = []
    for i, j in itertools.combinations(range(len(cover)), 2):
        sub = tuple(m for m in cover[i] if m in cover[j])
        if not sub:
            continue
        mi = marginal(cover[i], tables[cover[i]], sub)
        mj = marginal(cover[j], tables[cover[j]], sub)
        disc = max(abs(mi[k] - mj[k]) for k in mi)
        if disc > 0:
            violations.append(
                {"pair": [i, j], "overlap": list(sub), "discrepancy": str(disc)}
            )
    return violations


def supports(cover, tables):
    return {c: {outs for outs, p in tables[c].items() if p > 0} for c in cover}


def globals_consistent(order, obs, cover, supp):
    """All global assignments whose restriction lies in every support."""
    good = []
    for outs in itertools.product(*(range(obs[m]) for m in order)):
        g = dict(zip(order, outs))
        if all(tuple(g[m] for m in c) in supp[c] for c in cover):
            good.append(g)
    return good


def fraction_certificates(order, obs, cover, tables, supp):
    """Contextual fraction for the bundled fixtures, with certificates."""
    consistent = globals_consistent(order, obs, cover, supp)
    if not consistent:
        # Every global hits a zero-probability row, so incidence.x <= p with
        # x >= 0 forces x = 0: noncontextual fraction exactly 0.
        return "1", "0"
    # Candidate explanations: the uniform distribution over all globals, or
    # a point mass on the single consistent global.
    candidates = []
    n_glob = 1
    for m in order:
        n_glob *= obs[m]
    candidates.append({outs: Fraction(1, n_glob) for outs in
                       itertools.product(*(range(obs[m]) for m in order))})
    if len(consistent) == 1:
        g = consistent[0]
        candidates.append({tuple(g[m] for m in order): Fraction(1)})
    for cand in candidates:
        ok = True
        for c in cover:
            for outs, p in tables[c].items():
                idx = [order.index(m) for m in c]
                total = sum(w for g, w in cand.items()
                            if tuple(g[i] for i in idx) == outs)
                if total != p:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return "0", "1"
    raise RuntimeError("no fraction certificate applies; extend the oracle")


# --- rational linear algebra for the obstruction systems -------------------


def q_rank(rows):
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


def obstruction_rows(order, cover, supp):
    """The compatible-family system: rows = (edge, restricted section)."""
    vertex_basis = [(ci, outs) for ci, c in enumerate(cover)
                    for outs in sorted(supp[c])]
    edges = []
    for i, j in itertools.combinations(range(len(cover)), 2):
        sub = tuple(m for m in cover[i] if m in cover[j])
        if sub:
            edges.append((i, j, sub))

    def restr(ci, outs, sub):
        c = cover[ci]
        return tuple(outs[c.index(m)] for m in sub)

    rows = []
    for i, j, sub in edges:
        secs = sorted({restr(i, o, sub) for o in supp[cover[i]]}
                      | {restr(j, o, sub) for o in supp[cover[j]]})
        for sigma in secs:
            row = []
            for ci, outs in vertex_basis:
                coef = 0
                if ci == j and restr(ci, outs, sub) == sigma:
                    coef += 1
                if ci == i and restr(ci, outs, sub) == sigma:
                    coef -= 1
                row.append(Fraction(coef))
            rows.append(row)
    return vertex_basis, rows


def obstruction_verdicts(order, obs, cover, supp):
    vertex_basis, rows = obstruction_rows(order, cover, supp)
    consistent = globals_consistent(order, obs, cover, supp)
    verdicts = []
    for ci, c in enumerate(cover):
        for outs in sorted(supp[c]):
            extends = any(tuple(g[m] for m in c) == outs for g in consistent)
            if extends:
                # Restrictions of the extending global assignment are a
                # compatible family through this section.
                verdicts.append({"context": list(c), "section": list(outs),
                                 "vanishes": True})
                continue
            fixed = vertex_basis.index((ci, outs))
            free = [k for k, (vi, _) in enumerate(vertex_basis) if vi != ci]
            a = [[row[k] for k in free] for row in rows]
            b = [-row[fixed] for row in rows]
            ra = q_rank(a)
            rab = q_rank([r + [bv] for r, bv in zip(a, b)])
            if rab > ra:
                # No rational solution, hence no integer one.
                verdicts.append({"context": list(c), "section": list(outs),
                                 "vanishes": False})
            else:
                verdicts.append({"context": list(c), "section": list(outs),
                                 "vanishes": None})  # oracle inconclusive
    return verdicts


# --- seven-valued logic spot check (triangle fixture) -----------------------


def supervaluate(cover, supp, atoms_by_section):
    """Evaluate (x=0 & y=0) | (x=1 & y=1) per context; returns value letters."""
    values = {}
    for c in cover:
        per_section = set()
        for outs in supp[c]:
            g = dict(zip(c, outs))
            per_section.add(atoms_by_section(g))
        if per_section == {"T"}:
            values["".join(c)] = "T"
        elif per_section == {"F"}:
            values["".join(c)] = "F"
        else:
            values["".join(c)] = "U"
    return values


def triangle_logic(cover, supp):
    def heyting(g):
        def atom(o, k):
            if o not in g:
                return "U"
            return "T" if g[o] == k else "F"

        def and_(a, b):
            order = {"F": 0, "U": 1, "T": 2}
            return min(a, b, key=order.get)

        def or_(a, b):
            order = {"F": 0, "U": 1, "T": 2}
            return max(a, b, key=order.get)

        return or_(and_(atom("x", 0), atom("y", 0)), and_(atom("x", 1), atom("y", 1)))

    return supervaluate(cover, supp, heyting)


def main():
    for name in FIXTURES:
        order, obs, cover, tables = load(name)
        violations = compatibility(order, cover, tables)
        expected = {"compatible": not violations, "violations": violations}
        if violations:
            (HERE / f"{name}.expected.json").write_text(
                json.dumps(expected, indent=2, sort_keys=True) + "\n"
            )
            print(f"{name}: incompatible ({len(violations)} violations)")
            continue
        supp = supports(cover, tables)
        consistent = globals_consistent(order, obs, cover, supp)
        strongly = not consistent
        logically = strongly or any(
            not any(tuple(g[m] for m in c) == outs for g in consistent)
            for c in cover for outs in supp[c]
        )
        cf, ncf = fraction_certificates(order, obs, cover, tables, supp)
        expected.update(
            {
                "strongly_contextual": strongly,
                "logically_contextual": logically,
                "noncontextual": cf == "0",
                "contextual_fraction": cf,
                "noncontextual_fraction": ncf,
                "obstructions": obstruction_verdicts(order, obs, cover, supp),
            }
        )
        if name == "triangle_anticorrelated":
            profile = triangle_logic(cover, supp)
            attained = sorted(set(profile.values()))
            expected["logic_x_eq_y"] = {"profile": profile, "attained": attained}
        (HERE / f"{name}.expected.json").write_text(
            json.dumps(expected, indent=2, sort_keys=True) + "\n"
        )
        print(f"{name}: strongly={strongly} CF={cf}")


if __name__ == "__main__":
    main()
