import random
from fractions import Fraction

import pytest

import sheafkit as sk
from sheafkit.errors import IncompatibleModel, SizeLimitExceeded
from helpers import (
    HALF,
    bell_scenario,
    brute_force_extends,
    brute_force_globals,
    deterministic_model,
    pr_box_model,
    random_global_model,
    random_scenario,
    random_support_model,
    triangle_anticorrelated_model,
    triangle_scenario,
    verify_farkas_certificate,
    verify_fraction_certificate,
)

F = Fraction


# --- global enumeration -----------------------------------------------------


def test_enumerate_globals_counts():
    two = sk.build_scenario([("a", 2), ("b", 2)], [["a", "b"]])
    assert len(list(sk.enumerate_globals(two))) == 4
    assert len(list(sk.enumerate_globals(triangle_scenario()))) == 8
    assert len(list(sk.enumerate_globals(bell_scenario()))) == 16


def test_enumerate_globals_lex_and_unique():
    sc = triangle_scenario()
    outs = [g.outcomes for g in sk.enumerate_globals(sc)]
    assert outs == sorted(outs)
    assert len(set(outs)) == len(outs)


def test_enumerate_globals_limit():
    sc = sk.build_scenario([(f"o{i}", 2) for i in range(8)], [[f"o{i}" for i in range(8)]])
    with pytest.raises(SizeLimitExceeded):
        list(sk.enumerate_globals(sc, limit=100))


# --- sheaf condition on supports ---------------------------------------------


def test_anticorrelated_triangle_strongly_contextual():
    supp = sk.support_of(triangle_anticorrelated_model())
    verdict = sk.sheaf_check(supp)
    assert verdict.strongly_contextual
    assert verdict.logically_contextual
    assert verdict.noncontextual is False
    assert verdict.global_support_section is None
    assert verdict.nonextendable_section is not None


def test_deterministic_model_glues_uniquely():
    supp = sk.support_of(deterministic_model())
    verdict = sk.sheaf_check(supp)
    assert not verdict.strongly_contextual
    assert not verdict.logically_contextual
    assert verdict.global_support_section.as_dict() == {
        "a1": 0, "a2": 1, "b1": 0, "b2": 1
    }
    assert verdict.global_section_unique is True


def test_pr_box_strongly_contextual():
    verdict = sk.sheaf_check(sk.support_of(pr_box_model()))
    assert verdict.strongly_contextual


def test_sheaf_check_matches_brute_force_on_random_models():
    rng = random.Random(2024)
    for _ in range(80):
        sc = random_scenario(rng)
        supp = random_support_model(rng, sc)
        verdict = sk.sheaf_check(supp)
        globals_ = brute_force_globals(supp)
        assert verdict.strongly_contextual == (not globals_)
        expected_logical = not globals_ or any(
            not brute_force_extends(supp, ci, s)
            for ci, ctx in enumerate(sc.cover)
            for s in supp.support(ctx)
        )
        assert verdict.logically_contextual == expected_logical
        if verdict.global_support_section is not None:
            g = verdict.global_support_section.as_dict()
            assert g in globals_
            assert verdict.global_section_unique == (len(globals_) == 1)


def test_sheaf_check_matches_brute_force_on_larger_scenarios():
    rng = random.Random(909)
    for _ in range(10):
        sc = random_scenario(rng, max_observables=8)
        supp = random_support_model(rng, sc)
        verdict = sk.sheaf_check(supp)
        assert verdict.strongly_contextual == (not brute_force_globals(supp))


def test_sheaf_check_node_budget():
    supp = sk.support_of(pr_box_model())
    with pytest.raises(SizeLimitExceeded):
        sk.sheaf_check(supp, node_budget=2)


def test_logically_but_not_strongly_contextual_model():
    # Hardy-style supports: (a1,b1)=00 is possible locally but forces
    # b2=1, a2=1 on the neighbouring contexts, where (a2,b2)=11 is
    # forbidden; other sections still glue, so the model is logically but
    # not strongly contextual.
    sc = bell_scenario()

    def supp(ctx, forbidden):
        return frozenset(
            s for s in sk.enumerate_sections(ctx, sc) if s.outcomes != forbidden
        )

    by_members = {c.members: c for c in sc.cover}
    supports = {
        by_members[("a1", "b1")]: supp(by_members[("a1", "b1")], None),
        by_members[("a1", "b2")]: supp(by_members[("a1", "b2")], (0, 0)),
        by_members[("a2", "b1")]: supp(by_members[("a2", "b1")], (0, 0)),
        by_members[("a2", "b2")]: supp(by_members[("a2", "b2")], (1, 1)),
    }
    model = sk.SupportModel(sc, supports)
    verdict = sk.sheaf_check(model)
    assert verdict.logically_contextual
    assert not verdict.strongly_contextual
    assert verdict.global_support_section is not None
    ci, section = verdict.nonextendable_section
    assert sc.cover[ci].members == ("a1", "b1")
    assert section.outcomes == (0, 0)
    assert not brute_force_extends(model, ci, section)


# --- incidence ---------------------------------------------------------------


def test_incidence_single_context_identity():
    sc = sk.build_scenario([("a", 2)], [["a"]])
    inc = sk.build_incidence(sc)
    assert len(inc.rows) == 2 and len(inc.columns) == 2
    assert [list(r) for r in inc.entries] == [[1, 0], [0, 1]]


def test_incidence_shapes_and_column_sums():
    inc = sk.build_incidence(triangle_scenario())
    assert len(inc.rows) == 12 and len(inc.columns) == 8
    for j in range(8):
        assert sum(inc.entries[r][j] for r in range(12)) == 3

    inc_bell = sk.build_incidence(bell_scenario())
    assert len(inc_bell.rows) == 16 and len(inc_bell.columns) == 16
    for j in range(16):
        assert sum(inc_bell.entries[r][j] for r in range(16)) == 4


def test_incidence_one_entry_per_context_per_column():
    inc = sk.build_incidence(bell_scenario())
    for j, g in enumerate(inc.columns):
        for ci, ctx in enumerate(inc.scenario.cover):
            rows = [r for r, (i, _) in enumerate(inc.rows) if i == ci]
            assert sum(inc.entries[r][j] for r in rows) == 1


# --- noncontextuality LP -------------------------------------------------------


def test_projected_models_are_noncontextual_with_exact_preimage():
    rng = random.Random(99)
    for _ in range(20):
        sc = random_scenario(rng)
        model = random_global_model(rng, sc)
        res = sk.is_noncontextual(model)
        assert res.noncontextual
        # the returned distribution reproduces the tables exactly
        inc = res.incidence
        p = sk.gluing.probability_vector(model, inc)
        x = [res.distribution.get(g, F(0)) for g in inc.columns]
        assert all(w >= 0 for w in x)
        for r in range(len(inc.rows)):
            assert sum(inc.entries[r][c] * x[c] for c in range(len(x))) == p[r]


def test_pr_box_not_noncontextual_with_farkas_certificate():
    model = pr_box_model()
    res = sk.is_noncontextual(model)
    assert not res.noncontextual
    verify_farkas_certificate(model, res)


def test_uniform_independent_model_noncontextual():
    sc = bell_scenario()
    quarter = F(1, 4)
    model = sk.build_model(
        sc, {c.members: {o: quarter for o in [(0, 0), (0, 1), (1, 0), (1, 1)]} for c in sc.cover}
    )
    res = sk.is_noncontextual(model)
    assert res.noncontextual
    assert sum(res.distribution.values()) == 1


# --- contextual fraction --------------------------------------------------------


def test_fraction_noncontextual_model_zero():
    report = sk.contextual_fraction(deterministic_model())
    assert report.contextual_fraction == 0
    assert report.noncontextual_fraction == 1
    verify_fraction_certificate(deterministic_model(), report)


def test_fraction_pr_box_one():
    model = pr_box_model()
    report = sk.contextual_fraction(model)
    assert report.contextual_fraction == 1
    verify_fraction_certificate(model, report)


def test_fraction_triangle_frozen_value():
    # No global assignment is consistent with perfect anticorrelation on an
    # odd cycle, so every weight is forced to zero: the oracle value is 1.
    model = triangle_anticorrelated_model()
    report = sk.contextual_fraction(model)
    assert report.contextual_fraction == F(1)
    verify_fraction_certificate(model, report)


def test_fraction_intermediate_value():
    # 3/4 PR box + 1/4 uniform noise lies strictly between the local bound
    # (mixing weight 1/2) and the box itself: CF = 2v - 1 = 1/2 exactly.
    pr = pr_box_model()
    sc = pr.scenario
    v, quarter = F(3, 4), F(1, 4)
    tables = {}
    for c in sc.cover:
        tables[c.members] = {
            s.outcomes: v * p + (1 - v) * quarter for s, p in pr.table(c).items()
        }
    mixed = sk.build_model(sc, tables)
    report = sk.contextual_fraction(mixed)
    assert report.contextual_fraction == HALF
    verify_fraction_certificate(mixed, report)


def test_fraction_at_local_boundary_is_zero():
    # at mixing weight exactly 1/2 the mixture is noncontextual
    pr = pr_box_model()
    sc = pr.scenario
    quarter = F(1, 4)
    tables = {
        c.members: {s.outcomes: HALF * p + HALF * quarter for s, p in pr.table(c).items()}
        for c in sc.cover
    }
    boundary = sk.build_model(sc, tables)
    report = sk.contextual_fraction(boundary)
    assert report.contextual_fraction == 0
    verify_fraction_certificate(boundary, report)


def test_fraction_zero_iff_noncontextual_random():
    rng = random.Random(5)
    for _ in range(15):
        sc = random_scenario(rng)
        model = random_global_model(rng, sc, sparse=True)
        report = sk.contextual_fraction(model)
        res = sk.is_noncontextual(model)
        assert (report.contextual_fraction == 0) == res.noncontextual
        verify_fraction_certificate(model, report)


def test_hierarchy_on_compatible_models():
    rng = random.Random(31)
    models = [pr_box_model(), triangle_anticorrelated_model(), deterministic_model()]
    models += [random_global_model(rng, random_scenario(rng)) for _ in range(10)]
    for model in models:
        verdict = sk.sheaf_check(sk.support_of(model))
        lp = sk.is_noncontextual(model)
        if verdict.strongly_contextual:
            assert verdict.logically_contextual
        if verdict.logically_contextual:
            assert not lp.noncontextual


def test_classify_contextuality_fills_noncontextual():
    verdict = sk.classify_contextuality(deterministic_model())
    assert verdict.noncontextual is True
    verdict = sk.classify_contextuality(pr_box_model())
    assert verdict.noncontextual is False


def test_classify_rejects_incompatible():
    sc = bell_scenario()
    quarter = F(1, 4)
    tables = {c.members: {o: quarter for o in [(0, 0), (0, 1), (1, 0), (1, 1)]} for c in sc.cover}
    tables[("a1", "b1")] = {(0, 0): F(1)}
    model = sk.build_model(sc, tables)
    with pytest.raises(IncompatibleModel):
        sk.classify_contextuality(model)


def test_relabeling_invariance():
    # permuting outcome labels of one observable changes nothing
    model = triangle_anticorrelated_model()
    sc = model.scenario
    flipped_tables = {}
    for c in sc.cover:
        table = {}
        for s, p in model.table(c).items():
            outs = tuple(
                1 - o if m == "y" else o for m, o in zip(s.members, s.outcomes)
            )
            table[outs] = p
        flipped_tables[c.members] = table
    flipped = sk.build_model(sc, flipped_tables)

    v1 = sk.sheaf_check(sk.support_of(model))
    v2 = sk.sheaf_check(sk.support_of(flipped))
    assert (v1.strongly_contextual, v1.logically_contextual) == (
        v2.strongly_contextual, v2.logically_contextual
    )
    assert (
        sk.contextual_fraction(model).contextual_fraction
        == sk.contextual_fraction(flipped).contextual_fraction
    )


def test_round_trip_through_fraction_weights():
    # weights returned for a noncontextual model form a global distribution
    rng = random.Random(77)
    sc = random_scenario(rng)
    model = random_global_model(rng, sc)
    report = sk.contextual_fraction(model)
    assert sum(report.weights) == 1
    rebuilt = sk.model_from_global_weights(sc, list(report.weights))
    for c in sc.cover:
        assert rebuilt.table(c) == model.table(c)


def test_fraction_cross_checked_against_scipy():
    scipy_opt = pytest.importorskip("scipy.optimize")
    rng = random.Random(808)
    models = [pr_box_model(), triangle_anticorrelated_model(), deterministic_model()]
    models += [random_global_model(rng, random_scenario(rng), sparse=True) for _ in range(8)]
    # noisy PR boxes sit at various depths inside/outside the polytope
    pr = pr_box_model()
    for v in (F(1, 4), F(5, 8), F(9, 10)):
        tables = {
            c.members: {
                s.outcomes: v * p + (1 - v) * F(1, 4) for s, p in pr.table(c).items()
            }
            for c in pr.scenario.cover
        }
        models.append(sk.build_model(pr.scenario, tables))
    for model in models:
        report = sk.contextual_fraction(model)
        inc = report.incidence
        p = [float(x) for x in sk.gluing.probability_vector(model, inc)]
        c = [-1.0] * len(inc.columns)
        res = scipy_opt.linprog(
            c, A_ub=[[float(v) for v in row] for row in inc.entries], b_ub=p,
            bounds=(0, None), method="highs",
        )
        assert res.status == 0
        assert abs(float(report.noncontextual_fraction) - (-res.fun)) < 1e-9


def test_simplex_random_lps_match_scipy():
    scipy_opt = pytest.importorskip("scipy.optimize")
    from sheafkit import simplex

    rng = random.Random(2121)
    for _ in range(40):
        m, n = rng.randint(1, 5), rng.randint(1, 5)
        a = [[F(rng.randint(0, 6)) for _ in range(n)] for _ in range(m)]
        b = [F(rng.randint(0, 9)) for _ in range(m)]
        c = [F(rng.randint(0, 5)) for _ in range(n)]
        # keep the program bounded: every variable with positive cost must
        # appear in some constraint with a positive coefficient
        for j in range(n):
            if c[j] > 0 and all(a[i][j] == 0 for i in range(m)):
                a[rng.randrange(m)][j] = F(1)
        res = simplex.maximize_leq(c, a, b)
        assert res.status == "optimal"
        ref = scipy_opt.linprog(
            [-float(x) for x in c],
            A_ub=[[float(v) for v in row] for row in a],
            b_ub=[float(x) for x in b],
            bounds=(0, None),
            method="highs",
        )
        assert ref.status == 0
        assert abs(float(res.objective) - (-ref.fun)) < 1e-8


def test_float_mode_gluing():
    data = sk.model_to_dict(pr_box_model())
    data["mode"] = "float"
    for entry in data["tables"]:
        entry["probs"] = {k: 0.5 for k in entry["probs"]}
    model = sk.load_model(data)
    assert model.mode == "float"
    res = sk.is_noncontextual(model)
    assert not res.noncontextual
    report = sk.contextual_fraction(model)
    assert abs(report.contextual_fraction - 1.0) < 1e-7
