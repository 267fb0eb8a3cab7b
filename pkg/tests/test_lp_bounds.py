"""Response-type space structure, LP assembly, and bound correctness.

The heavy cross-checks here recompute per-class behavior from the explicit
function tables (slow pure-Python path) and compare against the vectorized
integer-code path, and run scipy's solver on the raw un-merged program to
confirm the column aggregation loses nothing.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rulebounds.errors import DataError, EnumerationCapError, InfeasibleModelError, SolverError
from rulebounds.lp_bounds import (
    DEFAULT_CAP,
    BoundsResult,
    SpaceShape,
    build_lp,
    class_cells,
    closed_form_binary_reduction,
    count_classes,
    derive_shape,
    direct_sharp_bounds,
    enumerate_response_types,
    manski_stratum_bounds,
    solve_bounds,
)
from rulebounds.model import (
    CausalModel,
    TreatmentRule,
    VariableSpec,
    build_reduced_model,
    build_stratum_model,
)
from rulebounds.tables import JointTable, condition, marginalize

from conftest import (
    binary_reduced_specs,
    random_probs,
    scipy_lp_bounds,
    small_iv_model,
    small_noiv_model,
)

PAPER_SHAPE = SpaceShape("full", 3, instrument_card=2, x_cards=(6,))

_ROLE_FOR = {
    "instrument": "instrument",
    "treatment": "treatment",
    "outcome": "outcome",
    "rule_rec": "recommendation",
    "guideline_rec": "recommendation",
}


def _spec(name, card):
    role = _ROLE_FOR.get(name)
    if role is None:
        role = "rule_covariate" if name.startswith("x") else "extra_covariate"
    return VariableSpec(name, card, role)


def table_for_space(space, probs):
    """Wrap a probability array as a JointTable carrying canonical names."""
    if space.shape.instrument_card:
        names = ("instrument",) + space.cell_names
        cards = (space.shape.instrument_card,) + space.cell_cards
    else:
        names = space.cell_names
        cards = space.cell_cards
    specs = tuple(_spec(n, c) for n, c in zip(names, cards))
    return JointTable(specs, np.asarray(probs, dtype=float).reshape(cards))


def mixture_table(space, rng, q=None):
    """A table guaranteed feasible for the space: generated by a class mixture."""
    if q is None:
        q = rng.dirichlet(np.ones(space.class_count))
    cells = class_cells(space)
    per_arm = np.zeros((space.n_arms, space.n_cells))
    for z in range(space.n_arms):
        np.add.at(per_arm[z], cells[z], q)
    if space.shape.instrument_card:
        p_z = rng.dirichlet(np.ones(space.shape.instrument_card))
        probs = per_arm * p_z[:, None]
    else:
        probs = per_arm[0]
    return table_for_space(space, probs), q


# ---------------------------------------------------------------------------
# class counting


FROZEN_COUNTS = [
    (SpaceShape("reduced", 2), 16),
    (SpaceShape("reduced", 2, guideline_mode="aliased"), 16),
    (SpaceShape("reduced", 3, instrument_card=2), 216),
    (SpaceShape("reduced", 3, instrument_card=2, guideline_mode="separate"), 52488),
    (SpaceShape("reduced", 2, guideline_mode="separate"), 64),
    (SpaceShape("stratum", 2, instrument_card=2), 16),
    (SpaceShape("stratum", 3, instrument_card=2), 72),
    (SpaceShape("stratum", 3), 24),
    (SpaceShape("stratum", 2), 8),
    (SpaceShape("full", 2, x_cards=(2,)), 128),
    (PAPER_SHAPE, 835_884_417_024),
]


@pytest.mark.parametrize("shape,expected", FROZEN_COUNTS)
def test_frozen_class_counts(shape, expected):
    assert count_classes(shape) == expected


def test_count_matches_iteration_for_small_spaces():
    for shape, expected in FROZEN_COUNTS:
        if expected > 1000:
            continue
        space = enumerate_response_types(shape)
        listed = list(space.iter_classes())
        assert len(listed) == expected == space.class_count
        assert len(set(listed)) == expected  # no duplicates


def test_cap_refusal_reports_count_and_cap():
    with pytest.raises(EnumerationCapError) as exc:
        enumerate_response_types(PAPER_SHAPE, cap=10_000)
    assert exc.value.count == 835_884_417_024
    assert exc.value.cap == 10_000
    assert DEFAULT_CAP == 10_000_000
    with pytest.raises(EnumerationCapError):
        enumerate_response_types(PAPER_SHAPE)  # default cap also refuses


def test_space_is_cached_and_frozen():
    a = enumerate_response_types(SpaceShape("stratum", 3, instrument_card=2))
    b = enumerate_response_types(SpaceShape("stratum", 3, instrument_card=2))
    assert a is b
    cells = class_cells(a)
    with pytest.raises(ValueError):
        cells[0, 0] = 5


def test_derive_shape_from_built_models():
    model = small_iv_model(x_card=3, treat_card=2, z_card=2)
    shape = derive_shape(build_reduced_model(model))
    assert shape == SpaceShape("reduced", 2, instrument_card=2)
    guided = small_iv_model(guideline_map={(0,): 0, (1,): 0})
    assert derive_shape(build_reduced_model(guided)).guideline_mode == "separate"
    aliased = small_noiv_model(guideline_map={(0,): 0, (1,): 1})
    assert derive_shape(build_reduced_model(aliased)).guideline_mode == "aliased"
    stratum = derive_shape(build_stratum_model(model, (1,)))
    assert stratum == SpaceShape("stratum", 2, instrument_card=2)
    assert derive_shape(model) == SpaceShape(
        "full", 2, instrument_card=2, x_cards=(3,)
    )
    with pytest.raises(TypeError):
        derive_shape(42)


# ---------------------------------------------------------------------------
# explicit-class cross-checks of the vectorized code path


def explicit_cells(space, cls):
    """Per-arm observed cell for one explicit class, recomputed from its maps."""
    roots = dict(zip(space.root_names, cls.roots))
    arms = range(space.shape.instrument_card) if space.shape.instrument_card else [None]
    out = []
    for z in arms:
        idx = 0
        for name, card in zip(space.a_parent_names, space.a_parent_cards):
            value = z if name == "instrument" else roots[name]
            idx = idx * card + value
        treat = cls.a_map[idx]
        idy = 0
        for name, card in zip(space.y_parent_names, space.y_parent_cards):
            value = treat if name == "treatment" else roots[name]
            idy = idy * card + value
        outcome = cls.y_map[idy]
        cell = 0
        for src, card in zip(space.cell_sources, space.cell_cards):
            if src == "treatment":
                comp = treat
            elif src == "outcome":
                comp = outcome
            else:
                comp = cls.roots[src]
            cell = cell * card + comp
        out.append(cell)
    return out


def explicit_theta_coef(space, cls, side, level, guideline_level, rule, guideline):
    """Objective coefficient for one class: the outcome under the assigned level."""
    roots = dict(zip(space.root_names, cls.roots))
    if space.shape.kind == "stratum":
        lvl = level if side == "f" else guideline_level
    elif space.shape.kind == "reduced":
        if side == "f":
            lvl = roots["rule_rec"]
        else:
            lvl = roots.get("guideline_rec", roots["rule_rec"])
    else:
        chosen = rule if side == "f" else guideline
        lvl = chosen.level_for(tuple(cls.roots))
    idy = 0
    for name, card in zip(space.y_parent_names, space.y_parent_cards):
        value = lvl if name == "treatment" else roots[name]
        idy = idy * card + value
    return cls.y_map[idy]


CROSSCHECK_SHAPES = [
    SpaceShape("reduced", 2),
    SpaceShape("reduced", 2, instrument_card=2, guideline_mode="separate"),
    SpaceShape("reduced", 3, instrument_card=2),
    SpaceShape("reduced", 2, guideline_mode="separate", extra_cards=(2,)),
    SpaceShape("stratum", 3, instrument_card=2),
    SpaceShape("stratum", 2),
    SpaceShape("full", 2, x_cards=(2,)),
    SpaceShape("full", 2, instrument_card=2, x_cards=(2,)),
]


@pytest.mark.parametrize("shape", CROSSCHECK_SHAPES)
def test_vectorized_cells_match_explicit_enumeration(shape):
    space = enumerate_response_types(shape)
    cells = class_cells(space)
    assert cells.shape == (space.n_arms, space.class_count)
    assert cells.min() >= 0 and cells.max() < space.n_cells
    for j, cls in enumerate(space.iter_classes()):
        expected = explicit_cells(space, cls)
        for z in range(space.n_arms):
            assert cells[z, j] == expected[z], (shape, j, z, cls)


@pytest.mark.parametrize(
    "shape",
    [
        SpaceShape("reduced", 2, guideline_mode="separate"),
        SpaceShape("reduced", 2, instrument_card=2, guideline_mode="separate"),
        SpaceShape("stratum", 3, instrument_card=2),
        SpaceShape("full", 2, x_cards=(2,)),
    ],
)
def test_objective_matches_explicit_enumeration(shape, rng):
    space = enumerate_response_types(shape)
    table, _ = mixture_table(space, rng)
    rule = TreatmentRule.from_table({(0,): 0, (1,): 1}, name="f")
    guideline = TreatmentRule.from_table({(0,): 1, (1,): 1}, name="g")
    kwargs = {}
    if shape.kind == "stratum":
        kwargs = {"level": 1, "guideline_level": 0}
    elif shape.kind == "full":
        kwargs = {"rule": rule, "guideline": guideline}
    for query in ("theta_f", "theta_g", "cu"):
        lp = build_lp(space, table, query, **kwargs)
        for j, cls in enumerate(space.iter_classes()):
            f = explicit_theta_coef(space, cls, "f", 1, 0, rule, guideline)
            g = explicit_theta_coef(space, cls, "g", 1, 0, rule, guideline)
            want = {"theta_f": f, "theta_g": g, "cu": f - g}[query]
            assert lp.objective[j] == want, (query, j, cls)


def test_objective_coefficient_ranges(rng):
    space = enumerate_response_types(SpaceShape("reduced", 3, instrument_card=2, guideline_mode="separate"))
    table, _ = mixture_table(space, rng)
    lp_f = build_lp(space, table, "theta_f")
    lp_cu = build_lp(space, table, "cu")
    assert set(np.unique(lp_f.objective)) <= {0.0, 1.0}
    assert set(np.unique(lp_cu.objective)) <= {-1.0, 0.0, 1.0}
    assert not lp_f.objective.flags.writeable


# ---------------------------------------------------------------------------
# LP assembly invariants


def test_lp_rhs_is_conditional_per_arm(rng):
    space = enumerate_response_types(SpaceShape("reduced", 2, instrument_card=3))
    table, _ = mixture_table(space, rng)
    lp = build_lp(space, table, "theta_f")
    assert lp.rhs.shape == (3, space.n_cells)
    np.testing.assert_allclose(lp.rhs.sum(axis=1), 1.0, atol=1e-12)
    # each class occupies exactly one cell per arm, so column sums in the
    # stacked incidence matrix are one per arm
    for z in range(3):
        counts = np.bincount(lp.cells[z], minlength=space.n_cells)
        assert counts.sum() == space.class_count


def test_row_labels_name_cells_and_arms(rng):
    space = enumerate_response_types(SpaceShape("reduced", 2, instrument_card=2))
    table, _ = mixture_table(space, rng)
    lp = build_lp(space, table, "theta_f")
    assert lp.row_label(0) == "P(treatment=0, outcome=0, rule_rec=0 | instrument=0)"
    assert lp.row_label(lp.n_cells) == "P(treatment=0, outcome=0, rule_rec=0 | instrument=1)"
    assert lp.row_label(2 * lp.n_cells) == "total probability mass"

    noiv = enumerate_response_types(SpaceShape("stratum", 2))
    t2 = table_for_space(noiv, random_probs(rng, (2, 2)))
    lp2 = build_lp(noiv, t2, "theta_f", level=0)
    assert lp2.row_label(1) == "P(treatment=0, outcome=1)"


def test_build_lp_rejects_malformed_queries(rng):
    red = enumerate_response_types(SpaceShape("reduced", 2))
    t = table_for_space(red, random_probs(rng, (2, 2, 2)))
    with pytest.raises(ValueError, match="unknown query"):
        build_lp(red, t, "theta_q")
    with pytest.raises(ValueError, match="needs a guideline"):
        build_lp(red, t, "cu")
    with pytest.raises(ValueError, match="needs a guideline"):
        build_lp(red, t, "theta_g")

    strat = enumerate_response_types(SpaceShape("stratum", 2))
    t2 = table_for_space(strat, random_probs(rng, (2, 2)))
    with pytest.raises(ValueError, match="assigned level"):
        build_lp(strat, t2, "theta_f")
    with pytest.raises(ValueError, match="guideline"):
        build_lp(strat, t2, "cu", level=0)
    with pytest.raises(ValueError, match="outside range"):
        build_lp(strat, t2, "theta_f", level=5)

    full = enumerate_response_types(SpaceShape("full", 2, x_cards=(2,)))
    t3 = table_for_space(full, random_probs(rng, (2, 2, 2)))
    with pytest.raises(ValueError, match="treatment rule"):
        build_lp(full, t3, "theta_f")


def test_build_lp_rejects_empty_instrument_arm(rng):
    space = enumerate_response_types(SpaceShape("reduced", 2, instrument_card=2))
    probs = np.zeros((2, 2, 2, 2))
    probs[0] = random_probs(rng, (2, 2, 2))  # arm 1 left empty
    table = table_for_space(space, probs)
    with pytest.raises(DataError, match="instrument=1"):
        build_lp(space, table, "theta_f")


def test_bounds_result_validation():
    with pytest.raises(SolverError, match="inverted"):
        BoundsResult("theta_f", 0.7, 0.3, "reduction")
    with pytest.raises(SolverError, match="admissible"):
        BoundsResult("theta_f", -0.2, 0.5, "reduction")
    r = BoundsResult("cu", -0.2, 0.5, "reduction")
    assert r.width == pytest.approx(0.7)
    d = r.to_dict()
    assert d["lower"] == -0.2 and d["strategy"] == "reduction"


# ---------------------------------------------------------------------------
# binary reduced bounds against the closed form


def _binary_table(p):
    return JointTable(binary_reduced_specs(), np.asarray(p, dtype=float))


def test_hand_worked_binary_example():
    # agreement cells carry 0.2/0.1 good and 0.1/0.2 bad outcomes; the
    # remaining 0.4 sits where treatment and recommendation disagree
    p = np.zeros((2, 2, 2))
    p[0, 1, 0] = 0.2
    p[1, 1, 1] = 0.1
    p[0, 0, 0] = 0.1
    p[1, 0, 1] = 0.2
    p[0, 0, 1] = p[0, 1, 1] = p[1, 0, 0] = p[1, 1, 0] = 0.1
    table = _binary_table(p)
    closed = closed_form_binary_reduction(table)
    assert closed.lower == pytest.approx(0.3, abs=1e-12)
    assert closed.upper == pytest.approx(0.7, abs=1e-12)
    space = enumerate_response_types(SpaceShape("reduced", 2))
    lp = solve_bounds(build_lp(space, table, "theta_f"))
    assert lp.lower == pytest.approx(0.3, abs=1e-9)
    assert lp.upper == pytest.approx(0.7, abs=1e-9)


def test_full_agreement_identifies_the_point():
    p = np.zeros((2, 2, 2))
    p[0, 1, 0] = 0.17
    p[1, 1, 1] = 0.2
    p[0, 0, 0] = 0.33
    p[1, 0, 1] = 0.3
    res = closed_form_binary_reduction(_binary_table(p))
    assert res.lower == pytest.approx(0.37, abs=1e-12)
    assert res.upper == pytest.approx(0.37, abs=1e-12)


def test_full_disagreement_is_vacuous():
    p = np.zeros((2, 2, 2))
    p[0, 0, 1] = p[0, 1, 1] = p[1, 0, 0] = p[1, 1, 0] = 0.25
    res = closed_form_binary_reduction(_binary_table(p))
    assert res.lower == pytest.approx(0.0, abs=1e-12)
    assert res.upper == pytest.approx(1.0, abs=1e-12)


def test_closed_form_rejects_wrong_shape(rng):
    bad = JointTable(
        (VariableSpec("treatment", 3, "treatment"),
         VariableSpec("outcome", 2, "outcome"),
         VariableSpec("rule_rec", 3, "recommendation")),
        random_probs(rng, (3, 2, 3)),
    )
    with pytest.raises(ValueError, match="binary"):
        closed_form_binary_reduction(bad)


def test_random_binary_tables_match_closed_form(rng):
    space = enumerate_response_types(SpaceShape("reduced", 2))
    for _ in range(200):
        table = _binary_table(random_probs(rng, (2, 2, 2)))
        closed = closed_form_binary_reduction(table)
        lp = solve_bounds(build_lp(space, table, "theta_f"))
        assert abs(lp.lower - closed.lower) < 1e-8
        assert abs(lp.upper - closed.upper) < 1e-8
        # interval width equals the treatment/recommendation disagreement mass
        p = table.probs
        disagree = p[0, :, 1].sum() + p[1, :, 0].sum()
        assert abs(lp.width - disagree) < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=8, max_size=8))
def test_binary_width_identity_property(raw):
    p = np.asarray(raw).reshape(2, 2, 2)
    p = p / p.sum()
    res = closed_form_binary_reduction(_binary_table(p))
    disagree = p[0, :, 1].sum() + p[1, :, 0].sum()
    assert res.width == pytest.approx(disagree, abs=1e-12)


# ---------------------------------------------------------------------------
# single-stratum bounds


def test_hand_worked_stratum_example():
    # P(treat=0, good) = 0.25 and P(treat=0) = 0.6 in this stratum
    table = JointTable(
        (VariableSpec("treatment", 2, "treatment"), VariableSpec("outcome", 2, "outcome")),
        np.array([[0.35, 0.25], [0.3, 0.1]]),
    )
    res = manski_stratum_bounds(table, 0)
    assert res.lower == pytest.approx(0.25, abs=1e-12)
    assert res.upper == pytest.approx(0.65, abs=1e-12)


def test_stratum_extremes():
    everyone = JointTable(
        (VariableSpec("treatment", 2, "treatment"), VariableSpec("outcome", 2, "outcome")),
        np.array([[0.6, 0.4], [0.0, 0.0]]),
    )
    res = manski_stratum_bounds(everyone, 0)
    assert (res.lower, res.upper) == (pytest.approx(0.4), pytest.approx(0.4))
    nobody = manski_stratum_bounds(everyone, 1)
    assert (nobody.lower, nobody.upper) == (0.0, 1.0)
    with pytest.raises(ValueError, match="level"):
        manski_stratum_bounds(everyone, 2)


@pytest.mark.parametrize("k", [2, 3])
def test_random_stratum_tables_match_closed_form(rng, k):
    space = enumerate_response_types(SpaceShape("stratum", k))
    specs = (VariableSpec("treatment", k, "treatment"), VariableSpec("outcome", 2, "outcome"))
    for _ in range(100):
        table = JointTable(specs, random_probs(rng, (k, 2)))
        for level in range(k):
            closed = manski_stratum_bounds(table, level)
            lp = solve_bounds(build_lp(space, table, "theta_f", level=level))
            assert abs(lp.lower - closed.lower) < 1e-8
            assert abs(lp.upper - closed.upper) < 1e-8


def test_stratum_cu_with_levels(rng):
    space = enumerate_response_types(SpaceShape("stratum", 3))
    specs = (VariableSpec("treatment", 3, "treatment"), VariableSpec("outcome", 2, "outcome"))
    table = JointTable(specs, random_probs(rng, (3, 2)))
    res = solve_bounds(build_lp(space, table, "cu", level=1, guideline_level=2))
    f = manski_stratum_bounds(table, 1)
    g = manski_stratum_bounds(table, 2)
    # differencing the marginal intervals is valid but not sharp; the joint
    # program can only be tighter
    assert res.lower >= f.lower - g.upper - 1e-9
    assert res.upper <= f.upper - g.lower + 1e-9
    same = solve_bounds(build_lp(space, table, "cu", level=1, guideline_level=1))
    assert same.lower == pytest.approx(0.0, abs=1e-12)
    assert same.upper == pytest.approx(0.0, abs=1e-12)


# ---------------------------------------------------------------------------
# instrumented programs against scipy on the raw columns


def test_perfect_compliance_identifies_treated_value():
    # instrument flips a fair coin, treatment copies it exactly, the rule
    # recommends treatment 1 everywhere
    space = enumerate_response_types(SpaceShape("reduced", 2, instrument_card=2))
    probs = np.zeros((2, 2, 2, 2))  # (instrument, treatment, outcome, rule_rec)
    probs[0, 0, 1, 1] = 0.5 * 0.3
    probs[0, 0, 0, 1] = 0.5 * 0.7
    probs[1, 1, 1, 1] = 0.5 * 0.6
    probs[1, 1, 0, 1] = 0.5 * 0.4
    table = table_for_space(space, probs)
    res = solve_bounds(build_lp(space, table, "theta_f"))
    assert res.lower == pytest.approx(0.6, abs=1e-9)
    assert res.upper == pytest.approx(0.6, abs=1e-9)


@pytest.mark.parametrize(
    "shape",
    [
        SpaceShape("reduced", 2, instrument_card=2),
        SpaceShape("reduced", 3, instrument_card=2),
        SpaceShape("stratum", 2, instrument_card=2),
        SpaceShape("stratum", 3, instrument_card=2),
        SpaceShape("full", 2, instrument_card=2, x_cards=(2,)),
    ],
)
def test_feasible_mixtures_match_scipy(rng, shape):
    space = enumerate_response_types(shape)
    kwargs = {}
    if shape.kind == "stratum":
        kwargs = {"level": shape.treat_card - 1}
    elif shape.kind == "full":
        kwargs = {"rule": TreatmentRule.from_table({(0,): 0, (1,): 1})}
    for _ in range(20):
        table, q = mixture_table(space, rng)
        lp = build_lp(space, table, "theta_f", **kwargs)
        ours = solve_bounds(lp)
        ref = scipy_lp_bounds(lp)
        assert ref is not None
        assert abs(ours.lower - ref[0]) < 1e-8, shape
        assert abs(ours.upper - ref[1]) < 1e-8, shape
        # the generating mixture's own value must sit inside the interval
        truth = float(lp.objective @ q)
        assert ours.lower - 1e-9 <= truth <= ours.upper + 1e-9


def test_separate_guideline_cu_matches_scipy(rng):
    # the big merged space: 52,488 raw columns against scipy, all queries
    space = enumerate_response_types(
        SpaceShape("reduced", 3, instrument_card=2, guideline_mode="separate")
    )
    table, q = mixture_table(space, rng)
    for query in ("theta_f", "theta_g", "cu"):
        lp = build_lp(space, table, query)
        ours = solve_bounds(lp)
        ref = scipy_lp_bounds(lp)
        assert ref is not None
        assert abs(ours.lower - ref[0]) < 1e-8, query
        assert abs(ours.upper - ref[1]) < 1e-8, query
        truth = float(lp.objective @ q)
        assert ours.lower - 1e-9 <= truth <= ours.upper + 1e-9
        assert ours.diagnostics["merged_columns"] < space.class_count


def test_infeasibility_agreement_with_scipy(rng):
    # independent per-arm tables usually violate the shared-mixture
    # constraint; whatever scipy decides, we must decide the same
    space = enumerate_response_types(SpaceShape("reduced", 2, instrument_card=2))
    feasible = infeasible = 0
    for _ in range(40):
        table = table_for_space(space, random_probs(rng, (2, 2, 2, 2)))
        lp = build_lp(space, table, "theta_f")
        ref = scipy_lp_bounds(lp)
        if ref is None:
            infeasible += 1
            with pytest.raises(InfeasibleModelError) as exc:
                solve_bounds(lp)
            assert exc.value.violation > 0
            assert "P(" in exc.value.worst_constraint or "mass" in exc.value.worst_constraint
        else:
            feasible += 1
            ours = solve_bounds(lp)
            assert abs(ours.lower - ref[0]) < 1e-8
            assert abs(ours.upper - ref[1]) < 1e-8
    assert infeasible > 0  # the draw really does produce contradictory tables


def test_iv_never_widens_the_marginal_bounds(rng):
    # collapsing the instrument can only lose information
    iv_space = enumerate_response_types(SpaceShape("reduced", 2, instrument_card=2))
    noiv_space = enumerate_response_types(SpaceShape("reduced", 2))
    for _ in range(30):
        table, _ = mixture_table(iv_space, rng)
        with_iv = solve_bounds(build_lp(iv_space, table, "theta_f"))
        margin = marginalize(table, ("treatment", "outcome", "rule_rec"))
        without = solve_bounds(build_lp(noiv_space, margin, "theta_f"))
        assert with_iv.lower >= without.lower - 1e-8
        assert with_iv.upper <= without.upper + 1e-8


# ---------------------------------------------------------------------------
# aliased comparator and polytope validity


def test_aliased_guideline_collapses_cu_to_zero(rng):
    space = enumerate_response_types(SpaceShape("reduced", 2, guideline_mode="aliased"))
    table = table_for_space(space, random_probs(rng, (2, 2, 2)))
    res = solve_bounds(build_lp(space, table, "cu"))
    assert res.lower == pytest.approx(0.0, abs=1e-12)
    assert res.upper == pytest.approx(0.0, abs=1e-12)
    theta = solve_bounds(build_lp(space, table, "theta_g"))
    same = solve_bounds(build_lp(space, table, "theta_f"))
    assert theta.lower == pytest.approx(same.lower, abs=1e-9)
    assert theta.upper == pytest.approx(same.upper, abs=1e-9)


@pytest.mark.parametrize("shape", CROSSCHECK_SHAPES)
def test_uniform_mixture_is_always_feasible(rng, shape):
    space = enumerate_response_types(shape)
    q = np.full(space.class_count, 1.0 / space.class_count)
    table, _ = mixture_table(space, rng, q=q)
    kwargs = {}
    if shape.kind == "stratum":
        kwargs = {"level": 0}
    elif shape.kind == "full":
        kwargs = {"rule": TreatmentRule.from_table({(0,): 0, (1,): 1})}
    lp = build_lp(space, table, "theta_f", **kwargs)
    res = solve_bounds(lp)
    truth = float(lp.objective @ q)
    assert res.lower - 1e-9 <= truth <= res.upper + 1e-9
    assert 0.0 - 1e-9 <= res.lower <= res.upper <= 1.0 + 1e-9


# ---------------------------------------------------------------------------
# direct full-space oracle


def test_direct_oracle_binary_no_instrument(rng):
    model = small_noiv_model(x_card=2, treat_card=2)
    specs = (
        VariableSpec("x", 2, "rule_covariate"),
        VariableSpec("a", 2, "treatment"),
        VariableSpec("y", 2, "outcome"),
    )
    for _ in range(20):
        table = JointTable(specs, random_probs(rng, (2, 2, 2)))
        res = direct_sharp_bounds(model, table, "theta_f")
        assert res.strategy == "direct_oracle"
        # cross-check on the identically assembled raw program
        space = enumerate_response_types(SpaceShape("full", 2, x_cards=(2,)))
        canon = JointTable(
            (VariableSpec("x0", 2, "rule_covariate"),
             VariableSpec("treatment", 2, "treatment"),
             VariableSpec("outcome", 2, "outcome")),
            table.probs,
        )
        lp = build_lp(space, canon, "theta_f", rule=model.rule)
        ref = scipy_lp_bounds(lp)
        assert ref is not None
        assert abs(res.lower - ref[0]) < 1e-8
        assert abs(res.upper - ref[1]) < 1e-8


def test_direct_oracle_cu_needs_guideline(rng):
    model = small_noiv_model()
    specs = (
        VariableSpec("x", 2, "rule_covariate"),
        VariableSpec("a", 2, "treatment"),
        VariableSpec("y", 2, "outcome"),
    )
    table = JointTable(specs, random_probs(rng, (2, 2, 2)))
    with pytest.raises(ValueError, match="guideline"):
        direct_sharp_bounds(model, table, "cu")
    guided = small_noiv_model(guideline_map={(0,): 1, (1,): 1})
    res = direct_sharp_bounds(guided, table, "cu")
    assert -1.0 - 1e-9 <= res.lower <= res.upper <= 1.0 + 1e-9


def test_direct_oracle_rejects_extras_and_big_domains(rng):
    with_extra = CausalModel(
        variables=(
            VariableSpec("x", 2, "rule_covariate"),
            VariableSpec("w", 2, "extra_covariate"),
            VariableSpec("a", 2, "treatment"),
            VariableSpec("y", 2, "outcome"),
        ),
        rule=TreatmentRule.from_table({(0,): 0, (1,): 1}),
    )
    specs = tuple(with_extra.variables)
    table = JointTable(specs, random_probs(rng, (2, 2, 2, 2)))
    with pytest.raises(ValueError, match="extra covariates"):
        direct_sharp_bounds(with_extra, table, "theta_f")

    paper_shape_model = CausalModel(
        variables=(
            VariableSpec("z", 2, "instrument"),
            VariableSpec("x", 6, "rule_covariate"),
            VariableSpec("a", 3, "treatment"),
            VariableSpec("y", 2, "outcome"),
        ),
        rule=TreatmentRule.from_table({(x,): min(x // 2, 2) for x in range(6)}),
    )
    big = JointTable(tuple(paper_shape_model.variables), random_probs(rng, (2, 6, 3, 2)))
    with pytest.raises(EnumerationCapError) as exc:
        direct_sharp_bounds(paper_shape_model, big)
    assert exc.value.count == 835_884_417_024
