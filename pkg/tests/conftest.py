"""Shared fixtures and reference implementations used across the suite.

The scipy solver here is a cross-check oracle only; the package itself
must never import it.
"""

from __future__ import annotations

import numpy as np
import pytest

from rulebounds.model import (
    ROLE_INSTRUMENT,
    ROLE_OUTCOME,
    ROLE_RULE_COVARIATE,
    ROLE_TREATMENT,
    CausalModel,
    TreatmentRule,
    VariableSpec,
)
from rulebounds.tables import JointTable


def random_probs(rng, shape):
    """A strictly positive random joint of the given shape."""
    raw = rng.uniform(0.05, 1.0, size=shape)
    return raw / raw.sum()


def random_joint(rng, specs):
    return JointTable(tuple(specs), random_probs(rng, tuple(s.cardinality for s in specs)))


def binary_reduced_specs():
    """Canonical (treatment, outcome, rule_rec) specs, all binary."""
    return (
        VariableSpec("treatment", 2, "treatment"),
        VariableSpec("outcome", 2, "outcome"),
        VariableSpec("rule_rec", 2, "recommendation"),
    )


def small_iv_model(x_card=2, treat_card=2, z_card=2, rule_map=None, guideline_map=None):
    """A compact instrumented model for strategy and oracle tests."""
    if rule_map is None:
        rule_map = {(x,): x % treat_card for x in range(x_card)}
    rule = TreatmentRule.from_table(rule_map, name="f")
    guideline = (
        TreatmentRule.from_table(guideline_map, name="g") if guideline_map else None
    )
    return CausalModel(
        variables=(
            VariableSpec("z", z_card, ROLE_INSTRUMENT),
            VariableSpec("x", x_card, ROLE_RULE_COVARIATE),
            VariableSpec("a", treat_card, ROLE_TREATMENT),
            VariableSpec("y", 2, ROLE_OUTCOME),
        ),
        rule=rule,
        guideline=guideline,
    )


def small_noiv_model(x_card=2, treat_card=2, rule_map=None, guideline_map=None):
    if rule_map is None:
        rule_map = {(x,): x % treat_card for x in range(x_card)}
    rule = TreatmentRule.from_table(rule_map, name="f")
    guideline = (
        TreatmentRule.from_table(guideline_map, name="g") if guideline_map else None
    )
    return CausalModel(
        variables=(
            VariableSpec("x", x_card, ROLE_RULE_COVARIATE),
            VariableSpec("a", treat_card, ROLE_TREATMENT),
            VariableSpec("y", 2, ROLE_OUTCOME),
        ),
        rule=rule,
        guideline=guideline,
    )


def scipy_lp_bounds(lp):
    """Reference bounds from scipy on the raw per-class program (no merging)."""
    from scipy import optimize

    n = lp.space.class_count
    rows = lp.n_arms * lp.n_cells
    A = np.zeros((rows + 1, n))
    cols = np.arange(n)
    for arm in range(lp.n_arms):
        A[arm * lp.n_cells + lp.cells[arm], cols] = 1.0
    A[-1] = 1.0
    b = np.concatenate([lp.rhs.ravel(), [1.0]])
    lo = optimize.linprog(lp.objective, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    hi = optimize.linprog(-lp.objective, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    if lo.status == 2 or hi.status == 2:
        return None
    assert lo.status == 0 and hi.status == 0, (lo.status, hi.status)
    return float(lo.fun), float(-hi.fun)


@pytest.fixture
def rng():
    return np.random.default_rng(987654321)
