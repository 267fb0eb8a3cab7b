"""The two bounding strategies and their comparison.

Reduction folds the rule covariates into the latent term and solves one
program over the coarser observed table (recommendations replace
covariates). Conditioning solves a small program inside every covariate
stratum and averages the stratum bounds with the covariate weights. Both
consume the same request: a model, a joint table over its declared
variables, and a query.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Optional

import numpy as np

from .errors import DataError, EnumerationCapError, InfeasibleModelError
from .lp_bounds import (
    DEFAULT_CAP,
    BoundsResult,
    build_lp,
    direct_sharp_bounds,
    enumerate_response_types,
    solve_bounds,
)
from .model import (
    CANON_INSTRUMENT,
    CANON_OUTCOME,
    CANON_TREATMENT,
    CausalModel,
    ReducedModel,
    StratumModel,
    VariableSpec,
    build_reduced_model,
    build_stratum_model,
    validate_model,
)
from .tables import JointTable, condition, reorder, with_variables

CONTAINMENT_TOL = 1e-9
AGREE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class StrategyRequest:
    """One bounding job: a model, observed data over its variables, and a query."""

    model: CausalModel
    observed: JointTable
    query: str = "theta_f"
    cap: int = DEFAULT_CAP


def _validate_request(request: StrategyRequest) -> None:
    problems = validate_model(request.model)
    if problems:
        raise ValueError("invalid model: " + "; ".join(problems))
    if request.query in ("theta_g", "cu") and request.model.guideline is None:
        raise ValueError(
            f"query {request.query!r} needs a guideline, but the model declares none"
        )
    if request.observed.degenerate:
        raise ValueError("observed table is degenerate (zero mass)")
    declared = {v.name: v.cardinality for v in request.model.variables}
    got = {v.name: v.cardinality for v in request.observed.variables}
    if declared != got:
        raise ValueError(
            f"observed table variables {got} do not match the declared model {declared}"
        )


def _observed_order(model: CausalModel) -> list[str]:
    """Instrument, treatment, outcome, rule covariates, extra covariates."""
    names = []
    if model.instrument is not None:
        names.append(model.instrument.name)
    names += [model.treatment.name, model.outcome.name]
    names += [v.name for v in model.rule_covariates]
    names += [v.name for v in model.extra_covariates]
    return names


def reduce_table(model: CausalModel, reduced: ReducedModel, observed: JointTable) -> JointTable:
    """Project the observed joint onto the reduced variables.

    Covariate mass moves onto the recommendation values the rules assign,
    so P(..., rule_rec=b, ...) accumulates P(..., x, ...) over all x with
    f(x) = b. Extra covariates stay observed.
    """
    table = reorder(observed, _observed_order(model))
    base = (1 if model.instrument is not None else 0) + 2
    nx = len(model.rule_covariates)
    nw = len(model.extra_covariates)
    out = np.zeros(tuple(v.cardinality for v in reduced.observed))
    sep = reduced.has_guideline
    for x in model.rule_domain():
        b = model.rule.level_for(x)
        src = (slice(None),) * base + x
        dst = (slice(None),) * base + (b,)
        if sep:
            dst += (model.guideline.level_for(x),)
        dst += (slice(None),) * nw
        out[dst] += table.probs[src]
    return JointTable(reduced.observed, out)


def reduction_bounds(request: StrategyRequest) -> BoundsResult:
    """Bounds from the single program on the reduced observed table."""
    _validate_request(request)
    reduced = build_reduced_model(request.model)
    space = enumerate_response_types(reduced, cap=request.cap)
    table = reduce_table(request.model, reduced, request.observed)
    lp = build_lp(space, table, request.query)
    result = solve_bounds(lp)
    result.diagnostics["latent"] = reduced.latent_description
    result.diagnostics["observed"] = [v.name for v in reduced.observed]
    return result


@dataclass(frozen=True)
class StratumBound:
    """One stratum's contribution to the conditioning average."""

    x: tuple
    w: Optional[tuple]
    label: str
    weight: float
    level: int
    guideline_level: Optional[int]
    lower: Optional[float]
    upper: Optional[float]
    skipped: bool = False

    def to_dict(self) -> dict:
        return {
            "x": list(self.x),
            "w": list(self.w) if self.w is not None else None,
            "label": self.label,
            "weight": self.weight,
            "level": self.level,
            "guideline_level": self.guideline_level,
            "lower": self.lower,
            "upper": self.upper,
            "skipped": self.skipped,
        }


def _stratum_domains(model: CausalModel):
    """Lexicographic (x, w) pairs; w is None when there are no extra covariates."""
    x_domain = list(product(*(range(c) for c in model.rule_covariate_cards)))
    if model.extra_covariates:
        w_domain = list(product(*(range(c) for c in model.extra_covariate_cards)))
        return [(x, w) for x in x_domain for w in w_domain]
    return [(x, None) for x in x_domain]


def _canonical_stratum_table(model: CausalModel, cond_table: JointTable) -> JointTable:
    names = []
    specs = []
    if model.instrument is not None:
        names.append(model.instrument.name)
        specs.append(VariableSpec(CANON_INSTRUMENT, model.instrument.cardinality, "instrument"))
    names.append(model.treatment.name)
    specs.append(VariableSpec(CANON_TREATMENT, model.treatment.cardinality, "treatment"))
    names.append(model.outcome.name)
    specs.append(VariableSpec(CANON_OUTCOME, 2, "outcome"))
    return with_variables(reorder(cond_table, names), specs)


def conditioning_bounds(request: StrategyRequest) -> BoundsResult:
    """Weight-averaged per-stratum bounds over the covariate cells."""
    _validate_request(request)
    model = request.model
    strat_names = [v.name for v in model.rule_covariates] + [
        v.name for v in model.extra_covariates
    ]
    strata: list[StratumBound] = []
    lower = 0.0
    upper = 0.0
    for x, w in _stratum_domains(model):
        sm = build_stratum_model(model, x, w)
        values = x + (w if w is not None else ())
        cond_table, mass = condition(request.observed, dict(zip(strat_names, values)))
        g_level = sm.assigned_guideline
        if mass <= 0.0:
            strata.append(
                StratumBound(
                    x=x, w=w, label=sm.label(), weight=0.0, level=sm.assigned,
                    guideline_level=g_level, lower=None, upper=None, skipped=True,
                )
            )
            continue
        space = enumerate_response_types(sm, cap=request.cap)
        canon = _canonical_stratum_table(model, cond_table)
        try:
            lp = build_lp(
                space,
                canon,
                request.query,
                level=sm.assigned,
                guideline_level=g_level,
            )
            result = solve_bounds(lp)
        except InfeasibleModelError as err:
            raise InfeasibleModelError(
                f"stratum ({sm.label()}): {err}",
                worst_constraint=err.worst_constraint,
                violation=err.violation,
            ) from err
        except DataError as err:
            raise DataError(f"stratum ({sm.label()}): {err}") from err
        strata.append(
            StratumBound(
                x=x, w=w, label=sm.label(), weight=mass, level=sm.assigned,
                guideline_level=g_level, lower=result.lower, upper=result.upper,
            )
        )
        lower += mass * result.lower
        upper += mass * result.upper
    solved = [s for s in strata if not s.skipped]
    return BoundsResult(
        query=request.query,
        lower=lower,
        upper=upper,
        strategy="conditioning",
        diagnostics={
            "strata": [s.to_dict() for s in strata],
            "stratum_count": len(strata),
            "skipped_strata": len(strata) - len(solved),
        },
    )


@dataclass(frozen=True, eq=False)
class StrategyComparison:
    """Both strategies side by side, plus the direct oracle when tractable."""

    query: str
    reduction: BoundsResult
    conditioning: BoundsResult
    oracle: Optional[BoundsResult] = None
    oracle_note: Optional[str] = None
    containment_ok: bool = True
    oracle_matches_conditioning: Optional[bool] = None
    width_difference: float = 0.0

    def to_dict(self) -> dict:
        return {
            "query": self.query,
            "reduction": self.reduction.to_dict(),
            "conditioning": self.conditioning.to_dict(),
            "oracle": self.oracle.to_dict() if self.oracle else None,
            "oracle_note": self.oracle_note,
            "containment_ok": self.containment_ok,
            "oracle_matches_conditioning": self.oracle_matches_conditioning,
            "width_difference": self.width_difference,
        }


def compare_strategies(
    request: StrategyRequest, oracle_cap: Optional[int] = None
) -> StrategyComparison:
    """Run both strategies; add the direct oracle when the model is small enough.

    The conditioning interval is expected to sit inside the reduction
    interval (it uses strictly finer information); ``containment_ok``
    records whether that held to tolerance.
    """
    red = reduction_bounds(request)
    cond = conditioning_bounds(request)
    containment = (
        cond.lower >= red.lower - CONTAINMENT_TOL
        and cond.upper <= red.upper + CONTAINMENT_TOL
    )
    oracle = None
    note = None
    matches = None
    if oracle_cap is not None:
        if request.model.extra_covariates:
            note = "direct oracle skipped: extra covariates not supported"
        else:
            try:
                oracle = direct_sharp_bounds(
                    request.model, request.observed, request.query, cap=oracle_cap
                )
            except EnumerationCapError as err:
                note = str(err)
        if oracle is not None:
            matches = (
                abs(oracle.lower - cond.lower) <= AGREE_TOL
                and abs(oracle.upper - cond.upper) <= AGREE_TOL
            )
    return StrategyComparison(
        query=request.query,
        reduction=red,
        conditioning=cond,
        oracle=oracle,
        oracle_note=note,
        containment_ok=containment,
        oracle_matches_conditioning=matches,
        width_difference=red.width - cond.width,
    )
