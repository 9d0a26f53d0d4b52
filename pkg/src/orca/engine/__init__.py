"""Native statistical core: model validation, identification, estimation,
and refutation over an explicit causal graph."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .estimators import (
    ESTIMATION_METHODS,
    LINEAR,
    MATCHING,
    PROPENSITY_METHODS,
    STRATIFICATION,
    WEIGHTING,
    Dataset,
    EffectEstimate,
    PropensityFit,
    estimate_effect,
    estimate_linear,
    estimate_propensity,
    fit_propensity,
)
from .graph import (
    CausalGraph,
    Estimand,
    ancestors,
    backdoor_graph,
    d_separated,
    descendants,
    has_directed_path,
    identify_backdoor,
    parse_graph_text,
    render_graph_text,
    validate_graph,
)
from .refute import (
    DATA_SUBSET,
    PLACEBO,
    RANDOM_COMMON_CAUSE,
    REFUTATION_TECHNIQUES,
    RefutationResult,
    refute_estimate,
)

EFFECT_ESTIMATION = "effect_estimation"
BACKDOOR = "backdoor"


@dataclass
class CausalModelSpec:
    """Complete configuration for one effect-estimation run."""

    graph: CausalGraph
    treatment: str
    outcome: str
    estimation: str = LINEAR
    refutation: Optional[str] = None
    task: str = EFFECT_ESTIMATION
    identification: str = BACKDOOR
    seed: int = 0


def validate_model_spec(spec: CausalModelSpec) -> list[str]:
    """Raise on hard violations; return human-readable warnings otherwise."""
    validate_graph(spec.graph)
    if spec.treatment == spec.outcome:
        raise ValueError("treatment and outcome must differ")
    for name in (spec.treatment, spec.outcome):
        if name not in spec.graph.nodes:
            raise ValueError(f"{name!r} is not a graph node")
    if spec.estimation not in ESTIMATION_METHODS:
        raise ValueError(f"unknown estimation method {spec.estimation!r}")
    if spec.refutation is not None and spec.refutation not in REFUTATION_TECHNIQUES:
        raise ValueError(f"unknown refutation technique {spec.refutation!r}")
    warnings = []
    if not has_directed_path(spec.graph, spec.treatment, spec.outcome):
        warnings.append(
            f"no directed path {spec.treatment} -> {spec.outcome}: "
            "the causal effect is structurally zero and estimation is vacuous"
        )
    return warnings


def refute(
    spec: CausalModelSpec,
    dataset: Mapping[str, np.ndarray],
    original: EffectEstimate,
    technique: str,
    adjustment: Optional[Sequence[str]] = None,
) -> RefutationResult:
    """Spec-level refutation wrapper; identifies the adjustment set if not given."""
    if adjustment is None:
        estimand = identify_backdoor(spec.graph, spec.treatment, spec.outcome)
        adjustment = sorted(estimand.adjustment_set)
    return refute_estimate(
        dataset,
        spec.treatment,
        spec.outcome,
        adjustment,
        spec.estimation,
        original,
        technique,
        seed=spec.seed,
    )


__all__ = [
    "BACKDOOR",
    "CausalGraph",
    "CausalModelSpec",
    "DATA_SUBSET",
    "Dataset",
    "EFFECT_ESTIMATION",
    "ESTIMATION_METHODS",
    "EffectEstimate",
    "Estimand",
    "LINEAR",
    "MATCHING",
    "PLACEBO",
    "PROPENSITY_METHODS",
    "PropensityFit",
    "RANDOM_COMMON_CAUSE",
    "REFUTATION_TECHNIQUES",
    "RefutationResult",
    "STRATIFICATION",
    "WEIGHTING",
    "ancestors",
    "backdoor_graph",
    "d_separated",
    "descendants",
    "estimate_effect",
    "estimate_linear",
    "estimate_propensity",
    "fit_propensity",
    "has_directed_path",
    "identify_backdoor",
    "parse_graph_text",
    "refute",
    "refute_estimate",
    "render_graph_text",
    "validate_graph",
    "validate_model_spec",
]
