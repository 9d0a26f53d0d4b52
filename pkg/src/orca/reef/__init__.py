"""Synthetic e-commerce benchmark database with an exact effect oracle."""

from .dgp import (
    BASE_SIZES,
    CAUSAL_OUTCOME,
    CAUSAL_TREATMENTS,
    FK_EDGES,
    TABLE_NAMES,
    DgpConfig,
    GeneratedDatabase,
    Mechanisms,
    TableData,
    activity_probability,
    coupon_probability,
    generate,
    replay_reviews,
    review_latent,
    score_from_latent,
)
from .loader import create_table_sql, load_into
from .truth import (
    VARIABLE_BINDINGS,
    GroundTruth,
    GroundTruthQuery,
    QuerySpec,
    activity_query_spec,
    compute_ground_truth,
    default_query_specs,
    load_manifest,
    save_manifest,
)

__all__ = [
    "BASE_SIZES",
    "CAUSAL_OUTCOME",
    "CAUSAL_TREATMENTS",
    "FK_EDGES",
    "TABLE_NAMES",
    "DgpConfig",
    "GeneratedDatabase",
    "Mechanisms",
    "TableData",
    "activity_probability",
    "coupon_probability",
    "generate",
    "replay_reviews",
    "review_latent",
    "score_from_latent",
    "create_table_sql",
    "load_into",
    "VARIABLE_BINDINGS",
    "GroundTruth",
    "GroundTruthQuery",
    "QuerySpec",
    "activity_query_spec",
    "compute_ground_truth",
    "default_query_specs",
    "load_manifest",
    "save_manifest",
]
