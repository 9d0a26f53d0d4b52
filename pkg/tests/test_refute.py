"""Refutation technique tests on a DGP with known effect."""

import numpy as np
import pytest

from orca.engine import (
    DATA_SUBSET,
    LINEAR,
    PLACEBO,
    RANDOM_COMMON_CAUSE,
    estimate_linear,
    refute_estimate,
)
from orca.errors import InsufficientRows


def dgp(seed, n=2000):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(n)
    t = (rng.random(n) < 1.0 / (1.0 + np.exp(-0.8 * z))).astype(float)
    y = 2.0 * t + z + 0.5 * rng.standard_normal(n)
    return {"t": t, "y": y, "z": z}


def test_placebo_passes_on_real_effect():
    data = dgp(seed=0)
    original = estimate_linear(data, "t", "y", ["z"])
    result = refute_estimate(
        data, "t", "y", ["z"], LINEAR, original, PLACEBO, seed=1
    )
    assert result.verdict == "passed"
    assert abs(result.refuted_estimate) < 0.2


def test_random_common_cause_passes():
    data = dgp(seed=2)
    original = estimate_linear(data, "t", "y", ["z"])
    result = refute_estimate(
        data, "t", "y", ["z"], LINEAR, original, RANDOM_COMMON_CAUSE, seed=3
    )
    assert result.verdict == "passed"


def test_random_common_cause_flags_large_shift():
    # Feed a fabricated original far from the data to exercise the verdict.
    data = dgp(seed=4)
    fake = estimate_linear(data, "t", "y", ["z"])
    fake = type(fake)(
        ate=50.0, ci_low=49.5, ci_high=50.5, n_used=fake.n_used, method=LINEAR
    )
    result = refute_estimate(
        data, "t", "y", ["z"], LINEAR, fake, RANDOM_COMMON_CAUSE, seed=5
    )
    assert result.verdict == "suspicious"


def test_data_subset_passes():
    data = dgp(seed=6)
    original = estimate_linear(data, "t", "y", ["z"])
    result = refute_estimate(
        data, "t", "y", ["z"], LINEAR, original, DATA_SUBSET, seed=7
    )
    assert result.verdict == "passed"


def test_data_subset_propagates_insufficient_rows():
    # 12 rows with 8 covariates estimates, but the 80% subset (10 rows) is
    # no longer enough for the design.
    rng = np.random.default_rng(8)
    data = {"t": (rng.random(12) < 0.5).astype(float), "y": rng.standard_normal(12)}
    for i in range(8):
        data[f"z{i}"] = rng.standard_normal(12)
    adjustment = [f"z{i}" for i in range(8)]
    original = estimate_linear(data, "t", "y", adjustment)
    with pytest.raises(InsufficientRows):
        refute_estimate(
            data, "t", "y", adjustment, LINEAR, original, DATA_SUBSET, seed=9
        )


def test_unknown_technique_rejected():
    data = dgp(seed=10, n=100)
    original = estimate_linear(data, "t", "y", ["z"])
    with pytest.raises(ValueError):
        refute_estimate(data, "t", "y", ["z"], LINEAR, original, "bogus")


def test_seeded_reproducibility():
    data = dgp(seed=11)
    original = estimate_linear(data, "t", "y", ["z"])
    a = refute_estimate(data, "t", "y", ["z"], LINEAR, original, PLACEBO, seed=12)
    b = refute_estimate(data, "t", "y", ["z"], LINEAR, original, PLACEBO, seed=12)
    assert a == b
