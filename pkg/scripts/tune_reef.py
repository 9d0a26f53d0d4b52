"""Sweep the review-latent noise and report oracle-mode coverage/MAE.

For each noise level and seed, the script regenerates the benchmark database,
computes replay ground truth, runs the linear estimator on the factual rows
with the correct adjustment set, and tallies how often the point estimate
falls inside the ground-truth CI. Used to pick the shipped default for
DgpConfig.latent_noise_sd; rerun after any mechanism change.

Usage: python3 scripts/tune_reef.py [--seeds 10]
"""

import argparse

import numpy as np

from orca.engine import estimate_linear
from orca.reef import DgpConfig, compute_ground_truth, generate

ADJUSTMENT = {
    "coupon_effect": ("is_active", "paid_amount"),
    "activity_effect": (),
    "coupon_effect_large_orders": ("is_active", "paid_amount"),
    "coupon_effect_small_orders": ("is_active", "paid_amount"),
}


def run_query(config, db, query):
    mech = db.mechanisms
    mask = np.ones(len(mech.paid_amount), dtype=bool)
    if query.spec.restrict is not None:
        column, op, value = query.spec.restrict
        assert column == "paid_amount"
        mask = mech.paid_amount > value if op == ">" else mech.paid_amount < value
    mask &= mech.review_exists
    treatment_col = (
        mech.coupon_redeemed
        if query.spec.treatment == "coupon_redeemed"
        else mech.is_active[mech.order_user]
    )
    data = {
        "t": treatment_col[mask].astype(float),
        "y": mech.review_score[mask].astype(float),
        "is_active": mech.is_active[mech.order_user][mask].astype(float),
        "paid_amount": mech.paid_amount[mask],
    }
    est = estimate_linear(data, "t", "y", list(ADJUSTMENT[query.spec.query_id]))
    return est.ate


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument(
        "--noise", type=float, nargs="*", default=[0.1, 0.2, 0.3, 0.4, 0.6]
    )
    args = parser.parse_args()

    print(f"{'noise':>6} {'coverage%':>10} {'mae':>8} {'max_err':>8}")
    for noise in args.noise:
        hits, errors = 0, []
        total = 0
        for seed in range(args.seeds):
            config = DgpConfig(seed=seed, latent_noise_sd=noise)
            db = generate(config)
            truth = compute_ground_truth(config, db=db)
            for query in truth.queries:
                ate = run_query(config, db, query)
                lo, hi = query.true_ci
                hits += lo <= ate <= hi
                errors.append(abs(ate - query.true_ate))
                total += 1
        print(
            f"{noise:>6.2f} {100 * hits / total:>10.1f} "
            f"{np.mean(errors):>8.4f} {np.max(errors):>8.4f}"
        )


if __name__ == "__main__":
    main()
