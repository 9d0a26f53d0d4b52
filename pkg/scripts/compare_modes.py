"""Compare oracle-mode and scripted-agent coverage on the benchmark tasks.

Oracle mode hands the causal task the gold SQL, the true adjustment set, and
the linear estimator, so its misses measure estimator noise alone. The
scripted agent replays a fixed conversation that makes one realistic
retrieval mistake: it answers the population-wide coupon question with the
high-value-orders statement. Because the coupon effect differs across order
sizes by far more than a CI half-width, that one wrong WHERE clause costs a
query on every seed, and oracle coverage should dominate everywhere.

Usage: python3 scripts/compare_modes.py [--seeds 10]
"""

import argparse
import tempfile
from pathlib import Path

from orca.evaluation import build_agentic_script, run_task
from orca.providers import MockProvider
from orca.reef import DgpConfig, compute_ground_truth, save_manifest


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--seeds", type=int, default=10)
    args = parser.parse_args()

    print(f"{'seed':>4} {'oracle%':>8} {'agentic%':>9} {'oracle_mae':>11} "
          f"{'agentic_mae':>12}")
    ordering_holds = True
    with tempfile.TemporaryDirectory() as tmp:
        for seed in range(args.seeds):
            truth = compute_ground_truth(DgpConfig(seed=seed))
            manifest = Path(tmp) / f"manifest-{seed}.json"
            save_manifest(truth, manifest)

            oracle = run_task(4, manifest, mode="oracle", seed=0)["aggregate"]
            overrides = {
                truth.queries[0].spec.query_id: truth.queries[1].spec.gold_sql
            }
            provider = MockProvider(build_agentic_script(truth, overrides))
            agentic = run_task(4, manifest, mode="agentic", provider=provider,
                               seed=0)["aggregate"]

            print(f"{seed:>4} {oracle['ci_coverage_pct']:>8.1f} "
                  f"{agentic['ci_coverage_pct']:>9.1f} "
                  f"{oracle['mae']:>11.4f} {agentic['mae']:>12.4f}")
            ordering_holds &= (
                oracle["ci_coverage_pct"] >= agentic["ci_coverage_pct"]
            )
    verdict = "holds" if ordering_holds else "VIOLATED"
    print(f"\noracle >= agentic coverage on every seed: {verdict}")


if __name__ == "__main__":
    main()
