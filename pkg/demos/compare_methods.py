"""Equal-budget comparison: two built-in schedules against tuned baselines.

Every method gets the same number of oracle calls, so the two-point
schedule runs half as many iterations. Medians over seeds replace
per-run cherry-picking. At desk-scale budgets the decaying schedules
usually trail a well-tuned constant-step baseline; their payoff shows at
much larger call counts, so treat this as a protocol demo rather than a
verdict.
"""

import momex.harness as har

BUDGET = 4_000
SEEDS = 5


def main() -> None:
    base = dict(problem="datafit", synthetic=50, data_seed=0,
                noise="scalar-gaussian-envelope", sigma=10.0, iters=1)
    configs = [
        har.RunConfig(algorithm="mem", p=3, q=2, **base),
        har.RunConfig(algorithm="mem", p=2, q=1, **base),
        har.RunConfig(algorithm="sg-pm", gamma=0.1, eta=0.03, **base),
        har.RunConfig(algorithm="sg", eta=0.03, **base),
    ]
    table = har.compare(configs, budget=BUDGET, n_seeds=SEEDS)

    print(f"oracle-call budget {BUDGET}, medians over {SEEDS} seeds\n")
    print(f"{'method':<28s} {'iters':>6s} {'median final rel_obj':>22s}")
    for label in table["labels"]:
        print(f"{label:<28s} {table['iterations'][label]:>6d}"
              f" {table['median_final'][label]:>22.6f}")
    print("\nbest-to-worst:", ", ".join(table["ordering"]))


if __name__ == "__main__":
    main()
