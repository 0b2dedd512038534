"""One seeded run of the double-extrapolation method, start to finish.

Equivalent CLI invocation:

    momex run --alg mem --p 3 --problem datafit --synthetic 50 \
        --sigma 10 --iters 5000 --seed 7 --log-stride 500 --out run.csv
"""

import momex.harness as har


def main() -> None:
    cfg = har.RunConfig(
        algorithm="mem", p=3, q=2,
        problem="datafit", synthetic=50, data_seed=0,
        noise="scalar-gaussian-envelope", sigma=10.0,
        iters=5_000, seed=7, log_stride=500,
    )
    records, summary = har.run_experiment(cfg)

    print("k      rel_obj    grad_norm  mom_err")
    for r in records:
        print(f"{r.k:<6d} {r.rel_obj:<10.6f} {r.grad_norm:<10.6f} {r.mom_err:.6f}")
    print()
    for key in ("final_rel_obj", "min_grad_norm", "oracle_calls",
                "zero_direction_steps"):
        print(f"{key} = {summary[key]}")


if __name__ == "__main__":
    main()
