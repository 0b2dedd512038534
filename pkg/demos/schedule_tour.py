"""Tour of the extrapolation/momentum schedule for a few smoothness orders.

Prints the per-iteration parameters, checks them against the defining
linear system, and shows the certified-constant plumbing.
"""

import momex.schedule as sch


def show_order(p: int) -> None:
    print(f"\norder p={p} (q={p - 1} extrapolations)")
    for k in (0, 10, 1000):
        params = sch.params_general(k, p)
        diag = sch.validate(params)
        print(
            f"  k={k:<5d} eta={params.eta:.6f}"
            f" gammas={[f'{g:.6f}' for g in params.gammas]}"
            f" thetas={[f'{t:.6f}' for t in params.thetas]}"
            f" residual={diag.residual:.2e}"
        )


def main() -> None:
    print("dedicated order-3 schedule vs the general closed form at k=100:")
    a = sch.params_p3(100)
    b = sch.params_general(100, 3)
    print(f"  p3-special thetas {a.thetas}")
    print(f"  general    thetas {b.thetas}")

    for p in (2, 3, 5):
        show_order(p)

    print("\nweight-sum identity at p=4, k=7:")
    params = sch.params_general(7, 4)
    print(f"  sum(thetas)          = {sum(params.thetas):.12f}")
    print(f"  product closed form  = {sch.weight_sum_closed_form(params.gammas):.12f}")

    print("\npotential weights grow but never more than double:")
    for k in (0, 1, 2, 3):
        w = sch.potential_weight(k, 3)
        print(f"  k={k} p_k={w.value:.6f}")

    m = sch.theorem_constant(p=3, f0_minus_flow=1.0, sigma=1.0, L1=4.0, Lp=2.0)
    k_eps = sch.iteration_threshold(3, m, epsilon=0.1)
    print(f"\ncertified constant M={m:.3f};"
          f" iterations for a 0.1-stationary point: {k_eps:.3e}")


if __name__ == "__main__":
    main()
