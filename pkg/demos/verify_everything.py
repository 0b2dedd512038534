"""Run the whole verification suite at desk-scale sweep sizes.

Equivalent CLI invocation (full-size sweeps, exit status 1 on failure):

    momex verify
"""

import momex.harness as har


def main() -> None:
    report = har.verify_all(k_max=2_000, bound_k_max=100_000, n_draws=50_000)
    width = max(len(c["name"]) for c in report["checks"])
    for check in report["checks"]:
        flag = "ok " if check["passed"] else "FAIL"
        print(f"{flag} {check['name']:<{width}s} worst {check['worst_case']:.3e}"
              f" ({check['samples']} samples)")
    print(f"\nall passed: {report['passed']}")


if __name__ == "__main__":
    main()
