"""Finite-size ridge experiments against their asymptotic prediction.

Draws data of dimension d with n samples, builds two blocks of random
features (ELU(3x) and ReLU(x/4)), fits the ridge readout and estimates the
excess risk on held-out points.  The matching asymptotic instance uses the
width ratios psi_c = N_c/d and psi_n = n/d.  Already at d around 100 the
Monte Carlo means sit within a few standard errors of the deterministic
curve.
"""

import argparse

from multidescent import (
    ActivationSpec,
    EmpiricalConfig,
    asymptotic_risk,
    run_experiment,
    theory_spec_from_empirical,
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--d", type=int, default=100, help="input dimension")
    parser.add_argument("--replications", type=int, default=10)
    parser.add_argument("--workers", type=int, default=4)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    d = args.d
    n = 3 * d
    acts = (
        ActivationSpec("elu", in_scale=3.0),
        ActivationSpec("relu", in_scale=0.25),
    )
    print(f"d={d}, n={n}, activations (elu(3x), relu(x/4)), lambda=1e-3, tau=0.1")
    print(f"{'c':>5} {'theory':>12} {'empirical':>12} {'std err':>10} {'gap/se':>8}")
    for c in (0.5, 1.0, 1.5, 2.0, 3.0):
        width = int(round(c * n / 2.0))
        cfg = EmpiricalConfig(
            d=d, n=n, N=(width, width), activations=acts,
            lam=1e-3, F0=0.2, F1=1.0, tau=0.1,
            n_test=500, replications=args.replications, base_seed=args.seed,
        )
        emp = run_experiment(cfg, workers=args.workers)
        theory = asymptotic_risk(theory_spec_from_empirical(cfg)).risk
        pulls = abs(emp.mean - theory) / emp.std_error if emp.std_error else 0.0
        print(
            f"{c:>5.2f} {theory:>12.6f} {emp.mean:>12.6f} "
            f"{emp.std_error:>10.6f} {pulls:>8.2f}"
        )
    print()
    print("gap/se is the distance between simulation and theory in units of")
    print("the Monte Carlo standard error; values of order one mean the")
    print("asymptotic curve already describes this finite model.")


if __name__ == "__main__":
    main()
