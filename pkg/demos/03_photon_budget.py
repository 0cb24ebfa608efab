"""How many photons does a target resolution cost?

Inverts the information curves into a minimum photon budget for
resolving a Fourier component at a fixed contrast and detection
threshold, for plain imaging and for the optimized split acquisition.
Writes both budget curves and prints the headline comparisons.
"""

import csv
from pathlib import Path

import numpy as np

from fddlab import (
    BudgetParams,
    OpticsSpec,
    budget_constant,
    budget_curves,
    compute_otf,
    default_grid,
    make_circular_pupil,
    n_min_di,
    n_min_fdd,
    resolution_for_budget,
)

OUT = Path(__file__).resolve().parent / "out" / "03_photon_budget"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    optics = OpticsSpec(wavelength=540.0, numerical_aperture=1.4)
    grid = default_grid(optics, n=256)
    di_otf = compute_otf(make_circular_pupil(optics, grid))
    params = BudgetParams()

    c = budget_constant(params)
    print(f"contrast {params.cv}, threshold {params.snr_threshold} sigma"
          f" -> budget constant {c:.1f} photons per Airy area")

    k_ray = 2 * np.pi * optics.numerical_aperture / (0.61 * optics.wavelength)
    n_di = n_min_di(k_ray, params, di_otf)
    n_fdd, alpha_opt, ka_opt = n_min_fdd(k_ray, params, optics)
    print(f"Rayleigh spacing (k = {k_ray / optics.k_c:.3f} k_c):")
    print(f"  plain imaging  {n_di:12.0f} photons")
    print(f"  split   (alpha = {alpha_opt:.2f}, k_a = {ka_opt:.2f} k_c)"
          f" {n_fdd:12.0f} photons")
    print(f"  ratio {n_di / n_fdd:.3f}")

    di_curve, fdd_curve = budget_curves(params, optics)
    with open(OUT / "budget_curves.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "resolution_nm", "n_min", "alpha", "k_a_ratio"])
        for curve in (di_curve, fdd_curve):
            for res, n, alpha, ka in curve.points:
                w.writerow([
                    curve.method, f"{res:.4f}", f"{n:.6g}",
                    "" if alpha is None else alpha,
                    "" if ka is None else ka,
                ])

    print("resolution achievable at a fixed budget:")
    best = 0.0
    for n in np.geomspace(di_curve.budgets[0] * 1.01, di_curve.budgets[-1], 7):
        r_di = resolution_for_budget(n, "di", params, optics, curve=di_curve)
        r_fdd = resolution_for_budget(n, "fdd", params, optics, curve=fdd_curve)
        best = max(best, r_di / r_fdd)
        print(f"  {n:12.0f} photons: {r_di:7.1f} nm plain"
              f" vs {r_fdd:7.1f} nm split ({r_di / r_fdd:.3f}x)")
    print(f"largest gain on this sweep: {best:.3f}x finer")
    print(f"curves in {OUT / 'budget_curves.csv'}")


if __name__ == "__main__":
    main()
