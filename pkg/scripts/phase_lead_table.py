"""Phase lead of FCI and FI over the integer integrator as a function of order.

    python3 scripts/phase_lead_table.py --csv phase_lead.csv
"""

import argparse
import csv

import numpy as np

from fracreset.describing import phase_lead


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=19)
    ap.add_argument("--csv", help="also write alpha,fci_lead_deg,fi_lead_deg")
    args = ap.parse_args()

    alphas = np.linspace(0.05, 1.0, args.points)
    rows = [(a, phase_lead("FCI", a), phase_lead("FI", a)) for a in alphas]
    print(f"{'alpha':>6s} {'FCI [deg]':>10s} {'FI [deg]':>9s}")
    for a, f, i in rows:
        print(f"{a:6.3f} {f:10.3f} {i:9.3f}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["alpha", "fci_lead_deg", "fi_lead_deg"])
            w.writerows(rows)

    # order of a plain fractional integrator giving the same lead as FCI^0.5
    target = phase_lead("FCI", 0.5)
    print(f"\nFCI^0.5 lead {target:.2f} deg equals FI^{1 - target / 90:.3f}")


if __name__ == "__main__":
    main()
