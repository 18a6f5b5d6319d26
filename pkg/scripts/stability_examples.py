"""H_beta stability reports for the FCI loop on 1/s and the FORE/CI/FCI loops
on (s + 1)/(s^2 + 0.2 s).

    python3 scripts/stability_examples.py --out-dir results/stability
"""

import argparse
from pathlib import Path

import numpy as np

from fracreset.models import ResetElement, assemble_closed_loop, tf_to_ss, to_order
from fracreset.stability import stability_report

CASES = {
    "fci_on_integrator": (ResetElement("FCI", alpha=0.5), [1.0], [1.0, 0.0]),
    "fore_b1": (ResetElement("FORE", b=1.0), [1.0, 1.0], [1.0, 0.2, 0.0]),
    "ci": (ResetElement("CI"), [1.0, 1.0], [1.0, 0.2, 0.0]),
    "fci": (ResetElement("FCI", alpha=0.5), [1.0, 1.0], [1.0, 0.2, 0.0]),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", type=Path)
    args = ap.parse_args()

    for name, (el, num, den) in CASES.items():
        plant = to_order(tf_to_ss(num, den), el.alpha)
        sys = assemble_closed_loop(plant, None, el.model(), el.rule())
        rep = stability_report(sys, sample_betas=[0.3, 0.5])
        print(f"== {name}: {rep.verdict}")
        if rep.h_beta is not None:
            hb = rep.h_beta
            print(f"   num0 {np.round(hb.num0, 4)}  num1 {np.round(hb.num1, 4)}  "
                  f"den {np.round(hb.den, 4)}")
        print(f"   beta interval {rep.interval.as_list()}  margins {rep.phase_margins}")
        print(f"   Lyapunov probe: {rep.lyapunov.note}")
        if args.out_dir:
            args.out_dir.mkdir(parents=True, exist_ok=True)
            rep.to_json(args.out_dir / f"{name}_stability.json")
            if rep.h_beta is not None:
                rep.phase_csv(args.out_dir / f"{name}_phase.csv", [0.3, 0.5])


if __name__ == "__main__":
    main()
