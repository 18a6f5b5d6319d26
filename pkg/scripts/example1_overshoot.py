"""Step responses of the unity-feedback loop P(s) = 1/(s^2 + 0.2 s), C(s) = s + 1,
with no reset, FORE, CI, FCI^0.5 and FI^0.5 in series.

    python3 scripts/example1_overshoot.py --out-dir results/example1
"""

import argparse
from pathlib import Path

from fracreset.fode import MemoryMode
from fracreset.models import ResetElement, assemble_closed_loop, tf_to_ss, to_order
from fracreset.simreset import SimulationConfig, simulate, step_metrics

CASES = {
    "linear": ResetElement("FORE", b=1.0),
    "fore": ResetElement("FORE", b=1.0),
    "ci": ResetElement("CI"),
    "fci": ResetElement("FCI", alpha=0.5),
    "fi": ResetElement("FI", alpha=0.5),
}


def build(name):
    el = CASES[name]
    plant = to_order(tf_to_ss([1.0, 1.0], [1.0, 0.2, 0.0]), el.alpha)
    sys = assemble_closed_loop(plant, None, el.model(), el.rule())
    return sys.without_reset() if name == "linear" else sys


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--step", type=float, default=1e-3)
    ap.add_argument("--horizon", type=float, default=30.0)
    ap.add_argument("--memory-mode", default="offset", choices=[m.value for m in MemoryMode])
    ap.add_argument("--out-dir", type=Path, help="write one trajectory CSV per case")
    args = ap.parse_args()

    cfg = SimulationConfig(args.step, args.horizon, memory_mode=args.memory_mode)
    print(f"{'case':8s} {'overshoot':>10s} {'peak [s]':>9s} {'settle [s]':>10s} {'resets':>7s}")
    for name in CASES:
        tr = simulate(build(name), cfg)
        m = step_metrics(tr)
        print(f"{name:8s} {100 * m.overshoot:9.2f}% {m.peak_time:9.3f} "
              f"{m.settling_time:10.3f} {len(tr.reset_times):7d}")
        if args.out_dir:
            args.out_dir.mkdir(parents=True, exist_ok=True)
            tr.to_csv(args.out_dir / f"example1_{name}_trajectory.csv")


if __name__ == "__main__":
    main()
