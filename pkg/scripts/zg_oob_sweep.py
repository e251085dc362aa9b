#!/usr/bin/env python3
"""C-PS OTFS OOB power against zero-guard width and roll-off.

Shows how far guard insertion alone lowers the mean OOB level, which is
bounded by the RRC spectral tail once the wrap-around transients are gone.

    python scripts/zg_oob_sweep.py --out results/zg_sweep.csv
"""

import argparse
import csv
from pathlib import Path

from ddpulse.metrics import measure_oob, oob_window, transmit_psd
from ddpulse.modem import ModemConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--frames", type=int, default=100)
    ap.add_argument("--rolloffs", default="0.1,0.2,0.3")
    ap.add_argument("--guards", default="0,1,2,4,6")
    ap.add_argument("--out", type=Path, default=Path("results/zg_sweep.csv"))
    args = ap.parse_args()

    rows = []
    for beta in (float(b) for b in args.rolloffs.split(",")):
        base = None
        for g in (int(v) for v in args.guards.split(",")):
            cfg = ModemConfig.build("cps-otfs", M=64, N=32, L_us=2, rolloff=beta, Q=8, zg_per_edge=g)
            f, p = transmit_psd(cfg, frames=args.frames, seed=5)
            oob = measure_oob(f, p, *oob_window(cfg)).oob_power_db
            base = oob if base is None else base
            rows.append([beta, g, f"{oob:.2f}", f"{base - oob:.2f}"])
            print(f"beta={beta:.2f} g={g}  OOB {oob:7.2f} dB  reduction {base - oob:5.2f} dB")

    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rolloff", "zg", "oob_power_db", "reduction_db"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
