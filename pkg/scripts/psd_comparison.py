#!/usr/bin/env python3
"""Transmit PSD of every scheme at M=64, N=32, L_us=2, beta=0.1, Q=8.

Writes one CSV per configuration plus oob_summary.csv with the mean OOB
power and the plateau levels found in the transition band.

    python scripts/psd_comparison.py --frames 200 --out results/psd
"""

import argparse
import csv
from pathlib import Path

from ddpulse.cli import atomic_write, psd_csv
from ddpulse.metrics import measure_oob, oob_window, transmit_psd
from ddpulse.modem import ModemConfig

CONFIGS = [("cps-otfs", 0), ("cps-otfs", 2), ("lps-otfs", 0), ("lps-otfs", 2), ("oddm", 0), ("oddm", 2)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--frames", type=int, default=200)
    ap.add_argument("--seed", type=int, default=5)
    ap.add_argument("--out", type=Path, default=Path("results/psd"))
    args = ap.parse_args()

    rows = []
    for scheme, zg in CONFIGS:
        cfg = ModemConfig.build(scheme, M=64, N=32, L_us=2, rolloff=0.1, Q=8, zg_per_edge=zg)
        f, p = transmit_psd(cfg, frames=args.frames, seed=args.seed)
        atomic_write(args.out / f"psd_{scheme}_zg{zg}.csv", psd_csv(f, p))
        rep = measure_oob(f, p, *oob_window(cfg))
        levels = " ".join(f"{v:.1f}" for v in sorted(rep.plateau_levels_db, reverse=True))
        rows.append([scheme, zg, f"{rep.oob_power_db:.2f}", rep.distinct_plateaus, levels])
        print(f"{scheme:9s} zg={zg}  OOB {rep.oob_power_db:7.2f} dB  plateaus {rep.distinct_plateaus}")

    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "oob_summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scheme", "zg", "oob_power_db", "distinct_plateaus", "plateau_levels_db"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
