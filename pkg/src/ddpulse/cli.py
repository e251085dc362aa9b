"""Experiment driver.

    ddpulse --experiment psd --scheme oddm --output-dir out/
    ddpulse --config run.yaml --zg 0

A config file (YAML or JSON, flat keys named like the flags) is optional;
flags override it. Exit codes: 0 ok, 1 config error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .metrics import (ChannelSpec, ebn0_at_ber, measure_oob, oob_window, run_ber_curve,
                      transmit_psd)
from .modem import ModemConfig, dump_test_vectors
from .oracles import run_equivalence_suites

EXPERIMENTS = ("psd", "ber", "oracle-check", "vectors")
# a config file must name these unless a flag supplies them
REQUIRED_IN_FILE = ("experiment", "M", "N", "scheme")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str = "psd"
    M: int = 64
    N: int = 32
    scheme: str = "cps-otfs"
    pulse: str = "rrc"
    rolloff: float = 0.1
    Q: int = 8
    us: int = 2
    cp: int = 4
    zg: int = 0
    delta_f: float = 15e3
    carrier_hz: float = 5.9e9
    channel: str = "eva"
    velocity: float = 500.0
    qam: int = 4
    ebn0: list = field(default_factory=lambda: [float(v) for v in range(0, 22, 2)])
    frames: int = 200
    seed: int = 1
    segment_len: int = 2048
    output_dir: str = "out"

    def validate(self) -> ModemConfig:
        """Check every field and return the modem config; raises ConfigError."""
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment: must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if self.qam not in (4, 16):
            raise ConfigError(f"qam: must be 4 or 16, got {self.qam}")
        if self.frames < 1:
            raise ConfigError(f"frames: must be >= 1, got {self.frames}")
        if not self.ebn0:
            raise ConfigError("ebn0: empty range")
        try:
            ChannelSpec(self.channel, self.velocity)
        except ValueError as exc:
            raise ConfigError(f"channel/velocity: {exc}") from None
        try:
            return ModemConfig.build(self.scheme, family=self.pulse, rolloff=self.rolloff, Q=self.Q,
                                     L_us=self.us, M=self.M, N=self.N, cp_len_base=self.cp,
                                     zg_per_edge=self.zg, delta_f=self.delta_f,
                                     carrier_hz=self.carrier_hz)
        except ValueError as exc:
            raise ConfigError(f"modem: {exc}") from None


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def parse_range(text) -> list[float]:
    """``a:step:b`` (inclusive of b), a comma list, or a single value."""
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    if isinstance(text, (int, float)):
        return [float(text)]
    text = str(text).strip()
    try:
        if ":" in text:
            a, step, b = (float(v) for v in text.split(":"))
            if step <= 0 or b < a:
                raise ValueError
            n = int(np.floor((b - a) / step + 1e-9)) + 1
            return [round(a + i * step, 10) for i in range(n)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"ebn0: cannot parse range {text!r} (use a:step:b)") from None


def _coerce(name: str, value):
    kind = _FIELD_TYPES[name]
    try:
        if name == "ebn0":
            return parse_range(value)
        if kind == "int":
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if kind == "float":
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: invalid value {value!r}") from None


def load_config_file(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from None
    try:
        data = yaml.safe_load(text)  # JSON is a subset
    except yaml.YAMLError as exc:
        raise ConfigError(f"config: parse error in {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config: {path} must hold a mapping of flat keys")
    data = {str(k).replace("-", "_"): v for k, v in data.items()}
    unknown = sorted(set(data) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError(f"config: unknown field(s) {', '.join(unknown)}")
    return data


def resolve(file_values: dict | None, overrides: dict) -> ExperimentConfig:
    merged = dict(file_values or {})
    if file_values is not None:
        for name in REQUIRED_IN_FILE:
            if name not in merged and overrides.get(name) is None:
                raise ConfigError(f"{name}: required field missing from config file")
    merged.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**{k: _coerce(k, v) for k, v in merged.items()})


# --- output ----------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def atomic_write(path: Path, text: str) -> None:
    """Write via a temp file in the same directory, then rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def psd_csv(freqs, psd_db) -> str:
    return _csv_text(["freq_hz", "psd_db"], ([_fmt(f), _fmt(p)] for f, p in zip(freqs, psd_db)))


def ber_csv(points) -> str:
    rows = sorted(points, key=lambda p: p.ebn0_db)
    return _csv_text(["ebn0_db", "ber", "bit_errors", "bits_total", "frames", "seed"],
                     ([_fmt(p.ebn0_db), _fmt(p.ber), p.bit_errors, p.bits_total, p.frames, p.seed]
                      for p in rows))


# --- experiments -----------------------------------------------------------

def _json_safe(v):
    if isinstance(v, float) and not np.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    return v


def run_experiment(cfg: ExperimentConfig, modem: ModemConfig, out: Path, log=print) -> dict:
    """Run one experiment, write its CSVs, and return manifest results."""
    if cfg.experiment == "psd":
        f, p = transmit_psd(modem, cfg.frames, cfg.seed, cfg.qam, cfg.segment_len)
        atomic_write(out / "psd.csv", psd_csv(f, p))
        rep = measure_oob(f, p, *oob_window(modem))
        log(f"OOB power {rep.oob_power_db:.2f} dB, {rep.distinct_plateaus} distinct plateau level(s)")
        return {"oob_power_db": rep.oob_power_db, "plateau_levels_db": rep.plateau_levels_db,
                "distinct_plateaus": rep.distinct_plateaus}
    if cfg.experiment == "ber":
        pts = run_ber_curve(modem, ChannelSpec(cfg.channel, cfg.velocity), cfg.ebn0, cfg.frames,
                            cfg.seed, cfg.qam)
        atomic_write(out / "ber.csv", ber_csv(pts))
        for p in pts:
            log(f"Eb/N0 {p.ebn0_db:6.2f} dB  BER {p.ber:.3e}  ({p.bit_errors}/{p.bits_total})")
        return {"ebn0_at_1e-2": ebn0_at_ber(pts, 1e-2), "ebn0_at_1e-3": ebn0_at_ber(pts, 1e-3)}
    if cfg.experiment == "oracle-check":
        res = run_equivalence_suites(frames=min(cfg.frames, 50), seed=cfg.seed)
        width = max(len(r.name) for r in res)
        log(f"{'suite':<{width}}  {'max error':>10}  {'tol':>7}  result")
        for r in res:
            log(f"{r.name:<{width}}  {r.max_err:10.2e}  {r.tol:7.0e}  {'PASS' if r.passed else 'FAIL'}")
        atomic_write(out / "oracle_check.csv", _csv_text(
            ["suite", "max_err", "tol", "passed"],
            ([r.name, _fmt(r.max_err), _fmt(r.tol), int(r.passed)] for r in res)))
        failed = [r.name for r in res if not r.passed]
        if failed:
            raise RuntimeError(f"equivalence suites failed: {', '.join(failed)}")
        return {"suites": len(res), "failed": 0}
    pairs = dump_test_vectors(modem, cfg.seed, out / "vectors", cfg.frames, cfg.qam)
    return {"vector_pairs": len(pairs)}


# --- entry point -----------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ddpulse", description="Delay-Doppler pulse-shaping experiments.")
    ap.add_argument("--config", help="YAML/JSON file with flat keys named like the flags")
    ap.add_argument("--experiment", choices=EXPERIMENTS)
    ap.add_argument("--M", type=int)
    ap.add_argument("--N", type=int)
    ap.add_argument("--scheme", choices=("cps-otfs", "lps-otfs", "oddm"))
    ap.add_argument("--pulse", choices=("rrc", "sinc", "rect"))
    ap.add_argument("--rolloff", type=float)
    ap.add_argument("--Q", type=int)
    ap.add_argument("--us", type=int, help="upsampling factor L_us")
    ap.add_argument("--cp", type=int, help="CP length before upsampling")
    ap.add_argument("--zg", type=int, help="zero guards per delay edge")
    ap.add_argument("--delta-f", dest="delta_f", type=float)
    ap.add_argument("--carrier-hz", dest="carrier_hz", type=float)
    ap.add_argument("--channel", choices=("identity", "awgn", "static", "eva"))
    ap.add_argument("--velocity", type=float, help="km/h")
    ap.add_argument("--qam", type=int, choices=(4, 16))
    ap.add_argument("--ebn0", help="a:step:b in dB, inclusive")
    ap.add_argument("--frames", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--segment-len", dest="segment_len", type=int)
    ap.add_argument("--output-dir", dest="output_dir")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return ap


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    config_path = args.pop("config")
    try:
        file_values = load_config_file(config_path) if config_path else None
        cfg = resolve(file_values, args)
        modem = cfg.validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    out = Path(cfg.output_dir)
    t0 = time.perf_counter()
    try:
        results = run_experiment(cfg, modem, out)
    except Exception as exc:  # noqa: BLE001 - reported as exit status 2
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    manifest = {
        "config": asdict(cfg),
        "config_file": str(config_path) if config_path else None,
        "seed": cfg.seed,
        "version": __version__,
        "numpy_version": np.__version__,
        "wall_time_s": time.perf_counter() - t0,
        "results": _json_safe(results),
    }
    atomic_write(out / "manifest.json", json.dumps(manifest, indent=2, default=float) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
