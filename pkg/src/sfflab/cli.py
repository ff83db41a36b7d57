"""Command-line entry point: experiment configuration, execution, and CSV emission.

Subcommands: sample-wigner, sample-mono, strip, predict, verify, figures.
Configuration comes from flags plus an optional plain-text key=value file
(flags override the file).  Every output CSV opens with `# seed=` and
`# config=` comment lines and is byte-identical for identical configurations,
including across worker counts.

Exit codes: 0 success, 1 invalid configuration, 2 runtime failure,
3 verify-suite failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import verify as verify_mod
from .csvio import format_real, write_csv
from .ensembles import EnsembleSpec, EntryLaw, ParamLaw
from .montecarlo import (
    run_mono_coupled,
    run_mono_experiment,
    run_strip_experiment,
    run_wigner_experiment,
)
from .spectral import make_grid
from .theory import ModelConfig, build_prediction, curve_E_wig, curve_S_res, curve_S_wig


class ConfigError(Exception):
    """Invalid run configuration; message names the failing field."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with code 2
        raise ConfigError(message)


@dataclass
class RunConfig:
    command: str
    size: int = 100
    beta: int = 2
    law: str = "gaussian"
    seed: int = 0x5EED
    t_min: float = 1.0
    t_max: float | None = None
    points: int = 120
    spacing: str = "log"
    samples: int = 500
    pairs: int = 500
    params: int = 500
    counts: tuple[int, ...] = (2, 10, 500)
    mode: str = "wigner"
    coupled: bool = False
    variant: str = "normalized_k2"
    out_dir: str = "."
    workers: int = 1
    quick: bool = False
    fast: bool = False

    def validate(self) -> "RunConfig":
        if self.size < 2:
            raise ConfigError(f"size: need >= 2, got {self.size}")
        if self.beta not in (1, 2):
            raise ConfigError(f"beta: must be 1 or 2, got {self.beta}")
        if self.law not in ("gaussian", "rademacher", "uniform", "mixture"):
            raise ConfigError(f"law: unknown entry law {self.law!r}")
        if self.t_min <= 0:
            raise ConfigError(f"t_min: must be positive, got {self.t_min}")
        if self.t_max is not None and self.t_max <= self.t_min:
            raise ConfigError(f"t_max: must exceed t_min, got {self.t_max}")
        if self.points < 2:
            raise ConfigError(f"points: need >= 2, got {self.points}")
        if self.spacing not in ("log", "linear"):
            raise ConfigError(f"spacing: must be log or linear, got {self.spacing!r}")
        for name in ("samples", "pairs", "params", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name}: must be >= 1, got {getattr(self, name)}")
        if not self.counts or min(self.counts) < 1:
            raise ConfigError(f"counts: need nonempty positive list, got {self.counts}")
        if self.mode not in ("wigner", "mono"):
            raise ConfigError(f"mode: must be wigner or mono, got {self.mode!r}")
        return self

    def resolved_t_max(self) -> float:
        return self.t_max if self.t_max is not None else math.pi * self.size

    def grid(self) -> np.ndarray:
        return make_grid(self.t_min, self.resolved_t_max(), self.points, self.spacing)

    def ensemble(self) -> EnsembleSpec:
        return EnsembleSpec(n=self.size, law=EntryLaw(kind=self.law, beta=self.beta),
                            seed=self.seed)

    def model(self, param_law: ParamLaw | None = None) -> ModelConfig:
        spec = self.ensemble()
        return ModelConfig(n=self.size, beta=self.beta, kappa4=spec.kappa4,
                           variant=self.variant, param_law=param_law)

    def canonical(self) -> str:
        # Only fields that shape the run's output; out_dir and workers are
        # execution details and must not perturb the bytes.
        grid_fields = ("size", "beta", "law", "seed", "t_min", "t_max",
                       "points", "spacing")
        relevant = {
            "sample-wigner": grid_fields + ("samples",),
            "sample-mono": grid_fields + ("pairs", "params", "coupled"),
            "strip": grid_fields + ("counts", "mode"),
            "predict": grid_fields + ("variant",),
            "verify": ("seed", "quick"),
            "figures": ("seed", "law", "beta", "fast"),
        }[self.command]
        parts = [f"command={self.command}"]
        for key in sorted(relevant):
            val = self.resolved_t_max() if key == "t_max" else getattr(self, key)
            if isinstance(val, bool):
                text = "true" if val else "false"
            elif isinstance(val, float):
                text = format_real(val)
            elif isinstance(val, tuple):
                text = ",".join(str(v) for v in val)
            elif key == "seed":
                text = f"{val:#x}"
            else:
                text = str(val)
            parts.append(f"{key}={text}")
        return " ".join(parts)


_FIELD_PARSERS = {
    "size": int, "beta": int, "seed": lambda s: int(s, 0), "points": int,
    "samples": int, "pairs": int, "params": int, "workers": int,
    "t_min": float, "t_max": float,
    "counts": lambda s: tuple(int(v) for v in s.split(",")),
    "coupled": lambda s: s.lower() in ("1", "true", "yes"),
    "quick": lambda s: s.lower() in ("1", "true", "yes"),
    "fast": lambda s: s.lower() in ("1", "true", "yes"),
}


def _load_config_file(path: str) -> dict[str, object]:
    out: dict[str, object] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for raw in fh:
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"config file: expected key=value, got {line!r}")
                key, value = (s.strip() for s in line.split("=", 1))
                key = key.replace("-", "_")
                if not hasattr(RunConfig, key) and key not in RunConfig.__dataclass_fields__:
                    raise ConfigError(f"config file: unknown key {key!r}")
                out[key] = _FIELD_PARSERS.get(key, str)(value)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    return out


def build_parser() -> _Parser:
    parser = _Parser(prog="sfflab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value configuration file; flags override it")
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("--seed", type=lambda s: int(s, 0))
    common.add_argument("--size", type=int, help="matrix dimension N")
    common.add_argument("--beta", type=int, choices=(1, 2))
    common.add_argument("--law", choices=("gaussian", "rademacher", "uniform", "mixture"))
    common.add_argument("--t-min", dest="t_min", type=float)
    common.add_argument("--t-max", dest="t_max", type=float)
    common.add_argument("--points", type=int)
    common.add_argument("--spacing", choices=("log", "linear"))
    common.add_argument("--workers", type=int)

    p = sub.add_parser("sample-wigner", parents=[common])
    p.add_argument("--samples", type=int)
    p = sub.add_parser("sample-mono", parents=[common])
    p.add_argument("--pairs", type=int)
    p.add_argument("--params", type=int)
    p.add_argument("--coupled", action="store_true", default=None)
    p = sub.add_parser("strip", parents=[common])
    p.add_argument("--mode", choices=("wigner", "mono"))
    p.add_argument("--counts", type=lambda s: tuple(int(v) for v in s.split(",")))
    p = sub.add_parser("predict", parents=[common])
    p.add_argument("--variant", choices=("normalized_k2", "normalized_k", "unnormalized_plane"))
    p = sub.add_parser("verify", parents=[common])
    p.add_argument("--quick", action="store_true", default=None)
    p = sub.add_parser("figures", parents=[common])
    p.add_argument("--fast", action="store_true", default=None)
    return parser


_COMMAND_DEFAULTS = {
    "sample-wigner": {"size": 500, "samples": 500},
    "sample-mono": {"size": 100, "pairs": 500, "params": 500, "t_max": 50.0, "points": 60},
    "strip": {"size": 100},
    "predict": {"size": 100, "t_max": 1000.0},
    "verify": {},
    "figures": {},
}


def resolve_config(argv: list[str]) -> RunConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    values = dict(_COMMAND_DEFAULTS.get(ns.command, {}))
    config_path = getattr(ns, "config", None)
    if config_path:
        values.update(_load_config_file(config_path))
    for key, val in vars(ns).items():
        if key in ("command", "config") or val is None:
            continue
        values[key] = val
    if ns.command == "strip" and "counts" not in values:
        values["counts"] = (5, 20, 1000) if values.get("mode") == "mono" else (2, 10, 500)
    cfg = RunConfig(command=ns.command, **values)
    return cfg.validate()


def _out_path(cfg: RunConfig, name: str) -> str:
    os.makedirs(cfg.out_dir, exist_ok=True)
    return os.path.join(cfg.out_dir, name)


def cmd_sample_wigner(cfg: RunConfig) -> int:
    grid = cfg.grid()
    result = run_wigner_experiment(cfg.ensemble(), grid, cfg.samples,
                                   workers=cfg.workers, tag="wigner")
    write_csv(_out_path(cfg, "wigner_sff.csv"), cfg.seed, cfg.canonical(),
              ["t", "single", "mean", "std", "stderr"],
              [grid, result.single, result.mean, result.std, result.stderr])
    return 0


def cmd_sample_mono(cfg: RunConfig) -> int:
    grid = cfg.grid()
    law = ParamLaw.uniform_sphere(2)
    if cfg.coupled:
        result = run_mono_coupled(cfg.ensemble(), law, grid, cfg.pairs,
                                  workers=cfg.workers)
        write_csv(_out_path(cfg, "mono_coupled.csv"), cfg.seed, cfg.canonical(),
                  ["t", "single", "mean", "std", "stderr"],
                  [grid, result.single, result.mean, result.std, result.stderr])
        return 0
    result = run_mono_experiment(cfg.ensemble(), law, grid, cfg.pairs, cfg.params,
                                 workers=cfg.workers)
    write_csv(_out_path(cfg, "mono_moments.csv"), cfg.seed, cfg.canonical(),
              ["t", "mean_h_mean_s", "mean_h_var_s", "var_h_mean_s",
               "se_mean_h_mean_s", "se_mean_h_var_s", "se_var_h_mean_s"],
              [grid, result.mean_h_mean_s, result.mean_h_var_s, result.var_h_mean_s,
               result.se_mean_h_mean_s, result.se_mean_h_var_s, result.se_var_h_mean_s])
    return 0


def cmd_strip(cfg: RunConfig) -> int:
    grid = cfg.grid()
    law = ParamLaw.uniform_sphere(2) if cfg.mode == "mono" else None
    result = run_strip_experiment(cfg.ensemble(), law, grid, list(cfg.counts), tag="strip")
    model = cfg.model(ParamLaw.uniform_sphere(2))
    ewig = curve_E_wig(grid, model).columns["e_wig"]
    swig = curve_S_wig(grid, model).columns["s_wig"]
    sres = curve_S_res(grid, model).columns["s_res"] if cfg.mode == "mono" else None
    header = ["t"]
    cols: list[np.ndarray] = [grid]
    for c in result.counts:
        header.append(f"mean_n{c}")
        cols.append(result.means[c])
    for c in result.counts:
        width = swig / math.sqrt(c)
        if sres is not None:
            width = np.maximum(width, sres)
        header += [f"band_lo_n{c}", f"band_hi_n{c}"]
        cols += [ewig - width, ewig + width]
    write_csv(_out_path(cfg, "strip.csv"), cfg.seed, cfg.canonical(), header, cols)
    return 0


def cmd_predict(cfg: RunConfig) -> int:
    grid = cfg.grid()
    if cfg.variant == "unnormalized_plane":
        law: ParamLaw | None = ParamLaw.plane_annulus()
    else:
        law = ParamLaw.uniform_sphere(2)
    curve = build_prediction(grid, cfg.model(law))
    header = ["t"] + list(curve.columns)
    cols = [grid] + [curve.columns[name] for name in curve.columns]
    write_csv(_out_path(cfg, "predict.csv"), cfg.seed, cfg.canonical(), header, cols)
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    results = verify_mod.run_all(points=10 if cfg.quick else 12, quick=cfg.quick)
    report = verify_mod.render_report(results)
    path = _out_path(cfg, "verify_report.txt")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report)
    sys.stdout.write(report)
    return 0 if all(r.ok for r in results) else 3


def cmd_figures(cfg: RunConfig) -> int:
    fast = cfg.fast
    base = dict(seed=cfg.seed, workers=cfg.workers, law=cfg.law, beta=cfg.beta)
    runs = [
        RunConfig(command="sample-wigner", out_dir=os.path.join(cfg.out_dir, "fig1"),
                  size=100 if fast else 500, samples=60 if fast else 500,
                  points=60 if fast else 120, **base),
        RunConfig(command="sample-wigner", out_dir=os.path.join(cfg.out_dir, "fig2"),
                  size=100, samples=100 if fast else 2000, t_max=300.0,
                  points=60, **base),
        RunConfig(command="sample-mono", out_dir=os.path.join(cfg.out_dir, "fig2"),
                  size=100, pairs=8 if fast else 100, params=8 if fast else 200,
                  t_min=2.0, t_max=50.0, points=40, **base),
        RunConfig(command="predict", out_dir=os.path.join(cfg.out_dir, "fig2"),
                  size=100, t_max=1000.0, points=120, **base),
        RunConfig(command="strip", out_dir=os.path.join(cfg.out_dir, "fig3_wigner"),
                  size=100, mode="wigner", counts=(2, 10, 60) if fast else (2, 10, 500),
                  points=60, **base),
        RunConfig(command="strip", out_dir=os.path.join(cfg.out_dir, "fig3_mono"),
                  size=100, mode="mono", counts=(5, 20, 60) if fast else (5, 20, 1000),
                  t_min=2.0, t_max=50.0, points=40, **base),
    ]
    dispatch = {"sample-wigner": cmd_sample_wigner, "sample-mono": cmd_sample_mono,
                "strip": cmd_strip, "predict": cmd_predict}
    for run in runs:
        code = dispatch[run.command](run.validate())
        if code != 0:
            return code
    return 0


_DISPATCH = {
    "sample-wigner": cmd_sample_wigner,
    "sample-mono": cmd_sample_mono,
    "strip": cmd_strip,
    "predict": cmd_predict,
    "verify": cmd_verify,
    "figures": cmd_figures,
}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = resolve_config(argv)
    except ConfigError as exc:
        print(f"sfflab: invalid configuration: {exc}", file=sys.stderr)
        return 1
    try:
        return _DISPATCH[cfg.command](cfg)
    except ConfigError as exc:
        print(f"sfflab: invalid configuration: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"sfflab: runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
