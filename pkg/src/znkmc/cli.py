"""Command-line surface and run orchestration.

Subcommands mirror the experiment kinds: ``validate`` checks a config and
writes only the manifest, ``coherence`` produces the p-curve and tau CSVs,
``single-pair`` the mass/spread CSV, and ``fit`` turns a tau CSV into a fit
JSON.  Flags override config-file values, which override defaults.  Exit
codes: 0 ok, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import experiments, outputs
from .config import ConfigError, RunConfig, parse_config
from .engine import observables  # noqa: F401  (re-exported for interactive use)

__all__ = ["main", "run"]


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="znkmc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("validate", "coherence", "single-pair", "fit"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="YAML run configuration")
        sp.add_argument("--seed", type=int, default=None, help="override config seed")
        sp.add_argument("--out", default=None, help="output directory (or $ZNKMC_OUT)")
        sp.add_argument("--workers", type=int, default=1, help="trial worker processes")
        if name == "coherence":
            sp.add_argument("--trials", type=int, default=None, help="override trials per point")
        if name == "single-pair":
            sp.add_argument("--samples", type=int, default=None, help="override sample count")
        if name == "validate":
            sp.add_argument("--dump-matrices", action="store_true",
                            help="also write W, B and the logical functionals as text")
    return p


def _load_config(args) -> RunConfig:
    text = Path(args.config).read_text(encoding="utf-8")
    cfg = parse_config(text)
    command = args.command.replace("-", "_")
    if command != "validate" and cfg.experiment != command:
        raise ConfigError(
            "config.experiment: %r does not match subcommand %r" % (cfg.experiment, args.command)
        )
    if args.seed is not None:
        cfg = _replace(cfg, seed=args.seed)
    if getattr(args, "trials", None) is not None:
        cfg = _replace(cfg, coherence=_replace(cfg.coherence, trials=args.trials))
    if getattr(args, "samples", None) is not None:
        cfg = _replace(cfg, single_pair=_replace(cfg.single_pair, samples=args.samples))
    if args.out is not None:
        cfg = _replace(cfg, output_dir=args.out)
    return cfg


def _replace(obj, **kw):
    from dataclasses import replace

    return replace(obj, **kw)


def _outdir(cfg: RunConfig) -> Path:
    out = cfg.output_dir or os.environ.get("ZNKMC_OUT") or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def run(cfg: RunConfig, workers: int = 1, dump_matrices: bool = False) -> list[Path]:
    """Execute the configured experiment; returns the written artifact paths."""
    outdir = _outdir(cfg)
    written = [outputs.write_manifest(outdir, cfg, workers)]
    if cfg.experiment == "validate":
        if dump_matrices:
            lat = experiments._cached_lattice(cfg.lattice_spec())
            for stem, mat in (("W", lat.W.toarray()), ("B", lat.B.toarray()), ("phi", np.vstack(lat.phi))):
                path = outputs.artifact_path(outdir, stem, cfg, ".txt")
                np.savetxt(path, mat, fmt="%d")
                written.append(path)
        return written

    if cfg.experiment == "coherence":
        sec = cfg.coherence
        ccfg = experiments.CoherenceConfig(
            specs=tuple(cfg.lattice_spec(L) for L in cfg.sweep_sizes()),
            J=cfg.mass_vector(),
            betas=sec.betas,
            trials=sec.trials,
            p_star=sec.p_star,
            t0=sec.t0,
            ratio=sec.ratio,
            max_time=sec.max_time,
            master_seed=cfg.seed,
        )
        points = experiments.coherence_time(ccfg, workers=workers)
        written.append(outputs.write_pcurve_csv(outputs.artifact_path(outdir, "p_curve", cfg, ".csv"), points))
        written.append(outputs.write_tau_csv(outputs.artifact_path(outdir, "tau", cfg, ".csv"), points))
        return written

    if cfg.experiment == "single_pair":
        sec = cfg.single_pair
        scfg = experiments.SinglePairConfig(
            spec=cfg.lattice_spec(),
            J=cfg.mass_vector(),
            beta=sec.beta,
            samples=sec.samples,
            t_min=sec.t_min,
            t_max=sec.t_max,
            n_points=sec.points,
            master_seed=cfg.seed,
        )
        result = experiments.single_pair(scfg, workers=workers)
        written.append(
            outputs.write_single_pair_csv(outputs.artifact_path(outdir, "single_pair", cfg, ".csv"), result)
        )
        return written

    if cfg.experiment == "fit":
        written.append(_run_fit(cfg, outdir))
        return written

    raise ConfigError("config.experiment: unsupported %r" % cfg.experiment)


def _run_fit(cfg: RunConfig, outdir: Path) -> Path:
    rows = outputs.read_tau_csv(Path(cfg.fit.input))
    usable = [r for r in rows if np.isfinite(r["tau"]) and r["tau"] > 0]
    if not usable:
        raise ConfigError("config.fit.input: no finite tau values to fit")
    reports: list[experiments.FitReport] = []
    gradient = None
    for model in cfg.fit.models:
        if model == "power_law":
            by_beta: dict[float, list] = {}
            for r in usable:
                by_beta.setdefault(r["beta"], []).append((r["L"], r["tau"]))
            for beta in sorted(by_beta):
                pts = by_beta[beta]
                if len(pts) >= 3:
                    reports.append(experiments.fit(pts, "power_law", meta={"beta": beta}))
            grads = [r for r in reports if r.model == "power_law"]
            if len(grads) >= 3:
                gradient = experiments.gradient_vs_beta(grads)
        else:
            sizes = sorted({r["L"] for r in usable})
            if cfg.fit.L is not None:
                chosen = float(cfg.fit.L)
            elif len(sizes) == 1:
                chosen = sizes[0]
            else:
                raise ConfigError(
                    "config.fit.L: tau CSV has several sizes %s; pick one for %s" % (sizes, model)
                )
            pts = [(r["beta"], r["tau"]) for r in usable if r["L"] == chosen]
            reports.append(experiments.fit(pts, model, meta={"L": chosen}))
    return outputs.write_fit_json(outputs.artifact_path(outdir, "fit", cfg, ".json"), reports, gradient)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _load_config(args)
    except (ConfigError, FileNotFoundError) as exc:
        print("configuration error: %s" % exc, file=sys.stderr)
        return 1
    try:
        written = run(cfg, workers=args.workers, dump_matrices=getattr(args, "dump_matrices", False))
    except ConfigError as exc:
        print("configuration error: %s" % exc, file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print("runtime error: %s" % exc, file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
