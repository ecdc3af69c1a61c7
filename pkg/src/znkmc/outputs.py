"""Result persistence: CSV/JSON artifacts and the run manifest.

Every artifact filename embeds the manifest hash of the run it came from,
and the manifest itself echoes the full configuration plus the seed and code
version, so a run can be reproduced byte-for-byte from its manifest alone.
Floats are rendered with a fixed 12-significant-digit format; inf marks a
coherence time beyond the simulated window.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from . import __version__
from .config import RunConfig
from .experiments import CoherencePoint, FitReport, GradientReport, SinglePairResult

__all__ = [
    "manifest_for",
    "manifest_hash",
    "write_manifest",
    "write_pcurve_csv",
    "write_tau_csv",
    "write_single_pair_csv",
    "write_fit_json",
    "artifact_path",
]

P_CURVE_COLUMNS = ("beta", "L", "t", "p", "wilson_lo", "wilson_hi", "n_trials")
TAU_COLUMNS = ("beta", "L", "tau", "ci_lo", "ci_hi")
SINGLE_PAIR_COLUMNS = ("t", "mean_mass", "sem_mass", "mean_spread", "sem_spread")


def _fmt(x) -> str:
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    return format(float(x), ".12g")


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def manifest_hash(cfg: RunConfig) -> str:
    """Hash of the physics-defining config (seed included, execution knobs not)."""
    core = cfg.to_dict()
    core.pop("output_dir", None)
    return hashlib.sha256(canonical_json(core).encode()).hexdigest()[:16]


def manifest_for(cfg: RunConfig, workers: int) -> dict:
    return {
        "manifest_hash": manifest_hash(cfg),
        "config": cfg.to_dict(),
        "code_version": __version__,
        "workers": workers,  # informational; does not affect results or the hash
    }


def artifact_path(outdir: Path, stem: str, cfg: RunConfig, suffix: str) -> Path:
    return Path(outdir) / ("%s_%s%s" % (stem, manifest_hash(cfg), suffix))


def write_manifest(outdir: Path, cfg: RunConfig, workers: int) -> Path:
    path = artifact_path(outdir, "manifest", cfg, ".json")
    path.write_text(json.dumps(manifest_for(cfg, workers), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _write_csv(path: Path, header, rows) -> Path:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return Path(path)


def write_pcurve_csv(path: Path, points: list[CoherencePoint]) -> Path:
    rows = []
    for pt in points:
        for k in range(len(pt.times)):
            rows.append((pt.beta, pt.L, pt.times[k], pt.p[k], pt.wilson_lo[k], pt.wilson_hi[k], pt.n_trials))
    return _write_csv(path, P_CURVE_COLUMNS, rows)


def write_tau_csv(path: Path, points: list[CoherencePoint]) -> Path:
    rows = [
        (pt.beta, pt.L, pt.estimate.tau, pt.estimate.ci_lo, pt.estimate.ci_hi)
        for pt in points
    ]
    return _write_csv(path, TAU_COLUMNS, rows)


def write_single_pair_csv(path: Path, result: SinglePairResult) -> Path:
    rows = list(
        zip(result.times, result.mean_mass, result.sem_mass, result.mean_spread, result.sem_spread)
    )
    return _write_csv(path, SINGLE_PAIR_COLUMNS, rows)


def write_fit_json(path: Path, reports: list[FitReport], gradient: GradientReport | None = None) -> Path:
    doc = {
        "schema_version": 1,
        "reports": [r.to_dict() for r in reports],
    }
    if gradient is not None:
        doc["gradient_fit"] = gradient.to_dict()
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return Path(path)


def read_tau_csv(path: Path) -> list[dict]:
    """Rows of the tau CSV as dicts with float values."""
    text = Path(path).read_text(encoding="utf-8").strip().splitlines()
    if not text or tuple(text[0].split(",")) != TAU_COLUMNS:
        raise ValueError("%s: expected tau CSV header %s" % (path, ",".join(TAU_COLUMNS)))
    rows = []
    for line in text[1:]:
        vals = line.split(",")
        rows.append({k: float(v) for k, v in zip(TAU_COLUMNS, vals)})
    return rows
