"""Run-configuration schema: parsing, validation and canonical serialization.

Configs are YAML with a fixed, versioned schema.  Validation is strict:
unknown keys anywhere are rejected with their dotted path, and lattice
sections are checked against the degeneracy condition before any simulation
starts.  Defect grids may be given as explicit line coordinates or as a
repeating gap pattern expanded deterministically from a start coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import yaml

from .energy import MassVector
from .experiments import FIT_MODELS
from .lattice import DefectLine, LatticeSpec, validate_degeneracy

__all__ = ["ConfigError", "GridPattern", "RunConfig", "parse_config", "serialize_config"]

SCHEMA_VERSION = 1
EXPERIMENTS = ("coherence", "single_pair", "fit", "validate")
_REQUIRED = object()


class ConfigError(ValueError):
    """Configuration rejected; message carries the offending key path."""


def _require(mapping: dict, path: str, key: str, types, default=_REQUIRED):
    if key not in mapping:
        if default is not _REQUIRED:
            return default
        raise ConfigError("%s.%s: required key missing" % (path, key))
    value = mapping[key]
    if not isinstance(value, types):
        raise ConfigError(
            "%s.%s: expected %s, got %r" % (path, key, getattr(types, "__name__", types), value)
        )
    return value


def _reject_unknown(mapping: dict, path: str, known: set[str]) -> None:
    for key in mapping:
        if key not in known:
            raise ConfigError("%s.%s: unknown key" % (path, key))


def _as_float(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("%s: expected a number, got %r" % (path, value))
    return float(value)


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError("%s: expected an integer, got %r" % (path, value))
    return int(value)


@dataclass(frozen=True)
class GridPattern:
    """Defect lines along one direction: explicit or gap-pattern form."""

    lines: tuple[tuple[int, str], ...] | None = None  # (coord, framing)
    gaps: tuple[int, ...] | None = None
    start: int = 0
    framing: str = "+"

    @classmethod
    def parse(cls, raw, path: str) -> "GridPattern | None":
        if raw is None:
            return None
        if not isinstance(raw, dict):
            raise ConfigError("%s: expected a mapping or null" % path)
        _reject_unknown(raw, path, {"lines", "alternating", "start", "framing"})
        framing = _require(raw, path, "framing", str, "+")
        if framing not in ("+", "-"):
            raise ConfigError("%s.framing: must be '+' or '-'" % path)
        if ("lines" in raw) == ("alternating" in raw):
            raise ConfigError("%s: give exactly one of 'lines' or 'alternating'" % path)
        if "lines" in raw:
            if "start" in raw:
                raise ConfigError("%s.start: only valid with 'alternating'" % path)
            entries = raw["lines"]
            if not isinstance(entries, list) or not entries:
                raise ConfigError("%s.lines: expected a non-empty list" % path)
            lines = []
            for i, entry in enumerate(entries):
                if isinstance(entry, dict):
                    _reject_unknown(entry, "%s.lines[%d]" % (path, i), {"coord", "framing"})
                    coord = _as_int(_require(entry, "%s.lines[%d]" % (path, i), "coord", int), path)
                    fr = _require(entry, "%s.lines[%d]" % (path, i), "framing", str, framing)
                    if fr not in ("+", "-"):
                        raise ConfigError("%s.lines[%d].framing: must be '+' or '-'" % (path, i))
                    lines.append((coord, fr))
                else:
                    lines.append((_as_int(entry, "%s.lines[%d]" % (path, i)), framing))
            return cls(lines=tuple(lines), framing=framing)
        gaps = raw["alternating"]
        if not isinstance(gaps, list) or not gaps or not all(isinstance(g, int) and g >= 1 for g in gaps):
            raise ConfigError("%s.alternating: expected a list of gaps >= 1" % path)
        start = _require(raw, path, "start", int, 0)
        return cls(gaps=tuple(gaps), start=int(start), framing=framing)

    def expand(self, L: int, path: str = "grid") -> tuple[DefectLine, ...]:
        """Concrete defect lines for linear size L."""
        if self.lines is not None:
            for coord, _ in self.lines:
                if not 0 <= coord < L:
                    raise ConfigError("%s: line coordinate %d outside [0, %d)" % (path, coord, L))
            return tuple(DefectLine(c, f) for c, f in self.lines)
        coords = []
        c = self.start
        i = 0
        while c < L:
            coords.append(c)
            c += self.gaps[i % len(self.gaps)]
            i += 1
        return tuple(DefectLine(c, self.framing) for c in coords)

    def to_dict(self) -> dict:
        if self.lines is not None:
            entries = [
                coord if fr == self.framing else {"coord": coord, "framing": fr}
                for coord, fr in self.lines
            ]
            return {"lines": entries, "framing": self.framing}
        return {"alternating": list(self.gaps), "start": self.start, "framing": self.framing}


@dataclass(frozen=True)
class CoherenceSection:
    betas: tuple[float, ...]
    sizes: tuple[int, ...] | None
    trials: int = 40_000
    p_star: float = 0.99
    t0: float = 1.0
    ratio: float = 1.3
    max_time: float = 60.0

    def to_dict(self) -> dict:
        d = {
            "betas": list(self.betas), "trials": self.trials, "p_star": self.p_star,
            "t0": self.t0, "ratio": self.ratio, "max_time": self.max_time,
        }
        if self.sizes is not None:
            d["sizes"] = list(self.sizes)
        return d


@dataclass(frozen=True)
class SinglePairSection:
    beta: float
    samples: int = 1000
    t_min: float = 0.25
    t_max: float = 50.0
    points: int = 24

    def to_dict(self) -> dict:
        return {
            "beta": self.beta, "samples": self.samples,
            "t_min": self.t_min, "t_max": self.t_max, "points": self.points,
        }


@dataclass(frozen=True)
class FitSection:
    input: str
    models: tuple[str, ...]
    L: int | None = None

    def to_dict(self) -> dict:
        d = {"input": self.input, "models": list(self.models)}
        if self.L is not None:
            d["L"] = self.L
        return d


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    N: int
    L: int
    M: int
    vertical: GridPattern | None
    horizontal: GridPattern | None
    J: tuple[float, ...]
    seed: int
    output_dir: str | None = None
    coherence: CoherenceSection | None = None
    single_pair: SinglePairSection | None = None
    fit: FitSection | None = None

    def mass_vector(self) -> MassVector:
        return MassVector(self.J)

    def lattice_spec(self, L: int | None = None) -> LatticeSpec:
        """Concrete spec for size L (defaults to the configured size).

        The gap-pattern grids are re-expanded per size, so sweeps over L keep
        the same pattern; degeneracy violations surface as ConfigError.
        """
        L = self.L if L is None else L
        v = self.vertical.expand(L, "lattice.vertical") if self.vertical else ()
        h = self.horizontal.expand(L, "lattice.horizontal") if self.horizontal else ()
        try:
            spec = LatticeSpec(N=self.N, L=L, M=self.M, v_lines=v, h_lines=h)
        except ValueError as exc:
            raise ConfigError("lattice: %s" % exc) from exc
        report = validate_degeneracy(spec)
        if not report.ok:
            raise ConfigError("lattice: %s" % report)
        return spec

    def sweep_sizes(self) -> tuple[int, ...]:
        if self.coherence is not None and self.coherence.sizes is not None:
            return self.coherence.sizes
        return (self.L,)

    def to_dict(self) -> dict:
        lattice = {"N": self.N, "L": self.L, "M": self.M}
        if self.vertical is not None:
            lattice["vertical"] = self.vertical.to_dict()
        if self.horizontal is not None:
            lattice["horizontal"] = self.horizontal.to_dict()
        doc = {
            "schema_version": SCHEMA_VERSION,
            "experiment": self.experiment,
            "seed": self.seed,
            "lattice": lattice,
            "energy": {"J": list(self.J)},
        }
        if self.output_dir is not None:
            doc["output_dir"] = self.output_dir
        if self.coherence is not None:
            doc["coherence"] = self.coherence.to_dict()
        if self.single_pair is not None:
            doc["single_pair"] = self.single_pair.to_dict()
        if self.fit is not None:
            doc["fit"] = self.fit.to_dict()
        return doc


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a YAML run configuration."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("not valid YAML: %s" % exc) from exc
    if not isinstance(doc, dict):
        raise ConfigError("top level: expected a mapping")
    _reject_unknown(
        doc,
        "config",
        {"schema_version", "experiment", "seed", "output_dir", "lattice", "energy",
         "coherence", "single_pair", "fit"},
    )
    version = _require(doc, "config", "schema_version", int)
    if version != SCHEMA_VERSION:
        raise ConfigError("config.schema_version: expected %d, got %r" % (SCHEMA_VERSION, version))
    experiment = _require(doc, "config", "experiment", str)
    if experiment not in EXPERIMENTS:
        raise ConfigError("config.experiment: %r not one of %s" % (experiment, list(EXPERIMENTS)))
    seed = _as_int(_require(doc, "config", "seed", int, 0), "config.seed")
    output_dir = _require(doc, "config", "output_dir", str, None)

    lattice = _require(doc, "config", "lattice", dict)
    _reject_unknown(lattice, "config.lattice", {"N", "L", "M", "vertical", "horizontal"})
    N = _as_int(_require(lattice, "config.lattice", "N", int), "config.lattice.N")
    L = _as_int(_require(lattice, "config.lattice", "L", int), "config.lattice.L")
    M = _as_int(_require(lattice, "config.lattice", "M", int, 1), "config.lattice.M")
    vertical = GridPattern.parse(lattice.get("vertical"), "config.lattice.vertical")
    horizontal = GridPattern.parse(lattice.get("horizontal"), "config.lattice.horizontal")

    energy = _require(doc, "config", "energy", dict)
    _reject_unknown(energy, "config.energy", {"J"})
    raw_j = _require(energy, "config.energy", "J", list)
    if len(raw_j) != N - 1:
        raise ConfigError("config.energy.J: expected %d masses for N=%d, got %d" % (N - 1, N, len(raw_j)))
    J = tuple(_as_float(j, "config.energy.J[%d]" % i) for i, j in enumerate(raw_j))
    if any(j <= 0 for j in J):
        raise ConfigError("config.energy.J: masses must be positive")

    coherence = None
    if "coherence" in doc:
        sec = _require(doc, "config", "coherence", dict)
        _reject_unknown(sec, "config.coherence", {"betas", "sizes", "trials", "p_star", "t0", "ratio", "max_time"})
        betas = _require(sec, "config.coherence", "betas", list)
        if not betas:
            raise ConfigError("config.coherence.betas: must be non-empty")
        sizes = sec.get("sizes")
        if sizes is not None and (not isinstance(sizes, list) or not sizes):
            raise ConfigError("config.coherence.sizes: expected a non-empty list")
        coherence = CoherenceSection(
            betas=tuple(_as_float(b, "config.coherence.betas[%d]" % i) for i, b in enumerate(betas)),
            sizes=tuple(_as_int(s, "config.coherence.sizes") for s in sizes) if sizes else None,
            trials=_as_int(_require(sec, "config.coherence", "trials", int, 40_000), "config.coherence.trials"),
            p_star=_as_float(_require(sec, "config.coherence", "p_star", (int, float), 0.99), "config.coherence.p_star"),
            t0=_as_float(_require(sec, "config.coherence", "t0", (int, float), 1.0), "config.coherence.t0"),
            ratio=_as_float(_require(sec, "config.coherence", "ratio", (int, float), 1.3), "config.coherence.ratio"),
            max_time=_as_float(_require(sec, "config.coherence", "max_time", (int, float), 60.0), "config.coherence.max_time"),
        )
        if not 0 < coherence.p_star < 1:
            raise ConfigError("config.coherence.p_star: must be in (0, 1)")
        if coherence.trials < 100:
            raise ConfigError("config.coherence.trials: must be >= 100")
        if coherence.ratio <= 1:
            raise ConfigError("config.coherence.ratio: must be > 1")

    single_pair = None
    if "single_pair" in doc:
        sec = _require(doc, "config", "single_pair", dict)
        _reject_unknown(sec, "config.single_pair", {"beta", "samples", "t_min", "t_max", "points"})
        single_pair = SinglePairSection(
            beta=_as_float(_require(sec, "config.single_pair", "beta", (int, float)), "config.single_pair.beta"),
            samples=_as_int(_require(sec, "config.single_pair", "samples", int, 1000), "config.single_pair.samples"),
            t_min=_as_float(_require(sec, "config.single_pair", "t_min", (int, float), 0.25), "config.single_pair.t_min"),
            t_max=_as_float(_require(sec, "config.single_pair", "t_max", (int, float), 50.0), "config.single_pair.t_max"),
            points=_as_int(_require(sec, "config.single_pair", "points", int, 24), "config.single_pair.points"),
        )
        if single_pair.beta <= 0:
            raise ConfigError("config.single_pair.beta: must be positive")
        if not 0 < single_pair.t_min < single_pair.t_max:
            raise ConfigError("config.single_pair: need 0 < t_min < t_max")

    fit_section = None
    if "fit" in doc:
        sec = _require(doc, "config", "fit", dict)
        _reject_unknown(sec, "config.fit", {"input", "models", "L"})
        models = _require(sec, "config.fit", "models", list)
        for m in models:
            if m not in FIT_MODELS:
                raise ConfigError("config.fit.models: unknown model %r" % m)
        fit_section = FitSection(
            input=_require(sec, "config.fit", "input", str),
            models=tuple(models),
            L=_as_int(sec["L"], "config.fit.L") if "L" in sec else None,
        )

    needed = {"coherence": coherence, "single_pair": single_pair, "fit": fit_section}
    if experiment in needed and needed[experiment] is None:
        raise ConfigError("config.%s: section required for experiment %r" % (experiment, experiment))

    cfg = RunConfig(
        experiment=experiment, N=N, L=L, M=M, vertical=vertical, horizontal=horizontal,
        J=J, seed=seed, output_dir=output_dir,
        coherence=coherence, single_pair=single_pair, fit=fit_section,
    )
    if experiment != "fit":
        for size in cfg.sweep_sizes():
            cfg.lattice_spec(size)  # surfaces geometry/degeneracy violations now
    return cfg


def serialize_config(cfg: RunConfig) -> str:
    """Canonical YAML; parse(serialize(cfg)) == cfg."""
    return yaml.safe_dump(cfg.to_dict(), sort_keys=True, default_flow_style=False)
