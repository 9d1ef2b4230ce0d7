"""Run configuration: flat "section.key = value" files plus overrides.

The grammar is one assignment per line, '#' starts a comment, keys are
dot-separated and flat (no nesting).  Command-line --set overrides are applied
after the file.  Unknown keys and malformed values raise ConfigError.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .energy import MaterialParams, ModelConfig, MODELS
from .errors import ConfigError
from .geometry import FrameGrid, SurfaceChart, make_chart

__all__ = ["RunConfig", "parse_config_file", "parse_assignment", "DEFAULTS"]


def _floats(text):
    return tuple(float(x) for x in str(text).split(",") if str(x).strip())


def _ints(text):
    return tuple(int(x) for x in str(text).split(",") if str(x).strip())


# key -> (coercion, default); None default means "unset"
DEFAULTS = {
    "chart.kind": (str, "plate"),
    "chart.radius": (float, None),
    "chart.x1_min": (float, None),
    "chart.x1_max": (float, None),
    "chart.x2_min": (float, None),
    "chart.x2_max": (float, None),
    "chart.path": (str, None),
    "chart.derivative_mode": (str, "closed-form"),
    "chart.c0": (float, 1e-8),
    "model.kind": (str, "modified-h5"),
    "model.h": (float, 0.05),
    "model.h_sweep": (_floats, None),
    "material.mu": (float, 1.0),
    "material.lambda": (float, 1.0),
    "material.Lc": (float, 0.1),
    "material.b1": (float, 1.0),
    "material.b2": (float, 1.0),
    "material.b3": (float, 1.0),
    "load.kind": (str, "normal"),
    "load.magnitude": (float, 1.0),
    "load.fx": (float, 0.0),
    "load.fy": (float, 0.0),
    "load.fz": (float, 0.0),
    "load.path": (str, None),
    "grid.n1": (int, 33),
    "grid.n2": (int, 33),
    "grid.sweep": (_ints, (17, 33, 65)),
    "solver.tol": (float, 1e-10),
    "solver.max_iter": (int, 0),
    "solver.constraint_warn": (float, 1e-8),
    "compare.models": (str, "koiter,modified-h5"),
    "oracle.fields": (int, 5),
    "oracle.points": (int, 3),
    "oracle.t_values": (_floats, (1e-2, 1e-3, 1e-4)),
    "oracle.min_slope": (float, 0.9),
    "seed": (int, 0),
}


def parse_assignment(line: str):
    """Parse one 'key = value' assignment; returns (key, raw_value)."""
    if "=" not in line:
        raise ConfigError(f"expected 'key = value', got {line!r}")
    key, _, raw = line.partition("=")
    return key.strip(), raw.strip()


def parse_config_file(path) -> dict:
    """Read a flat key=value config file into a raw string dict."""
    raw = {}
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                stripped = line.split("#", 1)[0].strip()
                if not stripped:
                    continue
                try:
                    key, val = parse_assignment(stripped)
                except ConfigError as exc:
                    raise ConfigError(f"{path}:{lineno}: {exc}") from None
                raw[key] = val
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return raw


@dataclass
class RunConfig:
    """Typed view over the flat configuration."""

    values: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path=None, overrides=(), seed=None) -> "RunConfig":
        raw = parse_config_file(path) if path else {}
        for item in overrides:
            key, val = parse_assignment(item)
            raw[key] = val
        values = {}
        for key, (coerce, default) in DEFAULTS.items():
            if key in raw:
                try:
                    values[key] = coerce(raw.pop(key))
                except (TypeError, ValueError) as exc:
                    raise ConfigError(f"bad value for {key}: {exc}") from None
            else:
                values[key] = default
        if raw:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(raw))}")
        if seed is not None:
            values["seed"] = int(seed)
        cfg = cls(values)
        cfg.validate()
        return cfg

    def __getitem__(self, key):
        return self.values[key]

    def validate(self):
        v = self.values
        if v["model.kind"] not in MODELS:
            raise ConfigError(f"model.kind must be one of {MODELS}")
        if v["chart.kind"] not in ("plate", "cylinder", "sphere", "graph", "tabulated"):
            raise ConfigError("chart.kind must be plate|cylinder|sphere|graph|tabulated")
        if v["chart.kind"] in ("graph", "tabulated") and not v["chart.path"]:
            raise ConfigError(f"chart.kind={v['chart.kind']} requires chart.path")
        if v["load.kind"] not in ("normal", "constant", "csv", "none"):
            raise ConfigError("load.kind must be normal|constant|csv|none")
        if v["load.kind"] == "csv" and not v["load.path"]:
            raise ConfigError("load.kind=csv requires load.path")
        if v["grid.n1"] < 2 or v["grid.n2"] < 2:
            raise ConfigError("grid sizes must be at least 2")
        if not v["grid.sweep"]:
            raise ConfigError("grid.sweep must be non-empty")
        if not v["model.h"] > 0:
            raise ConfigError("model.h must be positive")
        try:
            self.material()
        except ValueError as exc:
            raise ConfigError(f"material violates {exc}" if "violates" not in str(exc)
                              else str(exc)) from None

    # --- builders ---------------------------------------------------------
    def material(self) -> MaterialParams:
        v = self.values
        return MaterialParams(mu=v["material.mu"], lam=v["material.lambda"],
                              Lc=v["material.Lc"], b1=v["material.b1"],
                              b2=v["material.b2"], b3=v["material.b3"]).validate()

    def chart(self) -> SurfaceChart:
        v = self.values
        params = {}
        for key in ("x1_min", "x1_max", "x2_min", "x2_max"):
            if v[f"chart.{key}"] is not None:
                params[key] = v[f"chart.{key}"]
        params["c0"] = v["chart.c0"]
        params["derivative_mode"] = v["chart.derivative_mode"]
        if v["chart.kind"] == "cylinder":
            params["radius"] = v["chart.radius"] if v["chart.radius"] else 2.0
        elif v["chart.kind"] == "sphere":
            params["radius"] = v["chart.radius"] if v["chart.radius"] else 1.0
        elif v["chart.kind"] in ("graph", "tabulated"):
            params["path"] = v["chart.path"]
        try:
            return make_chart(v["chart.kind"], **params)
        except (ValueError, OSError) as exc:
            raise ConfigError(f"chart: {exc}") from None

    def model_config(self, model=None, h=None) -> ModelConfig:
        v = self.values
        return ModelConfig(model=model or v["model.kind"],
                           h=h if h is not None else v["model.h"],
                           material=self.material(),
                           constraint_warn_threshold=v["solver.constraint_warn"])

    def load_array(self, fg: FrameGrid) -> np.ndarray | None:
        v = self.values
        kind = v["load.kind"]
        if kind == "none":
            return None
        if kind == "normal":
            return v["load.magnitude"] * fg.n0
        if kind == "constant":
            f = np.array([v["load.fx"], v["load.fy"], v["load.fz"]])
            return np.broadcast_to(f, (fg.n1, fg.n2, 3)).copy()
        # csv field: i,j,x1,x2,f1,f2,f3
        try:
            with open(v["load.path"], newline="") as fh:
                rows = list(csv.reader(fh))
        except OSError as exc:
            raise ConfigError(f"cannot read load {v['load.path']}: {exc}") from None
        if not rows or [h.strip() for h in rows[0]] != ["i", "j", "x1", "x2", "f1", "f2", "f3"]:
            raise ConfigError(f"{v['load.path']}: expected header i,j,x1,x2,f1,f2,f3")
        out = np.zeros((fg.n1, fg.n2, 3))
        seen = np.zeros((fg.n1, fg.n2), dtype=bool)
        for r in rows[1:]:
            if not r:
                continue
            i, j = int(r[0]), int(r[1])
            if not (0 <= i < fg.n1 and 0 <= j < fg.n2):
                raise ConfigError(f"{v['load.path']}: node ({i},{j}) outside the grid")
            out[i, j] = [float(r[4]), float(r[5]), float(r[6])]
            seen[i, j] = True
        if not seen.all():
            raise ConfigError(f"{v['load.path']}: missing nodes in the load field")
        return out

    def resolved_lines(self):
        """Canonical 'key = value' lines of the full resolved configuration."""
        out = []
        for key in sorted(self.values):
            val = self.values[key]
            if val is None:
                continue
            if isinstance(val, tuple):
                val = ",".join(repr(x) if isinstance(x, float) else str(x) for x in val)
            out.append(f"{key} = {val}")
        return out
