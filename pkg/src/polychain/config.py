"""Experiment configuration: one dataclass, one defaults table, YAML or JSON files."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from .chains import (ChainSpec, build_custom_chain, build_horicycle_chain, build_hyperbolic_chain,
                     build_linear_chain, build_mixed_chain, default_profile, polynomial_profile,
                     segment_tracing_chain)
from .errors import ConfigurationError

# Every numeric default of the command-line tools lives here.
DEFAULTS: dict = {
    "nt": 512,            # parameter grid size N_t
    "ntheta": 512,        # angle grid for I(q) and the Cramer check
    "samples": 1024,      # samples per circle for the DFT, N
    "band": 256,          # retained band K (N/4 keeps a guard band)
    "tol": 1e-8,          # extendibility tolerance on the relative tail energy
    "nu": 1,              # pole order at the center
    "delta": 0.02,        # parameter cut-off near the endpoints
    "r_floor": 1e-3,      # circles smaller than this are skipped
    "epsilon": None,      # discriminant connectivity radius (None: twice median spacing)
    "disc_nt": 2048,      # parameter grid for the discriminant cloud
    "track_nt": 256,      # parameter grid for branch tracking
    "track_samples": 256,  # samples per circle for branch tracking
    "balance_tol": 1e-6,  # tolerance of the zero/pole Cauchy balance
    "iq_tol": 1e-3,       # tolerance on |I(q)|
    "iq_levels": [128, 256, 512],
    "dbar_nt": 1024,      # parameter grid for the Cramer identity
    "dbar_tol": 1e-5,
    "fit_samples": 2000,  # annulus samples for order detection
    "fit_degree": 8,
    "fit_nu_max": 6,
    "fit_tol": 1e-6,
    "fit_r0": 0.3,
    "fit_r1": 0.9,
    "moment_max": 4,
    "seed": 0,
}

CHAIN_KINDS = ("hyperbolic", "horicycle", "mixed", "linear", "custom", "segment")

DEFAULT_CHAIN = {"kind": "hyperbolic", "a": [0.3, 0.0], "b": [-0.4, 0.2], "profile": "default"}


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def _complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ConfigurationError(f"complex value must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    return complex(v)


@dataclass
class ExperimentConfig:
    chain: dict = field(default_factory=lambda: dict(DEFAULT_CHAIN))
    function: Any = "conj"
    nu: int = DEFAULTS["nu"]
    nt: int = DEFAULTS["nt"]
    ntheta: int = DEFAULTS["ntheta"]
    samples: int = DEFAULTS["samples"]
    band: int = DEFAULTS["band"]
    tol: float = DEFAULTS["tol"]
    q_set: list = field(default_factory=lambda: [[3, 0], [0, 3], [-3, 0], [2, 2]])
    out: str = "out"
    seed: int = DEFAULTS["seed"]
    params: dict = field(default_factory=dict)  # overrides of other DEFAULTS keys

    def __post_init__(self):
        self.validate()

    def validate(self):
        for name in ("nt", "ntheta", "samples"):
            v = getattr(self, name)
            if not isinstance(v, int) or not _is_pow2(v):
                raise ConfigurationError(f"{name}={v!r} must be a power of two")
        if self.samples < 2 * self.band + 2:
            raise ConfigurationError(f"samples={self.samples} too small for band={self.band}")
        if not self.tol > 0:
            raise ConfigurationError("tol must be positive")
        if self.nu < 0:
            raise ConfigurationError("nu must be nonnegative")
        kind = self.chain.get("kind", "hyperbolic")
        if kind not in CHAIN_KINDS:
            raise ConfigurationError(f"unknown chain kind {kind!r}; expected one of {CHAIN_KINDS}")
        unknown = set(self.params) - set(DEFAULTS)
        if unknown:
            raise ConfigurationError(f"unknown parameters {sorted(unknown)}")
        for k, v in self.params.items():
            if k.endswith("tol") and v is not None and not float(v) > 0:
                raise ConfigurationError(f"{k} must be positive")

    def get(self, key: str):
        """A parameter: explicit field, then ``params``, then the defaults table."""
        if key in {f.name for f in fields(self)}:
            return getattr(self, key)
        return self.params.get(key, DEFAULTS[key])

    @property
    def qs(self) -> list:
        return [_complex(q) for q in self.q_set]

    def to_dict(self) -> dict:
        return asdict(self)

    def hash(self) -> str:
        """Short digest of everything that affects results (the output directory does not)."""
        d = self.to_dict()
        d.pop("out")
        blob = json.dumps(d, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def load_config(path: Optional[str] = None, **overrides) -> ExperimentConfig:
    """Read YAML or JSON (JSON is valid YAML) and apply non-None overrides."""
    data: dict = {}
    if path is not None:
        text = Path(path).read_text()
        data = yaml.safe_load(text) or {}
        if not isinstance(data, dict):
            raise ConfigurationError("config document must be a mapping")
    known = {f.name for f in fields(ExperimentConfig)}
    params = dict(data.pop("params", {}) or {})
    for k in list(data):
        if k not in known:
            if k in DEFAULTS:
                params[k] = data.pop(k)
            else:
                raise ConfigurationError(f"unknown config key {k!r}")
    for k, v in overrides.items():
        if v is None:
            continue
        if k in known:
            data[k] = v
        else:
            params[k] = v
    data["params"] = params
    return ExperimentConfig(**data)


def _profile(spec):
    if spec in (None, "default"):
        return default_profile()
    if isinstance(spec, (list, tuple)):
        return polynomial_profile([float(c) for c in spec])
    if isinstance(spec, dict) and "poly" in spec:
        return polynomial_profile([float(c) for c in spec["poly"]])
    raise ConfigurationError(f"profile must be 'default' or a coefficient list, got {spec!r}")


def load_chain_table(path) -> tuple:
    """CSV with header t,re_c,im_c,r."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1] + 1j * data[:, 2], data[:, 3]


def build_chain(spec: dict) -> ChainSpec:
    kind = spec.get("kind", "hyperbolic")
    prof = _profile(spec.get("profile"))
    if kind == "hyperbolic":
        return build_hyperbolic_chain(_complex(spec.get("a", 0.3)), _complex(spec.get("b", [-0.4, 0.2])), prof)
    if kind == "horicycle":
        return build_horicycle_chain(_complex(spec.get("a", -1)), _complex(spec.get("b", 1)), prof)
    if kind == "mixed":
        return build_mixed_chain(_complex(spec.get("b", [0, 1])), prof)
    if kind == "linear":
        return build_linear_chain(_complex(spec.get("a", 1)), _complex(spec.get("b", 2)),
                                  float(spec.get("radius_scale", 0.4)), prof)
    if kind == "segment":
        return segment_tracing_chain()
    if kind == "custom":
        if "table" in spec:
            ts, cs, rs = load_chain_table(spec["table"])
        elif "points" in spec:
            pts = np.asarray(spec["points"], dtype=float)
            ts, cs, rs = pts[:, 0], pts[:, 1] + 1j * pts[:, 2], pts[:, 3]
        else:
            raise ConfigurationError("custom chain needs 'table' (CSV path) or 'points'")
        return build_custom_chain(ts, cs, rs, spec.get("fd_step"))
    raise ConfigurationError(f"unknown chain kind {kind!r}")


def chain_from_flag(name: str) -> dict:
    """--chain shorthand: a kind name with that kind's default endpoints."""
    presets = {
        "hyperbolic": dict(DEFAULT_CHAIN),
        "horicycle": {"kind": "horicycle", "a": [-1, 0], "b": [1, 0]},
        "mixed": {"kind": "mixed", "b": [0, 1]},
        "linear": {"kind": "linear", "a": [1, 0], "b": [2, 0], "radius_scale": 0.4},
        "segment": {"kind": "segment"},
    }
    if name not in presets:
        raise ConfigurationError(f"--chain expects one of {sorted(presets)}, got {name!r}")
    return presets[name]
