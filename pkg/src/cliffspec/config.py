"""TOML job configuration: parsing, defaults, validation, model construction."""

from __future__ import annotations

import copy
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .boundary import BoundarySpec
from .clifford import MAX_DIM, Paravector
from .module import CliffordOperator, block_diag, mult_operator
from .zoo import coefficient_from_config, gradient_1d, gradient_2d


class ConfigError(ValueError):
    pass


DEFAULTS = {
    "operator": {"preset": "gradient_1d", "n": 2},
    "boundary": {"kind": "dirichlet", "alpha": 1.0},
    "scan": {"x_range": [0.0, 2.0], "y_max": 2.0, "nx": 200, "ny": 200, "J": None, "threshold": 1e-6},
    "verify": {
        "points": [[1.0, 2.0]],
        "J": None,
        "q_points": [],
        "vectors": 5,
        "seed": 0,
    },
    "series": {"center": [0.0, 3.0], "J": None, "targets": [], "offsets": [], "terms": 40},
    "kernel": {"points": [[1.0, 2.0]], "J": None},
    "tolerances": {
        "algebraic": 1e-10,
        "boundary": 1e-9,
        "angle": 1e-7,
        "symmetry": 1e-10,
        "ratio_slack": 1e-6,
    },
}

OPERATOR_DEFAULTS = {
    "gradient_1d": {"m_total": 12, "h": None, "coefficient": {"kind": "constant", "c": 1.0}},
    "gradient_2d": {
        "nx": 5,
        "ny": 5,
        "h": None,
        "coefficient_x": {"kind": "constant", "c": 1.0},
        "coefficient_y": {"kind": "constant", "c": 1.0},
    },
    "mult": {"p": [1.0, 1.0], "m": 1},
    "zero": {"m": 1},
    "block_mult": {"p": [1.0, 1.0], "r": [0.5, 0.0, 1.5]},
    "random": {"m": 3, "seed": 0, "scale": 0.5},
}


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k not in ("coefficient", "coefficient_x", "coefficient_y"):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def load_config(path: str | Path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return resolve(raw)


def resolve(raw: dict) -> dict:
    unknown = set(raw) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    cfg = _merge(DEFAULTS, raw)
    op = cfg["operator"]
    preset = op.get("preset")
    if preset not in OPERATOR_DEFAULTS:
        raise ConfigError(f"unknown operator preset {preset!r}")
    cfg["operator"] = _merge({"preset": preset, "n": op.get("n", 2), **OPERATOR_DEFAULTS[preset]}, op)
    n = cfg["operator"]["n"]
    if not isinstance(n, int) or not 1 <= n <= MAX_DIM:
        raise ConfigError(f"operator.n must be an integer in 1..{MAX_DIM}")
    if cfg["boundary"]["kind"] not in ("dirichlet", "robin", "none"):
        raise ConfigError(f"unknown boundary kind {cfg['boundary']['kind']!r}")
    for section in ("scan", "verify", "series", "kernel"):
        if cfg[section].get("J") is None:
            cfg[section]["J"] = [0.0, 1.0] + [0.0] * (n - 1)
    return cfg


def paravector(n: int, coords, name: str) -> Paravector:
    c = list(coords)
    if len(c) > n + 1:
        raise ConfigError(f"{name}: {len(c)} coordinates for n={n}")
    try:
        return Paravector(n, [float(v) for v in c] + [0.0] * (n + 1 - len(c)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def unit_J(n: int, coords, name: str) -> Paravector:
    J = paravector(n, coords, name)
    norm = J.imag_norm
    if J.s0 != 0.0 or norm == 0.0:
        raise ConfigError(f"{name} must be a nonzero purely imaginary paravector")
    return Paravector(n, J.coords / norm)


def slice_points(n: int, section: dict, key: str = "points") -> list[Paravector]:
    J = unit_J(n, section["J"], f"{key}.J")
    out = []
    for k, pt in enumerate(section[key]):
        if len(pt) != 2:
            raise ConfigError(f"{key}[{k}] must be an (x, y) pair")
        out.append(Paravector.from_slice(float(pt[0]), float(pt[1]), J))
    return out


def build_model(cfg: dict) -> tuple[CliffordOperator, BoundarySpec]:
    op = cfg["operator"]
    bc = cfg["boundary"]
    n = op["n"]
    preset = op["preset"]
    try:
        if preset == "gradient_1d":
            model = gradient_1d(
                int(op["m_total"]), op["h"], coefficient_from_config(op["coefficient"]),
                bc["kind"], n=n, alpha=float(bc["alpha"]),
            )
            return model.T, model.spec
        if preset == "gradient_2d":
            fx = coefficient_from_config(op["coefficient_x"])
            fy = coefficient_from_config(op["coefficient_y"])
            model = gradient_2d(
                int(op["nx"]), int(op["ny"]), op["h"],
                lambda x, y: fx(x), lambda x, y: fy(y),
                bc["kind"], n=n, alpha=float(bc["alpha"]),
            )
            return model.T, model.spec
        if bc["kind"] != "none":
            raise ConfigError(f"preset {preset!r} only supports boundary.kind = 'none'")
        if preset == "mult":
            T = mult_operator(paravector(n, op["p"], "operator.p"), int(op["m"]))
        elif preset == "zero":
            T = CliffordOperator.zero(n, int(op["m"]))
        elif preset == "block_mult":
            T = block_diag(
                mult_operator(paravector(n, op["p"], "operator.p"), 1),
                mult_operator(paravector(n, op["r"], "operator.r"), 1),
            )
        else:
            rng = np.random.default_rng(int(op["seed"]))
            T = CliffordOperator.random(n, int(op["m"]), rng, float(op["scale"]))
        return T, BoundarySpec.none(n, T.m)
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid operator configuration: {exc}") from exc
