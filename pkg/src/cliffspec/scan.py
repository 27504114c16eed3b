"""Grid scans of the slice half-plane {x + J y : y >= 0}.

Each node's invertibility margin is the smallest singular value of the
row-replaced system matrix M(x + J y).
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .boundary import BoundarySpec, system_parts
from .clifford import Paravector, unit
from .module import CliffordOperator

CHUNK_BYTES = 64 * 2**20


@dataclass(frozen=True)
class ScanGrid:
    x_range: tuple[float, float]
    y_hi: float
    nx: int
    ny: int
    J: Paravector

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError("nx and ny must be >= 2")
        if not self.x_range[1] > self.x_range[0] or not self.y_hi > 0:
            raise ValueError("empty scan window")
        if self.J.s0 != 0.0 or abs(self.J.imag_norm - 1.0) > 1e-12:
            raise ValueError("J must be a unit purely imaginary paravector")

    @classmethod
    def square(cls, lo: float, hi: float, nx: int, ny: int, J: Paravector) -> ScanGrid:
        """Grid over [lo, hi] x [0, hi]."""
        return cls((lo, hi), hi, nx, ny, J)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x_range[0], self.x_range[1], self.nx)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(0.0, self.y_hi, self.ny)

    @property
    def spacing(self) -> tuple[float, float]:
        return (self.xs[1] - self.xs[0], self.ys[1] - self.ys[0])

    def to_json(self) -> dict:
        return {
            "x_range": [float(v) for v in self.x_range],
            "y_range": [0.0, float(self.y_hi)],
            "nx": self.nx,
            "ny": self.ny,
            "J": self.J.to_json(),
        }


@dataclass(eq=False)
class SpectrumMap:
    grid: ScanGrid
    sigma_min: np.ndarray  # (ny, nx)
    sigma_max: np.ndarray
    threshold: float

    @property
    def sigma_max_global(self) -> float:
        return float(np.max(self.sigma_max))

    @property
    def in_spectrum(self) -> np.ndarray:
        return self.sigma_min <= self.threshold * self.sigma_max_global

    def argmin(self) -> tuple[float, float]:
        j, i = np.unravel_index(np.argmin(self.sigma_min), self.sigma_min.shape)
        return float(self.grid.xs[i]), float(self.grid.ys[j])


def _margins(T_rep, spec, x, r2):
    """sigma_min and sigma_max of M at stacked points (s0 = x, |s|^2 = r2)."""
    A, X, P = system_parts(T_rep, spec)
    N = A.shape[0]
    per_chunk = max(1, CHUNK_BYTES // (8 * N * N))
    lo, hi = [], []
    for k in range(0, x.size, per_chunk):
        xc, rc = x[k : k + per_chunk], r2[k : k + per_chunk]
        batch = A[None] + xc[:, None, None] * X[None] + rc[:, None, None] * P[None]
        sv = np.linalg.svd(batch, compute_uv=False)
        lo.append(sv[:, -1])
        hi.append(sv[:, 0])
    return np.concatenate(lo), np.concatenate(hi)


def sigma_min_at(T: CliffordOperator, spec: BoundarySpec | None, s: Paravector) -> float:
    spec = spec or BoundarySpec.none(T.n, T.m)
    r2 = float(np.dot(s.coords, s.coords))
    lo, _ = _margins(T.real_rep(), spec, np.array([s.s0]), np.array([r2]))
    return float(lo[0])


def scan(
    T: CliffordOperator,
    spec: BoundarySpec | None,
    grid: ScanGrid,
    threshold: float = 1e-6,
    threads: int = 1,
) -> SpectrumMap:
    spec = spec or BoundarySpec.none(T.n, T.m)
    if grid.J.n != T.n:
        raise ValueError("J lives in a different algebra than T")
    T_rep = T.real_rep()
    xs, ys = grid.xs, grid.ys
    imag = grid.J.coords[1:]
    rows = []
    for y in ys:
        s_imag = y * imag
        rows.append((xs, xs * xs + float(np.dot(s_imag, s_imag))))

    def run(row):
        return _margins(T_rep, spec, row[0], np.asarray(row[1]))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, rows))
    else:
        results = [run(r) for r in rows]
    smin = np.array([r[0] for r in results])
    smax = np.array([r[1] for r in results])
    return SpectrumMap(grid, smin, smax, threshold)


@dataclass
class AxialReport:
    points: list[tuple[float, float]]
    max_rel_spread: float
    per_point: list[float]
    passed: bool


def axial_symmetry_check(T: CliffordOperator, spec: BoundarySpec | None, points, J_samples, rtol: float = 1e-10) -> AxialReport:
    """sigma_min(M(x + J y)) must not depend on J; the paravector is built per J."""
    spreads = []
    for x, y in points:
        vals = np.array([sigma_min_at(T, spec, Paravector.from_slice(x, y, J)) for J in J_samples])
        ref = max(float(np.max(np.abs(vals))), 1e-300)
        spreads.append(float((vals.max() - vals.min()) / ref))
    worst = max(spreads) if spreads else 0.0
    return AxialReport([tuple(p) for p in points], worst, spreads, worst <= rtol)


def emit_csv(smap: SpectrumMap, path: str | Path) -> None:
    """Rows y-major then x; 17 significant digits so values round-trip exactly."""
    if not str(path):
        raise ValueError("empty output path")
    path = Path(path)
    flags = smap.in_spectrum
    try:
        with path.open("w", newline="", encoding="ascii") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "y", "sigma_min", "in_spectrum"])
            for j, y in enumerate(smap.grid.ys):
                for i, x in enumerate(smap.grid.xs):
                    w.writerow([f"{x:.17g}", f"{y:.17g}", f"{smap.sigma_min[j, i]:.17g}", int(flags[j, i])])
    except OSError as exc:
        raise OSError(f"cannot write spectrum CSV to {path}: {exc.strerror or exc}") from exc


def read_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """(rows of x, y, sigma_min) and the in_spectrum flags."""
    with Path(path).open(newline="", encoding="ascii") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header != ["x", "y", "sigma_min", "in_spectrum"]:
            raise ValueError(f"unexpected header {header}")
        rows = [(float(a), float(b), float(c), int(d)) for a, b, c, d in r]
    data = np.array([row[:3] for row in rows]).reshape(-1, 3)
    return data, np.array([row[3] for row in rows], dtype=bool)


def metadata(smap: SpectrumMap, operator: dict, spec: dict) -> dict:
    return {
        "operator": operator,
        "spec": spec,
        "grid": smap.grid.to_json(),
        "threshold": smap.threshold,
        "J": smap.grid.J.to_json(),
        "sigma_max_global": smap.sigma_max_global,
    }


def default_grid(n: int, lo: float = 0.0, hi: float = 2.0, nodes: int = 200) -> ScanGrid:
    return ScanGrid.square(lo, hi, nodes, nodes, unit(n, 1))
