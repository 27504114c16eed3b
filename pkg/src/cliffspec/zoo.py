"""Example operators: discretized gradient operators with nonconstant
coefficients, and known-answer multiplication operators."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .boundary import BoundarySpec
from .clifford import Multivector, Paravector
from .module import CliffordOperator, block_diag, mult_operator

Coefficient = Callable[[np.ndarray], np.ndarray]


def constant(c: float = 1.0) -> Coefficient:
    return lambda x: np.full_like(np.asarray(x, dtype=float), c)


def linear(a: float = 1.0, b: float = 0.0) -> Coefficient:
    """a + b x."""
    return lambda x: a + b * np.asarray(x, dtype=float)


def bump(center: float = 0.5, width: float = 0.2, base: float = 1.0, height: float = 1.0) -> Coefficient:
    return lambda x: base + height * np.exp(-(((np.asarray(x, dtype=float) - center) / width) ** 2))


PRESETS = {"constant": constant, "linear": linear, "bump": bump}


def coefficient_from_config(cfg) -> Coefficient:
    if isinstance(cfg, (int, float)):
        return constant(float(cfg))
    cfg = dict(cfg)
    kind = cfg.pop("kind", "constant")
    if kind not in PRESETS:
        raise ValueError(f"unknown coefficient preset {kind!r}")
    return PRESETS[kind](**{k: float(v) for k, v in cfg.items()})


def difference_matrix(m: int, h: float) -> np.ndarray:
    """Centered first differences, second-order one-sided at both ends."""
    if m < 3:
        raise ValueError("need at least 3 nodes")
    D = np.zeros((m, m))
    for i in range(1, m - 1):
        D[i, i - 1] = -1.0
        D[i, i + 1] = 1.0
    D[0, :3] = [-3.0, 4.0, -1.0]
    D[-1, -3:] = [1.0, -4.0, 3.0]
    return D / (2.0 * h)


@dataclass(frozen=True, eq=False)
class GradientModel:
    d: int
    shape: tuple[int, ...]
    h: float
    coefficients: tuple[np.ndarray, ...]
    bc: str
    alpha: float
    T: CliffordOperator
    spec: BoundarySpec
    boundary_nodes: tuple[int, ...] = field(default=())

    @property
    def n(self) -> int:
        return self.T.n

    @property
    def m(self) -> int:
        return self.T.m


def _boundary_spec(T: CliffordOperator, nodes, bc: str, alpha: float) -> BoundarySpec:
    n, m = T.n, T.m
    size = 1 << n
    if bc == "none":
        return BoundarySpec.none(n, m)
    C = np.zeros((len(nodes), m, size))
    for k, node in enumerate(nodes):
        C[k, node, 0] = 1.0
        if bc == "robin":
            C[k] += alpha * T.entries[node]
        elif bc != "dirichlet":
            raise ValueError(f"unknown boundary condition {bc!r}")
    return BoundarySpec(n, m, C, tuple(nodes))


def _check_positive(values: np.ndarray, name: str) -> None:
    if np.any(~np.isfinite(values)) or np.any(values <= 0):
        raise ValueError(f"coefficient {name} must be strictly positive on the grid")


def gradient_1d(
    m_total: int,
    h: float | None = None,
    a: Coefficient | None = None,
    bc: str = "dirichlet",
    *,
    n: int = 1,
    alpha: float = 1.0,
) -> GradientModel:
    """T = e1 a(x) d/dx on the nodes x_i = i h, with h = 1/(m_total - 1) by default."""
    if m_total < 5:
        raise ValueError("m_total must be >= 5")
    h = 1.0 / (m_total - 1) if h is None else float(h)
    x = h * np.arange(m_total)
    av = (a or constant(1.0))(x)
    _check_positive(av, "a")
    D = difference_matrix(m_total, h)
    e1 = Multivector.blade(n, 1)
    T = CliffordOperator(n, (av[:, None] * D)[:, :, None] * e1.coeffs[None, None, :])
    nodes = (0, m_total - 1)
    spec = _boundary_spec(T, nodes, bc, alpha)
    return GradientModel(1, (m_total,), h, (av,), bc, alpha, T, spec, nodes)


def gradient_2d(
    nx: int,
    ny: int,
    h: float | None = None,
    a1: Coefficient | None = None,
    a2: Coefficient | None = None,
    bc: str = "dirichlet",
    *,
    n: int = 2,
    alpha: float = 1.0,
) -> GradientModel:
    """T = e1 a1 d/dx + e2 a2 d/dy on an nx-by-ny tensor grid; node (i, j) -> i + nx j.

    Coefficient functions receive the pair (x, y) of node coordinate arrays.
    """
    if nx < 5 or ny < 5:
        raise ValueError("nx and ny must be >= 5")
    if n < 2:
        raise ValueError("the 2D gradient needs n >= 2")
    h = 1.0 / (max(nx, ny) - 1) if h is None else float(h)
    xs, ys = np.meshgrid(h * np.arange(nx), h * np.arange(ny), indexing="xy")
    xs, ys = xs.reshape(-1), ys.reshape(-1)
    c1 = (a1 or (lambda x, y: np.ones_like(x)))(xs, ys)
    c2 = (a2 or (lambda x, y: np.ones_like(x)))(xs, ys)
    _check_positive(c1, "a1")
    _check_positive(c2, "a2")
    Dx = np.kron(np.eye(ny), difference_matrix(nx, h))
    Dy = np.kron(difference_matrix(ny, h), np.eye(nx))
    e1 = Multivector.blade(n, 1).coeffs
    e2 = Multivector.blade(n, 2).coeffs
    entries = (c1[:, None] * Dx)[:, :, None] * e1 + (c2[:, None] * Dy)[:, :, None] * e2
    T = CliffordOperator(n, entries)
    nodes = tuple(
        int(i + nx * j)
        for j in range(ny)
        for i in range(nx)
        if i in (0, nx - 1) or j in (0, ny - 1)
    )
    spec = _boundary_spec(T, nodes, bc, alpha)
    return GradientModel(2, (nx, ny), h, (c1, c2), bc, alpha, T, spec, nodes)


@dataclass(frozen=True, eq=False)
class KnownAnswer:
    name: str
    T: CliffordOperator
    spec: BoundarySpec
    loci: tuple[tuple[float, float], ...]  # singular points (x, y) in the slice half-plane


def _locus(p: Paravector) -> tuple[float, float]:
    return (p.s0, p.imag_norm)


def known_answer_suite(n: int = 2) -> list[KnownAnswer]:
    """Operators whose S-spectrum (with B = V) is known in closed form."""
    p = Paravector(n, [1.0, 1.0] + [0.0] * (n - 1))
    r = Paravector(n, [0.5, 0.0] + [1.5] + [0.0] * (n - 2)) if n >= 2 else Paravector(n, [0.5, 1.5])
    mp = mult_operator(p, 1)
    mr = mult_operator(r, 1)
    return [
        KnownAnswer("mult_1+e1", mp, BoundarySpec.none(n, 1), (_locus(p),)),
        KnownAnswer("zero", CliffordOperator.zero(n, 1), BoundarySpec.none(n, 1), ((0.0, 0.0),)),
        KnownAnswer(
            "block_mult",
            block_diag(mp, mr),
            BoundarySpec.none(n, 2),
            (_locus(p), _locus(r)),
        ),
    ]
