"""Boundary conditions and the constrained pseudo-resolvent.

The submodule of boundary conditions is ``B = ker C`` for a Clifford
matrix ``C`` with left-multiplication entries, so ``B`` is closed under
right scalar multiplication.  The pseudo-resolvent restricted to ``B`` is
realized by row replacement: the system matrix ``M`` carries the rows of
Q_s[T] in every slot except the replaced ones, which carry the rows of
``C``.  ``q_inv(f) = M^{-1} (Pi f)`` where ``Pi`` zeroes the replaced slots,
so ``Pi Q_s[T] q_inv(f) = Pi f`` and ``C q_inv(f) = 0``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from .clifford import AlgebraMismatchError, Multivector, Paravector
from .module import CliffordOperator, CliffordVector, build_Q, left_mul_matrix, right_mul_matrix

log = logging.getLogger(__name__)

SINGULAR_RTOL = 1e-10
NULLSPACE_RTOL = 1e-8
ANGLE_TOL = 1e-7


class SpectrumPointError(ValueError):
    """The assembled system is singular: s lies in the S-spectrum with boundary conditions."""

    def __init__(self, s: Paravector, sigma_min: float, sigma_max: float):
        self.s = s
        self.sigma_min = sigma_min
        self.sigma_max = sigma_max
        super().__init__(
            f"s = {s!r} is in sigma_S,B(T): sigma_min = {sigma_min:.3e} "
            f"(sigma_max = {sigma_max:.3e})"
        )


@dataclass(frozen=True, eq=False)
class BoundarySpec:
    """``B = {v : sum_j C_kj v_j = 0 for all k}``; C row k replaces slot ``replace_rows[k]``."""

    n: int
    m: int
    constraints: np.ndarray  # (b, m, 2^n) Clifford entries
    replace_rows: tuple[int, ...] = ()

    def __post_init__(self):
        c = np.array(self.constraints, dtype=float).reshape(-1, self.m, 1 << self.n)
        rows = tuple(int(r) for r in self.replace_rows)
        if len(rows) != c.shape[0]:
            raise ValueError(f"{c.shape[0]} constraints but {len(rows)} replaced rows")
        if len(set(rows)) != len(rows) or any(not 0 <= r < self.m for r in rows):
            raise ValueError(f"replace_rows must be distinct slots in 0..{self.m - 1}: {rows}")
        c.setflags(write=False)
        object.__setattr__(self, "constraints", c)
        object.__setattr__(self, "replace_rows", rows)
        if self.b:
            sv = np.linalg.svd(self.real_rep, compute_uv=False)
            if sv[-1] <= 1e-12 * sv[0]:
                raise ValueError("constraint map does not have full row rank")

    @classmethod
    def none(cls, n: int, m: int) -> BoundarySpec:
        """No boundary conditions: B = V (algebraic mode)."""
        return cls(n, m, np.zeros((0, m, 1 << n)), ())

    @classmethod
    def from_real_matrix(cls, n: int, m: int, c_real: np.ndarray, replace_rows) -> BoundarySpec:
        """Accept a real constraint matrix only if every block is a left multiplication."""
        size = 1 << n
        c_real = np.asarray(c_real, dtype=float)
        b = c_real.shape[0] // size
        if c_real.shape != (b * size, m * size):
            raise ValueError(f"constraint matrix has shape {c_real.shape}")
        entries = c_real.reshape(b, size, m, size)[:, :, :, 0].transpose(0, 2, 1)
        spec = cls(n, m, entries, replace_rows)
        if not np.allclose(spec.real_rep, c_real, atol=1e-12):
            raise ValueError(
                "constraints are not left-Clifford-linear; ker C would not be a right submodule"
            )
        return spec

    @property
    def b(self) -> int:
        return self.constraints.shape[0]

    @cached_property
    def real_rep(self) -> np.ndarray:
        size = 1 << self.n
        blocks = np.array(
            [[left_mul_matrix(Multivector(self.n, e)) for e in row] for row in self.constraints]
        ).reshape(self.b, self.m, size, size)
        return blocks.transpose(0, 2, 1, 3).reshape(self.b * size, self.m * size)

    @cached_property
    def interior_mask(self) -> np.ndarray:
        """Boolean mask over real coordinates; False on replaced slots."""
        size = 1 << self.n
        mask = np.ones(self.m * size, dtype=bool)
        for r in self.replace_rows:
            mask[r * size : (r + 1) * size] = False
        return mask

    @cached_property
    def projector(self) -> np.ndarray:
        return np.diag(self.interior_mask.astype(float))

    @cached_property
    def boundary_rows(self) -> np.ndarray:
        """Real row indices of the replaced slots, in constraint order."""
        size = 1 << self.n
        return np.concatenate(
            [np.arange(r * size, (r + 1) * size) for r in self.replace_rows]
        ).astype(int) if self.b else np.zeros(0, dtype=int)

    def apply(self, v: CliffordVector) -> np.ndarray:
        """C v as a flat real array of length b * 2^n."""
        return self.real_rep @ v.flat

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "replace_rows": list(self.replace_rows),
            "constraints": [
                [Multivector(self.n, e).to_json() for e in row] for row in self.constraints
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> BoundarySpec:
        n, m = int(data["n"]), int(data["m"])
        rows = data.get("constraints", [])
        c = np.array(
            [[Multivector.from_json(e).coeffs for e in row] for row in rows]
        ).reshape(len(rows), m, 1 << n)
        return cls(n, m, c, tuple(data.get("replace_rows", ())))


def system_parts(T_rep: np.ndarray, spec: BoundarySpec):
    """Split M(s) = A + s0 * X + |s|^2 * P for batched assembly."""
    mask = spec.interior_mask
    A = np.where(mask[:, None], T_rep @ T_rep, 0.0)
    if spec.b:
        A[spec.boundary_rows] = spec.real_rep
    X = np.where(mask[:, None], -2.0 * T_rep, 0.0)
    P = np.diag(mask.astype(float))
    return A, X, P


class ConstrainedResolvent:
    """Factorized row-replaced system for Q_{s,B}[T]^{-1} at one point s."""

    def __init__(self, T: CliffordOperator, s: Paravector, spec: BoundarySpec, *, rtol: float = SINGULAR_RTOL):
        if T.n != s.n or T.n != spec.n:
            raise AlgebraMismatchError("operator, point and boundary spec disagree on n")
        if T.m != spec.m:
            raise ValueError(f"boundary spec built for m={spec.m}, operator has m={T.m}")
        self.T = T
        self.s = s
        self.spec = spec
        self.T_rep = T.real_rep()
        self.Q_rep = build_Q(T, s).real_rep()
        M = np.where(spec.interior_mask[:, None], self.Q_rep, 0.0)
        if spec.b:
            M[spec.boundary_rows] = spec.real_rep
        M.setflags(write=False)
        self.M = M
        sv = np.linalg.svd(M, compute_uv=False)
        self.sigma_max = float(sv[0])
        self.sigma_min = float(sv[-1])
        if not self.sigma_min > rtol * self.sigma_max:
            raise SpectrumPointError(s, self.sigma_min, self.sigma_max)
        self._lu = scipy.linalg.lu_factor(M)

    @property
    def n(self) -> int:
        return self.T.n

    @property
    def dim(self) -> int:
        return self.M.shape[0]

    @property
    def algebraic(self) -> bool:
        return self.spec.b == 0

    @property
    def mode(self) -> str:
        return "algebraic" if self.algebraic else "boundary"

    @property
    def mask(self) -> np.ndarray:
        return self.spec.interior_mask

    @property
    def projector(self) -> np.ndarray:
        return self.spec.projector

    def project(self, flat: np.ndarray) -> np.ndarray:
        return np.where(self.mask if flat.ndim == 1 else self.mask[:, None], flat, 0.0)

    def solve(self, flat: np.ndarray) -> np.ndarray:
        """M^{-1} Pi f on flat real arrays (vectors or column stacks)."""
        return scipy.linalg.lu_solve(self._lu, self.project(flat))

    @cached_property
    def G(self) -> np.ndarray:
        """Dense real matrix of q_inv."""
        g = self.solve(np.eye(self.dim))
        g.setflags(write=False)
        return g

    @cached_property
    def TG(self) -> np.ndarray:
        g = self.T_rep @ self.G
        g.setflags(write=False)
        return g

    def q_inv(self, f: CliffordVector) -> CliffordVector:
        return CliffordVector.from_flat(self.n, self.solve(f.flat))


def assemble(T: CliffordOperator, s: Paravector, spec: BoundarySpec | None = None, *, rtol: float = SINGULAR_RTOL) -> ConstrainedResolvent:
    if spec is None:
        spec = BoundarySpec.none(T.n, T.m)
    return ConstrainedResolvent(T, s, spec, rtol=rtol)


def q_inv(R: ConstrainedResolvent, f: CliffordVector) -> CliffordVector:
    return R.q_inv(f)


def commutator(R: ConstrainedResolvent, v: CliffordVector) -> CliffordVector:
    """[T, Q^{-1}] v = T q_inv(v) - q_inv(T v)."""
    Tv = R.T_rep @ v.flat
    out = R.T_rep @ R.solve(v.flat) - R.solve(Tv)
    return CliffordVector.from_flat(R.n, out)


def commutator_matrix(R: ConstrainedResolvent) -> np.ndarray:
    return R.TG - R.G @ R.T_rep


@dataclass(frozen=True, eq=False)
class Subspace:
    """Real subspace with an orthonormal basis (columns)."""

    basis: np.ndarray
    tol: float = 0.0
    ambient: int = field(default=-1)

    def __post_init__(self):
        if self.ambient < 0:
            object.__setattr__(self, "ambient", self.basis.shape[0])

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def codim(self) -> int:
        return self.ambient - self.dim

    def max_angle(self, other: Subspace) -> float:
        """Largest principal angle; pi/2 when the dimensions differ."""
        if self.dim != other.dim:
            return float(np.pi / 2)
        if self.dim == 0:
            return 0.0
        return float(np.max(scipy.linalg.subspace_angles(self.basis, other.basis)))

    def equals(self, other: Subspace, tol: float = ANGLE_TOL) -> bool:
        return self.dim == other.dim and self.max_angle(other) < tol

    def contains(self, other: Subspace, tol: float = ANGLE_TOL) -> bool:
        if other.dim == 0:
            return True
        resid = other.basis - self.basis @ (self.basis.T @ other.basis)
        return float(np.linalg.norm(resid, 2)) < tol

    def project(self, x: np.ndarray) -> np.ndarray:
        return self.basis @ (self.basis.T @ x)


def nullspace(A: np.ndarray, rtol: float = NULLSPACE_RTOL, scale: float | None = None) -> Subspace:
    """Numerical nullspace via SVD; singular values <= rtol * max(sigma_max, scale) count as zero."""
    ncols = A.shape[1]
    if A.shape[0] == 0:
        return Subspace(np.eye(ncols), 0.0)
    _, sv, vt = np.linalg.svd(A)
    ref = max(sv[0] if sv.size else 0.0, scale or 0.0)
    tol = rtol * ref
    rank = int(np.sum(sv > tol))
    return Subspace(vt[rank:].T.copy(), tol, ncols)


def orth(A: np.ndarray, rtol: float = NULLSPACE_RTOL) -> Subspace:
    """Orthonormal basis of the column span."""
    if A.shape[1] == 0:
        return Subspace(np.zeros((A.shape[0], 0)), 0.0, A.shape[0])
    u, sv, _ = np.linalg.svd(A, full_matrices=False)
    tol = rtol * (sv[0] if sv.size else 0.0)
    rank = int(np.sum(sv > tol))
    return Subspace(u[:, :rank].copy(), tol, A.shape[0])


def operator_scale(R: ConstrainedResolvent) -> float:
    """||T|| ||Q^{-1}||, the natural size of the commutator."""
    return float(np.linalg.norm(R.T_rep, 2) * np.linalg.norm(R.G, 2))


def commutator_kernel(R: ConstrainedResolvent) -> Subspace:
    K = commutator_matrix(R)
    return nullspace(K, NULLSPACE_RTOL, scale=operator_scale(R))


def hidden_boundary_subspace(R: ConstrainedResolvent) -> Subspace:
    """Vectors supported on replaced slots whose image under T misses every interior row.

    q_inv discards replaced slots, so such vectors are annihilated by the
    commutator without being in the image of Q_{s,B}.
    """
    rows = R.spec.boundary_rows
    if rows.size == 0:
        return Subspace(np.zeros((R.dim, 0)), 0.0, R.dim)
    E = np.zeros((R.dim, rows.size))
    E[rows, np.arange(rows.size)] = 1.0
    PT = R.T_rep[R.mask][:, rows]
    z = nullspace(PT, NULLSPACE_RTOL, scale=float(np.linalg.norm(R.T_rep, 2)))
    return Subspace(E @ z.basis, z.tol, R.dim)


def doubly_constrained_subspace(R: ConstrainedResolvent) -> Subspace:
    """{u : C u = 0 and C T u = 0}, i.e. B intersected with T^{-1}(B)."""
    if R.spec.b == 0:
        return Subspace(np.eye(R.dim), 0.0)
    C = R.spec.real_rep
    stacked = np.vstack([C, C @ R.T_rep])
    return nullspace(stacked, NULLSPACE_RTOL)


def image_characterization(R: ConstrainedResolvent) -> Subspace:
    """Q_{s,B}[T] applied to B intersected with T^{-1}(B), plus hidden boundary vectors.

    The image is taken under the full Q_s[T] (no interior projection): for
    u in B with T u in B one has q_inv(Q u) = u and q_inv(T Q u) = T u.
    """
    if R.spec.b == 0:
        return Subspace(np.eye(R.dim), 0.0)
    U = doubly_constrained_subspace(R)
    Z = hidden_boundary_subspace(R)
    span = orth(np.hstack([R.Q_rep @ U.basis, Z.basis]))
    if log.isEnabledFor(logging.DEBUG):
        out = commutator_matrix(R) @ np.eye(R.dim)
        log.debug(
            "max |C [T,Q^-1] v| over unit basis = %.3e",
            float(np.max(np.abs(R.spec.real_rep @ out))),
        )
    return span


def right_module_check(R: ConstrainedResolvent, f: CliffordVector, s: Multivector) -> float:
    """|| q_inv(f s) - q_inv(f) s ||, zero when M commutes with right multiplication."""
    Rs = right_mul_matrix(s)
    fs = (f.coeffs @ Rs.T).reshape(-1)
    lhs = R.solve(fs).reshape(-1, 1 << R.n)
    rhs = R.solve(f.flat).reshape(-1, 1 << R.n) @ Rs.T
    return float(np.linalg.norm(lhs - rhs))
