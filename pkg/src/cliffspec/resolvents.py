"""S-resolvent operators with boundary conditions.

Every operator here is a dense real matrix acting on flattened module
coordinates.  Two conventions are used throughout:

* A Clifford scalar written to the right of an operator pre-composes with
  left multiplication of the argument: ``(A c) v = A (c v)``.  A scalar
  written to the left post-composes: ``(c A) v = c (A v)``.
* Identities are compared after the interior projection ``Pi``; the
  replaced slots carry constraint rows rather than equations, so
  ``Q_s[T] q_inv`` equals the identity only on interior slots.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .boundary import (
    ANGLE_TOL,
    NULLSPACE_RTOL,
    ConstrainedResolvent,
    assemble,
    commutator_matrix,
    nullspace,
    operator_scale,
)
from .clifford import Multivector, Paravector, ds_metric, modulus_sq, slice_decompose
from .module import CliffordOperator, CliffordVector, left_mul_matrix, slotwise


class DegeneratePairError(ValueError):
    """s lies on the sphere [q], so q^2 - 2 s0 q + |s|^2 is not invertible."""


def left_mul(R: ConstrainedResolvent, c: Multivector | Paravector) -> np.ndarray:
    """Entrywise left multiplication by ``c`` on the module."""
    return slotwise(left_mul_matrix(c), R.spec.m)


def s_left(R: ConstrainedResolvent) -> np.ndarray:
    """Q^{-1} sbar - T Q^{-1}."""
    return R.G @ left_mul(R, R.s.conj()) - R.TG


def s_right(R: ConstrainedResolvent) -> np.ndarray:
    """(sbar - T) Q^{-1}."""
    return left_mul(R, R.s.conj()) @ R.G - R.TG


@dataclass(frozen=True, eq=False)
class SliceDecomposition:
    x: float
    y: float
    J: Paravector
    f0: np.ndarray
    f1: np.ndarray

    def right_slice(self) -> np.ndarray:
        """f0 + f1 J, which reproduces the left S-resolvent."""
        m = self.f0.shape[0] >> self.J.n
        return self.f0 + self.f1 @ slotwise(left_mul_matrix(self.J), m)

    def left_slice(self) -> np.ndarray:
        """f0 + J f1, which reproduces the right S-resolvent."""
        m = self.f0.shape[0] >> self.J.n
        return self.f0 + slotwise(left_mul_matrix(self.J), m) @ self.f1


def _slice_from(R: ConstrainedResolvent, x: float, y: float, J: Paravector) -> SliceDecomposition:
    return SliceDecomposition(x, y, J, -R.TG + x * R.G, -y * R.G)


def slice_parts(R: ConstrainedResolvent) -> SliceDecomposition:
    sc = slice_decompose(R.s)
    return _slice_from(R, sc.x, sc.y, sc.J)


def slice_functions(T: CliffordOperator, spec, x: float, y: float, J: Paravector) -> SliceDecomposition:
    """f0, f1 at a signed slice point (x, y); y < 0 is allowed."""
    R = assemble(T, Paravector.from_slice(x, y, J), spec)
    return _slice_from(R, x, y, J)


def _xy(R: ConstrainedResolvent) -> tuple[float, float]:
    sc = slice_decompose(R.s)
    return sc.x, sc.y


def dq_dx(R: ConstrainedResolvent) -> np.ndarray:
    x, _ = _xy(R)
    G = R.G
    return 2.0 * (G @ R.TG - x * G @ G)


def dq_dy(R: ConstrainedResolvent) -> np.ndarray:
    _, y = _xy(R)
    return -2.0 * y * R.G @ R.G


def dtq_dx(R: ConstrainedResolvent) -> np.ndarray:
    x, _ = _xy(R)
    return 2.0 * (R.TG @ R.TG - x * R.TG @ R.G)


def dtq_dy(R: ConstrainedResolvent) -> np.ndarray:
    _, y = _xy(R)
    return -2.0 * y * R.TG @ R.G


DERIVATIVES = {"dq_dx": dq_dx, "dq_dy": dq_dy, "dtq_dx": dtq_dx, "dtq_dy": dtq_dy}


def finite_difference(T: CliffordOperator, spec, s: Paravector, which: str, h: float = 1e-5) -> np.ndarray:
    """Central difference of Q^{-1} or T Q^{-1} along x or y at fixed J."""
    sc = slice_decompose(s)
    dx, dy = (h, 0.0) if which.endswith("dx") else (0.0, h)

    def value(x, y):
        R = assemble(T, Paravector.from_slice(x, y, sc.J), spec)
        return R.TG if which.startswith("dtq") else R.G

    return (value(sc.x + dx, sc.y + dy) - value(sc.x - dx, sc.y - dy)) / (2.0 * h)


@dataclass(eq=False)
class NeumannResult:
    center: Paravector
    target: Paravector
    d_s: float
    eps_star: float
    ratio_bound: float  # d_S(s,q) * (||T Q_q^-1|| + ||Q_q^-1||)
    q_inv_norm: float
    partial_sum: np.ndarray
    term_norms: list[float]
    partial_sums: list[np.ndarray] = field(default_factory=list, repr=False)
    diverged: bool = False

    @property
    def inside(self) -> bool:
        return self.d_s < self.eps_star

    def error_bound(self, k: int) -> float:
        """Bound on the error after summing terms 0..k; inf outside the radius."""
        r = self.ratio_bound
        if r >= 1.0:
            return float("inf")
        return self.q_inv_norm * r ** (k + 1) / (1.0 - r)


DIVERGENCE_FACTOR = 1e6


def convergence_radius(Rq: ConstrainedResolvent) -> float:
    """1 / (||T Q_q^-1|| + ||Q_q^-1||) in spectral norms."""
    return 1.0 / (np.linalg.norm(Rq.TG, 2) + np.linalg.norm(Rq.G, 2))


def neumann_lambda(Rq: ConstrainedResolvent, s: Paravector) -> np.ndarray:
    """Q_q - Q_s = 2 (s0 - q0) T + (|q|^2 - |s|^2) I."""
    q = Rq.s
    return 2.0 * (s.s0 - q.s0) * Rq.T_rep + (modulus_sq(q) - modulus_sq(s)) * np.eye(Rq.dim)


def neumann_series(Rq: ConstrainedResolvent, s: Paravector, terms: int, keep_partial_sums: bool = False) -> NeumannResult:
    """Truncated sum_k Q_q^-1 (Lambda Q_q^-1)^k approximating Q_s^-1."""
    if terms < 1:
        raise ValueError("terms must be >= 1")
    G = Rq.G
    step = neumann_lambda(Rq, s) @ G
    eps = convergence_radius(Rq)
    d = ds_metric(s, Rq.s)
    term = G.copy()
    total = G.copy()
    norms = [float(np.linalg.norm(term, 2))]
    sums = [total.copy()] if keep_partial_sums else []
    diverged = False
    for _ in range(1, terms):
        term = term @ step
        total = total + term
        norms.append(float(np.linalg.norm(term, 2)))
        if keep_partial_sums:
            sums.append(total.copy())
        if norms[-1] > DIVERGENCE_FACTOR * norms[0]:
            diverged = True
            break
    return NeumannResult(
        center=Rq.s,
        target=s,
        d_s=d,
        eps_star=float(eps),
        ratio_bound=d / eps,
        q_inv_norm=norms[0],
        partial_sum=total,
        term_norms=norms,
        partial_sums=sums,
        diverged=diverged,
    )


def cr_matrices(R: ConstrainedResolvent) -> tuple[np.ndarray, np.ndarray]:
    """Interior-projected matrices of the two Cauchy-Riemann residual maps."""
    x, y = _xy(R)
    G, TG = R.G, R.TG
    GG = G @ G
    GTG = G @ TG
    first = -TG @ TG + x * TG @ G + x * GTG + G - modulus_sq(R.s) * GG
    second = y * (TG @ G - GTG)
    P = R.mask[:, None]
    return np.where(P, first, 0.0), np.where(P, second, 0.0)


def cr_residuals(R: ConstrainedResolvent, v: CliffordVector) -> tuple[CliffordVector, CliffordVector]:
    first, second = cr_matrices(R)
    return (
        CliffordVector.from_flat(R.n, first @ v.flat),
        CliffordVector.from_flat(R.n, second @ v.flat),
    )


@dataclass
class CREquivalenceReport:
    point: list[float]
    real: bool
    mode: str
    dim: int
    cr_null_dim: int
    reference_null_dim: int
    max_angle: float
    second_cr_null_dim: int | None = None
    second_cr_angle: float | None = None
    first_cr_on_null: float | None = None
    commutator_null_dim: int | None = None
    strict_superset: bool | None = None
    passed: bool = False

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def cr_equivalence_check(R: ConstrainedResolvent, tol: float = ANGLE_TOL, residual_tol: float = 1e-9) -> CREquivalenceReport:
    """Compare where the CR equations hold with the commutator condition.

    For s not real, the nullspace of the joint CR map (and of the second CR
    map alone) is compared with the nullspace of v -> [T, Q^-1] Q^-1 v, and
    the first CR residual is evaluated on that nullspace.  For real s the
    first CR nullspace is compared with the nullspace of
    v -> Pi (T - s) [T, Q^-1] Q^-1 v.
    """
    x, y = _xy(R)
    first, second = cr_matrices(R)
    K = commutator_matrix(R)
    KG = K @ R.G
    G_norm = float(np.linalg.norm(R.G, 2))
    scale = operator_scale(R) * G_norm
    point = [float(c) for c in R.s.coords]
    null_kg = nullspace(KG, NULLSPACE_RTOL, scale=scale)
    if y > 0.0:
        joint = nullspace(np.vstack([first, second / y]), NULLSPACE_RTOL, scale=scale)
        second_null = nullspace(second / y, NULLSPACE_RTOL, scale=scale)
        angle = joint.max_angle(null_kg)
        on_null = float(np.linalg.norm(first @ null_kg.basis, 2)) / max(G_norm, 1e-300) if null_kg.dim else 0.0
        passed = joint.equals(null_kg, tol) and on_null <= residual_tol
        return CREquivalenceReport(
            point=point,
            real=False,
            mode=R.mode,
            dim=R.dim,
            cr_null_dim=joint.dim,
            reference_null_dim=null_kg.dim,
            max_angle=angle,
            second_cr_null_dim=second_null.dim,
            second_cr_angle=second_null.max_angle(null_kg),
            first_cr_on_null=on_null,
            passed=passed,
        )
    TxKG = (R.T_rep - x * np.eye(R.dim)) @ KG
    TxKG = np.where(R.mask[:, None], TxKG, 0.0)
    t_scale = scale * float(np.linalg.norm(R.T_rep, 2))
    ref = nullspace(TxKG, NULLSPACE_RTOL, scale=t_scale)
    cr = nullspace(first, NULLSPACE_RTOL, scale=scale)
    angle = cr.max_angle(ref)
    return CREquivalenceReport(
        point=point,
        real=True,
        mode=R.mode,
        dim=R.dim,
        cr_null_dim=cr.dim,
        reference_null_dim=ref.dim,
        max_angle=angle,
        commutator_null_dim=null_kg.dim,
        strict_superset=ref.dim > null_kg.dim,
        passed=cr.equals(ref, tol) and ref.contains(null_kg),
    )


@dataclass
class ResidualReport:
    identity: str
    vector_id: int
    abs_residual: float
    rel_residual: float
    point: list[float]
    mode: str
    q_point: list[float] | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _report(name, vid, residual, terms, R, q=None) -> ResidualReport:
    """Relative residual is taken against the summed norms of all terms."""
    a = float(np.linalg.norm(residual))
    scale = sum(float(np.linalg.norm(t)) for t in terms)
    return ResidualReport(
        identity=name,
        vector_id=vid,
        abs_residual=a,
        rel_residual=a / scale if scale > 0 else a,
        point=[float(c) for c in R.s.coords],
        mode=R.mode,
        q_point=None if q is None else [float(c) for c in q.coords],
    )


def left_equation_terms(R: ConstrainedResolvent, w: np.ndarray):
    SL = s_left(R)
    return [SL @ (left_mul(R, R.s) @ w), -R.T_rep @ (SL @ w), -w]


def residual_left_eq(R: ConstrainedResolvent, w: CliffordVector, vector_id: int = 0) -> ResidualReport:
    """Pi (S_L s - T S_L - I) w."""
    terms = left_equation_terms(R, w.flat)
    return _report("left_s_resolvent_eq", vector_id, R.project(sum(terms)), [R.project(t) for t in terms], R)


def residual_right_eq(R: ConstrainedResolvent, v: CliffordVector, vector_id: int = 0) -> ResidualReport:
    """Pi (s S_R v - S_R T v - v - (sbar - T)[T, Q^-1] v)."""
    SR = s_right(R)
    K = commutator_matrix(R)
    x = v.flat
    terms = [
        left_mul(R, R.s) @ (SR @ x),
        -SR @ (R.T_rep @ x),
        -x,
        -(left_mul(R, R.s.conj()) - R.T_rep) @ (K @ x),
    ]
    return _report("right_s_resolvent_eq", vector_id, R.project(sum(terms)), [R.project(t) for t in terms], R)


def resolvent_factor_inverse(s: Paravector, q: Paravector, rtol: float = 1e-12) -> Multivector:
    """(q^2 - 2 s0 q + |s|^2)^{-1}, computed in the complex slice plane of q."""
    sc = slice_decompose(q)
    z = complex(sc.x, sc.y)
    p = z * z - 2.0 * s.s0 * z + modulus_sq(s)
    scale = abs(z) ** 2 + 2.0 * abs(s.s0) * abs(z) + modulus_sq(s)
    if abs(p) <= rtol * max(scale, 1.0):
        raise DegeneratePairError(f"s = {s!r} lies on the sphere of q = {q!r}")
    inv = 1.0 / p
    return Paravector.from_slice(inv.real, inv.imag, sc.J).to_multivector()


def resolvent_equation_terms(Rs: ConstrainedResolvent, Rq: ConstrainedResolvent, v: np.ndarray):
    """Left-hand side and the right-hand-side summands, each applied to v."""
    if Rs.spec is not Rq.spec and Rs.spec.to_json() != Rq.spec.to_json():
        raise ValueError("s and q must share the boundary spec")
    s, q = Rs.s, Rq.s
    inv = resolvent_factor_inverse(s, q)
    Lsb = left_mul(Rs, s.conj())
    Lq = left_mul(Rs, q)
    SR = s_right(Rs)
    SLq = s_left(Rq)
    K = commutator_matrix(Rs)
    u = left_mul(Rs, inv) @ v
    D = lambda x: SR @ x - SLq @ x
    W = lambda x: (Lsb - Rs.T_rep) @ (K @ (SLq @ x))
    lhs = SR @ (SLq @ v)
    rhs = [D(Lq @ u), -Lsb @ D(u), Lsb @ W(u), -W(Lq @ u)]
    return lhs, rhs


def residual_resolvent_eq(Rs: ConstrainedResolvent, Rq: ConstrainedResolvent, v: CliffordVector, vector_id: int = 0) -> ResidualReport:
    lhs, rhs = resolvent_equation_terms(Rs, Rq, v.flat)
    res = Rs.project(lhs - sum(rhs))
    terms = [Rs.project(lhs)] + [Rs.project(t) for t in rhs]
    return _report("s_resolvent_eq", vector_id, res, terms, Rs, q=Rq.s)
