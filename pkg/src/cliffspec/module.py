"""The Clifford module V = (R_n)^m and right-linear operators on it.

A vector is an (m, 2^n) coefficient array.  Flattening is slot-major, so
the real coordinate of blade A in slot i sits at ``i * 2**n + A``.  An
operator is an (m, m) array of Clifford entries acting by left
multiplication, which makes it right-linear by construction.  All numerics
downstream run on the real representation returned by :func:`real_rep`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from threading import Lock

import numpy as np

from .clifford import (
    AlgebraMismatchError,
    Multivector,
    Paravector,
    modulus_sq,
    product_table,
)


def left_mul_matrix(a: Multivector | Paravector) -> np.ndarray:
    """Real 2^n x 2^n matrix of x -> a x."""
    a = _as_mv(a)
    # (a x)_C = sum_{A,B} a_A x_B t[A,B,C]
    return np.einsum("i,ijk->kj", a.coeffs, product_table(a.n))


def right_mul_matrix(a: Multivector | Paravector) -> np.ndarray:
    """Real 2^n x 2^n matrix of x -> x a."""
    a = _as_mv(a)
    return np.einsum("j,ijk->ki", a.coeffs, product_table(a.n))


def _as_mv(a) -> Multivector:
    return a.to_multivector() if isinstance(a, Paravector) else a


def _stack(entries, n: int) -> np.ndarray:
    return np.array([e.coeffs for e in entries]).reshape(len(entries), 1 << n)


@dataclass(frozen=True, eq=False)
class CliffordVector:
    n: int
    coeffs: np.ndarray  # shape (m, 2^n)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim != 2 or c.shape[1] != 1 << self.n:
            raise ValueError(f"expected shape (m, {1 << self.n}), got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_entries(cls, entries) -> CliffordVector:
        entries = [_as_mv(e) for e in entries]
        n = entries[0].n
        if any(e.n != n for e in entries):
            raise AlgebraMismatchError("entries from different algebras")
        return cls(n, _stack(entries, n))

    @classmethod
    def from_flat(cls, n: int, flat: np.ndarray) -> CliffordVector:
        return cls(n, np.asarray(flat, dtype=float).reshape(-1, 1 << n))

    @classmethod
    def random(cls, n: int, m: int, rng: np.random.Generator) -> CliffordVector:
        return cls(n, rng.standard_normal((m, 1 << n)))

    @property
    def m(self) -> int:
        return self.coeffs.shape[0]

    @property
    def flat(self) -> np.ndarray:
        return self.coeffs.reshape(-1)

    def entry(self, i: int) -> Multivector:
        return Multivector(self.n, self.coeffs[i])

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def __add__(self, other: CliffordVector) -> CliffordVector:
        return CliffordVector(self.n, self.coeffs + other.coeffs)

    def __sub__(self, other: CliffordVector) -> CliffordVector:
        return CliffordVector(self.n, self.coeffs - other.coeffs)

    def __mul__(self, c: float) -> CliffordVector:
        return CliffordVector(self.n, self.coeffs * c)

    __rmul__ = __mul__


def right_scalar_mul(v: CliffordVector, s: Multivector | Paravector) -> CliffordVector:
    s = _as_mv(s)
    if s.n != v.n:
        raise AlgebraMismatchError(f"R_{v.n} vs R_{s.n}")
    return CliffordVector(v.n, v.coeffs @ right_mul_matrix(s).T)


def left_scalar_mul(s: Multivector | Paravector, v: CliffordVector) -> CliffordVector:
    s = _as_mv(s)
    if s.n != v.n:
        raise AlgebraMismatchError(f"R_{v.n} vs R_{s.n}")
    return CliffordVector(v.n, v.coeffs @ left_mul_matrix(s).T)


def slotwise(block: np.ndarray, m: int) -> np.ndarray:
    """Block-diagonal real matrix applying ``block`` in every slot."""
    return np.kron(np.eye(m), block)


class CliffordOperator:
    """Right-linear operator on (R_n)^m given by left-multiplication entries."""

    def __init__(self, n: int, entries: np.ndarray):
        e = np.array(entries, dtype=float)
        if e.ndim != 3 or e.shape[0] != e.shape[1] or e.shape[2] != 1 << n:
            raise ValueError(f"expected entries of shape (m, m, {1 << n}), got {e.shape}")
        e.setflags(write=False)
        self.n = n
        self.entries = e
        self._lock = Lock()
        self._rep: np.ndarray | None = None

    @classmethod
    def from_multivectors(cls, rows) -> CliffordOperator:
        n = _as_mv(rows[0][0]).n
        return cls(n, np.array([[_as_mv(e).coeffs for e in row] for row in rows]))

    @classmethod
    def from_real_matrix(cls, n: int, a: np.ndarray, unit: Multivector | None = None) -> CliffordOperator:
        """Entries a_ij * unit (default the scalar 1)."""
        a = np.asarray(a, dtype=float)
        u = unit.coeffs if unit is not None else np.eye(1, 1 << n)[0]
        return cls(n, a[:, :, None] * u[None, None, :])

    @classmethod
    def identity(cls, n: int, m: int) -> CliffordOperator:
        return cls.from_real_matrix(n, np.eye(m))

    @classmethod
    def zero(cls, n: int, m: int) -> CliffordOperator:
        return cls(n, np.zeros((m, m, 1 << n)))

    @classmethod
    def random(cls, n: int, m: int, rng: np.random.Generator, scale: float = 1.0) -> CliffordOperator:
        return cls(n, scale * rng.standard_normal((m, m, 1 << n)))

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def dim(self) -> int:
        """Real dimension 2^n * m of the module."""
        return self.m << self.n

    def entry(self, i: int, j: int) -> Multivector:
        return Multivector(self.n, self.entries[i, j])

    def real_rep(self) -> np.ndarray:
        if self._rep is None:
            with self._lock:
                if self._rep is None:
                    t = product_table(self.n)
                    # block (i,j)[C, B] = sum_A T_ij[A] t[A, B, C]
                    blocks = np.einsum("xya,abc->xycb", self.entries, t)
                    m, size = self.m, 1 << self.n
                    rep = blocks.transpose(0, 2, 1, 3).reshape(m * size, m * size)
                    rep.setflags(write=False)
                    self._rep = rep
        return self._rep

    def __add__(self, other: CliffordOperator) -> CliffordOperator:
        _check_compatible(self, other)
        return CliffordOperator(self.n, self.entries + other.entries)

    def __sub__(self, other: CliffordOperator) -> CliffordOperator:
        _check_compatible(self, other)
        return CliffordOperator(self.n, self.entries - other.entries)

    def __mul__(self, c: float) -> CliffordOperator:
        return CliffordOperator(self.n, self.entries * c)

    __rmul__ = __mul__

    def __matmul__(self, other: CliffordOperator) -> CliffordOperator:
        return compose(self, other)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "entries": [[Multivector(self.n, c).to_json() for c in row] for row in self.entries],
        }

    @classmethod
    def from_json(cls, data: dict | str) -> CliffordOperator:
        if isinstance(data, str):
            data = json.loads(data)
        rows = [[Multivector.from_json(e) for e in row] for row in data["entries"]]
        op = cls.from_multivectors(rows)
        if op.n != data["n"] or op.m != data["m"]:
            raise ValueError("header does not match entries")
        return op


def _check_compatible(a: CliffordOperator, b: CliffordOperator) -> None:
    if a.n != b.n:
        raise AlgebraMismatchError(f"R_{a.n} vs R_{b.n}")
    if a.m != b.m:
        raise ValueError(f"module rank mismatch: {a.m} vs {b.m}")


def compose(a: CliffordOperator, b: CliffordOperator) -> CliffordOperator:
    """(a o b)_ik = sum_j a_ij b_jk with Clifford products."""
    _check_compatible(a, b)
    e = np.einsum("ija,jkb,abc->ikc", a.entries, b.entries, product_table(a.n))
    return CliffordOperator(a.n, e)


def apply(T: CliffordOperator, v: CliffordVector) -> CliffordVector:
    if T.n != v.n:
        raise AlgebraMismatchError(f"R_{T.n} vs R_{v.n}")
    if T.m != v.m:
        raise ValueError(f"module rank mismatch: {T.m} vs {v.m}")
    c = np.einsum("ija,jb,abc->ic", T.entries, v.coeffs, product_table(T.n))
    return CliffordVector(T.n, c)


def real_rep(T: CliffordOperator) -> np.ndarray:
    return T.real_rep()


def build_Q(T: CliffordOperator, s: Paravector) -> CliffordOperator:
    """T^2 - 2 s0 T + |s|^2 I."""
    if T.n != s.n:
        raise AlgebraMismatchError(f"R_{T.n} vs R_{s.n}")
    return compose(T, T) - 2.0 * s.s0 * T + modulus_sq(s) * CliffordOperator.identity(T.n, T.m)


def q_matrix(T_rep: np.ndarray, s: Paravector) -> np.ndarray:
    """Real representation of build_Q from the real representation of T."""
    return T_rep @ T_rep - 2.0 * s.s0 * T_rep + modulus_sq(s) * np.eye(T_rep.shape[0])


def mult_operator(p: Paravector | Multivector, m: int) -> CliffordOperator:
    """Diagonal operator v -> p v."""
    if m < 1:
        raise ValueError("m must be >= 1")
    p = _as_mv(p)
    e = np.zeros((m, m, 1 << p.n))
    for i in range(m):
        e[i, i] = p.coeffs
    return CliffordOperator(p.n, e)


def block_diag(*ops: CliffordOperator) -> CliffordOperator:
    n = ops[0].n
    if any(op.n != n for op in ops):
        raise AlgebraMismatchError("blocks from different algebras")
    m = sum(op.m for op in ops)
    e = np.zeros((m, m, 1 << n))
    k = 0
    for op in ops:
        e[k : k + op.m, k : k + op.m] = op.entries
        k += op.m
    return CliffordOperator(n, e)


def export_csv(matrix: np.ndarray, path: str | Path) -> None:
    np.savetxt(path, matrix, delimiter=",", fmt="%.17g")
