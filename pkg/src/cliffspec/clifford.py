"""Real Clifford algebra R_n with e_i^2 = -1 and paravector geometry.

Multivectors are stored densely, one coefficient per basis blade, in
bitmask order: index ``A`` has bit ``i-1`` set iff ``e_i`` occurs in the
blade.  For n = 2 the order is (1, e1, e2, e1e2).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_DIM = 6


class AlgebraMismatchError(ValueError):
    """Operands live in Clifford algebras of different dimension."""


def _check_dim(n: int) -> None:
    if not 1 <= n <= MAX_DIM:
        raise ValueError(f"algebra dimension must be in 1..{MAX_DIM}, got {n}")


def blade_sign(a: int, b: int) -> int:
    """Sign of e_a * e_b relative to e_(a xor b).

    Counts the transpositions needed to move every unit of ``b`` past the
    larger units of ``a``, then one factor -1 per unit shared by both.
    """
    swaps = 0
    x = a >> 1
    while x:
        swaps += bin(x & b).count("1")
        x >>= 1
    swaps += bin(a & b).count("1")
    return -1 if swaps & 1 else 1


@lru_cache(maxsize=None)
def product_table(n: int) -> np.ndarray:
    """Dense structure tensor ``t[A, B, C]`` with e_A e_B = sum_C t[A,B,C] e_C."""
    _check_dim(n)
    size = 1 << n
    t = np.zeros((size, size, size))
    for a in range(size):
        for b in range(size):
            t[a, b, a ^ b] = blade_sign(a, b)
    t.setflags(write=False)
    return t


@lru_cache(maxsize=None)
def conjugation_signs(n: int) -> np.ndarray:
    size = 1 << n
    grades = np.array([bin(a).count("1") for a in range(size)])
    signs = np.where((grades * (grades + 1) // 2) % 2 == 0, 1.0, -1.0)
    signs.setflags(write=False)
    return signs


def index_to_key(a: int) -> str:
    """Multi-index bitmask to its digit string, e.g. 0b101 -> "13"."""
    return "".join(str(i + 1) for i in range(a.bit_length()) if a >> i & 1)


def key_to_index(key: str, n: int) -> int:
    a = 0
    last = 0
    for ch in key:
        i = int(ch)
        if not 1 <= i <= n or i <= last:
            raise ValueError(f"invalid multi-index {key!r} for n={n}")
        a |= 1 << (i - 1)
        last = i
    return a


@dataclass(frozen=True, eq=False)
class Multivector:
    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        _check_dim(self.n)
        c = np.array(self.coeffs, dtype=float)
        if c.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} coefficients, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zero(cls, n: int) -> Multivector:
        return cls(n, np.zeros(1 << n))

    @classmethod
    def scalar(cls, n: int, value: float) -> Multivector:
        c = np.zeros(1 << n)
        c[0] = value
        return cls(n, c)

    @classmethod
    def blade(cls, n: int, *units: int, coeff: float = 1.0) -> Multivector:
        """Product e_{i1} e_{i2} ... of the given units (any order, repeats allowed)."""
        out = cls.scalar(n, coeff)
        for i in units:
            if not 1 <= i <= n:
                raise ValueError(f"unit e{i} not in R_{n}")
            c = np.zeros(1 << n)
            c[1 << (i - 1)] = 1.0
            out = out * cls(n, c)
        return out

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = Multivector.scalar(self.n, other)
        if not isinstance(other, Multivector):
            return NotImplemented
        _same_dim(self, other)
        return Multivector(self.n, self.coeffs + other.coeffs)

    __radd__ = __add__

    def __neg__(self):
        return Multivector(self.n, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Multivector(self.n, self.coeffs * other)
        if isinstance(other, Multivector):
            return clifford_mul(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return Multivector(self.n, self.coeffs * other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return Multivector(self.n, self.coeffs / other)
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.coeffs, other.coeffs))

    def __hash__(self):
        return hash((self.n, self.coeffs.tobytes()))

    def allclose(self, other: Multivector, rtol: float = 1e-12, atol: float = 1e-12) -> bool:
        _same_dim(self, other)
        return bool(np.allclose(self.coeffs, other.coeffs, rtol=rtol, atol=atol))

    def __repr__(self):
        terms = []
        for a, c in enumerate(self.coeffs):
            if c != 0:
                terms.append(f"{c:g}" + (f"*e{index_to_key(a)}" if a else ""))
        return f"Multivector<n={self.n}>(" + (" + ".join(terms) or "0") + ")"

    @property
    def scalar_part(self) -> float:
        return float(self.coeffs[0])

    def is_paravector(self, atol: float = 0.0) -> bool:
        grades = np.array([bin(a).count("1") for a in range(1 << self.n)])
        return bool(np.all(np.abs(self.coeffs[grades > 1]) <= atol))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "coeffs": {index_to_key(a): float(c) for a, c in enumerate(self.coeffs) if c != 0},
        }

    @classmethod
    def from_json(cls, data: dict | str) -> Multivector:
        if isinstance(data, str):
            data = json.loads(data)
        n = int(data["n"])
        c = np.zeros(1 << n)
        for key, value in data.get("coeffs", {}).items():
            c[key_to_index(key, n)] = float(value)
        return cls(n, c)


def _same_dim(a: Multivector, b: Multivector) -> None:
    if a.n != b.n:
        raise AlgebraMismatchError(f"R_{a.n} vs R_{b.n}")


def clifford_mul(a: Multivector, b: Multivector) -> Multivector:
    _same_dim(a, b)
    c = np.einsum("i,j,ijk->k", a.coeffs, b.coeffs, product_table(a.n))
    return Multivector(a.n, c)


def conjugate(s: Multivector) -> Multivector:
    return Multivector(s.n, s.coeffs * conjugation_signs(s.n))


def modulus_sq(s: Multivector | Paravector) -> float:
    return float(np.dot(s.coeffs, s.coeffs))


@dataclass(frozen=True, eq=False)
class Paravector:
    """s0 + s1 e1 + ... + sn en, stored as the n+1 real coordinates."""

    n: int
    coords: np.ndarray

    def __post_init__(self):
        _check_dim(self.n)
        c = np.array(self.coords, dtype=float)
        if c.shape != (self.n + 1,):
            raise ValueError(f"expected {self.n + 1} coordinates, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @classmethod
    def real(cls, n: int, value: float) -> Paravector:
        c = np.zeros(n + 1)
        c[0] = value
        return cls(n, c)

    @classmethod
    def from_slice(cls, x: float, y: float, J: Paravector) -> Paravector:
        """x + J y."""
        return cls(J.n, np.concatenate(([x], y * J.coords[1:])))

    @classmethod
    def from_multivector(cls, m: Multivector, atol: float = 0.0) -> Paravector:
        if not m.is_paravector(atol):
            raise ValueError("multivector has components of grade > 1")
        return cls(m.n, m.coeffs[[0] + [1 << i for i in range(m.n)]])

    @property
    def coeffs(self) -> np.ndarray:
        return self.coords

    @property
    def s0(self) -> float:
        return float(self.coords[0])

    @property
    def imag_norm(self) -> float:
        return float(np.linalg.norm(self.coords[1:]))

    @property
    def is_real(self) -> bool:
        return not np.any(self.coords[1:])

    def to_multivector(self) -> Multivector:
        c = np.zeros(1 << self.n)
        c[0] = self.coords[0]
        for i in range(self.n):
            c[1 << i] = self.coords[i + 1]
        return Multivector(self.n, c)

    def conj(self) -> Paravector:
        return Paravector(self.n, np.concatenate(([self.coords[0]], -self.coords[1:])))

    def __eq__(self, other):
        if not isinstance(other, Paravector):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.coords, other.coords))

    def __hash__(self):
        return hash((self.n, self.coords.tobytes()))

    def __repr__(self):
        return f"Paravector<n={self.n}>({', '.join(f'{c:g}' for c in self.coords)})"

    def to_json(self) -> list[float]:
        return [float(c) for c in self.coords]


@dataclass(frozen=True)
class SliceCoords:
    x: float
    y: float
    J: Paravector

    def reconstruct(self) -> Paravector:
        return Paravector.from_slice(self.x, self.y, self.J)


def unit(n: int, i: int = 1) -> Paravector:
    c = np.zeros(n + 1)
    c[i] = 1.0
    return Paravector(n, c)


def slice_decompose(s: Paravector) -> SliceCoords:
    y = s.imag_norm
    if y == 0.0:
        return SliceCoords(s.s0, 0.0, unit(s.n, 1))
    J = Paravector(s.n, np.concatenate(([0.0], s.coords[1:] / y)))
    return SliceCoords(s.s0, y, J)


def sample_sphere(n: int, seed: int, count: int) -> list[Paravector]:
    """Seeded unit purely imaginary paravectors.

    For n = 1 the sphere is {e1, -e1}; the sign is fixed to +e1.
    """
    _check_dim(n)
    if count < 1:
        raise ValueError("count must be >= 1")
    if n == 1:
        return [unit(1, 1) for _ in range(count)]
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        g = rng.standard_normal(n)
        r = np.linalg.norm(g)
        if r < 1e-8:
            continue
        out.append(Paravector(n, np.concatenate(([0.0], g / r))))
    return out


def ds_metric(s: Paravector, q: Paravector) -> float:
    """max{2|s0 - q0|, ||s|^2 - |q|^2|}; zero on each sphere [s]."""
    if s.n != q.n:
        raise AlgebraMismatchError(f"R_{s.n} vs R_{q.n}")
    return max(2.0 * abs(s.s0 - q.s0), abs(modulus_sq(s) - modulus_sq(q)))


def slice_inverse(c: Multivector) -> Multivector:
    """Inverse of a Clifford number that lies in a single slice plane C_J.

    Raises ZeroDivisionError when the element is (numerically) zero.
    """
    if not c.is_paravector(atol=1e-12 * max(1.0, math.sqrt(modulus_sq(c)))):
        raise ValueError("element is not in a slice plane")
    p = Paravector.from_multivector(c, atol=np.inf)
    m2 = modulus_sq(p)
    if m2 == 0.0:
        raise ZeroDivisionError("zero has no inverse")
    return p.conj().to_multivector() / m2
