"""Acceptance criteria 1-11, each at its stated tolerance.

Every test appends a one-line verdict to RESULTS; the conftest hook prints
them at the end of the run.  ``python3 tests/test_acceptance.py`` runs the
suite standalone.
"""

import subprocess
import sys
import time

import numpy as np
import pytest

from cliffspec.boundary import assemble, commutator_kernel, commutator_matrix, image_characterization
from cliffspec.clifford import (
    Multivector,
    Paravector,
    clifford_mul,
    conjugate,
    ds_metric,
    modulus_sq,
    sample_sphere,
    slice_decompose,
)
from cliffspec.module import CliffordOperator, CliffordVector, left_scalar_mul, mult_operator, right_scalar_mul
from cliffspec.resolvents import (
    DERIVATIVES,
    convergence_radius,
    cr_equivalence_check,
    cr_matrices,
    finite_difference,
    neumann_series,
    residual_left_eq,
    residual_resolvent_eq,
    residual_right_eq,
)
from cliffspec.scan import ScanGrid, axial_symmetry_check, scan
from cliffspec.zoo import gradient_1d, linear

from conftest import FIXTURES, model_2d_builder, shipped_models

RESULTS: list[str] = []


def verdict(k: int, ok: bool, detail: str) -> None:
    RESULTS.append(f"criterion {k:2d} {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def dirichlet():
    return gradient_1d(12, a=linear(1.0, 0.5), bc="dirichlet", n=2)


E1 = Paravector(2, [0.0, 1.0, 0.0])
RESOLVENT_POINTS = [(1.0, 2.0), (0.5, 0.0), (-0.3, 1.1), (2.5, 0.7), (0.0, 3.0)]


def test_criterion_01_algebra_laws():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    exact_ok = True
    count = 0
    for n in range(1, 6):
        size = 1 << n
        for trial in range(2000):
            integer = trial % 2 == 0
            draw = (lambda k: rng.integers(-5, 6, k).astype(float)) if integer else rng.standard_normal
            a, b, c = (Multivector(n, draw(size)) for _ in range(3))
            lhs = clifford_mul(a, clifford_mul(b, c))
            rhs = clifford_mul(clifford_mul(a, b), c)
            # pure-imaginary paravectors anticommute up to twice their inner product
            u, w = (Paravector(n, np.concatenate(([0.0], draw(n)))).to_multivector() for _ in range(2))
            anti = clifford_mul(u, w) + clifford_mul(w, u) + Multivector.scalar(n, 2.0 * float(u.coeffs @ w.coeffs))
            s, t = (Paravector(n, draw(n + 1)).to_multivector() for _ in range(2))
            conj_l = conjugate(clifford_mul(s, t))
            conj_r = clifford_mul(conjugate(t), conjugate(s))
            if integer:
                exact_ok &= lhs == rhs and not anti.coeffs.any() and conj_l == conj_r
            else:
                scale = np.linalg.norm(a.coeffs) * np.linalg.norm(b.coeffs) * np.linalg.norm(c.coeffs)
                worst = max(
                    worst,
                    np.linalg.norm((lhs - rhs).coeffs) / scale,
                    np.linalg.norm(anti.coeffs) / (np.linalg.norm(u.coeffs) * np.linalg.norm(w.coeffs)),
                    np.linalg.norm((conj_l - conj_r).coeffs) / (np.linalg.norm(s.coeffs) * np.linalg.norm(t.coeffs)),
                )
            count += 1
    elapsed = time.perf_counter() - start
    verdict(
        1,
        exact_ok and worst <= 1e-12 and elapsed < 5.0 and count == 10_000,
        f"{count} triples, integer exact={exact_ok}, float rel={worst:.2e}, {elapsed:.2f}s",
    )


def test_criterion_02_norm_laws():
    rng = np.random.default_rng(2)
    worst_bound = 0.0
    worst_eq = 0.0
    for k in range(1000):
        n, m = 1 + k % 5, 1 + k % 4
        v = CliffordVector.random(n, m, rng)
        s = Multivector(n, rng.standard_normal(1 << n))
        bound = 2 ** (n / 2) * np.sqrt(modulus_sq(s)) * v.norm()
        worst_bound = max(worst_bound, left_scalar_mul(s, v).norm() / bound, right_scalar_mul(v, s).norm() / bound)
        p = Paravector(n, rng.standard_normal(n + 1))
        exact = np.sqrt(modulus_sq(p)) * v.norm()
        worst_eq = max(
            worst_eq,
            abs(right_scalar_mul(v, p).norm() - exact) / exact,
            abs(left_scalar_mul(p, v).norm() - exact) / exact,
        )
    verdict(
        2,
        worst_bound <= 1 + 1e-12 and worst_eq <= 1e-12,
        f"max ||sv||/bound={worst_bound:.6f}, paravector equality rel={worst_eq:.2e}",
    )


def test_criterion_03_commutator_kernel():
    g = dirichlet()
    angles, dims = [], []
    for x, y in RESOLVENT_POINTS:
        R = assemble(g.T, Paravector.from_slice(x, y, E1), g.spec)
        ker, img = commutator_kernel(R), image_characterization(R)
        angles.append(ker.max_angle(img))
        dims.append((ker.dim, img.dim))
    worst = max(angles)
    verdict(3, worst < 1e-7 and all(a == b for a, b in dims), f"dims {dims}, max angle {worst:.2e}")


def test_criterion_04_neumann_series():
    start = time.perf_counter()
    g = dirichlet()
    q = Paravector(2, [0.0, 3.0, 0.0])
    Rq = assemble(g.T, q, g.spec)
    eps = convergence_radius(Rq)
    r2q = modulus_sq(q)
    ratios, finals, ds = [], [], []
    for d0, d2 in [(0.25, 0.0), (0.0, 0.5), (-0.25, -0.5)]:
        s0 = d0 * eps
        s = Paravector.from_slice(s0, np.sqrt(r2q + d2 * eps - s0 * s0), E1)
        ds.append(ds_metric(s, q) / eps)
        exact = assemble(g.T, s, g.spec).G
        norm = np.linalg.norm(exact, 2)
        res = neumann_series(Rq, s, 40, keep_partial_sums=True)
        errs = [np.linalg.norm(p - exact, 2) for p in res.partial_sums]
        floor = 1e-12 * norm
        ratios.append(max(errs[k + 1] / errs[k] for k in range(len(errs) - 1) if errs[k + 1] > floor))
        finals.append(errs[-1] / norm)
    elapsed = time.perf_counter() - start
    ok = (
        np.allclose(ds, 0.5)
        and max(ratios) <= 0.5 + 1e-6
        and max(finals) <= 1e-9
        and elapsed < 10.0
    )
    verdict(4, ok, f"d_S/eps*={np.round(ds, 12).tolist()}, max ratio {max(ratios):.3f}, final rel {max(finals):.1e}, {elapsed:.2f}s")


def test_criterion_05_derivatives():
    rng = np.random.default_rng(5)
    worst = 0.0
    for g in (dirichlet(), model_2d_builder()):
        for x, y in zip(rng.uniform(-1.0, 1.0, 5), rng.uniform(1.0, 3.0, 5)):
            J = sample_sphere(g.n, int(rng.integers(1 << 30)), 1)[0]
            R = assemble(g.T, Paravector.from_slice(x, y, J), g.spec)
            for name, f in DERIVATIVES.items():
                exact = f(R)
                fd = finite_difference(g.T, g.spec, R.s, name, h=1e-5)
                worst = max(worst, np.linalg.norm(exact - fd) / np.linalg.norm(exact))
    verdict(5, worst <= 1e-6, f"max relative FD mismatch {worst:.2e} over 2 models x 5 points x 4 formulas")


def cr_relative(R):
    first, second = cr_matrices(R)
    G, TG = R.G, R.TG
    sc = slice_decompose(R.s)
    nrm = lambda A: np.linalg.norm(A, 2)
    s1 = nrm(TG @ TG) + abs(sc.x) * (nrm(TG @ G) + nrm(G @ TG)) + nrm(G) + modulus_sq(R.s) * nrm(G @ G)
    s2 = sc.y * (nrm(TG @ G) + nrm(G @ TG))
    return max(nrm(first) / s1, nrm(second) / s2 if s2 else 0.0)


def test_criterion_06_classical_case():
    rng = np.random.default_rng(6)
    worst_cr = worst_comm = 0.0
    for k in range(10):
        n, m = 1 + k % 3, 2 + k % 5
        T = CliffordOperator.random(n, m, rng, 0.3)
        J = sample_sphere(n, k, 1)[0]
        for x, y in zip(rng.uniform(-1.0, 1.0, 5), rng.uniform(1.5, 3.0, 5)):
            R = assemble(T, Paravector.from_slice(x, y, J))
            K = commutator_matrix(R)
            terms = np.linalg.norm(R.TG, 2) + np.linalg.norm(R.G @ R.T_rep, 2)
            worst_comm = max(worst_comm, np.linalg.norm(K, 2) / terms)
            worst_cr = max(worst_cr, cr_relative(R))
    verdict(6, worst_cr <= 1e-10 and worst_comm <= 1e-10, f"CR rel {worst_cr:.2e}, commutator rel {worst_comm:.2e}")


def test_criterion_07_cr_summary():
    g = dirichlet()
    R = assemble(g.T, Paravector(2, [1.0, 2.0, 0.0]), g.spec)
    rep = cr_equivalence_check(R)
    real = cr_equivalence_check(assemble(g.T, Paravector.real(2, 0.5), g.spec))
    ok = (
        rep.second_cr_null_dim == rep.reference_null_dim
        and rep.second_cr_angle < 1e-7
        and rep.first_cr_on_null <= 1e-9
        and real.passed
        and real.max_angle < 1e-7
    )
    verdict(
        7,
        ok,
        f"s=1+2e1: null dims {rep.second_cr_null_dim}/{rep.reference_null_dim}, angle {rep.second_cr_angle:.1e}, "
        f"first CR {rep.first_cr_on_null:.1e}; s=0.5: dims {real.cr_null_dim}/{real.reference_null_dim}, angle {real.max_angle:.1e}",
    )


def test_criterion_08_resolvent_equations():
    rng = np.random.default_rng(8)
    pairs = [((1.0, 2.0), (0.2, 3.0)), ((0.5, 0.0), (-0.3, 1.1)), ((-0.3, 1.1), (2.0, 0.5))]
    g = dirichlet()
    algebraic = CliffordOperator.random(3, 4, rng, 0.3)
    worst = {}
    for mode, T, spec, tol in (("boundary", g.T, g.spec, 1e-9), ("algebraic", algebraic, None, 1e-10)):
        J = sample_sphere(T.n, 8, 2)
        for (sx, sy), (qx, qy) in pairs:
            Rs = assemble(T, Paravector.from_slice(sx, sy, J[0]), spec)
            Rq = assemble(T, Paravector.from_slice(qx, qy, J[1]), spec)
            for k in range(5):
                v = CliffordVector.random(T.n, T.m, rng)
                for rep in (residual_left_eq(Rs, v, k), residual_right_eq(Rs, v, k), residual_resolvent_eq(Rs, Rq, v, k)):
                    assert rep.mode == mode
                    worst[mode] = max(worst.get(mode, 0.0), rep.rel_residual)
    ok = worst["boundary"] <= 1e-9 and worst["algebraic"] <= 1e-10
    verdict(8, ok, f"worst relative residual: algebraic {worst['algebraic']:.1e}, boundary {worst['boundary']:.1e}")


def test_criterion_09_known_answer_scan():
    start = time.perf_counter()
    T = mult_operator(Paravector(2, [1.0, 1.0, 0.0]), 1)
    notes = []
    ok = True
    for nodes in (200, 201):
        smap = scan(T, None, ScanGrid.square(0.0, 2.0, nodes, nodes, E1), threshold=1e-6)
        dx, dy = smap.grid.spacing
        x, y = smap.argmin()
        near = abs(x - 1.0) <= dx and abs(y - 1.0) <= dy
        flagged = np.argwhere(smap.in_spectrum)
        adjacent = all(
            abs(smap.grid.xs[i] - 1.0) <= dx and abs(smap.grid.ys[j] - 1.0) <= dy for j, i in flagged
        )
        ok &= near and adjacent
        notes.append(f"{nodes}x{nodes}: argmin ({x:.4f}, {y:.4f}), {len(flagged)} flagged")
    elapsed = time.perf_counter() - start
    verdict(9, ok and elapsed < 30.0, "; ".join(notes) + f", {elapsed:.2f}s")


def test_criterion_10_axial_symmetry():
    rng = np.random.default_rng(10)
    points = [(float(x), float(y)) for x, y in zip(rng.uniform(-2.0, 2.0, 20), rng.uniform(0.0, 3.0, 20))]
    worst = {}
    for name, T, spec in shipped_models():
        rep = axial_symmetry_check(T, spec, points, sample_sphere(T.n, 10, 5), rtol=1e-10)
        worst[name] = rep.max_rel_spread
    top = max(worst.values())
    verdict(10, top <= 1e-10, f"{len(worst)} models, worst relative spread {top:.1e}")


def test_criterion_11_determinism(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        out.mkdir()
        proc = subprocess.run(
            [sys.executable, "-m", "cliffspec.cli", "verify", "--config", str(FIXTURES / "dirichlet.toml"), "--out", str(out)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        outs.append((out / "verify.jsonl").read_bytes())
    verdict(11, outs[0] == outs[1] and len(outs[0]) > 0, f"two verify runs, {len(outs[0])} bytes each, identical={outs[0] == outs[1]}")


if __name__ == "__main__":
    code = pytest.main([__file__, "-q", "-p", "no:cacheprovider"])
    sys.exit(code)
