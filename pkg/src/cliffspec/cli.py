"""Command line driver: ``cliffspec {scan,verify,series,kernel} --config job.toml``.

Exit codes: 0 all checks passed, 1 a numerical check failed, 2 bad
configuration, 3 output could not be written.  Every artifact embeds the
resolved configuration and nothing time-dependent, so reruns are
byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .boundary import (
    SpectrumPointError,
    assemble,
    commutator_kernel,
    commutator_matrix,
    hidden_boundary_subspace,
    image_characterization,
)
from .clifford import Paravector, ds_metric, slice_decompose
from .config import ConfigError, build_model, load_config, slice_points, unit_J
from .module import CliffordVector
from .resolvents import (
    DegeneratePairError,
    convergence_radius,
    cr_equivalence_check,
    cr_matrices,
    neumann_series,
    residual_left_eq,
    residual_resolvent_eq,
    residual_right_eq,
    resolvent_factor_inverse,
    s_left,
    slice_functions,
)
from .scan import ScanGrid, emit_csv, metadata, scan

log = logging.getLogger("cliffspec")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


class OutputError(OSError):
    pass


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True)


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _model_json(T, spec) -> tuple[dict, dict]:
    return {"n": T.n, "m": T.m}, spec.to_json()


def run_scan(cfg: dict, out: Path, threads: int) -> int:
    T, spec = build_model(cfg)
    sc = cfg["scan"]
    n = T.n
    try:
        grid = ScanGrid(
            (float(sc["x_range"][0]), float(sc["x_range"][1])),
            float(sc["y_max"]),
            int(sc["nx"]),
            int(sc["ny"]),
            unit_J(n, sc["J"], "scan.J"),
        )
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"invalid scan grid: {exc}") from exc
    smap = scan(T, spec, grid, float(sc["threshold"]), threads=threads)
    try:
        emit_csv(smap, out / "scan.csv")
    except OSError as exc:
        raise OutputError(str(exc)) from exc
    op, sp = _model_json(T, spec)
    meta = metadata(smap, op, sp)
    meta["config"] = cfg
    meta["argmin"] = list(smap.argmin())
    meta["in_spectrum_count"] = int(smap.in_spectrum.sum())
    _write_text(out / "scan.json", _dumps(meta) + "\n")
    log.info("scan: %d nodes flagged, argmin %s", meta["in_spectrum_count"], meta["argmin"])
    return EXIT_OK


def _check(record: dict, value: float, tol: float) -> dict:
    record["value"] = float(value)
    record["tol"] = float(tol)
    record["passed"] = bool(value <= tol)
    return record


def _verify_point(T, spec, s: Paravector, cfg: dict, q_list, rng) -> list[dict]:
    tols = cfg["tolerances"]
    pt = [float(c) for c in s.coords]
    try:
        R = assemble(T, s, spec)
    except SpectrumPointError as exc:
        return [{"check": "invertible", "point": pt, "passed": False, "value": exc.sigma_min, "tol": 0.0, "detail": str(exc)}]
    tol = tols["algebraic"] if R.algebraic else tols["boundary"]
    records = []
    vectors = [CliffordVector.random(T.n, T.m, rng) for _ in range(int(cfg["verify"]["vectors"]))]
    for k, v in enumerate(vectors):
        for rep in (residual_left_eq(R, v, k), residual_right_eq(R, v, k)):
            records.append(_check({"check": rep.identity, "point": pt, "vector_id": k, "mode": R.mode}, rep.rel_residual, tol))
        for q in q_list:
            Rq = assemble(T, q, spec)
            rep = residual_resolvent_eq(R, Rq, v, k)
            records.append(_check(
                {"check": rep.identity, "point": pt, "q_point": rep.q_point, "vector_id": k, "mode": R.mode},
                rep.rel_residual,
                tol,
            ))

    # f0 even and f1 odd in y; f0 + f1 J reproduces S_L
    sc = slice_decompose(s)
    up = slice_functions(T, spec, sc.x, sc.y, sc.J)
    down = slice_functions(T, spec, sc.x, -sc.y, sc.J)
    SL = s_left(R)
    g = max(float(np.linalg.norm(SL, 2)), 1e-300)
    sym = max(
        float(np.linalg.norm(up.f0 - down.f0, 2)),
        float(np.linalg.norm(up.f1 + down.f1, 2)),
        float(np.linalg.norm(up.right_slice() - SL, 2)),
    ) / g
    records.append(_check({"check": "slice_symmetry", "point": pt, "mode": R.mode}, sym, tols["symmetry"]))

    K = commutator_matrix(R)
    if R.algebraic:
        scale = float(np.linalg.norm(R.T_rep, 2) * np.linalg.norm(R.G, 2)) or 1.0
        records.append(_check({"check": "commutator_zero", "point": pt, "mode": R.mode}, float(np.linalg.norm(K, 2)) / scale, tol))
        first, second = cr_matrices(R)
        g2 = float(np.linalg.norm(R.G, 2)) ** 2 * (1.0 + float(np.linalg.norm(R.T_rep, 2))) ** 2
        cr = max(float(np.linalg.norm(first, 2)), float(np.linalg.norm(second, 2))) / g2
        records.append(_check({"check": "cr_residual", "point": pt, "mode": R.mode}, cr, tol))
    else:
        ker = commutator_kernel(R)
        img = image_characterization(R)
        rec = {"check": "commutator_kernel", "point": pt, "mode": R.mode, "kernel_dim": ker.dim, "image_dim": img.dim}
        records.append(_check(rec, ker.max_angle(img), tols["angle"]))
    rep = cr_equivalence_check(R, tol=tols["angle"], residual_tol=tol)
    rec = {"check": "cr_equivalence", "point": pt, "mode": R.mode, "cr_null_dim": rep.cr_null_dim, "reference_null_dim": rep.reference_null_dim}
    rec = _check(rec, rep.max_angle, tols["angle"])
    rec["passed"] = bool(rep.passed)
    records.append(rec)
    return records


def run_verify(cfg: dict, out: Path, threads: int) -> int:
    T, spec = build_model(cfg)
    vc = cfg["verify"]
    points = slice_points(T.n, vc, "points")
    q_list = slice_points(T.n, vc, "q_points")
    for s in points:
        for q in q_list:
            try:
                resolvent_factor_inverse(s, q)
            except DegeneratePairError as exc:
                raise ConfigError(str(exc)) from exc
    rng = np.random.default_rng(int(vc["seed"]))
    lines = [_dumps({"check": "config", "config": cfg})]
    records = []
    for s in points:
        try:
            records.extend(_verify_point(T, spec, s, cfg, q_list, rng))
        except SpectrumPointError as exc:
            records.append({"check": "invertible", "point": [float(c) for c in exc.s.coords], "passed": False, "detail": str(exc)})
    lines.extend(_dumps(r) for r in records)
    _write_text(out / "verify.jsonl", "\n".join(lines) + "\n")
    failed = [r for r in records if not r["passed"]]
    if failed:
        worst = max(failed, key=lambda r: r.get("value", np.inf) / max(r.get("tol", 0.0), 1e-300))
        print(f"FAIL {len(failed)}/{len(records)} checks; worst: {_dumps(worst)}", file=sys.stderr)
        return EXIT_FAIL
    log.info("verify: %d checks passed", len(records))
    return EXIT_OK


def _series_targets(T, sec, q: Paravector, eps: float) -> list[Paravector]:
    J = unit_J(T.n, sec["J"], "series.J")
    out = slice_points(T.n, {"J": sec["J"], "targets": sec["targets"]}, "targets")
    for k, off in enumerate(sec["offsets"]):
        if len(off) != 2:
            raise ConfigError(f"offsets[{k}] must be a (d_s0, d_modulus_sq) pair")
        s0 = q.s0 + float(off[0]) * eps
        r2 = float(np.dot(q.coords, q.coords)) + float(off[1]) * eps
        y2 = r2 - s0 * s0
        if y2 < 0.0:
            raise ConfigError(f"offsets[{k}] gives |s|^2 < s0^2")
        out.append(Paravector.from_slice(s0, float(np.sqrt(y2)), J))
    if not out:
        raise ConfigError("series needs at least one target or offset")
    return out


def run_series(cfg: dict, out: Path, threads: int) -> int:
    T, spec = build_model(cfg)
    sec = cfg["series"]
    terms = int(sec["terms"])
    if terms < 1:
        raise ConfigError("series.terms must be >= 1")
    q = slice_points(T.n, {"J": sec["J"], "center": [sec["center"]]}, "center")[0]
    try:
        Rq = assemble(T, q, spec)
    except SpectrumPointError as exc:
        raise ConfigError(f"series center is in the spectrum: {exc}") from exc
    eps = convergence_radius(Rq)
    slack = float(cfg["tolerances"]["ratio_slack"])
    rows = []
    summary = []
    status = EXIT_OK
    for tid, s in enumerate(_series_targets(T, sec, q, eps)):
        d = ds_metric(s, q)
        try:
            exact = assemble(T, s, spec).G
        except SpectrumPointError:
            exact = None
        res = neumann_series(Rq, s, terms, keep_partial_sums=True)
        errors = [float(np.linalg.norm(p - exact, 2)) if exact is not None else float("nan") for p in res.partial_sums]
        floor = 1e-12 * (float(np.linalg.norm(exact, 2)) if exact is not None else 1.0)
        ratios = [errors[k + 1] / errors[k] for k in range(len(errors) - 1) if errors[k] > floor and errors[k + 1] > floor]
        observed = max(ratios) if ratios else 0.0
        for k, err in enumerate(errors):
            rows.append([tid, k, f"{err:.17g}", f"{res.error_bound(k):.17g}"])
        entry = {
            "target_id": tid,
            "target": s.to_json(),
            "d_s": d,
            "eps_star": res.eps_star,
            "inside": res.inside,
            "ratio_bound": res.ratio_bound,
            "observed_max_ratio": observed,
            "final_error": errors[-1],
            "diverged": res.diverged,
        }
        if res.inside:
            ok = not res.diverged and exact is not None and observed <= res.ratio_bound + slack
            ok = ok and errors[-1] <= res.error_bound(len(errors) - 1) * (1.0 + slack) + floor
            entry["passed"] = bool(ok)
            if not ok:
                status = EXIT_FAIL
                print(f"FAIL series target {tid}: {_dumps(entry)}", file=sys.stderr)
        else:
            entry["passed"] = True
            log.warning("target %d lies outside the convergence radius (d_S = %.6g >= %.6g)", tid, d, res.eps_star)
        summary.append(entry)
    try:
        with (out / "series.csv").open("w", newline="", encoding="ascii") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["target_id", "term", "error", "bound"])
            w.writerows(rows)
    except OSError as exc:
        raise OutputError(f"cannot write {out / 'series.csv'}: {exc.strerror or exc}") from exc
    doc = {"config": cfg, "center": q.to_json(), "eps_star": eps, "targets": summary}
    _write_text(out / "series.json", _dumps(doc) + "\n")
    return status


def run_kernel(cfg: dict, out: Path, threads: int) -> int:
    T, spec = build_model(cfg)
    angle_tol = float(cfg["tolerances"]["angle"])
    results = []
    status = EXIT_OK
    for s in slice_points(T.n, cfg["kernel"], "points"):
        pt = [float(c) for c in s.coords]
        try:
            R = assemble(T, s, spec)
        except SpectrumPointError as exc:
            raise ConfigError(f"kernel point in the spectrum: {exc}") from exc
        ker = commutator_kernel(R)
        img = image_characterization(R)
        hidden = hidden_boundary_subspace(R)
        angle = ker.max_angle(img)
        entry = {
            "point": pt,
            "mode": R.mode,
            "dim": R.dim,
            "kernel_dim": ker.dim,
            "codim": ker.codim,
            "image_dim": img.dim,
            "hidden_boundary_dim": hidden.dim,
            "max_angle": angle,
            "passed": bool(ker.dim == img.dim and angle <= angle_tol),
        }
        if not entry["passed"]:
            status = EXIT_FAIL
            print(f"FAIL kernel at {pt}: {_dumps(entry)}", file=sys.stderr)
        results.append(entry)
    _write_text(out / "kernel.json", _dumps({"config": cfg, "points": results}) + "\n")
    return status


COMMANDS = {"scan": run_scan, "verify": run_verify, "series": run_series, "kernel": run_kernel}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cliffspec", description="S-spectrum computations for Clifford module operators.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="TOML job file")
    p.add_argument("--out", default=".", help="existing output directory (default: .)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    if not out.is_dir():
        print(f"error: output directory {out} does not exist", file=sys.stderr)
        return EXIT_IO
    try:
        return COMMANDS[args.command](cfg, out, args.threads)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OutputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
