"""Command-line front end: config ingestion, verification suites, reports.

Commands: derive, constant, verify-optimizer, geometry, eigen, scan, report.
Exit codes: 0 all checks pass, 1 a check failed, 2 configuration or domain
error.  With a fixed config and seed every command is byte-deterministic
apart from the "timings" block of reports.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import calculus, optimizers, special, spectral
from .params import CknParams, DomainError, MonomialWeight, derive, theorem_hypotheses
from .quadrature import ConvergenceError, integrate_S
from .rng import stream

SCHEMA_VERSION = "mckn-report-1"


class ConfigError(ValueError):
    """Malformed or out-of-range configuration."""


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

@dataclass
class Config:
    d: int
    A: tuple[float, ...]
    a: float
    b: float
    radial_nodes: int = 64
    sphere_nodes: int = 64
    doubling_max: int = 512
    tol_quad: float = 1e-10
    tol_identity: float = 1e-8
    tol_eigen: float = 1e-6
    seed: int = 42
    out_format: str = "json"
    out_path: str | None = None

    def params(self) -> CknParams:
        return CknParams(weight=MonomialWeight(d=self.d, A=self.A), a=self.a, b=self.b)

    def echo(self) -> dict:
        return {
            "d": self.d,
            "A": list(self.A),
            "a": self.a,
            "b": self.b,
            "quadrature": {
                "radial_nodes": self.radial_nodes,
                "sphere_nodes": self.sphere_nodes,
                "doubling_max": self.doubling_max,
            },
            "tolerances": {
                "quad": self.tol_quad,
                "identity": self.tol_identity,
                "eigen": self.tol_eigen,
            },
            "seed": self.seed,
            "output": {"format": self.out_format, "path": self.out_path},
        }


_TOP_KEYS = {"d", "A", "a", "b", "quadrature", "tolerances", "seed", "output"}


def load_config(path: str) -> Config:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("d", "A", "a", "b"):
        if key not in raw:
            raise ConfigError(f"missing required config field '{key}'")
    quad = raw.get("quadrature", {})
    tols = raw.get("tolerances", {})
    out = raw.get("output", {})
    for sub, allowed in ((quad, {"radial_nodes", "sphere_nodes", "doubling_max"}),
                         (tols, {"quad", "identity", "eigen"}),
                         (out, {"format", "path"})):
        if not isinstance(sub, dict):
            raise ConfigError("quadrature/tolerances/output must be objects")
        bad = set(sub) - allowed
        if bad:
            raise ConfigError(f"unknown config keys: {sorted(bad)}")
    fmt = out.get("format", "json")
    if fmt not in ("json", "csv"):
        raise ConfigError(f"output.format must be 'json' or 'csv', got {fmt!r}")
    try:
        cfg = Config(
            d=int(raw["d"]),
            A=tuple(float(x) for x in raw["A"]),
            a=float(raw["a"]),
            b=float(raw["b"]),
            radial_nodes=int(quad.get("radial_nodes", 64)),
            sphere_nodes=int(quad.get("sphere_nodes", 64)),
            doubling_max=int(quad.get("doubling_max", 512)),
            tol_quad=float(tols.get("quad", 1e-10)),
            tol_identity=float(tols.get("identity", 1e-8)),
            tol_eigen=float(tols.get("eigen", 1e-6)),
            seed=int(raw.get("seed", 42)),
            out_format=fmt,
            out_path=out.get("path"),
        )
    except (TypeError, ValueError) as err:
        raise ConfigError(f"malformed config value: {err}") from err
    return cfg


def thread_cap() -> int:
    """Parallelism cap from CKN_THREADS; execution is sequential either way."""
    try:
        return max(1, int(os.environ.get("CKN_THREADS", "1")))
    except ValueError:
        return 1


# --------------------------------------------------------------------------
# deterministic serialization (floats at 17 significant digits)
# --------------------------------------------------------------------------

def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "null"
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def to_json(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{pad}  {json.dumps(str(k))}: {to_json(v, indent + 1)}'
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}  {to_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    return json.dumps(obj)


def _csv_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        x = float(v)
        return "nan" if math.isnan(x) else format(x, ".17g")
    return str(v)


def rows_to_csv(rows) -> str:
    header = ",".join(spectral.ScanRow.CSV_FIELDS)
    lines = [header]
    for r in rows:
        lines.append(",".join(
            _csv_cell(getattr(r, f)).replace(",", ";") for f in spectral.ScanRow.CSV_FIELDS
        ))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# checks
# --------------------------------------------------------------------------

@dataclass
class Check:
    name: str
    passed: bool
    value: float
    tolerance: float

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "value": self.value,
            "tolerance": self.tolerance,
        }


def _check_le(checks, name, value, tol):
    checks.append(Check(name, bool(value <= tol), float(value), float(tol)))


def _check_ge(checks, name, value, bound):
    checks.append(Check(name, bool(value >= bound), float(value), float(bound)))


# --------------------------------------------------------------------------
# command payloads
# --------------------------------------------------------------------------

def cmd_derive(cfg: Config):
    params = cfg.params()
    dp = derive(params)
    hyp = theorem_hypotheses(params, dp)
    payload = {
        "derived": {
            "D": dp.D, "p": dp.p, "n": dp.n, "alpha": dp.alpha,
            "a_c": dp.a_c, "delta": dp.delta,
            "fs_lhs": dp.fs_lhs, "fs_rhs": dp.fs_rhs,
            "regime": str(dp.regime),
        },
        "hypotheses": {
            "n_gt_4": hyp.n_gt_4,
            "last_exponent_zero": hyp.last_exponent_zero,
            "fs_condition": hyp.fs_condition,
            "classification_strict": hyp.classification_strict,
            "warnings": list(hyp.warnings),
        },
    }
    return payload, []


def cmd_constant(cfg: Config):
    params = cfg.params()
    dp = derive(params)
    consts = special.closed_form_constants(params, dp)
    checks = []
    payload = {
        "constants": {
            "sphere_area": consts.sphere_area,
            "profile_integral": consts.profile_integral,
            "Z_closed": consts.Z,
            "C_opt": consts.C_opt,
        }
    }
    if params.weight.d <= 3:
        z_quad = integrate_S(
            lambda y, th: 1.0, dp, params.weight,
            m=min(cfg.sphere_nodes, cfg.radial_nodes),
            tol=cfg.tol_quad, m_max=cfg.doubling_max,
        )
        rel = abs(z_quad / consts.Z - 1.0)
        payload["constants"]["Z_quadrature"] = z_quad
        payload["constants"]["Z_rel_diff"] = rel
        _check_le(checks, "z_closed_vs_quadrature", rel, cfg.tol_quad)
    return payload, checks


def cmd_verify_optimizer(cfg: Config, s: float, t: float):
    params = cfg.params()
    dp = derive(params)
    hyp = theorem_hypotheses(params, dp)
    opt = optimizers.OptimizerE(s, t, dp)
    import warnings as _w
    with _w.catch_warnings():
        _w.simplefilter("ignore", special.OptimalityWarning)
        c_opt = special.optimal_constant(params, dp)
    radii = np.logspace(-2.0, 2.0, 100)
    direction = np.full(params.weight.d, 1.0 / math.sqrt(params.weight.d))
    x = direction[:, None] * radii[None, :]
    el = optimizers.euler_lagrange_residual(opt, params, x)
    _, _, ratio = optimizers.ckn_sides(opt.profile, params, dp, m=cfg.radial_nodes)
    opt_s = optimizers.conformal_E_to_S(opt)
    norm = math.sqrt(opt_s.C**2 - opt_s.B**2)
    opt_sn = optimizers.OptimizerS(opt_s.C / norm, opt_s.B / norm, dp)
    lhs, rhs = optimizers.tight_sobolev_sides(
        lambda y, th: opt_sn.profile(y), params, dp, m=min(cfg.sphere_nodes, 48)
    )
    checks = []
    _check_le(checks, "euler_lagrange_residual", el, cfg.tol_identity)
    _check_le(checks, "ckn_ratio_vs_c_opt", abs(ratio / c_opt - 1.0), 1e-6)
    _check_le(checks, "tight_sobolev_equality", abs(lhs - rhs), cfg.tol_identity)
    payload = {
        "optimizer": {
            "s": s, "t": t,
            "mapped_profile": {"C": opt_s.C, "B": opt_s.B},
            "euler_lagrange_residual": el,
            "ckn_ratio": ratio,
            "c_opt": c_opt,
            "ratio_rel_diff": abs(ratio / c_opt - 1.0),
            "tight_lhs": lhs,
            "tight_rhs": rhs,
            "warnings": list(hyp.warnings),
        }
    }
    return payload, checks


def cmd_geometry(cfg: Config, samples: int, inject_bug: bool = False):
    params = cfg.params()
    dp = derive(params)
    w = params.weight
    drift = 1.01 if inject_bug else 1.0
    checks = []
    if samples <= 0:
        return {"geometry": {"samples": 0}}, checks
    geo = {"samples": samples}
    geo["cd_defect_min"] = calculus.cd_defect_battery(w, samples, cfg.seed)
    _check_ge(checks, "cd_sphere_defect_min", geo["cd_defect_min"], -1e-9)
    geo["warped_identity_max"] = calculus.warped_identity_battery(
        params, dp, max(1, samples // 2), cfg.seed
    )
    _check_le(checks, "warped_identity_max", geo["warped_identity_max"], cfg.tol_identity)
    if w.abs_A > 0:
        ident, slack = calculus.hessian_bound_battery(w, max(1, samples // 2), cfg.seed)
        geo["hessian_identity_max"] = ident
        geo["hessian_slack_min"] = slack
        _check_le(checks, "hessian_identity_max", ident, 1e-10)
        _check_ge(checks, "hessian_slack_min", slack, -1e-10)
    n_int = max(1, min(samples // 5, 50))
    geo["integrated_cd_min"] = calculus.integrated_cd_battery(
        params, dp, n_int, cfg.seed, m=min(cfg.sphere_nodes, 32)
    )
    if dp.regime.value == "symmetric":
        _check_ge(checks, "integrated_cd_min", geo["integrated_cd_min"], -1e-9)
    n_ibp = max(1, min(samples // 10, 30))
    sphere = calculus.MonomialSphere(w, drift_scale=drift)
    worst = 0.0
    gen = stream(cfg.seed, "cli-ibp-sphere")
    for _ in range(n_ibp):
        fp = calculus.RandomPoly(w.d, 3, gen)
        hp = calculus.RandomPoly(w.d, 3, gen)
        worst = max(worst, calculus.ibp_residual_sphere(sphere, fp, hp, m=min(cfg.sphere_nodes, 48)))
    geo["ibp_sphere_max"] = worst
    _check_le(checks, "ibp_sphere_max", worst, cfg.tol_identity)
    model = calculus.ModelS(dp=dp, sphere=sphere)
    worst_s = 0.0
    gen = stream(cfg.seed, "cli-ibp-S")
    for i in range(n_ibp):
        zeta = calculus.ZetaCutoff(3 + (i % 4))
        fp = calculus.RandomPoly(w.d, 2, gen)
        cy = gen.uniform(-1.0, 1.0)
        hp = calculus.RandomPoly(w.d, 2, gen)

        def f(y, th, _fp=fp, _cy=cy):
            return _fp(th) + _cy * y + 0.5 * y * y

        def h(y, th, _z=zeta, _hp=hp):
            return _z(y) * _hp(th)

        worst_s = max(worst_s, calculus.ibp_residual_S(
            model, f, h, m=min(cfg.sphere_nodes, 32),
            h_support=zeta.support, y_breaks=zeta.breaks,
        ))
    geo["ibp_S_max"] = worst_s
    _check_le(checks, "ibp_S_max", worst_s, cfg.tol_identity)
    if inject_bug:
        geo["injected_drift_scale"] = drift
    return {"geometry": geo}, checks


def cmd_eigen(cfg: Config, degree: int):
    params = cfg.params()
    dp = derive(params)
    w = params.weight
    checks = []
    lam = spectral.sphere_first_eigenvalue(w, degree, m=cfg.sphere_nodes)
    _check_le(checks, "lambda_theta_vs_D_minus_1", abs(lam - (w.D - 1.0)), cfg.tol_eigen)
    # theta_d eigenfunction residual at seeded chart points
    gen = stream(cfg.seed, "eigen-residual")
    sphere = calculus.MonomialSphere(w)
    z = calculus._sample_chart_points(w, gen, 200)
    chart = sphere.chart(z)
    td = chart.theta[-1]
    resid = float(np.max(np.abs(-chart.l(td) - (w.D - 1.0) * td.value)))
    _check_le(checks, "theta_d_eigen_residual", resid, 1e-10)
    gap = spectral.radial_spectral_gap_S(dp, max(1, degree), m=cfg.radial_nodes)
    _check_le(checks, "radial_gap_vs_alpha2_n", abs(gap - dp.alpha**2 * dp.n), 1e-8)
    quot = spectral.nonradial_test_quotient(dp, w, m=cfg.sphere_nodes)
    closed = spectral.nonradial_quotient_closed(dp, lam)
    _check_le(checks, "quotient_quad_vs_closed", abs(quot / closed - 1.0), 1e-8)
    verdict = spectral.symmetry_breaking_detector(params, dp, degree=degree,
                                                  m=cfg.sphere_nodes, lambda_theta=lam)
    gap_full, half_d = spectral.full_gap_estimate(params, dp, m=min(cfg.sphere_nodes, 32))
    payload = {
        "spectral": {
            "lambda_theta_1": lam,
            "lambda_theta_target": w.D - 1.0,
            "theta_d_eigen_residual": resid,
            "radial_gap": gap,
            "radial_gap_target": dp.alpha**2 * dp.n,
            "quotient": quot,
            "quotient_closed": closed,
            "threshold": verdict.threshold,
            "verdict": str(verdict.verdict),
            "agrees_with_fs": verdict.agrees_with_fs,
            "full_gap_estimate": gap_full,
            "half_D": half_d,
        }
    }
    return payload, checks


def _parse_range(text: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise ConfigError(f"range must be LO:HI, got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError as err:
        raise ConfigError(f"range must be numeric, got {text!r}") from err
    if not (lo < hi):
        raise ConfigError(f"range must satisfy LO < HI, got {text!r}")
    return lo, hi


def cmd_scan(cfg: Config, a_range, b_range, steps: int):
    if steps < 1:
        raise ConfigError(f"steps must be >= 1, got {steps}")
    params_weight = MonomialWeight(d=cfg.d, A=cfg.A)
    a_vals = np.linspace(a_range[0], a_range[1], steps)
    b_vals = np.linspace(b_range[0], b_range[1], steps)
    rows = spectral.phase_scan(params_weight, a_vals, b_vals,
                               m=cfg.sphere_nodes, tol=cfg.tol_eigen)
    checks = []
    judged = [r for r in rows
              if r.status == "ok" and abs(r.alpha_sq - r.fs_bound) > 1e-3]
    disagreements = sum(1 for r in judged if not r.agree)
    checks.append(Check("scan_detector_agreement", disagreements == 0,
                        float(disagreements), 0.0))
    return rows, checks


def cmd_report(cfg: Config, samples: int, degree: int):
    payload = {"schema_version": SCHEMA_VERSION, "config": cfg.echo(),
               "threads": thread_cap()}
    checks = []
    timings = {}
    for name, fn in (
        ("derive", lambda: cmd_derive(cfg)),
        ("constant", lambda: cmd_constant(cfg)),
        ("optimizer", lambda: cmd_verify_optimizer(cfg, 1.0, 1.0)),
        ("geometry", lambda: cmd_geometry(cfg, samples)),
        ("eigen", lambda: cmd_eigen(cfg, degree)),
    ):
        t0 = time.perf_counter()
        part, part_checks = fn()
        timings[name] = time.perf_counter() - t0
        payload.update(part)
        checks.extend(part_checks)
    payload["checks"] = [c.as_dict() for c in checks]
    payload["verdict"] = "pass" if all(c.passed for c in checks) else "fail"
    payload["timings"] = timings
    return payload, checks


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def _emit(text: str, out_path: str | None):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report_checks(checks, quiet: bool):
    if quiet:
        ok = sum(1 for c in checks if c.passed)
        print(f"{ok}/{len(checks)} checks passed", file=sys.stderr)
        return
    for c in checks:
        mark = "PASS" if c.passed else "FAIL"
        print(f"[{mark}] {c.name}: value={c.value:.6g} tol={c.tolerance:.6g}",
              file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON config path")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--samples", type=int, default=200)
    common.add_argument("--degree", type=int, default=4)
    common.add_argument("--quiet", action="store_true")
    parser = argparse.ArgumentParser(
        prog="mckn",
        description="verify the sharp monomial CKN constant, its optimizers, "
                    "and the curvature machinery behind them",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("derive", parents=[common])
    sub.add_parser("constant", parents=[common])
    pv = sub.add_parser("verify-optimizer", parents=[common])
    pv.add_argument("--s", type=float, default=1.0)
    pv.add_argument("--t", type=float, default=1.0)
    pg = sub.add_parser("geometry", parents=[common])
    pg.add_argument("--inject-bug", action="store_true", help=argparse.SUPPRESS)
    sub.add_parser("eigen", parents=[common])
    ps = sub.add_parser("scan", parents=[common])
    ps.add_argument("--a-range", default="-1.0:0.4")
    ps.add_argument("--b-range", default="-1.0:1.3")
    ps.add_argument("--steps", type=int, default=20)
    sub.add_parser("report", parents=[common])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.format is not None:
            cfg.out_format = args.format
        if args.out is not None:
            cfg.out_path = args.out
        cfg.params()  # validate domain constraints up front
        if args.command == "derive":
            payload, checks = cmd_derive(cfg)
        elif args.command == "constant":
            payload, checks = cmd_constant(cfg)
        elif args.command == "verify-optimizer":
            payload, checks = cmd_verify_optimizer(cfg, args.s, args.t)
        elif args.command == "geometry":
            payload, checks = cmd_geometry(cfg, args.samples, args.inject_bug)
        elif args.command == "eigen":
            payload, checks = cmd_eigen(cfg, args.degree)
        elif args.command == "scan":
            rows, checks = cmd_scan(cfg, _parse_range(args.a_range),
                                    _parse_range(args.b_range), args.steps)
            if cfg.out_format == "csv":
                _emit(rows_to_csv(rows), cfg.out_path)
            else:
                _emit(to_json([r.__dict__ for r in rows]) + "\n", cfg.out_path)
            _report_checks(checks, args.quiet)
            return 0 if all(c.passed for c in checks) else 1
        else:  # report
            payload, checks = cmd_report(cfg, args.samples, args.degree)
    except (ConfigError, DomainError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except ConvergenceError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    if "checks" not in payload:
        payload = dict(payload)
        payload["checks"] = [c.as_dict() for c in checks]
        payload["verdict"] = "pass" if all(c.passed for c in checks) else "fail"
    _emit(to_json(payload) + "\n", cfg.out_path)
    _report_checks(checks, args.quiet)
    return 0 if all(c.passed for c in checks) else 1


if __name__ == "__main__":
    sys.exit(main())
