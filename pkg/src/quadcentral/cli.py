"""Command-line interface: deterministic runs, machine-readable artifacts.

Subcommands
-----------
value    print L(1/2) for one d
census   nonvanishing census over a d-range, CSV output
moments  smoothed moment sweep + log-polynomial fit, CSV + JSON verdicts
mollify  mollified first/second moments vs predictions, JSON output
verify   identity suites (gauss, poisson, omega, eta, identity-69,
         prediction-identity, afe-consistency, oracle), JSON records
kernels  build and persist the omega kernel caches

Every run echoes its configuration into a manifest.json next to the
primary artifact; primary artifacts are byte-identical across re-runs
with the same configuration. Exit status: 0 all checks pass, 2 usage or
domain error, 3 resource budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import central, charsums, mollify, momentlab, ntheory, smoothing
from .errors import BudgetError, DomainError

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


@dataclass
class RunConfig:
    threads: int = 0  # 0 = machine parallelism
    weight: str = "plateau"
    Z: float = 32.0
    euler_cutoff: int = 10 ** 7
    eps: float = 1e-12
    kernel_cache: str = ""  # directory of persisted omega tables, "" = in-memory

    def resolve_weight(self) -> smoothing.SmoothWeight:
        if self.weight == "plateau":
            return smoothing.plateau_weight(self.Z)
        if self.weight == "standard_bump":
            return smoothing.standard_bump()
        raise DomainError(f"unknown weight kind {self.weight!r}")


def _load_config(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            for k, v in json.load(fh).items():
                if not hasattr(cfg, k):
                    raise DomainError(f"config: unknown key {k!r}")
                setattr(cfg, k, type(getattr(cfg, k))(v))
    for k in ("threads", "weight", "Z", "euler_cutoff", "eps", "kernel_cache"):
        v = getattr(args, k.lower(), None)
        if v is not None:
            setattr(cfg, k, v)
    if cfg.threads < 0 or cfg.Z <= 0 or cfg.euler_cutoff < 3 or cfg.eps <= 0:
        raise DomainError("config: numeric fields must be positive")
    if cfg.kernel_cache:
        central.use_kernel_directory(cfg.kernel_cache)
    return cfg


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _manifest(out_path: Path, cfg: RunConfig, artifacts: list[str],
              t0: float) -> None:
    _write_json(out_path.parent / "manifest.json", {
        "artifacts": sorted(artifacts),
        "config": asdict(cfg),
        "wall_clock_seconds": round(time.time() - t0, 3),
    })


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_value(args, cfg: RunConfig) -> int:
    cv = central.central_value(args.d, eps=cfg.eps)
    print(f"d={cv.d} L={_fmt(cv.L)} N={cv.truncation_N} "
          f"tail_estimate={_fmt(cv.tail_estimate)}")
    return EXIT_OK


def _cmd_census(args, cfg: RunConfig) -> int:
    t0 = time.time()
    out = Path(args.out) if args.out else None
    summary = central.census(args.lo, args.hi, threshold=args.threshold,
                             eps=cfg.eps, threads=cfg.threads,
                             out_csv=out)
    print(f"range=[{summary.lo},{summary.hi}] total={summary.count_total} "
          f"nonvanishing={summary.count_nonvanishing} "
          f"proportion={summary.proportion:.6f} "
          f"min|L|={_fmt(summary.min_abs_L)} at d={summary.argmin_d} "
          f"negatives={summary.negative_count}")
    for d in summary.below_threshold:
        print(f"below-threshold d={d}")
    if out is not None:
        _manifest(out, cfg, [out.name], t0)
    return EXIT_OK if summary.proportion >= 0.875 else EXIT_FAIL


def _parse_grid(text: str) -> list[float]:
    try:
        start, ratio, count = text.split(":")
        start, ratio, count = float(start), float(ratio), int(count)
    except ValueError as exc:
        raise DomainError(f"bad grid spec {text!r}; expected start:ratio:count") from exc
    if start <= 0 or ratio <= 1 or count < 2:
        raise DomainError(f"bad grid spec {text!r}")
    return [start * ratio ** k for k in range(count)]


def _cmd_moments(args, cfg: RunConfig) -> int:
    t0 = time.time()
    W = cfg.resolve_weight()
    grid = _parse_grid(args.grid)
    cache = central.LValueCache(eps=cfg.eps, threads=cfg.threads)
    report = momentlab.moment_suite(args.j, grid, W, eps=cfg.eps,
                                    threads=cfg.threads,
                                    euler_cutoff=cfg.euler_cutoff,
                                    cache=cache)
    artifacts = []
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8") as fh:
            fh.write("X,j,S,fit_leading,predicted,ratio\n")
            pred = report.predicted
            for X, v in zip(report.grid, report.values):
                ratio = report.fitted_leading / pred if pred else math.nan
                fh.write(f"{_fmt(X)},{report.j},{_fmt(v)},"
                         f"{_fmt(report.fitted_leading)},"
                         f"{_fmt(pred) if pred is not None else 'NA'},"
                         f"{_fmt(ratio)}\n")
        artifacts.append(out.name)
        sidecar = out.with_suffix(".verdict.json")
        assembly = momentlab.dyadic_assembly(args.j, grid[-1], W, eps=cfg.eps,
                                             threads=cfg.threads, cache=cache)
        _write_json(sidecar, {
            "test": f"moment-suite-j{report.j}",
            "grid": report.grid,
            "values": report.values,
            "fit_coeffs": list(report.fit.coeffs),
            "fit_rms": report.fit.rms_residual,
            "leading_se": report.fit.leading_se,
            "predicted_leading": report.predicted,
            "dyadic_assembly_at_max": assembly,
            "verdicts": report.verdicts,
            "notes": report.notes,
        })
        artifacts.append(sidecar.name)
        _manifest(out, cfg, artifacts, t0)
    print(f"j={report.j} leading={_fmt(report.fitted_leading)} "
          f"predicted={report.predicted} verdicts={report.verdicts}")
    return EXIT_OK if all(report.verdicts.values()) else EXIT_FAIL


def _cmd_mollify(args, cfg: RunConfig) -> int:
    t0 = time.time()
    W = cfg.resolve_weight()
    spec = mollify.build_mollifier(args.x, args.theta,
                                   euler_cutoff=cfg.euler_cutoff)
    moments = mollify.mollified_sweep(spec, W, eps=cfg.eps, threads=cfg.threads)
    pf = mollify.predicted_first(args.theta, W)
    ps = mollify.predicted_second(args.theta, W)
    pp = float(mollify.predicted_proportion(args.theta))
    payload = {
        "X": spec.X, "theta": spec.theta, "M": spec.M,
        "S1": moments.S1, "S2": moments.S2,
        "lower_bound": moments.lower_bound,
        "predicted_first": pf, "predicted_second": ps,
        "predicted_proportion": pp,
        "ratios": {"S1": moments.S1 / pf, "S2": moments.S2 / ps,
                   "lower_bound_vs_family_mass":
                       moments.lower_bound / (pp * mollify.moment_unit(W))},
    }
    if args.out:
        out = Path(args.out)
        _write_json(out, payload)
        _manifest(out, cfg, [out.name], t0)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_kernels(args, cfg: RunConfig) -> int:
    t0 = time.time()
    outdir = Path(args.out or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    names = []
    for j in (1, 2, 3):
        K = smoothing.build_omega_kernel(j)
        path = outdir / f"omega{j}.qck"
        smoothing.save_kernel(K, path)
        reloaded = smoothing.load_kernel(path)
        ok = np.array_equal(reloaded.values, K.values)
        print(f"omega_{j}: {path} grid={len(K.values)} "
              f"interp_error={K.interp_error:.3e} reload_ok={ok}")
        names.append(path.name)
    _manifest(outdir / "manifest.json", cfg, names, t0)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify suites
# ---------------------------------------------------------------------------

def _record(records, test, params, computed, expected, tol) -> bool:
    err = abs(computed - expected)
    ok = bool(err <= tol)
    records.append({"test": test, "params": params,
                    "computed": computed, "expected": expected,
                    "abs_err": err, "tol": tol, "pass": ok})
    return ok


def _suite_gauss(cfg: RunConfig, records: list) -> None:
    kset = np.array(list(range(-20, 21)) + [25, 49, 121], dtype=np.int64)
    for n in range(1, 502, 2):
        f = ntheory.factorize(n)
        brute = charsums.gauss_brute_batch(n, kset)
        worst = max(abs(charsums.gauss_closed(int(k), f).value - b)
                    for k, b in zip(kset, brute))
        _record(records, "gauss-closed-vs-brute", {"n": n, "k_count": len(kset)},
                worst, 0.0, 1e-9 * math.sqrt(n))


def _suite_poisson(cfg: RunConfig, records: list) -> None:
    W = cfg.resolve_weight()
    for X in (200.0,):
        for Y in (1, 5):
            for n in (1, 3, 9, 15, 25, 45):
                lhs, rhs, gap = charsums.poisson_check(n, X, Y, W)
                _record(records, "poisson-two-sided",
                        {"n": n, "X": X, "Y": Y}, rhs, lhs, 1e-6)


def _suite_omega(cfg: RunConfig, records: list) -> None:
    from scipy.special import gammaincc

    K1 = central.default_kernel(1)
    for xi in np.geomspace(1e-4, 10.0, 50):
        q = smoothing.omega_quadrature(1, float(xi))
        _record(records, "omega1-quadrature-vs-incomplete-gamma",
                {"xi": float(xi)}, q, float(gammaincc(0.25, xi * xi)), 1e-10)
    for xi in (1e-3, 0.1, 0.9):
        a = smoothing.omega_quadrature(2, xi, c=1.0)
        b = smoothing.omega_quadrature(2, xi, c=1.5)
        _record(records, "omega-abscissa-independence", {"j": 2, "xi": xi},
                a, b, 1e-9)
    for j in (1, 2, 3):
        Kj = central.default_kernel(j)
        ximax = (2.0 / j * math.log(smoothing.ENVELOPE_K[j] / 1e-15)) ** (j / 2.0)
        for xi in np.geomspace(1.0, ximax, 12):
            bound = smoothing.ENVELOPE_K[j] * math.exp(-(j / 2) * xi ** (2 / j))
            val = abs(float(smoothing.omega(Kj, float(xi))))
            _record(records, "omega-decay-envelope", {"j": j, "xi": float(xi)},
                    max(val - bound, 0.0), 0.0, 0.0)
    _record(records, "omega-at-zero", {"j": 1}, float(smoothing.omega(K1, 0.0)),
            1.0, 0.0)


def _suite_eta(cfg: RunConfig, records: list) -> None:
    P = cfg.euler_cutoff
    D = ntheory.const_D(P)
    for l in (1, 3, 5, 9, 15, 45, 105, 225):
        eta = ntheory.eta_at_one(l, P)
        l1, _ = ntheory.split_l1_l2(l)
        lhs = eta.value * ntheory.sigma(l1) * float(ntheory.mult_h(l)) / l1
        _record(records, "eta-sigma-h-identity", {"l": l}, lhs, D.value,
                max(eta.tail_bound + D.tail_bound, 1e-6))


def _suite_identity_69(cfg: RunConfig, records: list) -> None:
    value, gap = mollify.identity_69(cfg.euler_cutoff)
    _record(records, "euler-product-four-ninths", {"P": cfg.euler_cutoff},
            value.value, 4.0 / 9.0, max(1e-6, value.tail_bound))


def _suite_prediction_identity(cfg: RunConfig, records: list) -> None:
    for k in range(1, 11):
        th = Fraction(k, 10)
        lhs = mollify.first_moment_shape(th) ** 2
        rhs = mollify.predicted_proportion(th) * mollify.second_moment_shape(th)
        _record(records, "moment-prediction-identity", {"theta": f"{k}/10"},
                float(lhs), float(rhs), 1e-12)
    _record(records, "theta-one-first", {}, float(mollify.first_moment_shape(1)),
            14.0 / 9.0, 0.0)
    _record(records, "theta-one-second", {}, float(mollify.second_moment_shape(1)),
            224.0 / 81.0, 0.0)
    _record(records, "theta-one-proportion", {},
            float(mollify.predicted_proportion(1)), 7.0 / 8.0, 0.0)


def _suite_afe_consistency(cfg: RunConfig, records: list) -> None:
    rng = np.random.default_rng(20260810)
    pool = ntheory.sieve_odd_squarefree(1, 2000)
    for d in rng.choice(pool, size=30, replace=False):
        d = int(d)
        l1 = 2.0 * central.a_value(1, d, eps=cfg.eps)
        l2 = 2.0 * central.a_value(2, d, eps=cfg.eps)
        _record(records, "power-consistency-j2", {"d": d}, l1 * l1, l2,
                1e-8 * abs(l2))
    pool3 = ntheory.sieve_odd_squarefree(1, 300)
    for d in rng.choice(pool3, size=10, replace=False):
        d = int(d)
        l1 = 2.0 * central.a_value(1, d, eps=cfg.eps)
        l3 = 2.0 * central.a_value(3, d, eps=cfg.eps)
        _record(records, "power-consistency-j3", {"d": d}, l1 ** 3, l3,
                1e-6 * abs(l3))


def _suite_oracle(cfg: RunConfig, records: list) -> None:
    for d in ntheory.sieve_odd_squarefree(1, 300):
        d = int(d)
        afe = central.central_value(d, eps=cfg.eps).L
        _record(records, "functional-equation-vs-hurwitz", {"d": d},
                afe, central.oracle_central(d), 1e-8)


_SUITES = {
    "gauss": _suite_gauss,
    "poisson": _suite_poisson,
    "omega": _suite_omega,
    "eta": _suite_eta,
    "identity-69": _suite_identity_69,
    "prediction-identity": _suite_prediction_identity,
    "afe-consistency": _suite_afe_consistency,
    "oracle": _suite_oracle,
}


def _cmd_verify(args, cfg: RunConfig) -> int:
    t0 = time.time()
    names = list(_SUITES) if args.suite is None else [args.suite]
    if args.suite is not None and args.suite not in _SUITES:
        raise DomainError(f"unknown suite {args.suite!r}; "
                          f"choose from {', '.join(_SUITES)}")
    records: list[dict] = []
    for name in names:
        _SUITES[name](cfg, records)
    n_fail = sum(not r["pass"] for r in records)
    artifacts = []
    if args.out:
        out = Path(args.out)
        _write_json(out, {"records": records,
                          "total": len(records), "failed": n_fail})
        artifacts.append(out.name)
        _manifest(out, cfg, artifacts, t0)
    for r in records if args.verbose else []:
        print(json.dumps(r, sort_keys=True))
    print(f"verify: {len(records) - n_fail}/{len(records)} checks passed "
          f"({', '.join(names)})")
    return EXIT_OK if n_fail == 0 else EXIT_FAIL


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="quadcentral",
        description="Central values of quadratic Dirichlet L-functions "
                    "for conductors 8d, with identity verification suites.")
    ap.add_argument("--config", help="JSON config file (flags override it)")
    ap.add_argument("--threads", type=int, help="worker threads (0 = all cores)")
    ap.add_argument("--weight", choices=["plateau", "standard_bump"])
    ap.add_argument("--z", dest="z", type=float, help="plateau ramp steepness Z")
    ap.add_argument("--euler-cutoff", dest="euler_cutoff", type=int,
                    help="prime cutoff for Euler products")
    ap.add_argument("--eps", type=float, help="series truncation target")
    ap.add_argument("--kernel-cache", dest="kernel_cache",
                    help="directory of persisted omega kernel tables")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("value", help="L(1/2) for a single d")
    p.add_argument("--d", type=int, required=True)

    p = sub.add_parser("census", help="nonvanishing census")
    p.add_argument("--lo", type=int, required=True)
    p.add_argument("--hi", type=int, required=True)
    p.add_argument("--threshold", type=float, default=1e-8)
    p.add_argument("--out")

    p = sub.add_parser("moments", help="smoothed moment sweep + fit")
    p.add_argument("--j", type=int, required=True, choices=[1, 2, 3])
    p.add_argument("--grid", required=True, help="start:ratio:count")
    p.add_argument("--out")

    p = sub.add_parser("mollify", help="mollified moments vs predictions")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--out")

    p = sub.add_parser("verify", help="run identity suites")
    p.add_argument("--suite", help=f"one of: {', '.join(_SUITES)} (default all)")
    p.add_argument("--out")
    p.add_argument("--verbose", action="store_true")

    p = sub.add_parser("kernels", help="build + persist kernel caches")
    p.add_argument("--out")
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        cfg = _load_config(args)
        handler = {
            "value": _cmd_value,
            "census": _cmd_census,
            "moments": _cmd_moments,
            "mollify": _cmd_mollify,
            "verify": _cmd_verify,
            "kernels": _cmd_kernels,
        }[args.command]
        return handler(args, cfg)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
