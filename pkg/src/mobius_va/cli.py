"""Command-line front end: ``mobius-va build | verify | smear``.

Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
3 nothing could be checked because of truncation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .core import Vec, apply_sl2
from .fields import (
    HeadroomExceeded,
    borcherds_products,
    commutator_via_borcherds,
    compare_fields,
    covariance_check,
    direct_commutator,
    identity_field,
    locality_order,
)
from .models import GramDegenerate, ModelDescriptor
from .reconstruct import BudgetExhausted, NotGenerating, axiom_suite, build_Y, state_of_field
from .report import SCHEMA_VERSION, Check, Report
from .smear import (
    Bump,
    SupportOverlap,
    TrigPoly,
    disjoint_commutator_decay,
    infinitesimal_covariance_check,
    order_estimate,
)
from .unitarity import unitarity_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_TRUNCATED = 0, 1, 2, 3
SUITES = ("axioms", "unitarity", "covariance", "locality", "borcherds", "reconstruction")
DEFAULT_CUTOFFS = (16, 32, 64)
DEFAULT_F = (1.0, 0.9)
DEFAULT_G = (-1.6, 1.2)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    model: ModelDescriptor
    suites: tuple[str, ...] = SUITES
    tolerance: float = 1e-10
    cutoffs: tuple[int, ...] = DEFAULT_CUTOFFS
    out_dir: Path | None = None
    emit_json: bool = False
    emit_csv: bool = False
    timings: bool = False
    field: str = "generator"  # smear: "generator" or "identity"
    f_bump: tuple[float, float] = DEFAULT_F
    g_bump: tuple[float, float] = DEFAULT_G
    budget: int = 5000  # cap on evaluated (n)-products in the closure

    def __post_init__(self):
        if self.tolerance <= 0 or not math.isfinite(self.tolerance):
            raise ConfigError("tolerance: must be a positive number")
        bad = [s for s in self.suites if s not in SUITES]
        if bad:
            raise ConfigError(f"suite: unknown suite(s) {bad}; choose from {list(SUITES)}")
        if not self.cutoffs or any(c < 1 for c in self.cutoffs) or list(self.cutoffs) != sorted(set(self.cutoffs)):
            raise ConfigError("cutoffs: need strictly ascending positive integers")
        if self.budget < 1:
            raise ConfigError("budget: must be a positive integer")
        if self.field not in ("generator", "identity"):
            raise ConfigError("field: must be 'generator' or 'identity'")


# ---------------------------------------------------------------- config parsing


def _load_config_file(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    known = {"model", "suites", "tolerance", "cutoffs", "out_dir", "field", "f_bump", "g_bump", "budget"}
    extra = sorted(set(data) - known)
    if extra:
        raise ConfigError(f"{path}: unknown field(s) {extra}")
    return data


def _parse_cutoffs(text) -> tuple[int, ...]:
    if isinstance(text, (list, tuple)):
        items = text
    else:
        items = [t for t in str(text).split(",") if t.strip()]
    try:
        return tuple(int(x) for x in items)
    except (TypeError, ValueError):
        raise ConfigError(f"cutoffs: expected integers, got {text!r}") from None


def _parse_arc(name: str, value) -> tuple[float, float]:
    if isinstance(value, str):
        value = value.split(",")
    try:
        c, w = (float(x) for x in value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected 'center,halfwidth'") from None
    return c, w


def build_config(args: argparse.Namespace) -> RunConfig:
    data = _load_config_file(args.config) if args.config else {}
    model = dict(data.get("model") or {})
    if not isinstance(model, dict):
        raise ConfigError("model: expected an object")
    if args.model is not None:
        model["kind"] = args.model
    if args.depth is not None:
        model["depth"] = args.depth
    if args.c is not None:
        model["c"] = args.c
    if args.null is not None:
        model["null"] = args.null
    if "kind" not in model:
        raise ConfigError("model.kind: missing (use --model or the config file)")
    if "depth" not in model:
        raise ConfigError("model.depth: missing (use --depth or the config file)")
    if model.get("kind") == "virasoro":
        # report the universal module unless told otherwise; its form is then checked, not assumed
        model.setdefault("null", "keep")
    try:
        desc = ModelDescriptor.from_mapping(model)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    kw = {}
    suites = args.suite or data.get("suites")
    if suites:
        if not isinstance(suites, (list, tuple)):
            raise ConfigError("suites: expected a list")
        kw["suites"] = tuple(dict.fromkeys(suites))
    tol = args.tolerance if args.tolerance is not None else data.get("tolerance")
    if tol is not None:
        if isinstance(tol, bool) or not isinstance(tol, (int, float)):
            raise ConfigError("tolerance: expected a number")
        kw["tolerance"] = float(tol)
    cut = args.cutoffs if getattr(args, "cutoffs", None) is not None else data.get("cutoffs")
    if cut is not None:
        kw["cutoffs"] = _parse_cutoffs(cut)
    out = args.out_dir or data.get("out_dir")
    if out is not None:
        kw["out_dir"] = Path(out)
    budget = args.budget if args.budget is not None else data.get("budget")
    if budget is not None:
        if isinstance(budget, bool) or not isinstance(budget, int):
            raise ConfigError("budget: expected an integer")
        kw["budget"] = budget
    fld = getattr(args, "field", None) or data.get("field")
    if fld is not None:
        kw["field"] = fld
    for name in ("f_bump", "g_bump"):
        val = getattr(args, name, None) or data.get(name)
        if val is not None:
            kw[name] = _parse_arc(name, val)
    return RunConfig(desc, emit_json=args.json, emit_csv=getattr(args, "csv", False), timings=args.timings, **kw)


# ---------------------------------------------------------------- suites


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("VOA_THREADS", "1")))
    except ValueError:
        return 1


def _suite_covariance(model, va) -> Report:
    g = model.generator
    rep = covariance_check(g, g.weight)
    wit = [{"k": k, "m": m, "on": lbl} for k, m, lbl in rep.violations]
    return Report(
        "covariance",
        [
            Check.from_counts(
                f"covariance:{g.name}",
                "[L_k, phi_m] = (k(d-1) - m) phi_(m+k), k = -1, 0, 1",
                rep.checked,
                rep.truncated,
                wit,
                weight=g.weight,
            )
        ],
    )


def _suite_locality(model, va) -> Report:
    g = model.generator
    nmax = 2 * g.weight + 2
    res = locality_order(g, g, nmax)
    wit = [] if res.local else [{"not local up to": nmax, "coefficient": list(res.witness or ())}]
    detail = {"order": res.order, "minimality witness": list(res.witness) if res.witness else None}
    chk = Check.from_counts(
        f"locality:{g.name}", "(z - w)^N [A(z), B(w)] = 0 with N minimal", res.checked, 0, wit, **detail
    )
    return Report("locality", [chk])


def _suite_borcherds(model, va) -> Report:
    g = model.generator
    space = g.space
    prods = borcherds_products(g, g)
    D = space.depth
    checked = truncated = 0
    wit = []
    for m in range(-D - 1, D + 2):
        for n in range(-D - 1, D + 2):
            op = commutator_via_borcherds(g, g, m, n, prods)
            for e in space.basis():
                a = op(e)
                b = direct_commutator(g, g, m, n, e)
                if a.truncated or b.truncated:
                    truncated += 1
                    continue
                checked += 1
                if a != b:
                    wit.append({"m": m, "n": n, "on": e.pretty(), "formula": a.pretty(), "direct": b.pretty()})
    chk = Check.from_counts(
        f"borcherds:{g.name}",
        "[a_m, b_n] = sum_s binom(m + d_a - 1, s) (a_(s) b)_(m+n)",
        checked,
        truncated,
        wit,
    )
    return Report("borcherds", [chk])


def _suite_reconstruction(model, va) -> Report:
    space = va.space
    g = model.generator
    checks = []
    s = state_of_field(g)
    diffs, compared = compare_fields(va.Y_of(s), g)
    checks.append(
        Check.from_counts(
            f"round_trip:{g.name}",
            "Y(A(z)|0> at z = 0, z) = A(z)",
            compared,
            0,
            [{"block": list(d)} for d in diffs],
        )
    )
    wit = []
    count = 0
    for n, i, F in va.basis_fields():
        count += 1
        st = state_of_field(F)
        if st != Vec.basis(space, n, i):
            wit.append({"state": space.labels[n][i], "state_of_field(Y)": st.pretty()})
    checks.append(Check.from_counts("state_field_identity", "state_of_field(Y(v)) = v", count, 0, wit))
    qp = apply_sl2(space, 1, s)
    checks.append(
        Check.from_counts(
            f"quasi_primary:{g.name}", "L_1 v = 0 for generator states", 1, 0, [] if qp.is_zero() else [{"L_1 v": qp.pretty()}]
        )
    )
    return Report("reconstruction", checks)


def _suite_unitarity(model, va) -> Report:
    return unitarity_suite(va, model.theta)


def _suite_axioms(model, va) -> Report:
    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return axiom_suite(va, executor=ex)
    return axiom_suite(va)


_SUITE_FUNCS = {
    "axioms": _suite_axioms,
    "unitarity": _suite_unitarity,
    "covariance": _suite_covariance,
    "locality": _suite_locality,
    "borcherds": _suite_borcherds,
    "reconstruction": _suite_reconstruction,
}


def run_suites(model, va, suites: Sequence[str]) -> list[Report]:
    """Run the selected suites; with VOA_THREADS > 1 they run concurrently, results kept in registry order."""
    order = [s for s in SUITES if s in suites]

    def run(name):
        t0 = time.perf_counter()
        rep = _SUITE_FUNCS[name](model, va)
        rep.timings[name] = time.perf_counter() - t0
        return rep

    workers = min(_threads(), len(order)) or 1
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(run, order))
    return [run(name) for name in order]


# ---------------------------------------------------------------- output helpers


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _write(cfg: RunConfig, name: str, text: str) -> None:
    if cfg.out_dir is None:
        return
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    with open(cfg.out_dir / name, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


def _build_model(cfg: RunConfig):
    try:
        return cfg.model.build()
    except GramDegenerate as exc:
        raise ConfigError(f"model: {exc}; pass --null keep or --null quotient") from None


# ---------------------------------------------------------------- commands


def cmd_build(cfg: RunConfig) -> int:
    model = _build_model(cfg)
    space, g, _ = model
    loc = locality_order(g, g, 2 * g.weight + 2)
    out = {
        "schema_version": SCHEMA_VERSION,
        "command": "build",
        "model": cfg.model.as_dict(),
        "dims": list(space.dims),
        "labels": [list(level) for level in space.labels],
        "positive": space.positive,
        "generators": [{"name": g.name, "weight": g.weight, "locality_order": loc.order}],
        "notes": list(model.notes),
    }
    text = _dump_json(out)
    _write(cfg, "space.json", text)
    if cfg.emit_json or cfg.out_dir is None:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    model = _build_model(cfg)
    va = build_Y(model.space, [model.generator], budget=cfg.budget)
    reports = run_suites(model, va, cfg.suites)
    failed = [r for r in reports if r.status == "fail"]
    if failed:
        code = EXIT_FAIL
    elif reports and all(r.status == "truncated" for r in reports):
        code = EXIT_TRUNCATED
    else:
        code = EXIT_OK
    out = {
        "schema_version": SCHEMA_VERSION,
        "command": "verify",
        "model": cfg.model.as_dict(),
        "dims": list(model.space.dims),
        "status": "fail" if failed else ("truncated" if code == EXIT_TRUNCATED else "pass"),
        "exit_code": code,
        "suites": [r.as_dict(with_timings=cfg.timings) for r in reports],
    }
    text = _dump_json(out)
    _write(cfg, "report.json", text)
    if cfg.emit_json:
        sys.stdout.write(text)
    else:
        for r in reports:
            for c in r.checks:
                sys.stdout.write(f"{r.suite:15s} {c.name:40s} {c.status:9s} checked={c.checked} truncated={c.truncated}\n")
    if failed:
        first = failed[0].failures()[0]
        sys.stderr.write(f"FAIL {failed[0].suite}/{first.name}: {json.dumps(first.as_dict(1)['witnesses'][0], ensure_ascii=False)}\n")
    return code


def cmd_smear(cfg: RunConfig) -> int:
    model = _build_model(cfg)
    space, g, _ = model
    A = identity_field(space) if cfg.field == "identity" else g
    f_bump = Bump(*cfg.f_bump)
    g_bump = Bump(*cfg.g_bump)
    control = Bump(cfg.f_bump[0], cfg.f_bump[1], tilt=0.5)
    omega = space.vacuum()
    try:
        decay = disjoint_commutator_decay(A, A, f_bump, g_bump, omega, cfg.cutoffs)
    except SupportOverlap as exc:
        raise ConfigError(f"f_bump/g_bump: {exc}") from None
    same = disjoint_commutator_decay(A, A, f_bump, control, omega, cfg.cutoffs, require_disjoint=False)
    decay_rows = [(M, r, s) for (M, r), (_, s) in zip(decay.rows, same.rows)]

    est = order_estimate(A, omega)
    order_rows = [(n, s) for n, s in est.s_squared]

    cov_rows = []
    worst = 0.0
    cov_truncated = 0
    for k in (-1, 0, 1):
        for n in range(-6, 7):
            for u in space.basis():
                r = infinitesimal_covariance_check(A, A.weight, k, TrigPoly.monomial(n), u)
                if r.truncated:
                    cov_truncated += 1
                    continue
                worst = max(worst, r.relative)
                cov_rows.append((k, n, u.pretty(), r.relative))

    resid = [r for _, r, _ in decay_rows]
    if cfg.field == "identity":
        decay_ok = all(r == 0 for r in resid)
    else:
        decay_ok = all(b < a for a, b in zip(resid, resid[1:]))
    cov_ok = worst <= cfg.tolerance and bool(cov_rows)
    summary = {
        "schema_version": SCHEMA_VERSION,
        "command": "smear",
        "model": cfg.model.as_dict(),
        "field": A.name,
        "f_bump": list(cfg.f_bump),
        "g_bump": list(cfg.g_bump),
        "cutoffs": list(cfg.cutoffs),
        "decay": {"residuals": resid, "same_support": [s for _, _, s in decay_rows], "strictly_decreasing": decay_ok},
        "order_estimate": {"order": est.order, "tail_degree": est.tail_degree, "label": est.label},
        "covariance": {"max_relative_residual": worst, "tolerance": cfg.tolerance, "checked": len(cov_rows), "truncated": cov_truncated, "pass": cov_ok},
        "status": "pass" if decay_ok and cov_ok else "fail",
    }
    _write(cfg, "summary.json", _dump_json(summary))
    decay_csv = _csv_text(["cutoff", "residual", "same_support_residual"], decay_rows)
    _write(cfg, "decay.csv", decay_csv)
    _write(cfg, "order.csv", _csv_text(["index", "norm_squared"], order_rows))
    _write(cfg, "covariance.csv", _csv_text(["k", "index", "state", "relative_residual"], cov_rows))
    if cfg.emit_csv:
        sys.stdout.write(decay_csv)
    if cfg.emit_json:
        sys.stdout.write(_dump_json(summary))
    if not cfg.emit_csv and not cfg.emit_json:
        for M, r, s in decay_rows:
            sys.stdout.write(f"cutoff {M:5d}  residual {r:.6e}  same-support {s:.6e}\n")
        sys.stdout.write(f"order estimate {est.order} ({est.label}); covariance max residual {worst:.3e}\n")
    return EXIT_OK if summary["status"] == "pass" else EXIT_FAIL


# ---------------------------------------------------------------- entry point


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--model", choices=("heisenberg", "virasoro"))
    p.add_argument("--depth", type=int)
    p.add_argument("--c", help="central charge as an exact rational, e.g. 1/2")
    p.add_argument("--null", choices=("raise", "keep", "quotient"), help="Virasoro: what to do with a singular Gram form (default keep)")
    p.add_argument("--suite", action="append", help="suite to run (repeatable); default all")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--budget", type=int, help="cap on (n)-products evaluated while closing the generators")
    p.add_argument("--out-dir")
    p.add_argument("--json", action="store_true", help="print the JSON report to stdout")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings in JSON (breaks byte determinism)")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mobius-va", description="Verify truncated Moebius vertex algebras.")
    sub = parser.add_subparsers(dest="command", required=True)
    b = sub.add_parser("build", help="build a model and print its descriptor")
    _common(b)
    v = sub.add_parser("verify", help="run verification suites")
    _common(v)
    s = sub.add_parser("smear", help="numeric smearing experiments")
    _common(s)
    s.add_argument("--cutoffs", help="comma-separated ascending cutoffs, default 16,32,64")
    s.add_argument("--csv", action="store_true", help="print the decay table as CSV")
    s.add_argument("--field", choices=("generator", "identity"))
    s.add_argument("--f-bump", dest="f_bump", help="center,halfwidth of the first bump")
    s.add_argument("--g-bump", dest="g_bump", help="center,halfwidth of the second bump")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        if args.command == "build":
            return cmd_build(cfg)
        if args.command == "verify":
            return cmd_verify(cfg)
        return cmd_smear(cfg)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except (BudgetExhausted, HeadroomExceeded) as exc:
        sys.stderr.write(f"truncation: {exc}\n")
        return EXIT_TRUNCATED
    except NotGenerating as exc:
        sys.stderr.write(f"check failed: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
