"""Command-line front end: weight verification, certificate estimation,
certified inversion, bound comparison, growth diagnostics, and the full
pipeline.  Human tables on stdout, machine JSON/CSV on request.

Exit-code contract (so CI can gate on mathematical outcomes):
    0 verified / success, 2 refuted / not certified, 3 inconclusive /
    no convergence, 1 operational error (I/O, bad config).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import analysis, inversion
from .algebra import AlgebraElement
from .analysis import (
    HolderCertificate,
    NoFeasibleThetaError,
    SumInconclusiveError,
    default_radial_horizon,
    estimate_theta,
    pipeline,
)
from .groups import GroupError, GroupModel, group_from_config, growth_report
from .weights import (
    INCONCLUSIVE,
    REFUTED,
    VERIFIED,
    WeightError,
    build_auxiliary,
    check_growth_condition,
    check_summability,
    check_weight_axioms,
    validate_weak_subadditivity,
    weight_from_config,
    WEAKLY_SUBADDITIVE,
)

SCHEMA_VERSION = "convinv/1"
BOUND_COMPARE_COLUMNS_V1 = ["element", "actual", "product_bound", "asymptotic_bound", "nu"]

EXIT_OK = 0
EXIT_OPERATIONAL = 1
EXIT_REFUTED = 2
EXIT_INCONCLUSIVE = 3

_STATUS_EXIT = {VERIFIED: EXIT_OK, REFUTED: EXIT_REFUTED, INCONCLUSIVE: EXIT_INCONCLUSIVE}

NAMED_CASES = {
    "cor-i": {
        "group": {"family": "locally_finite"},
        "weight": {"family": "locally_finite", "n_rule": "pow2"},
        "p": 2.0, "s": 1.75, "r": 0.5,
    },
    "cor-ii": {
        "group": {"family": "Z", "dimension": 2},
        "weight": {"family": "polynomial", "beta": 3.0},
        "p": 2.0, "s": 1.75, "r": 1.0,
    },
    "cor-iii": {
        "group": {"family": "heisenberg"},
        "weight": {"family": "subexp_power", "alpha": 0.5, "c": 1.0},
        "p": 1.0, "s": 4.0, "r": 2.25,
    },
    "nu-reject": {
        "group": {"family": "Z", "dimension": 1},
        "weight": {"family": "subexp_log", "gamma": 1.0, "c": 1.0},
        "p": 2.0, "s": 1.75, "r": 0.5,
    },
}


class ConfigError(ValueError):
    """Malformed run configuration."""


@dataclass
class RunConfig:
    """Parsed run configuration shared by the subcommands."""

    raw: dict
    model: GroupModel
    weight: Optional[object] = None
    p: float = 1.0
    s: Optional[float] = None
    r: Optional[float] = None
    seed: int = 0
    elements: List[AlgebraElement] = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    inversion_opts: dict = field(default_factory=dict)

    @staticmethod
    def from_dict(raw: dict, base_dir: Path | None = None) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        if "group" not in raw:
            raise ConfigError("config needs a 'group' section")
        model = group_from_config(raw["group"])
        weight = weight_from_config(model, raw["weight"]) if "weight" in raw else None
        p = float(raw.get("p", 1.0))
        if p < 1:
            raise ConfigError(f"p must be >= 1, got {p}")
        cfg = RunConfig(
            raw=raw, model=model, weight=weight, p=p,
            s=float(raw["s"]) if "s" in raw else None,
            r=float(raw["r"]) if "r" in raw else None,
            seed=int(raw.get("seed", 0)),
            checks=dict(raw.get("checks", {})),
            inversion_opts=dict(raw.get("inversion", {})),
        )
        for spec in raw.get("elements", []):
            cfg.elements.append(_parse_element(model, spec, base_dir))
        caps = cfg.inversion_opts
        for key in ("tol", "trunc"):
            if key in caps and float(caps[key]) < 0:
                raise ConfigError(f"inversion option {key} must be nonnegative")
        return cfg


def _parse_element(model: GroupModel, spec, base_dir: Path | None) -> AlgebraElement:
    if isinstance(spec, dict) and "file" in spec:
        path = Path(spec["file"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        if not path.exists():
            raise ConfigError(f"element file not found: {path}")
        return AlgebraElement.from_json_lines(model, path.read_text())
    if isinstance(spec, dict) and "coeffs" in spec:
        items = []
        for entry in spec["coeffs"]:
            x, re_part, im_part = entry[0], float(entry[1]), float(entry[2]) if len(entry) > 2 else 0.0
            items.append((x, complex(re_part, im_part)))
        return AlgebraElement.from_items(model, items)
    raise ConfigError(f"element spec needs 'coeffs' or 'file': {spec!r}")


def _load_config(path: Optional[str], case: Optional[str] = None) -> RunConfig:
    if case is not None:
        if case not in NAMED_CASES:
            raise ConfigError(f"unknown case {case!r}; choose from {sorted(NAMED_CASES)}")
        raw = dict(NAMED_CASES[case])
        if path:
            raw.update(json.loads(Path(path).read_text()))
        return RunConfig.from_dict(raw)
    if not path:
        raise ConfigError("--config is required for this command")
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    return RunConfig.from_dict(json.loads(p.read_text()), base_dir=p.parent)


def _emit_json(payload: dict, out_path: Optional[str], to_stdout: bool) -> None:
    payload = dict(payload)
    payload.setdefault("schema_version", SCHEMA_VERSION)
    payload["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    text = json.dumps(payload, indent=2, sort_keys=True, default=_json_default)
    if out_path:
        Path(out_path).write_text(text + "\n")
    if to_stdout or not out_path:
        print(text)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and math.isinf(obj):
        return "inf"
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _fmt(x) -> str:
    if x is None:
        return "NA"
    if isinstance(x, float):
        if math.isinf(x):
            return "inf"
        return f"{x:.6g}"
    return str(x)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_growth(args) -> int:
    if args.config:
        cfg = _load_config(args.config)
        model = cfg.model
    else:
        model = group_from_config(
            {"family": args.family or "Z", "dimension": args.dimension}
        )
    report = growth_report(model, args.nmax)
    print(f"family: {report.family}   n_max: {report.n_max}")
    print(f"fitted growth exponent: {report.fitted_exponent:.4f} "
          f"(fit over n in [{report.fit_window[0]}, {report.fit_window[1]}])")
    print("   n   shell    ball")
    for n, (sh, bl) in enumerate(zip(report.shell_counts, report.ball_counts)):
        print(f"{n:4d}  {sh:6d}  {bl:6d}")
    if args.json or args.out:
        _emit_json(report.to_dict(), args.out, args.json)
    return EXIT_OK


def cmd_verify_weight(args) -> int:
    cfg = _load_config(args.config)
    if cfg.weight is None:
        raise ConfigError("verify-weight needs a 'weight' section")
    if cfg.s is None or cfg.r is None:
        raise ConfigError("verify-weight needs 's' and 'r' for the summability check")
    checks = cfg.checks
    n_max = int(checks.get("n_max", default_radial_horizon(cfg.model)))
    margin = float(checks.get("margin", 0.05))
    reports = [check_weight_axioms(
        cfg.weight, radius=int(checks.get("axiom_radius", 5)),
        samples=int(checks.get("axiom_samples", 1000)), seed=cfg.seed,
    )]
    aux = build_auxiliary(cfg.weight, cfg.p)
    if aux.mode == WEAKLY_SUBADDITIVE:
        reports.append(validate_weak_subadditivity(cfg.weight, aux.d_const, seed=cfg.seed))
    else:
        reports.append(check_growth_condition(
            cfg.weight, n_max=int(checks.get("growth_n_max", max(n_max, 4096))),
            margin=margin,
        ))
    reports.append(check_summability(aux, cfg.s, cfg.r, n_max, margin=margin))
    worst = VERIFIED
    for rep in reports:
        print(f"{rep.condition:20s} {rep.status}")
        if rep.status == REFUTED:
            worst = REFUTED
        elif rep.status == INCONCLUSIVE and worst != REFUTED:
            worst = INCONCLUSIVE
    payload = {"reports": [r.to_dict() for r in reports], "overall": worst,
               "weight": cfg.weight.describe(), "group": cfg.model.signature()}
    if args.json or args.out:
        _emit_json(payload, args.out, args.json)
    return _STATUS_EXIT[worst]


def cmd_estimate_theta(args) -> int:
    cfg = _load_config(args.config)
    if cfg.weight is None or cfg.s is None or cfg.r is None:
        raise ConfigError("estimate-theta needs 'weight', 's', and 'r'")
    aux = build_auxiliary(cfg.weight, cfg.p)
    try:
        cert = estimate_theta(cfg.weight, aux, cfg.p, cfg.s, cfg.r)
    except NoFeasibleThetaError as exc:
        print(f"refuted: {exc}", file=sys.stderr)
        return EXIT_REFUTED
    except SumInconclusiveError as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    print(f"theta = {cert.theta:.6g}   alpha = {cert.alpha:.6g}")
    print(f"C_holder = {cert.c_holder:.6g}   C = {cert.c_full:.6g}")
    print(f"provenance: {cert.provenance}")
    if args.json or args.out:
        _emit_json(cert.to_dict(), args.out, args.json)
    return EXIT_OK


def _resolve_certificate(cfg: RunConfig) -> HolderCertificate:
    spec = cfg.raw.get("certificate")
    aux = build_auxiliary(cfg.weight, cfg.p) if cfg.weight is not None else None
    if spec:
        return HolderCertificate.nominal(
            cfg.weight, aux, cfg.p,
            theta=float(spec.get("theta", 0.5)), c_full=float(spec.get("c", 1.0)),
        )
    if cfg.s is None or cfg.r is None:
        raise ConfigError("invert needs 's' and 'r' (or an explicit 'certificate')")
    return estimate_theta(cfg.weight, aux, cfg.p, cfg.s, cfg.r)


def cmd_invert(args) -> int:
    cfg = _load_config(args.config)
    if cfg.weight is None:
        raise ConfigError("invert needs a 'weight' section")
    try:
        cert = _resolve_certificate(cfg)
    except NoFeasibleThetaError as exc:
        print(f"refuted: {exc}", file=sys.stderr)
        return EXIT_REFUTED
    except SumInconclusiveError as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    elements = cfg.elements or [analysis._default_test_element(cfg.model)]
    opts = cfg.inversion_opts
    tol = float(args.tol if args.tol is not None else opts.get("tol", 1e-12))
    trunc = float(args.trunc if args.trunc is not None else opts.get("trunc", 0.0))
    k_max = int(args.kmax if args.kmax is not None else opts.get("k_max", 12))
    reports = []
    for i, a in enumerate(elements):
        try:
            rep = inversion.neumann_invert(
                a, cert, tol=tol, n_max=int(opts.get("n_max", 600)),
                trunc=trunc, opnorm_k_max=k_max, k_cut=int(opts.get("k_cut", 64)),
            )
        except inversion.NotCertifiedInvertibleError as exc:
            print(f"element {i}: not certified invertible: {exc}", file=sys.stderr)
            return EXIT_REFUTED
        except inversion.DidNotConvergeError as exc:
            print(f"element {i}: did not converge: {exc}", file=sys.stderr)
            return EXIT_INCONCLUSIVE
        reports.append(rep)
        asym = rep.asymptotic.value if rep.asymptotic.applicable else None
        print(f"element {i}:")
        print(f"  ||a||_A                 {_fmt(rep.norms.a_norm_a)}")
        print(f"  ||a||_B                 [{_fmt(rep.norms.a_b_lower)}, {_fmt(rep.norms.a_b_upper)}]")
        print(f"  ||a^-1||_B              [{_fmt(rep.norms.ainv_b_lower)}, {_fmt(rep.norms.ainv_b_upper)}]")
        print(f"  nu(a)                   {_fmt(rep.nu)}")
        print(f"  ||c||_B certified       {_fmt(rep.c_norm_b_certified)}")
        print(f"  product bound           {_fmt(rep.product_bound.value)} (log {_fmt(rep.product_bound.log_value)})")
        print(f"  asymptotic bound        {_fmt(asym)}")
        print(f"  actual ||a^-1||_A       {_fmt(rep.actual_inverse_norm_a)}")
        print(f"  Neumann terms           {rep.terms_used}")
        print(f"  residual (r/l)          {_fmt(rep.residuals.right)} / {_fmt(rep.residuals.left)}")
    if args.json or args.out:
        payload = {"reports": [r.to_dict(include_inverse=bool(args.include_inverse)) for r in reports]}
        _emit_json(payload, args.out, args.json)
    return EXIT_OK


def cmd_bound_compare(args) -> int:
    cfg = _load_config(args.config)
    sweep = cfg.raw.get("sweep", [])
    rows = []
    for i, wspec in enumerate(sweep):
        w = weight_from_config(cfg.model, wspec)
        aux = build_auxiliary(w, cfg.p)
        cert_spec = cfg.raw.get("certificate")
        if cert_spec:
            cert = HolderCertificate.nominal(
                w, aux, cfg.p, theta=float(cert_spec.get("theta", 0.5)),
                c_full=float(cert_spec.get("c", 1.0)))
        else:
            cert = estimate_theta(w, aux, cfg.p, cfg.s, cfg.r)
        elements = cfg.elements or [analysis._default_test_element(cfg.model)]
        for j, a in enumerate(elements):
            rep = inversion.neumann_invert(
                a, cert, tol=float(cfg.inversion_opts.get("tol", 1e-12)),
                n_max=int(cfg.inversion_opts.get("n_max", 600)),
            )
            asym = rep.asymptotic.value if rep.asymptotic.applicable else None
            rows.append({
                "element": f"w{i}:e{j}",
                "actual": rep.actual_inverse_norm_a,
                "product_bound": rep.product_bound.value,
                "asymptotic_bound": "NA" if asym is None else asym,
                "nu": rep.nu,
            })
    out = args.csv or "-"
    stream = sys.stdout if out == "-" else open(out, "w", newline="")
    try:
        writer = csv.DictWriter(stream, fieldnames=BOUND_COMPARE_COLUMNS_V1)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    finally:
        if stream is not sys.stdout:
            stream.close()
    return EXIT_OK


def cmd_pipeline(args) -> int:
    cfg = _load_config(args.config, case=args.case)
    if cfg.weight is None or cfg.s is None or cfg.r is None:
        raise ConfigError("pipeline needs 'weight', 's', and 'r'")
    checks = cfg.checks
    result = pipeline(
        cfg.model, cfg.weight, cfg.p, cfg.s, cfg.r,
        elements=cfg.elements or None,
        seed=args.seed if args.seed is not None else cfg.seed,
        n_max=int(checks["n_max"]) if "n_max" in checks else None,
        margin=float(checks.get("margin", 0.05)),
        tol=float(cfg.inversion_opts.get("tol", 1e-12)),
        neumann_n_max=int(cfg.inversion_opts.get("n_max", 600)),
        trunc=float(args.trunc if args.trunc is not None else cfg.inversion_opts.get("trunc", 0.0)),
        config_echo={"case": args.case} if args.case else {"config": args.config},
    )
    for stage in result.stages:
        print(f"{stage.name:20s} {stage.status}")
    print(f"overall: {result.overall_status}")
    if args.json or args.out:
        _emit_json(result.to_dict(), args.out, args.json)
    return result.exit_code


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convinv",
        description="Weighted convolution algebras with certified norm-controlled inversion",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=str, default=None, help="JSON run config")
        p.add_argument("--json", action="store_true", help="print machine JSON")
        p.add_argument("--out", type=str, default=None, help="write JSON report to a file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--trunc", type=float, default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--kmax", type=int, default=None)

    g = sub.add_parser("growth", help="ball enumeration and growth exponent fit")
    common(g)
    g.add_argument("--family", type=str, default=None)
    g.add_argument("--dimension", type=int, default=1)
    g.add_argument("--nmax", type=int, default=12)
    g.set_defaults(func=cmd_growth)

    vw = sub.add_parser("verify-weight", help="axioms, growth condition, summability")
    common(vw)
    vw.set_defaults(func=cmd_verify_weight)

    et = sub.add_parser("estimate-theta", help="differential-norm certificate (C, theta)")
    common(et)
    et.set_defaults(func=cmd_estimate_theta)

    iv = sub.add_parser("invert", help="certified Neumann inversion with bounds")
    common(iv)
    iv.add_argument("--include-inverse", action="store_true",
                    help="embed the inverse's coefficients in the JSON report")
    iv.set_defaults(func=cmd_invert)

    bc = sub.add_parser("bound-compare", help="CSV of actual vs product vs asymptotic bounds")
    common(bc)
    bc.add_argument("--csv", type=str, default=None, help="CSV output path ('-' for stdout)")
    bc.set_defaults(func=cmd_bound_compare)

    pl = sub.add_parser("pipeline", help="end-to-end staged run")
    common(pl)
    pl.add_argument("--case", type=str, default=None,
                    help=f"named case: {', '.join(sorted(NAMED_CASES))}")
    pl.set_defaults(func=cmd_pipeline)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, GroupError, WeightError, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OPERATIONAL


if __name__ == "__main__":
    raise SystemExit(main())
