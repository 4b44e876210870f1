"""Estimation of the differential-norm certificate (C, theta), empirical
validation of the convolution inequalities, and the end-to-end pipeline."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .algebra import AlgebraElement, convolve, norm_1_sigma, norm_p_omega
from .groups import GroupModel, HeisenbergModel, LocallyFiniteModel, ZdModel
from .weights import (
    INCONCLUSIVE,
    REFUTED,
    VERIFIED,
    AuxiliaryFunction,
    ConditionReport,
    Weight,
    WEAKLY_SUBADDITIVE,
    build_auxiliary,
    check_growth_condition,
    check_summability,
    check_weight_axioms,
    validate_algebra_condition,
    validate_weak_subadditivity,
)


class CertificateError(RuntimeError):
    """No certificate obtainable for the requested parameters."""


class NoFeasibleThetaError(CertificateError):
    """The exponent constraints admit no grid point."""


class SumInconclusiveError(CertificateError):
    """Constraints were feasible but no summability certificate fired."""


def conjugate_index(p: float) -> float:
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if p == 1.0:
        return math.inf
    return p / (p - 1.0)


def holder_alpha(p: float, theta: float) -> float:
    """The third exponent in the generalized Hoelder split; equals the
    conjugate index q in the theta -> 1 limit, and is 2 for every theta
    when p = 2."""
    return 2.0 * p / (p + p * theta - 2.0 * theta)


@dataclass
class HolderCertificate:
    """The pair (C, theta) certifying ||f*f||_{p,w} <= C ||f||^{1+theta} ||f||_2^{1-theta}.

    ``c_full`` is the proof-backed constant 2 * c_holder, where c_holder is
    the certified value of (sum_G u^alpha w^((1-theta) alpha))^(1/alpha);
    empirical ratios observed in checks are reported separately and never
    substituted here.
    """

    theta: float
    alpha: float
    c_holder: float
    c_full: float
    p: float
    q: float
    s: Optional[float]
    r: Optional[float]
    weight: Optional[Weight] = None
    aux: Optional[AuxiliaryFunction] = None
    provenance: str = "user"
    sum_report: Optional[ConditionReport] = None
    verified_radius: Optional[int] = None

    def __post_init__(self) -> None:
        if not 0.0 < self.theta < 1.0:
            raise CertificateError(f"theta must lie in (0,1), got {self.theta}")
        if self.c_full <= 0 or self.c_holder < 0:
            raise CertificateError("certificate constants must be positive")
        if self.p < 1:
            raise CertificateError(f"p must be >= 1, got {self.p}")

    @staticmethod
    def nominal(
        weight: Weight, aux: Optional[AuxiliaryFunction], p: float,
        theta: float = 0.5, c_full: float = 1.0,
    ) -> "HolderCertificate":
        """A user-supplied (C, theta) pair, for bound evaluation where no
        proof-backed certificate exists."""
        return HolderCertificate(
            theta=theta, alpha=holder_alpha(p, theta), c_holder=c_full / 2.0,
            c_full=c_full, p=p, q=conjugate_index(p), s=None, r=None,
            weight=weight, aux=aux, provenance="user",
        )

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "alpha": self.alpha,
            "c_holder": self.c_holder,
            "c_full": self.c_full,
            "p": self.p,
            "q": None if math.isinf(self.q) else self.q,
            "s": self.s,
            "r": self.r,
            "provenance": self.provenance,
            "weight": self.weight.describe() if self.weight else None,
            "sum_evidence": self.sum_report.to_dict() if self.sum_report else None,
        }


def default_radial_horizon(model: GroupModel) -> int:
    """How far the radial sums may look: generous for closed-form shells,
    BFS-limited otherwise (chain shell sizes 2^j must stay inside doubles)."""
    if isinstance(model, HeisenbergModel):
        return min(model.caps.radius, 20)
    if isinstance(model, LocallyFiniteModel):
        return 256
    return 2048


def estimate_theta(
    w: Weight,
    aux: AuxiliaryFunction,
    p: float,
    s: float,
    r: float,
    *,
    grid_size: int = 512,
    margin: float = 0.02,
    sum_n_max: Optional[int] = None,
    geo_ratio_cap: float = 0.9,
    sum_margin: float = 0.05,
) -> HolderCertificate:
    """Smallest grid theta with s < alpha, (1-theta) alpha < r (with margin)
    and a verified summability certificate for the Hoelder constant.

    Smaller theta is preferred because it minimizes log2(1+theta) and hence
    the exponent of the asymptotic inversion bound.
    """
    q = conjugate_index(p)
    if s <= 0:
        raise NoFeasibleThetaError(f"s must be positive, got {s}")
    if s >= q:
        raise NoFeasibleThetaError(f"need s < q = {q}, got s = {s}")
    if r <= 0:
        raise NoFeasibleThetaError(f"(1-theta) alpha < r needs r > 0, got r = {r}")
    if sum_n_max is None:
        sum_n_max = default_radial_horizon(w.model)
    grid = np.geomspace(1e-3, 1.0 - 1e-3, grid_size)
    any_feasible = False
    failures: List[dict] = []
    for theta in grid:
        alpha = holder_alpha(p, float(theta))
        if s > alpha * (1.0 - margin):
            continue
        if (1.0 - theta) * alpha > r * (1.0 - margin):
            continue
        any_feasible = True
        rep = check_summability(
            aux, alpha, (1.0 - theta) * alpha, sum_n_max,
            geo_ratio_cap=geo_ratio_cap, margin=sum_margin,
        )
        if rep.verified:
            total = rep.evidence["sum_with_tail"]
            c_holder = float(total ** (1.0 / alpha))
            return HolderCertificate(
                theta=float(theta), alpha=alpha, c_holder=c_holder,
                c_full=2.0 * c_holder, p=p, q=q, s=s, r=r, weight=w, aux=aux,
                provenance="profile-path" if aux.mode != WEAKLY_SUBADDITIVE
                else "weakly-subadditive-path",
                sum_report=rep, verified_radius=rep.params.get("horizon"),
            )
        if len(failures) < 4:
            failures.append({"theta": float(theta), "status": rep.status})
    if not any_feasible:
        raise NoFeasibleThetaError(
            f"no grid theta satisfies s < alpha and (1-theta) alpha < r "
            f"for p={p}, s={s}, r={r}"
        )
    raise SumInconclusiveError(
        f"constraints feasible but no summability certificate fired; "
        f"first failures: {failures}"
    )


# ---------------------------------------------------------------------------
# randomized inequality checks
# ---------------------------------------------------------------------------


def random_element(
    model: GroupModel, radius: int, rng: np.random.Generator,
    max_support: Optional[int] = None,
) -> AlgebraElement:
    """Complex-Gaussian coefficients on a uniformly drawn subset of ball(radius)."""
    ball = model.ball(radius)
    hi = len(ball) if max_support is None else min(max_support, len(ball))
    m = int(rng.integers(1, hi + 1))
    idx = rng.choice(len(ball), size=m, replace=False)
    coeffs = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return AlgebraElement.from_items(model, [(ball[int(i)], complex(c)) for i, c in zip(idx, coeffs)])


@dataclass
class DiffNormReport:
    """Trial statistics for the squared-element norm inequality."""

    trials: int
    support_radius: int
    seed: int
    slack: float
    violations: int
    max_ratio: float
    holder_violations: int
    max_holder_ratio: float
    worst_case: Optional[dict] = None

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.holder_violations == 0

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "support_radius": self.support_radius,
            "seed": self.seed,
            "slack": self.slack,
            "violations": self.violations,
            "max_ratio": self.max_ratio,
            "holder_violations": self.holder_violations,
            "max_holder_ratio": self.max_holder_ratio,
            "worst_case": self.worst_case,
        }


def check_diff_norm(
    cert: HolderCertificate,
    trials: int = 1000,
    support_radius: int = 3,
    seed: int = 0,
    slack: float = 1e-9,
) -> DiffNormReport:
    """Draw random elements and test ||f*f||_{p,w} <= C ||f||_{p,w}^{1+theta} ||f||_2^{1-theta}
    together with the intermediate bound ||f||_{1,sigma} <= C_H ||f||_2^{1-theta} ||f||_{p,w}^theta.

    The maximal observed ratio is an empirical lower estimate of the best
    constant and is reported, never substituted into the certificate.
    """
    if cert.weight is None or cert.aux is None:
        raise CertificateError("certificate carries no weight/auxiliary reference")
    w, aux, p, theta = cert.weight, cert.aux, cert.p, cert.theta
    model = w.model
    rng = np.random.default_rng(seed)
    violations = 0
    holder_violations = 0
    max_ratio = 0.0
    max_holder = 0.0
    worst = None
    for t in range(trials):
        f = random_element(model, support_radius, rng)
        a_norm = norm_p_omega(f, w, p)
        l2 = f.norm2()
        ff = convolve(f, f)
        lhs = norm_p_omega(ff, w, p)
        rhs = a_norm ** (1.0 + theta) * l2 ** (1.0 - theta)
        ratio = lhs / rhs if rhs > 0 else math.inf
        if ratio > max_ratio:
            max_ratio = ratio
            worst = {"trial": t, "ratio": ratio, "support": f.support_size}
        if lhs > cert.c_full * rhs + slack:
            violations += 1
        sig = norm_1_sigma(f, aux)
        hrhs = l2 ** (1.0 - theta) * a_norm**theta
        max_holder = max(max_holder, sig / hrhs if hrhs > 0 else math.inf)
        if sig > cert.c_holder * hrhs + slack:
            holder_violations += 1
    return DiffNormReport(
        trials=trials, support_radius=support_radius, seed=seed, slack=slack,
        violations=violations, max_ratio=max_ratio,
        holder_violations=holder_violations, max_holder_ratio=max_holder,
        worst_case=worst,
    )


def check_algebra_inequality(
    aux: AuxiliaryFunction,
    p: float,
    trials: int = 1000,
    support_radius: int = 3,
    seed: int = 0,
    slack: float = 1e-9,
) -> dict:
    """Random-pair test of ||f*g||_{p,w} <= ||f||_{1,sigma} ||g||_{p,w} + ||f||_{p,w} ||g||_{1,sigma}."""
    w = aux.weight
    model = w.model
    rng = np.random.default_rng(seed)
    violations = 0
    max_ratio = 0.0
    for _ in range(trials):
        f = random_element(model, support_radius, rng)
        g = random_element(model, support_radius, rng)
        lhs = norm_p_omega(convolve(f, g), w, p)
        rhs = norm_1_sigma(f, aux) * norm_p_omega(g, w, p) + norm_p_omega(f, w, p) * norm_1_sigma(g, aux)
        max_ratio = max(max_ratio, lhs / rhs if rhs > 0 else math.inf)
        if lhs > rhs + slack:
            violations += 1
    return {"trials": trials, "seed": seed, "violations": violations, "max_ratio": max_ratio}


@dataclass
class ProbeReport:
    """Necessary-condition probe on Z: w(2n) <= C w(n)^(1+theta)."""

    bounded: bool
    max_ratio: float
    argmax_n: int
    c_const: float
    theta: float
    ratio_subsample: List[Tuple[int, float]]
    growth_margin_subsample: List[Tuple[int, float, float]]

    def to_dict(self) -> dict:
        return {
            "bounded": self.bounded,
            "max_ratio": self.max_ratio,
            "argmax_n": self.argmax_n,
            "c_const": self.c_const,
            "theta": self.theta,
            "ratio_subsample": [[int(n), float(v)] for n, v in self.ratio_subsample],
            "growth_margin_subsample": [
                [int(n), float(a), float(b)] for n, a, b in self.growth_margin_subsample
            ],
        }


def necessary_condition_probe(w: Weight, cert: HolderCertificate, n_max: int) -> ProbeReport:
    """Evaluate w(2n)/w(n)^(1+theta) for n <= n_max on Z and compare the
    doubling ratio rho(2n)/rho(n) against 1 + theta + ln(C)/rho(n)."""
    model = w.model
    if not (isinstance(model, ZdModel) and model.dimension == 1):
        raise ValueError("the necessary-condition probe is defined on Z only")
    theta = cert.theta
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must lie strictly in (0,1), got {theta}")
    ns = np.arange(1, n_max + 1, dtype=float)
    log_ratio = np.asarray(w.log_radial(2 * ns)) - (1.0 + theta) * np.asarray(w.log_radial(ns))
    i = int(np.argmax(log_ratio))
    max_ratio = float(np.exp(log_ratio[i]))
    bounded = max_ratio <= cert.c_full * (1.0 + 1e-9)
    step = max(1, n_max // 32)
    sub = [(int(ns[j]), float(np.exp(log_ratio[j]))) for j in range(0, len(ns), step)]
    growth = []
    if w.has_profile:
        rho_n = np.asarray(w.rho(ns), dtype=float)
        rho_2n = np.asarray(w.rho(2 * ns), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            lhs = rho_2n / rho_n
            thr = 1.0 + theta + math.log(max(cert.c_full, 1e-300)) / rho_n
        for j in range(0, len(ns), step):
            if np.isfinite(lhs[j]) and np.isfinite(thr[j]):
                growth.append((int(ns[j]), float(lhs[j]), float(thr[j])))
    return ProbeReport(
        bounded=bounded, max_ratio=max_ratio, argmax_n=int(ns[i]),
        c_const=cert.c_full, theta=theta, ratio_subsample=sub,
        growth_margin_subsample=growth,
    )


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------


@dataclass
class StageResult:
    name: str
    status: str
    detail: dict

    def to_dict(self) -> dict:
        return {"name": self.name, "status": self.status, "detail": self.detail}


@dataclass
class PipelineResult:
    """Consolidated outcome of the staged verification-and-inversion run."""

    stages: List[StageResult]
    overall_status: str
    halted_at: Optional[str]
    certificate: Optional[HolderCertificate]
    config_echo: dict

    @property
    def exit_code(self) -> int:
        return {VERIFIED: 0, REFUTED: 2, INCONCLUSIVE: 3}.get(self.overall_status, 1)

    def to_dict(self) -> dict:
        return {
            "schema_version": "convinv/1",
            "overall_status": self.overall_status,
            "halted_at": self.halted_at,
            "exit_code": self.exit_code,
            "stages": [s.to_dict() for s in self.stages],
            "certificate": self.certificate.to_dict() if self.certificate else None,
            "config": self.config_echo,
        }


def _default_test_element(model: GroupModel) -> AlgebraElement:
    if isinstance(model, ZdModel):
        g = tuple([1] + [0] * (model.dimension - 1))
        return AlgebraElement.from_items(model, [(model.identity, 1.0), (g, -0.5)])
    if isinstance(model, HeisenbergModel):
        return AlgebraElement.from_items(model, [(model.identity, 1.0), ((1, 0, 0), -0.4)])
    if isinstance(model, LocallyFiniteModel):
        return AlgebraElement.from_items(model, [(model.identity, 1.0), (frozenset({0}), -0.4)])
    raise ValueError(f"no default test element for {model.family}")


def pipeline(
    model: GroupModel,
    w: Weight,
    p: float,
    s: float,
    r: float,
    *,
    elements: Optional[Sequence[AlgebraElement]] = None,
    seed: int = 0,
    n_max: Optional[int] = None,
    margin: float = 0.05,
    axiom_radius: int = 5,
    axiom_samples: int = 1000,
    tol: float = 1e-12,
    neumann_n_max: int = 600,
    k_cut: int = 64,
    opnorm_k_max: int = 12,
    trunc: float = 0.0,
    config_echo: Optional[dict] = None,
) -> PipelineResult:
    """Axiom checks, growth/weak-subadditivity gate, summability, certificate,
    then certified inversion with bound comparison on the test elements.

    The run halts at the first stage that is not verified; the stage name and
    its evidence are the failure report.
    """
    from . import inversion as inv  # local import to avoid a module cycle

    stages: List[StageResult] = []
    if n_max is None:
        n_max = default_radial_horizon(model)

    def halt(status: str) -> PipelineResult:
        return PipelineResult(stages, status, stages[-1].name, None, config_echo or {})

    rep = check_weight_axioms(w, radius=axiom_radius, samples=axiom_samples, seed=seed)
    stages.append(StageResult("weight_axioms", rep.status, rep.to_dict()))
    if not rep.verified:
        return halt(rep.status)

    aux = build_auxiliary(w, p)
    if aux.mode == WEAKLY_SUBADDITIVE:
        rep = validate_weak_subadditivity(w, aux.d_const, radius=min(axiom_radius, 4),
                                          samples=axiom_samples, seed=seed)
        stages.append(StageResult("weak_subadditivity", rep.status, rep.to_dict()))
    else:
        rep = check_growth_condition(w, n_max=max(n_max, 4096), margin=margin)
        stages.append(StageResult("growth_condition", rep.status, rep.to_dict()))
    if not rep.verified:
        return halt(rep.status)

    rep = validate_algebra_condition(aux, radius=min(3, axiom_radius), samples=2000, seed=seed)
    stages.append(StageResult("algebra_condition", rep.status, rep.to_dict()))
    if not rep.verified:
        return halt(rep.status)

    rep = check_summability(aux, s, r, n_max, margin=margin)
    stages.append(StageResult("summability", rep.status, rep.to_dict()))
    if not rep.verified:
        return halt(rep.status)

    try:
        cert = estimate_theta(w, aux, p, s, r, sum_n_max=n_max)
    except NoFeasibleThetaError as exc:
        stages.append(StageResult("certificate", REFUTED, {"error": str(exc)}))
        return halt(REFUTED)
    except SumInconclusiveError as exc:
        stages.append(StageResult("certificate", INCONCLUSIVE, {"error": str(exc)}))
        return halt(INCONCLUSIVE)
    stages.append(StageResult("certificate", VERIFIED, cert.to_dict()))

    if elements is None:
        elements = [_default_test_element(model)]
    inv_details = []
    status = VERIFIED
    for i, a in enumerate(elements):
        try:
            report = inv.neumann_invert(
                a, cert, tol=tol, n_max=neumann_n_max, trunc=trunc,
                opnorm_k_max=opnorm_k_max, k_cut=k_cut,
            )
        except inv.NotCertifiedInvertibleError as exc:
            inv_details.append({"element": i, "error": str(exc), "kind": "not_certified"})
            status = REFUTED
            break
        except inv.DidNotConvergeError as exc:
            inv_details.append({"element": i, "error": str(exc), "kind": "no_convergence"})
            status = INCONCLUSIVE
            break
        detail = report.to_dict(include_inverse=False)
        detail["bound_ordering_ok"] = report.bound_ordering_ok()
        inv_details.append(detail)
        if not report.bound_ordering_ok():
            status = REFUTED
            break
    stages.append(StageResult("inversion", status, {"elements": inv_details}))
    if status != VERIFIED:
        return halt(status)

    return PipelineResult(stages, VERIFIED, None, cert, config_echo or {})
