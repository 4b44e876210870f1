"""Weight families on group models, auxiliary functions u and sigma, and
finite-evidence certificates for the weight axioms, the radial summability
condition, and the doubling-ratio growth condition."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import gammaincc, gammaln

from .groups import GroupModel, LocallyFiniteModel, _sort_key

VERIFIED = "verified"
REFUTED = "refuted"
INCONCLUSIVE = "inconclusive"


class WeightError(ValueError):
    """Invalid weight parameters or an unsupported weight/operation pairing."""


@dataclass
class ConditionReport:
    """Outcome of a finite-evidence check, with the evidence that fired it."""

    condition: str
    status: str
    evidence: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    @property
    def verified(self) -> bool:
        return self.status == VERIFIED

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "status": self.status,
            "evidence": self.evidence,
            "params": self.params,
        }


# ---------------------------------------------------------------------------
# weight families
# ---------------------------------------------------------------------------


class Weight:
    """A radial weight w(x) = exp(profile(tau(x))) on a group model.

    All built-in families depend on x only through the length tau(x) (the
    chain index for the locally finite family), so evaluation reduces to a
    radial profile; radial values are cached per weight, and tau itself is
    memoized inside the model.
    """

    family: str = "abstract"

    def __init__(self, model: GroupModel) -> None:
        self.model = model
        self._radial_cache: dict = {}

    # radial log-profile; must accept numpy arrays
    def log_radial(self, n):
        raise NotImplementedError

    def rho(self, n):
        """Growth profile with w = exp(rho(tau)); profile families only."""
        raise WeightError(f"{self.family}: no growth profile")

    @property
    def has_profile(self) -> bool:
        return False

    def growth_ratio_limit(self) -> Optional[float]:
        """Closed-form limsup of rho(2n)/rho(n), when known."""
        return None

    def radius_of(self, x) -> int:
        return self.model.word_length(x)

    def value(self, x) -> float:
        n = self.radius_of(x)
        v = self._radial_cache.get(n)
        if v is None:
            v = float(np.exp(self.log_radial(n)))
            self._radial_cache[n] = v
        return v

    def log_value(self, x) -> float:
        return float(self.log_radial(self.radius_of(x)))

    def params(self) -> dict:
        return {}

    def describe(self) -> dict:
        d = {"family": self.family}
        d.update(self.params())
        return d


class PolynomialWeight(Weight):
    """w(x) = (1 + tau(x))^beta; beta = 0 gives the trivial weight."""

    family = "polynomial"

    def __init__(self, model: GroupModel, beta: float) -> None:
        if beta < 0:
            raise WeightError(f"beta must be >= 0, got {beta}")
        super().__init__(model)
        self.beta = float(beta)

    def log_radial(self, n):
        return self.beta * np.log1p(np.asarray(n, dtype=float))

    def rho(self, n):
        return self.beta * np.log1p(np.asarray(n, dtype=float))

    has_profile = True

    def growth_ratio_limit(self) -> Optional[float]:
        return 1.0

    def params(self) -> dict:
        return {"beta": self.beta}


class SubexpPowerWeight(Weight):
    """w(x) = exp(C * tau(x)^alpha) with 0 < alpha < 1."""

    family = "subexp_power"

    def __init__(self, model: GroupModel, alpha: float, c: float) -> None:
        if not 0.0 < alpha < 1.0:
            raise WeightError(f"alpha must lie in (0,1), got {alpha}")
        if c <= 0:
            raise WeightError(f"C must be positive, got {c}")
        super().__init__(model)
        self.alpha = float(alpha)
        self.c = float(c)

    def log_radial(self, n):
        return self.c * np.power(np.asarray(n, dtype=float), self.alpha)

    rho = log_radial
    has_profile = True

    def growth_ratio_limit(self) -> Optional[float]:
        return 2.0**self.alpha

    def params(self) -> dict:
        return {"alpha": self.alpha, "c": self.c}


class SubexpLogWeight(Weight):
    """w(x) = exp(C * tau(x) / ln(1+tau(x))^gamma), the designed failure case
    for the doubling-ratio growth condition (its ratio tends to 2)."""

    family = "subexp_log"

    def __init__(self, model: GroupModel, gamma: float, c: float) -> None:
        if gamma <= 0:
            raise WeightError(f"gamma must be positive, got {gamma}")
        if c <= 0:
            raise WeightError(f"C must be positive, got {c}")
        super().__init__(model)
        self.gamma = float(gamma)
        self.c = float(c)

    def log_radial(self, n):
        n = np.asarray(n, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.c * n / np.log1p(n) ** self.gamma
        return np.where(n == 0, 0.0, out)

    rho = log_radial
    has_profile = True

    def growth_ratio_limit(self) -> Optional[float]:
        return 2.0

    def params(self) -> dict:
        return {"gamma": self.gamma, "c": self.c}


class LocallyFiniteWeight(Weight):
    """The chain weight 1 + sum_i n_i 1_{G_{i+1} \\ G_i} on ⊕ Z/2Z.

    Radial in the chain index j: value 1 for j <= 1 and 1 + n_{j-1} for
    j >= 2.  Satisfies w(st) <= max(w(s), w(t)), hence weakly subadditive
    with D = 1 (equality can fail when the top chain levels cancel, e.g.
    s = t gives st = e).
    """

    family = "locally_finite"

    def __init__(self, model: GroupModel, n_seq: Callable | str = "pow2") -> None:
        if not isinstance(model, LocallyFiniteModel):
            raise WeightError("the chain weight requires the locally finite model")
        super().__init__(model)
        if n_seq == "pow2":
            self._n_seq = lambda i: np.power(2.0, np.asarray(i, dtype=float))
            self._n_seq_name = "pow2"
        elif callable(n_seq):
            self._n_seq = n_seq
            self._n_seq_name = "custom"
        else:
            raise WeightError(f"unknown n_i rule {n_seq!r}")
        ival = np.arange(1, 6, dtype=float)
        vals = np.asarray(self._n_seq(ival), dtype=float)
        if np.any(vals < 1.0) or np.any(np.diff(vals) < 0):
            raise WeightError("the sequence {n_i} must be increasing with values >= 1")

    def log_radial(self, n):
        n = np.asarray(n, dtype=float)
        with np.errstate(invalid="ignore"):
            vals = np.log1p(self._n_seq(np.maximum(n - 1, 1)))
        return np.where(n <= 1, 0.0, vals)

    def params(self) -> dict:
        return {"n_rule": self._n_seq_name}


class CustomProfileWeight(Weight):
    """w = exp(rho(tau)) for a user-supplied profile rho with rho(0) = 0."""

    family = "custom_profile"

    def __init__(self, model: GroupModel, rho: Callable, name: str = "custom") -> None:
        super().__init__(model)
        self._rho = rho
        self.name = name
        if abs(float(np.asarray(rho(0)))) > 1e-12:
            raise WeightError("profile must satisfy rho(0) = 0")

    def _rho_arr(self, n):
        n = np.asarray(n, dtype=float)
        try:
            return np.asarray(self._rho(n), dtype=float)
        except Exception:
            return np.vectorize(lambda v: float(self._rho(v)))(n)

    def log_radial(self, n):
        return self._rho_arr(n)

    rho = log_radial
    has_profile = True

    def params(self) -> dict:
        return {"name": self.name}


def weight_from_config(model: GroupModel, cfg: dict) -> Weight:
    """Build a weight from a config mapping, e.g. {"family": "polynomial", "beta": 2}."""
    if not isinstance(cfg, dict) or "family" not in cfg:
        raise WeightError(f"weight config must be a mapping with a 'family' key: {cfg!r}")
    family = str(cfg["family"]).lower()
    if family == "polynomial":
        return PolynomialWeight(model, float(cfg.get("beta", 1.0)))
    if family == "subexp_power":
        return SubexpPowerWeight(model, float(cfg.get("alpha", 0.5)), float(cfg.get("c", 1.0)))
    if family == "subexp_log":
        return SubexpLogWeight(model, float(cfg.get("gamma", 1.0)), float(cfg.get("c", 1.0)))
    if family in ("locally_finite", "locally-finite", "lf"):
        return LocallyFiniteWeight(model, cfg.get("n_rule", "pow2"))
    raise WeightError(f"unknown weight family {cfg['family']!r}")


def weight_eval(w: Weight, x) -> float:
    """Evaluate w(x) through the family's radial formula."""
    return w.value(x)


# ---------------------------------------------------------------------------
# auxiliary functions
# ---------------------------------------------------------------------------

WEAKLY_SUBADDITIVE = "weakly_subadditive"
RHO_PROFILE = "rho_profile"


class AuxiliaryFunction:
    """The function u paired with a weight, and sigma = w * u.

    Mode 'weakly_subadditive': u = D / w, so sigma = D identically.
    Mode 'rho_profile': u = exp(rho(2 tau) - 2 rho(tau)) <= 1, sigma >= 1.
    """

    def __init__(self, weight: Weight, mode: str, d_const: float = 1.0) -> None:
        if mode not in (WEAKLY_SUBADDITIVE, RHO_PROFILE):
            raise WeightError(f"unknown auxiliary mode {mode!r}")
        self.weight = weight
        self.mode = mode
        self.d_const = float(d_const)

    def log_u_radial(self, n):
        if self.mode == WEAKLY_SUBADDITIVE:
            return math.log(self.d_const) - self.weight.log_radial(n)
        n = np.asarray(n, dtype=float)
        return self.weight.rho(2 * n) - 2 * self.weight.rho(n)

    def log_sigma_radial(self, n):
        return self.log_u_radial(n) + self.weight.log_radial(n)

    def u_value(self, x) -> float:
        return float(np.exp(self.log_u_radial(self.weight.radius_of(x))))

    def sigma_value(self, x) -> float:
        return float(np.exp(self.log_sigma_radial(self.weight.radius_of(x))))

    def u_bound(self) -> float:
        """Upper bound for u: D in the weakly subadditive mode, 1 for profiles."""
        return self.d_const if self.mode == WEAKLY_SUBADDITIVE else 1.0

    def decay_descriptor(self, s: float, r: float) -> Optional[dict]:
        """Certified asymptotic form of the radial factor u^s * w^r.

        Returns {"kind": "power", "exponent": a, "coef": K} meaning the factor
        is <= K * n^(-a) for all n >= 1, or {"kind": "subexp", ...} meaning it
        equals K * exp(-c n^alpha), or {"kind": "grows"}, or None when no
        closed form is available.
        """
        w = self.weight
        if isinstance(w, PolynomialWeight) and self.mode == RHO_PROFILE:
            a = w.beta * (s - r)
            if a <= 0:
                return {"kind": "grows"} if a < 0 else None
            # (1+2n)^(bs) (1+n)^(-b(2s-r)) <= 2^(bs) n^(-b(s-r)) for n >= 1
            return {"kind": "power", "exponent": a, "coef": 2.0 ** (w.beta * s)}
        if isinstance(w, SubexpPowerWeight) and self.mode == RHO_PROFILE:
            c = w.c * (s * (2.0 - 2.0**w.alpha) - r)
            if c <= 0:
                return {"kind": "grows"}
            return {"kind": "subexp", "rate": c, "alpha": w.alpha, "coef": 1.0}
        if isinstance(w, SubexpLogWeight) and self.mode == RHO_PROFILE:
            return {"kind": "grows"} if r > 0 else None
        return None

    def describe(self) -> dict:
        return {"mode": self.mode, "d_const": self.d_const, "weight": self.weight.describe()}


def build_auxiliary(w: Weight, p: float) -> AuxiliaryFunction:
    """Pick the auxiliary-function mode the weight family supports."""
    if p < 1:
        raise WeightError(f"p must be >= 1, got {p}")
    if isinstance(w, LocallyFiniteWeight):
        return AuxiliaryFunction(w, WEAKLY_SUBADDITIVE, d_const=1.0)
    if w.has_profile:
        return AuxiliaryFunction(w, RHO_PROFILE)
    raise WeightError(
        f"{w.family}: neither a profile nor a weakly subadditive rule applies; "
        "construct AuxiliaryFunction explicitly with a user-supplied D"
    )


# ---------------------------------------------------------------------------
# axiom and property checks
# ---------------------------------------------------------------------------


def _random_ball_pairs(model: GroupModel, radius: int, samples: int, seed):
    rng = np.random.default_rng(seed)
    ball = model.ball(radius)
    idx = rng.integers(0, len(ball), size=(samples, 2))
    return [(ball[i], ball[j]) for i, j in idx]


def check_weight_axioms(
    w: Weight, radius: int = 6, samples: int = 2000, seed: int = 0, tol: float = 1e-12
) -> ConditionReport:
    """Check w(e) = 1, symmetry on ball(radius), and submultiplicativity on
    all pairs of ball(3) plus sampled pairs from ball(radius)."""
    model = w.model
    params = {"radius": radius, "samples": samples, "seed": seed}
    if abs(w.value(model.identity) - 1.0) > tol:
        return ConditionReport(
            "weight_axioms", REFUTED,
            {"reason": "w(e) != 1", "value": w.value(model.identity)}, params,
        )
    for x in model.ball(radius):
        if abs(w.value(x) - w.value(model.inverse(x))) > tol * max(1.0, w.value(x)):
            return ConditionReport(
                "weight_axioms", REFUTED,
                {"reason": "symmetry fails", "witness": repr(x)}, params,
            )
    small = model.ball(min(3, radius))
    pairs = [(x, y) for x in small for y in small]
    pairs += _random_ball_pairs(model, radius, samples, seed)
    checked = 0
    for x, y in pairs:
        lhs = w.log_value(model.multiply(x, y))
        rhs = w.log_value(x) + w.log_value(y)
        if lhs > rhs + tol * max(1.0, abs(rhs)) + tol:
            return ConditionReport(
                "weight_axioms", REFUTED,
                {"reason": "submultiplicativity fails", "witness": (repr(x), repr(y)),
                 "log_lhs": lhs, "log_rhs": rhs}, params,
            )
        checked += 1
    return ConditionReport("weight_axioms", VERIFIED, {"pairs_checked": checked}, params)


def validate_algebra_condition(
    aux: AuxiliaryFunction, radius: int = 3, samples: int = 10_000, seed: int = 0,
    tol: float = 1e-12,
) -> ConditionReport:
    """Check w(xy)/(w(x)w(y)) <= u(x) + u(y) on exhaustive ball(radius) pairs
    plus sampled pairs."""
    w = aux.weight
    model = w.model
    params = {"radius": radius, "samples": samples, "seed": seed}
    ball = model.ball(radius)
    pairs = [(x, y) for x in ball for y in ball]
    pairs += _random_ball_pairs(model, radius + 1, samples, seed)
    worst = -math.inf
    for x, y in pairs:
        lhs = math.exp(
            w.log_value(model.multiply(x, y)) - w.log_value(x) - w.log_value(y)
        )
        rhs = aux.u_value(x) + aux.u_value(y)
        worst = max(worst, lhs - rhs)
        if lhs > rhs + tol:
            return ConditionReport(
                "algebra_condition", REFUTED,
                {"witness": (repr(x), repr(y)), "lhs": lhs, "rhs": rhs}, params,
            )
    return ConditionReport(
        "algebra_condition", VERIFIED,
        {"pairs_checked": len(pairs), "worst_margin": worst}, params,
    )


def validate_weak_subadditivity(
    w: Weight, d_const: float, radius: int = 4, samples: int = 5000, seed: int = 0,
    tol: float = 1e-12,
) -> ConditionReport:
    """Check w(xy) <= D (w(x) + w(y)) exhaustively on ball(radius) pairs plus
    sampled pairs; D is not computable from finitely many values, so a user
    claim is only ever refuted, never proven."""
    model = w.model
    params = {"d_const": d_const, "radius": radius, "samples": samples, "seed": seed}
    ball = model.ball(radius)
    pairs = [(x, y) for x in ball for y in ball]
    pairs += _random_ball_pairs(model, radius, samples, seed)
    for x, y in pairs:
        lhs = w.value(model.multiply(x, y))
        rhs = d_const * (w.value(x) + w.value(y))
        if lhs > rhs * (1 + tol):
            return ConditionReport(
                "weak_subadditivity", REFUTED,
                {"witness": (repr(x), repr(y)), "lhs": lhs, "rhs": rhs}, params,
            )
    return ConditionReport(
        "weak_subadditivity", VERIFIED, {"pairs_checked": len(pairs)}, params
    )


# ---------------------------------------------------------------------------
# summability of u^s * w^r over the group
# ---------------------------------------------------------------------------


def _power_tail(coef: float, exponent: float, n_from: int) -> float:
    """sum_{n > N} coef * n^(-exponent) <= coef * N^(1-exponent) / (exponent-1)."""
    if exponent <= 1.0:
        return math.inf
    return coef * n_from ** (1.0 - exponent) / (exponent - 1.0)


def _subexp_tail(coef: float, degree: float, rate: float, alpha: float, n_from: int) -> float:
    """sum_{n > N} coef * n^degree * exp(-rate * n^alpha) via the incomplete
    gamma integral, valid once the terms are decreasing at N."""
    s = (degree + 1.0) / alpha
    x = rate * n_from**alpha
    log_gamma_upper = math.log(max(gammaincc(s, x), 1e-300)) + gammaln(s)
    log_tail = math.log(coef) - math.log(alpha) - s * math.log(rate) + log_gamma_upper
    return math.exp(log_tail)


def check_summability(
    aux: AuxiliaryFunction,
    s: float,
    r: float,
    n_max: int,
    *,
    geo_ratio_cap: float = 0.9,
    margin: float = 0.05,
    envelope_safety: float = 2.0,
) -> ConditionReport:
    """Certify sum_G u^s w^r by shell sums S_n = |shell_n| * u(n)^s * w(n)^r.

    Three certificates, tried in order:
      * geometric: every last-third ratio S_{n+1}/S_n is below geo_ratio_cap;
        tail S_N * rho/(1-rho).
      * power law: the log-log slope over the last third (both halves) exceeds
        1 + margin; integral tail.
      * analytic envelope: for closed-form families on groups of known growth
        order d, bound shells beyond the observed horizon by C_env * n^(d-1)
        and integrate the family's certified radial decay.

    Refuted when the observed shell sums are eventually nondecreasing or the
    family's radial factor provably grows; inconclusive otherwise.  Verified
    reports carry the observed sum and the appended tail bound.
    """
    if s <= 0 or r < 0:
        raise WeightError(f"need s > 0 and r >= 0, got s={s}, r={r}")
    if n_max < 6:
        raise WeightError(f"n_max must be >= 6, got {n_max}")
    w = aux.weight
    model = w.model
    horizon = n_max
    if model.generators is not None and model.shell_sizes.__func__ is GroupModel.shell_sizes:
        horizon = min(n_max, model.caps.radius)
    shells = model.shell_sizes(horizon)
    ns = np.arange(horizon + 1, dtype=float)
    log_g = s * np.asarray(aux.log_u_radial(ns)) + r * np.asarray(w.log_radial(ns))
    log_sums = np.log(shells) + log_g
    params = {"s": s, "r": r, "n_max": n_max, "horizon": horizon,
              "geo_ratio_cap": geo_ratio_cap, "margin": margin}

    observed = float(np.exp(log_sums).sum())
    lo = max(1, (2 * horizon) // 3)
    window = np.arange(lo, horizon)
    log_ratios = log_sums[window + 1] - log_sums[window]
    ratios = np.exp(log_ratios)
    evidence: dict = {
        "observed_sum": observed,
        "window": [int(lo), int(horizon)],
        "max_ratio": float(ratios.max()),
        "min_ratio": float(ratios.min()),
        "shell_sums_tail": [float(v) for v in np.exp(log_sums[-6:])],
    }

    descriptor = aux.decay_descriptor(s, r)
    if descriptor is not None and descriptor["kind"] == "grows":
        evidence["method"] = "analytic"
        evidence["reason"] = "radial factor eventually grows"
        return ConditionReport("summability", REFUTED, evidence, params)

    # geometric certificate
    rho_bar = float(ratios.max())
    if rho_bar <= geo_ratio_cap:
        tail = float(np.exp(log_sums[horizon])) * rho_bar / (1.0 - rho_bar)
        evidence.update(method="geometric", rho_bar=rho_bar, tail_estimate=tail,
                        sum_with_tail=observed + tail)
        return ConditionReport("summability", VERIFIED, evidence, params)

    # power-law certificate
    if len(window) >= 6:
        xs = np.log(ns[window])
        ys = log_sums[window]
        half = len(window) // 2
        k_full = -np.polyfit(xs, ys, 1)[0]
        k_a = -np.polyfit(xs[:half], ys[:half], 1)[0]
        k_b = -np.polyfit(xs[half:], ys[half:], 1)[0]
        k_cons = float(min(k_full, k_a, k_b))
        evidence["power_fit"] = {"full": float(k_full), "first_half": float(k_a),
                                 "second_half": float(k_b)}
        if k_cons > 1.0 + margin:
            tail = float(np.exp(log_sums[horizon])) * horizon / (k_cons - 1.0)
            evidence.update(method="power_law", kappa=k_cons, tail_estimate=tail,
                            sum_with_tail=observed + tail)
            return ConditionReport("summability", VERIFIED, evidence, params)

    # analytic envelope certificate
    d = model.known_growth_order
    if descriptor is not None and d is not None:
        grid = np.arange(max(1, horizon // 2), horizon + 1, dtype=float)
        env = float((shells[grid.astype(int)] / grid ** (d - 1)).max()) * envelope_safety
        n0 = horizon + 1
        if descriptor["kind"] == "power":
            a = descriptor["exponent"]
            if a - (d - 1) > 1.0:
                tail = _power_tail(env * descriptor["coef"], a - (d - 1), horizon)
                evidence.update(method="analytic_envelope", envelope_coef=env,
                                growth_order=d, tail_estimate=tail,
                                descriptor=descriptor, sum_with_tail=observed + tail)
                return ConditionReport("summability", VERIFIED, evidence, params)
        elif descriptor["kind"] == "subexp":
            rate, alpha = descriptor["rate"], descriptor["alpha"]
            # extend the exact sum until the envelope terms are decreasing
            turn = ((d - 1) / (rate * alpha)) ** (1.0 / alpha) if d > 1 else 0.0
            extra = 0.0
            if turn > horizon:
                m = np.arange(n0, int(turn) + 2, dtype=float)
                extra = float(np.sum(env * m ** (d - 1) * np.exp(-rate * m**alpha)))
                n0 = int(turn) + 2
            tail = extra + _subexp_tail(env * descriptor["coef"], d - 1, rate, alpha, n0 - 1)
            evidence.update(method="analytic_envelope", envelope_coef=env,
                            growth_order=d, tail_estimate=tail,
                            descriptor=descriptor, sum_with_tail=observed + tail)
            return ConditionReport("summability", VERIFIED, evidence, params)

    # refutation by trend is only meaningful without a closed-form descriptor:
    # families that provably decay may still be rising inside the horizon
    if descriptor is None and float(ratios.min()) >= 1.0 - 1e-12:
        evidence["reason"] = "shell sums eventually nondecreasing"
        return ConditionReport("summability", REFUTED, evidence, params)
    evidence["reason"] = "no certificate fired"
    return ConditionReport("summability", INCONCLUSIVE, evidence, params)


# ---------------------------------------------------------------------------
# doubling-ratio growth condition
# ---------------------------------------------------------------------------


def check_growth_condition(w: Weight, n_max: int, margin: float = 0.05) -> ConditionReport:
    """Evaluate rho(2n)/rho(n) up to n_max and decide limsup < 2 with margin.

    Built-in families carry a closed-form limit which is cross-checked against
    the observed trend; custom profiles are judged on the trend alone.
    """
    if not w.has_profile:
        raise WeightError(f"{w.family}: growth condition needs a profile weight")
    if n_max < 8:
        raise WeightError(f"n_max must be >= 8, got {n_max}")
    ns = np.arange(1, n_max + 1, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.asarray(w.rho(2 * ns), dtype=float) / np.asarray(w.rho(ns), dtype=float)
    finite = np.isfinite(ratios)
    ratios = ratios[finite]
    params = {"n_max": n_max, "margin": margin}
    if ratios.size < 8:
        return ConditionReport("growth_condition", INCONCLUSIVE,
                               {"reason": "degenerate profile (rho vanishes)"}, params)
    lo = (2 * ratios.size) // 3
    last = ratios[lo:]
    running_max = float(last.max())
    increasing = bool(last[-1] > last[0] + 1e-12)
    threshold = 2.0 - margin
    step = max(1, ratios.size // 64)
    evidence = {
        "running_max_last_third": running_max,
        "threshold": threshold,
        "increasing_trend": increasing,
        "ratio_subsample": [[int(i + 1), float(ratios[i])] for i in range(0, ratios.size, step)],
    }
    limit = w.growth_ratio_limit()
    if limit is not None:
        evidence["closed_form_limit"] = limit
        consistent = abs(float(last[-1]) - limit) <= max(0.25, abs(limit - ratios[lo]))
        evidence["trend_consistent_with_limit"] = bool(consistent)
        if limit <= threshold and running_max <= max(threshold, limit + margin):
            return ConditionReport("growth_condition", VERIFIED, evidence, params)
        if limit > threshold:
            return ConditionReport("growth_condition", REFUTED, evidence, params)
        return ConditionReport("growth_condition", INCONCLUSIVE, evidence, params)
    # trend-only path for custom profiles
    if running_max <= threshold and not increasing:
        return ConditionReport("growth_condition", VERIFIED, evidence, params)
    if running_max > threshold and increasing:
        return ConditionReport("growth_condition", REFUTED, evidence, params)
    if running_max > 2.0 + 1e-9:
        # impossible for a concave profile with rho(0)=0; the profile is invalid
        return ConditionReport("growth_condition", REFUTED, evidence, params)
    return ConditionReport("growth_condition", INCONCLUSIVE, evidence, params)
