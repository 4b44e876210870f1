"""Finitely supported functions on a group under convolution: norms, the
truncation budget that keeps certified bounds honest under sparsification,
and repeated-squaring estimates for the operator norm and spectral radius."""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.signal import convolve2d

from .groups import GroupElement, GroupModel, ZdModel
from .weights import AuxiliaryFunction, Weight

DEFAULT_SUPPORT_CAP = 1_000_000

_TINY = 1e-300


class SupportCapError(RuntimeError):
    """Result support would exceed the configured cap."""


class AlgebraError(ValueError):
    """Mismatched models or invalid element data."""


@dataclass
class AlgebraElement:
    """Sparse complex function on a group model.

    ``eps`` is the accumulated truncation budget: an upper bound on the l1
    mass separating the stored coefficients from the exact object they stand
    for.  Freshly constructed elements have ``eps = 0``; convolution with a
    truncation threshold inflates it.  Certified upper bounds must add it,
    certified lower bounds must subtract it.

    Treated as immutable: all operations return new elements.
    """

    model: GroupModel
    coeffs: Dict[GroupElement, complex]
    eps: float = 0.0

    def __post_init__(self) -> None:
        if self.eps < 0:
            raise AlgebraError(f"truncation budget must be nonnegative, got {self.eps}")

    # -- construction ---------------------------------------------------

    @staticmethod
    def from_items(model: GroupModel, items: Iterable[Tuple[object, complex]]) -> "AlgebraElement":
        coeffs: Dict[GroupElement, complex] = {}
        for x, c in items:
            x = model.validate(x)
            c = complex(c)
            cur = coeffs.get(x, 0j) + c
            if cur == 0:
                coeffs.pop(x, None)
            else:
                coeffs[x] = cur
        return AlgebraElement(model, coeffs)

    @staticmethod
    def delta(model: GroupModel, x=None, coeff: complex = 1.0) -> "AlgebraElement":
        x = model.identity if x is None else model.validate(x)
        if coeff == 0:
            return AlgebraElement(model, {})
        return AlgebraElement(model, {x: complex(coeff)})

    # -- basic structure --------------------------------------------------

    @property
    def support_size(self) -> int:
        return len(self.coeffs)

    def support(self) -> List[GroupElement]:
        return list(self.coeffs)

    def __getitem__(self, x) -> complex:
        return self.coeffs.get(self.model.validate(x), 0j)

    def is_zero(self) -> bool:
        return not self.coeffs

    # -- linear operations -------------------------------------------------

    def _check_model(self, other: "AlgebraElement") -> None:
        if not self.model.same_model(other.model):
            raise AlgebraError("elements live on different group models")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check_model(other)
        out = dict(self.coeffs)
        for x, c in other.coeffs.items():
            cur = out.get(x, 0j) + c
            if cur == 0:
                out.pop(x, None)
            else:
                out[x] = cur
        return AlgebraElement(self.model, out, self.eps + other.eps)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self + other.scale(-1.0)

    def scale(self, t: complex) -> "AlgebraElement":
        if t == 0:
            return AlgebraElement(self.model, {}, 0.0)
        return AlgebraElement(
            self.model, {x: t * c for x, c in self.coeffs.items()}, abs(t) * self.eps
        )

    def truncate(self, threshold: float) -> "AlgebraElement":
        """Drop coefficients with |c| < threshold; dropped l1 mass joins eps."""
        if threshold <= 0:
            return self
        kept: Dict[GroupElement, complex] = {}
        dropped = 0.0
        for x, c in self.coeffs.items():
            if abs(c) < threshold:
                dropped += abs(c)
            else:
                kept[x] = c
        return AlgebraElement(self.model, kept, self.eps + dropped)

    def cap_support(self, max_support: int) -> "AlgebraElement":
        """Keep the max_support largest coefficients by magnitude."""
        if len(self.coeffs) <= max_support:
            return self
        top = heapq.nlargest(max_support, self.coeffs.items(), key=lambda kv: abs(kv[1]))
        kept = dict(top)
        dropped = sum(abs(c) for x, c in self.coeffs.items() if x not in kept)
        return AlgebraElement(self.model, kept, self.eps + dropped)

    # -- norms ---------------------------------------------------------------

    def norm1(self) -> float:
        return float(sum(abs(c) for c in self.coeffs.values()))

    def norm2(self) -> float:
        return math.sqrt(sum(abs(c) ** 2 for c in self.coeffs.values()))

    def max_abs(self) -> float:
        return max((abs(c) for c in self.coeffs.values()), default=0.0)

    # -- serialization ---------------------------------------------------------

    def to_json_lines(self) -> str:
        lines = []
        for x in sorted(self.coeffs, key=_canonical_key):
            c = self.coeffs[x]
            enc = sorted(x) if isinstance(x, frozenset) else list(x)
            lines.append(json.dumps({"x": enc, "re": c.real, "im": c.imag}))
        return "\n".join(lines)

    @staticmethod
    def from_json_lines(model: GroupModel, text: str) -> "AlgebraElement":
        items = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            items.append((rec["x"], complex(rec.get("re", 0.0), rec.get("im", 0.0))))
        return AlgebraElement.from_items(model, items)


def _canonical_key(x):
    if isinstance(x, frozenset):
        return (len(x), tuple(sorted(x)))
    return x


# ---------------------------------------------------------------------------
# convolution
# ---------------------------------------------------------------------------


def _dense_bounds(coeffs: Dict, dim: int) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    los = [min(k[i] for k in coeffs) for i in range(dim)]
    his = [max(k[i] for k in coeffs) for i in range(dim)]
    return tuple(los), tuple(his)


def _to_dense(coeffs: Dict, lo, hi, dim: int):
    shape = tuple(hi[i] - lo[i] + 1 for i in range(dim))
    complex_vals = any(c.imag != 0 for c in coeffs.values())
    arr = np.zeros(shape, dtype=np.complex128 if complex_vals else np.float64)
    keys = np.array([list(k) for k in coeffs], dtype=np.int64)
    vals = np.array(list(coeffs.values()))
    if not complex_vals:
        vals = vals.real
    idx = tuple(keys[:, i] - lo[i] for i in range(dim))
    arr[idx] = vals
    return arr


def _dense_worthwhile(f: AlgebraElement, g: AlgebraElement, dim: int) -> bool:
    nf, ng = len(f.coeffs), len(g.coeffs)
    if nf * ng <= 4096:
        return False
    for elt in (f, g):
        lo, hi = _dense_bounds(elt.coeffs, dim)
        vol = 1
        for i in range(dim):
            vol *= hi[i] - lo[i] + 1
        if vol > 8 * len(elt.coeffs) + 1024:
            return False
    return True


def convolve(
    f: AlgebraElement,
    g: AlgebraElement,
    trunc: float = 0.0,
    support_cap: int = DEFAULT_SUPPORT_CAP,
) -> AlgebraElement:
    """Convolution (f*g)(x) = sum_y f(y) g(y^{-1} x).

    Coefficients with magnitude below ``trunc`` are dropped and their l1 mass
    is added to the result's truncation budget, together with the propagated
    input budgets: eps_f * (||g||_1 + eps_g) + eps_g * ||f||_1.

    Z^d models with box-like supports use a dense direct convolution kernel
    (plain polynomial multiplication, no FFT); everything else runs the sparse
    double loop over supports.  Both paths are deterministic.
    """
    f._check_model(g)
    if trunc < 0:
        raise AlgebraError(f"trunc must be >= 0, got {trunc}")
    model = f.model
    if f.is_zero() or g.is_zero():
        eps = f.eps * (g.norm1() + g.eps) + g.eps * f.norm1()
        return AlgebraElement(model, {}, eps)

    dropped = 0.0
    if isinstance(model, ZdModel) and model.dimension <= 2 and _dense_worthwhile(f, g, model.dimension):
        dim = model.dimension
        lof, hif = _dense_bounds(f.coeffs, dim)
        log, hig = _dense_bounds(g.coeffs, dim)
        af = _to_dense(f.coeffs, lof, hif, dim)
        ag = _to_dense(g.coeffs, log, hig, dim)
        if dim == 1:
            arr = np.convolve(af, ag)
        else:
            arr = convolve2d(af, ag, mode="full")
        off = tuple(lof[i] + log[i] for i in range(dim))
        mags = np.abs(arr)
        keep = mags >= max(trunc, _TINY)
        dropped = float(mags[~keep].sum())
        nz = np.nonzero(keep)
        if len(nz[0]) > support_cap:
            raise SupportCapError(
                f"convolution support {len(nz[0])} exceeds cap {support_cap}"
            )
        vals = arr[nz]
        if dim == 1:
            out = {(int(i) + off[0],): complex(v) for i, v in zip(nz[0], vals)}
        else:
            out = {
                (int(i) + off[0], int(j) + off[1]): complex(v)
                for i, j, v in zip(nz[0], nz[1], vals)
            }
    else:
        acc: Dict[GroupElement, complex] = {}
        mul = model.multiply
        for x, cf in f.coeffs.items():
            for y, cg in g.coeffs.items():
                z = mul(x, y)
                cur = acc.get(z, 0j) + cf * cg
                if cur == 0:
                    acc.pop(z, None)
                else:
                    acc[z] = cur
            if len(acc) > 4 * support_cap:
                raise SupportCapError(
                    f"convolution support {len(acc)} exceeds cap {support_cap}"
                )
        out = {}
        for z, c in acc.items():
            if abs(c) < trunc:
                dropped += abs(c)
            else:
                out[z] = c
        if len(out) > support_cap:
            raise SupportCapError(
                f"convolution support {len(out)} exceeds cap {support_cap}"
            )
    eps = f.eps * (g.norm1() + g.eps) + g.eps * f.norm1() + dropped
    return AlgebraElement(model, out, eps)


def involute(f: AlgebraElement) -> AlgebraElement:
    """f*(x) = conj(f(x^{-1})): support through the inverse, conjugated."""
    inv = f.model.inverse
    out = {inv(x): c.conjugate() for x, c in f.coeffs.items()}
    return AlgebraElement(f.model, out, f.eps)


# ---------------------------------------------------------------------------
# weighted norms
# ---------------------------------------------------------------------------


def norm_p_omega(f: AlgebraElement, w: Weight, p: float) -> float:
    """The weighted norm (sum |f(x)|^p w(x)^p)^(1/p)."""
    if p < 1:
        raise AlgebraError(f"p must be >= 1, got {p}")
    if not w.model.same_model(f.model):
        raise AlgebraError("weight and element live on different models")
    if f.is_zero():
        return 0.0
    if isinstance(f.model, ZdModel) and len(f.coeffs) > 512:
        keys = np.abs(np.array([list(k) for k in f.coeffs], dtype=np.int64)).sum(axis=1)
        mags = np.abs(np.array(list(f.coeffs.values())))
        logw = np.asarray(w.log_radial(keys), dtype=float)
        return float(np.power(np.sum(mags**p * np.exp(p * logw)), 1.0 / p))
    total = sum(abs(c) ** p * w.value(x) ** p for x, c in f.coeffs.items())
    return float(total ** (1.0 / p))


def norm_1_sigma(f: AlgebraElement, aux: AuxiliaryFunction) -> float:
    """The l1 norm against sigma = w * u."""
    if not aux.weight.model.same_model(f.model):
        raise AlgebraError("auxiliary function and element live on different models")
    return float(sum(abs(c) * aux.sigma_value(x) for x, c in f.coeffs.items()))


# ---------------------------------------------------------------------------
# repeated squaring: operator norm and spectral radius
# ---------------------------------------------------------------------------


@dataclass
class NormInterval:
    """Certified enclosure [lower, upper] with the method that produced it."""

    lower: float
    upper: float
    method: str = ""
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.lower > self.upper:
            raise AlgebraError(f"empty interval [{self.lower}, {self.upper}]")
        if self.lower < 0:
            raise AlgebraError("norms are nonnegative")

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "method": self.method}


def _auto_keep_top(model: GroupModel) -> Optional[int]:
    if isinstance(model, ZdModel):
        return None if model.dimension == 1 else 20_000
    return 20_000


def _dyadic_trace(
    f: AlgebraElement,
    k_max: int,
    trunc_rel: float,
    keep_top,
    support_cap: int,
):
    """Yield (k, normalized element, log_scale) for f^(2^k), k = 0..k_max.

    Each level is renormalized to unit max coefficient with the true scale
    carried in log space, so powers with astronomically large or small norms
    stay representable.  Truncation (relative threshold plus an optional
    keep-top cap) feeds the element's eps budget.
    """
    if keep_top == "auto":
        keep_top = _auto_keep_top(f.model)
    m = f.max_abs()
    if m == 0:
        return
    cur = f.scale(1.0 / m)
    log_scale = math.log(m)
    yield 0, cur, log_scale
    for k in range(1, k_max + 1):
        try:
            raw = convolve(cur, cur, trunc=0.0, support_cap=support_cap)
        except SupportCapError:
            return
        m = raw.max_abs()
        if m == 0:
            return
        nxt = raw.truncate(trunc_rel * m)
        if keep_top is not None:
            nxt = nxt.cap_support(keep_top)
        cur = nxt.scale(1.0 / m)
        log_scale = 2.0 * log_scale + math.log(m)
        yield k, cur, log_scale


def opnorm_estimate(
    f: AlgebraElement,
    k_max: int = 10,
    *,
    trunc_rel: float = 1e-15,
    keep_top="auto",
    support_cap: int = DEFAULT_SUPPORT_CAP,
) -> NormInterval:
    """Certified interval for the operator norm of f on l2(G).

    Upper bound: ||f||_1 + eps.  Lower bound: for h = f* . f, the values
    lambda_k = ||h^(2^k)||_2^(1/2^k) are valid lower bounds for ||h||_B
    because h^(2^k) is h^(2^k) applied to the delta at the identity; then
    ||f||_B = sqrt(||h||_B) >= sqrt(lambda_k).  Truncation is subtracted
    through the eps budget before each root, so reported bounds stay valid
    (the interval encloses the norm of any object within eps of the stored
    coefficients).  If squaring hits the support cap the interval reports
    whatever k was reached, flagged in the diagnostics.
    """
    upper = f.norm1() + f.eps
    if f.is_zero():
        return NormInterval(0.0, upper, "l2-dyadic/l1")
    lower = max(f.norm2() - f.eps, 0.0)
    h = convolve(involute(f), f, 0.0, support_cap=support_cap)
    lambdas: List[float] = []
    k_reached = -1
    for k, elt, log_scale in _dyadic_trace(h, k_max, trunc_rel, keep_top, support_cap):
        k_reached = k
        certified = elt.norm2() - elt.eps
        if certified <= 0:
            continue
        log_lambda = (math.log(certified) + log_scale) / (2.0**k)
        lambdas.append(math.exp(log_lambda))
    if lambdas:
        lower = max(lower, math.sqrt(max(lambdas)))
    lower = min(lower, upper)
    return NormInterval(
        lower,
        upper,
        "l2-dyadic/l1",
        {
            "k_max": k_max,
            "k_reached": k_reached,
            "flagged": k_reached < k_max,
            "lambda_sequence": lambdas,
        },
    )


@dataclass
class SpectralRadiusReport:
    """Repeated-squaring spectral radius estimates with the full sequence."""

    mode: str
    k_max: int
    estimates: List[float]
    value: float
    corrected_value: Optional[float]
    k_reached: int
    flagged: bool

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "k_max": self.k_max,
            "estimates": self.estimates,
            "value": self.value,
            "corrected_value": self.corrected_value,
            "k_reached": self.k_reached,
            "flagged": self.flagged,
        }


def spectral_radius_estimate(
    f: AlgebraElement,
    k_max: int,
    mode: str = "b",
    *,
    weight: Optional[Weight] = None,
    p: Optional[float] = None,
    trunc_rel: float = 1e-15,
    keep_top="auto",
    support_cap: int = DEFAULT_SUPPORT_CAP,
) -> SpectralRadiusReport:
    """(||f^(2^k)||)^(1/2^k) for the weighted norm (mode "a", needs weight
    and p) or the l2 proxy for the ambient operator norm (mode "b").

    Mode "b" values are genuine lower bounds for the operator norm and
    converge to the spectral radius for hermitian elements; the corrected
    value subtracts the truncation budget.  Mode "a" values upper-bound the
    common spectral radius in exact arithmetic; truncation can only lower
    them, by a factor that washes out in the 2^k-th root.
    """
    if mode == "a":
        if weight is None or p is None:
            raise AlgebraError("mode 'a' needs weight and p")
    elif mode != "b":
        raise AlgebraError(f"mode must be 'a' or 'b', got {mode!r}")
    estimates: List[float] = []
    corrected: Optional[float] = None
    k_reached = -1
    if f.is_zero():
        return SpectralRadiusReport(mode, k_max, [0.0], 0.0, 0.0, k_max, False)
    for k, elt, log_scale in _dyadic_trace(f, k_max, trunc_rel, keep_top, support_cap):
        k_reached = k
        if mode == "a":
            nrm = norm_p_omega(elt, weight, p)
        else:
            nrm = elt.norm2()
        if nrm <= 0:
            estimates.append(0.0)
            continue
        estimates.append(math.exp((math.log(nrm) + log_scale) / (2.0**k)))
        if mode == "b":
            cert = nrm - elt.eps
            corrected = (
                math.exp((math.log(cert) + log_scale) / (2.0**k)) if cert > 0 else 0.0
            )
    value = estimates[-1] if estimates else 0.0
    return SpectralRadiusReport(
        mode, k_max, estimates, value, corrected, k_reached, k_reached < k_max
    )


def spectral_radius_pair(
    f: AlgebraElement,
    k_max: int,
    weight: Weight,
    p: float,
    *,
    trunc_rel: float = 1e-15,
    keep_top="auto",
    support_cap: int = DEFAULT_SUPPORT_CAP,
) -> Tuple[SpectralRadiusReport, SpectralRadiusReport]:
    """Both spectral radius estimates from a single dyadic-power trace;
    the squarings dominate the cost, so comparing the two norms should not
    pay for them twice."""
    est_a: List[float] = []
    est_b: List[float] = []
    corrected: Optional[float] = None
    k_reached = -1
    if f.is_zero():
        zero = SpectralRadiusReport("a", k_max, [0.0], 0.0, 0.0, k_max, False)
        return zero, SpectralRadiusReport("b", k_max, [0.0], 0.0, 0.0, k_max, False)
    for k, elt, log_scale in _dyadic_trace(f, k_max, trunc_rel, keep_top, support_cap):
        k_reached = k
        scale = 2.0**k
        na = norm_p_omega(elt, weight, p)
        nb = elt.norm2()
        est_a.append(math.exp((math.log(na) + log_scale) / scale) if na > 0 else 0.0)
        est_b.append(math.exp((math.log(nb) + log_scale) / scale) if nb > 0 else 0.0)
        cert = nb - elt.eps
        corrected = math.exp((math.log(cert) + log_scale) / scale) if cert > 0 else 0.0
    flagged = k_reached < k_max
    rep_a = SpectralRadiusReport("a", k_max, est_a, est_a[-1] if est_a else 0.0,
                                 None, k_reached, flagged)
    rep_b = SpectralRadiusReport("b", k_max, est_b, est_b[-1] if est_b else 0.0,
                                 corrected, k_reached, flagged)
    return rep_a, rep_b
