"""Discrete group models: canonical encodings, word metrics, balls, growth."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

GroupElement = Union[Tuple[int, ...], FrozenSet[int]]


class GroupError(ValueError):
    """Invalid element encoding or elements from mismatched group models."""


class RadiusCapError(RuntimeError):
    """Ball search exceeded the configured radius cap."""


class SizeCapError(RuntimeError):
    """Ball enumeration exceeded the configured element-count cap."""


@dataclass(frozen=True)
class EnumerationCaps:
    """Safety caps for ball enumeration (Heisenberg balls grow ~n^4)."""

    radius: int = 32
    elements: int = 5_000_000


def _sort_key(x: GroupElement):
    if isinstance(x, frozenset):
        return (len(x), tuple(sorted(x)))
    return x


class GroupModel:
    """Base class for a discrete group with a canonical element encoding.

    Subclasses implement the group law on plain hashable encodings and may
    override the word metric and shell counts with closed forms.  Models are
    immutable after construction apart from internal enumeration caches, so
    they are safe to share across threads.
    """

    family: str = "abstract"
    known_growth_order: Optional[int] = None

    def __init__(self, caps: EnumerationCaps | None = None) -> None:
        self.caps = caps or EnumerationCaps()
        self._shells: List[List[GroupElement]] = [[self.identity]]
        self._tau: Dict[GroupElement, int] = {self.identity: 0}

    # -- group law ----------------------------------------------------------

    @property
    def identity(self) -> GroupElement:
        raise NotImplementedError

    @property
    def generators(self) -> Optional[List[GroupElement]]:
        """Symmetric generating set, or None if not finitely generated."""
        return None

    def multiply(self, x: GroupElement, y: GroupElement) -> GroupElement:
        raise NotImplementedError

    def inverse(self, x: GroupElement) -> GroupElement:
        raise NotImplementedError

    def validate(self, x) -> GroupElement:
        """Return the canonical encoding of x, or raise GroupError."""
        raise NotImplementedError

    def signature(self) -> tuple:
        return (self.family,)

    def same_model(self, other: "GroupModel") -> bool:
        return self.signature() == other.signature()

    # -- word metric and balls ----------------------------------------------

    def _grow_shells(self, n: int) -> None:
        gens = self.generators
        if gens is None:
            raise GroupError(f"{self.family}: not finitely generated, no word metric")
        if n > self.caps.radius:
            raise RadiusCapError(
                f"radius {n} exceeds cap {self.caps.radius} on {self.family}"
            )
        count = sum(len(s) for s in self._shells)
        while len(self._shells) <= n:
            frontier = self._shells[-1]
            depth = len(self._shells)
            nxt: List[GroupElement] = []
            for x in frontier:
                for g in gens:
                    y = self.multiply(x, g)
                    if y not in self._tau:
                        self._tau[y] = depth
                        nxt.append(y)
            count += len(nxt)
            if count > self.caps.elements:
                raise SizeCapError(
                    f"ball({depth}) on {self.family} exceeds element cap "
                    f"{self.caps.elements}"
                )
            nxt.sort(key=_sort_key)
            self._shells.append(nxt)

    def word_length(self, x: GroupElement) -> int:
        """Smallest n with x a product of n generators; 0 iff x is the identity."""
        x = self.validate(x)
        tau = self._tau.get(x)
        if tau is not None:
            return tau
        for n in range(len(self._shells), self.caps.radius + 1):
            self._grow_shells(n)
            if x in self._tau:
                return self._tau[x]
        raise RadiusCapError(
            f"{x!r} not found within radius cap {self.caps.radius} on {self.family}"
        )

    def shells(self, n: int) -> List[List[GroupElement]]:
        """BFS layers 0..n: shells(n)[k] holds the elements of word length k."""
        self._grow_shells(n)
        return [list(s) for s in self._shells[: n + 1]]

    def ball(self, n: int) -> List[GroupElement]:
        """Elements of word length <= n, canonically ordered."""
        if n < 0:
            raise ValueError("ball radius must be nonnegative")
        layers = self.shells(n)
        out: List[GroupElement] = []
        for layer in layers:
            out.extend(layer)
        return out

    def shell_sizes(self, n_max: int) -> np.ndarray:
        """Shell counts |U^n \\ U^(n-1)| for n = 0..n_max."""
        layers = self.shells(n_max)
        return np.array([len(s) for s in layers], dtype=float)


class ZdModel(GroupModel):
    """The lattice Z^d with generating set {+-e_i}; word length is the l1 norm."""

    family = "Z"

    def __init__(self, dimension: int = 1, caps: EnumerationCaps | None = None) -> None:
        if dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {dimension}")
        self.dimension = int(dimension)
        self.known_growth_order = self.dimension
        self._generators = []
        for i in range(self.dimension):
            for sign in (1, -1):
                g = [0] * self.dimension
                g[i] = sign
                self._generators.append(tuple(g))
        super().__init__(caps)

    @property
    def identity(self) -> Tuple[int, ...]:
        return (0,) * self.dimension

    @property
    def generators(self) -> List[Tuple[int, ...]]:
        return list(self._generators)

    def signature(self) -> tuple:
        return (self.family, self.dimension)

    def validate(self, x) -> Tuple[int, ...]:
        try:
            t = tuple(int(v) for v in x)
        except TypeError:
            if self.dimension == 1 and isinstance(x, (int, np.integer)):
                return (int(x),)
            raise GroupError(f"expected a length-{self.dimension} integer tuple, got {x!r}")
        if len(t) != self.dimension:
            raise GroupError(f"expected a length-{self.dimension} integer tuple, got {x!r}")
        return t

    def multiply(self, x, y):
        x = self.validate(x)
        y = self.validate(y)
        return tuple(a + b for a, b in zip(x, y))

    def inverse(self, x):
        x = self.validate(x)
        return tuple(-a for a in x)

    def word_length(self, x) -> int:
        x = self.validate(x)
        return int(sum(abs(a) for a in x))

    def shell_sizes(self, n_max: int) -> np.ndarray:
        # |{x : |x|_1 = n}| = sum_k 2^k C(d,k) C(n-1,k-1), exact for all n.
        d = self.dimension
        out = np.zeros(n_max + 1, dtype=float)
        out[0] = 1.0
        for n in range(1, n_max + 1):
            total = 0
            for k in range(1, min(d, n) + 1):
                total += (2**k) * math.comb(d, k) * math.comb(n - 1, k - 1)
            out[n] = float(total)
        return out


class HeisenbergModel(GroupModel):
    """Discrete Heisenberg group: triples (a, b, c) under upper-triangular
    matrix multiplication, generated by the two standard generators and their
    inverses.  Growth order is 4."""

    family = "heisenberg"
    known_growth_order = 4

    def __init__(self, caps: EnumerationCaps | None = None) -> None:
        self._generators = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)]
        super().__init__(caps)

    @property
    def identity(self) -> Tuple[int, int, int]:
        return (0, 0, 0)

    @property
    def generators(self) -> List[Tuple[int, int, int]]:
        return list(self._generators)

    def validate(self, x) -> Tuple[int, int, int]:
        try:
            t = tuple(int(v) for v in x)
        except TypeError:
            raise GroupError(f"expected an integer triple, got {x!r}")
        if len(t) != 3:
            raise GroupError(f"expected an integer triple, got {x!r}")
        return t

    def multiply(self, x, y):
        a, b, c = self.validate(x)
        ap, bp, cp = self.validate(y)
        return (a + ap, b + bp, c + cp + a * bp)

    def inverse(self, x):
        a, b, c = self.validate(x)
        return (-a, -b, a * b - c)

    def word_length(self, x) -> int:
        # exact shortcut: the two lattice projections are 1-Lipschitz, so
        # tau >= |a|+|b|, attained by y^b x^a (c = 0) and x^a y^b (c = ab)
        a, b, c = self.validate(x)
        if c == 0 or c == a * b:
            return abs(a) + abs(b)
        return super().word_length((a, b, c))


class LocallyFiniteModel(GroupModel):
    """The locally finite group ⊕_i Z/2Z as the union of the nested chain
    G_0 = {e} ⊂ G_1 ⊂ G_2 ⊂ ..., |G_i| = 2^i, where G_i collects the elements
    supported on coordinates {0..i-1}.

    Elements are frozensets of coordinate indices; the product is the symmetric
    difference and every element is an involution.  There is no word metric:
    ``word_length`` returns the chain index min{i : x in G_i} (0 at the
    identity), which is the radial variable used by the chain weight.
    """

    family = "locally_finite"

    def __init__(self, caps: EnumerationCaps | None = None) -> None:
        super().__init__(caps)

    @property
    def identity(self) -> FrozenSet[int]:
        return frozenset()

    def validate(self, x) -> FrozenSet[int]:
        if isinstance(x, frozenset):
            s = x
        else:
            try:
                s = frozenset(int(v) for v in x)
            except TypeError:
                raise GroupError(f"expected a set of coordinate indices, got {x!r}")
        if any(v < 0 for v in s):
            raise GroupError(f"coordinate indices must be nonnegative, got {x!r}")
        return frozenset(int(v) for v in s)

    def multiply(self, x, y):
        return self.validate(x) ^ self.validate(y)

    def inverse(self, x):
        return self.validate(x)

    def word_length(self, x) -> int:
        x = self.validate(x)
        if not x:
            return 0
        return max(x) + 1

    def shells(self, n: int) -> List[List[FrozenSet[int]]]:
        if n > self.caps.radius:
            raise RadiusCapError(f"chain index {n} exceeds cap {self.caps.radius}")
        if 2**n > self.caps.elements:
            raise SizeCapError(f"|G_{n}| = 2^{n} exceeds element cap")
        layers: List[List[FrozenSet[int]]] = [[frozenset()]]
        for j in range(1, n + 1):
            layer = [
                frozenset(rest) | {j - 1}
                for m in range(j)
                for rest in itertools.combinations(range(j - 1), m)
            ]
            layer.sort(key=_sort_key)
            layers.append(layer)
        return layers

    def shell_sizes(self, n_max: int) -> np.ndarray:
        out = np.ones(n_max + 1, dtype=float)
        for j in range(1, n_max + 1):
            out[j] = 2.0 ** (j - 1)
        return out


@dataclass
class GrowthReport:
    """Shell counts and the fitted growth exponent of log|U^n| against log n."""

    family: str
    n_max: int
    shell_counts: List[int]
    ball_counts: List[int]
    fitted_exponent: float
    fit_window: Tuple[int, int]

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "n_max": self.n_max,
            "shell_counts": self.shell_counts,
            "ball_counts": self.ball_counts,
            "fitted_exponent": self.fitted_exponent,
            "fit_window": list(self.fit_window),
        }


def growth_report(model: GroupModel, n_max: int) -> GrowthReport:
    """BFS shell counts for n = 0..n_max and the least-squares slope of
    log|U^n| vs log n over the upper half of the range."""
    if n_max < 3:
        raise ValueError(f"n_max must be >= 3, got {n_max}")
    if model.generators is None:
        raise GroupError(f"{model.family}: growth report needs a generating set")
    layers = model.shells(n_max)
    shell_counts = [len(s) for s in layers]
    ball_counts = list(np.cumsum(shell_counts).astype(int))
    lo = max(1, math.ceil(n_max / 2))
    ns = np.arange(lo, n_max + 1, dtype=float)
    slope, _ = np.polyfit(np.log(ns), np.log([ball_counts[int(n)] for n in ns]), 1)
    return GrowthReport(
        family=model.family,
        n_max=n_max,
        shell_counts=shell_counts,
        ball_counts=ball_counts,
        fitted_exponent=float(slope),
        fit_window=(lo, n_max),
    )


def group_from_config(cfg: dict) -> GroupModel:
    """Build a model from a config mapping: {"family", "dimension", "caps"}."""
    if not isinstance(cfg, dict) or "family" not in cfg:
        raise GroupError(f"group config must be a mapping with a 'family' key: {cfg!r}")
    caps_cfg = cfg.get("caps") or {}
    caps = EnumerationCaps(
        radius=int(caps_cfg.get("radius", EnumerationCaps.radius)),
        elements=int(caps_cfg.get("elements", EnumerationCaps.elements)),
    )
    family = str(cfg["family"]).lower()
    if family in ("z", "zd", "lattice"):
        return ZdModel(int(cfg.get("dimension", 1)), caps)
    if family == "heisenberg":
        return HeisenbergModel(caps)
    if family in ("locally_finite", "locally-finite", "lf"):
        return LocallyFiniteModel(caps)
    raise GroupError(f"unknown group family {cfg['family']!r}")
