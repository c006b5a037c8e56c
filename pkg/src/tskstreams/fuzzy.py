"""Membership functions, TSK rules and the weighted rule-set predictor.

Membership functions are immutable values. A :class:`Rule` owns its
antecedents (one membership function per feature) and a mutable consequent
vector; :class:`RuleSet` holds the live rules plus the split lineage that
lets sibling rules be merged back together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class Uncovered(ArithmeticError):
    """No rule fires for the given input."""


class NotSiblings(ValueError):
    """Two membership functions are not the outputs of a single split."""


# --------------------------------------------------------------------------
# membership functions


def _rise(x: float, a: float, b: float) -> float:
    # S-shaped 0 -> 1 transition on [a, b]
    if x < a:
        return 0.0
    if x >= b:
        return 1.0
    mid = (a + b) / 2.0
    if x < mid:
        return 2.0 * ((x - a) / (b - a)) ** 2
    return 1.0 - 2.0 * ((x - b) / (b - a)) ** 2


def _fall(x: float, c: float, d: float) -> float:
    # S-shaped 1 -> 0 transition on [c, d]
    if x <= c:
        return 1.0
    if x > d:
        return 0.0
    mid = (c + d) / 2.0
    if x <= mid:
        return 1.0 - 2.0 * ((c - x) / (d - c)) ** 2
    return 2.0 * ((d - x) / (d - c)) ** 2


@dataclass(frozen=True)
class Void:
    """The empty constraint; every value is a full member."""

    variant = "void"

    def __call__(self, x: float) -> float:
        return 1.0

    @property
    def params(self) -> tuple:
        return ()

    @property
    def core(self) -> tuple[float, float]:
        return (-math.inf, math.inf)


@dataclass(frozen=True)
class SShaped:
    """Bounded fuzzy interval with support ``[a, d]`` and core ``[b, c]``."""

    a: float
    b: float
    c: float
    d: float
    variant = "sshaped"

    def __post_init__(self):
        if not (self.a <= self.b <= self.c <= self.d):
            raise ValueError(f"SShaped requires a <= b <= c <= d, got {self.params}")

    def __call__(self, x: float) -> float:
        if self.b <= x <= self.c:
            return 1.0
        if x < self.b:
            return _rise(x, self.a, self.b)
        return _fall(x, self.c, self.d)

    @property
    def params(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    @property
    def core(self) -> tuple[float, float]:
        return (self.b, self.c)


@dataclass(frozen=True)
class LeftUnbounded:
    """Full membership below ``a``, falling to zero at ``b``."""

    a: float
    b: float
    variant = "left"

    def __post_init__(self):
        if not self.a <= self.b:
            raise ValueError(f"LeftUnbounded requires a <= b, got {self.params}")

    def __call__(self, x: float) -> float:
        return _fall(x, self.a, self.b)

    @property
    def params(self) -> tuple:
        return (self.a, self.b)

    @property
    def core(self) -> tuple[float, float]:
        return (-math.inf, self.a)


@dataclass(frozen=True)
class RightUnbounded:
    """Zero membership below ``a``, rising to full membership at ``b``."""

    a: float
    b: float
    variant = "right"

    def __post_init__(self):
        if not self.a <= self.b:
            raise ValueError(f"RightUnbounded requires a <= b, got {self.params}")

    def __call__(self, x: float) -> float:
        return _rise(x, self.a, self.b)

    @property
    def params(self) -> tuple:
        return (self.a, self.b)

    @property
    def core(self) -> tuple[float, float]:
        return (self.b, math.inf)


MembershipFunction = Void | SShaped | LeftUnbounded | RightUnbounded

VOID = Void()

_VARIANTS = {cls.variant: cls for cls in (Void, SShaped, LeftUnbounded, RightUnbounded)}


def eval_mf(mf: MembershipFunction, x: float) -> float:
    return mf(x)


def mf_to_dict(mf: MembershipFunction) -> dict:
    return {"variant": mf.variant, "params": list(mf.params)}


def mf_from_dict(data: dict) -> MembershipFunction:
    try:
        cls = _VARIANTS[data["variant"]]
    except KeyError:
        raise ValueError(f"unknown membership variant {data.get('variant')!r}") from None
    return cls(*data.get("params", ()))


def splittable_region(mf: MembershipFunction) -> tuple[float, float]:
    """Open interval of split values accepted by :func:`split_mf`.

    This is the core of the fuzzy set, so both children keep a non-empty
    core of their own.
    """
    return mf.core


def split_widths(mf: MembershipFunction, q: float, rho1: float, rho2: float) -> tuple[float, float]:
    """Overlap widths actually used when splitting ``mf`` at ``q``.

    When the overlap ``[q - rho2, q + rho2]`` would reach past the parent's
    core, both widths are shrunk by the same factor so that it fits.

    Raises
    ------
    ValueError
        If ``0 < rho1 < rho2`` does not hold or ``q`` is not strictly
        inside the parent's core.
    """
    if not (0.0 < rho1 < rho2) or not (math.isfinite(rho1) and math.isfinite(rho2)):
        raise ValueError(f"split widths must satisfy 0 < rho1 < rho2, got {rho1}, {rho2}")
    lo, hi = splittable_region(mf)
    if not (lo < q < hi) or not math.isfinite(q):
        raise ValueError(f"split value {q} outside splittable region ({lo}, {hi})")
    scale = min(1.0, (q - lo) / rho2, (hi - q) / rho2)
    if scale < 1.0:
        return rho1 * scale, rho2 * scale
    return rho1, rho2


def split_mf(mf: MembershipFunction, q: float, rho1: float, rho2: float):
    """Bisect ``mf`` at ``q`` into a ``(lower, upper)`` pair of fuzzy sets.

    The children overlap on ``[q - rho2, q + rho2]``; see
    :func:`split_widths` for how the widths are fitted to the parent.
    """
    rho1, rho2 = split_widths(mf, q, rho1, rho2)
    if isinstance(mf, Void):
        return LeftUnbounded(q + rho1, q + rho2), RightUnbounded(q - rho2, q - rho1)
    if isinstance(mf, LeftUnbounded):
        return LeftUnbounded(q + rho1, q + rho2), SShaped(q - rho2, q - rho1, mf.a, mf.b)
    if isinstance(mf, RightUnbounded):
        return SShaped(mf.a, mf.b, q + rho1, q + rho2), RightUnbounded(q - rho2, q - rho1)
    return SShaped(mf.a, mf.b, q + rho1, q + rho2), SShaped(q - rho2, q - rho1, mf.c, mf.d)


def _split_point(lower_ramp: tuple[float, float], upper_ramp: tuple[float, float]) -> float | None:
    # lower child falls on (q+r1, q+r2), upper child rises on (q-r2, q-r1)
    (l1, l2), (u1, u2) = lower_ramp, upper_ramp
    if not (u1 < u2 <= l1 < l2):
        return None
    scale = max(1.0, abs(l1), abs(l2), abs(u1), abs(u2))
    if abs((l1 + u2) - (l2 + u1)) > 1e-9 * scale:
        return None
    return (l1 + u2) / 2.0


def union_mf(p: MembershipFunction, q: MembershipFunction) -> MembershipFunction:
    """Merge two sibling fuzzy sets back into the parent they were split from.

    Either argument order is accepted.
    """
    for lower, upper in ((p, q), (q, p)):
        if isinstance(lower, LeftUnbounded):
            ramp = (lower.a, lower.b)
        elif isinstance(lower, SShaped):
            ramp = (lower.c, lower.d)
        else:
            continue
        if not isinstance(upper, (RightUnbounded, SShaped)):
            continue
        split_at = _split_point(ramp, (upper.a, upper.b))
        if split_at is None:
            continue
        try:
            if isinstance(lower, LeftUnbounded) and isinstance(upper, RightUnbounded):
                parent = VOID
            elif isinstance(lower, LeftUnbounded):
                parent = LeftUnbounded(upper.c, upper.d)
            elif isinstance(upper, RightUnbounded):
                parent = RightUnbounded(lower.a, lower.b)
            else:
                parent = SShaped(lower.a, lower.b, upper.c, upper.d)
        except ValueError:
            continue
        lo, hi = parent.core
        # a genuine split keeps the whole overlap inside the parent's core
        tol = 1e-9 * max(1.0, abs(ramp[1]), abs(upper.a))
        if lo < split_at < hi and lo - tol <= upper.a and ramp[1] <= hi + tol:
            return parent
    raise NotSiblings(f"{p!r} and {q!r} are not the two halves of one split")


# --------------------------------------------------------------------------
# rules


@dataclass(frozen=True)
class SplitStep:
    """One split on a rule's path from the default rule.

    ``side`` is 0 for the lower child and 1 for the upper child.
    """

    split_id: int
    feature: int
    q: float
    rho1: float
    rho2: float
    side: int
    parent_id: int
    sibling_id: int | None = None


@dataclass
class Rule:
    rule_id: int
    antecedents: tuple
    consequent: np.ndarray
    path: tuple = ()
    covered: int = 0

    def __post_init__(self):
        self.antecedents = tuple(self.antecedents)
        self.consequent = np.asarray(self.consequent, dtype=float)
        if self.consequent.shape != (len(self.antecedents) + 1,):
            raise ValueError("consequent must have one more entry than there are antecedents")
        self._refresh()

    def _refresh(self):
        self.active = [j for j, mf in enumerate(self.antecedents) if not isinstance(mf, Void)]

    def set_antecedents(self, antecedents: Sequence[MembershipFunction]) -> None:
        self.antecedents = tuple(antecedents)
        self._refresh()

    @property
    def dimension(self) -> int:
        return len(self.antecedents)

    @property
    def lineage(self) -> tuple[int, int | None, int] | None:
        """``(parent_id, sibling_id, feature)`` of the most recent split."""
        if not self.path:
            return None
        step = self.path[-1]
        return step.parent_id, step.sibling_id, step.feature

    def degrees(self, x: Sequence[float]) -> np.ndarray:
        out = np.ones(len(self.antecedents))
        for j in self.active:
            out[j] = self.antecedents[j](x[j])
        return out

    def activation(self, x: Sequence[float]) -> float:
        if len(x) != len(self.antecedents):
            raise ValueError(f"expected {len(self.antecedents)} features, got {len(x)}")
        mu = 1.0
        for j in self.active:
            m = self.antecedents[j](x[j])
            if m < mu:
                mu = m
                if mu == 0.0:
                    break
        return mu

    def output(self, x: Sequence[float]) -> float:
        return float(self.consequent[0] + np.dot(self.consequent[1:], x))

    def to_dict(self) -> dict:
        lineage = self.lineage
        return {
            "id": self.rule_id,
            "antecedents": [mf_to_dict(mf) for mf in self.antecedents],
            "consequent": [float(v) for v in self.consequent],
            "lineage": None
            if lineage is None
            else {"parent": lineage[0], "sibling": lineage[1], "feature": lineage[2]},
        }


def activation(rule: Rule, x: Sequence[float]) -> float:
    return rule.activation(x)


def replay_path(d: int, path: Iterable[SplitStep]) -> tuple:
    """Rebuild antecedents by applying ``path`` to an all-void premise."""
    ants = [VOID] * d
    for step in path:
        lower, upper = split_mf(ants[step.feature], step.q, step.rho1, step.rho2)
        ants[step.feature] = upper if step.side else lower
    return tuple(ants)


# --------------------------------------------------------------------------
# rule sets


@dataclass
class RuleSet:
    """The live TSK system.

    Starts as a single default rule with void antecedents and a zero
    consequent.
    """

    dimension: int
    rules: dict = field(default_factory=dict)
    default_id: int = 0
    _next_id: int = 0
    _next_split: int = 0

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be at least 1")
        if not self.rules:
            rule = self.new_rule([VOID] * self.dimension, np.zeros(self.dimension + 1))
            self.default_id = rule.rule_id

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules.values())

    def __getitem__(self, rule_id: int) -> Rule:
        return self.rules[rule_id]

    def __contains__(self, rule_id: int) -> bool:
        return rule_id in self.rules

    def new_rule(self, antecedents, consequent, path=()) -> Rule:
        rule = Rule(self._next_id, tuple(antecedents), np.array(consequent, dtype=float), tuple(path))
        self._next_id += 1
        self.rules[rule.rule_id] = rule
        return rule

    def new_split_id(self) -> int:
        self._next_split += 1
        return self._next_split

    def remove(self, rule_id: int) -> None:
        if len(self.rules) == 1:
            raise ValueError("a rule set must keep at least one rule")
        del self.rules[rule_id]

    def activations(self, x: Sequence[float]) -> np.ndarray:
        if len(x) != self.dimension:
            raise ValueError(f"expected {self.dimension} features, got {len(x)}")
        return np.array([r.activation(x) for r in self.rules.values()])

    def outputs(self, x: Sequence[float]) -> np.ndarray:
        return np.array([r.output(x) for r in self.rules.values()])

    def normalized_weights(self, x: Sequence[float]) -> np.ndarray:
        mu = self.activations(x)
        total = mu.sum()
        if total <= 0.0:
            raise Uncovered("no rule covers the input")
        return mu / total

    def predict(self, x: Sequence[float]) -> float:
        psi = self.normalized_weights(x)
        return float(np.dot(psi, self.outputs(x)))

    def predict_total(self, x: Sequence[float]) -> float:
        """Like :meth:`predict`, but falls back to the plain mean of all rule
        outputs when no rule fires."""
        try:
            return self.predict(x)
        except Uncovered:
            return float(self.outputs(x).mean())

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "default_rule_id": self.default_id,
            "rules": [r.to_dict() for r in self.rules.values()],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RuleSet":
        rs = cls.__new__(cls)
        rs.dimension = int(data["dimension"])
        rs.rules = {}
        default = data.get("default_rule_id")
        rs.default_id = None if default is None else int(default)
        rs._next_split = 0
        for item in data["rules"]:
            ants = [mf_from_dict(m) for m in item["antecedents"]]
            rule = Rule(int(item["id"]), tuple(ants), np.array(item["consequent"], dtype=float))
            rs.rules[rule.rule_id] = rule
        rs._next_id = max(rs.rules) + 1
        return rs


def normalized_weights(rs: RuleSet, x: Sequence[float]) -> np.ndarray:
    return rs.normalized_weights(x)


def predict(rs: RuleSet, x: Sequence[float]) -> float:
    return rs.predict(x)
