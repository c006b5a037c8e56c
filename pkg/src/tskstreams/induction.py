"""Candidate rule extensions, consequent learning and Hoeffding-gated growth.

Two split criteria are supported:

* ``"vr"`` keeps one E-BST per feature for every rule and expands a rule
  when its best split clearly beats the runner-up on variance reduction;
* ``"er"`` keeps one adaptive split value per feature for every rule, trains
  the two candidate child consequents online, and expands the candidate
  whose alternative system has the lowest squared error over the stream.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .drift import Adwin
from .ebst import SplitResult, SplitTree
from .fuzzy import Rule, RuleSet, SplitStep, split_mf, split_widths
from .stats import RunningMoments

CRITERIA = ("vr", "er")
STRATEGIES = ("single", "all")


class ConfigError(ValueError):
    pass


@dataclass
class ExpansionConfig:
    """Learner settings. Keys of a JSON config file map one-to-one onto
    these fields."""

    delta: float = 0.01
    tau: float = 0.05
    eta: float = 0.01
    criterion: str = "vr"
    strategy: str = "all"
    grace_period: int = 200
    rho_factors: tuple = (0.05, 0.15)
    adwin_delta: float = 0.002
    drift_coverage: float = 0.1
    detect_drift: bool = True
    er_warmup: int = 30
    max_rules: int | None = None
    scaled_targets: bool = False

    def __post_init__(self):
        self.rho_factors = tuple(float(k) for k in self.rho_factors)
        if not 0.0 < self.delta < 1.0:
            raise ConfigError("delta must lie in (0, 1)")
        if not self.tau > 0.0:
            raise ConfigError("tau must be positive")
        if not self.eta > 0.0:
            raise ConfigError("eta must be positive")
        if self.criterion not in CRITERIA:
            raise ConfigError(f"criterion must be one of {CRITERIA}")
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"strategy must be one of {STRATEGIES}")
        if int(self.grace_period) != self.grace_period or self.grace_period < 1:
            raise ConfigError("grace_period must be a positive integer")
        if len(self.rho_factors) != 2 or not 0.0 < self.rho_factors[0] < self.rho_factors[1]:
            raise ConfigError("rho_factors must satisfy 0 < k1 < k2")
        if not 0.0 < self.adwin_delta < 1.0:
            raise ConfigError("adwin_delta must lie in (0, 1)")
        if not 0.0 <= self.drift_coverage <= 1.0:
            raise ConfigError("drift_coverage must lie in [0, 1]")
        if self.er_warmup < 1:
            raise ConfigError("er_warmup must be at least 1")
        if self.max_rules is not None and self.max_rules < 1:
            raise ConfigError("max_rules must be at least 1")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["rho_factors"] = list(self.rho_factors)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExpansionConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def hoeffding_epsilon(delta: float, n: int, value_range: float = 1.0) -> float:
    if n <= 0:
        return math.inf
    return math.sqrt(math.log(1.0 / delta) * value_range * value_range / (2.0 * n))


def complexity_penalty(d: int, n_rules: int) -> float:
    return math.sqrt(n_rules) / (d * d)


def shift_split_value(q: float, m1: float, m2: float, err1: float, err2: float,
                      eta: float, psi: float) -> float:
    """Move the split value away from an inconsistent winner.

    The shift happens only when the child covering the example more also
    errs more (or covers less and errs less).
    """
    if (m1 > m2 and err1 > err2) or (m1 < m2 and err1 < err2):
        return q - eta * psi * (err1 - err2)
    return q


def split_widths_for(moments: RunningMoments, j: int, q: float, cfg: ExpansionConfig) -> tuple[float, float]:
    k1, k2 = cfg.rho_factors
    sigma = float(moments.std[j]) if moments.n > 1 else 0.0
    if sigma > 0.0:
        return k1 * sigma, k2 * sigma
    floor = 1e-6 * max(1.0, abs(q))
    return floor, floor * k2 / k1


def _placement_bounds(rule: Rule, moments: RunningMoments, j: int) -> tuple[float, float, float, float]:
    lo, hi = rule.antecedents[j].core
    seen_lo, seen_hi = float(moments.min[j]), float(moments.max[j])
    return lo, hi, max(lo, seen_lo), min(hi, seen_hi)


def place_split(rule: Rule, moments: RunningMoments, j: int, q: float, cfg: ExpansionConfig):
    """Clamp ``q`` into the splittable part of feature ``j`` and build the
    two child fuzzy sets.

    Returns ``(q, rho1, rho2, lower, upper)`` with the widths actually used,
    or ``None`` when the rule's observed values leave no room for a split.
    """
    lo, hi, a, b = _placement_bounds(rule, moments, j)
    if not (a < b) or not math.isfinite(a) or not math.isfinite(b):
        return None
    margin = 1e-9 * (b - a)
    q = min(max(q, a + margin), b - margin)
    if not lo < q < hi:
        return None
    rho1, rho2 = split_widths_for(moments, j, q, cfg)
    rho1, rho2 = split_widths(rule.antecedents[j], q, rho1, rho2)
    lower, upper = split_mf(rule.antecedents[j], q, rho1, rho2)
    return q, rho1, rho2, lower, upper


class ERCandidates:
    """Error-reduction candidate extensions of one rule, one per feature.

    The error bookkeeping is relative: ``sse_delta[j]`` accumulates, over
    examples covered by the rule, the squared error of the alternative
    system minus that of the current one. Outside the rule's support both
    systems predict alike, so the alternative's total SSE is the current
    system's SSE since ``sse_mark`` plus ``sse_delta``.
    """

    def __init__(self, rule: Rule, moments: RunningMoments, cfg: ExpansionConfig,
                 sse_mark: float = 0.0, n_mark: int = 0):
        d = rule.dimension
        self.d = d
        self.q = np.zeros(d)
        self.rho = np.zeros((d, 2))
        self.valid = np.zeros(d, dtype=bool)
        self.lower = [None] * d
        self.upper = [None] * d
        self.omega1 = np.tile(rule.consequent, (d, 1))
        self.omega2 = np.tile(rule.consequent, (d, 1))
        self.reset_accounting(sse_mark, n_mark)
        for j in range(d):
            self.place(rule, moments, j, float(moments.mean[j]), cfg)

    def reset_accounting(self, sse_mark: float, n_mark: int) -> None:
        self.sse_delta = np.zeros(self.d)
        self.wsse = np.zeros((self.d, 2))
        self.sse_mark = sse_mark
        self.n_mark = n_mark

    def place(self, rule, moments, j, q, cfg) -> None:
        placed = place_split(rule, moments, j, q, cfg)
        if placed is None:
            self.valid[j] = False
            self.lower[j] = self.upper[j] = None
            return
        self.q[j], self.rho[j, 0], self.rho[j, 1], self.lower[j], self.upper[j] = placed
        self.valid[j] = True

    def child_memberships(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        m1 = np.zeros(self.d)
        m2 = np.zeros(self.d)
        for j in np.flatnonzero(self.valid):
            m1[j] = self.lower[j](z[j])
            m2[j] = self.upper[j](z[j])
        return m1, m2

    def children(self, rule: Rule, j: int) -> tuple[Rule, Rule]:
        """The two candidate child rules for feature ``j`` (detached copies)."""
        if not self.valid[j]:
            raise ValueError(f"feature {j} has no valid candidate")
        out = []
        for mf, omega in ((self.lower[j], self.omega1[j]), (self.upper[j], self.omega2[j])):
            ants = list(rule.antecedents)
            ants[j] = mf
            out.append(Rule(-1, tuple(ants), omega.copy(), rule.path))
        return out[0], out[1]


def gen_update_er_candidates(rule: Rule, candidates: ERCandidates | None, z: np.ndarray, y: float,
                             psi: float, cfg: ExpansionConfig, moments: RunningMoments,
                             sse_mark: float = 0.0, n_mark: int = 0) -> ERCandidates:
    """Create the candidate set on first use, otherwise adapt every split value.

    Child consequents are not touched here; the caller follows up with
    :func:`update_consequents`.
    """
    if candidates is None:
        return ERCandidates(rule, moments, cfg, sse_mark, n_mark)
    zt = np.concatenate(([1.0], z))
    err1 = (candidates.omega1 @ zt - y) ** 2
    err2 = (candidates.omega2 @ zt - y) ** 2
    m1, m2 = candidates.child_memberships(z)
    for j in np.flatnonzero(candidates.valid):
        q = candidates.q[j]
        q_new = shift_split_value(q, m1[j], m2[j], err1[j], err2[j], cfg.eta, psi)
        if q_new != q:
            candidates.place(rule, moments, j, q_new, cfg)
    return candidates


def _min_excluding(degrees: np.ndarray) -> np.ndarray:
    # out[j] = min over k != j of degrees[k]
    d = degrees.shape[0]
    if d == 1:
        return np.ones(1)
    i = int(np.argmin(degrees))
    first = degrees[i]
    rest = np.delete(degrees, i)
    out = np.full(d, first)
    out[i] = rest.min()
    return out


def update_consequents(rule: Rule, mu: float, z: np.ndarray, y: float, m1: float, m2: float,
                       eta: float, candidates: ERCandidates | None = None,
                       degrees: np.ndarray | None = None, y_hat: float | None = None,
                       rule_output: float | None = None) -> None:
    """One gradient step on the rule's consequent and on its candidates'.

    ``m1`` and ``m2`` are the system-wide sums of activations and of
    activation-weighted rule outputs for this example, computed before any
    update.
    """
    if mu <= 0.0:
        return
    zt = np.concatenate(([1.0], z))
    l_i = rule.output(z) if rule_output is None else rule_output
    if candidates is not None and candidates.valid.any():
        if degrees is None:
            degrees = rule.degrees(z)
        others = _min_excluding(degrees)
        c1, c2 = candidates.child_memberships(z)
        mu1 = np.minimum(others, c1)
        mu2 = np.minimum(others, c2)
        l1 = candidates.omega1 @ zt
        l2 = candidates.omega2 @ zt
        m1p = m1 - mu + mu1 + mu2
        m2p = m2 - mu * l_i + mu1 * l1 + mu2 * l2
        ok = candidates.valid & (m1p > 0.0)
        safe = np.where(ok, m1p, 1.0)
        alt = np.where(ok, m2p / safe, 0.0)
        resid = np.where(ok, y - alt, 0.0)
        candidates.omega1 += (eta * resid * mu1 / safe)[:, None] * zt
        candidates.omega2 += (eta * resid * mu2 / safe)[:, None] * zt
        base = m2 / m1 if y_hat is None else y_hat
        gain = np.where(ok, (y - alt) ** 2 - (y - base) ** 2, 0.0)
        candidates.sse_delta += gain
        candidates.wsse[:, 0] += np.where(ok, mu1 * (l1 - y) ** 2, 0.0)
        candidates.wsse[:, 1] += np.where(ok, mu2 * (l2 - y) ** 2, 0.0)
    if m1 > 0.0:
        rule.consequent += eta * (y - m2 / m1) * (mu / m1) * zt


@dataclass
class RuleStats:
    """Learning state attached to one live rule."""

    moments: RunningMoments
    detector: Adwin
    trees: list | None = None
    er: ERCandidates | None = None
    n: int = 0

    @classmethod
    def fresh(cls, d: int, cfg: ExpansionConfig) -> "RuleStats":
        trees = [SplitTree(cfg.scaled_targets) for _ in range(d)] if cfg.criterion == "vr" else None
        return cls(RunningMoments(d), Adwin(cfg.adwin_delta), trees)

    def reset_candidates(self, d: int, cfg: ExpansionConfig) -> None:
        self.moments = RunningMoments(d)
        self.trees = [SplitTree(cfg.scaled_targets) for _ in range(d)] if cfg.criterion == "vr" else None
        self.er = None
        self.n = 0


@dataclass(frozen=True)
class Expansion:
    parent_id: int
    feature: int
    q: float
    added: tuple
    removed: bool


def expand_rule(rs: RuleSet, stats: dict, cfg: ExpansionConfig, parent_id: int, j: int, q: float,
                rho1: float, rho2: float, lower, upper, omegas, keep: int | None = None) -> Expansion | None:
    """Replace ``parent_id`` by its children (``keep=None``) or add the single
    child ``keep`` (0 lower, 1 upper), retaining the parent only when it is
    the default rule."""
    parent = rs[parent_id]
    removes_parent = keep is None or parent_id != rs.default_id
    n_added = 2 if keep is None else 1
    if cfg.max_rules is not None and len(rs) + n_added - int(removes_parent) > cfg.max_rules:
        return None
    split_id = rs.new_split_id()
    sides = (0, 1) if keep is None else (keep,)
    mfs = (lower, upper)
    created = []
    for side in sides:
        ants = list(parent.antecedents)
        ants[j] = mfs[side]
        child = rs.new_rule(ants, np.array(omegas[side], dtype=float))
        created.append((side, child))
    ids = {side: child.rule_id for side, child in created}
    for side, child in created:
        child.path = parent.path + (
            SplitStep(split_id, j, q, rho1, rho2, side, parent_id, ids.get(1 - side)),)
        stats[child.rule_id] = RuleStats.fresh(rs.dimension, cfg)
    if removes_parent:
        rs.remove(parent_id)
        del stats[parent_id]
        if parent_id == rs.default_id:
            rs.default_id = None
    else:
        stats[parent_id].reset_candidates(rs.dimension, cfg)
    return Expansion(parent_id, j, q, tuple(c.rule_id for _, c in created), removes_parent)


def _vr_cut_point(res: SplitResult) -> float:
    if math.isfinite(res.next_key):
        return (res.q + res.next_key) / 2.0
    return res.q


def vr_candidates(rule: Rule, rstats: RuleStats, cfg: ExpansionConfig, scaling=None) -> list:
    """Per-feature best splits, sorted by decreasing variance reduction.

    Each entry is ``(reduction, feature, SplitResult, placement)``; features
    whose best threshold cannot be turned into a valid fuzzy split are left
    out. When the trees are keyed on raw feature values, ``scaling`` is the
    ``(mean, std)`` pair mapping raw values onto the standardized axis the
    antecedents live on.
    """
    out = []
    for j, tree in enumerate(rstats.trees):
        lo, hi = rule.antecedents[j].core
        if scaling is not None:
            mean, std = float(scaling[0][j]), float(scaling[1][j])
            lo, hi = lo * std + mean, hi * std + mean
        res = tree.best_split((lo, hi))
        if res is None:
            continue
        cut = _vr_cut_point(res)
        if scaling is not None:
            cut = (cut - mean) / std
        placed = place_split(rule, rstats.moments, j, cut, cfg)
        if placed is None:
            continue
        out.append((res.variance_reduction, j, res, placed))
    out.sort(key=lambda item: (-item[0], item[1]))
    return out


def vr_decision(best: float, second: float, eps: float, tau: float) -> bool:
    if best <= 0.0:
        return False
    ratio = max(second, 0.0) / best
    return ratio + eps < 1.0 or eps < tau


def try_expand_vr(rs: RuleSet, stats: dict, cfg: ExpansionConfig, rule_id: int,
                  scaling=None) -> Expansion | None:
    """Variance-reduction expansion check for one rule (see :func:`vr_candidates`
    for ``scaling``)."""
    rstats = stats[rule_id]
    if rstats.n < cfg.grace_period:
        return None
    rule = rs[rule_id]
    cands = vr_candidates(rule, rstats, cfg, scaling)
    if len(cands) < 2:
        return None
    (best, j, res, placed), (second, *_rest) = cands[0], cands[1]
    eps = hoeffding_epsilon(cfg.delta, rstats.n) + complexity_penalty(rs.dimension, len(rs))
    if not vr_decision(best, second, eps, cfg.tau):
        return None
    q, rho1, rho2, lower, upper = placed
    keep = None
    if cfg.strategy == "single":
        keep = 0 if res.left_reduction >= res.right_reduction else 1
    omega = rule.consequent.copy()
    return expand_rule(rs, stats, cfg, rule_id, j, q, rho1, rho2, lower, upper, (omega, omega), keep)


def er_decision(sse_best: float, sse_second: float, sse_current: float, eps: float, tau: float) -> bool:
    if sse_current <= 0.0 or sse_second <= 0.0:
        return False
    y_bar = sse_best / sse_current
    x_bar = sse_best / sse_second
    return (y_bar + eps) < 1.0 and ((x_bar + eps) < 1.0 or eps < tau)


def try_expand_er(rs: RuleSet, stats: dict, cfg: ExpansionConfig, sse_total: float, n_total: int,
                  n_since_change: int) -> Expansion | None:
    """Error-reduction expansion check over every candidate of every rule.

    ``sse_total`` and ``n_total`` are the running squared-error sum and
    example count of the current system; ``n_since_change`` counts examples
    since the last structural change.
    """
    if n_since_change < cfg.grace_period:
        return None
    ranked = []
    for rule_id, rstats in stats.items():
        er = rstats.er
        if er is None or n_total - er.n_mark < cfg.grace_period:
            continue
        base = sse_total - er.sse_mark
        if base <= 0.0:
            continue
        for j in np.flatnonzero(er.valid):
            alt = base + er.sse_delta[j]
            ranked.append((alt / base, rule_id, int(j), alt, base))
    if len(ranked) < 2:
        return None
    ranked.sort(key=lambda item: (item[0], item[1], item[2]))
    best, second = ranked[0], ranked[1]
    eps = hoeffding_epsilon(cfg.delta, n_since_change) + complexity_penalty(rs.dimension, len(rs))
    # relative errors make candidates created at different times comparable;
    # with a shared window they equal the plain SSE ratios
    if not er_decision(best[0], second[0], 1.0, eps, cfg.tau):
        return None
    _, rule_id, j, _, _ = best
    er = stats[rule_id].er
    keep = None
    if cfg.strategy == "single":
        keep = 0 if er.wsse[j, 0] <= er.wsse[j, 1] else 1
    return expand_rule(rs, stats, cfg, rule_id, j, float(er.q[j]), float(er.rho[j, 0]),
                       float(er.rho[j, 1]), er.lower[j], er.upper[j],
                       (er.omega1[j].copy(), er.omega2[j].copy()), keep)
