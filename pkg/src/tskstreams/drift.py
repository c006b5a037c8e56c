"""Per-rule change detection and rule retraction."""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .fuzzy import RuleSet, replay_path

logger = logging.getLogger(__name__)


class Adwin:
    """ADWIN change detector over an exponential histogram of buckets.

    Row ``i`` holds at most ``max_buckets`` buckets of ``2**i`` values each.
    Cuts are examined every ``clock`` insertions; on a significant
    difference between the mean of an older and a newer sub-window the
    older part is dropped.
    """

    def __init__(self, delta: float = 0.002, max_buckets: int = 5, clock: int = 32,
                 min_window: int = 10, min_subwindow: int = 5):
        if not 0.0 < delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        self.delta = delta
        self.max_buckets = max_buckets
        self.clock = clock
        self.min_window = min_window
        self.min_subwindow = min_subwindow
        self.reset()

    def reset(self) -> None:
        # each row: deque of [sum, variance_sum]; newest on the right
        self.rows: list[deque] = [deque()]
        self.width = 0
        self.total = 0.0
        self.variance = 0.0
        self.ticks = 0
        self.last_mean_before = math.nan

    @property
    def mean(self) -> float:
        return self.total / self.width if self.width else 0.0

    @property
    def n_buckets(self) -> int:
        return sum(len(r) for r in self.rows)

    def bucket_widths(self):
        for i, row in enumerate(self.rows):
            for _ in row:
                yield 2 ** i

    def add(self, value: float) -> bool:
        """Insert ``value``; returns True when the window was cut."""
        if self.width > 0:
            mean = self.total / self.width
            self.variance += self.width * (value - mean) ** 2 / (self.width + 1)
        self.width += 1
        self.total += value
        self.rows[0].append([value, 0.0])
        self._compress()
        self.ticks += 1
        if self.ticks % self.clock or self.width < self.min_window:
            return False
        self.last_mean_before = self.mean
        return self._shrink()

    def _compress(self) -> None:
        i = 0
        while i < len(self.rows) and len(self.rows[i]) > self.max_buckets:
            row = self.rows[i]
            n = 2 ** i
            s1, v1 = row.popleft()
            s2, v2 = row.popleft()
            mu1, mu2 = s1 / n, s2 / n
            merged = [s1 + s2, v1 + v2 + n * n * (mu1 - mu2) ** 2 / (2 * n)]
            if i + 1 == len(self.rows):
                self.rows.append(deque())
            self.rows[i + 1].append(merged)
            i += 1

    def _cut_found(self) -> bool:
        if self.width < self.min_window:
            return False
        v = self.variance / self.width
        dd = math.log(2.0 * math.log(self.width) / self.delta)
        n0 = 0
        s0 = 0.0
        # oldest buckets sit at the left end of the highest rows
        for i in range(len(self.rows) - 1, -1, -1):
            size = 2 ** i
            for s, _ in self.rows[i]:
                n0 += size
                s0 += s
                n1 = self.width - n0
                if n1 < self.min_subwindow:
                    return False
                if n0 < self.min_subwindow:
                    continue
                mu0 = s0 / n0
                mu1 = (self.total - s0) / n1
                m_inv = 1.0 / n0 + 1.0 / n1
                eps = math.sqrt(2.0 * m_inv * v * dd) + 2.0 / 3.0 * dd * m_inv
                if abs(mu0 - mu1) > eps:
                    return True
        return False

    def _drop_oldest(self) -> None:
        i = len(self.rows) - 1
        while not self.rows[i]:
            i -= 1
        n1 = 2 ** i
        s1, v1 = self.rows[i].popleft()
        mu1 = s1 / n1
        self.width -= n1
        self.total -= s1
        if self.width > 0:
            self.variance -= v1 + n1 * self.width * (mu1 - self.total / self.width) ** 2 / (n1 + self.width)
            self.variance = max(self.variance, 0.0)
        else:
            self.variance = 0.0
        while len(self.rows) > 1 and not self.rows[-1]:
            self.rows.pop()

    def _shrink(self) -> bool:
        changed = False
        while self._cut_found():
            self._drop_oldest()
            changed = True
        return changed


def adwin_add(detector: Adwin, value: float) -> bool:
    return detector.add(value)


class ErrorScale:
    """Running high quantile of absolute errors, used to map errors into
    ``[0, 1]`` for the detectors."""

    def __init__(self, quantile: float = 0.99, size: int = 2000, refresh: int = 50):
        self.quantile = quantile
        self.buffer = deque(maxlen=size)
        self.refresh = refresh
        self.scale = 0.0
        self._since = 0

    def update(self, error: float) -> None:
        self.buffer.append(error)
        self._since += 1
        if self._since >= self.refresh or len(self.buffer) < self.refresh:
            self._since = 0
            self.scale = float(np.quantile(np.fromiter(self.buffer, float), self.quantile))

    def normalize(self, error: float) -> float:
        if self.scale <= 0.0:
            return 0.0 if error <= 0.0 else 1.0
        return min(error / self.scale, 1.0)


@dataclass(frozen=True)
class DriftEvent:
    index: int
    rule_id: int
    action: str  # "removed", "merged" or "reset"

    def to_dict(self) -> dict:
        return {"index": self.index, "rule_id": self.rule_id, "action": self.action}


def retract_rule(rs: RuleSet, rule_id: int, strategy: str) -> tuple[str, list[int]]:
    """Take a drifting rule out of the system.

    With the single-extension strategy the rule is simply dropped. With the
    all-extensions strategy its sibling group absorbs the vacated region:
    the split that created the rule is removed from every sibling's path and
    their antecedents are rebuilt, which widens the immediate sibling back
    to the parent's fuzzy set and widens deeper descendants alike.

    Returns the action taken and the ids of rules whose antecedents changed.
    The default rule (or a lone root rule) is never removed; the action is
    then ``"reset"``.
    """
    rule = rs[rule_id]
    if rule_id == rs.default_id or len(rs) == 1 or not rule.path:
        return "reset", []
    if strategy == "single":
        rs.remove(rule_id)
        return "removed", []
    k = len(rule.path) - 1
    split = rule.path[k]
    group = [r for r in rs if r.rule_id != rule_id and len(r.path) > k
             and r.path[k].split_id == split.split_id]
    if not group:
        logger.warning("sibling of rule %d not found; removing it outright", rule_id)
        rs.remove(rule_id)
        return "removed", []
    rs.remove(rule_id)
    for r in group:
        r.path = r.path[:k] + r.path[k + 1:]
        r.set_antecedents(replay_path(rs.dimension, r.path))
    return "merged", [r.rule_id for r in group]
