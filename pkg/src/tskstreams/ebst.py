"""Extended binary search tree (E-BST) over one attribute.

Each node holds one distinct attribute value together with the weighted
target statistics of every example inserted with that value, plus the
running totals of its left subtree. A single in-order pass then yields the
variance reduction of every candidate threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

MAX_KEYS = 10_000

# statistic slots: count, sum w, sum w*y, sum w*y^2, sum (w*y)^2
_N, _W, _WY, _WY2, _W2Y2 = range(5)


class _Node:
    __slots__ = ("key", "own", "left_stats", "left", "right")

    def __init__(self, key: float):
        self.key = key
        self.own = [0.0] * 5
        self.left_stats = [0.0] * 5
        self.left = None
        self.right = None


def _add(stats: list, w: float, y: float) -> None:
    wy = w * y
    stats[_N] += 1.0
    stats[_W] += w
    stats[_WY] += wy
    stats[_WY2] += wy * y
    stats[_W2Y2] += wy * wy


def weighted_variance(sw: float, swy: float, swy2: float) -> float:
    """Population variance of ``y`` with instance weights ``w``."""
    if sw <= 0.0:
        return 0.0
    mean = swy / sw
    return max(swy2 / sw - mean * mean, 0.0)


def scaled_variance(n: float, swy: float, sw2y2: float) -> float:
    """Population variance of the scaled values ``w * y``."""
    if n <= 0.0:
        return 0.0
    mean = swy / n
    return max(sw2y2 / n - mean * mean, 0.0)


@dataclass(frozen=True)
class SplitResult:
    """Best threshold found by :meth:`SplitTree.best_split`.

    Examples with key ``<= q`` fall on the left. ``next_key`` is the
    smallest stored key above ``q``, so any cut point in
    ``[q, next_key)`` separates the same two groups.
    """

    q: float
    variance_reduction: float
    left_weight: float
    right_weight: float
    next_key: float
    left_reduction: float = 0.0
    right_reduction: float = 0.0


class SplitTree:
    """Plain (unbalanced) E-BST with weighted target statistics.

    Parameters
    ----------
    scaled_targets : bool
        When true the variances are taken over the scaled values ``w * y``
        instead of over ``y`` weighted by ``w``.
    max_keys : int
        Distinct keys kept; further new keys are merged into the nearest
        stored one.
    """

    def __init__(self, scaled_targets: bool = False, max_keys: int = MAX_KEYS):
        self.root: _Node | None = None
        self.total = [0.0] * 5
        self.size = 0
        self.scaled_targets = scaled_targets
        self.max_keys = max_keys
        self.last_visits = 0

    def __len__(self) -> int:
        return self.size

    def insert(self, key: float, w: float, y: float) -> int:
        """Add one weighted example; returns the number of nodes visited."""
        if not (math.isfinite(key) and math.isfinite(w) and math.isfinite(y)):
            raise ValueError("E-BST inputs must be finite")
        if w <= 0.0:
            raise ValueError("E-BST weights must be positive")
        if self.root is None:
            self.root = _Node(key)
            self.size = 1
            _add(self.root.own, w, y)
            _add(self.total, w, y)
            self.last_visits = 1
            return 1
        if self.size >= self.max_keys:
            key = self._nearest(key)
        node = self.root
        visits = 0
        wy = w * y
        wy2 = wy * y
        w2y2 = wy * wy
        while True:
            visits += 1
            if key == node.key:
                _add(node.own, w, y)
                break
            if key < node.key:
                ls = node.left_stats
                ls[0] += 1.0
                ls[1] += w
                ls[2] += wy
                ls[3] += wy2
                ls[4] += w2y2
                if node.left is None:
                    node.left = _Node(key)
                    _add(node.left.own, w, y)
                    self.size += 1
                    visits += 1
                    break
                node = node.left
            else:
                if node.right is None:
                    node.right = _Node(key)
                    _add(node.right.own, w, y)
                    self.size += 1
                    visits += 1
                    break
                node = node.right
        _add(self.total, w, y)
        self.last_visits = visits
        return visits

    def _nearest(self, key: float) -> float:
        node = self.root
        below = above = None
        while node is not None:
            if key == node.key:
                return key
            if key < node.key:
                above = node.key
                node = node.left
            else:
                below = node.key
                node = node.right
        if below is None:
            return above
        if above is None:
            return below
        return below if key - below <= above - key else above

    def height(self) -> int:
        best = 0
        stack = [(self.root, 1)] if self.root is not None else []
        while stack:
            node, depth = stack.pop()
            best = max(best, depth)
            if node.left is not None:
                stack.append((node.left, depth + 1))
            if node.right is not None:
                stack.append((node.right, depth + 1))
        return best

    def items(self):
        """Yield ``(key, own_stats)`` in ascending key order."""
        stack = []
        node = self.root
        while stack or node is not None:
            while node is not None:
                stack.append(node)
                node = node.left
            node = stack.pop()
            yield node.key, tuple(node.own)
            node = node.right

    def keys(self) -> list[float]:
        return [k for k, _ in self.items()]

    def prefix_stats(self, threshold: float) -> tuple:
        """Totals over every inserted example with key ``<= threshold``.

        Uses the per-node left-subtree totals, so it costs one root-to-leaf
        walk.
        """
        acc = [0.0] * 5
        node = self.root
        while node is not None:
            if threshold < node.key:
                node = node.left
            else:
                for i in range(5):
                    acc[i] += node.left_stats[i] + node.own[i]
                if threshold == node.key:
                    break
                node = node.right
        return tuple(acc)

    def _variance(self, stats) -> float:
        if self.scaled_targets:
            return scaled_variance(stats[_N], stats[_WY], stats[_W2Y2])
        return weighted_variance(stats[_W], stats[_WY], stats[_WY2])

    def best_split(self, support: tuple[float, float] = (-math.inf, math.inf)) -> SplitResult | None:
        """Threshold among the stored keys inside ``support`` that maximises
        the weighted variance reduction.

        Ties go to the smaller threshold. Returns ``None`` when no threshold
        leaves positive weight on both sides.
        """
        if self.root is None:
            return None
        lo, hi = support
        total = self.total
        tw = total[_W]
        var_all = self._variance(total)
        left = [0.0] * 5
        right = [0.0] * 5
        best = None
        for key, own in self.items():
            for i in range(5):
                left[i] += own[i]
            if key < lo or key > hi:
                continue
            for i in range(5):
                right[i] = total[i] - left[i]
            lw, rw = left[_W], right[_W]
            if lw <= 0.0 or rw <= 0.0 or right[_N] <= 0.5:
                continue
            var_l = self._variance(left)
            var_r = self._variance(right)
            reduction = var_all - (lw / tw * var_l + rw / tw * var_r)
            if best is None or reduction > best[1]:
                best = (key, reduction, lw, rw, lw / tw * (var_all - var_l), rw / tw * (var_all - var_r))
        if best is None:
            return None
        q, reduction, lw, rw, red_l, red_r = best
        return SplitResult(q, reduction, lw, rw, self._successor(q), red_l, red_r)

    def _successor(self, key: float) -> float:
        node = self.root
        above = math.inf
        while node is not None:
            if key < node.key:
                above = node.key
                node = node.left
            else:
                node = node.right
        return above

    def dump_csv(self) -> str:
        """Sorted ``key,count,sum_w,sum_wy,sum_wy2`` rows with cumulative stats."""
        lines = ["key,count,sum_w,sum_wy,sum_wy2"]
        acc = [0.0] * 5
        for key, own in self.items():
            for i in range(5):
                acc[i] += own[i]
            lines.append(f"{key!r},{acc[_N]!r},{acc[_W]!r},{acc[_WY]!r},{acc[_WY2]!r}")
        return "\n".join(lines) + "\n"
