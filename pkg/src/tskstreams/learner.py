"""Learner facade, baselines and the prequential evaluation loop."""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .drift import DriftEvent, ErrorScale, retract_rule
from .induction import (ERCandidates, ExpansionConfig, RuleStats, gen_update_er_candidates,
                        try_expand_er, try_expand_vr, update_consequents)
from .fuzzy import RuleSet
from .stats import Standardizer

METRICS_COLUMNS = ("index", "prediction", "truth", "sq_error", "running_rmse", "rule_count", "micros")


@dataclass(frozen=True)
class PrequentialRecord:
    index: int
    prediction: float
    truth: float
    sq_error: float
    running_rmse: float
    rule_count: int
    micros: int

    def row(self) -> list[str]:
        return [str(self.index), repr(self.prediction), repr(self.truth), repr(self.sq_error),
                repr(self.running_rmse), str(self.rule_count), str(self.micros)]


class TSKStreams:
    """Incremental TSK fuzzy rule learner.

    Each call to :meth:`process_example` predicts first and learns second.
    Inputs are z-scored online; targets stay in their original units.
    """

    def __init__(self, d: int, config: ExpansionConfig | None = None):
        self.config = config or ExpansionConfig()
        self.d = d
        self.rules = RuleSet(d)
        self.stats = {r.rule_id: RuleStats.fresh(d, self.config) for r in self.rules}
        self.standardizer = Standardizer(d)
        self.error_scale = ErrorScale()
        self.drift_events: list[DriftEvent] = []
        self.expansions = []
        self.n_seen = 0
        self.n_skipped = 0
        self.n_since_change = 0
        self.sse = 0.0

    @property
    def rule_count(self) -> int:
        return len(self.rules)

    def predict(self, x) -> float:
        """Prediction for raw ``x`` without learning or touching the scaler."""
        z = self.standardizer.transform(np.asarray(x, dtype=float))
        return self.rules.predict_total(z)

    def _evaluate(self, z):
        rules = list(self.rules)
        mu = np.array([r.activation(z) for r in rules])
        outs = np.array([r.output(z) for r in rules])
        total = float(mu.sum())
        if total > 0.0:
            return rules, mu, outs, total, float(np.dot(mu, outs) / total)
        return rules, mu, outs, total, float(outs.mean())

    def _structural_change(self, sse_mark: float, n_mark: int) -> None:
        self.n_since_change = 0
        for rstats in self.stats.values():
            if rstats.er is not None:
                rstats.er.reset_accounting(sse_mark, n_mark)

    def process_example(self, x, y: float) -> float | None:
        """Test-then-train on one raw example.

        Returns the prediction, or ``None`` when the record holds a
        non-finite value and is skipped.
        """
        x = np.asarray(x, dtype=float)
        if x.shape != (self.d,):
            raise ValueError(f"expected {self.d} features, got shape {x.shape}")
        y = float(y)
        if not (np.isfinite(x).all() and math.isfinite(y)):
            self.n_skipped += 1
            return None
        cfg = self.config
        z = self.standardizer.update_transform(x)
        rules, mu, outs, total, prediction = self._evaluate(z)

        sse_before, n_before = self.sse, self.n_seen
        self.sse += (y - prediction) ** 2
        self.n_seen += 1
        self.n_since_change += 1

        if cfg.detect_drift and self._detect(rules, mu, outs, y):
            # the current example is learned by the new structure
            self._structural_change(sse_before, n_before)
            rules, mu, outs, total, _ = self._evaluate(z)
        if total <= 0.0:
            return prediction

        m2 = float(np.dot(mu, outs))
        due = []
        for i, rule in enumerate(rules):
            if mu[i] <= 0.0:
                continue
            rstats = self.stats[rule.rule_id]
            rstats.n += 1
            rule.covered += 1
            rstats.moments.update(z)
            if cfg.criterion == "er":
                if rstats.er is None:
                    if rstats.n >= cfg.er_warmup:
                        rstats.er = ERCandidates(rule, rstats.moments, cfg, sse_before, n_before)
                else:
                    gen_update_er_candidates(rule, rstats.er, z, y, mu[i] / total, cfg, rstats.moments)
            update_consequents(rule, float(mu[i]), z, y, total, m2, cfg.eta, rstats.er,
                               y_hat=prediction, rule_output=float(outs[i]))
            if cfg.criterion == "vr":
                psi = mu[i] / total
                # keyed on raw values so repeated inputs share a node
                for j, tree in enumerate(rstats.trees):
                    tree.insert(float(x[j]), psi, y)
                if rstats.n % cfg.grace_period == 0:
                    due.append(rule.rule_id)

        changed = False
        if cfg.criterion == "vr":
            mom = self.standardizer.moments
            scaling = (mom.mean, np.maximum(mom.std, self.standardizer.min_std)) if due else None
            for rule_id in due:
                if rule_id in self.rules:
                    exp = try_expand_vr(self.rules, self.stats, cfg, rule_id, scaling)
                    if exp is not None:
                        self.expansions.append((self.n_seen - 1, exp))
                        changed = True
        elif self.n_since_change % cfg.grace_period == 0:
            # a system-wide check, so the cadence is global
            exp = try_expand_er(self.rules, self.stats, cfg, self.sse, self.n_seen, self.n_since_change)
            if exp is not None:
                self.expansions.append((self.n_seen - 1, exp))
                changed = True
        if changed:
            self._structural_change(self.sse, self.n_seen)
        return prediction

    def _detect(self, rules, mu, outs, y) -> bool:
        cfg = self.config
        fired = []
        for i, rule in enumerate(rules):
            if mu[i] < cfg.drift_coverage or mu[i] <= 0.0:
                continue
            err = abs(y - outs[i])
            self.error_scale.update(err)
            det = self.stats[rule.rule_id].detector
            # only a rise in error counts as drift; falling errors are learning
            if det.add(self.error_scale.normalize(err)) and det.mean > det.last_mean_before:
                fired.append(rule.rule_id)
        changed = False
        for rule_id in fired:
            if rule_id not in self.rules:
                continue
            action, widened = retract_rule(self.rules, rule_id, cfg.strategy)
            self.drift_events.append(DriftEvent(self.n_seen - 1, rule_id, action))
            if action == "reset":
                self.stats[rule_id].detector.reset()
                continue
            del self.stats[rule_id]
            for other in widened:
                rstats = self.stats[other]
                rstats.reset_candidates(self.d, cfg)
                rstats.detector.reset()
            changed = True
        return changed

    def config_echo(self) -> dict:
        return {"learner": "tsk-streams", **self.config.to_dict()}

    def to_dict(self) -> dict:
        out = self.rules.to_dict()
        out["standardizer"] = self.standardizer.to_dict()
        out["config"] = self.config.to_dict()
        return out


class MeanBaseline:
    """Predicts the running mean of the targets seen so far."""

    rule_count = 0

    def __init__(self, d: int | None = None):
        self.d = d
        self.n = 0
        self.mean = 0.0
        self.n_skipped = 0
        self.drift_events = []

    def process_example(self, x, y: float) -> float | None:
        y = float(y)
        if not (math.isfinite(y) and np.isfinite(np.asarray(x, dtype=float)).all()):
            self.n_skipped += 1
            return None
        prediction = self.mean
        self.n += 1
        self.mean += (y - self.mean) / self.n
        return prediction

    def config_echo(self) -> dict:
        return {"learner": "mean"}

    def to_dict(self) -> dict:
        return {"learner": "mean", "mean": self.mean, "n": self.n}


class LinearSGDBaseline:
    """Single linear model on z-scored inputs, trained by plain SGD."""

    rule_count = 1

    def __init__(self, d: int, eta: float = 0.01):
        self.d = d
        self.eta = eta
        self.w = np.zeros(d + 1)
        self.standardizer = Standardizer(d)
        self.n_skipped = 0
        self.drift_events = []

    def process_example(self, x, y: float) -> float | None:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.d,):
            raise ValueError(f"expected {self.d} features, got shape {x.shape}")
        y = float(y)
        if not (np.isfinite(x).all() and math.isfinite(y)):
            self.n_skipped += 1
            return None
        zt = np.concatenate(([1.0], self.standardizer.update_transform(x)))
        prediction = float(self.w @ zt)
        self.w += self.eta * (y - prediction) * zt
        return prediction

    def config_echo(self) -> dict:
        return {"learner": "linear", "eta": self.eta}

    def to_dict(self) -> dict:
        return {"learner": "linear", "weights": self.w.tolist()}


def evaluate_stream(learner, stream: Iterable, metrics_path=None, timing: bool = True,
                    extra_echo: dict | None = None) -> dict:
    """Run the prequential loop over ``(x, y)`` pairs.

    Returns ``{rmse, rules, mean_micros, drift_events, config_echo}``. With
    ``metrics_path`` every evaluated example is written as one CSV row; with
    ``timing=False`` the micros column is zero so reruns are byte-identical.
    """
    handle = open(metrics_path, "w", newline="") if metrics_path is not None else None
    writer = None
    if handle is not None:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(METRICS_COLUMNS)
    sse = 0.0
    n = 0
    micros_total = 0
    clock = time.perf_counter_ns
    try:
        for index, (x, y) in enumerate(stream):
            start = clock()
            prediction = learner.process_example(x, y)
            elapsed = (clock() - start) // 1000
            if prediction is None:
                continue
            err2 = (float(y) - prediction) ** 2
            sse += err2
            n += 1
            micros_total += elapsed
            if writer is not None:
                rec = PrequentialRecord(index, prediction, float(y), err2, math.sqrt(sse / n),
                                        learner.rule_count, int(elapsed) if timing else 0)
                writer.writerow(rec.row())
    finally:
        if handle is not None:
            handle.close()
    if n == 0:
        raise ValueError("the stream contained no usable examples")
    echo = learner.config_echo()
    if extra_echo:
        echo.update(extra_echo)
    return {
        "rmse": math.sqrt(sse / n),
        "rules": learner.rule_count,
        "mean_micros": micros_total / n if timing else 0.0,
        "drift_events": [e.to_dict() for e in learner.drift_events],
        "config_echo": echo,
    }
