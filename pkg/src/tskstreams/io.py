"""Stream sources: CSV and ARFF readers and synthetic generators.

Every source is lazy and re-iterable. Iterating yields ``(x, y)`` with ``x``
a float array; missing values (``?`` or an empty cell) become NaN and are
skipped by the learners.
"""

from __future__ import annotations

import csv
import math
import os
import re
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

_NUMERIC_TYPES = {"numeric", "real", "integer"}
_MISSING = {"?", ""}


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class UnsupportedAttribute(ParseError):
    def __init__(self, name: str, kind: str, line: int | None = None):
        self.attribute = name
        super().__init__(f"attribute {name!r} has unsupported type {kind!r}", line)


@dataclass(frozen=True)
class Schema:
    features: tuple
    target: str
    types: tuple = ()

    @property
    def d(self) -> int:
        return len(self.features)


@dataclass
class StreamSource:
    schema: Schema
    rows: Callable[[], Iterator]
    origin: str

    def __iter__(self):
        return self.rows()

    @property
    def d(self) -> int:
        return self.schema.d


def _cell(text: str, line: int, column: str) -> float:
    text = text.strip()
    if text in _MISSING:
        return math.nan
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"non-numeric value {text!r} in column {column!r}", line) from None


def _pick_target(names: list, target: str | None) -> int:
    if target is None:
        return len(names) - 1
    if target not in names:
        raise ParseError(f"target column {target!r} not found")
    return names.index(target)


def _split_rows(names, t, records):
    """Turn ``(line, cells)`` records into ``(x, y)`` pairs."""
    width = len(names)
    keep = [i for i in range(width) if i != t]
    for line, cells in records:
        if len(cells) != width:
            raise ParseError(f"expected {width} fields, found {len(cells)}", line)
        values = [_cell(cells[i], line, names[i]) for i in range(width)]
        yield np.array([values[i] for i in keep]), values[t]


def parse_csv(path, target: str | None = None) -> StreamSource:
    """Lazy CSV source; the header names the columns, the target defaults to
    the last one."""
    path = os.fspath(path)
    with open(path, newline="") as fh:
        header = next(csv.reader(fh), None)
    if not header:
        raise ParseError("missing header row", 1)
    names = [h.strip() for h in header]
    t = _pick_target(names, target)

    def records():
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            next(reader)
            for cells in reader:
                if not cells or (len(cells) == 1 and not cells[0].strip()):
                    continue
                yield reader.line_num, cells

    features = tuple(n for i, n in enumerate(names) if i != t)
    schema = Schema(features, names[t], ("numeric",) * len(names))
    return StreamSource(schema, lambda: _split_rows(names, t, records()), "csv")


_ATTR = re.compile(r"""@attribute\s+('(?:[^'\\]|\\.)*'|"(?:[^"\\]|\\.)*"|\S+)\s+(.+)$""", re.I)


def _arff_header(path):
    names, types = [], []
    with open(path) as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("%"):
                continue
            low = line.lower()
            if low.startswith("@relation"):
                continue
            if low.startswith("@attribute"):
                m = _ATTR.match(line)
                if m is None:
                    raise ParseError("malformed @attribute line", line_no)
                name = m.group(1).strip("'\"")
                kind = m.group(2).strip()
                if kind.lower() not in _NUMERIC_TYPES:
                    raise UnsupportedAttribute(name, kind, line_no)
                names.append(name)
                types.append(kind.lower())
                continue
            if low.startswith("@data"):
                return names, types, line_no
            raise ParseError(f"unexpected header line {line!r}", line_no)
    raise ParseError("no @data section")


def parse_arff(path, target: str | None = None) -> StreamSource:
    """Lazy reader for dense, all-numeric ARFF files."""
    path = os.fspath(path)
    names, types, data_line = _arff_header(path)
    if not names:
        raise ParseError("no attributes declared")
    t = _pick_target(names, target)

    def records():
        with open(path, newline="") as fh:
            for line_no, raw in enumerate(fh, 1):
                if line_no <= data_line:
                    continue
                line = raw.strip()
                if not line or line.startswith("%"):
                    continue
                if line.startswith("{"):
                    raise ParseError("sparse ARFF rows are not supported", line_no)
                yield line_no, next(csv.reader([line], skipinitialspace=True))

    features = tuple(n for i, n in enumerate(names) if i != t)
    return StreamSource(Schema(features, names[t], tuple(types)),
                        lambda: _split_rows(names, t, records()), "arff")


def open_source(path, fmt: str | None = None, target: str | None = None) -> StreamSource:
    fmt = fmt or os.path.splitext(os.fspath(path))[1].lstrip(".").lower()
    if fmt == "csv":
        return parse_csv(path, target)
    if fmt == "arff":
        return parse_arff(path, target)
    raise ParseError(f"unknown input format {fmt!r}")


def write_csv(path, rows, features, target: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([*features, target])
        for x, y in rows:
            writer.writerow([repr(float(v)) for v in x] + [repr(float(y))])


# --------------------------------------------------------------------------
# synthetic streams

GENERATORS = ("piecewise-linear", "friedman-like")
DRIFT_KINDS = ("abrupt", "gradual")
_CHUNK = 4096


@dataclass(frozen=True)
class DriftPoint:
    index: int
    kind: str = "abrupt"
    magnitude: float = 1.0
    width: int = 1000


@dataclass
class DriftStreamConfig:
    """Synthetic stream description.

    ``piecewise-linear`` draws ``x`` from U(-1, 1)^d and uses one linear
    form per regime, the regime being chosen by the sign of ``x[0]`` when
    ``pieces == 2``. ``friedman-like`` draws ``x`` from U(0, 1)^d (d >= 5).
    Each drift point adds its magnitude to the target from its index on;
    a gradual drift ramps the offset in linearly over ``width`` examples.
    """

    generator: str = "piecewise-linear"
    d: int = 5
    n: int = 10000
    drifts: list = field(default_factory=list)
    noise: float = 0.0
    seed: int = 0
    pieces: int = 1
    coefficients: list | None = None

    def __post_init__(self):
        self.drifts = [p if isinstance(p, DriftPoint) else DriftPoint(**p) for p in self.drifts]
        if self.generator not in GENERATORS:
            raise ValueError(f"generator must be one of {GENERATORS}")
        if self.d < 1 or self.n < 1:
            raise ValueError("d and n must be positive")
        if self.generator == "friedman-like" and self.d < 5:
            raise ValueError("friedman-like needs d >= 5")
        if self.pieces not in (1, 2):
            raise ValueError("pieces must be 1 or 2")
        if self.noise < 0:
            raise ValueError("noise must be non-negative")
        last = -1
        for p in self.drifts:
            if p.kind not in DRIFT_KINDS:
                raise ValueError(f"drift kind must be one of {DRIFT_KINDS}")
            if not last < p.index < self.n:
                raise ValueError("drift indices must be strictly increasing and below n")
            if p.kind == "gradual" and p.width < 1:
                raise ValueError("gradual drift needs a positive width")
            last = p.index
        if self.coefficients is not None:
            coef = np.asarray(self.coefficients, dtype=float)
            if coef.shape != (self.pieces, self.d + 1):
                raise ValueError(f"coefficients must have shape ({self.pieces}, {self.d + 1})")

    @classmethod
    def from_dict(cls, data: dict) -> "DriftStreamConfig":
        return cls(**data)

    def linear_coefficients(self) -> np.ndarray:
        """Rows ``(intercept, w_1..w_d)``, one per regime."""
        if self.coefficients is not None:
            return np.asarray(self.coefficients, dtype=float)
        rng = np.random.default_rng([self.seed, 1])
        return rng.uniform(-1.0, 1.0, size=(self.pieces, self.d + 1))

    def offset(self, index: np.ndarray) -> np.ndarray:
        out = np.zeros(index.shape)
        for p in self.drifts:
            if p.kind == "abrupt":
                out += np.where(index >= p.index, p.magnitude, 0.0)
            else:
                out += p.magnitude * np.clip((index - p.index + 1) / p.width, 0.0, 1.0)
        return out

    def clean_target(self, x: np.ndarray, index: np.ndarray) -> np.ndarray:
        if self.generator == "friedman-like":
            base = (10.0 * np.sin(np.pi * x[:, 0] * x[:, 1]) + 20.0 * (x[:, 2] - 0.5) ** 2
                    + 10.0 * x[:, 3] + 5.0 * x[:, 4])
        else:
            coef = self.linear_coefficients()
            regime = (x[:, 0] >= 0).astype(int) if self.pieces == 2 else np.zeros(len(x), int)
            base = coef[regime, 0] + np.einsum("ij,ij->i", coef[regime, 1:], x)
        return base + self.offset(index)


def _chunks(cfg: DriftStreamConfig):
    rng = np.random.default_rng(cfg.seed)
    lo = 0.0 if cfg.generator == "friedman-like" else -1.0
    for start in range(0, cfg.n, _CHUNK):
        m = min(_CHUNK, cfg.n - start)
        x = rng.uniform(lo, 1.0, size=(m, cfg.d))
        noise = rng.normal(0.0, 1.0, size=m) * cfg.noise
        y = cfg.clean_target(x, np.arange(start, start + m)) + noise
        yield x, y


def gen_drift_stream(cfg: DriftStreamConfig) -> StreamSource:
    def rows():
        for x, y in _chunks(cfg):
            for i in range(len(y)):
                yield x[i], float(y[i])

    features = tuple(f"x{j + 1}" for j in range(cfg.d))
    return StreamSource(Schema(features, "y", ("numeric",) * (cfg.d + 1)), rows, "synthetic")


def _array_source(make, d: int, names=None) -> StreamSource:
    def rows():
        x, y = make()
        for i in range(len(y)):
            yield x[i], float(y[i])

    features = tuple(names or (f"x{j + 1}" for j in range(d)))
    return StreamSource(Schema(features, "y", ("numeric",) * (d + 1)), rows, "synthetic")


def make_2dplanes(n: int = 40768, seed: int = 0, noise: float = 1.0) -> StreamSource:
    """Ten-feature piecewise-planar benchmark with three-valued inputs."""

    def make():
        rng = np.random.default_rng(seed)
        x = rng.integers(-1, 2, size=(n, 10)).astype(float)
        x[:, 0] = rng.choice([-1.0, 1.0], size=n)
        up = 3.0 + 3.0 * x[:, 1] + 2.0 * x[:, 2] + x[:, 3]
        down = -3.0 + 3.0 * x[:, 4] + 2.0 * x[:, 5] + x[:, 6]
        y = np.where(x[:, 0] > 0, up, down) + rng.normal(0.0, noise, size=n)
        return x, y

    return _array_source(make, 10)


def make_fried(n: int = 40768, seed: int = 0, noise: float = 1.0) -> StreamSource:
    """Friedman's ten-feature benchmark, five of them irrelevant."""

    def make():
        rng = np.random.default_rng(seed)
        x = rng.uniform(0.0, 1.0, size=(n, 10))
        y = (10.0 * np.sin(np.pi * x[:, 0] * x[:, 1]) + 20.0 * (x[:, 2] - 0.5) ** 2
             + 10.0 * x[:, 3] + 5.0 * x[:, 4] + rng.normal(0.0, noise, size=n))
        return x, y

    return _array_source(make, 10)


PRESETS = {"2dplanes": make_2dplanes, "fried": make_fried}


def synthetic_source(recipe: dict | str, seed: int | None = None) -> StreamSource:
    """Source from a preset name or a :class:`DriftStreamConfig` mapping."""
    if isinstance(recipe, str):
        if recipe not in PRESETS:
            raise ValueError(f"unknown preset {recipe!r}; choose from {sorted(PRESETS)}")
        return PRESETS[recipe](seed=0 if seed is None else seed)
    data = dict(recipe)
    if seed is not None:
        data.setdefault("seed", seed)
    return gen_drift_stream(DriftStreamConfig.from_dict(data))
