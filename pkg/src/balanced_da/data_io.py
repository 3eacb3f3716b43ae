"""Dataset files, joint z-scoring, and a Gaussian domain-shift generator.

Two on-disk formats are supported.

dense-csv
    UTF-8, comma separated, one sample per row. An optional single header
    line starting with ``#``. An optional integer label column, selected by
    0-based index (negative indices count from the end). LF or CRLF.

dense-binary
    ``b"BDA1"``, then little-endian ``u32`` rows, ``u32`` cols, ``u8``
    has_labels, then ``rows * cols`` row-major float64 values, then (if
    flagged) ``rows`` ``u32`` labels.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import LabeledDomain, UnlabeledDomain
from .errors import BadLabel, DimensionMismatch, InvalidConfig, ParseError, RaggedRows

DENSE_CSV = "dense-csv"
DENSE_BINARY = "dense-binary"
MAGIC = b"BDA1"
_HEADER = struct.Struct("<4sIIB")


@dataclass(frozen=True)
class DatasetSpec:
    path: Optional[str] = None
    format: str = DENSE_CSV
    label_col: Optional[int] = None
    generator: Optional["SynthShiftConfig"] = None

    def __post_init__(self):
        if (self.path is None) == (self.generator is None):
            raise InvalidConfig("a dataset spec needs exactly one of path / generator")
        if self.format not in (DENSE_CSV, DENSE_BINARY):
            raise InvalidConfig(f"unknown format {self.format!r}")


def sniff_format(path) -> str:
    with open(path, "rb") as fh:
        return DENSE_BINARY if fh.read(4) == MAGIC else DENSE_CSV


def _parse_label(text: str, line: int, col: int) -> int:
    try:
        value = int(text)
    except ValueError:
        try:
            f = float(text)
        except ValueError:
            raise BadLabel(f"label {text!r} is not an integer (line {line}, column {col})") from None
        if not f.is_integer():
            raise BadLabel(f"label {text!r} is not an integer (line {line}, column {col})")
        value = int(f)
    if value < 1:
        raise BadLabel(f"label {value} is not positive (line {line}, column {col})")
    return value


def read_dense_csv(path, label_col: Optional[int] = None):
    """Parse a dense CSV file into ``(features, labels)``; labels is None without a label column."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    first = 1
    if lines and lines[0].lstrip().startswith("#"):
        lines = lines[1:]
        first = 2
    rows, labels = [], []
    width = None
    for offset, raw in enumerate(lines):
        lineno = first + offset
        fields = raw.split(",") if raw.strip() else []
        if width is None:
            width = len(fields)
            if width == 0:
                raise RaggedRows("empty row", line=lineno)
            if label_col is not None and not -width <= label_col < width:
                raise ParseError(f"label column {label_col} out of range for {width} columns",
                                 line=lineno)
            lc = None if label_col is None else label_col % width
        elif len(fields) != width:
            raise RaggedRows(f"expected {width} fields, found {len(fields)}", line=lineno)
        values = []
        for col, tok in enumerate(fields):
            if col == lc:
                labels.append(_parse_label(tok.strip(), lineno, col))
                continue
            try:
                values.append(float(tok))
            except ValueError:
                raise ParseError(f"cannot parse {tok.strip()!r} as a number",
                                 line=lineno, column=col) from None
        rows.append(values)
    n_feat = 0 if width is None else width - (label_col is not None)
    feats = np.array(rows, dtype=np.float64).reshape(len(rows), n_feat)
    return feats, (np.array(labels, dtype=np.int64) if label_col is not None else None)


def write_dense_csv(path, features, labels=None, header: Optional[str] = None) -> None:
    """Write one sample per row; labels, if given, become the trailing column."""
    feats = np.asarray(features, dtype=np.float64)
    out = []
    if header is not None:
        out.append(header if header.startswith("#") else "# " + header)
    for i, row in enumerate(feats):
        cells = [repr(float(v)) for v in row]
        if labels is not None:
            cells.append(str(int(labels[i])))
        out.append(",".join(cells))
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


def write_labels_csv(path, labels) -> None:
    Path(path).write_text("".join(f"{int(v)}\n" for v in labels), encoding="utf-8")


def read_dense_binary(path):
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise ParseError("truncated dense-binary header")
    magic, rows, cols, has_labels = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise ParseError(f"bad magic {magic!r}")
    pos = _HEADER.size
    need = rows * cols * 8 + (rows * 4 if has_labels else 0)
    if len(blob) - pos != need:
        raise ParseError(f"expected {need} payload bytes, found {len(blob) - pos}")
    feats = np.frombuffer(blob, dtype="<f8", count=rows * cols, offset=pos)
    feats = feats.reshape(rows, cols).astype(np.float64)
    labels = None
    if has_labels:
        labels = np.frombuffer(blob, dtype="<u4", count=rows, offset=pos + rows * cols * 8)
        labels = labels.astype(np.int64)
        if labels.size and labels.min() < 1:
            raise BadLabel("label 0 in dense-binary file")
    return feats, labels


def write_dense_binary(path, features, labels=None) -> None:
    feats = np.ascontiguousarray(features, dtype="<f8")
    rows, cols = feats.shape
    parts = [_HEADER.pack(MAGIC, rows, cols, 1 if labels is not None else 0), feats.tobytes()]
    if labels is not None:
        parts.append(np.asarray(labels, dtype="<u4").tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_dense_csv(spec: DatasetSpec, n_classes: Optional[int] = None):
    """Load the file named by ``spec``: LabeledDomain with a label column, else UnlabeledDomain."""
    if spec.path is None:
        raise InvalidConfig("load_dense_csv needs a path-based spec")
    if spec.format == DENSE_BINARY:
        feats, labels = read_dense_binary(spec.path)
    else:
        feats, labels = read_dense_csv(spec.path, spec.label_col)
    if labels is None:
        return UnlabeledDomain(feats)
    return LabeledDomain(feats, labels, n_classes)


def load_labels(path) -> np.ndarray:
    """Label vector from a one-column CSV (or the label column of a binary file)."""
    if sniff_format(path) == DENSE_BINARY:
        _, labels = read_dense_binary(path)
        if labels is None:
            raise ParseError(f"{path} has no labels")
        return labels
    _, labels = read_dense_csv(path, label_col=-1)
    return labels


def zscore_columns(stacked: np.ndarray) -> np.ndarray:
    X = np.asarray(stacked, dtype=np.float64)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    # zero-variance columns (up to rounding) are left exactly as they were
    const = std <= 1e-14 * np.maximum(np.abs(mean), 1.0)
    out = (X - mean) / np.where(const, 1.0, std)
    out[:, const] = X[:, const]
    return out


def zscore_joint(source, target):
    """Z-score every feature with statistics of the stacked source + target samples.

    Accepts domain objects or plain arrays and returns the same kinds.
    """
    fs = source.features if hasattr(source, "features") else np.asarray(source, dtype=np.float64)
    ft = target.features if hasattr(target, "features") else np.asarray(target, dtype=np.float64)
    if fs.shape[1] != ft.shape[1]:
        raise DimensionMismatch(f"{fs.shape[1]} vs {ft.shape[1]} features")
    Z = zscore_columns(np.vstack([fs, ft]))
    zs, zt = Z[:fs.shape[0]], Z[fs.shape[0]:]
    if isinstance(source, LabeledDomain):
        zs = LabeledDomain(zs, source.labels, source.n_classes)
    elif isinstance(source, UnlabeledDomain):
        zs = UnlabeledDomain(zs)
    if isinstance(target, LabeledDomain):
        zt = LabeledDomain(zt, target.labels, target.n_classes)
    elif isinstance(target, UnlabeledDomain):
        zt = UnlabeledDomain(zt)
    return zs, zt


@dataclass(frozen=True)
class SynthShiftConfig:
    """Gaussian classes; target class c is centred at mean_c + marginal + conditional_c."""

    means: np.ndarray                    # classes x features
    source_counts: Sequence[int]
    target_counts: Sequence[int]
    marginal_shift: Optional[np.ndarray] = None
    conditional_shifts: Optional[np.ndarray] = None
    sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        means = np.atleast_2d(np.asarray(self.means, dtype=np.float64))
        C, D = means.shape
        if C < 2:
            raise InvalidConfig("need at least two classes")
        if len(self.source_counts) != C or len(self.target_counts) != C:
            raise InvalidConfig("need one source and one target count per class")
        if min(self.source_counts) < 0 or min(self.target_counts) < 0:
            raise InvalidConfig("class counts must be non-negative")
        if sum(self.source_counts) == 0 or sum(self.target_counts) == 0:
            raise InvalidConfig("both domains need samples")
        if not self.sigma > 0:
            raise InvalidConfig(f"sigma must be positive, got {self.sigma}")
        marg = np.zeros(D) if self.marginal_shift is None else np.asarray(self.marginal_shift, float)
        cond = np.zeros((C, D)) if self.conditional_shifts is None else np.asarray(
            self.conditional_shifts, float)
        if marg.shape != (D,) or cond.shape != (C, D):
            raise InvalidConfig("shift shapes do not match the class means")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "marginal_shift", marg)
        object.__setattr__(self, "conditional_shifts", cond)
        object.__setattr__(self, "source_counts", tuple(int(v) for v in self.source_counts))
        object.__setattr__(self, "target_counts", tuple(int(v) for v in self.target_counts))

    @property
    def n_classes(self) -> int:
        return self.means.shape[0]

    @property
    def n_features(self) -> int:
        return self.means.shape[1]


def _sample_domain(rng, centres, counts, sigma):
    blocks, labels = [], []
    for c, (centre, k) in enumerate(zip(centres, counts)):
        blocks.append(centre + sigma * rng.standard_normal((k, centre.size)))
        labels.append(np.full(k, c + 1, dtype=np.int64))
    X, y = np.vstack(blocks), np.concatenate(labels)
    order = rng.permutation(y.size)
    return X[order], y[order]


def generate_shift(config: SynthShiftConfig):
    """Return ``(source, target, target_truth)``; bit-reproducible for a fixed seed."""
    rng = np.random.default_rng(config.seed)
    Xs, ys = _sample_domain(rng, config.means, config.source_counts, config.sigma)
    target_centres = config.means + config.marginal_shift + config.conditional_shifts
    Xt, yt = _sample_domain(rng, target_centres, config.target_counts, config.sigma)
    source = LabeledDomain(Xs, ys, config.n_classes)
    return source, UnlabeledDomain(Xt), yt


def counts_from_priors(total: int, priors: Sequence[float]) -> list:
    """Split ``total`` into integer class counts proportional to ``priors`` (largest remainder)."""
    p = np.asarray(priors, dtype=np.float64)
    if p.ndim != 1 or p.size < 2 or np.any(p < 0) or not p.sum() > 0:
        raise InvalidConfig(f"bad class priors {priors!r}")
    p = p / p.sum()
    raw = total * p
    counts = np.floor(raw).astype(int)
    short = total - counts.sum()
    for i in np.argsort(-(raw - counts), kind="stable")[:short]:
        counts[i] += 1
    return counts.tolist()


TASK_KINDS = ("zero", "shift", "marginal", "conditional", "imbalanced", "balanced")


def synthetic_task(kind: str = "shift", seed: int = 7, n_classes: int = 2, n_features: int = 10,
                   per_class: int = 100, source_priors=None, target_priors=None,
                   separation: float = 4.0, marginal: Optional[float] = None,
                   conditional: Optional[float] = None, sigma: float = 0.7) -> SynthShiftConfig:
    """Preset task families used by the tests, the CLI and the benchmarks.

    Class means are drawn isotropically so that two classes sit about
    ``separation`` apart. The marginal offset is one random direction of
    length ``marginal``; each class gets its own random offset of length
    ``conditional``, re-centred so the offsets cancel in the target mean.

    zero         no shift at all
    marginal     one common offset on every target class
    conditional  per-class offsets only, target mean left in place
    shift        marginal and conditional offsets together
    imbalanced   ``shift`` with 90/10 source and 10/90 target class priors
    balanced     ``shift`` with uniform priors (control for ``imbalanced``)
    """
    if kind not in TASK_KINDS:
        raise InvalidConfig(f"unknown task kind {kind!r}; choose from {TASK_KINDS}")
    if n_features < 1 or n_classes < 2:
        raise InvalidConfig("need at least one feature and two classes")
    defaults = {
        "zero": (0.0, 0.0),
        "marginal": (6.0, 0.0),
        "conditional": (0.0, 2.0),
        "shift": (6.0, 2.0),
        "imbalanced": (6.0, 2.0),
        "balanced": (6.0, 2.0),
    }[kind]
    m_mag = defaults[0] if marginal is None else marginal
    c_mag = defaults[1] if conditional is None else conditional
    C, D = n_classes, n_features

    if kind == "imbalanced" and source_priors is None and target_priors is None:
        source_priors = [0.9] + [0.1 / (C - 1)] * (C - 1)
        target_priors = [0.1 / (C - 1)] * (C - 1) + [0.9]
    total = per_class * C
    s_counts = [per_class] * C if source_priors is None else counts_from_priors(total, source_priors)
    t_counts = [per_class] * C if target_priors is None else counts_from_priors(total, target_priors)

    rng = np.random.default_rng([int(seed), 0x5EED])
    means = separation * rng.standard_normal((C, D)) / np.sqrt(2 * D)
    marg = _random_direction(rng, D) * m_mag
    cond = np.stack([_random_direction(rng, D) for _ in range(C)]) * c_mag
    tc = np.asarray(t_counts, dtype=np.float64)
    cond -= (tc @ cond) / tc.sum()
    return SynthShiftConfig(means, s_counts, t_counts, marg, cond, sigma, seed)


def _random_direction(rng, D: int) -> np.ndarray:
    v = rng.standard_normal(D)
    return v / np.linalg.norm(v)
