"""Datasets with a sensitive group attribute: loading, splitting, partitioning."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "DataError",
    "Dataset",
    "GroupPartition",
    "SplitSpec",
    "CsvSchema",
    "Xoshiro256",
    "load_libsvm",
    "load_csv",
    "write_libsvm",
    "split_indices",
    "split",
    "partition_by_group",
]


class DataError(ValueError):
    """Raised for malformed input files or invalid datasets."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """Dense feature matrix, labels in {-1,+1} and group ids in 1..G."""

    features: np.ndarray
    labels: np.ndarray
    groups: np.ndarray
    feature_names: tuple[str, ...] | None = None
    n_groups: int = 0

    def __post_init__(self):
        x = np.ascontiguousarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.float64)
        g = np.asarray(self.groups, dtype=np.int64)
        if x.ndim != 2:
            raise DataError("features must be a 2-d matrix")
        n = x.shape[0]
        if n < 1 or y.shape != (n,) or g.shape != (n,):
            raise DataError(f"length mismatch: features {x.shape}, labels {y.shape}, groups {g.shape}")
        if not np.all(np.isfinite(x)):
            raise DataError("features contain non-finite values")
        if not np.all((y == 1.0) | (y == -1.0)):
            raise DataError("labels must be -1 or +1")
        G = int(self.n_groups) if self.n_groups else int(g.max())
        if G < 2:
            raise DataError("fewer than 2 groups")
        if g.min() < 1 or g.max() > G:
            raise DataError(f"group ids must lie in 1..{G}")
        present = np.bincount(g, minlength=G + 1)[1:]
        if np.any(present == 0):
            missing = [k + 1 for k in np.flatnonzero(present == 0)]
            raise DataError(f"groups {missing} have no members")
        if self.feature_names is not None and len(self.feature_names) != x.shape[1]:
            raise DataError("feature_names length does not match feature count")
        x.setflags(write=False)
        y.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "groups", g)
        object.__setattr__(self, "n_groups", G)
        if self.feature_names is not None:
            object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def subset(self, idx: np.ndarray) -> "Dataset":
        """Rows ``idx`` as a new Dataset keeping the parent's group numbering."""
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(self.features[idx], self.labels[idx], self.groups[idx],
                       self.feature_names, self.n_groups)


@dataclass(frozen=True)
class GroupPartition:
    per_group: dict[int, np.ndarray]

    def sizes(self) -> dict[int, int]:
        return {k: len(v) for k, v in self.per_group.items()}


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.6
    val_frac: float = 0.2
    test_frac: float = 0.2
    seed: int = 0

    def __post_init__(self):
        fr = (self.train_frac, self.val_frac, self.test_frac)
        if any(not (0.0 < f < 1.0) for f in fr):
            raise DataError(f"split fractions must lie in (0,1), got {fr}")
        if abs(sum(fr) - 1.0) > 1e-12:
            raise DataError(f"split fractions must sum to 1, got {sum(fr)!r}")
        if not (0 <= int(self.seed) < 2**64):
            raise DataError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class CsvSchema:
    label_col: str
    group_col: str
    feature_cols: Sequence[str] | None = None  # None: every other column


# ---------------------------------------------------------------------------
# PRNG: splitmix64 seeds xoshiro256**
# ---------------------------------------------------------------------------

_MASK = (1 << 64) - 1


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK


class Xoshiro256:
    """xoshiro256** seeded from one 64-bit integer via splitmix64."""

    def __init__(self, seed: int):
        s = int(seed) & _MASK
        state = []
        for _ in range(4):
            s = (s + 0x9E3779B97F4A7C15) & _MASK
            z = s
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
            state.append(z ^ (z >> 31))
        self._s = state

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK, 7) * 9) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound) by rejection (no modulo bias)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % bound

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates shuffle of 0..n-1."""
        perm = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.below(i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        return np.asarray(perm, dtype=np.int64)


# ---------------------------------------------------------------------------
# loaders
# ---------------------------------------------------------------------------

def _remap_labels(raw: np.ndarray, where: str) -> np.ndarray:
    vals = set(np.unique(raw).tolist())
    if vals <= {0.0, 1.0}:
        return np.where(raw == 1.0, 1.0, -1.0)
    if vals <= {-1.0, 1.0}:
        return raw.astype(np.float64)
    raise DataError(f"{where}: labels must be binary in {{0,1}} or {{-1,+1}}, got {sorted(vals)[:5]}")


def _remap_groups(raw: Sequence, numeric: bool) -> tuple[np.ndarray, list]:
    """Contiguous ids 1..G: sorted order for numeric codes, first appearance otherwise."""
    if numeric:
        codes = sorted(set(raw))
    else:
        codes = list(dict.fromkeys(raw))
    if len(codes) < 2:
        raise DataError("fewer than 2 groups")
    lookup = {c: i + 1 for i, c in enumerate(codes)}
    return np.array([lookup[c] for c in raw], dtype=np.int64), codes


def load_libsvm(path, group_source, n_features: int | None = None,
                implicit_zero_group: bool = False) -> Dataset:
    """Read a libsvm text file into a dense Dataset.

    ``group_source`` is either an int (1-based feature index holding integer
    group codes; the column stays in the feature matrix) or a path to a side
    file with one integer code per data row. Sparse files omit zeros, so a
    missing group column is an error unless ``implicit_zero_group`` is set.
    ``n_features`` pads the matrix when trailing columns never appear.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: file not found")
    labels: list[float] = []
    rows: list[tuple[list[int], list[float]]] = []
    max_idx = 0
    with path.open() as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                labels.append(float(parts[0]))
                idx, val = [], []
                for tok in parts[1:]:
                    a, b = tok.split(":")
                    i = int(a)
                    if i < 1:
                        raise ValueError("index < 1")
                    idx.append(i)
                    val.append(float(b))
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: malformed line ({exc})") from None
            if idx:
                max_idx = max(max_idx, max(idx))
            rows.append((idx, val))
    if not rows:
        raise DataError(f"{path}: no data rows")
    d = max_idx if n_features is None else int(n_features)
    if d < max_idx:
        raise DataError(f"{path}: feature index {max_idx} exceeds n_features={d}")
    x = np.zeros((len(rows), d))
    for r, (idx, val) in enumerate(rows):
        x[r, np.asarray(idx, dtype=np.int64) - 1] = val
    y = _remap_labels(np.asarray(labels), str(path))

    if isinstance(group_source, (int, np.integer)) and not isinstance(group_source, bool):
        col = int(group_source)
        if not 1 <= col <= d:
            raise DataError(f"group column {col} outside 1..{d}")
        raw = []
        for r, (idx, val) in enumerate(rows):
            if col in idx:
                v = val[idx.index(col)]
            elif implicit_zero_group:
                v = 0.0
            else:
                raise DataError(f"{path}: row {r + 1} has no value for group column {col}")
            if v != int(v):
                raise DataError(f"{path}: row {r + 1} group code {v} is not an integer")
            raw.append(int(v))
    else:
        gpath = Path(group_source)
        if not gpath.exists():
            raise DataError(f"{gpath}: group file not found")
        raw = []
        with gpath.open() as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    raw.append(int(line))
                except ValueError:
                    raise DataError(f"{gpath}:{lineno}: group code is not an integer") from None
        if len(raw) != len(rows):
            raise DataError(f"{gpath}: {len(raw)} group codes for {len(rows)} data rows")
    g, _ = _remap_groups(raw, numeric=True)
    return Dataset(x, y, g)


def load_csv(path, schema: CsvSchema) -> Dataset:
    """Read a CSV with a header row. Group strings map to ids by first appearance."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: file not found")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        body = [row for row in reader if row and any(c.strip() for c in row)]
    feature_cols = list(schema.feature_cols) if schema.feature_cols is not None else [
        h for h in header if h not in (schema.label_col, schema.group_col)]
    missing = [c for c in [schema.label_col, schema.group_col, *feature_cols] if c not in header]
    if missing:
        raise DataError(f"{path}: missing columns {missing}")
    if not body:
        raise DataError(f"{path}: no data rows")
    pos = {h: i for i, h in enumerate(header)}
    x = np.empty((len(body), len(feature_cols)))
    raw_labels, raw_groups = [], []
    for r, row in enumerate(body):
        if len(row) != len(header):
            raise DataError(f"{path}:{r + 2}: expected {len(header)} cells, got {len(row)}")
        for j, c in enumerate(feature_cols):
            cell = row[pos[c]].strip()
            try:
                x[r, j] = float(cell)
            except ValueError:
                raise DataError(f"{path}:{r + 2}: non-numeric value {cell!r} in column {c!r}") from None
        raw_labels.append(row[pos[schema.label_col]].strip())
        raw_groups.append(row[pos[schema.group_col]].strip())
    try:
        lab = np.array([float(v) for v in raw_labels])
    except ValueError:
        levels = sorted(set(raw_labels))
        if len(levels) > 2:
            raise DataError(f"{path}: label column has {len(levels)} levels") from None
        lab = np.array([1.0 if v == levels[-1] and len(levels) == 2 else 0.0 for v in raw_labels])
    y = _remap_labels(lab, str(path))
    g, _ = _remap_groups(raw_groups, numeric=False)
    return Dataset(x, y, g, tuple(feature_cols))


def write_libsvm(data: Dataset, path, group_path=None) -> None:
    """Write features/labels in libsvm format (17 significant digits).

    Group ids go to ``group_path`` (one per line) when given.
    """
    with Path(path).open("w") as fh:
        for r in range(data.n):
            parts = ["+1" if data.labels[r] > 0 else "-1"]
            for j in np.flatnonzero(data.features[r]):
                parts.append(f"{j + 1}:{data.features[r, j]:.17g}")
            fh.write(" ".join(parts) + "\n")
    if group_path is not None:
        with Path(group_path).open("w") as fh:
            fh.writelines(f"{int(k)}\n" for k in data.groups)


# ---------------------------------------------------------------------------
# splitting and partitioning
# ---------------------------------------------------------------------------

def split_indices(n: int, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Shuffle 0..n-1 with the seeded PRNG, then cut at floor boundaries."""
    if n < 3:
        raise DataError("need at least 3 rows to split")
    perm = Xoshiro256(spec.seed).permutation(n)
    a = int(np.floor(spec.train_frac * n + 1e-9))
    b = int(np.floor((spec.train_frac + spec.val_frac) * n + 1e-9))
    return perm[:a], perm[a:b], perm[b:]


def split(data: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset, Dataset]:
    parts = split_indices(data.n, spec)
    out = []
    for name, idx in zip(("train", "validation", "test"), parts):
        present = np.unique(data.groups[idx])
        if len(present) < data.n_groups:
            raise DataError(f"{name} split has no members of some group; choose another seed")
        out.append(data.subset(idx))
    return tuple(out)


def partition_by_group(data: Dataset) -> GroupPartition:
    return GroupPartition({k: np.flatnonzero(data.groups == k)
                           for k in range(1, data.n_groups + 1)})
