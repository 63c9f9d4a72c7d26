"""Best-split search shared by the tree-based learners.

Training data stays sparse; a column accessor densifies one block of
feature columns at a time, so memory stays bounded even for wide
vocabularies. Gini (classification) and squared-error (regression)
criteria share the same sort-and-scan sweep. Tie-breaks are fixed
(first candidate feature, then lowest threshold) so training is fully
deterministic.
"""

from __future__ import annotations

import numpy as np

from ..features import SparseVector

_BLOCK = 256  # feature columns densified per scan


class Columns:
    """Column-major view of a list of sparse vectors.

    Rows passed to block() may repeat (bootstrap samples); each occurrence
    gets the stored value.
    """

    def __init__(self, X: list[SparseVector], n_features: int):
        self.n_rows = len(X)
        self.n_features = n_features
        self._cols: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        builder: dict[int, tuple[list[int], list[float]]] = {}
        for row, vec in enumerate(X):
            for index, weight in vec.entries:
                if index >= n_features:
                    raise ValueError(f"feature index {index} outside 0..{n_features - 1}")
                rows_list, values = builder.setdefault(index, ([], []))
                rows_list.append(row)
                values.append(weight)
        for index, (rows_list, values) in builder.items():
            self._cols[index] = (np.asarray(rows_list), np.asarray(values))

    def block(self, features: np.ndarray, rows: np.ndarray) -> np.ndarray:
        """Dense (len(rows), len(features)) block of selected columns."""
        out = np.zeros((len(rows), len(features)))
        full = np.zeros(self.n_rows)
        for j, f in enumerate(features):
            col = self._cols.get(int(f))
            if col is None:
                continue
            col_rows, col_values = col
            full[col_rows] = col_values
            out[:, j] = full[rows]
            full[col_rows] = 0.0
        return out

    def value(self, feature: int, row: int) -> float:
        col = self._cols.get(feature)
        if col is None:
            return 0.0
        hit = np.searchsorted(col[0], row)
        if hit < len(col[0]) and col[0][hit] == row:
            return float(col[1][hit])
        return 0.0


def best_split_gini(
    columns: Columns,
    rows: np.ndarray,
    codes: np.ndarray,
    n_classes: int,
    features: np.ndarray,
) -> tuple[int, float] | None:
    """Feature/threshold minimizing weighted Gini impurity, or None."""
    n = len(rows)
    y = codes[rows]
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = 1.0
    total = onehot.sum(axis=0)

    best: tuple[float, int, float] | None = None  # (impurity, candidate rank, threshold)
    for start in range(0, len(features), _BLOCK):
        chunk = features[start : start + _BLOCK]
        V = columns.block(chunk, rows)
        order = np.argsort(V, axis=0, kind="stable")
        Vs = np.take_along_axis(V, order, axis=0)
        valid = Vs[:-1] < Vs[1:]
        if not valid.any():
            continue
        left = np.cumsum(onehot[order], axis=0)[:-1]  # (n-1, f, C)
        left_n = np.arange(1, n)[:, None]
        right_n = n - left_n
        right = total[None, None, :] - left
        gini_left = 1.0 - np.sum((left / left_n[..., None]) ** 2, axis=2)
        gini_right = 1.0 - np.sum((right / right_n[..., None]) ** 2, axis=2)
        weighted = (left_n * gini_left + right_n * gini_right) / n
        weighted[~valid] = np.inf
        flat = np.argmin(weighted, axis=0)
        for j in range(len(chunk)):
            i = flat[j]
            score = weighted[i, j]
            if not np.isfinite(score):
                continue
            threshold = (Vs[i, j] + Vs[i + 1, j]) / 2.0
            key = (float(score), start + j, float(threshold))
            if best is None or key < best:
                best = key
    if best is None:
        return None
    _, rank, threshold = best
    return int(features[rank]), threshold


def best_split_sse(
    columns: Columns,
    rows: np.ndarray,
    values: np.ndarray,
    features: np.ndarray,
) -> tuple[int, float] | None:
    """Feature/threshold minimizing total squared error, or None."""
    n = len(rows)
    r = values[rows]
    total_sum = r.sum()
    total_sq = (r * r).sum()

    best: tuple[float, int, float] | None = None
    for start in range(0, len(features), _BLOCK):
        chunk = features[start : start + _BLOCK]
        V = columns.block(chunk, rows)
        order = np.argsort(V, axis=0, kind="stable")
        Vs = np.take_along_axis(V, order, axis=0)
        valid = Vs[:-1] < Vs[1:]
        if not valid.any():
            continue
        rs = r[order]
        cum = np.cumsum(rs, axis=0)[:-1]
        cum_sq = np.cumsum(rs * rs, axis=0)[:-1]
        left_n = np.arange(1, n)[:, None]
        right_n = n - left_n
        sse_left = cum_sq - cum**2 / left_n
        right_sum = total_sum - cum
        sse_right = (total_sq - cum_sq) - right_sum**2 / right_n
        sse = sse_left + sse_right
        sse[~valid] = np.inf
        flat = np.argmin(sse, axis=0)
        for j in range(len(chunk)):
            i = flat[j]
            score = sse[i, j]
            if not np.isfinite(score):
                continue
            threshold = (Vs[i, j] + Vs[i + 1, j]) / 2.0
            key = (float(score), start + j, float(threshold))
            if best is None or key < best:
                best = key
    if best is None:
        return None
    _, rank, threshold = best
    return int(features[rank]), threshold
