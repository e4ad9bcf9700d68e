"""Expression-matrix ingestion and preprocessing.

Covers the path from a raw samples x variables TSV to a similarity matrix:
missing-value and low-variation filtering, nearest-neighbor imputation,
standardization, and Pearson/Spearman correlation. Sample standard deviation
(divisor N-1) is used everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .graph import SimilarityMatrix
from .ioutils import fmt_float, write_text_atomic

__all__ = [
    "ExpressionMatrix",
    "PreprocessReport",
    "load_expression",
    "save_expression",
    "filter_variables",
    "knn_impute",
    "standardize",
    "standardize_columns",
    "similarity_matrix",
]


@dataclass(frozen=True)
class ExpressionMatrix:
    """N samples x p variables of real values with a missing-value mask.

    ``values`` holds NaN wherever ``mask`` is True (missing); the two are
    kept consistent at construction.
    """

    values: np.ndarray
    mask: np.ndarray
    variable_ids: tuple[str, ...]
    sample_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float)
        m = np.array(self.mask, dtype=bool)
        if v.ndim != 2:
            raise ValueError("values must be 2-d (samples x variables)")
        if m.shape != v.shape:
            raise ValueError("mask shape must match values shape")
        if v.shape != (len(self.sample_ids), len(self.variable_ids)):
            raise ValueError("id lists must match the matrix dimensions")
        if len(set(self.variable_ids)) != len(self.variable_ids):
            raise ValueError("duplicate variable ids")
        if len(set(self.sample_ids)) != len(self.sample_ids):
            raise ValueError("duplicate sample ids")
        nan_at = np.isnan(v)
        if not np.array_equal(nan_at, m):
            v = v.copy()
            v[m] = np.nan
            if np.isnan(v[~m]).any():
                raise ValueError("NaN value present in an unmasked cell")
        v.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "mask", m)
        object.__setattr__(self, "variable_ids", tuple(self.variable_ids))
        object.__setattr__(self, "sample_ids", tuple(self.sample_ids))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class PreprocessReport:
    """What a preprocessing step removed or changed, with parameters echoed."""

    removed_missing: tuple[tuple[str, float], ...] = ()
    removed_low_sd: tuple[tuple[str, float], ...] = ()
    imputed_cells: int = 0
    parameters: dict = field(default_factory=dict)

    def to_text(self) -> str:
        lines = []
        for key in sorted(self.parameters):
            lines.append(f"{key}\t{self.parameters[key]}")
        lines.append(
            "removed_missing\t"
            + ",".join(f"{i}:{fmt_float(f)}" for i, f in self.removed_missing)
        )
        lines.append(
            "removed_low_sd\t"
            + ",".join(f"{i}:{fmt_float(s)}" for i, s in self.removed_low_sd)
        )
        lines.append(f"imputed_cells\t{self.imputed_cells}")
        return "\n".join(lines) + "\n"


def load_expression(path) -> ExpressionMatrix:
    """Parse a TSV with a header of variable ids and sample ids in column 1.

    Empty cells are missing values. Ragged rows, duplicate ids and
    non-numeric cells raise with the offending line number.
    """
    with open(path, encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh]
    lines = [l for l in lines if l != ""]
    if len(lines) < 2:
        raise ValueError(f"{path}: need a header and at least one sample row")
    header = lines[0].split("\t")
    variable_ids = header[1:]
    if not variable_ids:
        raise ValueError(f"{path}: header has no variable ids")
    if len(set(variable_ids)) != len(variable_ids):
        dup = sorted({v for v in variable_ids if variable_ids.count(v) > 1})
        raise ValueError(f"{path}: duplicate variable id {dup[0]!r}")
    p = len(variable_ids)
    sample_ids = []
    values = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != p + 1:
            raise ValueError(
                f"{path}: line {lineno} has {len(fields)} fields, expected {p + 1}"
            )
        sample_ids.append(fields[0])
        row = np.empty(p)
        for c, cell in enumerate(fields[1:]):
            if cell == "":
                row[c] = np.nan
            else:
                try:
                    row[c] = float(cell)
                except ValueError:
                    raise ValueError(
                        f"{path}: non-numeric value {cell!r} at line {lineno}, "
                        f"column {c + 2}"
                    ) from None
        values.append(row)
    if len(set(sample_ids)) != len(sample_ids):
        dup = sorted({s for s in sample_ids if sample_ids.count(s) > 1})
        raise ValueError(f"{path}: duplicate sample id {dup[0]!r}")
    vals = np.vstack(values)
    return ExpressionMatrix(vals, np.isnan(vals), tuple(variable_ids), tuple(sample_ids))


def save_expression(x: ExpressionMatrix, path, sample_column: str = "sample") -> None:
    """Write the matrix back out as TSV; missing cells become empty fields."""
    lines = ["\t".join((sample_column,) + x.variable_ids)]
    for i, sid in enumerate(x.sample_ids):
        cells = [
            "" if x.mask[i, j] else fmt_float(x.values[i, j]) for j in range(x.p)
        ]
        lines.append("\t".join([sid] + cells))
    write_text_atomic(path, "\n".join(lines) + "\n")


def _observed_sd(x: ExpressionMatrix) -> np.ndarray:
    """Sample standard deviation per variable over observed cells only."""
    out = np.zeros(x.p)
    for j in range(x.p):
        col = x.values[~x.mask[:, j], j]
        if col.size >= 2:
            out[j] = float(np.std(col, ddof=1))
    return out


def filter_variables(
    x: ExpressionMatrix,
    max_missing_frac: float = 0.2,
    min_sd: float = 0.4,
) -> tuple[ExpressionMatrix, PreprocessReport]:
    """Drop variables with too many missing values, then low-variation ones.

    A variable goes if its missing fraction exceeds ``max_missing_frac``, or
    failing that, if its standard deviation over observed cells is strictly
    below ``min_sd``.
    """
    if not 0.0 <= max_missing_frac <= 1.0:
        raise ValueError("max_missing_frac must lie in [0, 1]")
    if min_sd < 0.0:
        raise ValueError("min_sd must be non-negative")
    frac = x.mask.mean(axis=0)
    too_missing = frac > max_missing_frac
    sd = _observed_sd(x)
    too_flat = ~too_missing & (sd < min_sd)
    keep = ~(too_missing | too_flat)
    if not keep.any():
        raise ValueError("all variables removed by the filters")
    report = PreprocessReport(
        removed_missing=tuple(
            (x.variable_ids[j], float(frac[j])) for j in np.nonzero(too_missing)[0]
        ),
        removed_low_sd=tuple(
            (x.variable_ids[j], float(sd[j])) for j in np.nonzero(too_flat)[0]
        ),
        parameters={"max_missing_frac": max_missing_frac, "min_sd": min_sd},
    )
    kept = np.nonzero(keep)[0]
    out = ExpressionMatrix(
        x.values[:, kept],
        x.mask[:, kept],
        tuple(x.variable_ids[j] for j in kept),
        x.sample_ids,
    )
    return out, report


def knn_impute(x: ExpressionMatrix, k: int = 10) -> tuple[ExpressionMatrix, PreprocessReport]:
    """Fill each missing cell with the mean of its k nearest variables.

    Nearness is Euclidean distance over mutually observed samples; for a cell
    (sample i, variable g) only neighbor variables observed at sample i count.
    Observed cells are never touched.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not x.mask.any():
        return x, PreprocessReport(parameters={"k": k})
    observed = ~x.mask
    filled = np.where(x.mask, 0.0, x.values)
    obs = observed.astype(float)
    sq = filled**2
    # sum over mutually observed samples of (a - b)^2, all variable pairs
    d2 = sq.T @ obs + obs.T @ sq - 2.0 * (filled.T @ filled)
    shared = obs.T @ obs
    np.fill_diagonal(d2, np.inf)
    d2 = np.where(shared > 0, np.maximum(d2, 0.0), np.inf)
    dist = np.sqrt(d2)

    new_values = x.values.copy()
    imputed = 0
    for g in range(x.p):
        rows = np.nonzero(x.mask[:, g])[0]
        if rows.size == 0:
            continue
        order = np.lexsort((np.arange(x.p), dist[g]))
        for i in rows:
            picked = []
            for h in order:
                if np.isinf(dist[g, h]):
                    break
                if observed[i, h]:
                    picked.append(x.values[i, h])
                    if len(picked) == k:
                        break
            if not picked:
                raise ValueError(
                    f"cannot impute variable {x.variable_ids[g]!r} at sample "
                    f"{x.sample_ids[i]!r}: no neighbor observed there"
                )
            new_values[i, g] = float(np.mean(picked))
            imputed += 1
    out = ExpressionMatrix(
        new_values, np.zeros_like(x.mask), x.variable_ids, x.sample_ids
    )
    report = PreprocessReport(imputed_cells=imputed, parameters={"k": k})
    return out, report


def standardize_columns(values: np.ndarray) -> np.ndarray:
    """Center each column to mean 0 and scale to sample sd 1 (divisor N-1)."""
    values = np.asarray(values, dtype=float)
    mean = values.mean(axis=0)
    sd = values.std(axis=0, ddof=1)
    zero = np.nonzero(sd == 0)[0]
    if zero.size:
        raise ValueError(f"variable at column {zero[0]} has zero standard deviation")
    return (values - mean) / sd


def standardize(x: ExpressionMatrix) -> ExpressionMatrix:
    """Standardize every variable; requires a complete (imputed) matrix."""
    if x.mask.any():
        raise ValueError("expression matrix has missing values; impute first")
    sd = x.values.std(axis=0, ddof=1)
    zero = np.nonzero(sd == 0)[0]
    if zero.size:
        raise ValueError(
            f"variable {x.variable_ids[int(zero[0])]!r} has zero standard deviation"
        )
    vals = standardize_columns(x.values)
    return ExpressionMatrix(vals, np.zeros_like(x.mask), x.variable_ids, x.sample_ids)


def similarity_matrix(
    x: ExpressionMatrix, method: str = "pearson", absolute: bool = True
) -> SimilarityMatrix:
    """Pairwise correlation of variables as a similarity matrix.

    ``method`` is "pearson" or "spearman" (Pearson on average ranks, ties
    averaged). With ``absolute`` (the default, matching co-expression usage)
    the absolute correlation is taken; without it any negative correlation is
    rejected because similarities must lie in [0, 1].
    """
    if method not in ("pearson", "spearman"):
        raise ValueError(f"unknown correlation method {method!r}")
    if x.mask.any():
        raise ValueError("expression matrix has missing values; impute first")
    if x.n < 2:
        raise ValueError("need at least 2 samples for correlation")
    vals = x.values
    if method == "spearman":
        vals = rankdata(vals, axis=0, method="average")
    sd = vals.std(axis=0, ddof=1)
    zero = np.nonzero(sd == 0)[0]
    if zero.size:
        raise ValueError(
            f"variable {x.variable_ids[int(zero[0])]!r} has zero variance"
        )
    r = np.corrcoef(vals, rowvar=False)
    r = (r + r.T) / 2.0
    r = np.clip(r, -1.0, 1.0)
    if absolute:
        r = np.abs(r)
    elif r.min() < 0:
        i, j = np.argwhere(r < 0)[0]
        raise ValueError(
            f"negative correlation at ({i}, {j}); similarities must lie in "
            "[0, 1] (use absolute=True)"
        )
    np.fill_diagonal(r, 0.0)
    return SimilarityMatrix(r, x.variable_ids)
