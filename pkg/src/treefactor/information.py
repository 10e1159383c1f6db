"""Entropy, mutual information, and maximal correlation for finite joints.

All entropies are in nats with the 0*log(0) = 0 convention.  Quantities
derived from empirically sampled joints carry a nonparametric bootstrap
standard error; exact joints carry stderr 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Literal, Optional, Sequence

import numpy as np

from .errors import (
    BudgetExceededError,
    NonConvergenceError,
    UndefinedQuantityError,
)

SUM_TOLERANCE = 1e-12
DEFAULT_BOOTSTRAP_RESAMPLES = 200
DEFAULT_TENSOR_BUDGET = 2**24
_BOOTSTRAP_SALT = 0xB005


@dataclass(frozen=True)
class Provenance:
    kind: Literal["exact", "empirical"]
    n_samples: int = 0
    seed: Optional[int] = None

    def to_json_obj(self):
        if self.kind == "exact":
            return {"kind": "exact"}
        return {"kind": "empirical", "n_samples": self.n_samples, "seed": self.seed}


EXACT = Provenance("exact")


def _as_prob_vector(values) -> np.ndarray:
    p = np.asarray(values, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("probabilities must form a nonempty vector")
    if np.any(p < 0):
        raise ValueError(f"negative probability entry: min={p.min()}")
    if abs(p.sum() - 1.0) > SUM_TOLERANCE:
        raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
    return p


@dataclass(frozen=True)
class Distribution:
    """A probability vector over a finite alphabet."""

    probabilities: tuple[float, ...]

    def __post_init__(self):
        _as_prob_vector(self.probabilities)

    @property
    def as_array(self) -> np.ndarray:
        return np.asarray(self.probabilities)


@dataclass(frozen=True)
class JointDistribution:
    """An m x n joint probability matrix with provenance.

    Empirical joints also keep their integer count matrix so that
    downstream statistics can attach bootstrap standard errors.
    """

    matrix: tuple[tuple[float, ...], ...]
    provenance: Provenance = EXACT
    counts: Optional[tuple[tuple[int, ...], ...]] = None

    def __post_init__(self):
        m = self.as_array
        if m.ndim != 2 or m.size == 0:
            raise ValueError("joint matrix must be a nonempty 2-d array")
        if np.any(m < 0):
            raise ValueError("joint matrix has a negative entry")
        if abs(m.sum() - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"joint matrix sums to {m.sum()!r}, not 1")

    @classmethod
    def from_array(
        cls,
        matrix,
        provenance: Provenance = EXACT,
        counts: Optional[np.ndarray] = None,
    ) -> "JointDistribution":
        arr = np.asarray(matrix, dtype=float)
        return cls(
            tuple(tuple(row) for row in arr),
            provenance,
            None if counts is None else tuple(tuple(int(c) for c in row) for row in counts),
        )

    @property
    def as_array(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=float)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.matrix), len(self.matrix[0]))

    def marginal_x(self) -> Distribution:
        return Distribution(tuple(self.as_array.sum(axis=1)))

    def marginal_y(self) -> Distribution:
        return Distribution(tuple(self.as_array.sum(axis=0)))

    def transposed(self) -> "JointDistribution":
        counts = None
        if self.counts is not None:
            counts = np.asarray(self.counts).T
        return JointDistribution.from_array(self.as_array.T, self.provenance, counts)

    def to_json(self) -> str:
        payload = {
            "schema": 1,
            "alphabetX": list(range(self.shape[0])),
            "alphabetY": list(range(self.shape[1])),
            "matrix": [list(row) for row in self.matrix],
            "provenance": self.provenance.to_json_obj(),
        }
        return json.dumps(payload, sort_keys=True)


@dataclass(frozen=True)
class MeasuredQuantity:
    """A value in nats plus the uncertainty of how it was obtained."""

    value: float
    stderr: float = 0.0
    method: str = "plug-in"

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be nonnegative")

    def __str__(self) -> str:
        return f"{self.value:.9g} ± {self.stderr:.3g} (nats)"


def _plugin_entropy(p: np.ndarray) -> float:
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())


def _bootstrap_stderr(J: JointDistribution, statistic: Callable[[np.ndarray], float],
                      resamples: int = DEFAULT_BOOTSTRAP_RESAMPLES) -> float:
    """Std of the statistic over multinomial resamples of the counts.

    Resamples on which the statistic is undefined (possible for tiny
    sample counts) are skipped.
    """
    prov = J.provenance
    if prov.kind != "empirical" or prov.n_samples <= 0:
        return 0.0
    shape = J.shape
    flat = J.as_array.ravel()
    flat = flat / flat.sum()
    rng = np.random.default_rng([_BOOTSTRAP_SALT, prov.seed if prov.seed is not None else 0])
    draws = rng.multinomial(prov.n_samples, flat, size=resamples)
    vals = []
    for row in draws:
        try:
            vals.append(statistic(row.reshape(shape) / prov.n_samples))
        except UndefinedQuantityError:
            continue
    if len(vals) < 2:
        raise UndefinedQuantityError(
            "statistic undefined on nearly all bootstrap resamples"
        )
    return float(np.std(vals, ddof=1))


def _measured(J: JointDistribution, statistic: Callable[[np.ndarray], float]) -> MeasuredQuantity:
    value = statistic(J.as_array)
    return MeasuredQuantity(value, _bootstrap_stderr(J, statistic), "plug-in")


def entropy(p: Distribution) -> MeasuredQuantity:
    """Shannon entropy sum(-p log p) in nats."""
    return MeasuredQuantity(_plugin_entropy(p.as_array), 0.0, "plug-in")


def joint_entropy(J: JointDistribution) -> MeasuredQuantity:
    return _measured(J, lambda m: _plugin_entropy(m.ravel()))


def mutual_information(J: JointDistribution) -> MeasuredQuantity:
    def stat(m: np.ndarray) -> float:
        return (
            _plugin_entropy(m.sum(axis=1))
            + _plugin_entropy(m.sum(axis=0))
            - _plugin_entropy(m.ravel())
        )

    return _measured(J, stat)


def conditional_entropy(J: JointDistribution, given: Literal["x", "y"] = "y") -> MeasuredQuantity:
    """H(X|Y) for given="y" (the default), H(Y|X) for given="x"."""
    axis = 0 if given == "y" else 1

    def stat(m: np.ndarray) -> float:
        return _plugin_entropy(m.ravel()) - _plugin_entropy(m.sum(axis=axis))

    return _measured(J, stat)


def normalized_mi(J: JointDistribution, marginal: Literal["x", "y"] = "y") -> MeasuredQuantity:
    """I(X;Y) / H of the designated marginal.

    Raises UndefinedQuantityError when that marginal has zero entropy:
    the ratio has no value there, which is different from being 0.
    """
    h_axis = 1 if marginal == "x" else 0

    def stat(m: np.ndarray) -> float:
        h = _plugin_entropy(m.sum(axis=h_axis))
        if h == 0.0:
            raise UndefinedQuantityError("normalized MI undefined: marginal entropy is 0")
        i = (
            _plugin_entropy(m.sum(axis=1))
            + _plugin_entropy(m.sum(axis=0))
            - _plugin_entropy(m.ravel())
        )
        return i / h

    # Trigger the undefined check on the point estimate before bootstrap.
    stat(J.as_array)
    return _measured(J, stat)


def empirical_joint(
    samples: Sequence[tuple[int, int]],
    seed: Optional[int],
    shape: Optional[tuple[int, int]] = None,
) -> JointDistribution:
    """Plug-in frequency matrix from (x, y) state-index pairs."""
    if len(samples) == 0:
        raise ValueError("empirical joint needs at least one sample")
    arr = np.asarray(samples, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("samples must be pairs")
    if shape is None:
        shape = (int(arr[:, 0].max()) + 1, int(arr[:, 1].max()) + 1)
    counts = np.zeros(shape, dtype=np.int64)
    np.add.at(counts, (arr[:, 0], arr[:, 1]), 1)
    n = len(samples)
    return JointDistribution.from_array(
        counts / n, Provenance("empirical", n, seed), counts
    )


def joint_from_counts(counts: np.ndarray, seed: Optional[int]) -> JointDistribution:
    counts = np.asarray(counts, dtype=np.int64)
    n = int(counts.sum())
    if n <= 0:
        raise ValueError("counts must contain at least one sample")
    return JointDistribution.from_array(counts / n, Provenance("empirical", n, seed), counts)


def correlation_of_functions(J: JointDistribution, f: Sequence[float], g: Sequence[float]) -> float:
    """Pearson correlation of f(X) and g(Y) under the joint law."""
    m = J.as_array
    fv = np.asarray(f, dtype=float)
    gv = np.asarray(g, dtype=float)
    if fv.shape != (m.shape[0],) or gv.shape != (m.shape[1],):
        raise ValueError("value maps must match the joint's alphabet sizes")
    px = m.sum(axis=1)
    py = m.sum(axis=0)
    ef = float(px @ fv)
    eg = float(py @ gv)
    var_f = float(px @ (fv - ef) ** 2)
    var_g = float(py @ (gv - eg) ** 2)
    if var_f <= 0 or var_g <= 0:
        raise UndefinedQuantityError("correlation undefined: a function has zero variance")
    cov = float((fv - ef) @ m @ (gv - eg))
    return cov / math.sqrt(var_f * var_g)


def _normalized_matrix(m: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # Drop zero-probability states: correlations ignore null sets.
    px = m.sum(axis=1)
    py = m.sum(axis=0)
    m = m[px > 0][:, py > 0]
    px = px[px > 0]
    py = py[py > 0]
    q = m / np.sqrt(np.outer(px, py))
    return q, px, py


def maximal_correlation(
    J: JointDistribution, tol: float = 1e-10, max_iter: int = 100_000
) -> float:
    """Largest correlation achievable by functions of the two coordinates.

    Equals the second singular value of the marginal-normalized joint
    matrix.  The known top pair (singular value 1, vectors sqrt of the
    marginals) is deflated from the matrix itself, then the remaining top
    singular value is found by power iteration on the Gram matrix.
    """
    q, px, py = _normalized_matrix(J.as_array)
    if min(q.shape) < 2:
        return 0.0
    deflated = q - np.outer(np.sqrt(px), np.sqrt(py))
    gram = deflated.T @ deflated
    v = np.random.default_rng(0xA1FA).standard_normal(q.shape[1])
    v /= np.linalg.norm(v)
    lam = float(v @ gram @ v)
    for _ in range(max_iter):
        w = gram @ v
        norm = np.linalg.norm(w)
        if norm < 1e-300:
            return 0.0
        v = w / norm
        new_lam = float(v @ gram @ v)
        if abs(new_lam - lam) <= tol * max(1.0, abs(new_lam)) * 1e-3:
            lam = new_lam
            break
        lam = new_lam
    else:
        raise NonConvergenceError("power iteration did not converge", max_iter)
    return min(1.0, math.sqrt(max(lam, 0.0)))


def tensor_power(J: JointDistribution, n: int, budget: int = DEFAULT_TENSOR_BUDGET) -> JointDistribution:
    """Joint law of n independent copies; entropies scale by n."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    m = J.as_array
    size = (m.shape[0] ** n) * (m.shape[1] ** n)
    if size > budget:
        raise BudgetExceededError(f"tensor power has {size} entries, over budget {budget}")
    out = m
    for _ in range(n - 1):
        out = np.kron(out, m)
    return JointDistribution.from_array(out, EXACT)


def binary_symmetric_mi(q: float) -> float:
    """MI in nats of a +-1 symmetric pair with uniform marginals and
    agreement probability q."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    hb = 0.0
    for p in (q, 1.0 - q):
        if p > 0:
            hb -= p * math.log(p)
    return math.log(2.0) - hb


def symmetric_binary_joint(q: float) -> JointDistribution:
    """Exact joint of the +-1 pair above, states ordered (+1, -1)."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    return JointDistribution.from_array(
        [[q / 2, (1 - q) / 2], [(1 - q) / 2, q / 2]], EXACT
    )
