"""Gaussian process regression for interpolating sparse RF samples.

Squared-exponential kernel with one length scale per axis::

    k(a, b) = sf2 * exp(-0.5 * sum(((a_i - b_i) / l_i) ** 2))

Values stay in the dB domain. Fitting factorizes ``K + sn2 * I`` with a
dense Cholesky decomposition, so sample sets are capped at ``MAX_SAMPLES``.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import ConditioningError

__all__ = [
    "MAX_SAMPLES",
    "LENGTH_SCALE_GRID",
    "NOISE_VAR_GRID",
    "SampleSet",
    "Hyperparams",
    "GprModel",
    "se_kernel",
    "fit",
    "predict",
    "log_marginal_likelihood",
    "fit_hyperparams",
]

MAX_SAMPLES = 2000
LENGTH_SCALE_GRID = tuple(np.logspace(math.log10(5.0), math.log10(500.0), 8))
NOISE_VAR_GRID = tuple(np.logspace(-2.0, 1.0, 6))
_JITTER_STEPS = (1e-8, 1e-7, 1e-6)


@dataclass(frozen=True)
class SampleSet:
    """Points of shape (n, d) with one finite value each."""

    points: np.ndarray
    values: np.ndarray
    unit: str = "dBm"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        vals = np.asarray(self.values, dtype=float).ravel()
        if len(vals) < 1 or pts.shape[0] != len(vals):
            raise ValueError("points and values must have the same nonzero length")
        if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(pts))):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)

    @property
    def dim(self):
        return self.points.shape[1]


@dataclass(frozen=True)
class Hyperparams:
    length_scales: tuple
    signal_var: float
    noise_var: float
    prior_mean: float = 0.0
    # set when the data carried no signal and a flat prior was substituted
    flat: bool = False

    def __post_init__(self):
        object.__setattr__(self, "length_scales", tuple(float(x) for x in self.length_scales))
        if any(not x > 0 for x in self.length_scales):
            raise ValueError("length scales must be positive")
        if self.signal_var < 0 or self.noise_var < 0:
            raise ValueError("variances must be non-negative")


@dataclass(frozen=True)
class GprModel:
    hyperparams: Hyperparams
    points: np.ndarray
    values: np.ndarray
    chol: np.ndarray  # lower-triangular L with L L^T = K + (sn2 + jitter) I
    alpha: np.ndarray  # (K + sn2 I)^-1 (y - prior_mean)
    jitter: float


def _sq_dists(a, b, length_scales):
    ls = np.asarray(length_scales, dtype=float)
    d = (a[:, None, :] - b[None, :, :]) / ls
    return np.einsum("ijk,ijk->ij", d, d)


def se_kernel(a, b, length_scales, signal_var):
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    return signal_var * np.exp(-0.5 * _sq_dists(a, b, length_scales))


def _check_size(n):
    if n > MAX_SAMPLES:
        raise ValueError(f"{n} samples exceed the dense-factorization cap of {MAX_SAMPLES}")


def _factorize(k, signal_var):
    scale = signal_var if signal_var > 0 else 1.0
    for jitter in (0.0,) + tuple(j * scale for j in _JITTER_STEPS):
        try:
            a = k + jitter * np.eye(len(k)) if jitter else k
            return linalg.cholesky(a, lower=True), jitter
        except linalg.LinAlgError:
            continue
    raise ConditioningError("kernel matrix is not positive definite even after jitter")


def fit(samples, hyperparams):
    """Condition a GP prior on `samples`."""
    hp = hyperparams
    x, y = samples.points, samples.values
    _check_size(len(y))
    if len(hp.length_scales) != samples.dim:
        raise ValueError(f"need {samples.dim} length scales, got {len(hp.length_scales)}")
    if hp.noise_var == 0.0:
        # exact interpolation through two different values at one point is impossible
        _, inv, counts = np.unique(x, axis=0, return_inverse=True, return_counts=True)
        for g in np.flatnonzero(counts > 1):
            if np.ptp(y[inv.ravel() == g]) > 0:
                raise ConditioningError("coincident samples with different values and zero noise")
    k = se_kernel(x, x, hp.length_scales, hp.signal_var)
    k[np.diag_indices_from(k)] += hp.noise_var
    chol, jitter = _factorize(k, hp.signal_var)
    alpha = linalg.cho_solve((chol, True), y - hp.prior_mean)
    return GprModel(hp, x, y, chol, alpha, jitter)


def predict(model, query):
    """Posterior mean and variance at `query` points, shape (m, d)."""
    hp = model.hyperparams
    q = np.asarray(query, dtype=float)
    if q.ndim == 1:
        q = q.reshape(-1, model.points.shape[1])
    ks = se_kernel(q, model.points, hp.length_scales, hp.signal_var)
    mean = hp.prior_mean + ks @ model.alpha
    v = linalg.solve_triangular(model.chol, ks.T, lower=True)
    var = hp.signal_var - np.einsum("ij,ij->j", v, v)
    return mean, np.maximum(var, 0.0)


def log_marginal_likelihood(samples, hyperparams):
    hp = hyperparams
    y = samples.values - hp.prior_mean
    k = se_kernel(samples.points, samples.points, hp.length_scales, hp.signal_var)
    k[np.diag_indices_from(k)] += hp.noise_var
    try:
        chol = linalg.cholesky(k, lower=True)
    except linalg.LinAlgError:
        return -math.inf
    alpha = linalg.cho_solve((chol, True), y)
    n = len(y)
    return float(-0.5 * y @ alpha - np.log(np.diag(chol)).sum() - 0.5 * n * math.log(2 * math.pi))


def fit_hyperparams(samples):
    """Grid-search length scales and noise variance by marginal likelihood.

    Length scales range over ``LENGTH_SCALE_GRID`` on every axis with spread
    (axes where all samples coincide keep the smallest value), the noise
    variance over ``NOISE_VAR_GRID``. The signal variance and prior mean are
    the sample variance and mean. Ties go to the smallest length scales.
    Constant data returns a flagged flat prior.
    """
    y = samples.values
    if len(y) < 4:
        raise ValueError("hyperparameter search needs at least 4 samples")
    _check_size(len(y))
    mean = float(np.mean(y))
    var = float(np.var(y))
    d = samples.dim
    if var == 0.0:
        warnings.warn("constant sample values; returning a flat prior", RuntimeWarning, stacklevel=2)
        return Hyperparams((LENGTH_SCALE_GRID[-1],) * d, 0.0, NOISE_VAR_GRID[0], mean, flat=True)

    spread = np.ptp(samples.points, axis=0) > 0
    axis_grids = [LENGTH_SCALE_GRID if spread[i] else LENGTH_SCALE_GRID[:1] for i in range(d)]
    x = samples.points
    yc = y - mean
    n = len(y)
    # per-axis scaled squared distances, reused across the grid
    per_axis = [np.subtract.outer(x[:, i], x[:, i]) ** 2 for i in range(d)]
    best = None
    for ls in itertools.product(*axis_grids):
        q = sum(p / (s * s) for p, s in zip(per_axis, ls))
        base = var * np.exp(-0.5 * q)
        for sn2 in NOISE_VAR_GRID:
            k = base.copy()
            k[np.diag_indices_from(k)] += sn2
            try:
                chol = linalg.cholesky(k, lower=True)
            except linalg.LinAlgError:
                continue
            alpha = linalg.cho_solve((chol, True), yc)
            lml = float(-0.5 * yc @ alpha - np.log(np.diag(chol)).sum()
                        - 0.5 * n * math.log(2 * math.pi))
            # strict '>' keeps the first (smallest) grid point on ties
            if best is None or lml > best[0]:
                best = (lml, ls, sn2)
    if best is None:
        raise ConditioningError("no grid point produced a positive definite kernel")
    return Hyperparams(best[1], var, best[2], mean)
