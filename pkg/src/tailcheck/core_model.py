"""Pareto-type tail model, threshold reduction and the exponent MLE.

Exceedances of a threshold ``x0`` are rescaled to ``T = X/x0 - 1``.  Under a
regularly varying tail with exponent ``theta`` the conditional law of ``T`` is

    H_theta(t) = 1 - (1 + t)**(-theta),   t >= 0,

and the maximum likelihood estimate of ``theta`` is the Hill estimator with the
threshold in place of the k-th order statistic.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DEFAULT_MIN_TAIL",
    "NoExceedancesError",
    "DegenerateSampleError",
    "SmallTailWarning",
    "TailSample",
    "ParetoTailModel",
    "ReferenceModel",
    "make_tail_sample",
    "fit_exponent_mle",
    "hill_estimator",
    "h_cdf",
    "h_pdf",
    "h_quantile",
    "fisher_information_h",
]

DEFAULT_MIN_TAIL = 40


class NoExceedancesError(ValueError):
    """No observation lies strictly above the threshold."""


class DegenerateSampleError(ZeroDivisionError):
    """All exceedances sit at the threshold, so the log-sum vanishes."""


class SmallTailWarning(UserWarning):
    pass


@dataclass(frozen=True)
class TailSample:
    """Exceedances of a threshold, rescaled and sorted ascending.

    Attributes
    ----------
    x0 : float
        Threshold in the units of the raw data.
    n : int
        Number of raw observations.
    m : int
        Number of observations strictly above ``x0``.
    t_values : ndarray
        Sorted ``X/x0 - 1`` for every raw ``X > x0``.  Read-only.
    warning : str or None
        Set when ``m`` is below the configured minimum tail size.
    """

    x0: float
    n: int
    m: int
    t_values: np.ndarray = field(repr=False)
    warning: str | None = None


@dataclass(frozen=True)
class ParetoTailModel:
    theta: float

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta!r}")

    def cdf(self, t):
        return h_cdf(self, t)

    def pdf(self, t):
        return h_pdf(self, t)

    def quantile(self, p):
        return h_quantile(self, p)

    @property
    def fisher_information(self) -> float:
        return fisher_information_h(self.theta)


@dataclass(frozen=True)
class ReferenceModel:
    """Standard exponential reference law ``G(t) = 1 - exp(-t)``."""

    fisher_information: float = 1.0

    @staticmethod
    def cdf(t):
        return -np.expm1(-np.asarray(t, dtype=float))

    @staticmethod
    def pdf(t):
        return np.exp(-np.asarray(t, dtype=float))


def make_tail_sample(raw_observations, x0, min_tail=DEFAULT_MIN_TAIL) -> TailSample:
    """Reduce raw data to rescaled threshold exceedances.

    Observations equal to ``x0`` are not exceedances.  Values at or below zero
    are allowed and simply fall under the threshold.

    Raises
    ------
    NoExceedancesError
        If nothing lies strictly above ``x0``.
    """
    x0 = float(x0)
    if not x0 > 0:
        raise ValueError(f"threshold x0 must be positive, got {x0!r}")
    raw = np.asarray(raw_observations, dtype=float).ravel()
    if raw.size == 0:
        raise ValueError("raw_observations is empty")
    if np.isnan(raw).any():
        raise ValueError("raw_observations contains NaN")
    tail = raw[raw > x0]
    if tail.size == 0:
        raise NoExceedancesError(f"no exceedances above x0={x0:g} among {raw.size} observations")
    t = np.sort(tail / x0 - 1.0)
    t.setflags(write=False)
    msg = None
    if min_tail is not None and t.size < min_tail:
        msg = f"tail size m={t.size} is below the recommended minimum {min_tail}"
        warnings.warn(msg, SmallTailWarning, stacklevel=2)
    return TailSample(x0=x0, n=int(raw.size), m=int(t.size), t_values=t, warning=msg)


def fit_exponent_mle(sample) -> float:
    """MLE of the tail exponent, ``m / sum(log(1 + T_i))``.

    Accepts a :class:`TailSample` or a plain array of rescaled exceedances.
    """
    t = sample.t_values if isinstance(sample, TailSample) else np.asarray(sample, dtype=float)
    if t.size == 0:
        raise NoExceedancesError("empty tail sample")
    denom = np.log1p(t).sum()
    if denom <= 0.0:
        raise DegenerateSampleError("degenerate sample at threshold")
    return float(t.size / denom)


def hill_estimator(raw_observations, x0) -> float:
    """Hill's estimator on the observations above ``x0``, with ``x0`` as the cut."""
    raw = np.asarray(raw_observations, dtype=float)
    upper = raw[raw > x0]
    return float(1.0 / (np.mean(np.log(upper)) - np.log(x0)))


def h_cdf(model: ParetoTailModel, t):
    t = np.asarray(t, dtype=float)
    return -np.expm1(-model.theta * np.log1p(t))


def h_pdf(model: ParetoTailModel, t):
    t = np.asarray(t, dtype=float)
    return model.theta * np.exp(-(model.theta + 1.0) * np.log1p(t))


def h_quantile(model: ParetoTailModel, p):
    p = np.asarray(p, dtype=float)
    if np.any((p < 0) | (p >= 1)):
        raise ValueError("quantile level must lie in [0, 1)")
    return np.expm1(-np.log1p(-p) / model.theta)


def fisher_information_h(theta: float) -> float:
    if not theta > 0:
        raise ValueError("theta must be positive")
    return 1.0 / theta**2
