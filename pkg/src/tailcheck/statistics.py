"""Transformed tail empirical process and its KS, Cramer-von Mises and
Anderson-Darling functionals."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core_model import TailSample, fit_exponent_mle
from .l2h_geometry import beta_h, ell, ell_beta_g_tilde, make_score_basis
from .quadrature import DEFAULT_ENGINE
from .unitary_transform import TransformCoefficients, build_transform, default_grid

__all__ = [
    "IncompatibleTableError",
    "TransformedProcess",
    "StatisticReport",
    "transformed_process",
    "ks_statistic",
    "cvm_statistic",
    "ad_statistic",
    "STATISTICS",
    "p_value",
    "grid_spacing",
    "evaluate_sample",
]


class IncompatibleTableError(ValueError):
    """Critical-value table built for another statistic or grid."""


@dataclass(frozen=True)
class TransformedProcess:
    x_grid: np.ndarray
    values: np.ndarray
    m: int
    theta_hat: float

    def __post_init__(self):
        if len(self.values) != len(self.x_grid):
            raise ValueError("values and x_grid differ in length")
        if not np.isfinite(self.values).all():
            raise ValueError("transformed process has non-finite values")


@dataclass
class StatisticReport:
    ks: float
    cvm: float
    ad: float
    p_values: dict | None = None
    metadata: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"ks": self.ks, "cvm": self.cvm, "ad": self.ad,
                "p_values": self.p_values, "metadata": self.metadata}


def transformed_process(sample: TailSample, coeffs: TransformCoefficients, shifted=False) -> TransformedProcess:
    """``m**-0.5 * sum_i [phi~_x(T_i) - E phi~_x]`` on the coefficient grid.

    The sum over the sample is reduced to four sums: the running sum of
    ``ell(T_i)`` over ``T_i <= x`` plus three grid-independent totals.

    ``shifted=True`` evaluates at ``T_i + 1`` instead of ``T_i``; it exists
    only for comparing the two readings of the sample point and is never the
    default.
    """
    t = np.sort(np.asarray(sample.t_values, dtype=float))
    if shifted:
        t = t + 1.0
    m = t.size
    if m < 1:
        raise ValueError("empty tail sample")
    theta = coeffs.theta
    e = ell(theta, t)
    running = np.concatenate([[0.0], np.cumsum(e)])
    counts = np.searchsorted(t, coeffs.x_grid, side="right")
    sum_ell_below = running[counts]
    sum_ell_m1 = float(np.sum(e - 1.0))
    sum_corr = float(np.sum(ell_beta_g_tilde(coeffs.basis, t) - beta_h(theta, t)))

    total = (sum_ell_below
             - coeffs.d1 * coeffs.a * sum_ell_m1
             - coeffs.d2 * coeffs.bracket * sum_corr)
    values = (total - m * coeffs.expected) / np.sqrt(m)
    return TransformedProcess(x_grid=coeffs.x_grid, values=values, m=m, theta_hat=theta)


def grid_spacing(x_grid) -> float:
    x = np.asarray(x_grid, dtype=float)
    steps = np.diff(np.concatenate([[0.0], x]))
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise ValueError("grid is not uniformly spaced from zero")
    return float(steps[0])


def ks_statistic(process: TransformedProcess) -> float:
    if len(process.values) == 0:
        raise ValueError("empty grid")
    return float(np.max(np.abs(process.values)))


def cvm_statistic(process: TransformedProcess) -> float:
    delta = grid_spacing(process.x_grid)
    return float(delta * np.sum(process.values**2 * np.exp(-process.x_grid)))


def ad_statistic(process: TransformedProcess) -> float:
    delta = grid_spacing(process.x_grid)
    if process.x_grid[0] <= 0:
        raise ValueError("grid must exclude x = 0")
    return float(delta * np.sum(process.values**2 / -np.expm1(-process.x_grid)))


STATISTICS = {"ks": ks_statistic, "cvm": cvm_statistic, "ad": ad_statistic}


def p_value(stat_value: float, table, statistic=None, grid=None) -> float:
    """Add-one Monte Carlo p-value ``(1 + #{draws >= stat}) / (1 + B)``.

    ``table`` is a :class:`~tailcheck.simulation.CriticalValueTable` or an
    array of null draws.  When ``statistic`` or ``grid`` (``(delta, x_max)``)
    is given it must match what the table was built for.
    """
    draws = getattr(table, "draws", table)
    if statistic is not None and getattr(table, "statistic", statistic) != statistic:
        raise IncompatibleTableError(f"incompatible table: built for {table.statistic!r}, not {statistic!r}")
    if grid is not None and hasattr(table, "grid"):
        if not np.allclose(table.grid, grid, rtol=1e-12, atol=0.0):
            raise IncompatibleTableError(f"incompatible table: grid {tuple(table.grid)} vs {tuple(grid)}")
    draws = np.asarray(draws, dtype=float)
    if draws.size == 0:
        raise ValueError("empty table")
    exceed = int(np.count_nonzero(draws >= stat_value))
    return (1 + exceed) / (1 + draws.size)


def evaluate_sample(sample: TailSample, delta=0.1, x_max=8.0, engine=DEFAULT_ENGINE):
    """Fit, transform and compute all three statistics for one tail sample.

    Returns ``(theta_hat, process, {"ks": ..., "cvm": ..., "ad": ...})``.
    """
    theta_hat = fit_exponent_mle(sample)
    basis = make_score_basis(theta_hat, engine)
    coeffs = build_transform(basis, default_grid(delta, x_max), engine)
    process = transformed_process(sample, coeffs)
    return theta_hat, process, {k: f(process) for k, f in STATISTICS.items()}
