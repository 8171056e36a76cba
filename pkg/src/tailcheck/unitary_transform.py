"""The composed reflection ``K = K[beta_h, ell_beta_g~] K[1, ell]`` and the
transformed indicators ``phi~_x = K(ell * 1{. <= x})``.

Every inner product that ``phi~_x`` needs is a fixed scalar or an integral
over ``[0, x]``; both are cached once per exponent value so that evaluating
the transformed process for a sample costs no further quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core_model import ParetoTailModel, h_pdf
from .l2h_geometry import (
    DENOMINATOR_FLOOR,
    BasisCheckError,
    DenominatorError,
    ScoreBasis,
    beta_h,
    ell,
    ell_beta_g,
    ell_beta_g_tilde,
    inner_product_h,
)
from .quadrature import DEFAULT_ENGINE, QuadratureEngine

__all__ = [
    "TransformCoefficients",
    "apply_k_fg",
    "apply_k_hat",
    "build_transform",
    "default_grid",
    "phi_tilde",
    "expected_phi_tilde",
    "expected_phi_tilde_direct",
]

NORM_CHECK_TOL = 1e-8


def default_grid(delta=0.1, x_max=8.0) -> np.ndarray:
    """``delta, 2*delta, ..., x_max``; ``x_max`` must be a multiple of ``delta``."""
    k = int(round(x_max / delta))
    if k < 1 or abs(k * delta - x_max) > 1e-9 * max(1.0, x_max):
        raise ValueError(f"x_max={x_max} is not a positive multiple of delta={delta}")
    return delta * np.arange(1, k + 1)


def apply_k_fg(f, g, target, theta, engine: QuadratureEngine = DEFAULT_ENGINE):
    """Reflection of ``target`` that swaps the unit vectors ``f`` and ``g``.

    Returns the function ``t -> target(t) - c * (g(t) - f(t))`` with
    ``c = <g - f, target> / (1 - <f, g>)``.  Both scalars are computed once,
    here.
    """
    fg = inner_product_h(f, g, theta, engine)
    if abs(1.0 - fg) < DENOMINATOR_FLOOR:
        raise DenominatorError(f"operator denominator near zero: 1 - <f, g> = {1.0 - fg:.3e}")
    coef = inner_product_h(lambda s: g(s) - f(s), target, theta, engine) / (1.0 - fg)

    def reflected(t):
        return target(t) - coef * (g(t) - f(t))

    return reflected


def apply_k_hat(basis: ScoreBasis, target, engine: QuadratureEngine = DEFAULT_ENGINE):
    """``K[beta_h, ell_beta_g~](K[1, ell](target))`` by two nested reflections.

    Slow (four quadratures per call) but works for any square-integrable
    ``target``; register its jumps in ``engine.domain_split_points``.
    """
    theta = basis.theta
    one = np.ones_like
    first = apply_k_fg(one, lambda t: ell(theta, t), target, theta, engine)
    return apply_k_fg(lambda t: beta_h(theta, t), lambda t: ell_beta_g_tilde(basis, t), first, theta, engine)


@dataclass(frozen=True)
class TransformCoefficients:
    """Cached scalars for ``phi~_x`` on a grid of ``x`` values.

    Per-grid arrays (integrals over ``[0, x]`` against ``h``):

    ``a``    <ell - 1, ell phi_x>
    ``b``    <ell_beta_g~ - beta_h, ell phi_x>
    ``e1``   <1, ell phi_x>
    ``eb``   <beta_h, ell phi_x>
    ``elb``  <ell_beta_g~, ell phi_x>
    ``norm`` <ell phi_x, ell phi_x>, which must equal ``1 - exp(-x)``
    """

    basis: ScoreBasis
    x_grid: np.ndarray
    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    e1: np.ndarray = field(repr=False)
    eb: np.ndarray = field(repr=False)
    elb: np.ndarray = field(repr=False)
    norm: np.ndarray = field(repr=False)
    expected: np.ndarray = field(repr=False)
    d1: float
    d2: float
    cross: float
    one_ell_minus_one: float
    one_lbgt_minus_bh: float

    @property
    def theta(self) -> float:
        return self.basis.theta

    @property
    def bracket(self) -> np.ndarray:
        """``b(x) - d1 a(x) cross``, the coefficient inside the second reflection."""
        return self.b - self.d1 * self.a * self.cross

    def index(self, x) -> int:
        j = int(np.searchsorted(self.x_grid, x))
        if j == len(self.x_grid) or self.x_grid[j] != x:
            raise KeyError(f"x={x!r} is not a grid point")
        return j


def build_transform(basis: ScoreBasis, x_grid, engine: QuadratureEngine = DEFAULT_ENGINE) -> TransformCoefficients:
    """Cache every inner product ``phi~_x`` needs for ``x`` in ``x_grid``.

    Raises
    ------
    BasisCheckError
        If ``<ell phi_x, ell phi_x>`` departs from ``1 - exp(-x)`` by more
        than 1e-8 at some grid point.
    """
    x_grid = np.asarray(x_grid, dtype=float)
    if x_grid.ndim != 1 or len(x_grid) == 0 or x_grid[0] <= 0 or np.any(np.diff(x_grid) <= 0):
        raise ValueError("x_grid must be a non-empty ascending array of positive reals")
    if not np.isfinite(x_grid).all():
        raise ValueError("x_grid must be finite")
    theta = basis.theta
    model = ParetoTailModel(theta)

    def integrand(t):
        h = h_pdf(model, t)
        e = ell(theta, t)
        eh = e * h
        return np.stack([eh, e * eh, beta_h(theta, t) * eh, ell_beta_g(theta, t) * eh])

    edges = np.concatenate([[0.0], x_grid])
    per_cell = QuadratureEngine(engine.abs_tolerance / len(x_grid), engine.max_subdivisions)
    cells, _ = per_cell.integrate_cells(integrand, edges)
    e1, norm, eb, lbg_ell = np.cumsum(cells, axis=1)

    a = norm - e1
    elb = lbg_ell - basis.adjust * a
    b = elb - eb

    g_x = -np.expm1(-x_grid)
    bad = np.abs(norm - g_x) > NORM_CHECK_TOL
    if bad.any():
        x = x_grid[np.argmax(bad)]
        raise BasisCheckError(f"norm check failed at x={x:g}: <ell phi_x, ell phi_x> != G(x)")

    d1 = 1.0 / (1.0 - basis.ip_one_ell)
    d2 = 1.0 / (1.0 - basis.ip_bh_lbg_tilde)
    cross = (basis.ip_ell_lbg_tilde - basis.ip_one_lbg_tilde
             - basis.ip_bh_ell + basis.ip_one_bh)
    one_ell_m1 = basis.ip_one_ell - basis.ip_one_one
    one_lbgt_mbh = basis.ip_one_lbg_tilde - basis.ip_one_bh
    bracket = b - d1 * a * cross
    expected = e1 - d1 * a * one_ell_m1 - d2 * bracket * one_lbgt_mbh

    arrays = dict(a=a, b=b, e1=e1, eb=eb, elb=elb, norm=norm, expected=expected)
    for v in arrays.values():
        v.setflags(write=False)
    x_grid = x_grid.copy()
    x_grid.setflags(write=False)
    return TransformCoefficients(
        basis=basis, x_grid=x_grid, d1=d1, d2=d2, cross=cross,
        one_ell_minus_one=one_ell_m1, one_lbgt_minus_bh=one_lbgt_mbh, **arrays)


def _scalars_at(coeffs: TransformCoefficients, x):
    """``(a, bracket)`` at a grid point or at ``x = inf`` (indicator replaced by 1)."""
    if np.isinf(x):
        bs = coeffs.basis
        a = bs.ip_ell_ell - bs.ip_one_ell
        b = bs.ip_ell_lbg_tilde - bs.ip_bh_ell
        return a, b - coeffs.d1 * a * coeffs.cross
    j = coeffs.index(x)
    return coeffs.a[j], coeffs.bracket[j]


def phi_tilde(coeffs: TransformCoefficients, x, t):
    """Evaluate ``phi~_x(t)``; ``x`` is a grid point or ``inf``."""
    t = np.asarray(t, dtype=float)
    theta = coeffs.theta
    a, bracket = _scalars_at(coeffs, x)
    e = ell(theta, t)
    indicator = np.ones_like(t) if np.isinf(x) else (t <= x).astype(float)
    lbgt = ell_beta_g_tilde(coeffs.basis, t)
    return (e * indicator
            - coeffs.d1 * (e - 1.0) * a
            - coeffs.d2 * (lbgt - beta_h(theta, t)) * bracket)


def expected_phi_tilde(coeffs: TransformCoefficients, x) -> float:
    """``E phi~_x(T)`` under ``H_theta`` from the cached inner products."""
    return float(coeffs.expected[coeffs.index(x)])


def expected_phi_tilde_direct(coeffs: TransformCoefficients, x, engine: QuadratureEngine = DEFAULT_ENGINE) -> float:
    """Same expectation by fresh quadrature of ``phi~_x * h``; a debugging aid."""
    eng = engine if np.isinf(x) else engine.with_splits([x])
    return inner_product_h(lambda t: phi_tilde(coeffs, x, t), np.ones_like, coeffs.theta, eng)
