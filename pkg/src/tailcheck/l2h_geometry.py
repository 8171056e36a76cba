"""Functions and inner products in L2(H_theta).

The four unit vectors used by the transformation are the constant ``1``, the
normalised score ``beta_h``, ``ell = sqrt(dG/dH)`` and ``ell * beta_g`` with
``G`` the standard exponential law.  Inner products are integrals against the
density ``h_theta`` on ``[0, inf)``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core_model import ParetoTailModel, h_pdf
from .quadrature import DEFAULT_ENGINE, HALF_LINE_SPLITS, QuadratureEngine

__all__ = [
    "BasisCheckError",
    "DenominatorError",
    "ScoreBasis",
    "ell",
    "beta_h",
    "beta_g",
    "ell_beta_g",
    "ell_beta_g_tilde",
    "integrate_h",
    "inner_product_h",
    "make_score_basis",
]

DENOMINATOR_FLOOR = 1e-6
# Outside this range the integrands over- or underflow double precision.
THETA_RANGE = (0.05, 100.0)


class BasisCheckError(ArithmeticError):
    """A norm or orthogonality identity failed beyond quadrature tolerance."""


class DenominatorError(ZeroDivisionError):
    """``1 - <f, g>_H`` is too close to zero for the reflection to be stable."""


def ell(theta, t):
    """``theta**-0.5 * (1+t)**((theta+1)/2) * exp(-t/2)``, computed in logs."""
    t = np.asarray(t, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        log_ell = -0.5 * np.log(theta) + 0.5 * (theta + 1.0) * np.log1p(t) - 0.5 * t
        return np.exp(np.where(np.isinf(t), -np.inf, log_ell))


def beta_h(theta, t):
    return 1.0 - theta * np.log1p(np.asarray(t, dtype=float))


def beta_g(t):
    return 1.0 - np.asarray(t, dtype=float)


def ell_beta_g(theta, t):
    t = np.asarray(t, dtype=float)
    e = ell(theta, t)
    # ell underflows long before 1 - t overflows; keep 0 * inf out of the result
    return np.where(e > 0.0, e * (1.0 - np.minimum(t, 1e300)), 0.0)


def integrate_h(f, theta, engine: QuadratureEngine = DEFAULT_ENGINE):
    """``int_0^inf f(t) dH_theta(t)`` for a (possibly vector valued) ``f``.

    The half line is cut at a geometric ladder plus the engine's split points.
    Bounded cells are integrated in ``t`` against the density; the unbounded
    cell is integrated in the survival variable ``s = (1+t)**-theta``, where
    the measure becomes ``ds`` and heavy tails leave only log singularities.

    Returns
    -------
    value : float or ndarray
    error : float
    """
    model = ParetoTailModel(theta)
    cut = HALF_LINE_SPLITS[-1]
    pts = sorted({p for p in (*HALF_LINE_SPLITS, *engine.domain_split_points) if 0.0 < p <= cut})
    half = replace(engine, abs_tolerance=0.5 * engine.abs_tolerance)

    body, err_body = half.integrate_cells(
        lambda t: f(t) * h_pdf(model, t), np.array([0.0, *pts]))

    far = sorted(p for p in engine.domain_split_points if p > cut)
    s_edges = np.array([0.0, *((1.0 + np.array(far[::-1])) ** -theta), (1.0 + cut) ** -theta])

    def in_survival(s):
        with np.errstate(over="ignore", divide="ignore"):
            t = np.minimum(np.expm1(-np.log(s) / theta), 1e300)
        return f(t)

    tail, err_tail = half.integrate_cells(in_survival, np.unique(s_edges))
    value = body.sum(axis=-1) + tail.sum(axis=-1)
    return value, err_body + err_tail


def inner_product_h(f, g, theta, engine: QuadratureEngine = DEFAULT_ENGINE) -> float:
    """``int_0^inf f(s) g(s) h_theta(s) ds``.

    ``f`` and ``g`` must accept numpy arrays.  Jumps of either function should
    be registered in ``engine.domain_split_points``.
    """
    value, _ = integrate_h(lambda s: f(s) * g(s), theta, engine)
    return float(value)


@dataclass(frozen=True)
class ScoreBasis:
    """Inner-product scalars of the basis at one exponent value.

    ``ip_*`` fields are inner products in L2(H_theta); ``adjust`` is the
    coefficient of ``ell - 1`` removed from ``ell * beta_g`` to form its
    reflected image ``ell_beta_g_tilde``.
    """

    theta: float
    quad_tolerance: float
    ip_one_one: float
    ip_one_ell: float
    ip_ell_ell: float
    ip_bh_bh: float
    ip_one_bh: float
    ip_lbg_lbg: float
    ip_ell_lbg: float
    ip_one_lbg: float
    ip_bh_ell: float
    ip_bh_lbg: float
    c_tilde: float
    c_tilde_direct: float
    ip_bh_lbg_tilde: float

    @property
    def adjust(self) -> float:
        return self.c_tilde / (1.0 - self.ip_one_ell)

    @property
    def ip_ell_lbg_tilde(self) -> float:
        return self.ip_ell_lbg - self.adjust * (self.ip_ell_ell - self.ip_one_ell)

    @property
    def ip_one_lbg_tilde(self) -> float:
        return self.ip_one_lbg - self.adjust * (self.ip_one_ell - self.ip_one_one)


def _base_integrands(theta):
    def f(s):
        e = ell(theta, s)
        bh = beta_h(theta, s)
        lbg = ell_beta_g(theta, s)
        return np.stack([
            np.ones_like(e),
            e,
            e * e,
            bh * bh,
            bh,
            lbg * lbg,
            e * lbg,
            lbg,
            bh * e,
            bh * lbg,
            (e - 1.0) * lbg,
        ])

    return f


def make_score_basis(theta, engine: QuadratureEngine = DEFAULT_ENGINE) -> ScoreBasis:
    """Compute and validate the basis scalars at ``theta``.

    Raises
    ------
    BasisCheckError
        If a unit-norm or orthogonality identity fails by more than ten times
        the quadrature tolerance.
    DenominatorError
        If either reflection denominator is within 1e-6 of zero.
    """
    theta = float(theta)
    if not THETA_RANGE[0] <= theta <= THETA_RANGE[1]:
        raise ValueError(f"theta={theta:g} outside the supported range {THETA_RANGE}")
    v, _ = integrate_h(_base_integrands(theta), theta, engine)
    (one, one_ell, ell_ell, bh_bh, one_bh, lbg_lbg, ell_lbg, one_lbg,
     bh_ell, bh_lbg, c_direct) = (float(x) for x in v)

    # <ell - 1, ell beta_g> = int beta_g dG - <1, ell beta_g> and int beta_g dG = 0
    c_tilde = -one_lbg
    if abs(c_tilde - c_direct) > 1e-9:
        c_tilde = c_direct

    tol = 10.0 * engine.abs_tolerance
    checks = {
        "<beta_h, beta_h> - 1": bh_bh - 1.0,
        "<1, beta_h>": one_bh,
        "<ell, ell> - 1": ell_ell - 1.0,
    }
    for name, dev in checks.items():
        if abs(dev) >= tol:
            raise BasisCheckError(f"basis self-check failed at theta={theta:g}: {name} = {dev:.3e}")
    if not one_ell < 1.0:
        raise BasisCheckError(f"basis self-check failed at theta={theta:g}: <1, ell> = {one_ell!r} >= 1")

    adjust = c_tilde / (1.0 - one_ell)
    bh_lbg_tilde = bh_lbg - adjust * (bh_ell - one_bh)
    for name, ip in (("<1, ell>", one_ell), ("<beta_h, ell_beta_g_tilde>", bh_lbg_tilde)):
        if abs(1.0 - ip) < DENOMINATOR_FLOOR:
            raise DenominatorError(f"operator denominator near zero at theta={theta:g}: 1 - {name} = {1.0 - ip:.3e}")

    return ScoreBasis(
        theta=theta, quad_tolerance=engine.abs_tolerance,
        ip_one_one=one, ip_one_ell=one_ell, ip_ell_ell=ell_ell, ip_bh_bh=bh_bh,
        ip_one_bh=one_bh, ip_lbg_lbg=lbg_lbg, ip_ell_lbg=ell_lbg, ip_one_lbg=one_lbg,
        ip_bh_ell=bh_ell, ip_bh_lbg=bh_lbg, c_tilde=c_tilde, c_tilde_direct=c_direct,
        ip_bh_lbg_tilde=bh_lbg_tilde,
    )


def ell_beta_g_tilde(basis: ScoreBasis, t):
    """Image of ``ell * beta_g`` under the reflection exchanging ``1`` and ``ell``."""
    e = ell(basis.theta, t)
    return ell_beta_g(basis.theta, t) - basis.adjust * (e - 1.0)
