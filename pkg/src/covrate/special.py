"""Trace (MSE) and rate-information specializations of the covariance RDF.

Both reduce to scalar water-filling problems: over the eigenvalues of the
informativeness gap ``Sigma_x_given_z - Sigma_x_given_yz`` (MSE case), or of
``I - Sxz^{-1/2} Sxyz Sxz^{-1/2}`` (rate-information case).  Each solver also
produces the covariance distortion target ``d_star`` whose matrix RDF equals
the specialized rate, which is how the test suite closes the loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .errors import InfeasibleDistortion, InfiniteRate, OutOfRange
from .model import ConditionalStats, psd_repair
from .rdf import require_regular
from .spd import check_spd, principal_sqrt, sym_eig_desc, sym_part

#: Absolute bisection tolerance on the water variable.
WATER_XTOL = 1e-12
#: Bisection iteration cap (bracketing is asserted before iterating).
WATER_MAXITER = 200


@dataclass(frozen=True, eq=False)
class WaterfillResult:
    """MSE water-filling solution.

    ``residual`` is the water-equation residual
    ``|sum_i min(water_level, lam_i) - (n_x D - tr(Sigma_x_given_yz))|``; it is
    at round-off level in the solvable regime and equals the saturation slack
    when ``D`` is large enough that the rate is zero.
    """

    rate: float
    water_level: float
    d_star: np.ndarray
    residual: float


def mse_rdf(stats: ConditionalStats, D_scalar: float) -> WaterfillResult:
    """Rate-distortion function under the trace constraint ``tr(error) <= n_x D``.

    Water-filling over the eigenvalues ``lam_i`` of
    ``Sigma_x_given_z - Sigma_x_given_yz``: the water level ``x`` satisfies
    ``sum_i min(x, lam_i) = n_x D - tr(Sigma_x_given_yz)`` and
    ``rate = 1/2 sum_i log(max(lam_i / x, 1))``.  ``d_star`` is the covariance
    distortion target achieving the same rate.

    Raises
    ------
    InfeasibleDistortion
        If ``n_x D <= tr(Sigma_x_given_yz)`` (below the error floor).
    RankDeficient
        Propagated from the regularity check.
    """
    require_regular(stats)
    n_x = stats.n_x
    floor = float(np.trace(stats.Sigma_x_given_yz))
    budget = n_x * float(D_scalar) - floor
    if budget <= 0.0:
        raise InfeasibleDistortion(
            f"n_x * D = {n_x * float(D_scalar):.6g} does not exceed "
            f"tr(Sigma_x_given_yz) = {floor:.6g}"
        )
    U, lam = sym_eig_desc(sym_part(stats.Sigma_x_given_z - stats.Sigma_x_given_yz))
    if budget >= lam.sum():
        # Saturated: side information alone meets the constraint; rate 0 with
        # the full conditional covariance as the distortion target.
        d_star = psd_repair(stats.Sigma_x_given_yz + U.T @ (lam[:, None] * U))
        return WaterfillResult(
            rate=0.0,
            water_level=float(lam[0]),
            d_star=d_star,
            residual=float(budget - lam.sum()),
        )
    level = _waterfill_level(lam, budget)
    rate = 0.5 * float(np.log(np.maximum(lam / level, 1.0)).sum())
    filled = np.minimum(level, lam)
    d_star = psd_repair(stats.Sigma_x_given_yz + U.T @ (filled[:, None] * U))
    residual = float(abs(filled.sum() - budget))
    return WaterfillResult(rate=rate, water_level=level, d_star=d_star, residual=residual)


def _waterfill_level(levels: np.ndarray, budget: float) -> float:
    """Solve ``sum_i min(x, levels_i) = budget`` for ``x`` in ``(0, max(levels))``.

    The left side is continuous, piecewise linear and strictly increasing on
    ``[0, max(levels)]``, so the root is unique.  Bisection (at the documented
    tolerance) locates the active set; an exact linear solve on that set then
    removes the bisection error.
    """
    def f(x):
        return float(np.minimum(x, levels).sum() - budget)

    hi = float(levels[0])
    assert f(0.0) < 0.0 <= f(hi), "water equation is not bracketed"
    x = bisect(f, 0.0, hi, xtol=WATER_XTOL, maxiter=WATER_MAXITER)
    above = levels > x
    k = int(above.sum())
    if k > 0:
        x_exact = (budget - float(levels[~above].sum())) / k
        if abs(f(x_exact)) <= abs(f(x)):
            x = x_exact
    return float(x)


@dataclass(frozen=True, eq=False)
class RelayResult:
    """Rate-information solution.

    ``gamma`` is the water level in ``[0, mu_max]``; ``mu`` the descending
    informativeness eigenvalues in ``[0, 1)``; ``residual`` the water-equation
    residual ``|-1/2 sum_i log(min(1, (1 - mu_i)/(1 - gamma))) - R_I|``.
    """

    rate: float
    gamma: float
    mu: np.ndarray
    d_star: np.ndarray
    residual: float


def relay_mu(stats: ConditionalStats) -> np.ndarray:
    """Descending eigenvalues of ``I - Sxz^{-1/2} Sxyz Sxz^{-1/2}``, in ``[0, 1)``.

    These measure, per joint-diagonal component, the fraction of conditional
    source variance the observation can remove; ``-1/2 sum_i log(1 - mu_i)``
    equals the supremum ``1/2 log(|Sigma_x_given_z| / |Sigma_x_given_yz|)``.
    """
    _, mu = _informativeness_eig(stats)
    return mu


def relay_supremum(stats: ConditionalStats) -> float:
    """Supremum of admissible mutual-information targets (nats)."""
    _, ld_z = np.linalg.slogdet(stats.Sigma_x_given_z)
    _, ld_yz = np.linalg.slogdet(stats.Sigma_x_given_yz)
    return max(0.5 * (ld_z - ld_yz), 0.0)


def relay_solve(stats: ConditionalStats, R_I: float) -> RelayResult:
    """Minimum coding rate to deliver mutual information ``R_I`` about the source.

    The water equation ``-1/2 sum_i log(min(1, (1 - mu_i)/(1 - gamma))) = R_I``
    is solved for ``gamma`` on ``[0, mu_max]``.  In the variable
    ``s = -log(1 - gamma)`` it becomes the piecewise-linear water-filling
    problem ``1/2 sum_i max(0, s_i - s) = R_I`` with ``s_i = -log(1 - mu_i)``,
    which is bisected and then refined exactly on the active set.  The coding
    rate is ``1/2 sum_i log(max(1, mu_i (1 - gamma) / ((1 - mu_i) gamma)))``
    and ``d_star`` is the covariance distortion target whose matrix RDF equals
    that rate.

    Raises
    ------
    OutOfRange
        If ``R_I`` is negative or exceeds the supremum.
    InfiniteRate
        If ``R_I`` equals the supremum (that point needs unbounded rate).
    """
    W, mu = _informativeness_eig(stats)
    R_sup = relay_supremum(stats)
    R_I = float(R_I)
    if R_I < 0.0 or R_I > R_sup * (1.0 + 1e-12):
        raise OutOfRange(f"R_I = {R_I:.6g} outside [0, {R_sup:.6g}]")

    s_levels = -np.log1p(-mu)          # descending, positive

    if R_I == 0.0:
        gamma = float(mu[0])           # canonical root of the flat region
    else:
        if abs(R_I - R_sup) <= 1e-12 * max(R_sup, 1.0):
            raise InfiniteRate("R_I at the supremum requires unbounded rate")

        def f(s):
            return 0.5 * float(np.maximum(s_levels - s, 0.0).sum()) - R_I

        # f decreases from R_sup - R_I > 0 at s = 0 to -R_I < 0 at s = max s_i.
        s_hi = float(s_levels[0])
        assert f(0.0) > 0.0 > f(s_hi), "water equation is not bracketed"
        s = bisect(f, 0.0, s_hi, xtol=WATER_XTOL, maxiter=WATER_MAXITER)
        above = s_levels > s
        k = int(above.sum())
        if k > 0:
            s_exact = (float(s_levels[above].sum()) - 2.0 * R_I) / k
            if abs(f(s_exact)) <= abs(f(s)):
                s = s_exact
        gamma = float(-np.expm1(-s))

    # Active components (mu_i > gamma) each cost
    # 1/2 log(mu_i (1 - gamma) / ((1 - mu_i) gamma)); the rest are free.
    active = mu > gamma
    if active.any():
        ratio = mu[active] * (1.0 - gamma) / ((1.0 - mu[active]) * gamma)
        rate = 0.5 * float(np.log(np.maximum(ratio, 1.0)).sum())
    else:
        rate = 0.0

    shrink = np.minimum(1.0, (1.0 - mu) / (1.0 - gamma))
    half = principal_sqrt(stats.Sigma_x_given_z)
    d_star = psd_repair(half @ (W.T @ (shrink[:, None] * W)) @ half)
    residual = float(abs(-0.5 * float(np.log(shrink).sum()) - R_I))
    return RelayResult(rate=rate, gamma=gamma, mu=mu, d_star=d_star, residual=residual)


def _informativeness_eig(stats: ConditionalStats) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-rows ``W`` and descending eigenvalues ``mu`` of the whitened gap.

    Unlike the matrix-distortion pipeline this does not require the whitened
    gap to be full rank: zero eigenvalues are legitimate (components where the
    observation adds nothing) and simply carry no rate.
    """
    Sxz = check_spd(stats.Sigma_x_given_z, name="Sigma_x_given_z")
    check_spd(stats.Sigma_x_given_yz, name="Sigma_x_given_yz")
    U, lam = sym_eig_desc(Sxz)
    isqrt = U.T @ (lam[:, None] ** -0.5 * U)
    M = sym_part(np.eye(stats.n_x) - isqrt @ stats.Sigma_x_given_yz @ isqrt)
    W, mu = sym_eig_desc(M)
    mu = np.clip(mu, 0.0, None)
    if mu[0] >= 1.0:
        raise OutOfRange("informativeness eigenvalue reached 1 (Sigma_x_given_yz singular)")
    return W, mu
