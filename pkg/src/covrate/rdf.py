"""Closed-form rate-distortion function under a covariance distortion constraint.

Given the conditional statistics of a remote source ``x`` observed through
``y`` with decoder side information ``z``, the minimum achievable coding rate
subject to the reconstruction-error covariance being dominated by a target
matrix ``D`` is

    rate = 1/2 log( |S1| / |min(D - Sxyz, S1)| ),   S1 = Sxz - Sxyz,

where ``Sxz = Sigma_x_given_z``, ``Sxyz = Sigma_x_given_yz`` and ``min`` is
the matrix minimum of :mod:`covrate.spd`.  This module also synthesizes the
achieving Gaussian test channel, the error covariance at the optimal decoder,
and the decoder itself.

The test channel is represented in the joint-diagonal coordinates: with ``V``
the joint diagonalizer of ``(S1, D - Sxyz)``, the encoder forms
``u = (V A) y + nu`` with *diagonal* coding-noise covariance and keeps only
the active components (those that carry rate).  This is an invertible linear
re-coordinatization of the usual ``U A y + nu`` form; it is preferred here
because inactive components have unbounded noise and must be dropped, which
is only information-preserving in coordinates where the noise is diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDistortion, NotNested, RankDeficient
from .model import ConditionalStats, check_regularity, psd_repair
from .spd import (
    check_spd,
    check_symmetric,
    joint_diagonalize,
    matrix_min,
    psd_leq,
    spectral_norm_sym,
    sym_eig_desc,
    sym_part,
)

#: Components with lam <= lam' * (1 + ACTIVE_RTOL) are classified inactive.
ACTIVE_RTOL = 1e-12


def require_regular(stats: ConditionalStats) -> None:
    """Raise :class:`RankDeficient` unless the full-rank precondition holds."""
    report = check_regularity(stats)
    if not report.full_rank:
        raise RankDeficient(
            f"observation informativeness matrix has rank {report.rank} < {report.n_x}; "
            "reduce the source space to the informative subspace first"
        )


def check_distortion(stats: ConditionalStats, D, rel_tol: float = 1e-12) -> np.ndarray:
    """Validate ``D`` strictly dominates the irreducible error ``Sigma_x_given_yz``."""
    D = check_symmetric(D, name="D")
    if D.shape != stats.Sigma_x_given_yz.shape:
        raise InvalidDistortion(
            f"D has shape {D.shape}, expected {stats.Sigma_x_given_yz.shape}"
        )
    gap = sym_part(D - stats.Sigma_x_given_yz)
    scale = max(spectral_norm_sym(gap), np.finfo(float).tiny)
    if np.linalg.eigvalsh(gap)[0] <= rel_tol * scale:
        raise InvalidDistortion(
            "D must strictly dominate Sigma_x_given_yz (the rate would be infinite)"
        )
    return D


@dataclass(frozen=True, eq=False)
class RdfResult:
    """Rate (nats per source vector) with the optimizing matrices.

    ``error_cov`` is the reconstruction-error covariance at the optimal
    decoder: ``Sigma_x_given_yz + min_matrix``.  It satisfies
    ``Sigma_x_given_yz <= error_cov <= D`` in the PSD order.
    """

    rate: float
    min_matrix: np.ndarray
    error_cov: np.ndarray


@dataclass(frozen=True, eq=False)
class TestChannel:
    """The achieving Gaussian test channel in joint-diagonal coordinates.

    ``u = encoder_map @ y + nu`` with ``nu ~ N(0, noise_cov)``;
    ``encoder_map`` keeps only the active rows of ``V @ A`` and ``noise_cov``
    is diagonal.  ``U`` (eigenvector rows of ``Sigma_x_given_z -
    Sigma_x_given_yz``) and ``V`` (the joint diagonalizer) are retained for
    decoding and for mapping back to source coordinates.
    """

    encoder_map: np.ndarray
    noise_cov: np.ndarray
    active: np.ndarray
    U: np.ndarray = field(repr=False)
    V: np.ndarray = field(repr=False)
    lam: np.ndarray
    lam_prime: np.ndarray

    @property
    def n_active(self) -> int:
        return self.encoder_map.shape[0]


def rate_distortion(stats: ConditionalStats, D) -> RdfResult:
    """Rate-distortion function at covariance distortion target ``D``.

    Raises
    ------
    RankDeficient
        If the observation is uninformative on part of the source space.
    InvalidDistortion
        If ``D`` does not strictly dominate ``Sigma_x_given_yz``.
    """
    require_regular(stats)
    D = check_distortion(stats, D)
    S1 = sym_part(stats.Sigma_x_given_z - stats.Sigma_x_given_yz)
    S2 = sym_part(D - stats.Sigma_x_given_yz)
    min_matrix = matrix_min(S2, S1)
    _, ld1 = np.linalg.slogdet(S1)
    _, ld_min = np.linalg.slogdet(min_matrix)
    rate = max(0.5 * (ld1 - ld_min), 0.0)
    error_cov = psd_repair(stats.Sigma_x_given_yz + min_matrix)
    return RdfResult(rate=rate, min_matrix=min_matrix, error_cov=error_cov)


def reconstruction_error(stats: ConditionalStats, D) -> np.ndarray:
    """Error covariance at the optimal decoder (``Sigma_x_given_yz + min``)."""
    return rate_distortion(stats, D).error_cov


def test_channel(stats: ConditionalStats, D) -> TestChannel:
    """Construct the Gaussian test channel achieving the rate-distortion function.

    Active components are those with ``lam' < lam``; each gets coding-noise
    variance ``lam * lam' / (lam - lam')``.  Components with ``lam' >= lam``
    need no coding (they would require infinite noise) and are excluded.
    """
    require_regular(stats)
    D = check_distortion(stats, D)
    S1 = sym_part(stats.Sigma_x_given_z - stats.Sigma_x_given_yz)
    S2 = sym_part(D - stats.Sigma_x_given_yz)
    U, _ = sym_eig_desc(S1)
    jd = joint_diagonalize(S1, S2)
    lam, lam_prime = jd.lam, jd.lam_prime
    active = np.flatnonzero(lam > lam_prime * (1.0 + ACTIVE_RTOL))
    g = lam[active] * lam_prime[active] / (lam[active] - lam_prime[active])
    encoder_map = (jd.V @ stats.A)[active]
    return TestChannel(
        encoder_map=encoder_map,
        noise_cov=np.diag(g),
        active=active,
        U=U,
        V=jd.V,
        lam=lam,
        lam_prime=lam_prime,
    )


def cond_mutual_info_gaussian(cov_given_outer, cov_given_inner) -> float:
    """Conditional mutual information from nested Gaussian covariances (nats).

    ``I = 1/2 (logdet(outer) - logdet(inner))`` where ``outer`` conditions on
    less.  Raises :class:`NotNested` if ``inner`` is not dominated by
    ``outer`` within tolerance.
    """
    outer = check_spd(cov_given_outer, name="outer covariance")
    inner = check_spd(cov_given_inner, name="inner covariance")
    if not psd_leq(inner, outer):
        raise NotNested("inner covariance is not dominated by the outer covariance")
    if outer.size == 0:
        return 0.0
    _, ld_o = np.linalg.slogdet(outer)
    _, ld_i = np.linalg.slogdet(inner)
    return max(0.5 * (ld_o - ld_i), 0.0)


def channel_rate(stats: ConditionalStats, channel: TestChannel) -> float:
    """Analytic ``I(y; u | z)`` of a constructed test channel (nats)."""
    if channel.n_active == 0:
        return 0.0
    E = channel.encoder_map
    Sigma_u_given_z = sym_part(E @ stats.Sigma_y_given_z @ E.T) + channel.noise_cov
    return cond_mutual_info_gaussian(Sigma_u_given_z, channel.noise_cov)


def mmse_decoder(stats: ConditionalStats, channel: TestChannel) -> tuple[np.ndarray, np.ndarray]:
    """MMSE decoder matrices ``(C, G)`` with ``x_hat = C u + G z``.

    With an empty channel (no active components) ``C`` is ``n_x x 0`` and the
    estimate falls back to the side-information-only regression
    ``Sigma_xz Sigma_z^{-1} z``.  The residual covariance of the estimate
    equals the rate-distortion error covariance.
    """
    m = stats.model
    n_x, n_z = m.n_x, m.n_z
    E = channel.encoder_map
    k = E.shape[0]
    if k > 0:
        Sigma_u_given_z = sym_part(E @ stats.Sigma_y_given_z @ E.T) + channel.noise_cov
        Sigma_xu_given_z = stats.A @ stats.Sigma_y_given_z @ E.T
        C = np.linalg.solve(Sigma_u_given_z, Sigma_xu_given_z.T).T
    else:
        C = np.zeros((n_x, 0))
    if n_z > 0:
        Sigma_uz = E @ m.Sigma_yz
        G = np.linalg.solve(m.Sigma_z, (m.Sigma_xz - C @ Sigma_uz).T).T
    else:
        G = np.zeros((n_x, 0))
    return C, G
