"""Joint Gaussian models, conditioning, and the linear estimator split."""
from __future__ import annotations

import numpy as np
import pytest

from covrate.errors import NotSpd, SingularConditioningBlock
from covrate.model import (
    JointGaussianModel,
    analyze,
    check_regularity,
    conditional_cov,
    estimator_matrices,
    psd_repair,
)
from conftest import random_spd, rel_fro


def _model_no_side_info(Sigma_x, Sigma_y, Sigma_xy) -> JointGaussianModel:
    Sigma_x = np.atleast_2d(np.asarray(Sigma_x, float))
    Sigma_y = np.atleast_2d(np.asarray(Sigma_y, float))
    n_x, n_y = Sigma_x.shape[0], Sigma_y.shape[0]
    return JointGaussianModel(
        Sigma_x=Sigma_x,
        Sigma_y=Sigma_y,
        Sigma_z=np.zeros((0, 0)),
        Sigma_xy=np.atleast_2d(np.asarray(Sigma_xy, float)),
        Sigma_xz=np.zeros((n_x, 0)),
        Sigma_yz=np.zeros((n_y, 0)),
    )


def _duplicate_side_info_model(rng: np.random.Generator) -> JointGaussianModel:
    """A model whose side information is an exact copy of the observation."""
    G = rng.standard_normal((4, 4))
    J = G @ G.T / 4 + 0.3 * np.eye(4)
    Sx, Sxy, Sy = J[:2, :2], J[:2, 2:], J[2:, 2:]
    return JointGaussianModel(
        Sigma_x=Sx, Sigma_y=Sy, Sigma_z=Sy,
        Sigma_xy=Sxy, Sigma_xz=Sxy, Sigma_yz=Sy,
    )


def _random_model(rng: np.random.Generator, n_x=3, n_y=4, n_z=2) -> JointGaussianModel:
    n = n_x + n_y + n_z
    J = random_spd(n, rng, jitter=0.3)
    ix = slice(0, n_x)
    iy = slice(n_x, n_x + n_y)
    iz = slice(n_x + n_y, n)
    return JointGaussianModel(
        Sigma_x=J[ix, ix], Sigma_y=J[iy, iy], Sigma_z=J[iz, iz],
        Sigma_xy=J[ix, iy], Sigma_xz=J[ix, iz], Sigma_yz=J[iy, iz],
    )


def test_conditional_cov_independent_blocks():
    joint = np.diag([2.0, 3.0])
    out = conditional_cov(joint, [0], [1])
    assert np.allclose(out, [[2.0]])


def test_conditional_cov_scalar():
    joint = np.array([[1.0, 0.5], [0.5, 1.0]])
    out = conditional_cov(joint, [0], [1])
    assert abs(out[0, 0] - 0.75) < 1e-12


def test_conditional_cov_empty_conditioning_set():
    joint = np.array([[1.0, 0.5], [0.5, 1.0]])
    assert np.allclose(conditional_cov(joint, [0], []), [[1.0]])


def test_conditional_cov_matches_regression_residuals():
    rng = np.random.default_rng(21)
    J = random_spd(4, rng, jitter=0.3)
    analytic = conditional_cov(J, [0, 1], [2, 3])
    N = 1_000_000
    samples = rng.multivariate_normal(np.zeros(4), J, size=N, method="cholesky")
    x, z = samples[:, :2], samples[:, 2:]
    coef, *_ = np.linalg.lstsq(z, x, rcond=None)
    resid = x - z @ coef
    emp = resid.T @ resid / N
    assert rel_fro(emp, analytic) < 0.01


def test_conditional_cov_rejects_indefinite_block():
    joint = np.array([[1.0, 0.0], [0.0, -1.0]])
    with pytest.raises(SingularConditioningBlock):
        conditional_cov(joint, [0], [1])


def test_estimator_matrices_without_side_info():
    rng = np.random.default_rng(22)
    m = _random_model(rng, n_x=2, n_y=3, n_z=0)
    A, B = estimator_matrices(m)
    assert B.shape == (2, 0)
    assert np.allclose(A, m.Sigma_xy @ np.linalg.inv(m.Sigma_y), atol=1e-10)


def test_estimator_matrices_observation_equals_source():
    rng = np.random.default_rng(23)
    S = random_spd(3, rng)
    Z = random_spd(2, rng)
    m = JointGaussianModel(
        Sigma_x=S, Sigma_y=S, Sigma_z=Z,
        Sigma_xy=S, Sigma_xz=np.zeros((3, 2)), Sigma_yz=np.zeros((3, 2)),
    )
    A, B = estimator_matrices(m)
    assert np.allclose(A, np.eye(3), atol=1e-9)
    assert np.allclose(B, 0.0, atol=1e-9)


def test_estimator_residual_orthogonality():
    rng = np.random.default_rng(24)
    m = _random_model(rng)
    A, B = estimator_matrices(m)
    # cov(n, (y,z)) = [Sxy Sxz] - [A B] @ stacked must vanish
    stacked = np.block([[m.Sigma_y, m.Sigma_yz], [m.Sigma_yz.T, m.Sigma_z]])
    cross = np.hstack([m.Sigma_xy, m.Sigma_xz])
    resid = cross - np.hstack([A, B]) @ stacked
    assert np.linalg.norm(resid) < 1e-9


def test_analyze_scalar_observation_noise():
    m = _model_no_side_info([[1.0]], [[1.25]], [[1.0]])
    st = analyze(m)
    assert abs(st.Sigma_x_given_yz[0, 0] - 0.2) < 1e-12
    assert abs(st.Sigma_yprime_given_z[0, 0] - 0.8) < 1e-12


def test_analyze_duplicate_side_info():
    rng = np.random.default_rng(25)
    m = _duplicate_side_info_model(rng)
    st = analyze(m)
    assert rel_fro(st.Sigma_x_given_z, st.Sigma_x_given_yz) < 1e-9
    assert np.linalg.norm(st.Sigma_yprime_given_z) < 1e-9


def test_analyze_decomposition_identity():
    rng = np.random.default_rng(26)
    for _ in range(5):
        st = analyze(_random_model(rng))
        lhs = st.Sigma_x_given_z
        rhs = st.Sigma_yprime_given_z + st.Sigma_x_given_yz
        assert rel_fro(lhs, rhs) < 1e-9
        # sufficient-statistic form of the middle term
        assert rel_fro(st.Sigma_yprime_given_z, st.A @ st.Sigma_y_given_z @ st.A.T) < 1e-9


def test_analyze_reduction_identity_with_explicit_channel():
    """With u = M y + w, conditioning on (u, z) splits the error into the
    estimation part through y plus the irreducible remote part."""
    rng = np.random.default_rng(27)
    m = _random_model(rng)
    st = analyze(m)
    n_x, n_y, n_z = m.n_x, m.n_y, m.n_z
    M = rng.standard_normal((2, n_y))
    Sw = random_spd(2, rng)
    # joint covariance of (x, y, z, u)
    Jxyz = np.block([
        [m.Sigma_x, m.Sigma_xy, m.Sigma_xz],
        [m.Sigma_xy.T, m.Sigma_y, m.Sigma_yz],
        [m.Sigma_xz.T, m.Sigma_yz.T, m.Sigma_z],
    ])
    lift = np.zeros((2, n_x + n_y + n_z))
    lift[:, n_x:n_x + n_y] = M
    J = np.block([
        [Jxyz, Jxyz @ lift.T],
        [lift @ Jxyz, lift @ Jxyz @ lift.T + Sw],
    ])
    ix = list(range(n_x))
    iy = list(range(n_x, n_x + n_y))
    iz = list(range(n_x + n_y, n_x + n_y + n_z))
    iu = list(range(n_x + n_y + n_z, n_x + n_y + n_z + 2))
    lhs = conditional_cov(J, ix, iu + iz)
    Sy_uz = conditional_cov(J, iy, iu + iz)
    rhs = st.A @ Sy_uz @ st.A.T + st.Sigma_x_given_yz
    assert rel_fro(lhs, rhs) < 1e-9


def test_analyze_invariant_to_orthogonal_recoordinatization():
    rng = np.random.default_rng(28)
    m = _random_model(rng)
    st = analyze(m)
    Q, _ = np.linalg.qr(rng.standard_normal((m.n_y, m.n_y)))
    m2 = JointGaussianModel(
        Sigma_x=m.Sigma_x, Sigma_y=Q @ m.Sigma_y @ Q.T, Sigma_z=m.Sigma_z,
        Sigma_xy=m.Sigma_xy @ Q.T, Sigma_xz=m.Sigma_xz, Sigma_yz=Q @ m.Sigma_yz,
    )
    st2 = analyze(m2)
    assert rel_fro(st2.Sigma_x_given_yz, st.Sigma_x_given_yz) < 1e-9
    assert rel_fro(st2.Sigma_x_given_z, st.Sigma_x_given_z) < 1e-9


def test_check_regularity_duplicate_side_info_rank_zero():
    rng = np.random.default_rng(29)
    rep = check_regularity(analyze(_duplicate_side_info_model(rng)))
    assert rep.rank == 0
    assert not rep.full_rank


def test_check_regularity_generic_full_rank():
    rng = np.random.default_rng(30)
    rep = check_regularity(analyze(_random_model(rng)))
    assert rep.full_rank
    assert rep.rank == 3


def test_check_regularity_duplicated_source_coordinate():
    m = JointGaussianModel(
        Sigma_x=np.array([[1.0, 1.0], [1.0, 1.0]]),
        Sigma_y=np.array([[1.25]]),
        Sigma_z=np.zeros((0, 0)),
        Sigma_xy=np.array([[1.0], [1.0]]),
        Sigma_xz=np.zeros((2, 0)),
        Sigma_yz=np.zeros((1, 0)),
    )
    rep = check_regularity(analyze(m))
    assert not rep.full_rank
    assert rep.rank == 1


def test_model_validation_rejects_inconsistent_joint():
    with pytest.raises(NotSpd):
        _model_no_side_info([[1.0]], [[1.0]], [[2.0]])


def test_psd_repair_clips_tiny_negatives():
    A = np.diag([1.0, -1e-14])
    out = psd_repair(A)
    assert np.linalg.eigvalsh(out)[0] >= 0.0
    with pytest.raises(NotSpd):
        psd_repair(np.diag([1.0, -1e-3]))


def test_scalar_remote_model_statistics(scalar_stats):
    assert abs(scalar_stats.Sigma_x_given_z[0, 0] - 1.0) < 1e-12
    assert abs(scalar_stats.Sigma_x_given_yz[0, 0] - 0.25) < 1e-12
