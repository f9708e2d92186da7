"""Rate allocation and distortionless fusion for a centralized sensor network.

Each node observes ``y_i = W_i^T x_d + n_i``, codes it at rate
``R(D_i) = 1/2 log(|Sigma_y_i| / |D_i|)`` and ships it to a fusion center,
which applies a no-linear-distortion filter (``H W^T = I``).  Under suitable
coding, node ``i``'s contribution behaves like ``y_i`` plus an equivalent
noise with covariance ``Sigma_n_i + (D_i^{-1} - Sigma_y_i^{-1})^{-1}``, so the
fused SNR is a deterministic function of the allocation ``(D_1, ..., D_N)``.

This module provides the SNR objective, the stationarity (KKT) system and its
residuals, the high-rate allocator with its feasibility threshold, the
two-node scalar closed form with regime classification, and the random
valid-allocation generator used to probe (local/global) optimality.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.optimize import bisect

from .errors import (
    AssumptionViolated,
    DimensionMismatch,
    GenerationStalled,
    InfeasibleBudget,
    InvalidAllocation,
    InvalidParam,
    SingularGram,
)
from .model import psd_repair
from .spd import as_square, check_spd, check_symmetric, psd_leq, sym_eig_desc, sym_part

#: PSD-order slack for ``D <= Sigma_y`` checks on allocations.
ALLOC_TOL = 1e-9
#: Maximum admissible condition number for a node's mixing matrix.
MAX_W_COND = 1e12

#: Regime labels returned by :func:`scalar_allocate`.
REGIME_MAXIMIZER = "Maximizer"
REGIME_BOUNDARY = "Boundary"
REGIME_MINIMIZER = "Minimizer"


@dataclass(frozen=True, eq=False)
class SensorNode:
    """One sensor: invertible mixing ``W``, SPD noise ``Sigma_n``, weight ``alpha``."""

    W: np.ndarray
    Sigma_n: np.ndarray
    alpha: float

    def __post_init__(self):
        W = as_square(np.asarray(self.W, dtype=float), name="W")
        Sigma_n = check_spd(np.asarray(self.Sigma_n, dtype=float), name="Sigma_n")
        if Sigma_n.shape != W.shape:
            raise DimensionMismatch(
                f"W is {W.shape} but Sigma_n is {Sigma_n.shape}"
            )
        if np.linalg.cond(W) > MAX_W_COND:
            raise InvalidParam("mixing matrix W is numerically singular")
        alpha = float(self.alpha)
        if not 0.0 < alpha <= 1.0:
            raise InvalidParam(f"alpha = {alpha} outside (0, 1]")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "Sigma_n", Sigma_n)
        object.__setattr__(self, "alpha", alpha)

    @property
    def n(self) -> int:
        return self.W.shape[0]


@dataclass(frozen=True, eq=False)
class FusionNetwork:
    """Desired-source covariance, sensor list, and the sum-rate budget in nats."""

    Sigma_xd: np.ndarray
    nodes: tuple[SensorNode, ...]
    R: float

    def __post_init__(self):
        Sigma_xd = check_spd(np.asarray(self.Sigma_xd, dtype=float), name="Sigma_xd")
        nodes = tuple(self.nodes)
        if not nodes:
            raise InvalidParam("network needs at least one node")
        for i, node in enumerate(nodes):
            if node.n != Sigma_xd.shape[0]:
                raise DimensionMismatch(
                    f"node {i} has dimension {node.n}, expected {Sigma_xd.shape[0]}"
                )
        weight_sum = sum(node.alpha for node in nodes)
        if abs(weight_sum - 1.0) > 1e-12:
            raise InvalidParam(f"node weights sum to {weight_sum!r}, expected 1")
        R = float(self.R)
        if not np.isfinite(R) or R < 0.0:
            raise InvalidParam(f"rate budget R = {R} must be finite and >= 0")
        object.__setattr__(self, "Sigma_xd", Sigma_xd)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "R", R)

    @property
    def n(self) -> int:
        return self.Sigma_xd.shape[0]

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def alphas(self) -> np.ndarray:
        return np.array([node.alpha for node in self.nodes])

    @cached_property
    def sigma_y(self) -> tuple[np.ndarray, ...]:
        """Per-node observation covariances ``W^T Sigma_xd W + Sigma_n``."""
        out = []
        for i, node in enumerate(self.nodes):
            S = sym_part(node.W.T @ self.Sigma_xd @ node.W + node.Sigma_n)
            out.append(check_spd(S, name=f"Sigma_y[{i}]"))
        return tuple(out)

    @cached_property
    def log_beta(self) -> float:
        """Log of the determinant budget: ``sum_i alpha_i logdet Sigma_y_i - 2R``.

        An allocation meets the sum-rate budget exactly iff
        ``sum_i alpha_i logdet D_i`` equals this value.
        """
        lds = [np.linalg.slogdet(S)[1] for S in self.sigma_y]
        return float(np.dot(self.alphas, lds) - 2.0 * self.R)


@dataclass(frozen=True, eq=False)
class Allocation:
    """A distortion target per node.  Validity is checked against a network."""

    D: tuple[np.ndarray, ...]

    def __post_init__(self):
        mats = tuple(
            check_symmetric(as_square(np.asarray(Di, dtype=float), name=f"D[{i}]"))
            for i, Di in enumerate(self.D)
        )
        object.__setattr__(self, "D", mats)

    def weighted_logdet(self, alphas: np.ndarray) -> float:
        """``sum_i alpha_i logdet D_i`` — the quantity the budget constrains."""
        total = 0.0
        for a, Di in zip(alphas, self.D):
            sign, ld = np.linalg.slogdet(Di)
            if sign <= 0:
                return -np.inf
            total += a * ld
        return float(total)


def allocation_valid(
    network: FusionNetwork, alloc: Allocation, tol: float = ALLOC_TOL
) -> bool:
    """True iff every ``D_i`` is SPD and ``D_i <= Sigma_y_i`` within ``tol``."""
    if len(alloc.D) != network.n_nodes:
        return False
    for Di, Syi in zip(alloc.D, network.sigma_y):
        if Di.shape != Syi.shape:
            return False
        ev = np.linalg.eigvalsh(Di)
        if ev[0] <= 0.0:
            return False
        if not psd_leq(Di, Syi, tol=tol):
            return False
    return True


def check_allocation(
    network: FusionNetwork, alloc: Allocation, tol: float = ALLOC_TOL
) -> None:
    """Raise :class:`InvalidAllocation` unless the allocation is valid."""
    if len(alloc.D) != network.n_nodes:
        raise InvalidAllocation(
            f"allocation has {len(alloc.D)} matrices for {network.n_nodes} nodes"
        )
    for i, (Di, Syi) in enumerate(zip(alloc.D, network.sigma_y)):
        if Di.shape != Syi.shape:
            raise InvalidAllocation(f"D[{i}] has shape {Di.shape}, expected {Syi.shape}")
        if np.linalg.eigvalsh(Di)[0] <= 0.0:
            raise InvalidAllocation(f"D[{i}] is not positive definite")
        if not psd_leq(Di, Syi, tol=tol):
            raise InvalidAllocation(f"D[{i}] exceeds the observation covariance")


def per_node_rate(sigma_y: np.ndarray, D: np.ndarray, tol: float = ALLOC_TOL) -> float:
    """Coding rate ``1/2 log(|Sigma_y| / |D|)`` in nats for one node."""
    if not psd_leq(D, sigma_y, tol=tol):
        raise InvalidAllocation("D exceeds the observation covariance")
    sign, ld_d = np.linalg.slogdet(D)
    if sign <= 0:
        raise InvalidAllocation("D is not positive definite")
    _, ld_y = np.linalg.slogdet(sigma_y)
    return max(0.5 * (ld_y - ld_d), 0.0)


def weighted_sum_rate(network: FusionNetwork, alloc: Allocation) -> float:
    """``sum_i alpha_i R(D_i)`` in nats."""
    return float(
        sum(
            node.alpha * per_node_rate(Syi, Di)
            for node, Syi, Di in zip(network.nodes, network.sigma_y, alloc.D)
        )
    )


# --------------------------------------------------------------------------
# Fusion filter and output SNR
# --------------------------------------------------------------------------


def nld_filter(network: FusionNetwork, sigma_v: Sequence[np.ndarray]) -> np.ndarray:
    """No-linear-distortion fusion filter for block noise covariances ``sigma_v``.

    With ``W = [W_1 ... W_N]`` and block-diagonal ``Sigma_v``, the filter
    ``H = (W Sigma_v^{-1} W^T)^{-1} W Sigma_v^{-1}`` is the minimum-noise
    solution of ``H W^T = I``; the fused output is ``x_d`` plus filtered noise.
    """
    if len(sigma_v) != network.n_nodes:
        raise DimensionMismatch(
            f"{len(sigma_v)} noise blocks for {network.n_nodes} nodes"
        )
    blocks = []
    gram = np.zeros((network.n, network.n))
    for node, Svi in zip(network.nodes, sigma_v):
        WSvi = np.linalg.solve(check_spd(Svi, name="Sigma_v block"), node.W.T).T
        blocks.append(WSvi)
        gram += WSvi @ node.W.T
    gram = sym_part(gram)
    try:
        H = np.linalg.solve(gram, np.hstack(blocks))
    except np.linalg.LinAlgError as exc:
        raise SingularGram("fusion gram matrix is singular") from exc
    return H


def equivalent_noise_inv(node: SensorNode, sigma_y: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Inverse of the node's decoder-equivalent noise covariance.

    The equivalent noise is ``Sigma_n + (D^{-1} - Sigma_y^{-1})^{-1}``, which
    blows up as ``D -> Sigma_y`` (zero rate).  Its inverse stays bounded, so it
    is computed directly via the Woodbury identity
    ``Sigma_v^{-1} = Sigma_n^{-1} - Sigma_n^{-1} (Q + Sigma_n^{-1})^{-1} Sigma_n^{-1}``
    with ``Q = D^{-1} - Sigma_y^{-1}`` (PSD for any valid ``D``).
    """
    Sn_inv = np.linalg.inv(node.Sigma_n)
    Q = sym_part(np.linalg.inv(D) - np.linalg.inv(sigma_y))
    inner = np.linalg.solve(sym_part(Q + Sn_inv), Sn_inv)
    return sym_part(Sn_inv - Sn_inv @ inner)


def coding_noise_cov(sigma_y: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Test-channel noise covariance ``(D^{-1} - Sigma_y^{-1})^{-1}``.

    Finite only strictly inside the constraint set (``D`` strictly below
    ``Sigma_y``); the zero-rate boundary has infinite coding noise.
    """
    Q = sym_part(np.linalg.inv(D) - np.linalg.inv(sigma_y))
    ev = np.linalg.eigvalsh(Q)
    if ev[0] <= 0.0:
        raise InvalidAllocation("D is at the zero-rate boundary; coding noise is unbounded")
    return sym_part(np.linalg.inv(Q))


@dataclass(frozen=True)
class Snr:
    linear: float
    db: float


def output_snr(
    network: FusionNetwork, alloc: Allocation, validate: bool = True
) -> Snr:
    """Fused output SNR ``tr(Sigma_xd) / tr{[sum_i W_i Sigma_v_i^{-1} W_i^T]^{-1}}``."""
    if validate:
        check_allocation(network, alloc)
    gram = np.zeros((network.n, network.n))
    for node, Syi, Di in zip(network.nodes, network.sigma_y, alloc.D):
        Svi_inv = equivalent_noise_inv(node, Syi, Di)
        gram += node.W @ Svi_inv @ node.W.T
    gram = sym_part(gram)
    try:
        noise_cov = np.linalg.inv(gram)
    except np.linalg.LinAlgError as exc:
        raise SingularGram("zero-information allocation: fused noise is unbounded") from exc
    linear = float(np.trace(network.Sigma_xd) / np.trace(noise_cov))
    if linear <= 0.0:
        raise SingularGram("fused noise power is not positive")
    return Snr(linear=linear, db=10.0 * np.log10(linear))


# --------------------------------------------------------------------------
# KKT system
# --------------------------------------------------------------------------


def kkt_terms(
    node: SensorNode, sigma_y: np.ndarray, D: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """The pair ``(Z, C)`` entering the stationarity conditions.

    ``Z = W Sn^{-1} (Sn^{-1} + D^{-1} - Sy^{-1})^{-1} Sn^{-1} W^T`` carries the
    allocation dependence (note ``W Sv^{-1} W^T = W Sn^{-1} W^T - Z``);
    ``C = W Sn^{-1} (Sn^{-1} - Sy^{-1})^{-1} Sn^{-1} W^T`` is its
    allocation-independent ceiling: ``Z`` is strictly below ``C`` in the PSD
    order for every finite ``D`` and approaches it as ``D`` grows.
    """
    Sn_inv = np.linalg.inv(node.Sigma_n)
    Sy_inv = np.linalg.inv(sigma_y)
    WSn = node.W @ Sn_inv
    mid_z = np.linalg.inv(sym_part(Sn_inv + np.linalg.inv(D) - Sy_inv))
    mid_c = np.linalg.inv(sym_part(Sn_inv - Sy_inv))
    Z = sym_part(WSn @ mid_z @ WSn.T)
    C = sym_part(WSn @ mid_c @ WSn.T)
    return Z, C


def noise_gram(network: FusionNetwork) -> np.ndarray:
    """``S = sum_i W_i Sigma_n_i^{-1} W_i^T`` — the analog (infinite-rate) gram."""
    S = np.zeros((network.n, network.n))
    for node in network.nodes:
        S += node.W @ np.linalg.solve(node.Sigma_n, node.W.T)
    return sym_part(S)


@dataclass(frozen=True, eq=False)
class KktState:
    """Stationarity-system variables for one allocation."""

    Z: tuple[np.ndarray, ...]
    C: tuple[np.ndarray, ...]
    A_mat: np.ndarray
    lambda_mult: float


def kkt_state(
    network: FusionNetwork, alloc: Allocation, lambda_mult: float | None = None
) -> KktState:
    """Evaluate ``(Z_i, C_i, A)`` at an allocation.

    ``A`` is the fused gram ``S - sum_i Z_i``.  If ``lambda_mult`` is not
    given, the multiplier is fitted by least squares to the stationarity
    equations ``alpha_i lambda A^2 = Z_i - Z_i C_i^{-1} Z_i``; at an exact
    stationary point the fit recovers the true multiplier.
    """
    Zs, Cs = [], []
    for node, Syi, Di in zip(network.nodes, network.sigma_y, alloc.D):
        Z, C = kkt_terms(node, Syi, Di)
        Zs.append(Z)
        Cs.append(C)
    A = sym_part(noise_gram(network) - sum(Zs))
    if lambda_mult is None:
        A2 = A @ A
        num, den = 0.0, 0.0
        for node, Z, C in zip(network.nodes, Zs, Cs):
            M = Z - Z @ np.linalg.solve(C, Z)
            num += node.alpha * float(np.tensordot(A2, M))
            den += node.alpha**2 * float(np.tensordot(A2, A2))
        lambda_mult = num / den if den > 0 else 0.0
    return KktState(Z=tuple(Zs), C=tuple(Cs), A_mat=A, lambda_mult=float(lambda_mult))


@dataclass(frozen=True)
class KktResiduals:
    """Frobenius/absolute residuals of the three stationarity conditions.

    ``stationarity``: max over nodes of ``||alpha_i lambda A^2 - Z_i + Z_i C_i^{-1} Z_i||_F``.
    ``multiplier``: ``||A - (S - sum_i Z_i)||_F``.
    ``budget``: ``|log of the determinant-product condition - log beta|`` where
    the condition's inner matrix ``Sn^{-1} W^T Z^{-1} W Sn^{-1} - Sn^{-1} + Sy^{-1}``
    reconstructs ``D_i^{-1}`` from ``Z_i``.
    """

    stationarity: float
    multiplier: float
    budget: float


def kkt_residuals(
    network: FusionNetwork, state: KktState, log_beta: float | None = None
) -> KktResiduals:
    """Residuals of the stationarity system at ``state`` (diagnostic; no raises).

    ``log_beta`` defaults to the network's budget value; pass the achieved
    value (``sum_i alpha_i logdet D_i``) to isolate internal consistency from
    budget deviation, e.g. for high-rate solutions whose achieved rate
    deliberately deviates from the budget.
    """
    A2 = state.A_mat @ state.A_mat
    stat = 0.0
    log_lhs = 0.0
    for node, Syi, Z, C in zip(network.nodes, network.sigma_y, state.Z, state.C):
        M = Z - Z @ np.linalg.solve(C, Z)
        stat = max(stat, float(np.linalg.norm(node.alpha * state.lambda_mult * A2 - M)))
        Sn_inv = np.linalg.inv(node.Sigma_n)
        WSn = Sn_inv @ node.W.T
        try:
            inner = sym_part(
                WSn @ np.linalg.solve(Z, WSn.T) - Sn_inv + np.linalg.inv(Syi)
            )
        except np.linalg.LinAlgError:
            log_lhs = np.inf
            break
        sign, ld = np.linalg.slogdet(inner)
        if sign <= 0:
            log_lhs = np.inf
            break
        log_lhs += -node.alpha * ld
    mult = float(np.linalg.norm(state.A_mat - (noise_gram(network) - sum(state.Z))))
    target = network.log_beta if log_beta is None else float(log_beta)
    budget = float(abs(log_lhs - target)) if np.isfinite(log_lhs) else np.inf
    return KktResiduals(stationarity=stat, multiplier=mult, budget=budget)


# --------------------------------------------------------------------------
# High-rate allocator
# --------------------------------------------------------------------------


def highrate_rmin(network: FusionNetwork) -> float:
    """Feasibility threshold of the high-rate allocator (nats).

    Below this budget the high-rate multiplier equation has no root: the
    water-level product is bounded by ``|S|`` and the requested determinant
    budget exceeds what even infinite ``lambda`` provides.
    """
    _, ld_S = np.linalg.slogdet(noise_gram(network))
    n = network.n
    acc = 0.0
    for node, Syi in zip(network.nodes, network.sigma_y):
        _, ld_y = np.linalg.slogdet(Syi)
        _, ld_n = np.linalg.slogdet(node.Sigma_n)
        ld_w = np.linalg.slogdet(node.W)[1]
        acc += node.alpha * (ld_y - n * np.log(node.alpha) - 2.0 * ld_n + 2.0 * ld_w)
    return 0.5 * float(acc - ld_S)


@dataclass(frozen=True, eq=False)
class HighRateResult:
    """High-rate allocation plus the construction's internals.

    ``achieved_rate`` is the weighted sum-rate the returned allocation
    actually consumes; it differs from ``budget`` by the approximation error
    (always undershooting), which vanishes as the budget grows.
    ``node_valid``/``valid`` report whether the constructed distortions are
    SPD and dominated by the observation covariances — near the feasibility
    threshold the approximation can break down.
    """

    allocation: Allocation
    achieved_rate: float
    budget: float
    lambda_mult: float
    A_mat: np.ndarray
    S: np.ndarray
    r_min: float
    node_valid: tuple[bool, ...]
    valid: bool


def highrate_allocate(network: FusionNetwork) -> HighRateResult:
    """Distortion allocation from the high-rate stationarity approximation.

    Steps: form the analog gram ``S`` and its eigenvalues; reduce the
    determinant budget to the water constant ``gamma``; solve the scalar
    multiplier equation for ``lambda`` by bisection in ``log lambda``; build
    ``A`` from the per-eigenvalue quadratic ``lambda a^2 + a = s``; set
    ``Z_i = alpha_i lambda A^2`` and invert the ``Z``-definition for ``D_i``.

    Raises :class:`InfeasibleBudget` when ``R`` is below the threshold of
    :func:`highrate_rmin` (the multiplier equation has no root there).
    """
    r_min = highrate_rmin(network)
    if network.R < r_min:
        raise InfeasibleBudget(
            f"budget R = {network.R:.6g} nats is below the high-rate "
            f"feasibility threshold {r_min:.6g}"
        )
    n = network.n
    S = noise_gram(network)
    U_s, s = sym_eig_desc(S)
    log_gamma = network.log_beta
    for node in network.nodes:
        _, ld_n = np.linalg.slogdet(node.Sigma_n)
        ld_w = np.linalg.slogdet(node.W)[1]
        log_gamma -= node.alpha * (n * np.log(node.alpha) + 2.0 * ld_n - 2.0 * ld_w)

    def g(t):
        lam = np.exp(t)
        x = 4.0 * lam * s
        logf = float(
            np.sum(2.0 * np.log(x) - 2.0 * np.log(np.sqrt(1.0 + x) + 1.0))
            - n * (np.log(4.0) + t)
        )
        return logf - log_gamma

    t_lo = np.log(1e-18)
    for _ in range(600):
        if g(t_lo) < 0.0:
            break
        t_lo -= np.log(4.0)
    else:
        raise InfeasibleBudget("multiplier bracketing failed from below")
    t_hi = max(t_lo + np.log(4.0), 0.0)
    for _ in range(600):
        if g(t_hi) > 0.0:
            break
        t_hi += np.log(2.0)
    else:
        raise InfeasibleBudget(
            "budget is too close to the feasibility threshold: "
            "the multiplier equation has no reachable root"
        )
    t = bisect(g, t_lo, t_hi, xtol=1e-12, maxiter=200)
    lam = float(np.exp(t))

    a = 2.0 * s / (np.sqrt(1.0 + 4.0 * lam * s) + 1.0)  # root of lam*a^2 + a = s
    A = sym_part(U_s.T @ (a[:, None] * U_s))
    a2 = a**2

    Ds, node_valid = [], []
    for node, Syi in zip(network.nodes, network.sigma_y):
        Z_inv = U_s.T @ (U_s / (node.alpha * lam * a2[:, None]))
        Sn_inv = np.linalg.inv(node.Sigma_n)
        WSn = Sn_inv @ node.W.T
        D_inv = sym_part(WSn @ Z_inv @ WSn.T - Sn_inv + np.linalg.inv(Syi))
        ok = bool(np.linalg.eigvalsh(D_inv)[0] > 0.0)
        Di = sym_part(np.linalg.inv(D_inv))
        ok = ok and psd_leq(Di, Syi, tol=ALLOC_TOL)
        Ds.append(psd_repair(Di) if ok else Di)
        node_valid.append(ok)

    alloc = Allocation(D=tuple(Ds))
    valid = all(node_valid)
    if valid:
        achieved = weighted_sum_rate(network, alloc)
    else:
        achieved = float("nan")
    return HighRateResult(
        allocation=alloc,
        achieved_rate=achieved,
        budget=network.R,
        lambda_mult=lam,
        A_mat=A,
        S=S,
        r_min=r_min,
        node_valid=tuple(node_valid),
        valid=valid,
    )


def highrate_state(network: FusionNetwork, result: HighRateResult) -> KktState:
    """KKT-state view of a high-rate solution (``Z_i = alpha_i lambda A^2``)."""
    A2 = result.A_mat @ result.A_mat
    Zs = tuple(node.alpha * result.lambda_mult * A2 for node in network.nodes)
    Cs = tuple(
        kkt_terms(node, Syi, Syi)[1]
        for node, Syi in zip(network.nodes, network.sigma_y)
    )
    return KktState(Z=Zs, C=Cs, A_mat=result.A_mat, lambda_mult=result.lambda_mult)


# --------------------------------------------------------------------------
# Scalar two-node closed form
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ScalarAllocationResult:
    """Closed-form scalar allocation with regime label and boundary sweep.

    ``(D1, D2)`` is the stationary point of the SNR on the rate-constraint
    curve; per the regime it is the unique maximizer (``R > r_max``), the
    unique minimizer (``R < r_min``), or infeasible/unclassified (between).
    The sweep walks the feasible constraint curve (log-spaced in ``D1``) and
    records the best point found, which is the operational answer whenever the
    stationary point is not the maximizer.
    """

    D1: float
    D2: float
    regime: str
    r_max: float
    r_min: float
    beta: float
    stationary_feasible: bool
    stationary_snr_db: float
    sweep_d1: np.ndarray
    sweep_d2: np.ndarray
    sweep_snr_db: np.ndarray
    best_d1: float
    best_d2: float
    best_snr_db: float


def scalar_allocate(network: FusionNetwork, sweep_points: int = 1000) -> ScalarAllocationResult:
    """Two-node scalar allocation: stationary point, regime, boundary sweep.

    Requires ``n = 1``, two nodes, equal weights ``1/2``, and equal mixing
    scalars (the closed form is derived under these assumptions); otherwise
    raises :class:`AssumptionViolated`.
    """
    if network.n != 1 or network.n_nodes != 2:
        raise AssumptionViolated("closed form needs two scalar nodes")
    w1 = float(network.nodes[0].W[0, 0])
    w2 = float(network.nodes[1].W[0, 0])
    if abs(network.nodes[0].alpha - 0.5) > 1e-12 or abs(network.nodes[1].alpha - 0.5) > 1e-12:
        raise AssumptionViolated("closed form needs alpha_1 = alpha_2 = 1/2")
    if abs(w1 - w2) > 1e-12 * max(abs(w1), abs(w2)):
        raise AssumptionViolated("closed form needs equal mixing scalars")

    Sy1 = float(network.sigma_y[0][0, 0])
    Sy2 = float(network.sigma_y[1][0, 0])
    Sn1 = float(network.nodes[0].Sigma_n[0, 0])
    Sn2 = float(network.nodes[1].Sigma_n[0, 0])
    R = network.R

    Sig1 = Sn1 - Sn1**2 / Sy1
    Sig2 = Sn2 - Sn2**2 / Sy2
    beta = float(np.exp(-2.0 * R) * np.sqrt(Sy1 * Sy2))

    r_max = 0.25 * float(np.log(max(Sig1, Sig2) ** 2 / ((Sn1 - Sig1) * (Sn2 - Sig2))))
    r_min = 0.25 * float(np.log(min(Sig1, Sig2) ** 2 / ((Sn1 - Sig1) * (Sn2 - Sig2))))

    with np.errstate(divide="ignore", invalid="ignore"):
        d1 = beta * (Sn1 / Sn2) * (Sn1 * Sn2 - Sig2 * beta) / (Sn1 * Sn2 - Sig1 * beta)
        d2 = beta * (Sn2 / Sn1) * (Sn1 * Sn2 - Sig1 * beta) / (Sn1 * Sn2 - Sig2 * beta)
    d1, d2 = float(d1), float(d2)

    if R > r_max:
        regime = REGIME_MAXIMIZER
    elif R < r_min:
        regime = REGIME_MINIMIZER
    else:
        regime = REGIME_BOUNDARY

    def snr_db(D1: float, D2: float) -> float:
        alloc = Allocation(D=(np.array([[D1]]), np.array([[D2]])))
        return output_snr(network, alloc, validate=False).db

    feasible = (
        np.isfinite(d1)
        and np.isfinite(d2)
        and 0.0 < d1 <= Sy1 * (1.0 + 1e-12)
        and 0.0 < d2 <= Sy2 * (1.0 + 1e-12)
    )
    stat_snr = snr_db(min(d1, Sy1), min(d2, Sy2)) if feasible else float("nan")

    # Feasible constraint curve: D2 = beta^2 / D1 with both coordinates below
    # their observation variances.
    lo = beta**2 / Sy2
    hi = Sy1
    grid = np.geomspace(lo, hi, sweep_points)
    snrs = np.array([snr_db(float(g), float(beta**2 / g)) for g in grid])
    k = int(np.argmax(snrs))

    return ScalarAllocationResult(
        D1=d1,
        D2=d2,
        regime=regime,
        r_max=r_max,
        r_min=r_min,
        beta=beta,
        stationary_feasible=bool(feasible),
        stationary_snr_db=stat_snr,
        sweep_d1=grid,
        sweep_d2=beta**2 / grid,
        sweep_snr_db=snrs,
        best_d1=float(grid[k]),
        best_d2=float(beta**2 / grid[k]),
        best_snr_db=float(snrs[k]),
    )


# --------------------------------------------------------------------------
# Random valid allocations
# --------------------------------------------------------------------------


def random_valid_allocations(
    network: FusionNetwork,
    base: Allocation,
    beta_w: float | Sequence[float],
    eta_w: float | Sequence[float],
    L: int,
    rng: np.random.Generator | int,
    max_consecutive_failures: int = 10**6,
) -> list[Allocation]:
    """Generate ``L`` budget-exact allocations around (or away from) ``base``.

    Each node's draw keeps the base eigenvectors and perturbs the spectrum:
    ``D_i = U_i^T (beta_w_i L_i + eta_w_i Theta_i) U_i`` with ``Theta_i``
    diagonal uniform on ``[0, 5 iota_i]`` (``iota_i`` = largest base
    eigenvalue).  Nodes before the last are redrawn until valid; the last
    node's draw is rescaled in closed form so the weighted sum-rate equals the
    network budget exactly, and redrawn (alone) if the rescaled matrix is
    invalid.  If the last node keeps failing — the leading draws can strand
    the budget when there are many nodes — the whole allocation is restarted.
    Raises :class:`GenerationStalled` after ``max_consecutive_failures``
    rejections in a row.
    """
    if L < 1:
        raise InvalidParam("L must be >= 1")
    if len(base.D) != network.n_nodes:
        raise InvalidAllocation("base allocation does not match the network")
    if hasattr(rng, "generator"):
        rng = rng.generator()
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    n, N = network.n, network.n_nodes
    betas = np.broadcast_to(np.asarray(beta_w, dtype=float), (N,))
    etas = np.broadcast_to(np.asarray(eta_w, dtype=float), (N,))
    if np.any(betas < 0) or np.any(etas < 0):
        raise InvalidParam("perturbation weights must be nonnegative")

    eigs = [sym_eig_desc(Di) for Di in base.D]
    iotas = [ev[1][0] for ev in eigs]
    alphas = network.alphas
    log_beta = network.log_beta

    out: list[Allocation] = []
    failures = 0  # consecutive rejections since the last emitted allocation

    def draw(i: int) -> np.ndarray:
        theta = rng.uniform(0.0, 5.0 * iotas[i], size=n)
        return betas[i] * eigs[i][1] + etas[i] * theta

    def stalled() -> None:
        nonlocal failures
        failures += 1
        if failures > max_consecutive_failures:
            raise GenerationStalled(
                f"{failures} consecutive invalid draws; "
                "perturbation weights are incompatible with the constraints"
            )

    while len(out) < L:
        Ds: list[np.ndarray] = []
        lead_logdet = 0.0
        for i in range(N - 1):
            while True:
                d = draw(i)
                if np.all(d > 0.0):
                    U = eigs[i][0]
                    Di = sym_part(U.T @ (d[:, None] * U))
                    if psd_leq(Di, network.sigma_y[i], tol=ALLOC_TOL):
                        Ds.append(Di)
                        lead_logdet += alphas[i] * float(np.log(d).sum())
                        break
                stalled()
        for _ in range(1000):  # then restart the leading draws
            d = draw(N - 1)
            if np.all(d > 0.0):
                log_c = (
                    log_beta - lead_logdet - alphas[-1] * float(np.log(d).sum())
                ) / (n * alphas[-1])
                d_scaled = np.exp(log_c) * d
                U = eigs[N - 1][0]
                Dn = sym_part(U.T @ (d_scaled[:, None] * U))
                if psd_leq(Dn, network.sigma_y[N - 1], tol=ALLOC_TOL):
                    out.append(Allocation(D=tuple(Ds + [Dn])))
                    failures = 0
                    break
            stalled()
    return out
