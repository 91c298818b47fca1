"""Steady-state Riccati solvers for the LQG pieces of the rate-cost bounds.

Both solvers run plain value iteration to a Frobenius-norm fixed-point
tolerance.  Value iteration is slower than a Schur/invariant-subspace solver
but it is the direct transcription of the finite-horizon recursions whose
limits define every quantity used by the bounds, which makes the iterates
easy to audit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sysmodel import LinearPlant

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 100_000


class RiccatiError(RuntimeError):
    pass


@dataclass(frozen=True)
class ControlRiccati:
    """Fixed point of S = Q + A^T (S - M) A.

    M = S B (R + B^T S B)^{-1} B^T S is the per-step cost curvature of the
    control channel and L = (R + B^T S B)^{-1} B^T S the static gain; the
    certainty-equivalent control is u = -L A x_hat.
    """

    S: np.ndarray
    M: np.ndarray
    L: np.ndarray
    gain_cost: np.ndarray  # R + B^T S B, the weight on control mismatch
    iterations: int
    residual: float
    pseudo_inverse_used: bool


@dataclass(frozen=True)
class FilterRiccati:
    """Steady state of the one-step-ahead error recursion.

    P is the prediction error covariance, K the stationary filter gain,
    Sigma = P - K (C P C^T + Sigma_W) K^T the filtered error covariance and
    N = K (C P C^T + Sigma_W) K^T the covariance of the estimator's
    innovation jump (equivalently A Sigma A^T - Sigma + Sigma_V).
    """

    P: np.ndarray
    K: np.ndarray
    Sigma: np.ndarray
    N: np.ndarray
    innovation_cov: np.ndarray
    iterations: int
    residual: float
    pseudo_inverse_used: bool


def _solve_psd(mat: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, bool]:
    """Solve mat @ x = rhs for symmetric PSD mat; pseudo-inverse fallback."""
    try:
        chol = np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        return np.linalg.pinv(mat) @ rhs, True
    y = np.linalg.solve(chol, rhs)
    return np.linalg.solve(chol.T, y), False


def _sym(mat: np.ndarray) -> np.ndarray:
    return (mat + mat.T) / 2.0


def solve_control(
    plant: LinearPlant,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> ControlRiccati:
    """Value-iterate S <- Q + A^T (S - M(S)) A from S = Q."""
    a, b, q, r = plant.A, plant.B, plant.Q, plant.R
    s = q.copy()
    used_pinv = False
    for it in range(1, max_iter + 1):
        bs = b.T @ s
        gain_cost = r + bs @ b
        l_gain, pinv = _solve_psd(gain_cost, bs)
        used_pinv = used_pinv or pinv
        m = _sym(bs.T @ l_gain)
        s_next = _sym(q + a.T @ (s - m) @ a)
        delta = float(np.linalg.norm(s_next - s))
        s = s_next
        if delta < tol:
            break
    else:
        raise RiccatiError(f"control Riccati did not converge in {max_iter} iterations")

    bs = b.T @ s
    gain_cost = r + bs @ b
    l_gain, pinv = _solve_psd(gain_cost, bs)
    used_pinv = used_pinv or pinv
    m = _sym(bs.T @ l_gain)
    residual = float(np.linalg.norm(s - _sym(q + a.T @ (s - m) @ a)))
    return ControlRiccati(
        S=s,
        M=m,
        L=l_gain,
        gain_cost=gain_cost,
        iterations=it,
        residual=residual,
        pseudo_inverse_used=used_pinv,
    )


def solve_filter(
    plant: LinearPlant,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> FilterRiccati:
    """Value-iterate P <- A (I - K C) P A^T + Sigma_V from P = Sigma_X1.

    Requires gaussian process/observation noise; the filter is only the
    conditional-mean estimator in that case.
    """
    if plant.fully_observed:
        raise RiccatiError("filter Riccati applies to partially observed plants only")
    if not plant.noise_v.is_gaussian or (plant.noise_w is not None and not plant.noise_w.is_gaussian):
        raise RiccatiError("filter Riccati requires gaussian noise_v and noise_w")
    a, c = plant.A, plant.C
    sigma_v = plant.noise_v.covariance
    sigma_w = plant.obs_cov

    p = plant.noise_x1.covariance.copy()
    used_pinv = False
    for it in range(1, max_iter + 1):
        innov = _sym(c @ p @ c.T + sigma_w)
        k_gain_t, pinv = _solve_psd(innov, c @ p)
        used_pinv = used_pinv or pinv
        k = k_gain_t.T
        p_next = _sym(a @ (p - k @ c @ p) @ a.T + sigma_v)
        delta = float(np.linalg.norm(p_next - p))
        p = p_next
        if delta < tol:
            break
    else:
        raise RiccatiError(f"filter Riccati did not converge in {max_iter} iterations")

    innov = _sym(c @ p @ c.T + sigma_w)
    k_gain_t, pinv = _solve_psd(innov, c @ p)
    used_pinv = used_pinv or pinv
    k = k_gain_t.T
    sigma = _sym(p - k @ innov @ k.T)
    n_jump = _sym(k @ innov @ k.T)
    residual = float(np.linalg.norm(p - _sym(a @ sigma @ a.T + sigma_v)))
    return FilterRiccati(
        P=p,
        K=k,
        Sigma=sigma,
        N=n_jump,
        innovation_cov=innov,
        iterations=it,
        residual=residual,
        pseudo_inverse_used=used_pinv,
    )


def b_min(
    plant: LinearPlant,
    control: ControlRiccati,
    filt: FilterRiccati | None = None,
) -> float:
    """Infimum of attainable LQR cost at unconstrained communication.

    tr(Sigma_V S) for a fully observed plant; partially observed plants pay
    the additional irreducible estimation term tr(Sigma A^T M A).
    """
    base = float(np.trace(plant.noise_v.covariance @ control.S))
    if filt is None:
        return base
    w = plant.A.T @ control.M @ plant.A
    return base + float(np.trace(filt.Sigma @ w))
