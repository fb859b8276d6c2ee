"""Classical gap metrics between subspaces via principal angles."""

from __future__ import annotations

import numpy as np

from .space import SubspaceBasis, check_same_space


def _sin_cos(U: SubspaceBasis, V: SubspaceBasis) -> tuple[float, float]:
    """(sin, cos) of the largest angle from U into V.

    ``sin`` is ``||(I - P_V) P_U||`` and ``cos`` the smallest singular value of
    ``P_V`` restricted to U (zero when dim U > dim V).
    """
    Qu, Qv = U.unitary, V.unitary
    R = Qu - Qv @ (Qv.conj().T @ Qu)
    R = R - Qv @ (Qv.conj().T @ R)
    s = float(np.linalg.norm(R, 2))
    if V.dim < U.dim:
        c = 0.0
    else:
        c = float(np.linalg.svd(Qv.conj().T @ Qu, compute_uv=False)[-1])
    return min(s, 1.0), min(c, 1.0)


def principal_angles(U: SubspaceBasis, V: SubspaceBasis) -> np.ndarray:
    """Principal angles (ascending) between U and V, min(dim U, dim V) of them."""
    check_same_space(U, V)
    if U.dim == 0 or V.dim == 0:
        return np.zeros(0)
    sv = np.linalg.svd(V.unitary.conj().T @ U.unitary, compute_uv=False)
    return np.sort(np.arccos(np.clip(sv, 0.0, 1.0)))


def delta(U: SubspaceBasis, V: SubspaceBasis) -> float:
    """sup over unit u in U of dist(u, V); zero for U = {0}."""
    check_same_space(U, V)
    if U.dim == 0:
        return 0.0
    if V.dim == 0:
        return 1.0
    return _sin_cos(U, V)[0]


def gap_hat(U: SubspaceBasis, V: SubspaceBasis) -> float:
    return max(delta(U, V), delta(V, U))


def d_metric(U: SubspaceBasis, V: SubspaceBasis) -> float:
    """sup over the unit sphere of U of the distance to the unit sphere of V."""
    check_same_space(U, V)
    if U.dim == 0:
        return 0.0
    if V.dim == 0:
        return 2.0
    s, c = _sin_cos(U, V)
    # 2 sin(θ/2) with θ recovered stably from both sine and cosine
    theta = np.arctan2(s, c)
    return float(2.0 * np.sin(theta / 2.0))


def dhat_metric(U: SubspaceBasis, V: SubspaceBasis) -> float:
    return max(d_metric(U, V), d_metric(V, U))
