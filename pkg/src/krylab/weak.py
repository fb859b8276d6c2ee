"""Weak gap distances between bounded sets of the unit ball.

The inner problem ``inf_{v in B_V} ||x - v||_w`` over a subspace ball is a
convex weighted-ℓ¹ fit with a Euclidean ball constraint.  It is solved by
iteratively reweighted least squares (a majorize-minimize scheme on a Huber
smoothing) with a trust-region step per iteration.  Every iterate gives a
primal value (upper bound) and a dual feasible point, so the reported
interval ``[lower, upper]`` is certified.

The outer problem maximizes a convex function over a ball, so it is searched
on the sphere: exhaustively when the dimension is at most two, otherwise by
multi-start ascent along dual subgradients.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import DimTooLarge, SpaceMismatch
from .space import AmbientSpace, CoeffVector, SubspaceBasis, WeakNormSpec, check_same_space, norm


# ---------------------------------------------------------------------------
# sets


class BallSet:
    space: AmbientSpace
    convex = True
    balanced = True

    @property
    def intrinsic_dim(self) -> int:
        return 0


@dataclass(frozen=True, eq=False)
class SubspaceBall(BallSet):
    basis: SubspaceBasis

    @property
    def space(self):
        return self.basis.space

    @property
    def intrinsic_dim(self):
        return self.basis.dim

    @property
    def columns(self) -> np.ndarray:
        return self.basis.columns


@dataclass(frozen=True, eq=False)
class FiniteSet(BallSet):
    members: tuple
    convex = False
    balanced = False

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValueError("a finite set needs at least one member")
        check_same_space(*members)
        for m in members:
            if norm(m) > 1 + 1e-12:
                raise ValueError("members must lie in the closed unit ball")
        object.__setattr__(self, "members", members)

    @property
    def space(self):
        return self.members[0].space

    def matrix(self) -> np.ndarray:
        return np.column_stack([m.coords for m in self.members])


@dataclass(frozen=True, eq=False)
class Singleton(FiniteSet):
    def __init__(self, v: CoeffVector):
        object.__setattr__(self, "members", (v,))
        self.__post_init__()

    @property
    def vector(self) -> CoeffVector:
        return self.members[0]

    @property
    def convex(self):
        return True

    @property
    def balanced(self):
        return not np.any(self.vector.coords)


def as_ballset(obj) -> BallSet:
    if isinstance(obj, BallSet):
        return obj
    if isinstance(obj, SubspaceBasis):
        return SubspaceBall(obj)
    if isinstance(obj, CoeffVector):
        return Singleton(obj)
    raise TypeError(f"cannot interpret {type(obj).__name__} as a ball set")


# ---------------------------------------------------------------------------
# config and report


@dataclass(frozen=True)
class WeakGapConfig:
    inner_iters: int = 600
    inner_tol: float = 1e-7
    outer_starts: int = 64
    outer_iters: int = 40
    outer_grid: float = 0.05
    seed: int = 0
    row_cut: float = 2.0 ** -60

    def __post_init__(self):
        for name in ("inner_iters", "outer_iters"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.outer_starts < 0 or self.inner_tol <= 0 or self.outer_grid <= 0:
            raise ValueError("budgets and tolerances must be positive")

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


class Method:
    CLOSED_FORM = "ClosedForm"
    HEURISTIC = "Heuristic"
    ORACLE = "Oracle"


@dataclass
class GapReport:
    value: float
    method: str
    certified_bounds: tuple | None
    config: dict = field(default_factory=dict)
    witness: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.certified_bounds is not None:
            lo, hi = self.certified_bounds
            slack = 1e-12 * max(1.0, abs(self.value))
            if not (lo - slack <= self.value <= hi + slack):
                raise AssertionError(f"value {self.value} outside bounds {self.certified_bounds}")

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "method": self.method,
            "bounds": None if self.certified_bounds is None else list(self.certified_bounds),
            "config_digest": self.config.get("digest", ""),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _echo(cfg: WeakGapConfig, **extra) -> dict:
    return {**asdict(cfg), "digest": cfg.digest(), **extra}


# ---------------------------------------------------------------------------
# inner solver


@dataclass
class InnerSolution:
    upper: np.ndarray  # primal values (all rows)
    lower: np.ndarray  # dual values
    coeffs: np.ndarray  # minimizers c, shape (m, p)
    duals: np.ndarray  # λ on all rows, shape (m, D)


def _active_rows(omega: np.ndarray, X: np.ndarray, B: np.ndarray, budget: float) -> np.ndarray:
    """Rows kept by the inner solver.

    Dropping a row changes the objective by at most ``ω_t (|x_t| + ||B_t||)``;
    the discarded total stays below ``budget``.  The primal value is always
    evaluated on every row, so only the dual bound can lose this slack.
    """
    size = omega * (np.abs(X).max(axis=0) + np.linalg.norm(B, axis=1))
    order = np.argsort(size)
    tail = np.cumsum(size[order])
    drop = order[tail <= budget]
    keep = np.ones(len(omega), dtype=bool)
    keep[drop] = False
    keep &= omega > 0
    if not np.any(keep):
        keep[np.argmax(omega)] = True
    return np.nonzero(keep)[0]


def _realify(B: np.ndarray) -> np.ndarray:
    """(T, p) complex -> (T, 2, 2p) real map from [Re c, Im c] to [Re, Im] of B c."""
    Re, Im = B.real, B.imag
    top = np.concatenate([Re, -Im], axis=1)
    bot = np.concatenate([Im, Re], axis=1)
    return np.stack([top, bot], axis=1)


def _inner_subspace(X: np.ndarray, B: np.ndarray, omega: np.ndarray, cfg: WeakGapConfig, qw=None) -> InnerSolution:
    """Minimize ``Σ ω |x - B c|`` over ``||c|| <= 1`` for each row x of X.

    ``X`` has shape (m, D) and ``B`` shape (D, p) in coordinates.  Log-barrier
    path following on the second-order-cone form; the epigraph variables are
    eliminated in closed form, leaving a smooth convex problem in ``c``.  The
    barrier gradients ``λ_t`` satisfy ``|λ_t| < ω_t`` and give the dual bound
    ``Re <λ, x> - ||B^H λ||``.
    """
    m, D = X.shape
    p = B.shape[1]
    if p == 0:
        up = np.abs(X) @ omega
        lam = omega * _phase(X)
        return InnerSolution(up, up.copy(), np.zeros((m, 0), complex), lam)
    rows = _active_rows(omega, X, B, 0.1 * cfg.inner_tol)
    w = omega[rows]
    w2 = w * w
    Bt = B[rows]
    Br = _realify(Bt)  # (T, 2, 2p)
    T = len(rows)
    BrF = Br.reshape(2 * T, 2 * p)
    Xt = X[:, rows]
    ar = np.stack([Xt.real, Xt.imag], axis=2)  # (m, T, 2)
    n = 2 * p

    def primal(C, Xs=X):
        return np.abs(Xs - C @ B.T) @ omega

    def to_c(x):
        return x[:, :p] + 1j * x[:, p:]

    def resid(x, a):
        return a - (x @ BrF.T).reshape(len(x), T, 2)

    def barrier_value(x, mu, r):
        rho2 = (r * r).sum(axis=2)
        S = np.sqrt(mu[:, None] ** 2 + w2 * rho2)
        nx = 1.0 - (x * x).sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            val = (S - mu[:, None] * np.log(mu[:, None] + S)).sum(axis=1) - mu * np.log(nx)
        return np.where(nx > 0, val, np.inf)

    def dual_bound(r, mu, Xs):
        rho2 = (r * r).sum(axis=2)
        S = np.sqrt(mu[:, None] ** 2 + w2 * rho2)
        coef = w2 / (mu[:, None] + S)  # |λ_t| = coef * ρ_t < ω_t
        lam_r = coef[:, :, None] * r
        lam = lam_r[:, :, 0] + 1j * lam_r[:, :, 1]
        lo = np.real(np.sum(lam.conj() * Xs, axis=1)) - np.linalg.norm(lam @ Bt.conj(), axis=1)
        return lam, lo

    # strictly feasible start: the orthogonal projection pulled into the ball
    qw = np.ones(D) if qw is None else qw
    C0 = (X * qw) @ B.conj()
    C0 *= (0.5 / np.maximum(np.linalg.norm(C0, axis=1), 1.0))[:, None]
    x = np.concatenate([C0.real, C0.imag], axis=1)

    best_up = primal(np.zeros((m, p), complex))
    best_c = np.zeros((m, p), complex)
    best_lo = np.full(m, -np.inf)
    best_lam = np.zeros((m, len(rows)), complex)
    up0 = primal(C0)
    better = up0 < best_up
    best_up[better] = up0[better]
    best_c[better] = C0[better]

    mu = np.full(m, 0.1 * max(w.max(), 1e-300) * max(1.0, float(np.abs(Xt).max(initial=0.0))))
    active = np.ones(m, dtype=bool)
    eye = np.eye(n)
    newton_steps = 0
    for _ in range(60):
        idx = np.nonzero(active)[0]
        if len(idx) == 0:
            break
        # Newton centering at the current barrier weight
        for _inner_it in range(50):
            xi, mui, ai = x[idx], mu[idx], ar[idx]
            r = resid(xi, ai)
            rho2 = (r * r).sum(axis=2)
            S = np.sqrt(mui[:, None] ** 2 + w2 * rho2)
            alpha = w2 / (mui[:, None] + S)
            beta = w2 * mui[:, None] / (S * (mui[:, None] + S))
            k = len(idx)
            g = -((alpha[:, :, None] * r).reshape(k, 2 * T) @ BrF)
            arep = np.repeat(alpha, 2, axis=1)
            H = (BrF.T[None, :, :] * arep[:, None, :]) @ BrF
            rho = np.sqrt(rho2)
            safe = np.where(rho > 0, rho, 1.0)
            rhat = r / safe[:, :, None]
            u = rhat[:, :, 0, None] * Br[None, :, 0, :] + rhat[:, :, 1, None] * Br[None, :, 1, :]
            cu = ((beta - alpha) * (rho > 0))[:, :, None] * u
            H += cu.transpose(0, 2, 1) @ u
            nx = 1.0 - (xi * xi).sum(axis=1)
            g += (2 * mui / nx)[:, None] * xi
            H += (2 * mui / nx)[:, None, None] * eye + (4 * mui / nx**2)[:, None, None] * (xi[:, :, None] * xi[:, None, :])
            H += 1e-300 * eye
            try:
                d = -np.linalg.solve(H, g[:, :, None])[:, :, 0]
            except np.linalg.LinAlgError:
                d = -np.linalg.lstsq(H.reshape(-1, n), g.reshape(-1), rcond=None)[0].reshape(g.shape)
            dec = -(g * d).sum(axis=1)
            newton_steps += 1
            conv = dec <= 1e-12 * np.maximum(mui, 1e-300)
            f0 = barrier_value(xi, mui, r)
            t = np.ones(len(idx))
            moving = ~conv
            for _ls in range(60):
                if not np.any(moving):
                    break
                xn = xi[moving] + t[moving, None] * d[moving]
                fn = barrier_value(xn, mui[moving], resid(xn, ai[moving]))
                ok = fn <= f0[moving] - 0.25 * t[moving] * dec[moving]
                sel = np.nonzero(moving)[0]
                xi[sel[ok]] = xn[ok]
                moving[sel[ok]] = False
                t[sel[~ok]] *= 0.5
                stuck = t < 1e-18
                moving &= ~stuck
            x[idx] = xi
            if np.all(conv | (dec <= 1e-14)):
                break
        # certify at the current centre
        xi = x[idx]
        Ci = to_c(xi)
        up = primal(Ci, X[idx])
        lam, lo = dual_bound(resid(xi, ar[idx]), mu[idx], Xt[idx])
        b_up = up < best_up[idx]
        best_up[idx[b_up]] = up[b_up]
        best_c[idx[b_up]] = Ci[b_up]
        b_lo = lo > best_lo[idx]
        best_lo[idx[b_lo]] = lo[b_lo]
        best_lam[idx[b_lo]] = lam[b_lo]
        done = (best_up[idx] - best_lo[idx] <= cfg.inner_tol) | (mu[idx] < 1e-18)
        active[idx[done]] = False
        mu[idx] *= 0.15
        if newton_steps >= cfg.inner_iters:
            break
    lam_full = np.zeros((m, D), dtype=complex)
    lam_full[:, rows] = best_lam
    return InnerSolution(best_up, np.minimum(best_lo, best_up), best_c, lam_full)


def _phase(Z: np.ndarray) -> np.ndarray:
    a = np.abs(Z)
    return np.where(a > 0, Z / np.where(a > 0, a, 1.0), 0.0)


def _inner_finite(X: np.ndarray, Vm: np.ndarray, omega: np.ndarray):
    """Exact ``min_j ||x - v_j||_w``; returns values and subgradients."""
    vals = np.stack([np.abs(X - Vm[:, j]) @ omega for j in range(Vm.shape[1])], axis=1)
    j = np.argmin(vals, axis=1)
    best = vals[np.arange(len(X)), j]
    lam = omega * _phase(X - Vm[:, j].T)
    return best, lam


def _inner(X: np.ndarray, V: BallSet, omega: np.ndarray, cfg: WeakGapConfig):
    """Returns (upper, lower, duals, exact_flag)."""
    if isinstance(V, SubspaceBall):
        sol = _inner_subspace(X, V.columns, omega, cfg, V.space.quad_weights)
        return sol.upper, sol.lower, sol.duals, False
    vals, lam = _inner_finite(X, V.matrix(), omega)
    return vals, vals, lam, True


def weak_dist_point_to_ball(x: CoeffVector, V, spec: WeakNormSpec, cfg: WeakGapConfig | None = None) -> GapReport:
    cfg = cfg or WeakGapConfig()
    V = as_ballset(V)
    check_same_space(x, V, spec)
    if norm(x) > 1 + 1e-9:
        raise ValueError("x must lie in the closed unit ball")
    up, lo, _, exact = _inner(x.coords[None, :], V, spec.position_weights, cfg)
    up, lo = float(up[0]), float(lo[0])
    if exact:
        method = Method.CLOSED_FORM
    else:
        method = Method.ORACLE if up - lo <= cfg.inner_tol else Method.HEURISTIC
    return GapReport(up, method, (lo, up), _echo(cfg))


def eps_expansion_member(x: CoeffVector, U, eps: float, spec: WeakNormSpec, cfg: WeakGapConfig | None = None) -> bool:
    """Conservative membership of ``x`` in the weak ε-expansion of ``U``."""
    cfg = cfg or WeakGapConfig()
    rep = weak_dist_point_to_ball(x, U, spec, cfg)
    return bool(rep.value < eps - cfg.inner_tol)


# ---------------------------------------------------------------------------
# outer search


def _bloch_grid(step: float) -> tuple[np.ndarray, float]:
    """Unit vectors of C² modulo a global phase, and the covering radius."""
    nt = max(2, math.ceil(math.pi / step) + 1)
    nphi = max(1, math.ceil(2 * math.pi / step))
    t = np.linspace(0.0, math.pi, nt)
    phi = 2 * math.pi * np.arange(nphi) / nphi
    T, P = np.meshgrid(t, phi, indexing="ij")
    alpha = np.stack([np.cos(T / 2).ravel(), (np.exp(1j * P) * np.sin(T / 2)).ravel()], axis=1)
    # |α(t,φ) - α(t',φ')| <= |t - t'|/2 + |φ - φ'| for the nearest grid point
    cover = (math.pi / (nt - 1)) / 4 + (2 * math.pi / nphi) / 2
    return alpha.astype(complex), cover


def _lipschitz_on(Q: np.ndarray, omega: np.ndarray) -> float:
    """Upper bound for ``||Q δ||_w / ||δ||``."""
    return float(np.sum(omega * np.linalg.norm(Q, axis=1)))


def _start_directions(Q: np.ndarray, omega: np.ndarray, cfg: WeakGapConfig) -> np.ndarray:
    p = Q.shape[1]
    rng = np.random.default_rng(cfg.seed)
    starts = []
    if cfg.outer_starts:
        starts.append(rng.standard_normal((cfg.outer_starts, p)) + 1j * rng.standard_normal((cfg.outer_starts, p)))
    # projections of the test vectors that carry non-negligible weight
    rows = np.nonzero(omega >= cfg.row_cut * omega.max())[0]
    proj = Q[rows].conj()
    keep = np.linalg.norm(proj, axis=1) > 1e-12
    if np.any(keep):
        starts.append(proj[keep])
    A = np.vstack(starts) if starts else np.ones((1, p), complex)
    return A / np.linalg.norm(A, axis=1, keepdims=True)


def _ascent(Q: np.ndarray, V: BallSet, omega: np.ndarray, cfg: WeakGapConfig, alpha: np.ndarray):
    """Dual-subgradient ascent on the sphere of span(Q) from each start.

    For a convex objective the step ``α <- Q^H λ / |Q^H λ|`` never decreases
    the value.  Inner problems are solved loosely while moving; each start stops
    once its direction settles or its value stalls.
    """
    loose = replace(cfg, inner_tol=max(cfg.inner_tol, 1e-6))
    S = len(alpha)
    best_up = np.full(S, -np.inf)
    best_lo = np.full(S, -np.inf)
    best_alpha = alpha.copy()
    lo_alpha = alpha.copy()
    active = np.ones(S, dtype=bool)
    for _ in range(cfg.outer_iters):
        idx = np.nonzero(active)[0]
        if len(idx) == 0:
            break
        a = alpha[idx]
        up, lo, lam, _ = _inner(a @ Q.T, V, omega, loose)
        gain = up - best_up[idx]
        improved = gain > 0
        best_up[idx[improved]] = up[improved]
        best_alpha[idx[improved]] = a[improved]
        raise_lo = lo > best_lo[idx]
        best_lo[idx[raise_lo]] = lo[raise_lo]
        lo_alpha[idx[raise_lo]] = a[raise_lo]
        grad = lam @ Q.conj()
        gn = np.linalg.norm(grad, axis=1)
        ok = gn > 0
        new = a.copy()
        new[ok] = grad[ok] / gn[ok, None]
        overlap = np.abs(np.sum(new.conj() * a, axis=1))
        alpha[idx] = new
        settled = (overlap > 1 - 1e-12) | (gain <= 1e-9 * np.maximum(np.abs(up), 1e-12)) | ~ok
        active[idx[settled]] = False
    return best_up, best_lo, best_alpha, lo_alpha


def _heuristic_d_w(Q, V, omega, cfg, lip):
    alpha0 = _start_directions(Q, omega, cfg)
    up, lo, best_alpha, lo_alpha = _ascent(Q, V, omega, cfg, alpha0.copy())
    # re-solve the leading candidates and the best lower-bound point tightly
    order = np.argsort(-up, kind="stable")[:4]
    cand = np.vstack([best_alpha[order], lo_alpha[[int(np.argmax(lo))]]])
    t_up, t_lo, _, _ = _inner(cand @ Q.T, V, omega, cfg)
    # deterministic reduction: max value, ties to the lowest candidate index
    k = int(np.argmax(t_up))
    value = float(t_up[k])
    lower = float(max(np.max(lo), np.max(t_lo)))
    bounds = (lower, max(value, lip)) if _contains_origin(V) else None
    return GapReport(value, Method.HEURISTIC, bounds, _echo(cfg, outer="ascent", starts=len(alpha0)), cand[k] @ Q.T)


def d_w(U, V, spec: WeakNormSpec, cfg: WeakGapConfig | None = None, strategy: str = "auto") -> GapReport:
    """``sup_{u in U} inf_{v in V} ||u - v||_w``.

    ``strategy`` is ``"auto"`` (exhaustive when dim U <= 2), ``"grid"`` or
    ``"heuristic"`` (multi-start ascent regardless of the dimension).
    """
    cfg = cfg or WeakGapConfig()
    U, V = as_ballset(U), as_ballset(V)
    check_same_space(U, V, spec)
    omega = spec.position_weights
    if strategy not in ("auto", "grid", "heuristic"):
        raise ValueError(f"unknown strategy {strategy!r}")

    if isinstance(U, FiniteSet):
        X = U.matrix().T
        up, lo, _, exact = _inner(X, V, omega, cfg)
        k = int(np.argmax(up))
        certified = exact or float(np.max(up - lo)) <= cfg.inner_tol
        method = Method.CLOSED_FORM if exact else (Method.ORACLE if certified else Method.HEURISTIC)
        return GapReport(float(up[k]), method, (float(np.max(lo)), float(up[k])), _echo(cfg, outer="enumeration"), X[k])

    Q = U.columns
    p = Q.shape[1]
    if p == 0:
        # U = {0}: distance from the origin to V
        zero = np.zeros((1, U.space.dim), dtype=complex)
        up, lo, _, exact = _inner(zero, V, omega, cfg)
        return GapReport(float(up[0]), Method.CLOSED_FORM if exact else Method.ORACLE, (float(lo[0]), float(up[0])), _echo(cfg, outer="origin"))

    lip = _lipschitz_on(Q, omega)
    use_grid = strategy == "grid" or (strategy == "auto" and p <= 2)
    if use_grid and p > 2:
        raise DimTooLarge("exhaustive outer grid needs dim U <= 2")
    if not V.convex:
        return _d_w_nonconvex(U, V, omega, cfg, use_grid, lip)

    if use_grid:
        if p == 1 and V.balanced:
            alpha, cover = np.ones((1, 1), complex), 0.0
        elif p == 1:
            n = max(1, math.ceil(2 * math.pi / cfg.outer_grid))
            alpha = np.exp(2j * math.pi * np.arange(n) / n)[:, None]
            cover = math.pi / n
        elif V.balanced:
            alpha, cover = _bloch_grid(cfg.outer_grid)
        else:
            base, cover = _bloch_grid(cfg.outer_grid)
            n = max(1, math.ceil(2 * math.pi / cfg.outer_grid))
            ph = np.exp(2j * math.pi * np.arange(n) / n)
            alpha = (base[:, None, :] * ph[None, :, None]).reshape(-1, 2)
            cover += math.pi / n
        up, lo, _, exact = _inner(alpha @ Q.T, V, omega, cfg)
        k = int(np.argmax(up))
        value = float(up[k])
        upper = value + lip * cover
        lower = float(np.max(lo))
        certified = exact or float(np.max(up - lo)) <= cfg.inner_tol
        method = Method.ORACLE if certified else Method.HEURISTIC
        return GapReport(value, method, (lower, upper), _echo(cfg, outer="grid", cover=cover), alpha[k] @ Q.T)

    return _heuristic_d_w(Q, V, omega, cfg, lip)


def _contains_origin(V: BallSet) -> bool:
    if isinstance(V, SubspaceBall):
        return True
    return bool(np.any(np.all(V.matrix() == 0, axis=0)))


def _d_w_nonconvex(U: SubspaceBall, V: BallSet, omega, cfg, use_grid, lip):
    """Outer search over the whole ball (the objective is a min of convex functions)."""
    Q = U.columns
    p = Q.shape[1]
    step = cfg.outer_grid
    if use_grid:
        pts, cover = ball_grid(p, step)
    else:
        dirs = _start_directions(Q, omega, cfg)
        radii = np.linspace(0.0, 1.0, 21)
        pts = (radii[:, None, None] * dirs[None]).reshape(-1, p)
        cover = None
    up, lo, _, _ = _inner(pts @ Q.T, V, omega, cfg)
    k = int(np.argmax(up))
    value = float(up[k])
    if cover is not None:
        return GapReport(value, Method.ORACLE, (float(np.max(lo)), value + lip * cover), _echo(cfg, outer="ball-grid"), pts[k] @ Q.T)
    return GapReport(value, Method.HEURISTIC, None, _echo(cfg, outer="radial"), pts[k] @ Q.T)


def dhat_w(U, V, spec: WeakNormSpec, cfg: WeakGapConfig | None = None, strategy: str = "auto") -> GapReport:
    a = d_w(U, V, spec, cfg, strategy)
    b = d_w(V, U, spec, cfg, strategy)
    value = max(a.value, b.value)
    methods = {a.method, b.method}
    if Method.HEURISTIC in methods:
        method = Method.HEURISTIC
    elif Method.ORACLE in methods:
        method = Method.ORACLE
    else:
        method = Method.CLOSED_FORM
    bounds = None
    if a.certified_bounds is not None and b.certified_bounds is not None:
        bounds = (max(a.certified_bounds[0], b.certified_bounds[0]), max(a.certified_bounds[1], b.certified_bounds[1]))
    return GapReport(value, method, bounds, a.config)


# ---------------------------------------------------------------------------
# brute-force oracle


def disk_grid(step: float) -> tuple[np.ndarray, float]:
    """Polar grid of the closed unit disk of C with equal radial and angular step."""
    nr = max(1, math.ceil(1.0 / step))
    n_theta = max(1, math.ceil(2 * math.pi / step))
    rho = np.linspace(0.0, 1.0, nr + 1)
    theta = 2 * math.pi * np.arange(n_theta) / n_theta
    pts = (rho[:, None] * np.exp(1j * theta)[None, :]).ravel()
    pts = np.concatenate([[0.0], pts[n_theta:]])
    # nearest point: half a radial step plus half an arc step
    cover = 0.5 / nr + 0.5 * (2 * math.pi / n_theta)
    return pts.astype(complex), cover


def ball_grid(p: int, step: float) -> tuple[np.ndarray, float]:
    """Grid of the closed unit ball of C^p (p <= 2): moduli and phases at ``step``."""
    if p == 0:
        return np.zeros((1, 0), complex), 0.0
    if p == 1:
        pts, cover = disk_grid(step)
        return pts[:, None], cover
    if p != 2:
        raise DimTooLarge("grids are limited to two complex dimensions")
    nr = max(1, math.ceil(1.0 / step))
    n_theta = max(1, math.ceil(2 * math.pi / step))
    rho = np.linspace(0.0, 1.0, nr + 1)
    R1, R2 = np.meshgrid(rho, rho, indexing="ij")
    inside = R1**2 + R2**2 <= 1.0 + 1e-12
    r1, r2 = R1[inside], R2[inside]
    ph = np.exp(2j * math.pi * np.arange(n_theta) / n_theta)
    c1 = (r1[:, None, None] * ph[None, :, None]) * np.ones((1, 1, n_theta))
    c2 = (r2[:, None, None] * ph[None, None, :]) * np.ones((1, n_theta, 1))
    pts = np.stack([c1.ravel(), c2.ravel()], axis=1)
    # points outside the quarter disk corner are not covered by the square grid;
    # the radial half-step allowance covers them
    cover = math.sqrt(2) * (0.5 / nr + 0.5 * (2 * math.pi / n_theta)) + 1.0 / nr
    return pts, cover


def sphere_grid(p: int, step: float) -> tuple[np.ndarray, float]:
    """Grid of the unit sphere of C^p (p <= 2)."""
    if p == 1:
        n_theta = max(1, math.ceil(2 * math.pi / step))
        return np.exp(2j * math.pi * np.arange(n_theta) / n_theta)[:, None], math.pi / n_theta
    if p != 2:
        raise DimTooLarge("grids are limited to two complex dimensions")
    ns = max(1, math.ceil((math.pi / 2) / step))
    n_theta = max(1, math.ceil(2 * math.pi / step))
    s = np.linspace(0.0, math.pi / 2, ns + 1)
    ph = np.exp(2j * math.pi * np.arange(n_theta) / n_theta)
    c1 = np.cos(s)[:, None, None] * ph[None, :, None] * np.ones((1, 1, n_theta))
    c2 = np.sin(s)[:, None, None] * ph[None, None, :] * np.ones((1, n_theta, 1))
    cover = (math.pi / 2) / ns / 2 + math.pi / n_theta * math.sqrt(2)
    return np.stack([c1.ravel(), c2.ravel()], axis=1), cover


def _grid_points(S: BallSet, step: float, sphere: bool) -> tuple[np.ndarray, float]:
    if isinstance(S, FiniteSet):
        return S.matrix().T, 0.0
    p = S.intrinsic_dim
    if p > 2:
        raise DimTooLarge(f"brute force needs intrinsic dimension <= 2, got {p}")
    if p == 0:
        return np.zeros((1, S.space.dim), complex), 0.0
    coeffs, cover = sphere_grid(p, step) if sphere else ball_grid(p, step)
    return coeffs @ S.columns.T, cover


def brute_force_d_w(U, V, spec: WeakNormSpec, grid_step: float = 1e-2, chunk: int = 2_000_000) -> float:
    """Exhaustive grid evaluation of ``d_w`` for sets of intrinsic dimension <= 2.

    The outer grid covers the sphere of U when V is convex, the whole ball
    otherwise.  When V is a subspace ball (or the origin) and U a subspace, the
    inner grid is invariant under the rotation by one angular step, so outer
    points differing by a global phase give identical values; only one
    representative per phase orbit is evaluated.  The result is within
    ``Lip * cover_U + cover_V`` of the true value.
    """
    U, V = as_ballset(U), as_ballset(V)
    check_same_space(U, V, spec)
    for S in (U, V):
        if not isinstance(S, FiniteSet) and S.intrinsic_dim > 2:
            raise DimTooLarge(f"brute force needs intrinsic dimension <= 2, got {S.intrinsic_dim}")
    omega = spec.position_weights
    Vpts, _ = _grid_points(V, grid_step, sphere=False)
    if isinstance(U, FiniteSet):
        Upts = U.matrix().T
    else:
        p = U.intrinsic_dim
        symmetric = isinstance(V, SubspaceBall) or (isinstance(V, Singleton) and V.balanced)
        if p == 0:
            Upts = np.zeros((1, U.space.dim), complex)
        elif not V.convex:
            Upts, _ = _grid_points(U, grid_step, sphere=False)
        elif symmetric and p == 1:
            Upts = U.columns.T.copy()
        elif symmetric and p == 2:
            coeffs, _ = sphere_grid(2, grid_step)
            n_theta = max(1, math.ceil(2 * math.pi / grid_step))
            # keep the first coordinate real: one point per phase orbit
            coeffs = coeffs.reshape(-1, n_theta, n_theta, 2)[:, 0].reshape(-1, 2)
            Upts = coeffs @ U.columns.T
        else:
            Upts, _ = _grid_points(U, grid_step, sphere=True)
    best = np.empty(len(Upts))
    per = max(1, chunk // max(1, len(Vpts)))
    for s in range(0, len(Upts), per):
        blk = Upts[s:s + per]
        acc = np.zeros((len(blk), len(Vpts)))
        for i in np.nonzero(omega)[0]:
            acc += omega[i] * np.abs(blk[:, i, None] - Vpts[None, :, i])
        best[s:s + per] = acc.min(axis=1)
    return float(best.max())
