"""Krylov bases and the solvability diagnostics built on them."""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from .errors import DegenerateComplement, NotASolution, ZeroDatum
from .operators import LinearOperatorSpec, dense_norm, op_norm_est, unitary_matrix
from .space import CoeffVector, SubspaceBasis, check_same_space, norm

DENSE_NORM_LIMIT = 1500


@dataclass(frozen=True, eq=False)
class KrylovBasis:
    base: SubspaceBasis
    order: int
    effective_dim: int
    op: LinearOperatorSpec
    g: CoeffVector
    breakdown: bool
    hessenberg: np.ndarray = field(repr=False)
    breakdown_tol: float = 1e-10

    @property
    def space(self):
        return self.base.space

    def prefix(self, N: int) -> SubspaceBasis:
        """Basis of ``K_N`` (nested prefixes of the Arnoldi basis)."""
        p = min(int(N), self.effective_dim)
        return SubspaceBasis(self.space, self.base.columns[:, :p], f"K_{N}")


def build_krylov_basis(op: LinearOperatorSpec, g: CoeffVector, N: int, breakdown_tol: float = 1e-10) -> KrylovBasis:
    """Arnoldi with two-pass classical Gram-Schmidt.

    Breakdown is declared at step p when the part of ``A q_p`` orthogonal to the
    current basis is below ``breakdown_tol * ||A q_p||``.
    """
    check_same_space(op, g)
    if N < 1:
        raise ValueError("N must be >= 1")
    space = g.space
    s = space.sqrt_weights
    gu = space.to_unitary(g.coords)
    beta = np.linalg.norm(gu)
    if beta == 0.0:
        raise ZeroDatum("Krylov subspace of the zero vector")
    N = int(N)
    D = space.dim
    Q = np.zeros((D, min(N, D)), dtype=complex)
    H = np.zeros((min(N, D) + 1, min(N, D)), dtype=complex)
    Q[:, 0] = gu / beta
    p = 1
    breakdown = False
    while p < min(N, D):
        w = s * op._apply(Q[:, p - 1] / s)
        wn = np.linalg.norm(w)
        Qp = Q[:, :p]
        h = Qp.conj().T @ w
        w = w - Qp @ h
        h2 = Qp.conj().T @ w
        w = w - Qp @ h2
        h = h + h2
        r = np.linalg.norm(w)
        H[:p, p - 1] = h
        H[p, p - 1] = r
        if r <= breakdown_tol * wn or wn == 0.0:
            breakdown = True
            break
        Q[:, p] = w / r
        p += 1
    if not breakdown and p == D and N > D:
        # the whole truncated space is spanned: nothing new can appear
        breakdown = True
    base = SubspaceBasis(space, space.from_unitary(Q[:, :p]), f"K_{p}")
    return KrylovBasis(base, N, p, op, g, breakdown, H[: p + 1, :p], breakdown_tol)


def _rel_dist(Qu: np.ndarray, fu: np.ndarray) -> float:
    r = fu - Qu @ (Qu.conj().T @ fu)
    r = r - Qu @ (Qu.conj().T @ r)
    return float(np.linalg.norm(r) / np.linalg.norm(fu))


def krylov_profile(K: KrylovBasis, f: CoeffVector, Ns=None) -> list[tuple[int, float]]:
    check_same_space(K.base, f)
    fu = f.space.to_unitary(f.coords)
    if not np.any(fu):
        raise ValueError("f must be nonzero")
    Qu = K.base.unitary
    Ns = range(1, K.order + 1) if Ns is None else Ns
    return [(int(n), _rel_dist(Qu[:, : min(n, K.effective_dim)], fu)) for n in Ns]


def krylov_error(op: LinearOperatorSpec, g: CoeffVector, f: CoeffVector, N: int, breakdown_tol: float = 1e-10) -> float:
    """``dist(f, K_N(A, g)) / ||f||``."""
    K = build_krylov_basis(op, g, N, breakdown_tol)
    return krylov_profile(K, f, [N])[0][1]


def reducibility_residual(op: LinearOperatorSpec, K: KrylovBasis) -> float:
    """``||P_K A P_{K⊥}||`` from the dense compressed block."""
    Qu = K.base.unitary
    A = unitary_matrix(op)
    QA = Qu.conj().T @ A
    block = QA - (QA @ Qu) @ Qu.conj().T
    if block.size == 0:
        return 0.0
    return float(np.linalg.norm(block, 2))


@dataclass(frozen=True)
class IntersectionMeasure:
    value: float
    complement_dim: int
    image_rank: int

    @property
    def few_complement_dims(self) -> bool:
        return self.complement_dim < 10


def intersection_measure(op: LinearOperatorSpec, K: KrylovBasis, floor_tol: float = 1e-12) -> IntersectionMeasure:
    """Smallest sine of the angle between ``A(K⊥)`` and ``K``.

    The image is restricted to singular directions of ``A P_{K⊥}`` with
    singular value at least ``floor_tol``.  Zero means the finite-section
    Krylov intersection is nontrivial.
    """
    Qu = K.base.unitary
    comp = K.base.complement().unitary
    if comp.shape[1] == 0:
        warnings.warn(DegenerateComplement("the Krylov subspace fills the truncated space"), stacklevel=2)
        return IntersectionMeasure(float("inf"), 0, 0)
    img = unitary_matrix(op) @ comp
    U, sv, _ = np.linalg.svd(img, full_matrices=False)
    r = int(np.sum(sv >= floor_tol))
    if r == 0:
        warnings.warn(DegenerateComplement("A annihilates the orthogonal complement"), stacklevel=2)
        return IntersectionMeasure(float("inf"), comp.shape[1], 0)
    Ur = U[:, :r]
    resid = Ur - Qu @ (Qu.conj().T @ Ur)
    mu = float(np.linalg.svd(resid, compute_uv=False)[-1])
    return IntersectionMeasure(mu, comp.shape[1], r)


def operator_norm(op: LinearOperatorSpec) -> float:
    if op.space.dim <= DENSE_NORM_LIMIT:
        return dense_norm(op)
    return op_norm_est(op)


def inner_approximants(op: LinearOperatorSpec, g: CoeffVector, n: int, op_norm: float | None = None) -> CoeffVector:
    """``g_n = Σ_{k<n} A^k g / (n^{2k} ||A||^k)``; satisfies ``||g - g_n|| <= ||g||/n``."""
    check_same_space(op, g)
    if n < 1:
        raise ValueError("n must be >= 1")
    if norm(g) == 0.0:
        raise ZeroDatum("inner approximants of the zero vector")
    a = operator_norm(op) if op_norm is None else float(op_norm)
    out = np.array(g.coords)
    if a == 0.0:
        return CoeffVector(g.space, out)
    term = np.array(g.coords)
    for _ in range(1, n):
        term = op._apply(term) / (n * n * a)
        out = out + term
    return CoeffVector(g.space, out)


class Verdict(str, Enum):
    SOLVABLE = "KrylovSolvable"
    NOT_SOLVABLE = "NotKrylovSolvable"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class SolvabilityConfig:
    N_max: int = 20
    breakdown_tol: float = 1e-10
    solvable_tol: float = 1e-6
    window: int = 5
    plateau_floor: float = 1e-3
    plateau_rtol: float = 1e-3
    residual_tol: float = 1e-8
    floor_tol: float = 1e-12
    monotone_slack: float = 1e-10


@dataclass
class SolvabilityReport:
    rel_dist_profile: list
    reducibility_residual: float
    intersection_measure: float
    complement_dim: int
    verdict: Verdict
    thresholds: dict
    dim: int
    N_max: int
    effective_dim: int
    breakdown: bool

    @property
    def few_complement_dims(self) -> bool:
        return self.complement_dim < 10

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = self.verdict.value
        d["few_complement_dims"] = self.few_complement_dims
        d["rel_dist_profile"] = [[n, v] for n, v in self.rel_dist_profile]
        if not np.isfinite(self.intersection_measure):
            d["intersection_measure"] = "inf"
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "rel_dist"])
        for n, v in self.rel_dist_profile:
            w.writerow([n, format(v, ".17g")])
        return buf.getvalue()


def classify_profile(values, breakdown: bool, cfg: SolvabilityConfig) -> Verdict:
    values = np.asarray(values, dtype=float)
    nonincreasing = bool(np.all(np.diff(values) <= cfg.monotone_slack))
    last = values[-1]
    if last < cfg.solvable_tol and nonincreasing:
        return Verdict.SOLVABLE
    if breakdown and last >= cfg.solvable_tol:
        # exact finite invariance: the distance can no longer change
        return Verdict.NOT_SOLVABLE
    W = cfg.window
    if len(values) > W:
        tail = values[-(W + 1):]
        if np.all(tail >= cfg.plateau_floor) and (tail[0] - tail[-1]) <= cfg.plateau_rtol * tail[-1]:
            return Verdict.NOT_SOLVABLE
    return Verdict.INCONCLUSIVE


def solvability_verdict(op: LinearOperatorSpec, g: CoeffVector, f: CoeffVector, config: SolvabilityConfig | None = None) -> SolvabilityReport:
    cfg = config or SolvabilityConfig()
    check_same_space(op, g, f)
    res = norm(CoeffVector(g.space, op._apply(f.coords)) - g)
    if res > cfg.residual_tol * max(norm(g), 1e-300):
        raise NotASolution(f"||Af - g|| = {res:.3e} exceeds the residual tolerance")
    K = build_krylov_basis(op, g, cfg.N_max, cfg.breakdown_tol)
    profile = krylov_profile(K, f)
    verdict = classify_profile([v for _, v in profile], K.breakdown, cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateComplement)
        im = intersection_measure(op, K, cfg.floor_tol)
    return SolvabilityReport(
        rel_dist_profile=profile,
        reducibility_residual=reducibility_residual(op, K),
        intersection_measure=im.value,
        complement_dim=im.complement_dim,
        verdict=verdict,
        thresholds=asdict(cfg),
        dim=g.space.dim,
        N_max=cfg.N_max,
        effective_dim=K.effective_dim,
        breakdown=K.breakdown,
    )
