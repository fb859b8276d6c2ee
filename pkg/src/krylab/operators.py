"""Operator specifications with matrix-free action, adjoints and finite sections.

Every spec acts on coordinate arrays of its :class:`AmbientSpace`.  The
finite-section matrix ``M`` returned by :func:`finite_section` satisfies
``apply(op, x).coords == M @ x.coords``; adjoints are taken with respect to
the weighted inner product of the space.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla

from .errors import BadParams, NoConvergence, SpaceMismatch, UnknownScenario
from .space import AmbientSpace, CoeffVector, SpaceKind, check_same_space


class LinearOperatorSpec:
    """Base class.  Subclasses implement ``_apply`` on (D,) or (D, m) arrays."""

    space: AmbientSpace
    variant = "Abstract"

    def _apply(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _adjoint(self, X: np.ndarray) -> np.ndarray:
        # generic route through the coordinate matrix: A* = W^{-1} M^H W
        w = self.space.quad_weights
        M = finite_section(self)
        WX = X * (w if X.ndim == 1 else w[:, None])
        Y = M.conj().T @ WX
        return Y / (w if Y.ndim == 1 else w[:, None])

    def _matrix(self) -> np.ndarray:
        return self._apply(np.eye(self.space.dim, dtype=complex))

    def params(self) -> dict:
        return {}

    def describe(self) -> dict:
        return {"variant": self.variant, "space": self.space.describe(), **self.params()}

    @property
    def is_normal_hint(self) -> bool:
        """True when the finite section is normal by construction."""
        return False

    def __add__(self, other):
        if not isinstance(other, LinearOperatorSpec):
            return NotImplemented
        return Sum((self, other))

    def __sub__(self, other):
        if not isinstance(other, LinearOperatorSpec):
            return NotImplemented
        return Sum((self, Scaled(-1.0, other)))

    def __mul__(self, c):
        if isinstance(c, LinearOperatorSpec):
            return NotImplemented
        return Scaled(complex(c), self)

    __rmul__ = __mul__

    def __neg__(self):
        return Scaled(-1.0, self)


def _as_complex(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dense(LinearOperatorSpec):
    space: AmbientSpace
    matrix: np.ndarray
    variant = "Dense"

    def __post_init__(self):
        M = _as_complex(self.matrix)
        if M.shape != (self.space.dim, self.space.dim):
            raise ValueError("matrix must be D x D")
        object.__setattr__(self, "matrix", M)

    def _apply(self, X):
        return self.matrix @ X

    def _matrix(self):
        return np.array(self.matrix)

    def params(self):
        return {"fingerprint": _fingerprint(self.matrix)}


@dataclass(frozen=True, eq=False)
class Diagonal(LinearOperatorSpec):
    space: AmbientSpace
    entries: np.ndarray
    variant = "Diagonal"

    def __post_init__(self):
        d = _as_complex(self.entries)
        if d.shape != (self.space.dim,):
            raise ValueError("one diagonal entry per coordinate")
        object.__setattr__(self, "entries", d)

    def _apply(self, X):
        d = self.entries
        return d * X if X.ndim == 1 else d[:, None] * X

    def _adjoint(self, X):
        d = self.entries.conj()
        return d * X if X.ndim == 1 else d[:, None] * X

    def _matrix(self):
        return np.diag(self.entries)

    @property
    def is_normal_hint(self):
        return True

    def params(self):
        return {"fingerprint": _fingerprint(self.entries)}


@dataclass(frozen=True, eq=False)
class UnilateralShift(LinearOperatorSpec):
    """Weighted right shift ``e_k -> λ_k e_{k+1}`` in coordinate order.

    On a bilateral window this is the right shift of ℓ²(ℤ) compressed to the
    window; the last coordinate is pushed out and dropped.
    """

    space: AmbientSpace
    weights: np.ndarray
    variant = "UnilateralShift"

    def __post_init__(self):
        if self.space.kind not in (SpaceKind.UNILATERAL, SpaceKind.BILATERAL):
            raise ValueError("shifts act on sequence spaces")
        w = np.array(self.weights, dtype=complex)
        if w.ndim == 0:
            w = np.full(self.space.dim - 1, complex(w))
        if len(w) < self.space.dim - 1:
            raise ValueError("need at least D-1 shift weights")
        w = _as_complex(w[: self.space.dim - 1])
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, space, lam=1.0):
        return cls(space, np.full(space.dim - 1, lam, dtype=complex))

    def _apply(self, X):
        Y = np.zeros_like(X, dtype=complex)
        w = self.weights if X.ndim == 1 else self.weights[:, None]
        Y[1:] = w * X[:-1]
        return Y

    def _adjoint(self, X):
        Y = np.zeros_like(X, dtype=complex)
        w = self.weights.conj() if X.ndim == 1 else self.weights.conj()[:, None]
        Y[:-1] = w * X[1:]
        return Y

    def _matrix(self):
        return np.diag(self.weights, -1)

    def params(self):
        return {"fingerprint": _fingerprint(self.weights)}


@dataclass(frozen=True, eq=False)
class WrappedShift(LinearOperatorSpec):
    """``R_n``: weights 1/k² on e_k -> e_{k+1} for k < n, and e_n -> e_1 / n²."""

    space: AmbientSpace
    n: int
    variant = "WrappedShift"

    def __post_init__(self):
        if self.space.kind is not SpaceKind.UNILATERAL:
            raise ValueError("WrappedShift lives on UnilateralSeq")
        if not 2 <= int(self.n) <= self.space.dim:
            raise ValueError("need 2 <= n <= D")
        object.__setattr__(self, "n", int(self.n))

    def _matrix(self):
        n, M = self.n, np.zeros((self.space.dim, self.space.dim), dtype=complex)
        k = np.arange(1, n)
        M[k, k - 1] = 1.0 / k**2
        M[0, n - 1] = 1.0 / n**2
        return M

    def _apply(self, X):
        return finite_section(self) @ X

    def _adjoint(self, X):
        return finite_section(self).conj().T @ X

    def params(self):
        return {"n": self.n}


@dataclass(frozen=True, eq=False)
class RankOne(LinearOperatorSpec):
    """``f -> <φ, f> ψ``."""

    psi: CoeffVector
    phi: CoeffVector
    variant = "RankOne"

    def __post_init__(self):
        check_same_space(self.psi, self.phi)

    @property
    def space(self):
        return self.psi.space

    def _apply(self, X):
        w = self.space.quad_weights
        c = (w * self.phi.coords.conj()) @ X
        return np.multiply.outer(self.psi.coords, c) if X.ndim > 1 else self.psi.coords * c

    def _adjoint(self, X):
        return RankOne(self.phi, self.psi)._apply(X)

    def params(self):
        return {"psi": _fingerprint(self.psi.coords), "phi": _fingerprint(self.phi.coords)}


@dataclass(frozen=True, eq=False)
class VolterraQuad(LinearOperatorSpec):
    """Left-endpoint rule for ``(Vf)(x) = ∫_0^x f``: ``(Vf)_i = h Σ_{j<i} f_j``."""

    space: AmbientSpace
    variant = "VolterraQuad"

    def __post_init__(self):
        if self.space.kind is not SpaceKind.GRID:
            raise ValueError("VolterraQuad lives on GridL2")

    def _apply(self, X):
        h = self.space.quad_weights
        hx = X * (h if X.ndim == 1 else h[:, None])
        Y = np.zeros_like(hx, dtype=complex)
        Y[1:] = np.cumsum(hx, axis=0)[:-1]
        return Y

    def _adjoint(self, X):
        # weighted adjoint: (V*f)_i = Σ_{j>i} h_j f_j
        h = self.space.quad_weights
        hx = X * (h if X.ndim == 1 else h[:, None])
        tail = np.cumsum(hx[::-1], axis=0)[::-1]
        Y = np.zeros_like(hx, dtype=complex)
        Y[:-1] = tail[1:]
        return Y

    def params(self):
        return {"N": self.space.dim}


def laurent_coefficients(samples: np.ndarray) -> np.ndarray:
    """Fourier coefficients ``ĉ_m`` (index m mod M) of samples at ``x_j = j/M``."""
    samples = np.asarray(samples, dtype=complex)
    return np.fft.fft(samples) / len(samples)


def default_sample_count(K: int) -> int:
    return max(16, 1 << int(np.ceil(np.log2(8 * max(K, 1)))))


@dataclass(frozen=True, eq=False)
class LaurentSymbol(LinearOperatorSpec):
    """Toeplitz section ``M_jk = ĉ_{j-k}`` of multiplication by a symbol.

    ``samples[j]`` is the symbol value at ``x_j = j/M`` on [0, 1) (angle 2πx).
    """

    space: AmbientSpace
    samples: np.ndarray
    label: str = ""
    variant = "LaurentSymbol"

    def __post_init__(self):
        if self.space.kind is not SpaceKind.BILATERAL:
            raise ValueError("LaurentSymbol lives on BilateralSeq")
        s = _as_complex(self.samples)
        M = len(s)
        if M < 8 * self.space.K or M & (M - 1):
            raise ValueError("need a power-of-two sample count >= 8K")
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_function(cls, space, fn: Callable[[np.ndarray], np.ndarray], n_samples=None, label=""):
        M = n_samples or default_sample_count(space.K)
        x = np.arange(M) / M
        return cls(space, fn(x), label)

    def coefficients(self) -> np.ndarray:
        """``ĉ_m`` for m = -2K..2K."""
        c = laurent_coefficients(self.samples)
        m = np.arange(-2 * self.space.K, 2 * self.space.K + 1)
        return c[m % len(c)]

    def _matrix(self):
        K = self.space.K
        c = self.coefficients()
        col = c[2 * K:]  # ĉ_0 .. ĉ_{2K}, first column (j - k >= 0)
        row = c[2 * K::-1]  # ĉ_0, ĉ_{-1}, .. ĉ_{-2K}
        return sla.toeplitz(col, row)

    def _apply(self, X):
        return finite_section(self) @ X

    def _adjoint(self, X):
        return finite_section(self).conj().T @ X

    @property
    def is_normal_hint(self):
        # Toeplitz sections are normal only in special cases; report via the matrix
        M = finite_section(self)
        return bool(np.allclose(M @ M.conj().T, M.conj().T @ M, atol=1e-12))

    def params(self):
        return {"K": self.space.K, "n_samples": len(self.samples), "label": self.label}


@dataclass(frozen=True, eq=False)
class Scaled(LinearOperatorSpec):
    scalar: complex
    inner: LinearOperatorSpec
    variant = "Scaled"

    def __post_init__(self):
        object.__setattr__(self, "scalar", complex(self.scalar))

    @property
    def space(self):
        return self.inner.space

    def _apply(self, X):
        return self.scalar * self.inner._apply(X)

    def _adjoint(self, X):
        return np.conj(self.scalar) * self.inner._adjoint(X)

    def _matrix(self):
        return self.scalar * finite_section(self.inner)

    @property
    def is_normal_hint(self):
        return self.inner.is_normal_hint

    def params(self):
        s = self.scalar
        return {"scalar": [s.real, s.imag], "inner": self.inner.describe()}


@dataclass(frozen=True, eq=False)
class Sum(LinearOperatorSpec):
    terms: tuple
    variant = "Sum"

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise ValueError("empty sum")
        check_same_space(*terms)
        object.__setattr__(self, "terms", terms)

    @property
    def space(self):
        return self.terms[0].space

    def _apply(self, X):
        return sum(t._apply(X) for t in self.terms)

    def _adjoint(self, X):
        return sum(t._adjoint(X) for t in self.terms)

    def _matrix(self):
        return sum(finite_section(t) for t in self.terms)

    @property
    def is_normal_hint(self):
        return all(isinstance(t, Diagonal) or (isinstance(t, Scaled) and isinstance(t.inner, Diagonal))
                   for t in self.terms)

    def params(self):
        return {"terms": [t.describe() for t in self.terms]}


@dataclass(frozen=True, eq=False)
class DirectSumOp(LinearOperatorSpec):
    """Block-diagonal operator on ``AmbientSpace.direct_sum`` of the block spaces."""

    blocks: tuple
    space: AmbientSpace = field(default=None)
    variant = "DirectSum"

    def __post_init__(self):
        blocks = tuple(self.blocks)
        space = AmbientSpace.direct_sum(*(b.space for b in blocks))
        if self.space is not None and self.space != space:
            raise SpaceMismatch("direct-sum space does not match the blocks")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "space", space)

    def _apply(self, X):
        Y = np.zeros_like(X, dtype=complex)
        for j, b in enumerate(self.blocks):
            s = self.space.block_slice(j)
            Y[s] = b._apply(X[s])
        return Y

    def _adjoint(self, X):
        Y = np.zeros_like(X, dtype=complex)
        for j, b in enumerate(self.blocks):
            s = self.space.block_slice(j)
            Y[s] = b._adjoint(X[s])
        return Y

    def _matrix(self):
        return sla.block_diag(*(finite_section(b) for b in self.blocks))

    def params(self):
        return {"blocks": [b.describe() for b in self.blocks]}


def identity(space: AmbientSpace) -> Diagonal:
    return Diagonal(space, np.ones(space.dim))


def zero_operator(space: AmbientSpace) -> Diagonal:
    return Diagonal(space, np.zeros(space.dim))


def _fingerprint(a: np.ndarray) -> str:
    import hashlib

    return hashlib.sha1(np.ascontiguousarray(a).tobytes()).hexdigest()[:12]


# ---------------------------------------------------------------------------
# public operations


def apply(op: LinearOperatorSpec, x: CoeffVector) -> CoeffVector:
    check_same_space(op, x)
    return CoeffVector(op.space, op._apply(x.coords))


def adjoint_apply(op: LinearOperatorSpec, x: CoeffVector) -> CoeffVector:
    check_same_space(op, x)
    return CoeffVector(op.space, op._adjoint(x.coords))


def finite_section(op: LinearOperatorSpec, space: AmbientSpace | None = None) -> np.ndarray:
    """Coordinate matrix of ``op`` (cached on the operator; returns a read-only view)."""
    if space is not None and space != op.space:
        raise SpaceMismatch("finite_section requested on a different space")
    M = op.__dict__.get("_cached_matrix")
    if M is None:
        M = np.array(op._matrix(), dtype=complex)
        M.setflags(write=False)
        op.__dict__["_cached_matrix"] = M
    return M


def unitary_matrix(op: LinearOperatorSpec) -> np.ndarray:
    """Matrix of ``op`` in orthonormal coordinates, ``W^{1/2} M W^{-1/2}``."""
    s = op.space.sqrt_weights
    return s[:, None] * finite_section(op) / s[None, :]


def dense_norm(op: LinearOperatorSpec) -> float:
    return float(np.linalg.norm(unitary_matrix(op), 2))


def op_norm_est(op: LinearOperatorSpec, iters: int = 400, tol: float = 1e-13) -> float:
    """Largest singular value from the Ritz values of ``A*A``.

    Lanczos (full reorthogonalization) accelerates the power iteration on
    ``A*A`` started from the normalized all-ones seed.  Ritz values never
    exceed ``σ_max²``, so the estimate is a lower bound.  If the budget runs out
    a :class:`NoConvergence` warning carrying the estimate is issued.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    space = op.space
    s = space.sqrt_weights

    def gram(v):
        # A*A in orthonormal coordinates
        return s * op._adjoint(op._apply(v / s))

    v = np.ones(space.dim, dtype=complex)
    if not np.any(gram(v / np.linalg.norm(v))):
        v = np.linspace(1.0, 2.0, space.dim).astype(complex)
    v /= np.linalg.norm(v)
    V = [v]
    GV = []
    prev = -1.0
    theta = 0.0
    for _ in range(min(iters, space.dim)):
        GV.append(gram(V[-1]))
        Vm = np.column_stack(V)
        H = Vm.conj().T @ np.column_stack(GV)
        theta = float(np.linalg.eigvalsh((H + H.conj().T) / 2)[-1])
        w = GV[-1]
        for _pass in range(2):
            w = w - Vm @ (Vm.conj().T @ w)
        nw = np.linalg.norm(w)
        if abs(theta - prev) <= tol * max(theta, 1e-300) or nw <= 1e-14 * max(np.sqrt(max(theta, 0.0)), 1e-300) ** 2:
            return float(np.sqrt(max(theta, 0.0)))
        if len(V) == space.dim:
            return float(np.sqrt(max(theta, 0.0)))
        prev = theta
        V.append(w / nw)
    est = float(np.sqrt(max(theta, 0.0)))
    if len(V) < space.dim:
        warnings.warn(NoConvergence(f"norm estimate did not converge in {iters} steps", est), stacklevel=2)
    return est


# ---------------------------------------------------------------------------
# example registry


def sq_weights(count: int) -> np.ndarray:
    k = np.arange(1, count + 1)
    return 1.0 / k**2


def weighted_shift_R(D: int) -> UnilateralShift:
    """``R = Σ k^{-2} |e_{k+1}><e_k|`` compressed to D coordinates."""
    return UnilateralShift(AmbientSpace.unilateral(D), sq_weights(D - 1))


def lid_symbol(n: int | None) -> Callable[[np.ndarray], np.ndarray]:
    """Symbol of the lid example; ``n=None`` gives the unperturbed e^{2πix}."""

    def fn(x):
        s = np.exp(2j * np.pi * x)
        if n is not None:
            s = np.where(x <= 1.0 / (2 * np.pi * n), (1 + 1.0 / n) * s, s)
        return s

    return fn


def lid_difference_symbol(n: int) -> Callable[[np.ndarray], np.ndarray]:
    """Symbol of ``A - A_n``: ``-(1/n) e^{2πix}`` on the lid, zero elsewhere."""

    def fn(x):
        return np.where(x <= 1.0 / (2 * np.pi * n), -np.exp(2j * np.pi * x) / n, 0.0)

    return fn


# Shared sample count for the lid family: with one sample grid for every
# window, smaller sections are principal submatrices of larger ones and all of
# them compress a circulant whose eigenvalues are the symbol samples.
LID_SAMPLES = 1 << 14


def cyclic_candidate_symbol(eps: float) -> Callable[[np.ndarray], np.ndarray]:
    """``exp(-eps/|θ|)`` with θ = 2πx wrapped to (-π, π]; log-modulus not integrable."""

    def fn(x):
        theta = np.angle(np.exp(2j * np.pi * x))
        with np.errstate(divide="ignore"):
            out = np.exp(-eps / np.abs(theta))
        return np.where(theta == 0, 0.0, out).astype(complex)

    return fn


def cyclic_candidate_vector(space: AmbientSpace, eps: float, n_samples: int | None = None) -> CoeffVector:
    """Coefficients (window -K..K) of the cyclic candidate; tends to e_0 as eps -> 0."""
    M = n_samples or max(1 << 16, default_sample_count(space.K))
    x = np.arange(M) / M
    c = laurent_coefficients(cyclic_candidate_symbol(eps)(x))
    k = np.arange(-space.K, space.K + 1)
    return CoeffVector(space, c[k % M])


@dataclass(frozen=True)
class ParamSchema:
    name: str
    kind: str  # "int" | "float"
    default: float
    lo: float
    hi: float
    doc: str = ""

    def coerce(self, value):
        try:
            v = int(value) if self.kind == "int" else float(value)
        except (TypeError, ValueError) as exc:
            raise BadParams(f"{self.name}: expected {self.kind}, got {value!r}") from exc
        if self.kind == "int" and float(value) != v:
            raise BadParams(f"{self.name}: expected an integer, got {value!r}")
        if not self.lo <= v <= self.hi:
            raise BadParams(f"{self.name}={v} outside [{self.lo}, {self.hi}]")
        return v


@dataclass(frozen=True)
class RegistryEntry:
    id: str
    description: str
    params: tuple
    build: Callable = field(repr=False, compare=False)
    notes: dict = field(default_factory=dict)

    def resolve(self, params: dict | None) -> dict:
        params = dict(params or {})
        out = {}
        names = {p.name for p in self.params}
        extra = set(params) - names
        if extra:
            raise BadParams(f"{self.id}: unknown parameter(s) {sorted(extra)}")
        for p in self.params:
            out[p.name] = p.coerce(params.get(p.name, p.default))
        return out

    def manifest(self) -> dict:
        return {
            "id": self.id,
            "description": self.description,
            "params": [
                {"name": p.name, "type": p.kind, "default": p.default, "min": p.lo, "max": p.hi, "doc": p.doc}
                for p in self.params
            ],
            **({"notes": self.notes} if self.notes else {}),
        }


def _P(name, kind, default, lo, hi, doc=""):
    return ParamSchema(name, kind, default, lo, hi, doc)


_D = _P("D", "int", 100, 2, 4096, "truncation dimension")
_K = _P("K", "int", 64, 1, 2048, "bilateral half-width")
_NGRID = _P("N", "int", 128, 2, 4096, "grid cells")
_NPERT = _P("n", "int", 6, 1, 10**6, "perturbation index")


def _ex31_rn(p):
    if p["n"] < 2 or p["n"] > p["D"]:
        raise BadParams("EX31_Rn needs 2 <= n <= D")
    return WrappedShift(AmbientSpace.unilateral(p["D"]), p["n"])


def _ex32_a(p):
    sp = AmbientSpace.unilateral(p["D"])
    return RankOne(sp.e(2), sp.e(2))


def _ex32_an(p):
    sp = AmbientSpace.unilateral(p["D"])
    return RankOne(sp.e(2), sp.e(2)) + Scaled(1.0 / p["n"], UnilateralShift.uniform(sp))


def _lem43_a(p):
    sp = AmbientSpace.unilateral(p["D"])
    return Diagonal(sp, 1.0 / np.arange(1, p["D"] + 1))


def _lem43_an(p):
    sp = AmbientSpace.unilateral(p["D"])
    return Diagonal(sp, 1.0 / np.arange(1, p["D"] + 1) + 1.0 / p["n"])


def _lid(p, fn, label):
    sp = AmbientSpace.bilateral(p["K"])
    return LaurentSymbol.from_function(sp, fn, LID_SAMPLES, label)


def _ex34_blocks(p):
    grid = AmbientSpace.grid(p["N"])
    seq = AmbientSpace.unilateral(p["D"])
    return VolterraQuad(grid), UnilateralShift.uniform(seq)


def _ex35(p, which):
    V, R = _ex34_blocks(p)
    s = 1.0 / p["n"]
    if which == "i":
        return DirectSumOp((Scaled(s, V), R))
    return DirectSumOp((V, Scaled(s, R)))


# Calibration of the lower constant for the lid family, produced by
# scripts/ex44_calibration.py (dense SVD of the K = 256 sections).
EX44_CALIBRATION = {
    "c": 0.99,
    "K_ref": 256,
    "n_values": [2, 4, 8],
    "method": "dense SVD of the K=256 section of A - A_n, c = min_n n*sigma_max rounded down with margin",
}


REGISTRY: dict[str, RegistryEntry] = {}


def _register(id, description, params, build, **notes):
    REGISTRY[id] = RegistryEntry(id, description, tuple(params), build, notes)


_register("EX31_R", "weighted right shift R with weights 1/k^2", [_D], lambda p: weighted_shift_R(p["D"]))
_register("EX31_Rn", "wrapped weighted shift R_n (closes e_n -> e_1 with weight 1/n^2)", [_NPERT, _D], _ex31_rn)
_register("EX32_A", "rank-one projection |e2><e2|", [_D], _ex32_a)
_register("EX32_An", "|e2><e2| + (1/n) S with S the unweighted right shift", [_NPERT, _D], _ex32_an)
_register(
    "EX33_R", "right shift on a bilateral window",
    [_P("K", "int", 512, 1, 4096, "bilateral half-width")],
    lambda p: UnilateralShift.uniform(AmbientSpace.bilateral(p["K"])),
)
_register("LEM43_A", "positive compact diagonal diag(1/k)", [_D], _lem43_a)
_register("LEM43_An", "diag(1/k) + (1/n) I", [_NPERT, _D], _lem43_an)
_register("EX44_A", "Laurent section of multiplication by e^{2 pi i x}", [_K], lambda p: _lid(p, lid_symbol(None), "circle"))
_register("EX44_An", "Laurent section of the lid symbol", [_NPERT, _K], lambda p: _lid(p, lid_symbol(p["n"]), f"lid n={p['n']}"))
_register(
    "EX44_diff", "Laurent section of A - A_n (symbol supported on the lid)", [_NPERT, _K],
    lambda p: _lid(p, lid_difference_symbol(p["n"]), f"lid difference n={p['n']}"),
    calibration=EX44_CALIBRATION,
)
_register("VOLTERRA", "left-endpoint Volterra quadrature on the midpoint grid", [_NGRID], lambda p: VolterraQuad(AmbientSpace.grid(p["N"])))
_register(
    "EX34_A", "Volterra (grid) direct sum with the unweighted right shift (sequence)",
    [_P("N", "int", 64, 2, 4096, "grid cells"), _P("D", "int", 64, 2, 4096, "sequence truncation")],
    lambda p: DirectSumOp(_ex34_blocks(p)),
)
_register(
    "EX35i_An", "(1/n) V direct sum with the right shift",
    [_NPERT, _P("N", "int", 64, 2, 4096, "grid cells"), _P("D", "int", 64, 2, 4096, "sequence truncation")],
    lambda p: _ex35(p, "i"),
)
_register(
    "EX35ii_An", "V direct sum with (1/n) times the right shift",
    [_NPERT, _P("N", "int", 64, 2, 4096, "grid cells"), _P("D", "int", 64, 2, 4096, "sequence truncation")],
    lambda p: _ex35(p, "ii"),
)


def build_example_operator(id: str, params: dict | None = None) -> LinearOperatorSpec:
    try:
        entry = REGISTRY[id]
    except KeyError:
        raise UnknownScenario(f"unknown operator id {id!r}") from None
    return entry.build(entry.resolve(params))


def registry_manifest() -> dict:
    return {"operators": [REGISTRY[k].manifest() for k in sorted(REGISTRY)]}


def shipped_manifest() -> dict:
    with resources.files("krylab").joinpath("data/operators.json").open("r", encoding="utf-8") as fh:
        return json.load(fh)


def write_manifest(path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(registry_manifest(), fh, indent=2, sort_keys=True)
        fh.write("\n")
