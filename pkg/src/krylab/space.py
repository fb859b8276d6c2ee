"""Finite-section Hilbert spaces, vectors, the weak norm and orthogonal projections.

Three truncated models are supported: ``ℓ²(ℕ)`` (``UnilateralSeq``), ``ℓ²(ℤ)``
on a symmetric window (``BilateralSeq``) and ``L²[0,1]`` sampled on a uniform
midpoint grid (``GridL2``).  ``DirectSum`` glues several of them together.

Coordinates are stored as complex numpy arrays.  The inner product carries the
per-coordinate quadrature weights, so for ``GridL2`` a coordinate vector is a
table of function values, not of orthonormal-basis coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import SpaceMismatch

ORTHO_TOL = 1e-12


class SpaceKind(str, Enum):
    UNILATERAL = "UnilateralSeq"
    BILATERAL = "BilateralSeq"
    GRID = "GridL2"
    DIRECT_SUM = "DirectSum"


class AmbientSpace:
    """A finite-dimensional stand-in for a separable Hilbert space.

    Use the constructors :meth:`unilateral`, :meth:`bilateral`, :meth:`grid`
    and :meth:`direct_sum` rather than calling ``__init__`` directly.
    """

    def __init__(self, kind, dim, quad_weights=None, blocks=()):
        kind = SpaceKind(kind)
        dim = int(dim)
        if dim < 1:
            raise ValueError("dim must be positive")
        if quad_weights is None:
            quad_weights = np.ones(dim)
        w = np.array(quad_weights, dtype=float)
        if w.shape != (dim,):
            raise ValueError("quad_weights must have one entry per coordinate")
        if not np.all(w > 0):
            raise ValueError("quadrature weights must be positive")
        if kind is SpaceKind.BILATERAL and dim % 2 == 0:
            raise ValueError("a bilateral window has odd dimension 2K+1")
        w.setflags(write=False)
        self.kind = kind
        self.dim = dim
        self.quad_weights = w
        self.blocks = tuple(blocks)
        self._sqrt_w = np.sqrt(w)
        self._sqrt_w.setflags(write=False)

    # constructors -------------------------------------------------------
    @classmethod
    def unilateral(cls, dim: int) -> "AmbientSpace":
        return cls(SpaceKind.UNILATERAL, dim)

    @classmethod
    def bilateral(cls, K: int) -> "AmbientSpace":
        """Window ``-K..K`` of ℓ²(ℤ)."""
        return cls(SpaceKind.BILATERAL, 2 * int(K) + 1)

    @classmethod
    def grid(cls, N: int) -> "AmbientSpace":
        """Uniform midpoint grid on [0, 1] with ``N`` cells, weights ``1/N``."""
        return cls(SpaceKind.GRID, N, np.full(int(N), 1.0 / N))

    @classmethod
    def direct_sum(cls, *spaces: "AmbientSpace") -> "AmbientSpace":
        if len(spaces) < 2:
            raise ValueError("a direct sum needs at least two summands")
        w = np.concatenate([s.quad_weights for s in spaces])
        return cls(SpaceKind.DIRECT_SUM, len(w), w, blocks=spaces)

    # structure ----------------------------------------------------------
    @property
    def K(self) -> int:
        if self.kind is not SpaceKind.BILATERAL:
            raise AttributeError("only bilateral windows have a half-width")
        return (self.dim - 1) // 2

    @property
    def sqrt_weights(self) -> np.ndarray:
        return self._sqrt_w

    @property
    def block_offsets(self) -> list[int]:
        offs, acc = [], 0
        for b in self.blocks:
            offs.append(acc)
            acc += b.dim
        return offs

    def block_slice(self, j: int) -> slice:
        off = self.block_offsets[j]
        return slice(off, off + self.blocks[j].dim)

    def position(self, index) -> int:
        """Coordinate position of an abstract basis index.

        ``UnilateralSeq`` and ``GridL2`` use 1-based indices, ``BilateralSeq``
        uses ``-K..K`` and ``DirectSum`` uses ``(block, index)`` pairs.
        """
        if self.kind is SpaceKind.DIRECT_SUM:
            j, sub = index
            return self.block_offsets[j] + self.blocks[j].position(sub)
        k = int(index)
        if self.kind is SpaceKind.BILATERAL:
            pos = k + self.K
        else:
            pos = k - 1
        if not 0 <= pos < self.dim:
            raise IndexError(f"index {index!r} outside the truncation window")
        return pos

    def indices(self) -> list:
        if self.kind is SpaceKind.BILATERAL:
            return list(range(-self.K, self.K + 1))
        if self.kind is SpaceKind.DIRECT_SUM:
            return [(j, i) for j, b in enumerate(self.blocks) for i in b.indices()]
        return list(range(1, self.dim + 1))

    def enumeration(self) -> np.ndarray:
        """Positions in the order used by the weak-norm test family."""
        if self.kind is SpaceKind.BILATERAL:
            K = self.K
            order = [K]
            for k in range(1, K + 1):
                order += [K + k, K - k]
            return np.array(order)
        if self.kind is SpaceKind.DIRECT_SUM:
            # round-robin over the summands
            per_block = [b.enumeration() + off for b, off in zip(self.blocks, self.block_offsets)]
            order = []
            for i in range(max(len(p) for p in per_block)):
                order += [int(p[i]) for p in per_block if i < len(p)]
            return np.array(order)
        return np.arange(self.dim)

    def grid_points(self) -> np.ndarray:
        if self.kind is not SpaceKind.GRID:
            raise AttributeError("grid points exist only for GridL2")
        return (np.arange(self.dim) + 0.5) / self.dim

    # vectors ------------------------------------------------------------
    def vector(self, coords) -> "CoeffVector":
        return CoeffVector(self, coords)

    def zeros(self) -> "CoeffVector":
        return CoeffVector(self, np.zeros(self.dim, dtype=complex))

    def ones(self) -> "CoeffVector":
        return CoeffVector(self, np.ones(self.dim, dtype=complex))

    def e(self, index) -> "CoeffVector":
        """Coordinate basis vector at ``index``.

        On sequence spaces it has unit norm; on a grid it is the cell
        indicator, of norm ``sqrt(h)``.
        """
        c = np.zeros(self.dim, dtype=complex)
        c[self.position(index)] = 1.0
        return CoeffVector(self, c)

    def unit(self, index) -> "CoeffVector":
        """Normalized basis vector at ``index``."""
        v = self.e(index)
        return CoeffVector(self, v.coords * (1.0 / self._sqrt_w[self.position(index)]))

    def to_unitary(self, coords: np.ndarray) -> np.ndarray:
        """Map coordinates (or coordinate columns) to orthonormal coordinates."""
        s = self._sqrt_w
        return coords * (s if coords.ndim == 1 else s[:, None])

    def from_unitary(self, coords: np.ndarray) -> np.ndarray:
        s = self._sqrt_w
        return coords / (s if coords.ndim == 1 else s[:, None])

    def describe(self) -> dict:
        d = {"kind": self.kind.value, "dim": self.dim}
        if self.blocks:
            d["blocks"] = [b.describe() for b in self.blocks]
        return d

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, AmbientSpace):
            return NotImplemented
        return (
            self.kind is other.kind
            and self.dim == other.dim
            and self.blocks == other.blocks
            and np.array_equal(self.quad_weights, other.quad_weights)
        )

    def __hash__(self):
        return hash((self.kind, self.dim, self.blocks))

    def __repr__(self):
        if self.kind is SpaceKind.BILATERAL:
            return f"AmbientSpace.bilateral(K={self.K})"
        if self.kind is SpaceKind.DIRECT_SUM:
            return "AmbientSpace.direct_sum(" + ", ".join(map(repr, self.blocks)) + ")"
        name = {SpaceKind.UNILATERAL: "unilateral", SpaceKind.GRID: "grid"}[self.kind]
        return f"AmbientSpace.{name}({self.dim})"


def check_same_space(*objs) -> AmbientSpace:
    space = objs[0].space
    for o in objs[1:]:
        if o.space != space:
            raise SpaceMismatch(f"{o.space!r} differs from {space!r}")
    return space


@dataclass(frozen=True, eq=False)
class CoeffVector:
    space: AmbientSpace
    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=complex)
        if c.shape != (self.space.dim,):
            raise ValueError(f"expected {self.space.dim} coordinates, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coordinates must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    def _other(self, other):
        if isinstance(other, CoeffVector):
            check_same_space(self, other)
            return other.coords
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        return o if o is NotImplemented else CoeffVector(self.space, self.coords + o)

    def __sub__(self, other):
        o = self._other(other)
        return o if o is NotImplemented else CoeffVector(self.space, self.coords - o)

    def __mul__(self, scalar):
        if isinstance(scalar, CoeffVector):
            return NotImplemented
        return CoeffVector(self.space, self.coords * complex(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return CoeffVector(self.space, self.coords / complex(scalar))

    def __neg__(self):
        return CoeffVector(self.space, -self.coords)

    def norm(self) -> float:
        return norm(self)

    def allclose(self, other: "CoeffVector", atol=1e-12) -> bool:
        check_same_space(self, other)
        return bool(norm(self - other) <= atol)

    def __repr__(self):
        return f"CoeffVector({self.space!r}, norm={self.norm():.6g})"


def inner(x: CoeffVector, y: CoeffVector) -> complex:
    """Weighted inner product, anti-linear in the first slot."""
    space = check_same_space(x, y)
    return complex(np.sum(space.quad_weights * np.conj(x.coords) * y.coords))


def norm(x: CoeffVector) -> float:
    return float(np.linalg.norm(x.space.to_unitary(x.coords)))


@dataclass(frozen=True, eq=False)
class WeakNormSpec:
    """Test family ``ξ_n`` (coordinate basis) with summable weights ``w_n``.

    ``weights[n]`` belongs to the ``n``-th position of ``space.enumeration()``.
    ``ξ_n`` is the coordinate vector of that position, so
    ``<ξ_n, x> = q_pos x_pos`` with the quadrature weight ``q_pos`` (one on
    sequence spaces, ``h`` on grids, where ``||ξ_n|| = sqrt(h) <= 1``).
    """

    space: AmbientSpace
    weights: np.ndarray
    test_family: str = "CanonicalBasis"
    _position_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.shape != (self.space.dim,):
            raise ValueError("one weight per test vector is required")
        if not np.all(w > 0):
            raise ValueError("weights must be positive")
        if np.sum(w) > 1 + 1e-15:
            raise ValueError("weights must sum to at most 1")
        if np.any(np.diff(w) >= 0):
            raise ValueError("weights must be strictly decreasing")
        if self.test_family != "CanonicalBasis":
            raise ValueError(f"unsupported test family {self.test_family!r}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        pw = np.zeros(self.space.dim)
        pos = self.space.enumeration()
        pw[pos] = w * self.space.quad_weights[pos]
        pw.setflags(write=False)
        object.__setattr__(self, "_position_weights", pw)

    @classmethod
    def canonical(cls, space: AmbientSpace) -> "WeakNormSpec":
        n = np.arange(1, space.dim + 1)
        return cls(space, np.ldexp(1.0, -n))

    @property
    def position_weights(self) -> np.ndarray:
        """Weight of ``|x_pos|`` in the weak norm, indexed by coordinate position."""
        return self._position_weights

    def weight_of(self, index) -> float:
        pos = self.space.position(index)
        order = self.space.enumeration()
        return float(self.weights[int(np.nonzero(order == pos)[0][0])])


def weak_norm(x: CoeffVector, spec: WeakNormSpec) -> float:
    check_same_space(x, spec)
    return float(np.sum(spec.position_weights * np.abs(x.coords)))


@dataclass(frozen=True, eq=False)
class SubspaceBasis:
    """Orthonormal columns (in the weighted inner product) spanning a subspace."""

    space: AmbientSpace
    columns: np.ndarray
    label: str = ""

    def __post_init__(self):
        Q = np.array(self.columns, dtype=complex)
        if Q.ndim == 1:
            Q = Q.reshape(self.space.dim, -1)
        if Q.shape[0] != self.space.dim:
            raise ValueError("columns must have space.dim rows")
        if Q.shape[1] > self.space.dim:
            raise ValueError("more columns than the ambient dimension")
        Qu = self.space.to_unitary(Q)
        gram = Qu.conj().T @ Qu
        if Q.shape[1] and np.max(np.abs(gram - np.eye(Q.shape[1]))) > ORTHO_TOL:
            raise ValueError("columns are not orthonormal")
        Q.setflags(write=False)
        object.__setattr__(self, "columns", Q)

    @property
    def dim(self) -> int:
        return self.columns.shape[1]

    @property
    def unitary(self) -> np.ndarray:
        """Columns in orthonormal coordinates (plain Euclidean geometry)."""
        return self.space.to_unitary(self.columns)

    def vectors(self) -> list[CoeffVector]:
        return [CoeffVector(self.space, self.columns[:, j]) for j in range(self.dim)]

    def combine(self, coeffs) -> CoeffVector:
        return CoeffVector(self.space, self.columns @ np.asarray(coeffs, dtype=complex))

    @classmethod
    def zero(cls, space: AmbientSpace, label="{0}") -> "SubspaceBasis":
        return cls(space, np.zeros((space.dim, 0), dtype=complex), label)

    @classmethod
    def full(cls, space: AmbientSpace, label="H") -> "SubspaceBasis":
        return cls(space, space.from_unitary(np.eye(space.dim, dtype=complex)), label)

    @classmethod
    def span(cls, vectors: Sequence[CoeffVector] | Iterable[CoeffVector], label="", rank_tol=1e-12):
        """Orthonormal basis of the span of ``vectors`` (numerical rank by SVD)."""
        vectors = list(vectors)
        if not vectors:
            raise ValueError("span of an empty list: use SubspaceBasis.zero")
        space = check_same_space(*vectors)
        X = space.to_unitary(np.column_stack([v.coords for v in vectors]))
        if not np.any(X):
            return cls.zero(space, label)
        U, s, _ = np.linalg.svd(X, full_matrices=False)
        r = int(np.sum(s > rank_tol * s[0]))
        return cls(space, space.from_unitary(U[:, :r]), label)

    def complement(self, label="") -> "SubspaceBasis":
        """Orthogonal complement within the truncated space."""
        Qu = self.unitary
        if self.dim == 0:
            return SubspaceBasis.full(self.space, label)
        full_q, _ = np.linalg.qr(np.hstack([Qu, np.eye(self.space.dim)]), mode="complete")
        # first columns reproduce span(Qu); the rest is an orthonormal complement
        comp = full_q[:, self.dim:]
        comp = comp - Qu @ (Qu.conj().T @ comp)
        comp, _ = np.linalg.qr(comp)
        return SubspaceBasis(self.space, self.space.from_unitary(comp), label)


def project(x: CoeffVector, U: SubspaceBasis) -> CoeffVector:
    check_same_space(x, U)
    Qu = U.unitary
    xu = U.space.to_unitary(x.coords)
    return CoeffVector(U.space, U.space.from_unitary(Qu @ (Qu.conj().T @ xu)))


def dist_to_subspace(x: CoeffVector, U: SubspaceBasis) -> float:
    check_same_space(x, U)
    Qu = U.unitary
    xu = U.space.to_unitary(x.coords)
    r = xu - Qu @ (Qu.conj().T @ xu)
    # a second pass keeps tiny distances accurate
    r = r - Qu @ (Qu.conj().T @ r)
    return float(np.linalg.norm(r))
