import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from krylab.errors import SpaceMismatch
from krylab.gaps import d_metric, delta, dhat_metric, gap_hat, principal_angles
from krylab.space import AmbientSpace, CoeffVector, SubspaceBasis

SP = AmbientSpace.unilateral(3)
E1 = SubspaceBasis.span([SP.e(1)])
E2 = SubspaceBasis.span([SP.e(2)])
DIAG = SubspaceBasis.span([(SP.e(1) + SP.e(2)) / math.sqrt(2)])
E12 = SubspaceBasis.span([SP.e(1), SP.e(2)])
ZERO = SubspaceBasis.zero(SP)


def random_subspace(space, p, rng):
    if p == 0:
        return SubspaceBasis.zero(space)
    vecs = [CoeffVector(space, rng.standard_normal(space.dim) + 1j * rng.standard_normal(space.dim)) for _ in range(p)]
    return SubspaceBasis.span(vecs)


def grid_d_oracle(U, V, step=1e-3):
    """sup over unit u in the line U of the distance to the unit circle of the line V."""
    u = U.columns[:, 0]
    v = V.columns[:, 0]
    th = np.arange(0, 2 * np.pi, step)
    pts = np.exp(1j * th)[:, None] * v[None, :]
    return float(np.min(np.linalg.norm(u[None, :] - pts, axis=1)))


def test_delta_examples():
    assert delta(E1, E12) == 0
    assert delta(E1, E2) == pytest.approx(1.0)
    assert delta(E1, DIAG) == pytest.approx(math.sin(math.pi / 4))
    assert delta(ZERO, E1) == 0
    assert delta(E1, ZERO) == 1


def test_gap_hat_examples():
    assert gap_hat(E1, E12) == pytest.approx(1.0)
    assert gap_hat(E12, E12) < 1e-15
    assert gap_hat(E1, DIAG) == pytest.approx(0.70711, abs=1e-5)
    assert gap_hat(DIAG, E1) == pytest.approx(gap_hat(E1, DIAG))


def test_d_metric_examples():
    assert d_metric(E12, E12) < 1e-12
    assert d_metric(E1, ZERO) == 2.0
    assert d_metric(ZERO, E1) == 0.0
    val = d_metric(E1, DIAG)
    assert val == pytest.approx(2 * math.sin(math.pi / 8), abs=1e-12)
    assert val == pytest.approx(grid_d_oracle(E1, DIAG), abs=1e-3)


def test_dhat_examples():
    assert dhat_metric(E1, E1) < 1e-12
    assert dhat_metric(E1, ZERO) == 2.0
    assert dhat_metric(E1, DIAG) == pytest.approx(0.76537, abs=1e-5)


def test_principal_angles():
    ang = principal_angles(E12, DIAG)
    assert ang.shape == (1,)
    assert ang[0] == pytest.approx(0.0, abs=1e-7)
    assert principal_angles(E1, E2)[0] == pytest.approx(math.pi / 2)
    assert principal_angles(ZERO, E1).size == 0


def test_space_mismatch():
    other = SubspaceBasis.span([AmbientSpace.unilateral(4).e(1)])
    for fn in (delta, gap_hat, d_metric, dhat_metric):
        with pytest.raises(SpaceMismatch):
            fn(E1, other)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 10**7), D=st.integers(2, 8), p=st.integers(0, 8), q=st.integers(0, 8))
def test_gap_inequalities(seed, D, p, q):
    rng = np.random.default_rng(seed)
    sp = AmbientSpace.unilateral(D)
    U, V = random_subspace(sp, min(p, D), rng), random_subspace(sp, min(q, D), rng)
    dh, Dh = gap_hat(U, V), dhat_metric(U, V)
    assert dh <= Dh + 1e-10
    assert Dh <= 2 * dh + 1e-10
    assert 0 <= delta(U, V) <= 1


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 10**7), D=st.integers(2, 8), p=st.integers(1, 7), extra=st.integers(0, 3))
def test_delta_zero_iff_contained(seed, D, p, extra):
    rng = np.random.default_rng(seed)
    sp = AmbientSpace.unilateral(D)
    p = min(p, D)
    U = random_subspace(sp, p, rng)
    more = [CoeffVector(sp, rng.standard_normal(D)) for _ in range(extra)]
    V = SubspaceBasis.span([CoeffVector(sp, c) for c in U.columns.T] + more)
    assert delta(U, V) < 1e-10
    if V.dim > U.dim:
        assert delta(V, U) > 1 - 1e-10
    W = random_subspace(sp, p, rng)
    if abs(np.linalg.det(W.columns.conj().T @ U.columns)) < 1 - 1e-6:
        assert delta(U, W) > 1e-8


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**7))
def test_d_metric_matches_grid_oracle_for_lines(seed):
    rng = np.random.default_rng(seed)
    sp = AmbientSpace.unilateral(3)
    U, V = random_subspace(sp, 1, rng), random_subspace(sp, 1, rng)
    assert d_metric(U, V) == pytest.approx(grid_d_oracle(U, V, 1e-3), abs=2e-3)
