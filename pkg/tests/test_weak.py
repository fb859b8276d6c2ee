import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from krylab.errors import DimTooLarge, SpaceMismatch
from krylab.krylov import build_krylov_basis
from krylab.operators import VolterraQuad
from krylab.space import AmbientSpace, CoeffVector, SubspaceBasis, WeakNormSpec
from krylab.weak import (
    FiniteSet,
    GapReport,
    Method,
    Singleton,
    SubspaceBall,
    WeakGapConfig,
    brute_force_d_w,
    d_w,
    dhat_w,
    eps_expansion_member,
    weak_dist_point_to_ball,
)

SP = AmbientSpace.unilateral(3)
SPEC = WeakNormSpec.canonical(SP)


def line(space, v):
    return SubspaceBasis.span([v])


def test_point_to_ball_examples():
    U = SubspaceBasis.span([SP.e(1), SP.e(2)])
    x = (SP.e(1) + SP.e(2) * 1j) * 0.5
    assert weak_dist_point_to_ball(x, U, SPEC).value < 1e-7
    comp = SubspaceBasis.span([SP.e(2), SP.e(3)])
    rep = weak_dist_point_to_ball(SP.e(1), comp, SPEC)
    assert rep.value == pytest.approx(0.5, abs=1e-7)
    lo, hi = rep.certified_bounds
    assert lo <= 0.5 + 1e-9 and hi >= 0.5 - 1e-9
    assert weak_dist_point_to_ball(SP.e(1), Singleton(SP.zeros()), SPEC).value == 0.5


def test_point_to_ball_rejects_outside_ball():
    with pytest.raises(ValueError):
        weak_dist_point_to_ball(SP.e(1) * 2, Singleton(SP.zeros()), SPEC)


def test_d_w_examples():
    U = line(SP, SP.e(1) + SP.e(3))
    assert d_w(U, U, SPEC).value < 1e-7
    D = 8
    sp = AmbientSpace.unilateral(D)
    spec = WeakNormSpec.canonical(sp)
    for n in (1, 3, 6):
        rep = d_w(line(sp, sp.e(n)), Singleton(sp.zeros()), spec)
        assert rep.value == pytest.approx(2.0**-n, abs=1e-12)
    full = SubspaceBasis.full(sp)
    comp = SubspaceBasis.span([sp.e(k) for k in range(2, D + 1)])
    rep = d_w(full, comp, spec, WeakGapConfig(outer_starts=16))
    assert rep.value >= 0.5 - 1e-6
    assert rep.method == Method.HEURISTIC


def test_dhat_w_examples():
    U = line(SP, SP.e(1))
    V = line(SP, SP.e(2))
    assert dhat_w(U, U, SPEC).value < 1e-7
    val = dhat_w(U, V, SPEC).value
    oracle = max(brute_force_d_w(U, V, SPEC, 1e-2), brute_force_d_w(V, U, SPEC, 1e-2))
    assert val == pytest.approx(oracle, abs=1e-2)
    big = SubspaceBasis.span([SP.e(1), SP.e(2)])
    assert d_w(U, big, SPEC).value < 1e-7
    assert d_w(big, U, SPEC).value > 0.1


def test_eps_expansion():
    zero = Singleton(SP.zeros())
    assert eps_expansion_member(SP.e(1), line(SP, SP.e(1)), 1e-3, SPEC)
    assert not eps_expansion_member(SP.e(1), zero, 0.4, SPEC)
    assert eps_expansion_member(SP.e(1), zero, 0.6, SPEC)


def test_brute_force_examples():
    U = line(SP, SP.e(1))
    V = line(SP, SP.e(2))
    assert brute_force_d_w(U, U, SPEC, 1e-2) < 1e-2
    # sup at u = e1: best v in B_V is 0, so the value is w_1
    assert brute_force_d_w(U, V, SPEC, 1e-2) == pytest.approx(0.5, abs=1e-2)
    for n in (1, 2, 3):
        assert brute_force_d_w(line(SP, SP.e(n)), Singleton(SP.zeros()), SPEC, 1e-2) == pytest.approx(2.0**-n, abs=1e-2)
    with pytest.raises(DimTooLarge):
        brute_force_d_w(SubspaceBasis.full(SP), U, SPEC)


def test_brute_force_two_dim_against_grid():
    U = SubspaceBasis.span([SP.e(1) + SP.e(2), SP.e(3)])
    V = line(SP, SP.e(1) - SP.e(3))
    ref = brute_force_d_w(U, V, SPEC, 0.08)
    rep = d_w(U, V, SPEC)
    lo, hi = rep.certified_bounds
    assert lo - 0.08 <= ref <= hi + 0.08
    assert rep.value == pytest.approx(ref, abs=0.04)


def test_space_mismatch():
    other = AmbientSpace.unilateral(4)
    with pytest.raises(SpaceMismatch):
        d_w(line(SP, SP.e(1)), line(other, other.e(1)), SPEC)


def test_finite_set_and_report():
    members = FiniteSet([SP.e(1), SP.e(2) * 0.5])
    rep = d_w(members, Singleton(SP.zeros()), SPEC)
    assert rep.value == pytest.approx(0.5)
    with pytest.raises(ValueError):
        FiniteSet([SP.e(1) * 2])
    d = rep.to_dict()
    assert set(d) == {"value", "method", "bounds", "config_digest"}
    with pytest.raises(AssertionError):
        GapReport(1.0, Method.ORACLE, (0.0, 0.5))


def test_config_validation():
    with pytest.raises(ValueError):
        WeakGapConfig(inner_iters=0)
    with pytest.raises(ValueError):
        WeakGapConfig(outer_grid=0)
    assert WeakGapConfig().digest() == WeakGapConfig().digest()
    assert WeakGapConfig(seed=1).digest() != WeakGapConfig().digest()


def _rand_line(rng, sp):
    return SubspaceBasis.span([CoeffVector(sp, rng.standard_normal(sp.dim) + 1j * rng.standard_normal(sp.dim))])


def test_heuristic_agrees_with_oracle_on_lines():
    rng = np.random.default_rng(2024)
    cfg = WeakGapConfig(outer_starts=8)
    for _ in range(50):
        U, V = _rand_line(rng, SP), _rand_line(rng, SP)
        h = d_w(U, V, SPEC, cfg, strategy="heuristic").value
        o = brute_force_d_w(U, V, SPEC, 5e-3)
        assert abs(h - o) <= 5e-3


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_enlarging_v_never_increases_d_w(seed):
    rng = np.random.default_rng(seed)
    sp = AmbientSpace.unilateral(4)
    spec = WeakNormSpec.canonical(sp)
    U = _rand_line(rng, sp)
    v1 = CoeffVector(sp, rng.standard_normal(4))
    v2 = CoeffVector(sp, rng.standard_normal(4))
    small = SubspaceBasis.span([v1])
    large = SubspaceBasis.span([v1, v2])
    a = d_w(U, small, spec).value
    b = d_w(U, large, spec).value
    assert b <= a + 1e-6


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_dhat_w_triangle_inequality(seed):
    rng = np.random.default_rng(seed)
    step = 2e-2
    U, V, Z = (_rand_line(rng, SP) for _ in range(3))

    def dh(a, b):
        return max(brute_force_d_w(a, b, SPEC, step), brute_force_d_w(b, a, SPEC, step))

    assert dh(U, Z) <= dh(U, V) + dh(V, Z) + 2 * step


def test_volterra_weak_gap_nonincreasing():
    sp = AmbientSpace.grid(32)
    spec = WeakNormSpec.canonical(sp)
    V = VolterraQuad(sp)
    K = build_krylov_basis(V, sp.ones(), 8)
    full = K.prefix(8)
    cfg = WeakGapConfig(outer_starts=8)
    vals = [dhat_w(K.prefix(N), full, spec, cfg).value for N in range(1, 8)]
    assert all(b <= a + 1e-3 for a, b in zip(vals, vals[1:]))
