import numpy as np
import pytest
from fractions import Fraction
from scipy.linalg import expm

from wildkz.algebra import build_type_a
from wildkz.blocks import (MarkedConfiguration, MarkedPoint, TensorSlice,
                           compute_coinvariants)
from wildkz.connection import ConnectionContext, NumericConnection
from wildkz.errors import CoalescencePenalty, WildKZError
from wildkz.modules import SingularCharacter, build_finite_module
from wildkz.transport import (AffineFlowSegment, LineSegment, PathSpec,
                              RotationSegment, affine_equivariance_check,
                              integrate, monodromy)


@pytest.fixture(scope="module")
def sl2():
    return build_type_a(1)


def chi2(lam, p=1, wild=(), k=1):
    return SingularCharacter(p, (Fraction(lam),),
                             tuple((Fraction(a),) for a in wild), Fraction(k))


def _slice_ctx(sl2, lams, times, lam_inf, lowering, k=1, height=3):
    pts = [MarkedPoint(Fraction(t), chi2(l, k=k)) for t, l in zip(times, lams)]
    cfg = MarkedConfiguration(sl2, pts, infinity_mode="tame",
                              infinity_character=chi2(lam_inf, k=k))
    slots = [build_finite_module(sl2, p.character, height) for p in cfg.points]
    slots.append(build_finite_module(sl2, cfg.infinity_character, height))
    total = cfg.total_tame_hvalues()
    shift = sl2.root_system.root_to_fundamental(lowering)
    target = tuple(t - s for t, s in zip(total, shift))
    ts = TensorSlice(slots, target)
    ctx = ConnectionContext(cfg, ts)
    return cfg, ctx, NumericConnection(ctx)


@pytest.fixture(scope="module")
def tame_pair(sl2):
    return _slice_ctx(sl2, [1, 2], [0, 1], 1, (1,))


def test_constant_path_identity(tame_pair):
    cfg, ctx, num = tame_pair
    start = (0j, 1 + 0j)
    path = PathSpec([LineSegment(start, start)])
    v0 = np.array([1.0, 0.5][:ctx.dim] + [0.0] * max(0, ctx.dim - 2), dtype=complex)
    v, stats = integrate(path, v0, num)
    assert np.max(np.abs(v - v0)) < 1e-12


def test_closed_contractible_loop(tame_pair):
    cfg, ctx, num = tame_pair
    sq = [(0j, 1 + 0j), (0.2 + 0.1j, 1 + 0j), (0.2 + 0.3j, 1.3 + 0j),
          (0j, 1 + 0j)]
    segments = [LineSegment(a, b) for a, b in zip(sq, sq[1:])]
    path = PathSpec(segments)
    assert path.is_closed()
    rng = np.random.default_rng(5)
    v0 = rng.standard_normal(ctx.dim) + 0j
    v, stats = integrate(path, v0, num)
    assert np.max(np.abs(v - v0)) <= 1e-8


def test_monodromy_matches_exponential(tame_pair):
    # t1 circles t2 once: the connection restricted to the circle is constant,
    # so the monodromy is exactly exp(2 pi i Omega^{(12)} / (kappa + h))
    cfg, ctx, num = tame_pair
    start = (1.5 + 0j, 1 + 0j)
    loop = PathSpec([RotationSegment(start, center=1 + 0j, slots=(0,),
                                     angle=2 * np.pi)])
    mat, stats = monodromy(loop, num)
    om = np.array([[complex(x) for x in row] for row in ctx.omega_matrix(1, 2, 0, 0)])
    expected = expm(2j * np.pi * complex(ctx.prefactor) * om)
    assert np.max(np.abs(mat - expected)) < 1e-7


def test_homotopic_loops_agree(tame_pair):
    cfg, ctx, num = tame_pair
    big = PathSpec([RotationSegment((1.5 + 0j, 1 + 0j), 1 + 0j, (0,), 2 * np.pi)])
    start = (1.25 + 0j, 1 + 0j)
    small = PathSpec([
        LineSegment((1.5 + 0j, 1 + 0j), start),
        RotationSegment(start, 1 + 0j, (0,), 2 * np.pi),
        LineSegment(start, (1.5 + 0j, 1 + 0j)),
    ])
    m1, _ = monodromy(big, num)
    m2, _ = monodromy(small, num)
    assert np.max(np.abs(m1 - m2)) < 1e-6


def test_monodromy_determinant_liouville(tame_pair):
    cfg, ctx, num = tame_pair
    loop = PathSpec([RotationSegment((1.5 + 0j, 1 + 0j), 1 + 0j, (0,), 2 * np.pi)])
    mat, stats = monodromy(loop, num)
    assert abs(stats["det"] - stats["det_liouville"]) < 1e-7


def test_reversal_inverts(tame_pair):
    cfg, ctx, num = tame_pair
    a, b = (0j, 1 + 0j), (0.4 + 0.2j, 1.1 - 0.1j)
    fwd = PathSpec([LineSegment(a, b)])
    bwd = PathSpec([LineSegment(b, a)])
    rng = np.random.default_rng(11)
    v0 = rng.standard_normal(ctx.dim) + 0j
    v1, _ = integrate(fwd, v0, num)
    v2, _ = integrate(bwd, v1, num)
    assert np.max(np.abs(v2 - v0)) < 1e-9


def test_concatenation_composes(tame_pair):
    cfg, ctx, num = tame_pair
    a, b, c = (0j, 1 + 0j), (0.3 + 0j, 1.2 + 0j), (0.1 + 0.2j, 0.9 + 0j)
    both = PathSpec([LineSegment(a, b), LineSegment(b, c)])
    rng = np.random.default_rng(13)
    v0 = rng.standard_normal(ctx.dim) + 0j
    v_ab, _ = integrate(PathSpec([LineSegment(a, b)]), v0, num)
    v_bc, _ = integrate(PathSpec([LineSegment(b, c)]), v_ab, num)
    v_all, _ = integrate(both, v0, num)
    assert np.max(np.abs(v_all - v_bc)) < 1e-9


def test_tolerance_order(tame_pair):
    cfg, ctx, num = tame_pair
    segs = [RotationSegment((1.5 + 0j, 1 + 0j), 1 + 0j, (0,), 2 * np.pi)]
    v0 = np.zeros(ctx.dim, dtype=complex)
    v0[0] = 1.0
    res = {}
    for tol in (1e-5, 1e-9):
        path = PathSpec(segs, rtol=tol, atol=tol * 1e-2)
        v, _ = integrate(path, v0, num)
        ref = expm(2j * np.pi * complex(ctx.prefactor)
                   * np.array([[complex(x) for x in row]
                               for row in ctx.omega_matrix(1, 2, 0, 0)])) @ v0
        res[tol] = np.max(np.abs(v - ref))
    assert res[1e-9] * 4 <= res[1e-5] or res[1e-5] < 1e-12


def test_coalescence_guard(tame_pair):
    cfg, ctx, num = tame_pair
    path = PathSpec([LineSegment((0j, 1 + 0j), (1 + 0j, 1 + 0j))])
    v0 = np.zeros(ctx.dim, dtype=complex)
    v0[0] = 1.0
    with pytest.raises(CoalescencePenalty):
        integrate(path, v0, num)


def test_noncontiguous_path_rejected():
    with pytest.raises(WildKZError):
        PathSpec([LineSegment((0j, 1j), (1j, 2j)), LineSegment((5j, 6j), (0j, 1j))])


def test_affine_equivariance_translation(tame_pair):
    cfg, ctx, num = tame_pair
    assert affine_equivariance_check(ctx, num, 0.0, 0.3 + 0.1j) <= 1e-8


def test_affine_equivariance_dilation(tame_pair):
    cfg, ctx, num = tame_pair
    assert affine_equivariance_check(ctx, num, 0.1, 0.0) <= 1e-6


def test_affine_equivariance_trivial(tame_pair):
    cfg, ctx, num = tame_pair
    assert affine_equivariance_check(ctx, num, 0.0, 0.0) == 0.0


def test_transport_on_coinvariant_block(sl2):
    # all-tame block with a nontrivial quotient: closed loop returns
    pts = [MarkedPoint(Fraction(0), chi2(2)), MarkedPoint(Fraction(1), chi2(2))]
    cfg = MarkedConfiguration(sl2, pts, infinity_mode="contragredient",
                              infinity_character=chi2(0))
    blk = compute_coinvariants(cfg)
    assert blk.dim >= 1
    ctx = ConnectionContext(cfg, blk)
    num = NumericConnection(ctx)
    loop = PathSpec([RotationSegment((0j, 1 + 0j), 0.5 + 0j, (0, 1), 2 * np.pi)])
    v0 = np.ones(blk.dim, dtype=complex)
    v, _ = integrate(loop, v0, num)
    om = np.array([[complex(x) for x in row] for row in ctx.omega_matrix(1, 2, 0, 0)])
    expected = expm(2j * np.pi * complex(ctx.prefactor) * om) @ v0
    assert np.max(np.abs(v - expected)) < 1e-7
