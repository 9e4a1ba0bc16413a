import random

import pytest

from badlab.exactlp import vec_dot
from badlab.exactnum import rat
from badlab.geometry import (
    AffineSubspace,
    LiftedSpan,
    adapted_basis,
    canon_sign,
    cheb_distance,
    distance_via_functionals,
    dual_functionals,
    lift,
    line_distance,
    nearest_int_dist,
    solve_in_basis,
    sup_norm,
    vec,
)
from badlab.presets import preset_value

GOLDEN = preset_value("golden")


def test_sup_norm_and_nearest_int():
    assert sup_norm(vec(rat(-3), rat(2))) == rat(3)
    assert sup_norm(()) == rat(0)
    assert nearest_int_dist(rat(7, 3)) == rat(1, 3)
    assert nearest_int_dist(rat(-7, 3)) == rat(1, 3)
    assert nearest_int_dist(rat(5)) == rat(0)
    assert nearest_int_dist(rat(7, 2)) == rat(1, 2)  # tie


def test_canon_sign():
    assert canon_sign(vec(rat(0), rat(-2), rat(1))) == (rat(0), rat(2), rat(-1))
    assert canon_sign(vec(rat(1), rat(-2))) == (rat(1), rat(-2))
    assert canon_sign(vec(rat(0), rat(0))) == (rat(0), rat(0))


def test_affine_subspace_validation():
    with pytest.raises(ValueError):
        AffineSubspace(point=(rat(0),), directions=((rat(1), rat(0)),))
    with pytest.raises(ValueError):
        AffineSubspace(
            point=(rat(0), rat(0)),
            directions=((rat(1), rat(2)), (rat(2), rat(4))),
        )
    sub = AffineSubspace(point=(rat(1), rat(2)), directions=((rat(1), rat(0)),))
    assert sub.ambient == 2 and sub.dim == 1


def test_lift_layout():
    sub = AffineSubspace(point=(GOLDEN,), directions=())
    sp = lift(sub)
    assert sp.ambient == 2 and sp.dim == 1
    assert sp.basis[0] == (rat(1), GOLDEN)
    line = AffineSubspace(point=(rat(1), rat(2)), directions=((rat(0), rat(1)),))
    sp2 = lift(line)
    assert sp2.basis[1] == (rat(0), rat(0), rat(1))
    assert lift(AffineSubspace(point=(GOLDEN,), directions=())).is_subspace_of(
        LiftedSpan(basis=((rat(1), rat(0)), (rat(0), rat(1))), ambient=2)
    )


def test_span_contains():
    sp = LiftedSpan(basis=((rat(1), GOLDEN),), ambient=2)
    assert sp.contains((rat(2), 2 * GOLDEN))
    assert not sp.contains((rat(2), rat(1)))
    zero = LiftedSpan(basis=(), ambient=2)
    assert zero.contains((rat(0), rat(0)))
    assert not zero.contains((rat(1), rat(0)))


def test_cheb_distance_zero_span_is_sup_norm():
    zero = LiftedSpan(basis=(), ambient=3)
    d, t = cheb_distance((rat(1), rat(-4), rat(2)), zero)
    assert d == rat(4) and t == ()


def test_cheb_distance_golden_line_closed_form():
    sp = LiftedSpan(basis=((rat(1), GOLDEN),), ambient=2)
    z = (rat(1), rat(1))
    d, t = cheb_distance(z, sp)
    # distance to span{(1,g)} is |z1 - g z0| / (1 + g)
    assert d == abs(rat(1) - GOLDEN) / (1 + GOLDEN)
    # the optimizer actually achieves the distance
    assert max(abs(z[0] - t[0]), abs(z[1] - t[0] * GOLDEN)) == d


def _random_span(rng, ambient, dim):
    while True:
        rows = tuple(
            tuple(rat(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(ambient))
            for _ in range(dim)
        )
        try:
            return LiftedSpan(basis=rows, ambient=ambient)
        except ValueError:
            continue


def test_three_distance_routes_agree():
    rng = random.Random(5)
    for _ in range(40):
        ambient = rng.choice((2, 3))
        sp = _random_span(rng, ambient, 1)
        z = tuple(rat(rng.randint(-8, 8), rng.randint(1, 3)) for _ in range(ambient))
        d_lp, _ = cheb_distance(z, sp)
        d_line = line_distance(z, sp.basis[0])
        d_dual = distance_via_functionals(z, dual_functionals(sp))
        assert d_lp == d_line == d_dual


def test_dual_functionals_plane_case():
    rng = random.Random(8)
    for _ in range(15):
        sp = _random_span(rng, 3, 2)
        funcs = dual_functionals(sp)
        assert funcs
        for u in funcs:
            for b in sp.basis:
                assert vec_dot(u, b) == 0
        z = tuple(rat(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(3))
        d_lp, _ = cheb_distance(z, sp)
        assert distance_via_functionals(z, funcs) == d_lp


def test_dual_functionals_golden():
    sp = LiftedSpan(basis=((rat(1), GOLDEN),), ambient=2)
    funcs = dual_functionals(sp)
    assert len(funcs) == 1
    u = funcs[0]
    # orthogonal to (1, g) and L1-normalized: +-(g, -1)/(1+g)
    assert vec_dot(u, (rat(1), GOLDEN)) == 0
    assert abs(u[0]) + abs(u[1]) == rat(1)


def test_adapted_basis_nested():
    inner = LiftedSpan(basis=((rat(1), rat(2), rat(3)),), ambient=3)
    outer = LiftedSpan(
        basis=((rat(1), rat(2), rat(3)), (rat(0), rat(1), rat(0))), ambient=3
    )
    rows = adapted_basis(inner, outer, 3)
    assert rows[0] == list(inner.basis[0])
    assert len(rows) == 3
    coords = solve_in_basis(rows, (rat(1), rat(3), rat(3)))
    recon = [
        sum(coords[k] * rows[k][i] for k in range(3)) for i in range(3)
    ]
    assert recon == [rat(1), rat(3), rat(3)]
    with pytest.raises(ValueError):
        adapted_basis(outer, inner, 3)
