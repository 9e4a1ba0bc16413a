import random

import pytest

from badlab.exactnum import rat
from badlab.geometry import AffineSubspace, LiftedSpan, lift
from badlab.lattice import (
    BoxTooLargeError,
    SlabSpec,
    Thickness,
    approach_slab,
    badness_slab,
    build_slab_poly,
    covering_count,
    enumerate_slab,
    half_dilation_check,
    member_exact,
    naive_slab_scan,
    pi_count,
    verify_omega_trivial,
    zeta_layer,
)
from badlab.presets import preset_value
from badlab.rates import PowerLaw, PowerLog

GOLDEN = preset_value("golden")
UNIT = PowerLaw(rat(1), rat(1))
HALF_SPAN = LiftedSpan(basis=((rat(1), rat(1, 2)),), ambient=2)
FULL_PLANE = LiftedSpan(basis=((rat(1), rat(0)), (rat(0), rat(1))), ambient=2)


def golden_span():
    return LiftedSpan(basis=((rat(1), GOLDEN),), ambient=2)


def test_thickness_exact():
    t = Thickness.exact(rat(1, 6))
    assert t.exact_value() == rat(1, 6)
    assert t.upper_rational() == rat(1, 6) == t.lower_rational()
    assert t.cmp_dist(rat(1, 7)) == -1
    assert t.cmp_dist(rat(1, 6)) == 0
    assert t.cmp_dist(rat(1, 5)) == 1


def test_thickness_of_rate_irrational():
    # 1/sqrt(2): irrational, certified bounds must straddle it
    t = Thickness.of_rate(PowerLaw(rat(1), rat(1, 2)), rat(2))
    assert t.exact_value() is None
    lo, hi = t.lower_rational(), t.upper_rational()
    assert lo < hi
    assert lo * lo < rat(1, 2) < hi * hi
    assert t.cmp_dist(rat(7, 10)) == -1
    assert t.cmp_dist(rat(71, 100)) == 1


def test_slabspec_validation():
    sp = golden_span()
    with pytest.raises(ValueError):
        SlabSpec(T=0, R=rat(1), target=sp, thickness=Thickness.exact(1), z0_range=(0, 0))
    with pytest.raises(ValueError):
        SlabSpec(T=1, R=rat(1, 2), target=sp, thickness=Thickness.exact(1), z0_range=(0, 1))
    with pytest.raises(ValueError):
        SlabSpec(T=1, R=rat(1), target=sp, thickness=Thickness.exact(1), z0_range=(2, 1))
    spec = SlabSpec(T=5, R=rat(2), target=sp, thickness=Thickness.exact(1), z0_range=(0, 5))
    assert spec.box_bound == rat(10)
    assert spec.box_candidates() == 6 * 21


def test_member_exact_agrees_with_poly():
    spec = badness_slab(HALF_SPAN, rat(1, 3), UNIT, 1, 4)
    eps = spec.thickness.upper_rational()
    poly = build_slab_poly(spec, eps)
    for z in [(0, 0), (2, 1), (4, 2), (1, 1), (3, 1), (4, 1)]:
        zr = tuple(rat(c) for c in z)
        assert member_exact(spec, z) == poly.contains(zr)


def test_box_guard():
    spec = SlabSpec(
        T=10**6, R=rat(1), target=golden_span(),
        thickness=Thickness.exact(rat(1)), z0_range=(0, 10**6),
    )
    with pytest.raises(BoxTooLargeError):
        enumerate_slab(spec)
    with pytest.raises(BoxTooLargeError):
        naive_slab_scan(spec)


def test_badness_slab_golden_trivial():
    # at gamma below the golden infimum only the origin survives
    for T in (2, 10, 50):
        pts = enumerate_slab(badness_slab(golden_span(), rat(23, 100), UNIT, 1, T))
        assert pts == [(0, 0)]


def test_badness_slab_control_counterexample():
    pts = enumerate_slab(badness_slab(HALF_SPAN, rat(23, 100), UNIT, 1, 2))
    assert (2, 1) in pts and (0, 0) in pts


def test_verify_omega_trivial_reports():
    rep = verify_omega_trivial(golden_span(), rat(23, 100), UNIT, 1, 100)
    assert rep.ok and rep.count == 1 and rep.counterexample is None
    bad = verify_omega_trivial(HALF_SPAN, rat(23, 100), UNIT, 1, 2)
    assert not bad.ok and bad.counterexample == (2, 1)


def test_zeta_and_pi_full_plane_closed_form():
    # A = R^1 lifted to the whole plane: the slab is just the box
    for T in (5, 12):
        z, pts = zeta_layer(FULL_PLANE, UNIT, 1, T)
        assert z == 2 * T + 1
        assert all(p[0] == T for p in pts)
        assert pi_count(FULL_PLANE, UNIT, 1, T) == (T + 1) * (2 * T + 1)
    z5, _ = zeta_layer(FULL_PLANE, UNIT, 1, 5)
    assert z5 == 11


def test_approach_slab_scaled_R():
    # R = 2 doubles the box along z1 and the rate argument
    p1 = pi_count(FULL_PLANE, UNIT, 2, 5)
    assert p1 == 6 * 21


def _random_spec(rng) -> SlabSpec:
    d = rng.choice((1, 2, 3))
    T = rng.randint(1, 12 if d == 1 else (6 if d == 2 else 4))
    R = rng.choice((1, 2))
    point = tuple(rat(rng.randint(-3, 3), rng.randint(1, 5)) for _ in range(d))
    ndir = rng.randint(0, d - 1) if d > 1 else 0
    dirs = []
    while len(dirs) < ndir:
        cand = tuple(rat(rng.randint(-2, 2), rng.randint(1, 3)) for _ in range(d))
        try:
            AffineSubspace(point=point, directions=tuple(dirs) + (cand,))
        except ValueError:
            continue
        dirs.append(cand)
    sub = AffineSubspace(point=point, directions=tuple(dirs))
    if rng.random() < 0.5:
        thick = Thickness.exact(rat(rng.randint(1, 8), rng.randint(4, 24)))
    else:
        thick = Thickness.of_rate(
            PowerLaw(rat(1), rat(1, 2)), rat(R * T), scale=rat(rng.randint(1, 3), 4)
        )
    return SlabSpec(
        T=T, R=rat(R), target=lift(sub), thickness=thick, z0_range=(0, T)
    )


def test_pruned_equals_naive_random():
    rng = random.Random(23)
    for _ in range(30):
        spec = _random_spec(rng)
        assert enumerate_slab(spec) == naive_slab_scan(spec)


def test_enumerate_jobs_split_matches():
    spec = badness_slab(golden_span(), rat(4, 10), UNIT, 1, 30)
    assert enumerate_slab(spec, jobs=4) == enumerate_slab(spec)


def test_half_dilation_golden_ok():
    rep = half_dilation_check(golden_span(), rat(23, 100), UNIT, 1, 10, translates=40, seed=1)
    assert rep.ok and rep.max_points <= 1
    assert rep.translates_checked == 40


def test_half_dilation_control_exhibits_difference():
    # B = {1/2} at T=4: the slab holds (0,0), (2,1), (4,2); the translate
    # centered at the origin traps two integer points whose difference is
    # itself a slab point
    rep = half_dilation_check(
        HALF_SPAN, rat(1, 3), UNIT, 1, 4,
        explicit_translates=[(rat(0), rat(0))],
    )
    assert not rep.ok
    hit = rep.violations[0]
    assert len(hit.points) >= 2
    assert hit.difference_member is not None
    spec = badness_slab(HALF_SPAN, rat(1, 3), UNIT, 1, 4)
    assert member_exact(spec, hit.difference_member)


def test_covering_count_golden():
    rep = covering_count(
        FULL_PLANE, golden_span(), rat(23, 100), UNIT, UNIT, 1, 20
    )
    assert rep.verified
    assert rep.max_tile_occupancy <= 1
    assert rep.point_count <= rep.nu
    assert rep.point_count == pi_count(FULL_PLANE, UNIT, 1, 20)


def test_covering_count_rejects_bad_nesting():
    with pytest.raises(ValueError):
        covering_count(
            golden_span(), FULL_PLANE, rat(23, 100), UNIT, UNIT, 1, 5
        )


def test_layer_of_powerlog_rate():
    # irrational thickness goes through the certified-filter route
    phi = PowerLog(rat(1), rat(1, 2), rat(2), rat(2))
    z, pts = zeta_layer(FULL_PLANE, phi, 2, 8)
    assert z == len(pts) > 0
    assert all(p[0] == 8 for p in pts)
