"""Tests for the adequacy flags and the clamp-based bump constructions."""
from fractions import Fraction

import numpy as np
import pytest

from oiso.adequacy import (
    SeparationInfeasibleError,
    build_precise_bump,
    build_subbasic_bump,
    check_adequate,
    clamp,
)
from oiso.fuzz import random_metric_space, spawn_generators
from oiso.spaces import FunctionFamily, PointSpace, build_lipschitz_family


class TestClamp:
    def test_scalar_values(self):
        assert clamp(-0.5) == 0.0
        assert clamp(0.0) == 0.0
        assert clamp(0.25) == 0.25
        assert clamp(1.0) == 1.0
        assert clamp(7.0) == 1.0

    def test_idempotent(self):
        xs = np.linspace(-3, 3, 61)
        assert np.array_equal(clamp(clamp(xs)), clamp(xs))

    def test_exact_values(self):
        assert clamp(Fraction(-1, 2)) == Fraction(0)
        assert clamp(Fraction(1, 3)) == Fraction(1, 3)
        assert clamp(Fraction(4, 3)) == Fraction(1)

    def test_exact_array(self):
        arr = np.array([Fraction(-1), Fraction(1, 2), Fraction(2)], dtype=object)
        out = clamp(arr)
        assert list(out) == [Fraction(0), Fraction(1, 2), Fraction(1)]

    def test_monotone(self):
        xs = np.sort(np.random.default_rng(0).uniform(-2, 2, size=50))
        cs = clamp(xs)
        assert np.all(np.diff(cs) >= 0)


class TestCheckAdequate:
    def test_full_family_is_adequate(self):
        fam = FunctionFamily.full(PointSpace.discrete(4))
        rep = check_adequate(fam)
        assert rep.adequate
        assert rep.separates and rep.has_constants
        assert rep.g_invariant and rep.cone_generates
        assert rep.g_residual == 0.0
        assert all(w is not None for w in rep.separation_witnesses)

    def test_lipschitz_families_are_adequate(self):
        for rng in spawn_generators(31, 6):
            space = random_metric_space(rng, max_points=9)
            fam = build_lipschitz_family(space)
            rep = check_adequate(fam)
            assert rep.adequate

    def test_removing_constants_flips_the_flag(self):
        # span{t, t^2} on a grid avoiding 0: no constants, still separating
        ts = np.array([0.25, 0.5, 1.0])
        fam = FunctionFamily(PointSpace.grid(list(ts)),
                             np.array([ts, ts ** 2]), names=("t", "t^2"))
        rep = check_adequate(fam)
        assert not rep.has_constants
        assert not rep.adequate

    def test_affine_family_is_not_clamp_invariant(self):
        # clamp(2t - 1) on {0, 1/2, 1} is (0, 0, 1): not affine in t
        ts = np.array([0.0, 0.5, 1.0])
        fam = FunctionFamily(PointSpace.grid(list(ts)),
                             np.array([np.ones(3), ts]), names=("1", "t"))
        rep = check_adequate(fam)
        assert rep.separates is False or rep.g_invariant is False
        assert not rep.adequate
        assert rep.g_residual > 0 or not rep.separates

    def test_cone_generation_without_constants_uses_lp(self):
        # difference generators: the only nonnegative span element is 0, so
        # the cone cannot generate and the LP reports infeasibility
        gen = np.array([[1.0, -1.0, 0.0], [0.0, 1.0, -1.0]])
        fam = FunctionFamily(PointSpace.discrete(3), gen, names=("a", "b"))
        rep = check_adequate(fam)
        assert not rep.has_constants
        assert not rep.cone_generates
        assert rep.cone_witness == {"generator": "a", "infeasible": True}
        assert not rep.adequate

    def test_cone_generation_without_constants_feasible_case(self):
        # span{t, t(1-t)} on (0,1) samples: both generators nonnegative there,
        # so each is trivially a difference of cone elements (LP route)
        ts = np.array([0.2, 0.5, 0.8])
        gen = np.array([ts, ts * (1 - ts)])
        fam = FunctionFamily(PointSpace.grid(list(ts)), gen, names=("t", "t(1-t)"))
        rep = check_adequate(fam)
        assert not rep.has_constants
        assert rep.cone_generates
        assert rep.cone_witness["form"] == "lp"

    def test_exact_full_family(self):
        fam = FunctionFamily.full(PointSpace.discrete(3), exact=True)
        rep = check_adequate(fam)
        assert rep.adequate

    def test_report_json_shape(self):
        fam = FunctionFamily.full(PointSpace.discrete(2))
        doc = check_adequate(fam).to_json_dict()
        assert doc["schema"] == "oiso/1"
        assert set(doc) == {"schema", "separates", "has_constants", "g_invariant",
                            "g_residual", "cone_generates", "adequate"}


class TestSubbasicBump:
    def test_tent_shape_on_full_family(self):
        # anchor x0 with f = distances: h = min(|f - f(x0)|/eps, 1)
        space = PointSpace.grid([0.0, 0.3, 0.8, 2.0])
        fam = FunctionFamily.full(space)
        f = np.asarray(space.metric[:, 0], dtype=float)
        h = build_subbasic_bump(fam, 0, f, eps=0.5).values
        expect = np.minimum(np.abs(f - f[0]) / 0.5, 1.0)
        assert np.allclose(h, expect)
        assert h[0] == 0.0

    def test_outside_neighborhood_is_one(self):
        fam = FunctionFamily.full(PointSpace.grid([0.0, 1.0, 5.0]))
        f = np.array([0.0, 1.0, 5.0])
        h = build_subbasic_bump(fam, 0, f, eps=1.0).values
        assert h[0] == 0.0
        assert h[1] == 1.0  # |f - f(x0)| = eps exactly: already outside
        assert h[2] == 1.0

    def test_values_within_unit_interval(self):
        rng = np.random.default_rng(2)
        fam = FunctionFamily.full(PointSpace.discrete(6))
        f = rng.standard_normal(6)
        h = build_subbasic_bump(fam, 2, f, eps=0.7).values
        assert np.all(h >= 0.0) and np.all(h <= 1.0)
        assert h[2] == 0.0

    def test_exact_mode(self):
        fam = FunctionFamily.full(PointSpace.discrete(3), exact=True)
        f = np.array([Fraction(0), Fraction(1, 2), Fraction(2)], dtype=object)
        h = build_subbasic_bump(fam, 0, f, eps=Fraction(1)).values
        assert list(h) == [Fraction(0), Fraction(1, 2), Fraction(1)]

    def test_requires_span_membership(self):
        ts = np.array([0.0, 0.5, 1.0])
        fam = FunctionFamily(PointSpace.grid(list(ts)),
                             np.array([np.ones(3)]), names=("1",))
        with pytest.raises(ValueError, match="span"):
            build_subbasic_bump(fam, 0, ts, eps=1.0)

    def test_rejects_nonpositive_eps(self):
        fam = FunctionFamily.full(PointSpace.discrete(2))
        with pytest.raises(ValueError, match="eps"):
            build_subbasic_bump(fam, 0, np.array([0.0, 1.0]), eps=0.0)


class TestPreciseBump:
    def test_indicator_on_full_family(self):
        # separating the anchor from all other points yields its indicator
        fam = FunctionFamily.full(PointSpace.discrete(5))
        h = build_precise_bump(fam, 1, [0, 2, 3, 4]).values
        assert np.allclose(h, np.eye(5)[1])

    def test_partial_closed_set(self):
        fam = FunctionFamily.full(PointSpace.discrete(4))
        h = build_precise_bump(fam, 0, [2, 3]).values
        assert h[0] == 1.0
        assert h[2] == 0.0 and h[3] == 0.0
        assert np.all(h >= 0.0) and np.all(h <= 1.0)

    def test_empty_closed_set_gives_constant_one(self):
        fam = FunctionFamily.full(PointSpace.discrete(3))
        h = build_precise_bump(fam, 0, []).values
        assert np.allclose(h, 1.0)

    def test_anchor_in_closed_set_rejected(self):
        fam = FunctionFamily.full(PointSpace.discrete(3))
        with pytest.raises(ValueError, match="anchor"):
            build_precise_bump(fam, 1, [1, 2])

    def test_labels_accepted(self):
        fam = FunctionFamily.full(PointSpace.discrete(3))
        h = build_precise_bump(fam, "x1", ["x2", "x3"]).values
        assert np.allclose(h, [1.0, 0.0, 0.0])

    def test_exact_mode(self):
        fam = FunctionFamily.full(PointSpace.discrete(4), exact=True)
        h = build_precise_bump(fam, 2, [0, 3]).values
        assert h[2] == Fraction(1)
        assert h[0] == Fraction(0) and h[3] == Fraction(0)
        assert all(Fraction(0) <= x <= Fraction(1) for x in h)

    def test_lipschitz_family_bumps(self):
        for rng in spawn_generators(77, 4):
            space = random_metric_space(rng, max_points=7)
            fam = build_lipschitz_family(space)
            n = space.size
            for x0 in range(n):
                closed = [z for z in range(n) if z != x0]
                h = np.asarray(build_precise_bump(fam, x0, closed).values,
                               dtype=float)
                assert abs(h[x0] - 1.0) <= 1e-9
                assert np.max(np.abs(h[closed])) <= 1e-9

    def test_infeasible_separation_raises(self):
        # a constants-only family cannot separate two points
        fam = FunctionFamily(PointSpace.discrete(2), np.ones((1, 2)), names=("1",))
        with pytest.raises(SeparationInfeasibleError):
            build_precise_bump(fam, 0, [1])
