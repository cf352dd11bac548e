"""Tests for positivity cones and the order-isomorphism certificate."""
from fractions import Fraction

import numpy as np
import pytest

from oiso.cones import (
    Certificate,
    ConeRep,
    ENUMERATION_CAP,
    OperatorModel,
    cone_rep,
    is_order_isomorphism,
)
from oiso.linalg import SingularMatrixError
from oiso.spaces import FunctionFamily, PointSpace


def _one_t_family(ts, exact=False):
    """The family {1, t} sampled on a grid."""
    if exact:
        gen = np.array(
            [[Fraction(1)] * len(ts), [Fraction(t) for t in ts]], dtype=object
        )
    else:
        gen = np.array([np.ones(len(ts)), np.asarray(ts, dtype=float)])
    return FunctionFamily(PointSpace.grid([float(t) for t in ts]), gen, names=("1", "t"))


class TestConeRep:
    def test_affine_family_rays(self):
        # {a + b t >= 0 on {0, 1/2, 1}} has extreme rays t and 1 - t
        fam = _one_t_family([0.0, 0.5, 1.0])
        rep = cone_rep(fam)
        assert rep.mode == "exact"
        assert rep.dim == 2
        rays = {tuple(np.round(r, 9)) for r in rep.extreme_rays}
        assert rays == {(0.0, 1.0), (1.0, -1.0)}

    def test_affine_family_rays_exact(self):
        fam = _one_t_family([Fraction(0), Fraction(1, 2), Fraction(1)], exact=True)
        rep = cone_rep(fam)
        rays = {tuple(r) for r in rep.extreme_rays}
        assert rays == {(Fraction(0), Fraction(1)), (Fraction(1), Fraction(-1))}

    def test_full_family_shortcut_is_orthant_image(self):
        # the cone of a full family is the image of the positive orthant
        fam = _one_t_family([0.0, 1.0])  # rank 2 on 2 points -> full
        assert fam.is_full
        rep = cone_rep(fam)
        rays = {tuple(np.round(r, 9)) for r in rep.extreme_rays}
        assert rays == {(0.0, 1.0), (1.0, -1.0)}

    def test_full_indicator_family_rays_are_indicators(self):
        fam = FunctionFamily.full(PointSpace.discrete(3), exact=True)
        rep = cone_rep(fam)
        rays = sorted(tuple(r) for r in rep.extreme_rays)
        assert rays == [
            (Fraction(0), Fraction(0), Fraction(1)),
            (Fraction(0), Fraction(1), Fraction(0)),
            (Fraction(1), Fraction(0), Fraction(0)),
        ]

    def test_contains_matches_pointwise_nonnegativity(self):
        fam = _one_t_family([0.0, 0.25, 0.5, 0.75, 1.0])
        rep = cone_rep(fam)
        rng = np.random.default_rng(7)
        for _ in range(200):
            c = rng.uniform(-2, 2, size=2)
            direct = bool(np.all(fam.values(c) >= -1e-9))
            assert rep.contains(c) == direct

    def test_conic_hull_of_rays_equals_cone(self):
        # 2-d cross-check: c is in the cone iff it is a nonnegative
        # combination of the two extreme rays
        fam = _one_t_family([0.0, 0.5, 1.0])
        rep = cone_rep(fam)
        rays = np.asarray(rep.extreme_rays, dtype=float)
        rng = np.random.default_rng(11)
        for _ in range(200):
            c = rng.uniform(-2, 2, size=2)
            ab = np.linalg.solve(rays.T, c)
            hull = bool(np.all(ab >= -1e-9))
            assert rep.contains(c) == hull

    def test_lp_mode_past_cap(self):
        fam = _one_t_family([0.0, 0.5, 1.0])
        rep = cone_rep(fam, cap=1)
        assert rep.mode == "lp"
        assert rep.extreme_rays is None
        assert rep.facet_normals.shape[1] == 2

    def test_deterministic(self):
        fam = _one_t_family([0.0, 0.3, 0.7, 1.0])
        r1 = cone_rep(fam)
        r2 = cone_rep(fam)
        assert np.array_equal(r1.extreme_rays, r2.extreme_rays)
        assert np.array_equal(r1.facet_normals, r2.facet_normals)

    def test_bad_mode_rejected(self):
        with pytest.raises(ValueError):
            ConeRep(np.eye(2), None, "guess")


class TestOperatorModel:
    def test_weighted_permutation_matrix(self):
        t = OperatorModel.weighted_permutation((1, 0), np.array([2.0, 3.0]))
        assert np.allclose(t.matrix, [[0.0, 2.0], [3.0, 0.0]])
        assert t.domain.space.labels == ("x1", "x2")
        assert t.codomain.space.labels == ("y1", "y2")

    def test_apply_values_is_matrix_action(self):
        t = OperatorModel.weighted_permutation((1, 0), np.array([2.0, 3.0]))
        out = t.apply_values(np.array([1.0, 0.0]))
        assert np.allclose(out, [0.0, 3.0])

    def test_inverse_roundtrip(self):
        rng = np.random.default_rng(3)
        m = rng.uniform(1, 2, size=(4, 4)) + 4 * np.eye(4)
        sp = FunctionFamily.full(PointSpace.discrete(4))
        t = OperatorModel(m, sp, sp)
        v = rng.uniform(-1, 1, size=4)
        back = t.inverse().apply_values(t.apply_values(v))
        assert np.allclose(back, v)

    def test_non_square_rejected(self):
        sp = FunctionFamily.full(PointSpace.discrete(2))
        with pytest.raises(ValueError):
            OperatorModel(np.ones((2, 3)), sp, sp)

    def test_singular_rejected(self):
        sp = FunctionFamily.full(PointSpace.discrete(2))
        with pytest.raises(SingularMatrixError):
            OperatorModel(np.ones((2, 2)), sp, sp)

    def test_mixed_arithmetic_rejected(self):
        sp = FunctionFamily.full(PointSpace.discrete(2), exact=True)
        with pytest.raises(ValueError):
            OperatorModel(np.eye(2), sp, sp)

    def test_point_basis_requires_full_families(self):
        fam = _one_t_family([0.0, 0.5, 1.0])
        with pytest.raises(ValueError):
            OperatorModel(np.eye(2), fam, fam, basis="point")

    def test_point_matrix_from_generator_basis(self):
        fam = _one_t_family([0.0, 1.0])  # full
        t = OperatorModel(np.eye(2), fam, fam, basis="generator")
        assert np.allclose(t.point_matrix(), np.eye(2))


class TestCertificatePointBasis:
    def test_weighted_permutation_accepted(self):
        t = OperatorModel.weighted_permutation((1, 0), np.array([2.0, 3.0]))
        cert = is_order_isomorphism(t)
        assert cert.accept
        assert cert.mode == "exact"
        assert cert.arithmetic == "float"

    def test_exact_weighted_permutation_accepted(self):
        t = OperatorModel.weighted_permutation(
            (2, 0, 1), np.array([Fraction(1, 2), Fraction(3), Fraction(5)], dtype=object)
        )
        cert = is_order_isomorphism(t)
        assert cert.accept
        assert cert.arithmetic == "rational"

    def test_unit_upper_triangular_rejected_via_inverse(self):
        # T = [[1,1],[0,1]] is entrywise nonnegative but its inverse sends
        # the second indicator to (-1, 1): the image leaves the cone
        sp_x = FunctionFamily.full(PointSpace.discrete(2, "x"))
        sp_y = FunctionFamily.full(PointSpace.discrete(2, "y"))
        t = OperatorModel(np.array([[1.0, 1.0], [0.0, 1.0]]), sp_x, sp_y)
        cert = is_order_isomorphism(t)
        assert not cert.accept
        assert cert.side == "codomain"
        assert cert.point == 0
        assert cert.witness_values == (0.0, 1.0)
        inv_img = t.inverse_matrix @ np.asarray(cert.witness_values)
        assert inv_img[cert.point] < 0

    def test_negative_entry_rejected_on_domain_side(self):
        sp_x = FunctionFamily.full(PointSpace.discrete(2, "x"))
        sp_y = FunctionFamily.full(PointSpace.discrete(2, "y"))
        t = OperatorModel(np.array([[-1.0, 0.0], [0.0, 1.0]]), sp_x, sp_y)
        cert = is_order_isomorphism(t)
        assert not cert.accept
        assert cert.side == "domain"
        img = t.matrix @ np.asarray(cert.witness_values)
        assert img[cert.point] < 0

    def test_rejection_report_fields(self):
        sp = FunctionFamily.full(PointSpace.discrete(2))
        t = OperatorModel(np.array([[1.0, 1.0], [0.0, 1.0]]), sp, sp)
        doc = is_order_isomorphism(t).to_json_dict()
        assert doc["accept"] is False
        assert doc["witness_side"] == "codomain"
        assert doc["witness"] == [0.0, 1.0]
        assert "negative" in doc["detail"]

    def test_acceptance_report_fields(self):
        t = OperatorModel.weighted_permutation((0, 1), np.array([1.0, 2.0]))
        doc = is_order_isomorphism(t).to_json_dict()
        assert doc == {"schema": "oiso/1", "accept": True, "mode": "exact"}


class TestCertificateGeneratorBasis:
    def test_identity_on_affine_family_accepted(self):
        fam = _one_t_family([0.0, 0.5, 1.0])
        t = OperatorModel(np.eye(2), fam, fam, basis="generator")
        cert = is_order_isomorphism(t)
        assert cert.accept
        assert cert.mode == "exact"

    def test_shear_rejected_with_cone_leaving_ray(self):
        # (a, b) -> (a + b/2, b) sends the ray 1 - t to 3/2 - t... no:
        # coefficients (1,-1) map to (1/2,-1), i.e. 1/2 - t, negative at t=1
        fam = _one_t_family([0.0, 0.5, 1.0])
        t = OperatorModel(np.array([[1.0, 0.5], [0.0, 1.0]]), fam, fam,
                          basis="generator")
        cert = is_order_isomorphism(t)
        assert not cert.accept
        # the witness is a nonnegative function whose image dips negative
        assert np.all(np.asarray(cert.witness_values) >= -1e-9)
        img = t.image_values(np.asarray(cert.witness_coeffs))
        assert float(np.min(np.asarray(img, dtype=float))) < 0

    def test_lp_fallback_agrees_on_accept(self):
        fam = _one_t_family([0.0, 0.5, 1.0])
        t = OperatorModel(np.eye(2), fam, fam, basis="generator")
        cert = is_order_isomorphism(t, cap=1)
        assert cert.accept
        assert cert.mode == "lp"

    def test_lp_fallback_agrees_on_reject(self):
        fam = _one_t_family([0.0, 0.5, 1.0])
        t = OperatorModel(np.array([[1.0, 0.5], [0.0, 1.0]]), fam, fam,
                          basis="generator")
        cert = is_order_isomorphism(t, cap=1)
        assert not cert.accept
        assert cert.mode == "lp"
        # LP witness lies in the source cone and maps negative at the point
        side_fam = t.domain if cert.side == "domain" else t.codomain
        w = np.asarray(cert.witness_coeffs, dtype=float)
        assert np.all(side_fam.values(w) >= -1e-7)
        op = t if cert.side == "domain" else t.inverse()
        img = np.asarray(op.image_values(w), dtype=float)
        assert img[cert.point] < 0

    def test_scaling_accepted(self):
        # (a, b) -> (2a, 2b) preserves nonnegativity both ways
        fam = _one_t_family([0.0, 0.5, 1.0])
        t = OperatorModel(2.0 * np.eye(2), fam, fam, basis="generator")
        assert is_order_isomorphism(t).accept


class TestCap:
    def test_default_cap_value(self):
        assert ENUMERATION_CAP == 12

    def test_certificate_is_frozen(self):
        cert = Certificate(accept=True, mode="exact", arithmetic="float")
        with pytest.raises(AttributeError):
            cert.accept = False
