from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import profiles
from radial_barcodes.core import (INF, DomainError, DomainMismatch, ManifoldParams, ParamsError, PLProfile, Quantity,
                                  SlopeConditionViolation, decimal_string, format_fraction, linear_combine,
                                  make_profile, oscillation, pi_bounds, sup_distance, to_fraction, zero_profile)

F = Fraction
TENT = [(0, 0), (F(1, 2), F(1, 4)), (1, 0)]


@pytest.fixture
def tent():
    return make_profile(TENT, 1)


class TestScalars:
    def test_to_fraction_accepts_text_and_ints(self):
        assert to_fraction("3/4") == F(3, 4)
        assert to_fraction(" -2 ") == -2
        assert to_fraction(F(1, 3)) == F(1, 3)

    def test_to_fraction_rejects_floats(self):
        with pytest.raises(TypeError):
            to_fraction(0.5)

    def test_format_is_always_p_over_q(self):
        assert format_fraction(F(2)) == "2/1"
        assert format_fraction(F(-3, 4)) == "-3/4"

    def test_infinity_dominates(self):
        assert INF > F(10 ** 30)
        assert not INF < F(0)
        assert INF == INF

    def test_pi_enclosure(self):
        lo, hi = pi_bounds(30)
        assert F(314159265358979323846264338327, 10 ** 29) < lo < hi < F(314159265358979323846264338328, 10 ** 29)
        assert hi - lo < F(1, 10 ** 25)

    def test_decimal_is_display_only(self):
        assert decimal_string(F(1, 3), 5) == "0.33333"


class TestQuantity:
    def test_mixed_comparison(self):
        # 2*pi*(1/2) = pi > 3
        assert Quantity(F(1, 2), 0) > Quantity(0, 3)
        assert Quantity(F(1, 2), -3) < Quantity(0, F(1, 7))

    def test_equality_is_structural(self):
        assert Quantity(1, 2) == Quantity(F(1), F(2))
        assert Quantity(1, 0) != Quantity(0, 1)

    def test_theorem_bound_shape(self):
        R, eps = F(9, 10), F(1, 20)
        q = Quantity(R - 2 * eps, -7 * eps)
        # 2*pi*R - (4*pi + 7)*eps, evaluated
        assert abs(float(q.to_decimal()) - (2 * 3.141592653589793 * 0.9 - (4 * 3.141592653589793 + 7) * 0.05)) < 1e-12

    def test_json_fields(self):
        js = Quantity(F(4, 5), F(-7, 20)).to_json()
        assert js["twoPiCoefficient"] == "4/5" and js["raw"] == "-7/20"
        assert js["symbolic"] == "2*pi*(4/5) + (-7/20)"

    @given(st.fractions(-5, 5, max_denominator=50), st.fractions(-5, 5, max_denominator=50))
    def test_sign_agrees_with_float(self, a, b):
        q = Quantity(a, b)
        val = 2 * 3.141592653589793 * float(a) + float(b)
        if abs(val) > 1e-9:
            assert q.sign() == (1 if val > 0 else -1)


class TestManifoldParams:
    def test_valid_sphere(self):
        p = ManifoldParams(1, 2, 2, 1, F(9, 10))
        assert p.shift == 2 and p.D == 2

    @pytest.mark.parametrize("args", [
        (1, 0, 1, 1, 1),          # N = 0 forces gamma = 0
        (1, 2, 1, 0, F(1, 4)),    # sigma = 0 forces gamma = 0
        (1, 2, 1, 1, 1),          # 2R <= gamma violated
        (0, 1, 0, 0, 1),          # n >= 1
        (1, 1, 0, 2, 1),          # sign out of range
    ])
    def test_rejects_inconsistent(self, args):
        with pytest.raises(ParamsError):
            ManifoldParams(*args)

    def test_exterior_indices_need_minimum_and_range(self):
        with pytest.raises(ParamsError):
            ManifoldParams(1, 1, 0, 0, 1, (1,))
        with pytest.raises(ParamsError):
            ManifoldParams(1, 1, 0, 0, 1, (0, 2))


class TestProfiles:
    def test_tent_is_valid(self, tent):
        assert tent.slopes() == [F(1, 2), F(-1, 2)]

    def test_integer_slope_rejected(self):
        with pytest.raises(SlopeConditionViolation) as exc:
            make_profile([(0, 0), (F(1, 2), F(1, 2)), (1, 0)], 1)
        assert exc.value.segment == 0 and exc.value.slope == 1

    def test_steep_final_slope_rejected(self):
        with pytest.raises(SlopeConditionViolation) as exc:
            make_profile([(0, 0), (F(1, 2), F(3, 4)), (1, 0)], 1)
        assert exc.value.segment == 1

    @pytest.mark.parametrize("pts", [
        [(0, 0), (F(1, 2), F(1, 4)), (F(1, 2), 0), (1, 0)],
        [(F(1, 10), 0), (1, 0)],
        [(0, 0)],
    ])
    def test_domain_errors(self, pts):
        with pytest.raises(DomainError):
            make_profile(pts)

    def test_r_must_reach_R(self):
        with pytest.raises(DomainError):
            make_profile(TENT, 2)

    def test_evaluation_interpolates(self, tent):
        assert tent(F(1, 4)) == F(1, 8)
        assert tent(1) == 0
        with pytest.raises(DomainError):
            tent(2)

    def test_simplified_drops_collinear_points(self):
        f = PLProfile(((0, 0), (F(1, 4), F(1, 8)), (F(1, 2), F(1, 4)), (1, 0)))
        assert f.simplified().radii == (0, F(1, 2), 1)

    @given(profiles())
    def test_text_round_trip(self, f):
        assert PLProfile.from_text(f.to_text()) == f


class TestAlgebra:
    def test_identity_and_negation(self, tent):
        g = make_profile([(0, F(1, 3)), (F(1, 3), F(1, 2)), (1, F(1, 5))], 1)
        assert linear_combine([1, 0], [tent, g]).simplified() == tent
        neg = linear_combine([-1], [tent])
        assert all(neg(r) == -tent(r) for r in tent.radii)

    def test_disjoint_supports_concatenate(self):
        f1 = PLProfile(((0, 0), (F(1, 10), F(1, 5)), (F(1, 5), 0), (1, 0)))
        f2 = PLProfile(((0, 0), (F(1, 2), 0), (F(3, 5), F(1, 3)), (F(7, 10), 0), (1, 0)))
        h = linear_combine([1, 1], [f1, f2])
        assert max(h.values) == max(max(f1.values), max(f2.values))

    def test_domain_mismatch(self, tent):
        with pytest.raises(DomainMismatch):
            linear_combine([1, 1], [tent, zero_profile(2)])
        with pytest.raises(DomainMismatch):
            sup_distance(tent, zero_profile(2))

    def test_sup_distance_examples(self, tent):
        assert sup_distance(tent, tent) == 0
        assert sup_distance(tent, zero_profile(1)) == F(1, 4)
        shifted = PLProfile(tuple((r, v + F(1, 8)) for r, v in tent.points))
        assert sup_distance(tent, shifted) == F(1, 8)

    def test_oscillation_examples(self, tent):
        assert oscillation(zero_profile(1)) == 0
        assert oscillation(tent) == F(1, 4)
        g = PLProfile(((0, F(-1, 8)), (F(1, 2), F(1, 4)), (1, 0)))
        assert oscillation(g) == F(3, 8)

    @settings(max_examples=40)
    @given(profiles(), profiles(), profiles())
    def test_sup_distance_is_a_metric(self, f, g, h):
        assert sup_distance(f, g) == sup_distance(g, f)
        assert sup_distance(f, h) <= sup_distance(f, g) + sup_distance(g, h)

    @given(profiles(), st.fractions(-4, 4, max_denominator=9))
    def test_oscillation_is_homogeneous(self, f, a):
        assert oscillation(f.scaled(a)) == abs(a) * oscillation(f)
