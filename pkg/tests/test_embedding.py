import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_profile
from radial_barcodes.core import ManifoldParams, PLProfile, Quantity, make_profile, oscillation, sup_distance
from radial_barcodes.embedding import (CannotPerturb, EmbeddingPoint, ParameterError, ScenarioError, SupportError,
                                       VolumeError, ball_volume, build_generators, case_data_for, combine,
                                       f0_profile, generator_interval, parse_scenario, perturb_to_generic,
                                       phi_profile, sup_norm_difference, hofer_window, volume_constants)
from radial_barcodes.homotopy import CaseMismatch
from radial_barcodes.spectrum import classify_kinks, has_distinct_kink_actions

F = Fraction
R = F(9, 10)
EPS = F(1, 20)
SPHERE = ManifoldParams(1, 2, 2, 1, R)


@pytest.fixture(scope="module")
def fam3():
    return build_generators(SPHERE, EPS, 3)


class TestGenerators:
    def test_first_interval(self):
        assert generator_interval(R, EPS, 1) == (F(7, 8), F(9, 10))
        assert generator_interval(R, EPS, 2) == (F(69, 80), F(7, 8))

    def test_landmarks(self, fam3):
        lm = fam3.landmarks[0]
        assert (lm.lo, lm.hi, lm.r2) == (F(7, 8), F(9, 10), F(71, 80))
        f = fam3.profiles[0]
        assert max(f.values) == R and f(lm.r1) == f(lm.r3) == R and f(lm.r2) == 0

    def test_supports_are_disjoint(self, fam3):
        marks = fam3.landmarks
        assert all(a.lo >= b.hi for a, b in zip(marks, marks[1:]))

    def test_tent_slopes_are_not_integers(self, fam3):
        # the zero plateaus are removed later by perturbation
        for f in fam3.profiles:
            assert all(s == 0 or s.denominator != 1 for s in f.slopes())

    def test_bad_parameters(self):
        with pytest.raises(ParameterError):
            build_generators(SPHERE, R, 1)
        with pytest.raises(ParameterError):
            build_generators(SPHERE, EPS, 0)
        with pytest.raises(ParameterError):
            build_generators(SPHERE, EPS, 1, offset=F(1, 4), width=F(1, 4))


class TestPhi:
    def test_zero_point(self, fam3):
        assert all(v == 0 for v in phi_profile(EmbeddingPoint(()), fam3).values)

    def test_single_coefficient_scales(self, fam3):
        g = phi_profile(EmbeddingPoint((F(1, 2),)), fam3)
        assert max(g.values) == R / 2

    def test_disjoint_sum(self, fam3):
        g = phi_profile(EmbeddingPoint((1, 0, 1)), fam3)
        assert oscillation(g) == R
        assert g(fam3.landmarks[2].r1) == R and g(fam3.landmarks[1].r1) == 0

    def test_trailing_zeros_are_dropped(self):
        assert EmbeddingPoint((1, 0, 0)).support == 1

    def test_coefficients_in_unit_interval(self):
        with pytest.raises(ParameterError):
            EmbeddingPoint((F(3, 2),))

    def test_support_beyond_family(self, fam3):
        with pytest.raises(SupportError):
            combine([1, 1, 1, 1], fam3)

    def test_sup_norm_difference(self):
        a, b = EmbeddingPoint((1, F(1, 2))), EmbeddingPoint((F(1, 4),), a0=F(-1))
        assert sup_norm_difference(a, b) == 1
        assert sup_norm_difference(a, EmbeddingPoint((F(1, 4),))) == F(3, 4)


class TestPerturb:
    def test_postconditions(self):
        rng = random.Random(1)
        p = ManifoldParams(1, 2, 2, 1, 1)
        for _ in range(20):
            f = random_profile(rng)
            g = perturb_to_generic(f, p, F(1, 100), seed=rng.randint(0, 99))
            assert g.satisfies_slope_condition()
            assert sup_distance(f, g) < F(1, 100)
            assert [k.r for k in classify_kinks(g)] == [k.r for k in classify_kinks(f.simplified())]

    def test_breaks_a_coincidence(self):
        f = make_profile([(0, F(1, 20)), (F(1, 4), F(1, 8)), (F(1, 2), F(1, 40)), (F(3, 4), F(1, 8)),
                          (1, F(1, 20))], 1)
        p = ManifoldParams(1, 0, 0, 0, 1)
        assert not has_distinct_kink_actions(f, p)
        g = perturb_to_generic(f, p, F(1, 1000))
        assert has_distinct_kink_actions(g, p)

    def test_pins_hold(self):
        f = make_profile([(0, 0), (F(1, 2), F(1, 4)), (1, 0)], 1)
        g = perturb_to_generic(f, ManifoldParams(1, 0, 0, 0, 1), F(1, 100), pinned=[(F(1, 2), F(1, 4))])
        assert g(F(1, 2)) == F(1, 4)

    def test_pin_must_be_a_breakpoint(self):
        f = make_profile([(0, 0), (F(1, 2), F(1, 4)), (1, 0)], 1)
        with pytest.raises(CannotPerturb):
            perturb_to_generic(f, ManifoldParams(1, 0, 0, 0, 1), F(1, 100), pinned=[(F(1, 4), 0)])

    def test_fully_pinned_invalid_profile(self):
        f = PLProfile(((0, 0), (F(1, 2), F(1, 2)), (1, 0)))
        with pytest.raises(CannotPerturb):
            perturb_to_generic(f, ManifoldParams(1, 0, 0, 0, 1), F(1, 100),
                               pinned=[(0, 0), (F(1, 2), F(1, 2)), (1, 0)])

    def test_deterministic(self):
        f = random_profile(random.Random(5))
        p = ManifoldParams(1, 1, 0, 0, 1)
        assert perturb_to_generic(f, p, F(1, 50), seed=3) == perturb_to_generic(f, p, F(1, 50), seed=3)


class TestCaseData:
    def test_sphere_case1(self, fam3):
        data = case_data_for(SPHERE, EPS, (1,), fam3)
        data.validate()
        assert (data.r1, data.r2, data.r3) == (fam3.landmarks[0].r1, fam3.landmarks[0].r2, fam3.landmarks[0].r3)
        assert -data.m0 * data.r1 < EPS
        assert sup_distance(data.g, phi_profile(EmbeddingPoint((1,)), fam3)) < EPS

    def test_zero_point_has_no_data(self, fam3):
        with pytest.raises(CaseMismatch):
            case_data_for(SPHERE, EPS, (), fam3)


class TestHeadlineBounds:
    def test_hofer_window_example(self, fam3):
        w = hofer_window(EmbeddingPoint((1,)), EmbeddingPoint(()), SPHERE, EPS, fam3)
        assert w.oscillation == R and w.upper == 2 * R
        assert w.lower == Quantity(R - 2 * EPS, -7 * EPS)

    def test_lower_clamps_at_zero(self, fam3):
        w = hofer_window(EmbeddingPoint((F(1, 100),)), EmbeddingPoint(()), SPHERE, EPS, fam3)
        assert w.lower == Quantity(0, 0) and w.raw_lower < Quantity(0, 0)

    @settings(max_examples=30)
    @given(st.lists(st.fractions(0, 1, max_denominator=8), min_size=1, max_size=3),
           st.lists(st.fractions(0, 1, max_denominator=8), min_size=1, max_size=3))
    def test_window_is_ordered(self, fam3, a, b):
        w = hofer_window(EmbeddingPoint(tuple(a)), EmbeddingPoint(tuple(b)), SPHERE, EPS, fam3)
        assert w.lower <= Quantity(w.oscillation, 0) and w.oscillation <= w.upper

    def test_ball_volume(self):
        assert ball_volume(1, R) == R
        assert ball_volume(2, F(1, 2)) == F(1, 4)
        with pytest.raises(ParameterError):
            ball_volume(0, 1)

    def test_f0_profile(self):
        f0 = f0_profile(SPHERE, EPS, F(1, 100))
        assert f0(0) == f0(F(7, 10)) == R
        assert f0(F(3, 4)) == 0 and f0(F(4, 5)) == R
        assert f0(F(17, 20) - F(1, 100)) == 0 == f0(R)

    @pytest.mark.parametrize("eps, delta", [(F(1, 4), F(1, 100)), (EPS, EPS), (EPS, 0)])
    def test_f0_rejects(self, eps, delta):
        with pytest.raises(ParameterError):
            f0_profile(SPHERE, eps, delta)

    def test_volume_must_exceed_ball(self):
        with pytest.raises(VolumeError):
            volume_constants(SPHERE, EPS, R, EmbeddingPoint((1,)))

    def test_volume_convention_is_scale_free(self):
        p = ManifoldParams(2, 1, 0, 0, R)
        a = EmbeddingPoint((1,))
        assert volume_constants(p, EPS, 3, a).C == volume_constants(p, EPS, 3, a, "omega^n/n!").C
        with pytest.raises(ParameterError):
            volume_constants(p, EPS, 3, a, "bogus")

    def test_a0_branch(self):
        p = ManifoldParams(1, 2, 2, 1, R)
        big = volume_constants(p, EPS, 2, EmbeddingPoint((F(1, 4),), a0=F(1)))
        small = volume_constants(p, EPS, 2, EmbeddingPoint((F(1, 4),)))
        assert big.lower_bound > small.lower_bound
        # affine in |a0| with slope 2*pi*R*Vol(B_small)/Vol(M)
        half = volume_constants(p, EPS, 2, EmbeddingPoint((F(1, 4),), a0=F(1, 2)))
        assert big.lower_bound - half.lower_bound == Quantity(R * (R - 4 * EPS) / 2 / 2, 0)


class TestScenario:
    TEXT = "n=1\nN=2\ngamma2pi=2\nlambda_sign=1\nR=9/10\nepsilon=1/20\nm=2\na=1,1/2\nb=0\n"

    def test_round_trip(self):
        s = parse_scenario(self.TEXT)
        assert parse_scenario(s.to_text()) == s
        assert s.a == (1, F(1, 2)) and s.m == 2

    def test_comments_and_defaults(self):
        s = parse_scenario("# sphere\n" + self.TEXT.replace("m=2\n", "") + "  # trailing\n")
        assert s.m == 2 and s.seed == 0 and s.params.exterior_morse_indices == (0,)

    @pytest.mark.parametrize("bad", ["n=1\n", "n=1\nbogus=2\n", "garbage\n",
                                     TEXT.replace("R=9/10", "R=nine"), TEXT.replace("gamma2pi=2", "gamma2pi=1")])
    def test_errors(self, bad):
        with pytest.raises(ScenarioError):
            parse_scenario(bad)

    def test_json(self):
        js = parse_scenario(self.TEXT).to_json()
        assert js["R"] == "9/10" and js["a"] == "1/1,1/2"
