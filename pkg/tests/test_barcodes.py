import random
import xml.etree.ElementTree as ET
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import random_barcode, random_simplicial_complex
from radial_barcodes.barcodes import (Bar, Barcode, DegreeMismatch, FilteredComplex, FiltrationViolation, Matching,
                                      NotAComplex, barcode_from_json_text, barcode_svg, barcodes_to_json,
                                      bottleneck_distance, boundary_depth, reduce_filtered_complex, verify_matching)
from radial_barcodes.core import INF

F = Fraction


def bc(*bars, degree=0):
    return Barcode(degree, tuple(Bar(F(a), INF if b is None else F(b)) for a, b in bars))


class TestBars:
    def test_left_must_precede_right(self):
        with pytest.raises(ValueError):
            Bar(1, 1)

    def test_infinite_length(self):
        assert Bar(0, INF).length == INF and not Bar(0, INF).finite

    def test_barcode_sorts_infinite_last_at_equal_left(self):
        b = bc((0, None), (0, 1), (-1, 2))
        assert [x.to_json()["right"] for x in b.bars] == ["2/1", "1/1", "inf"]


class TestMatching:
    def test_short_bars_may_stay_unmatched(self):
        assert verify_matching(Matching((), F(1, 2)), bc((0, 1)), bc())

    def test_inequalities_are_strict(self):
        rep = verify_matching(Matching((), F(1, 2)), bc((0, F(3, 2))), bc())
        assert not rep and "unmatched" in rep.violations[0]
        rep = verify_matching(Matching(((0, 0),), F(1, 2)), bc((0, 2)), bc((F(1, 2), 2)))
        assert not rep and "left endpoints" in rep.violations[0]

    def test_close_pair(self):
        assert verify_matching(Matching(((0, 0),), F(1, 2)), bc((0, 2)), bc((F(1, 4), F(9, 4))))

    def test_finite_cannot_pair_with_infinite(self):
        rep = verify_matching(Matching(((0, 0),), 5), bc((0, 4)), bc((0, None)))
        assert not rep

    def test_not_injective(self):
        rep = verify_matching(Matching(((0, 0), (1, 0)), 5), bc((0, 1), (0, 2)), bc((0, 1)))
        assert "not injective" in rep.violations[0]

    def test_degree_mismatch(self):
        with pytest.raises(DegreeMismatch):
            verify_matching(Matching((), 1), bc(degree=0), bc(degree=1))


class TestBottleneck:
    def test_single_bar_against_empty(self):
        assert bottleneck_distance(bc((0, 2)), bc()) == 1

    def test_shifted_infinite_bars(self):
        assert bottleneck_distance(bc((0, None)), bc((1, None))) == 1

    def test_infinite_count_mismatch(self):
        assert bottleneck_distance(bc((0, None)), bc()) == INF

    def test_identical(self):
        b = bc((0, 3), (1, None))
        assert bottleneck_distance(b, b) == 0

    def test_mixed(self):
        assert bottleneck_distance(bc((0, 4), (0, None)), bc((1, 4), (F(1, 2), None))) == 1

    def test_degree_mismatch(self):
        with pytest.raises(DegreeMismatch):
            bottleneck_distance(bc(degree=0), bc(degree=2))

    @settings(max_examples=40)
    @given(st.integers(0, 10 ** 6))
    def test_symmetric_and_zero_on_diagonal(self, seed):
        rng = random.Random(seed)
        B, C = random_barcode(rng), random_barcode(rng)
        assert bottleneck_distance(B, C) == bottleneck_distance(C, B)
        assert bottleneck_distance(B, B) == 0

    @settings(max_examples=40)
    @given(st.integers(0, 10 ** 6))
    def test_bounded_by_erasing_everything(self, seed):
        rng = random.Random(seed)
        B, C = random_barcode(rng, infinite=0), random_barcode(rng, infinite=0)
        halves = [b.length / 2 for b in B.bars + C.bars]
        assert bottleneck_distance(B, C) <= max(halves, default=0)


class TestBoundaryDepth:
    def test_empty_and_only_infinite(self):
        assert boundary_depth({}) == (0, {})
        assert boundary_depth({0: bc((0, None))}) == (0, {0: 0})

    def test_max_over_degrees(self):
        total, per = boundary_depth({0: bc((0, 3), (1, 2)), 1: bc((0, 5), degree=1)})
        assert total == 5 and per == {0: 3, 1: 5}


def two_cell(a0=0, a1=3):
    return FilteredComplex.from_entries([(0, a0, "x"), (1, a1, "y")], [(1, 0, 1)])


class TestReduction:
    def test_single_finite_bar(self):
        out = reduce_filtered_complex(two_cell())
        assert out[0].bars == (Bar(0, 3),) and out[1].bars == ()

    def test_no_boundary_gives_infinite_bars(self):
        K = FilteredComplex.from_entries([(0, 0, "x"), (1, 3, "y")], [])
        out = reduce_filtered_complex(K)
        assert out[0].bars == (Bar(0, INF),) and out[1].bars == (Bar(3, INF),)

    def test_staircase(self):
        K = FilteredComplex.from_entries([(0, 0, "a"), (0, 1, "b"), (1, 2, "e")], [(2, 1, 1), (2, 0, -1)])
        assert reduce_filtered_complex(K)[0].bars == (Bar(0, INF), Bar(1, 2))

    def test_boundary_at_equal_action_is_rejected(self):
        K = FilteredComplex.from_entries([(0, 0, "a"), (0, 1, "b"), (1, 1, "e")], [(2, 1, 1), (2, 0, -1)])
        with pytest.raises(FiltrationViolation):
            reduce_filtered_complex(K)

    def test_wrong_degree(self):
        K = FilteredComplex.from_entries([(0, 0, "x"), (2, 3, "y")], [(1, 0, 1)])
        with pytest.raises(NotAComplex):
            reduce_filtered_complex(K)

    def test_nonzero_square(self):
        gens = [(0, 0, "v"), (1, 1, "e"), (2, 2, "t")]
        K = FilteredComplex.from_entries(gens, [(1, 0, 1), (2, 1, 1)])
        with pytest.raises(NotAComplex):
            reduce_filtered_complex(K)

    def test_filtration_violation(self):
        with pytest.raises(FiltrationViolation):
            reduce_filtered_complex(two_cell(3, 1))

    def test_gf2_differs_from_q(self):
        # boundary 2*x vanishes mod 2
        K = FilteredComplex.from_entries([(0, 0, "x"), (1, 3, "y")], [(1, 0, 2)])
        assert reduce_filtered_complex(K)[0].bars == (Bar(0, 3),)
        assert reduce_filtered_complex(K, "GF2")[0].bars == (Bar(0, INF),)

    def test_unknown_field(self):
        with pytest.raises(ValueError):
            reduce_filtered_complex(two_cell(), "GF3")

    @settings(max_examples=30)
    @given(st.integers(0, 10 ** 6))
    def test_bar_count_matches_generators(self, seed):
        K = random_simplicial_complex(random.Random(seed))
        out = reduce_filtered_complex(K)
        finite = sum(b.finite for d in out for b in out[d].bars)
        infinite = sum(not b.finite for d in out for b in out[d].bars)
        assert 2 * finite + infinite == len(K.generators)

    @settings(max_examples=30)
    @given(st.integers(0, 10 ** 6))
    def test_invariant_under_generator_permutation(self, seed):
        rng = random.Random(seed)
        K = random_simplicial_complex(rng)
        perm = list(range(len(K.generators)))
        rng.shuffle(perm)
        inv = {old: new for new, old in enumerate(perm)}
        gens = [(K.generators[o].degree, K.generators[o].action, K.generators[o].label) for o in perm]
        entries = [(inv[x], inv[y], c) for x, col in K.boundary.items() for y, c in col.items()]
        assert reduce_filtered_complex(FilteredComplex.from_entries(gens, entries)) == reduce_filtered_complex(K)

    @settings(max_examples=30)
    @given(st.integers(0, 10 ** 6))
    def test_depth_moves_by_at_most_twice_the_perturbation(self, seed):
        rng = random.Random(seed)
        K = random_simplicial_complex(rng)
        delta = F(rng.randint(1, 40), 1000)
        L = K.with_actions([g.action + delta * F(rng.randint(-10, 10), 10) for g in K.generators])
        b0, _ = boundary_depth(reduce_filtered_complex(K))
        b1, _ = boundary_depth(reduce_filtered_complex(L))
        assert abs(b0 - b1) <= 2 * delta


class TestExport:
    def test_json_round_trip(self):
        b = bc((0, F(3, 2)), (F(-1, 3), None), degree=2)
        assert barcode_from_json_text(barcodes_to_json(b)) == b

    def test_json_for_several_degrees(self):
        assert barcodes_to_json({1: bc(degree=1), 0: bc((0, 1))}).index('"degree": 0') < \
            barcodes_to_json({1: bc(degree=1), 0: bc((0, 1))}).index('"degree": 1')

    def test_svg_is_well_formed(self):
        svg = barcode_svg(bc((0, 1), (F(1, 2), None)), title="demo", highlight=Bar(0, 1))
        root = ET.fromstring(svg)
        assert root.tag.endswith("svg")
        assert "demo" in svg and "marker-end" in svg

    def test_svg_of_empty_barcode(self):
        ET.fromstring(barcode_svg(bc()))
