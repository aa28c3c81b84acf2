from itertools import combinations

import numpy as np
import pytest

from app.core.exceptions import LoopConstructionError
from app.models.schemas import (Configuration, SectionDescriptor, SectionKind,
                                WitnessKind)
from app.services.obstruction_service import (concatenate_loops, default_base,
                                              gauss_winding, generator_loop,
                                              measure_coefficients,
                                              permute_loop,
                                              trial_configurations,
                                              reverse_loop)
from app.services.section_service import parse_section
from app.utils.geometry import compose_permutations
from app.utils.sampling import random_permutation

MIDPOINT = SectionDescriptor(kind=SectionKind.MIDPOINT)


@pytest.fixture
def base3():
    return default_base(3, seed=0)


class TestGeneratorLoop:
    def test_pairs_with_its_own_generator(self, base3):
        """Test the loop pairs to 1 with its own generator and 0 elsewhere"""
        loop = generator_loop(3, 1, 2, base3)

        assert len(loop.configs) == 257
        assert gauss_winding(loop, 1, 2) == 1
        assert gauss_winding(loop, 1, 3) == 0
        assert gauss_winding(loop, 2, 3) == 0

    def test_swapped_arguments_keep_the_winding(self, base3):
        """Test the direction from p_b to p_a winds the same way in the plane"""
        loop = generator_loop(3, 1, 2, base3)
        assert gauss_winding(loop, 2, 1) == 1

    def test_orbit_leaving_the_disk(self, base3):
        """Test an orbit crossing the unit circle is rejected"""
        with pytest.raises(LoopConstructionError):
            generator_loop(3, 1, 2, base3, radius=0.5)

    def test_orbit_too_close_to_other_points(self):
        """Test an orbit passing near a fixed point is rejected"""
        base = Configuration(dim=2, points=((0.0, 0.0), (0.5, 0.0), (0.15, 0.0)))
        with pytest.raises(LoopConstructionError):
            generator_loop(3, 1, 2, base, radius=0.1)

    def test_invalid_pair(self, base3):
        """Test a pair with equal or out-of-range labels is rejected"""
        with pytest.raises(LoopConstructionError):
            generator_loop(3, 2, 2, base3)

    def test_refinement_keeps_the_winding(self, base3):
        """Test doubling the samples keeps the winding"""
        coarse = generator_loop(3, 2, 3, base3, samples=64)
        fine = generator_loop(3, 2, 3, base3, samples=512)
        assert gauss_winding(coarse, 2, 3) == gauss_winding(fine, 2, 3) == 1

    def test_loop_is_closed_and_planar(self, base3):
        """Test the loop has K+1 planar frames and ends where it starts"""
        loop = generator_loop(3, 3, 1, base3, samples=32)
        assert loop.configs[0].points == loop.configs[-1].points
        assert loop.configs[5].points[1] == base3.points[1]


class TestLoopAlgebra:
    def test_reverse_negates(self, base3):
        """Test reversing a loop negates its winding"""
        loop = generator_loop(3, 1, 2, base3)
        assert gauss_winding(reverse_loop(loop), 1, 2) == -1

    def test_concatenation_adds(self, base3):
        """Test concatenated loops add their windings"""
        loop = generator_loop(3, 1, 2, base3)
        assert gauss_winding(concatenate_loops(loop, loop), 1, 2) == 2
        assert gauss_winding(concatenate_loops(loop, reverse_loop(loop)), 1, 2) == 0

    def test_concatenation_needs_common_base(self, base3):
        """Test loops with different base frames cannot be joined"""
        other = default_base(3, seed=1)
        with pytest.raises(LoopConstructionError):
            concatenate_loops(
                generator_loop(3, 1, 2, base3), generator_loop(3, 1, 2, other)
            )

    def test_permuted_loop_relabels_generators(self):
        """Test permuting a loop relabels the pair it winds around"""
        rng = np.random.default_rng(8)
        base = default_base(4, seed=8)
        for a, b in combinations(range(1, 5), 2):
            loop = generator_loop(4, a, b, base, samples=64)
            sigma = random_permutation(4, rng)
            moved = permute_loop(loop, sigma)
            for x, y in combinations(range(1, 5), 2):
                assert gauss_winding(moved, sigma[x - 1], sigma[y - 1]) == (
                    gauss_winding(loop, x, y)
                )

    def test_permutation_action_composes(self, base3):
        """Test permuting twice matches permuting by the composition"""
        loop = generator_loop(3, 1, 2, base3, samples=64)
        sigma, tau = (2, 3, 1), (3, 1, 2)
        sequential = permute_loop(permute_loop(loop, tau), sigma)
        composed = permute_loop(loop, compose_permutations(sigma, tau))
        assert [c.points for c in sequential.configs] == [
            c.points for c in composed.configs
        ]


def test_swap_symmetry_on_random_generator_loops():
    """For planar loops G_ab and G_ba pair identically"""
    rng = np.random.default_rng(12)
    for k in range(100):
        n = int(rng.integers(2, 6))
        a, b = (int(v) + 1 for v in rng.choice(n, size=2, replace=False))
        loop = generator_loop(n, a, b, default_base(n, seed=k), samples=64)
        for x, y in combinations(range(1, n + 1), 2):
            assert gauss_winding(loop, x, y) == gauss_winding(loop, y, x)


def test_default_base_is_seeded_and_inside_disk():
    """Test the default base depends only on the seed and stays in the disk"""
    a = default_base(5, seed=3)
    assert a.points == default_base(5, seed=3).points
    assert np.linalg.norm(a.as_array(), axis=1).max() < 0.62


def test_collinear_trial_layout():
    """Test the collinear trial puts p_3 at the centroid of p_1 and p_2"""
    trials = trial_configurations(3)
    assert trials["collinear"].tolist() == [[-0.5, 0.0], [0.5, 0.0], [0.0, 0.0]]
    assert trials["polygon"][-1].tolist() == [0.0, 0.0]


class TestMeasureCoefficients:
    def test_midpoint_on_fixed_base(self):
        """Test the midpoint gives lambda 1 on a fixed base"""
        base = Configuration(dim=2, points=((0.0, 0.0), (0.3, 0.0)))
        report = measure_coefficients(MIDPOINT, 2, base=base)

        assert report.lambda_values == {2: 1}
        assert report.delta_values == {}
        assert report.lambda_consistent
        assert report.lambda_value == 1
        assert report.identity_holds
        assert report.collision_witness is None

    @pytest.mark.parametrize("radius", [0.05, 0.1, 0.2])
    def test_midpoint_identity_over_bases(self, radius):
        """Test the midpoint identity over seeded bases"""
        for seed in range(10):
            report = measure_coefficients(MIDPOINT, 2, radius=radius, seed=seed)
            assert report.lambda_value == 1
            assert report.identity_holds

    def test_midpoint_is_stable_in_sample_count(self):
        """Test the coefficients do not change with the sample count"""
        for samples in (64, 128, 512):
            report = measure_coefficients(MIDPOINT, 2, samples=samples, seed=1)
            assert report.lambda_value == 1

    def test_centroid_collides_on_collinear_trial(self):
        """Test the centroid collides on the collinear trial"""
        report = measure_coefficients(parse_section("centroid"), 3)
        witness = report.collision_witness

        assert witness is not None
        assert witness.kind == WitnessKind.COLLISION
        assert witness.loop_id == "trial:collinear"
        assert witness.slots == [0, 3]
        assert witness.frame[0] == (0.0, 0.0)
        assert not report.identity_holds

    def test_centroid_without_trials_has_vanishing_lambda(self):
        """Test the centroid winds zero times without trials"""
        report = measure_coefficients(parse_section("centroid"), 3, trials=False)

        assert report.collision_witness is None
        assert report.lambda_values == {2: 0, 3: 0}
        assert report.delta_values == {"2,3": 0}
        assert not report.identity_holds

    def test_closest_pair_midpoint_fails_integrality(self):
        """Test the closest-pair midpoint gives lambda 1, which fails for n=3"""
        report = measure_coefficients(parse_section("closest-pair-midpoint"), 3)

        assert report.collision_witness is None
        assert report.lambda_consistent
        assert report.lambda_value == 1
        assert report.delta_value == 0
        assert not report.identity_holds

    @pytest.mark.parametrize("name", ["centroid", "origin", "closest-pair-midpoint"])
    def test_every_shipped_candidate_fails_for_three_points(self, name):
        """Test every shipped candidate fails for three points"""
        report = measure_coefficients(parse_section(name), 3, seed=5)
        assert report.collision_witness is not None or not report.identity_holds

    def test_is_deterministic(self):
        """Test a seeded report is reproducible"""
        a = measure_coefficients(parse_section("closest-pair-midpoint"), 4, seed=2)
        b = measure_coefficients(parse_section("closest-pair-midpoint"), 4, seed=2)
        assert a.model_dump() == b.model_dump()
