import math

import numpy as np
import pytest
from pydantic import ValidationError

from app.models.schemas import (Configuration, HomotopyPhase, HomotopyTrace,
                                LoopSample, PointMapDescriptor, PointMapKind,
                                SectionDescriptor, SectionKind)


class TestConfiguration:
    def test_valid_configuration(self):
        """Test a valid configuration builds"""
        c = Configuration(dim=2, points=((0.0, 0.0), (0.5, 0.5)))
        assert c.n == 2
        assert c.as_array().shape == (2, 2)

    def test_boundary_points_are_allowed(self):
        """Test points on the unit sphere are inside"""
        c = Configuration(dim=2, points=((1.0, 0.0), (-1.0, 0.0)))
        assert c.n == 2

    def test_rejects_point_outside_ball(self):
        """Test a point outside the ball is rejected"""
        with pytest.raises(ValidationError):
            Configuration(dim=2, points=((0.0, 0.0), (1.0, 0.1)))

    def test_rejects_coincident_points(self):
        """Test coincident points are rejected"""
        with pytest.raises(ValidationError):
            Configuration(dim=2, points=((0.2, 0.0), (0.2, 0.0)))

    def test_rejects_wrong_dimension(self):
        """Test points must match dim"""
        with pytest.raises(ValidationError):
            Configuration(dim=3, points=((0.0, 0.0, 0.0), (0.5, 0.0)))

    def test_rejects_non_finite(self):
        """Test NaN coordinates are rejected"""
        with pytest.raises(ValidationError):
            Configuration(dim=2, points=((math.nan, 0.0),))

    def test_from_array_round_trips_exactly(self):
        """Test array conversion keeps every bit"""
        arr = np.array([[0.1, -0.3], [0.7, 0.2]])
        c = Configuration.from_array(arr)
        assert np.array_equal(c.as_array(), arr)

    def test_json_round_trip(self):
        """Test JSON conversion keeps every bit"""
        c = Configuration(dim=2, points=((0.1, 0.2), (-0.3, 0.4)))
        assert Configuration.model_validate_json(c.model_dump_json()) == c


class TestSectionDescriptor:
    def test_labels(self):
        """Test section labels match the CLI forms"""
        assert SectionDescriptor(kind=SectionKind.MIDPOINT).label == "midpoint"
        assert (
            SectionDescriptor(kind=SectionKind.ADD_NEAR, i=1, j=3).label
            == "add-near:1,3"
        )
        assert (
            SectionDescriptor(kind=SectionKind.BIASED_INTERPOLATION, alpha=0.25).label
            == "biased:0.25"
        )

    def test_add_near_requires_distinct_indices(self):
        """Test add-near needs i != j"""
        with pytest.raises(ValidationError):
            SectionDescriptor(kind=SectionKind.ADD_NEAR, i=2, j=2)

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1, None])
    def test_biased_alpha_in_open_interval(self, alpha):
        """Test alpha must lie strictly inside (0, 1)"""
        with pytest.raises(ValidationError):
            SectionDescriptor(kind=SectionKind.BIASED_INTERPOLATION, alpha=alpha)

    def test_registered_requires_name(self):
        """Test a registered section needs a name"""
        with pytest.raises(ValidationError):
            SectionDescriptor(kind=SectionKind.USER_REGISTERED)


class TestPointMapDescriptor:
    def test_constant_must_lie_in_ball(self):
        """Test a constant map's point must lie in the ball"""
        with pytest.raises(ValidationError):
            PointMapDescriptor(kind=PointMapKind.CONSTANT, q=(1.5, 0.0))

    def test_contraction_alpha_range(self):
        """Test contraction alpha must lie in [0, 1)"""
        with pytest.raises(ValidationError):
            PointMapDescriptor(kind=PointMapKind.CONTRACTION, alpha=1.0, q=(0.0, 0.0))

    def test_labels(self):
        """Test point map labels match the CLI forms"""
        f = PointMapDescriptor(kind=PointMapKind.CONTRACTION, alpha=0.5, q=(0.6, 0.0))
        assert f.label == "contraction:0.5,0.6,0.0"
        assert PointMapDescriptor(kind=PointMapKind.CENTROID).label == "centroid"


class TestLoopSample:
    @pytest.fixture
    def frames(self):
        return [
            Configuration(dim=2, points=((0.0, 0.0), (0.1, 0.0))),
            Configuration(dim=2, points=((0.0, 0.0), (0.0, 0.1))),
            Configuration(dim=2, points=((0.0, 0.0), (0.1, 0.0))),
        ]

    def test_closed_loop(self, frames):
        """Test a loop whose ends agree builds"""
        loop = LoopSample(configs=frames)
        assert loop.n == 2
        assert loop.slot(1) == 0

    def test_sectioned_labels_match_slots(self, frames):
        """Test sectioned loops keep p_0 in slot 0"""
        assert LoopSample(configs=frames, sectioned=True).slot(1) == 1

    def test_rejects_open_loop(self, frames):
        """Test a loop whose ends differ is rejected"""
        with pytest.raises(ValidationError):
            LoopSample(configs=frames[:2])

    def test_rejects_non_planar(self):
        """Test loops must be planar"""
        c = Configuration(dim=1, points=((0.0,), (0.5,)))
        with pytest.raises(ValidationError):
            LoopSample(configs=[c, c])


def test_homotopy_trace_lengths_must_agree():
    """Test a trace with mismatched lengths is rejected"""
    c = Configuration(dim=1, points=((0.0,), (-0.5,), (0.5,)))
    with pytest.raises(ValidationError):
        HomotopyTrace(
            section="midpoint",
            grid=[0.0, 1.0],
            frames=[c],
            phase=[HomotopyPhase.SCALING],
        )
