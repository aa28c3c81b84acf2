import math

import numpy as np
import pytest

from app.core.exceptions import (NearZeroVectorError, NonIntegralError,
                                 UndersampledError)
from app.utils.winding import signed_step_angles, winding_number


def circle(samples: int, turns: int = 1) -> np.ndarray:
    """Closed sequence of unit vectors, last equal to first"""
    angles = 2 * math.pi * turns * np.arange(samples + 1) / samples
    return np.column_stack([np.cos(angles), np.sin(angles)])


@pytest.mark.parametrize("samples", [64, 256])
def test_unit_circle_winds_once(samples):
    """Test one counterclockwise turn"""
    assert winding_number(circle(samples)) == 1


@pytest.mark.parametrize("samples", [64, 256])
def test_reversed_circle_winds_negatively(samples):
    """Test one clockwise turn"""
    assert winding_number(circle(samples)[::-1]) == -1


def test_two_turns():
    """Test two concatenated turns"""
    assert winding_number(circle(128, turns=2)) == 2


def test_constant_vector_does_not_wind():
    """Test a constant vector never turns"""
    assert winding_number(np.tile([[0.3, -0.2]], (10, 1))) == 0


def test_refinement_does_not_change_result():
    """Test finer sampling gives the same count"""
    assert winding_number(circle(64)) == winding_number(circle(128))


def test_step_angles_are_signed():
    """Test step angles carry their sign"""
    steps = signed_step_angles(np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]]))
    assert steps[0] == pytest.approx(math.pi / 2)
    assert steps[1] == pytest.approx(-math.pi / 2)


class TestWindingErrors:
    def test_near_zero_vector_reports_step(self):
        """Test a vanishing vector reports its step"""
        vs = circle(64)
        vs[10] = [1e-12, 0.0]
        with pytest.raises(NearZeroVectorError) as exc:
            winding_number(vs)
        assert exc.value.step == 10

    def test_undersampled_loop(self):
        """Three samples per turn step by 2*pi/3"""
        with pytest.raises(UndersampledError):
            winding_number(circle(3))

    def test_open_arc_is_not_integral(self):
        """An arc of 1.2 rad that does not return to its start"""
        angles = np.linspace(0.0, 1.2, 5)
        arc = np.column_stack([np.cos(angles), np.sin(angles)])
        with pytest.raises(NonIntegralError):
            winding_number(arc)

    def test_closed_sequence_has_no_wrap_step(self):
        """Steps are counted between consecutive vectors only"""
        assert len(signed_step_angles(circle(16))) == 16

    def test_rejects_non_planar_input(self):
        """Test only planar vectors are accepted"""
        with pytest.raises(ValueError):
            winding_number(np.zeros((4, 3)) + 1.0)
