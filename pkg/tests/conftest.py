import numpy as np
import pytest

from symtrack.image import Point
from symtrack.synth import ParticleSpec, render_particle


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


@pytest.fixture
def spot_frame():
    """Noise-free bead-like spot at an exact integer center."""
    spec = ParticleSpec(radius=12, true_center=Point(64.0, 64.0), pattern="spot", background=0.5)
    return render_particle(spec, 128), spec
