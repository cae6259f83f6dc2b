"""Shared fixtures.

Thread caps are set before numpy loads its BLAS so timing-sensitive tests
measure single-threaded behaviour, matching the performance contracts.
"""

import os

for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS",
             "NUMEXPR_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import numpy as np
import pytest

from palmshield.imaging import SynthSpec, synth_palm, write_synth_dataset


@pytest.fixture
def rng():
    return np.random.default_rng(0xA11CE)


@pytest.fixture(scope="session")
def palm_image():
    """One default-size synthetic palm (144x144 uint8)."""
    return synth_palm(SynthSpec(), 0, 0)


@pytest.fixture(scope="session")
def small_spec():
    """Tiny corpus spec used where full-size images would be wasteful."""
    return SynthSpec(identities=3, samples_per_identity=2, width=48, height=48,
                     line_count=10, texture_bumps=8, dot_count=8)


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory, small_spec):
    """3 identities x 2 samples of 48x48 images, written once per session."""
    root = tmp_path_factory.mktemp("corpus") / "palms"
    write_synth_dataset(root, small_spec)
    return root
