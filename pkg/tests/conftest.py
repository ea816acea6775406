import numpy as np
import pytest

from multipat import cli, fileio

# Reconstruction study configuration shared by the acceptance criteria and
# the CLI tests: 10 optimized half-wave dipole references, 100 candidate
# 10x10 chambers, test orientation (pi/4, pi/3).
PAPER_CONFIG = {
    "wavelength": 1.0,
    "mode_set": {"lambda_max": 3, "parity": "odd", "multipole": "electric"},
    "references": {
        "length": 0.5,
        "current": 1.0,
        "count": 10,
        "optimize": {"objective": "cond-A", "budget": 1500},
    },
    "chamber": {
        "n_probes": 10,
        "n_paths": 10,
        "sigma_rho": 0.001,
        "seeds": list(range(100)),
    },
    "test_antenna": {
        "length": 0.5,
        "theta0": np.pi / 4,
        "phi0": np.pi / 3,
        "current": 1.0,
    },
    "reconstruction": {"method": "inverse", "normalization": None},
}


@pytest.fixture(scope="session")
def paper_config():
    return fileio.parse_config(PAPER_CONFIG)


@pytest.fixture(scope="session")
def paper_setup(paper_config):
    return cli.build_setup(paper_config)
