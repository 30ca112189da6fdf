import math
import sys

import numpy as np
import pytest

from polycond.polycore import HomogeneousPoly, PolySystem
from polycond.randsys import EnsembleSpec, sample_system


def poly(n, d, terms):
    return HomogeneousPoly.from_terms(n, d, terms)


def system(*polys):
    return PolySystem(tuple(polys))


def unit_rows(rng, k, n):
    X = rng.standard_normal((k, n))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def random_orthogonal(rng, n):
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def gaussian_system(n, degrees, index=0, seed=0):
    return sample_system(EnsembleSpec.gaussian(n, degrees, seed=seed), index)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def linear_x1():
    """P = (x1) in two variables: kappa is identically 1."""
    return system(poly(2, 1, {(1, 0): 1.0}))


@pytest.fixture
def saddle():
    """P = (x1^2 - x2^2): sup |P| = 1, kappa = sqrt 2."""
    return system(poly(2, 2, {(2, 0): 1.0, (0, 2): -1.0}))


SQRT2 = math.sqrt(2.0)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
