import math

import numpy as np
import pytest

from fcs_lab.matcore import DensityMatrix

SQ2 = math.sqrt(2.0)
BELL = np.array([1.0, 0.0, 0.0, 1.0]) / SQ2


def ex1_omegas(phi):
    """Hand-entered 2x2 blocks of the three-site ex1 state."""
    c, s = math.cos(phi), math.sin(phi)
    o11 = np.array([[c * c, 2 * c * c * s * s], [2 * c * c * s * s, s * s]])
    o22 = np.array([[s * s, 2 * c * c * s * s], [2 * c * c * s * s, c * c]])
    o12 = np.array([[c * s, 2 * c**3 * s], [2 * c * s**3, c * s]])
    return o11, o12, o12.conj().T, o22


def ex1_rho_ab_closed(phi):
    c, s = math.cos(phi), math.sin(phi)
    return 0.5 * np.array(
        [
            [c * c, c * s, 2 * c * c * s * s, 2 * c**3 * s],
            [c * s, s * s, 2 * c * s**3, 2 * c * c * s * s],
            [2 * c * c * s * s, 2 * c * s**3, s * s, c * s],
            [2 * c**3 * s, 2 * s * s * c * c, c * s, c * c],
        ]
    )


def ex1_rho12_closed(phi):
    c, s = math.cos(phi), math.sin(phi)
    return 0.5 * np.array(
        [
            [c * c, 2 * c * c * s * s, 2 * c * c * s * s, 4 * c**4 * s * s],
            [2 * c * c * s * s, s * s, 4 * c * c * s**4, 2 * c * c * s * s],
            [2 * c * c * s * s, 4 * c * c * s**4, s * s, 2 * c * c * s * s],
            [4 * c**4 * s * s, 2 * s * s * c * c, 2 * c * c * s * s, c * c],
        ]
    )


def ex3_rho_ab_closed(a, phi):
    c, s = math.cos(phi), math.sin(phi)
    r = math.sqrt(1 - a * a)
    m = np.array(
        [
            [a * a / r, 0, a * c, 0],
            [0, a * a / r, a * s, 0],
            [a * c, a * s, r, 0],
            [0, 0, 0, 0],
        ]
    )
    return r / (1 + a * a) * m


def random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(rng, n, rank=None):
    rank = rank or n
    g = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


@pytest.fixture
def rng():
    return np.random.default_rng(20061016)


@pytest.fixture
def bell():
    return DensityMatrix(np.outer(BELL, BELL), (2, 2))
