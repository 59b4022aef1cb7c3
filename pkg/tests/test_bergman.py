import numpy as np
import pytest

from quadzip import (annulus_oracle, bergman_coefficients, bergman_eval, disc_oracle,
                     reproducing_check)
from quadzip.bergman import interior_sample


@pytest.fixture(scope="module")
def K_disc(disc):
    return bergman_coefficients(disc)


@pytest.fixture(scope="module")
def K_ann(annulus):
    return bergman_coefficients(annulus)


def test_disc_kernel(K_disc):
    assert K_disc.coefficients.shape == (0, 0)
    assert abs(bergman_eval(K_disc, np.array([0.0]), 0.0)[0] - 1 / np.pi) < 1e-13
    o = disc_oracle()
    z = np.array([0.3 + 0.2j, -0.5, 0.1j])
    assert np.abs(bergman_eval(K_disc, z, 0.4 - 0.3j) - o.K(z, 0.4 - 0.3j)).max() < 1e-12


def test_annulus_against_series(annulus, K_ann):
    o = annulus_oracle(0.5, terms=200)
    rng = np.random.default_rng(4)
    z = interior_sample(annulus, 10, rng)
    w = interior_sample(annulus, 10, rng)
    for zi, wi in zip(z, w):
        assert abs(bergman_eval(K_ann, np.array([zi]), wi)[0] - o.K(zi, wi)) < 1e-6
    assert abs(bergman_eval(K_ann, np.array([0.7]), 0.7)[0] - o.K(0.7, 0.7)) < 1e-6


def test_hermitian_swap(K_ann):
    k1 = bergman_eval(K_ann, np.array([0.6]), -0.7j)[0]
    k2 = bergman_eval(K_ann, np.array([-0.7j]), 0.6)[0]
    assert abs(k1 - np.conj(k2)) < 1e-8


def test_three_connected_hermitian(blob3):
    K = bergman_coefficients(blob3)
    A = K.coefficients
    assert A.shape == (2, 2)
    assert np.abs(A - A.conj().T).max() <= 1e-6 * max(1.0, np.abs(A).max())
    z, w = interior_sample(blob3, 2, np.random.default_rng(9))
    k1 = bergman_eval(K, np.array([z]), w)[0]
    k2 = bergman_eval(K, np.array([w]), z)[0]
    assert abs(k1 - np.conj(k2)) < 1e-8


def test_memo_one_solve_per_point(K_ann):
    tr1 = K_ann.szego_trace(0.65 + 0.1j)
    tr2 = K_ann.szego_trace(0.65 + 0.1j)
    assert tr1 is tr2


def test_reproducing_disc_constant(K_disc):
    assert reproducing_check(K_disc, lambda z: np.ones_like(z), 0.0) <= 1e-3


def test_reproducing_disc_cube(K_disc):
    assert reproducing_check(K_disc, lambda z: z ** 3, 0.5) <= 1e-3


def test_reproducing_annulus_square(K_ann):
    assert reproducing_check(K_ann, lambda z: z ** 2, 0.7) <= 1e-3
