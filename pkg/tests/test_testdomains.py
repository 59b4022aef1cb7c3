import numpy as np
import pytest

from quadzip import annulus_oracle, blob_domain, disc_oracle
from quadzip.geometry import DomainError
from quadzip.testdomains import OracleError


def test_disc_bergman_at_center():
    assert abs(disc_oracle(1, 0).K(0, 0) - 1 / np.pi) < 1e-15


def test_annulus_fprime_closed_form():
    assert abs(annulus_oracle(0.5).F_prime(0.7) - 1 / (0.7 * np.log(0.5))) < 1e-15


def test_annulus_tail_bound():
    # the |n| <= 60 tail is below 1e-15 while |z conj(w)| stays in [0.45, 0.55]
    o = annulus_oracle(0.5, terms=60)
    rng = np.random.default_rng(0)
    x = rng.uniform(0.45, 0.55, 50)
    rz = rng.uniform(np.maximum(0.5, x), 1.0)
    z = rz * np.exp(2j * np.pi * rng.uniform(size=50))
    w = (x / rz) * np.exp(2j * np.pi * rng.uniform(size=50))
    assert np.all((np.abs(w) >= 0.45) & (np.abs(w) <= 1.0))
    assert o.tail_bound(z, w) < 1e-15
    # boundary points against an interior base point need more terms
    zb = np.r_[np.exp(1j * np.arange(8)), 0.5 * np.exp(1j * np.arange(8))]
    assert o.tail_bound(zb, 0.7) > 1e-12
    assert annulus_oracle(0.5, terms=200).tail_bound(zb, 0.7) < 1e-15


def test_truncation_insufficient():
    with pytest.raises(OracleError):
        annulus_oracle(0.5, terms=5).check(1e-12, 0.99, 0.99)


def test_bad_parameters():
    with pytest.raises(OracleError):
        annulus_oracle(1.5)
    with pytest.raises(OracleError):
        disc_oracle(-1.0)


def test_annulus_oracle_identities():
    """(1/i) L T = conj(S) on both circles, and f_a = S / L."""
    o = annulus_oracle(0.5, terms=200)
    t = np.linspace(0, 2 * np.pi, 37)
    a = 0.7
    for z, T in ((np.exp(1j * t), 1j * np.exp(1j * t)), (0.5 * np.exp(1j * t), -1j * np.exp(1j * t))):
        assert np.abs(o.L(z, a) * T / 1j - np.conj(o.S(z, a))).max() < 1e-12
        assert np.abs(np.abs(o.ahlfors(z, a)) - 1).max() < 1e-12


def test_disc_oracle_identities():
    o = disc_oracle(1, 0)
    z = np.exp(1j * np.linspace(0, 2 * np.pi, 17))
    a = 0.3 - 0.2j
    assert np.abs(o.L(z, a) * 1j * z / 1j - np.conj(o.S(z, a))).max() < 1e-12
    assert np.abs(o.ahlfors(z, a) - o.S(z, a) / o.L(z, a)).max() < 1e-12


def test_blobs():
    assert blob_domain(2, 1).n == 2
    assert blob_domain(3, 7).n == 3


def test_blob_validation_failure():
    with pytest.raises(DomainError):
        blob_domain(3, 7, amp=0.5, retries=3)
