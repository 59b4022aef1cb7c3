import json

import numpy as np
import pytest

from quadzip import (ArchiveError, ZipArchive, bergman_pullback_check, build_g_16, disc_domain,
                     pack, q_transform, unzip_g, unzip_gprime, unzip_h, unzip_H)
from quadzip.gustafsson import _isolation
from quadzip.zip import PrincipalPart, ZipError, compression_ratio, contour_coefficients


@pytest.fixture(scope="module")
def disc_archive(disc_map):
    return pack(disc_map)


def polynomial_archive(domain, coeffs, offset):
    return ZipArchive(((np.asarray(coeffs, dtype=complex), offset),), (), (),
                      {"domain": domain.to_json()})


def test_principal_part_requires_leading_coefficient():
    with pytest.raises(ZipError):
        PrincipalPart(0.1, (1.0, 0.0))
    P = PrincipalPart(0.1j, (2.0, 0.5))
    assert P.order == 2
    assert abs(P(np.array([1 + 0.1j]))[0] - 2.5) < 1e-15


def test_contour_reintegration():
    P = PrincipalPart(0.2 + 0.1j, (1.5 - 0.5j, 0.25j, -0.1))
    for rho in (0.05, 0.1):
        co = contour_coefficients(P, P.pole, rho, kmax=4)
        assert np.abs(co - np.array(P.p + (0,))).max() < 1e-8


def test_q_transform_centered_disc():
    img = disc_domain(0.8)
    z = np.array([0.1, -0.3j, 0.5 + 0.2j])
    assert np.abs(q_transform(img, z)).max() <= 1e-10


def test_q_transform_shifted_disc():
    c = 0.3 - 0.2j
    img = disc_domain(0.8, c)
    z = c + np.array([0.1, -0.3j, 0.5 + 0.2j])
    assert np.abs(q_transform(img, z) - np.conj(c)).max() <= 1e-10


def test_q_transform_holomorphic(annulus_archive):
    img = annulus_archive.image
    c, rho = 0.0 + 0.75j, 0.05
    e = rho * np.exp(2j * np.pi * np.arange(64) / 64)
    vals = q_transform(img, c + e)
    assert abs(np.mean(vals) - q_transform(img, np.array([c]))[0]) <= 1e-8


def test_disc_archive(disc_archive):
    (coeffs, offset), = disc_archive.g_coeffs
    assert abs(coeffs[offset + 1] - 1) < 1e-13
    assert np.abs(np.delete(coeffs, offset + 1)).max() < 1e-13
    (P,) = disc_archive.h_poles
    assert abs(P.pole) < 1e-13 and P.order == 1 and abs(P.p[0] - 1) < 1e-12


def test_disc_unzip(disc_archive):
    z = np.array([0.5, 0.2 + 0.3j, -0.6j])
    assert abs(unzip_h(disc_archive, np.array([0.5]))[0] - 2) <= 1e-10
    assert np.abs(unzip_h(disc_archive, z) - 1 / z).max() <= 1e-10
    assert np.abs(unzip_H(disc_archive, z) - 1 / z).max() <= 1e-10
    assert np.abs(unzip_gprime(disc_archive, z) - 1).max() <= 1e-10
    # h - Q is exactly the sum of the principal parts
    Q = q_transform(disc_archive.image, z)
    P = sum(p(z) for p in disc_archive.h_poles)
    assert np.abs(unzip_h(disc_archive, z) - Q - P).max() <= 1e-15


def test_shifted_disc_unzip():
    R, c = 0.8, 0.3 - 0.2j
    A = pack(build_g_16(disc_domain(R, c), c, 1e-8))
    z = c + np.array([0.4, 0.1 - 0.2j])
    assert np.abs(unzip_h(A, z) - (np.conj(c) + R ** 2 / (z - c))).max() <= 1e-10


def test_polynomial_gprime(disc):
    A = polynomial_archive(disc, [0, 0, 0, 1, 0.1], 2)          # g = z + 0.1 z^2
    assert abs(unzip_gprime(A, np.array([0.3]))[0] - 1.06) < 1e-13


def test_round_trip_bit_exact(annulus_archive):
    text = annulus_archive.dumps()
    again = ZipArchive.loads(text)
    assert again.dumps() == text
    for (c1, k1), (c2, k2) in zip(again.g_coeffs, annulus_archive.g_coeffs):
        assert k1 == k2 and np.array_equal(c1, c2)


def test_archive_layout(annulus_archive):
    doc = json.loads(annulus_archive.dumps())
    assert {"g_coeffs", "h_poles", "H_poles", "meta", "sha256"} <= set(doc)
    assert doc["meta"]["variant"] == "thm16" and doc["meta"]["n"] == 2
    assert all(set(p) == {"w", "p"} for p in doc["h_poles"])


def test_truncated_archive_rejected(annulus_archive):
    text = annulus_archive.dumps()
    with pytest.raises(ArchiveError):
        ZipArchive.loads(text[: len(text) // 2])


def test_tampered_archive_rejected(annulus_archive):
    doc = json.loads(annulus_archive.dumps())
    doc["h_poles"][0]["p"][0][0] += 1e-12
    with pytest.raises(ArchiveError, match="checksum"):
        ZipArchive.loads(json.dumps(doc))


def test_compression_ratio(annulus_archive):
    assert compression_ratio(annulus_archive, 512) > 100


def test_annulus_unzip_H(annulus_map, annulus_archive, interior_annulus_points):
    z = interior_annulus_points
    assert np.abs(unzip_H(annulus_archive, z) - annulus_map.H_refl(z)).max() <= 1e-6


def test_annulus_unzip_h(annulus_map, annulus_archive, interior_annulus_points):
    z = interior_annulus_points
    h = unzip_h(annulus_archive, annulus_map(z))
    assert np.abs(h - annulus_map.H_refl(z)).max() <= 1e-6


def test_annulus_gprime(annulus_map, annulus_archive, interior_annulus_points):
    z = interior_annulus_points
    assert np.abs(unzip_gprime(annulus_archive, z) - annulus_map.derivative(z)).max() <= 1e-8
    assert np.abs(unzip_g(annulus_archive, z) - annulus_map.direct(z)).max() <= 1e-8


def test_boundary_target_rejected(annulus_map):
    from quadzip.quadrature import QuadratureError
    with pytest.raises(QuadratureError):
        annulus_map(annulus_map.domain.z[0, :3])


def test_h_boundary_limit(annulus_map, annulus_archive):
    d = annulus_map.domain
    k = np.arange(0, d.N, 16)
    zb = d.z[:, k].ravel()
    inward = 1j * d.samples().tangent[:, k].ravel()
    z = zb + 0.01 * inward
    h = unzip_h(annulus_archive, annulus_map(z))
    target = np.conj(annulus_map.g_trace.values[:, k].ravel())
    assert np.abs(h - target).max() < 0.05


def test_H_boundary_limit(annulus_map, annulus_archive):
    from quadzip.quadrature import cauchy_boundary_limit
    Hb = cauchy_boundary_limit(annulus_archive.g_boundary.conj())
    for P in annulus_archive.H_poles:
        Hb = Hb + P(annulus_map.domain.z)
    assert np.abs(Hb - np.conj(annulus_map.g_trace.values)).max() <= 1e-8


def test_archived_parts_radius_independent(annulus_map):
    g = annulus_map
    for p in g.poles[:6]:
        rho = 0.3 * _isolation(g.domain, p, g.poles)
        a = contour_coefficients(g.H_refl, p, rho, 3)
        b = contour_coefficients(g.H_refl, p, rho / 2, 3)
        assert np.abs(a - b).max() <= 1e-8


def test_pullback_identity_map(disc_archive):
    pairs = [(0.1, 0.3j), (-0.4, 0.2 + 0.2j)]
    assert bergman_pullback_check(disc_archive, pairs) <= 1e-8


def test_pullback_polynomial_map(disc):
    A = polynomial_archive(disc, [0, 0, 0, 1, 0.1], 2)
    pairs = [(0.1, 0.3j), (-0.4, 0.2 + 0.2j), (0.5, 0.5)]
    assert bergman_pullback_check(A, pairs) <= 1e-6


def test_pullback_annulus(annulus_archive, interior_annulus_points):
    z = interior_annulus_points
    pairs = np.stack([z[:5], np.r_[z[:2], z[7:10]]], axis=1)
    assert bergman_pullback_check(annulus_archive, pairs) <= 1e-5
