import numpy as np
import pytest

from vardecomp import wavelet as wl

from oracles import rms


def coeff_energy(pyr):
    total = float(np.sum(pyr.approx**2))
    for triple in pyr.details:
        total += sum(float(np.sum(band**2)) for band in triple)
    return total


def test_filter_is_orthonormal():
    wav = wl.daubechies4()
    h = wav.lo
    assert np.sum(h) == pytest.approx(np.sqrt(2.0), abs=1e-12)
    assert np.sum(h * h) == pytest.approx(1.0, abs=1e-12)
    # even-shift self-orthogonality
    for k in (1, 2, 3):
        assert abs(np.sum(h[2 * k :] * h[: -2 * k])) < 1e-12


def test_bad_filter_rejected():
    with pytest.raises(ValueError):
        wl.WaveletFilter("broken", (0.9, 0.1, 0.3))


def test_forward_zero_image():
    pyr = wl.dwt2_forward(np.zeros((32, 32)), 3)
    assert not pyr.approx.any()
    assert not any(band.any() for triple in pyr.details for band in triple)


def test_perfect_reconstruction_on_impulse():
    f = np.zeros((32, 32))
    f[13, 7] = 1.0
    assert rms(wl.dwt2_inverse(wl.dwt2_forward(f, 3)), f) < 1e-10


@pytest.mark.parametrize("size", [32, 64, 128])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_perfect_reconstruction_and_parseval(size, seed):
    rng = np.random.default_rng(seed)
    f = rng.standard_normal((size, size)) * 50
    pyr = wl.dwt2_forward(f, 3)
    assert rms(wl.dwt2_inverse(pyr), f) < 1e-8
    energy = float(np.sum(f * f))
    assert coeff_energy(pyr) == pytest.approx(energy, rel=1e-8)


def test_nonsquare_and_padded_sizes_roundtrip():
    rng = np.random.default_rng(3)
    for shape in ((48, 80), (50, 42), (33, 65)):
        f = rng.standard_normal(shape)
        pyr = wl.dwt2_forward(f, 2)
        assert rms(wl.dwt2_inverse(pyr), f) < 1e-10


def test_levels_too_deep_rejected():
    with pytest.raises(ValueError):
        wl.dwt2_forward(np.zeros((16, 16)), 5)
    with pytest.raises(ValueError):
        wl.dwt2_forward(np.zeros((16, 16)), 0)


def test_wst_zero_threshold_is_identity():
    rng = np.random.default_rng(4)
    f = rng.standard_normal((64, 64)) * 30
    assert rms(wl.wst(f, 0.0), f) < 1e-8


def test_wst_huge_threshold_keeps_only_approx():
    rng = np.random.default_rng(5)
    f = rng.standard_normal((64, 64)) * 30
    pyr = wl.dwt2_forward(f, 3)
    pyr.details = [tuple(np.zeros_like(b) for b in t) for t in pyr.details]
    approx_only = wl.dwt2_inverse(pyr)
    assert rms(wl.wst(f, 1e9), approx_only) < 1e-10


def test_soft_threshold_minimizes_penalized_distance():
    rng = np.random.default_rng(6)
    for _ in range(100):
        c = float(rng.uniform(-30, 30))
        t = float(rng.uniform(0, 10))
        grid = np.linspace(-35, 35, 10_001)
        scores = (c - grid) ** 2 + 2 * t * np.abs(grid)
        best = grid[np.argmin(scores)]
        ours = float(wl.soft_threshold(np.array([c]), t)[0])
        assert abs(ours - best) <= (grid[1] - grid[0])


def test_soft_threshold_monotone_in_threshold():
    rng = np.random.default_rng(7)
    c = rng.standard_normal(1000) * 20
    s1 = np.abs(wl.soft_threshold(c, 2.0))
    s2 = np.abs(wl.soft_threshold(c, 5.0))
    assert np.all(s2 <= s1 + 1e-15)


def test_wst_is_nonexpansive():
    rng = np.random.default_rng(8)
    for _ in range(10):
        f = rng.standard_normal((32, 32)) * 25
        g = rng.standard_normal((32, 32)) * 25
        lhs = np.linalg.norm(wl.wst(f, 7.0) - wl.wst(g, 7.0))
        assert lhs <= np.linalg.norm(f - g) * (1 + 1e-10)


def test_project_e_zero_mu_and_identity_split():
    rng = np.random.default_rng(9)
    f = rng.standard_normal((32, 32)) * 40
    assert rms(wl.project_e(f, 0.0)) < 1e-8
    # defining identity, bit-exact as implemented
    assert np.array_equal(wl.project_e(f, 3.0), f - wl.wst(f, 6.0))
    assert np.allclose(wl.project_e(f, 3.0) + wl.wst(f, 6.0), f, atol=1e-12)


def test_project_e_detail_coefficients_clamped():
    rng = np.random.default_rng(10)
    f = rng.standard_normal((64, 64)) * 60
    mu = 4.0
    out = wl.project_e(f, mu, levels=3)
    pyr = wl.dwt2_forward(out, 3)
    worst = max(float(np.max(np.abs(b))) for t in pyr.details for b in t)
    assert worst <= 2 * mu + 1e-8


def test_besov_norm_zero_and_homogeneity():
    assert wl.besov_norm(np.zeros((32, 32)), -1.0, np.inf, np.inf) == 0.0
    rng = np.random.default_rng(11)
    f = rng.standard_normal((32, 32)) * 20
    for s, p, q in ((-1.0, np.inf, np.inf), (0.5, 2.0, 2.0), (1.0, 1.0, 3.0)):
        base = wl.besov_norm(f, s, p, q)
        scaled = wl.besov_norm(2.5 * f, s, p, q)
        assert scaled == pytest.approx(2.5 * base, rel=1e-10)
        hom = wl.besov_norm(f, s, p, q, homogeneous=True)
        assert hom <= base


def test_besov_norm_against_direct_summation():
    rng = np.random.default_rng(12)
    f = rng.standard_normal((64, 64)) * 15
    levels = 3
    pyr = wl.dwt2_forward(f, levels)
    for s, p, q in ((0.0, 2.0, 2.0), (-1.0, np.inf, np.inf), (0.3, 1.5, 2.5)):
        # independent re-summation, scalar loops only
        terms = []
        for j, triple in enumerate(pyr.details):
            coeffs = [abs(x) * 2.0 ** (j / 2.0) for band in triple for x in band.ravel()]
            if np.isinf(p):
                inner = max(coeffs)
                weight = 2.0 ** (j * (1.0 + s))
            else:
                inner = sum(c**p for c in coeffs) ** (1.0 / p)
                weight = 2.0 ** (j * (1.0 - 1.0 / p + s))
            terms.append(weight * inner)
        if np.isinf(q):
            detail_part = max(terms)
        else:
            detail_part = sum(t**q for t in terms) ** (1.0 / q)
        if np.isinf(p):
            approx_part = float(np.max(np.abs(pyr.approx)))
        else:
            approx_part = float(np.sum(np.abs(pyr.approx) ** p) ** (1.0 / p))
        expected = approx_part + detail_part
        assert wl.besov_norm(f, s, p, q, levels) == pytest.approx(expected, rel=1e-10)


def test_besov_norm_rejects_bad_exponents():
    f = np.zeros((16, 16))
    with pytest.raises(ValueError):
        wl.besov_norm(f, 0.0, 0.0, 2.0)
    with pytest.raises(ValueError):
        wl.besov_norm(f, 0.0, 2.0, -1.0)
