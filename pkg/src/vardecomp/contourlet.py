"""Multiscale directional transform: pyramid stage plus directional bank.

The multiscale stage is a Laplacian pyramid built from the 9/7
biorthogonal lowpass pair with periodic extension.  The filters carry a
sqrt(2) factor per axis (unit-norm polyphase rows), so bandpass
coefficients of coherent features grow with scale exactly as orthonormal
wavelet details do, while white noise keeps a flat per-level standard
deviation; shrinkage thresholds therefore act on the same scale as in
the wavelet operator.  Reconstruction adds back what the decomposition
subtracted, so the round trip is exact by construction.

The directional stage splits each bandpass image into ``2**depth``
orientation subbands with smooth angular frequency windows (each wedge
paired with its antipode, so subbands stay real).  Adjacent windows
crossfade so that their squares sum to one at every frequency bin: the
bank is a Parseval frame, subband energies add up exactly to the band
energy, and applying the windows again and summing reconstructs the
band exactly.  The smooth transitions keep the equivalent spatial
filters well localized.  Wedge centers sit on the axis and diagonal
orientations.

The cascade of the two stages, its soft-thresholding operator ``cst``,
and a directional smoothness norm complete the module.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .wavelet import _check_levels, _lp, _pad_to_multiple, _scale_norm, soft_threshold

_SQRT2 = np.sqrt(2.0)

# 9/7 biorthogonal lowpass pair, DC gain 1, then scaled by sqrt(2) per axis.
_LP_REDUCE = _SQRT2 * np.array(
    [
        0.026748757410810,
        -0.016864118442875,
        -0.078223266528990,
        0.266864118442875,
        0.602949018236360,
        0.266864118442875,
        -0.078223266528990,
        -0.016864118442875,
        0.026748757410810,
    ]
)
_LP_EXPAND = _SQRT2 * np.array(
    [
        -0.045635881557125,
        -0.028771763114250,
        0.295635881557125,
        0.557543526228500,
        0.295635881557125,
        -0.028771763114250,
        -0.045635881557125,
    ]
)


def _filter_axis(x: np.ndarray, h: np.ndarray, axis: int) -> np.ndarray:
    """Centered circular correlation along one axis."""
    c = h.size // 2
    out = np.zeros_like(x)
    for m, hm in enumerate(h):
        out += hm * np.roll(x, c - m, axis=axis)
    return out


def _reduce(x: np.ndarray) -> np.ndarray:
    """Lowpass filter both axes and keep the even-indexed samples."""
    return _filter_axis(_filter_axis(x, _LP_REDUCE, 0), _LP_REDUCE, 1)[::2, ::2]


def _expand(c: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Zero-stuff to ``shape`` and lowpass filter both axes."""
    up = np.zeros(shape, dtype=c.dtype)
    up[::2, ::2] = c
    return _filter_axis(_filter_axis(up, _LP_EXPAND, 0), _LP_EXPAND, 1)


@dataclass
class LaplacianPyramid:
    """Bandpass residuals (finest first) plus the coarse approximation."""

    levels: int
    bands: list[np.ndarray]
    approx: np.ndarray
    orig_shape: tuple[int, int]


def lp_decompose(f: np.ndarray, levels: int) -> LaplacianPyramid:
    """Redundant pyramid: each band is its level minus the expanded coarser one."""
    f = np.asarray(f, dtype=np.float64)
    _check_levels(f.shape, levels)
    work = _pad_to_multiple(f, 2**levels)
    bands = []
    for _ in range(levels):
        coarse = _reduce(work)
        bands.append(work - _expand(coarse, work.shape))
        work = coarse
    return LaplacianPyramid(levels, bands, work, f.shape)


def lp_reconstruct(pyr: LaplacianPyramid) -> np.ndarray:
    work = pyr.approx
    for band in reversed(pyr.bands):
        work = band + _expand(work, band.shape)
    m, n = pyr.orig_shape
    return work[:m, :n]


# ---------------------------------------------------------------------------
# Directional bank
# ---------------------------------------------------------------------------


def _crossfade(t: np.ndarray) -> np.ndarray:
    """Smooth ramp on [0, 1] with nu(t) + nu(1-t) = 1 and flat C3 ends."""
    t = np.clip(t, 0.0, 1.0)
    return t**4 * (35.0 - 84.0 * t + 70.0 * t**2 - 20.0 * t**3)


@lru_cache(maxsize=32)
def _directional_windows(shape: tuple[int, int], n_dirs: int) -> tuple[np.ndarray, ...]:
    """Smooth angular windows whose squares sum to one at every DFT bin.

    Window ``k`` is centered at orientation ``-pi/2 + k*pi/n_dirs``
    (modulo a half turn); adjacent windows crossfade over half a wedge.
    The windows are symmetrized under frequency negation so each keeps
    real inputs real, and renormalized so the power complement is exact.
    """
    m, n = shape
    fm = np.fft.fftfreq(m).reshape(-1, 1)
    fn = np.fft.fftfreq(n).reshape(1, -1)
    theta = np.arctan2(fm, fn)
    rows = np.arange(m).reshape(-1, 1)
    cols = np.arange(n).reshape(1, -1)
    conj_r = (-rows) % m
    conj_c = (-cols) % n
    canonical = (rows < conj_r) | ((rows == conj_r) & (cols <= conj_c))
    spacing = np.pi / n_dirs
    trans = spacing / 4.0
    windows = []
    for k in range(n_dirs):
        center = -np.pi / 2.0 + k * spacing
        dist = np.abs((theta - center + np.pi / 2.0) % np.pi - np.pi / 2.0)
        ramp = _crossfade((dist - (spacing / 2.0 - trans)) / (2.0 * trans))
        w = np.cos(0.5 * np.pi * ramp)
        windows.append(np.where(canonical, w, w[conj_r, conj_c]))
    total = np.sqrt(sum(w * w for w in windows))
    out = tuple(w / total for w in windows)
    for w in out:
        w.setflags(write=False)
    return out


def dfb_decompose(band: np.ndarray, depth: int) -> list[np.ndarray]:
    """Split a band into ``2**depth`` orientation subbands (``depth=0``: identity).

    Subbands are scaled by ``sqrt(2**depth)`` so the equivalent analysis
    atoms have unit norm: white noise of deviation ``sigma`` then shows
    deviation ``sigma`` in every subband, and one threshold acts
    uniformly across orientations.
    """
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    band = np.asarray(band, dtype=np.float64)
    if depth == 0:
        return [band.copy()]
    gain = np.sqrt(2.0**depth)
    spectrum = np.fft.fft2(band)
    windows = _directional_windows(band.shape, 2**depth)
    return [gain * np.fft.ifft2(w * spectrum).real for w in windows]


def dfb_reconstruct(subbands: list[np.ndarray]) -> np.ndarray:
    """Exact inverse of :func:`dfb_decompose` (unscale, window, sum, invert)."""
    if not subbands:
        raise ValueError("no subbands to reconstruct from")
    if len(subbands) == 1:
        return subbands[0].copy()
    shape = subbands[0].shape
    for sb in subbands:
        if sb.shape != shape:
            raise ValueError("subbands differ in shape")
    windows = _directional_windows(shape, len(subbands))
    acc = np.zeros(shape, dtype=complex)
    for w, sb in zip(windows, subbands):
        acc += w * np.fft.fft2(sb)
    return np.fft.ifft2(acc).real / np.sqrt(len(subbands))


# ---------------------------------------------------------------------------
# Cascade
# ---------------------------------------------------------------------------

#: Default orientation counts per bandpass level, coarsest first.
DEFAULT_DIRS = (8, 8, 4)


def _check_dirs(levels: int, dirs: tuple[int, ...]) -> tuple[int, ...]:
    dirs = tuple(int(d) for d in dirs)
    if len(dirs) != levels:
        raise ValueError(f"schedule length {len(dirs)} != levels {levels}")
    for d in dirs:
        if d < 1 or d & (d - 1):
            raise ValueError(f"orientation counts must be powers of two, got {d}")
    return dirs


@dataclass
class ContourletCoeffs:
    """Directional multiscale coefficients.

    ``subbands[i]`` lists the orientation grids of bandpass level ``i``
    with level 0 the coarsest, matching the ``dirs`` schedule order.
    """

    levels: int
    dirs: tuple[int, ...]
    approx: np.ndarray
    subbands: list[list[np.ndarray]]
    orig_shape: tuple[int, int]


def contourlet_forward(
    f: np.ndarray, levels: int = 3, dirs: tuple[int, ...] = DEFAULT_DIRS
) -> ContourletCoeffs:
    """Pyramid stage, then a directional split of every bandpass level."""
    dirs = _check_dirs(levels, dirs)
    pyr = lp_decompose(f, levels)
    subbands = [
        dfb_decompose(band, int(np.log2(n_dirs)))
        for band, n_dirs in zip(reversed(pyr.bands), dirs)
    ]
    return ContourletCoeffs(levels, dirs, pyr.approx, subbands, pyr.orig_shape)


def contourlet_inverse(coeffs: ContourletCoeffs) -> np.ndarray:
    bands = [dfb_reconstruct(sb) for sb in reversed(coeffs.subbands)]
    pyr = LaplacianPyramid(coeffs.levels, bands, coeffs.approx, coeffs.orig_shape)
    return lp_reconstruct(pyr)


def cst(
    f: np.ndarray,
    threshold: float,
    levels: int = 3,
    dirs: tuple[int, ...] = DEFAULT_DIRS,
) -> np.ndarray:
    """Directional soft thresholding; the coarse band is left untouched."""
    if threshold < 0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    coeffs = contourlet_forward(f, levels, dirs)
    coeffs.subbands = [
        [soft_threshold(grid, threshold) for grid in level] for level in coeffs.subbands
    ]
    return contourlet_inverse(coeffs)


def contourlet_norm(
    f: np.ndarray,
    s: float,
    p: float,
    q: float,
    levels: int = 3,
    dirs: tuple[int, ...] = DEFAULT_DIRS,
    homogeneous: bool = False,
) -> float:
    """Directional analogue of the wavelet smoothness norm.

    The inner sum runs over all orientation grids of a scale; scale
    index 0 is the finest bandpass level.  Truncated to the computed
    ``levels`` scales; the homogeneous variant omits the coarse term.
    """
    if not p > 0 or not q > 0:
        raise ValueError(f"p and q must be in (0, inf], got p={p}, q={q}")
    coeffs = contourlet_forward(f, levels, dirs)
    per_level = [
        np.abs(np.concatenate([grid.ravel() for grid in level]))
        for level in reversed(coeffs.subbands)
    ]
    norm = _scale_norm(per_level, s, p, q)
    if not homogeneous:
        norm += _lp(np.abs(coeffs.approx).ravel(), p)
    return norm
