"""Decomposition models: structures u, textures v, and optionally noise w.

Two-part models alternate a texture step against a structure step:

* ``rof``            v = project_g(f, lam), u = f - v (single projection)
* ``decompose_bv_g`` v-step projects f - u onto the radius-``mu``
  divergence-form ball; u-step removes the small-oscillation remainder
  of f - v with ``project_g(.., lam)``.
* ``decompose_bv_e`` v-step clamps wavelet details: v = f - u - wst(f-u, 2*mu).
* ``decompose_bv_h1`` v = project_k(f, lam, -laplacian), u = f - v.

Three-part models add a noise step ahead of the texture step:

* ``decompose_bv_g_g``  noise in a second, much smaller divergence-form
  ball, with a pixel-wise texture/non-texture weighting computed once
  from a preliminary two-part run.
* ``decompose_bv_g_e``  noise by wavelet-detail clamping at ``2*delta``.
* ``decompose_bv_g_co`` noise by directional-coefficient clamping at
  ``2*delta``.

Every outer loop starts from zero components, recomputes the parts in
the order noise, texture, structure, and stops when the largest
pixel change across components drops to ``StoppingRule.epsilon`` or
after ``n_step`` rounds (reported as non-converged, never an error).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import contourlet as ct
from . import tv
from . import wavelet as wl


@dataclass(frozen=True)
class StoppingRule:
    """Outer-loop stop: max-abs component change threshold and round cap."""

    epsilon: float = 0.5
    n_step: int = 50

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if self.n_step < 1:
            raise ValueError(f"n_step must be >= 1, got {self.n_step}")


@dataclass
class Decomposition:
    """Named components plus convergence and reproducibility metadata.

    ``residual`` is the l2 norm of f minus the model's recomposition
    (u+v, u+v+w, or the weighted three-part sum).  ``p_max`` is the dual
    certificate of the last texture projection: the largest dual-field
    magnitude seen, <= 1 up to float rounding for ball-valued textures.
    """

    u: np.ndarray
    v: np.ndarray
    w: np.ndarray | None
    iterations: int
    final_delta: float
    converged: bool
    residual: float
    runtime: float
    p_max: float
    params: dict = field(default_factory=dict)
    nu: "NuPartition | None" = None

    def additive_parts(self) -> tuple[np.ndarray, np.ndarray | None]:
        """Texture and noise as they enter the recomposition.

        For the locally weighted model these are nu1*v and nu2*w; for
        every other model they are v and w unchanged.
        """
        if self.nu is None:
            return self.v, self.w
        return self.nu.nu1 * self.v, self.nu.nu2 * self.w


def _l2(a: np.ndarray) -> float:
    return float(np.sqrt(np.sum(a * a)))


def _max_abs(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def noise_threshold(kappa_t: float, sigma: float) -> float:
    """Detail-clamp level from a sensitivity factor and the noise deviation.

    ``2.35 * kappa_t * sigma``; (0.2, 20) gives 9.4 and (0.5, 20) gives 23.5.
    """
    return 2.35 * kappa_t * sigma


def rof(f: np.ndarray, lam: float, cfg: tv.ProjectorConfig | None = None) -> Decomposition:
    """Single-projection split: v is the ball projection of f, u the rest."""
    t0 = time.perf_counter()
    v, report = tv.project_g(f, lam, cfg, full_output=True)
    u = f - v
    return Decomposition(
        u=u,
        v=v,
        w=None,
        iterations=report.iterations,
        final_delta=report.final_delta,
        converged=report.converged,
        residual=0.0,
        runtime=time.perf_counter() - t0,
        p_max=report.p_max,
        params={"model": "rof", "lambda": lam},
    )


def decompose_bv_g(
    f: np.ndarray,
    lam: float,
    mu: float,
    stop: StoppingRule | None = None,
    cfg: tv.ProjectorConfig | None = None,
) -> Decomposition:
    """Alternating texture-ball / structure split of f into u + v."""
    stop = stop or StoppingRule()
    t0 = time.perf_counter()
    u = np.zeros_like(f)
    v = np.zeros_like(f)
    delta = float("inf")
    converged = False
    p_max = 0.0
    n = 0
    for n in range(1, stop.n_step + 1):
        v_new, rep_v = tv.project_g_mu(f - u, mu, cfg, full_output=True)
        r = f - v_new
        u_new = r - tv.project_g(r, lam, cfg)
        delta = max(_max_abs(u_new - u), _max_abs(v_new - v))
        u, v, p_max = u_new, v_new, rep_v.p_max
        if delta <= stop.epsilon:
            converged = True
            break
    return Decomposition(
        u=u,
        v=v,
        w=None,
        iterations=n,
        final_delta=delta,
        converged=converged,
        residual=_l2(f - u - v),
        runtime=time.perf_counter() - t0,
        p_max=p_max,
        params={"model": "bv-g", "lambda": lam, "mu": mu},
    )


def decompose_bv_e(
    f: np.ndarray,
    lam: float,
    mu: float,
    stop: StoppingRule | None = None,
    cfg: tv.ProjectorConfig | None = None,
    levels: int = 3,
    wav: wl.WaveletFilter | None = None,
) -> Decomposition:
    """Like :func:`decompose_bv_g` with a wavelet-clamp texture step."""
    stop = stop or StoppingRule()
    t0 = time.perf_counter()
    u = np.zeros_like(f)
    v = np.zeros_like(f)
    delta = float("inf")
    converged = False
    n = 0
    for n in range(1, stop.n_step + 1):
        v_new = wl.project_e(f - u, mu, levels, wav)
        r = f - v_new
        u_new = r - tv.project_g(r, lam, cfg)
        delta = max(_max_abs(u_new - u), _max_abs(v_new - v))
        u, v = u_new, v_new
        if delta <= stop.epsilon:
            converged = True
            break
    return Decomposition(
        u=u,
        v=v,
        w=None,
        iterations=n,
        final_delta=delta,
        converged=converged,
        residual=_l2(f - u - v),
        runtime=time.perf_counter() - t0,
        p_max=float("nan"),
        params={"model": "bv-e", "lambda": lam, "mu": mu, "levels": levels},
    )


def decompose_bv_h1(
    f: np.ndarray,
    lam: float,
    cfg: tv.ProjectorConfig | None = None,
    boundary: str = "neumann",
) -> Decomposition:
    """Negative-order Sobolev texture model: one generalized projection."""
    t0 = time.perf_counter()

    def k_inv(x):
        return tv.neg_laplacian(x, boundary)

    v, report = tv.project_k(
        f, lam, k_inv, cfg, k_inv_norm=tv.NEG_LAPLACIAN_NORM, full_output=True
    )
    u = f - v
    return Decomposition(
        u=u,
        v=v,
        w=None,
        iterations=report.iterations,
        final_delta=report.final_delta,
        converged=report.converged,
        residual=0.0,
        runtime=time.perf_counter() - t0,
        p_max=report.p_max,
        params={"model": "bv-h1", "lambda": lam, "boundary": boundary},
    )


# ---------------------------------------------------------------------------
# Texture/non-texture weighting
# ---------------------------------------------------------------------------


@dataclass
class NuPartition:
    """Smoothed texture weighting: nu1 in (0,1) pointwise, nu2 = 1 - nu1."""

    nu1: np.ndarray
    nu2: np.ndarray
    window: int
    kappa: float


def compute_nu(v2: np.ndarray, window: int = 3, kappa: float = 1e-2, nu_min: float = 0.01) -> NuPartition:
    """Local-variance texture weighting from a prior texture component.

    The variance over a ``window x window`` neighborhood (mirror
    boundary) is affinely normalized into ``[nu_min, 1 - nu_min]``;
    a spatially constant variance degenerates to 0.5 everywhere.
    """
    if window < 3 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 3, got {window}")
    if not 0 < nu_min < 0.5:
        raise ValueError(f"nu_min must be in (0, 0.5), got {nu_min}")
    local_mean = ndimage.uniform_filter(v2, size=window, mode="mirror")
    local_sq = ndimage.uniform_filter(v2 * v2, size=window, mode="mirror")
    var = np.maximum(local_sq - local_mean**2, 0.0)
    lo, hi = float(var.min()), float(var.max())
    if hi - lo <= 1e-12 * max(hi, 1.0):
        nu1 = np.full_like(v2, 0.5)
    else:
        nu1 = nu_min + (1.0 - 2.0 * nu_min) * (var - lo) / (hi - lo)
    return NuPartition(nu1=nu1, nu2=1.0 - nu1, window=window, kappa=kappa)


def decompose_bv_g_g(
    f: np.ndarray,
    lam: float,
    mu1: float,
    mu2: float,
    window: int = 3,
    kappa: float = 1e-2,
    stop: StoppingRule | None = None,
    cfg: tv.ProjectorConfig | None = None,
) -> Decomposition:
    """Locally adaptive three-part split with two texture balls.

    ``mu1`` should be much larger than ``mu2`` (textures vs noise).
    The weighting is computed once, from the texture part of a
    preliminary two-part run with (lam, mu1), and stays frozen during
    the outer loop.  Recomposition: f ~ u + nu1*v + nu2*w.
    """
    stop = stop or StoppingRule()
    t0 = time.perf_counter()
    pre = decompose_bv_g(f, lam, mu1, stop, cfg)
    nu = compute_nu(pre.v, window, kappa)
    nu1, nu2, kap = nu.nu1, nu.nu2, nu.kappa
    u = np.zeros_like(f)
    v = np.zeros_like(f)
    w = np.zeros_like(f)
    delta = float("inf")
    converged = False
    p_max = 0.0
    n = 0
    for n in range(1, stop.n_step + 1):
        w_new = tv.project_g_mu((f - u - nu1 * v) / (nu2 + kap), mu2, cfg)
        v_new, rep_v = tv.project_g_mu(
            (f - u - nu2 * w_new) / (nu1 + kap), mu1, cfg, full_output=True
        )
        r = f - nu1 * v_new - nu2 * w_new
        u_new = r - tv.project_g(r, lam, cfg)
        delta = max(
            _max_abs(u_new - u), _max_abs(v_new - v), _max_abs(w_new - w)
        )
        u, v, w, p_max = u_new, v_new, w_new, rep_v.p_max
        if delta <= stop.epsilon:
            converged = True
            break
    return Decomposition(
        u=u,
        v=v,
        w=w,
        iterations=n,
        final_delta=delta,
        converged=converged,
        residual=_l2(f - u - nu1 * v - nu2 * w),
        runtime=time.perf_counter() - t0,
        p_max=p_max,
        params={
            "model": "bv-g-g",
            "lambda": lam,
            "mu1": mu1,
            "mu2": mu2,
            "window": window,
            "kappa": kappa,
        },
        nu=nu,
    )


def _three_part_shrink(
    f: np.ndarray,
    lam: float,
    mu: float,
    noise_step,
    stop: StoppingRule,
    cfg: tv.ProjectorConfig | None,
    params: dict,
) -> Decomposition:
    """Shared outer loop of the wavelet- and directional-clamp models."""
    t0 = time.perf_counter()
    u = np.zeros_like(f)
    v = np.zeros_like(f)
    w = np.zeros_like(f)
    delta = float("inf")
    converged = False
    p_max = 0.0
    n = 0
    for n in range(1, stop.n_step + 1):
        w_new = noise_step(f - u - v)
        v_new, rep_v = tv.project_g_mu(f - u - w_new, mu, cfg, full_output=True)
        r = f - v_new - w_new
        u_new = r - tv.project_g(r, lam, cfg)
        delta = max(
            _max_abs(u_new - u), _max_abs(v_new - v), _max_abs(w_new - w)
        )
        u, v, w, p_max = u_new, v_new, w_new, rep_v.p_max
        if delta <= stop.epsilon:
            converged = True
            break
    return Decomposition(
        u=u,
        v=v,
        w=w,
        iterations=n,
        final_delta=delta,
        converged=converged,
        residual=_l2(f - u - v - w),
        runtime=time.perf_counter() - t0,
        p_max=p_max,
        params=params,
    )


def decompose_bv_g_e(
    f: np.ndarray,
    lam: float,
    mu: float,
    delta: float,
    stop: StoppingRule | None = None,
    cfg: tv.ProjectorConfig | None = None,
    levels: int = 3,
    wav: wl.WaveletFilter | None = None,
) -> Decomposition:
    """Three-part split with a wavelet-clamped noise component.

    Noise step: w = g - wst(g, 2*delta) for g = f - u - v, so the final
    w has every detail coefficient bounded by 2*delta.
    """
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    stop = stop or StoppingRule()

    def noise_step(g):
        return g - wl.wst(g, 2.0 * delta, levels, wav)

    params = {
        "model": "bv-g-e",
        "lambda": lam,
        "mu": mu,
        "delta": delta,
        "levels": levels,
    }
    return _three_part_shrink(f, lam, mu, noise_step, stop, cfg, params)


def decompose_bv_g_co(
    f: np.ndarray,
    lam: float,
    mu: float,
    delta: float,
    stop: StoppingRule | None = None,
    cfg: tv.ProjectorConfig | None = None,
    levels: int = 3,
    dirs: tuple[int, ...] = ct.DEFAULT_DIRS,
) -> Decomposition:
    """Three-part split with a directionally-clamped noise component.

    Same loop as :func:`decompose_bv_g_e` with the directional
    multiscale shrinkage in place of the wavelet one.
    """
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    stop = stop or StoppingRule()

    def noise_step(g):
        return g - ct.cst(g, 2.0 * delta, levels, dirs)

    params = {
        "model": "bv-g-co",
        "lambda": lam,
        "mu": mu,
        "delta": delta,
        "levels": levels,
        "dirs": list(dirs),
    }
    return _three_part_shrink(f, lam, mu, noise_step, stop, cfg, params)
