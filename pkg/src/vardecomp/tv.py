"""Discrete differential operators and the dual-field projectors.

The gradient uses forward differences with a zero last row/column; the
divergence is its negative adjoint (backward differences with one-sided
boundary terms), so that ``<-div p, u> == <p, grad u>`` holds exactly.
The total variation is the sum over pixels of the gradient magnitude.

``project_g`` computes the projection of ``g`` onto the convex set
``{lam * div q : |q(x)| <= 1 at every pixel}`` by the fixed-point
iteration on the dual field ``p``:

    eta = grad(div(p) - g/lam)
    p  <- (p + tau*eta) / (1 + tau*|eta|)

started from ``p = 0``.  For ``0 < tau < 1/8`` the sequence
``lam*div(p)`` converges to the projection, and ``u = g - project_g(g,
lam)`` solves ``min_u TV(u) + ||g - u||^2 / (2*lam)``.  The update keeps
``|p| <= 1`` at every pixel by construction (the denominator dominates),
which is reported back as a certificate.

``project_k`` is the extension that interposes a symmetric positive
linear operator in the iteration, ``eta = grad(op(div p) - g/lam)``, and
returns ``lam * op(div p)``; with ``op`` the identity it reduces exactly
to ``project_g``, and with ``op = -laplacian`` it yields the texture
part of the negative-order Sobolev model.  Its step bound tightens to
``tau < 1 / (8*||op||)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, NamedTuple

import numpy as np


class VectorField(NamedTuple):
    """Pixel-wise pair field ``p = (p1, p2)`` matching the image shape."""

    p1: np.ndarray
    p2: np.ndarray


@dataclass(frozen=True)
class ProjectorConfig:
    """Step size, iteration budget, and optional early-exit tolerance.

    ``tol`` applies to the max-abs change of ``div(p)`` between
    iterations; set it to None to always run ``n_iter`` steps.
    """

    tau: float = 0.124
    n_iter: int = 20
    tol: float | None = 1e-4


@dataclass
class ProjectorReport:
    """Diagnostics of one projector run.

    ``p_max`` is the running maximum over all iterations of the largest
    pixel magnitude of the dual field; it certifies the constraint
    ``|p| <= 1``.
    """

    iterations: int
    final_delta: float
    p_max: float
    converged: bool


def grad(u: np.ndarray) -> VectorField:
    """Forward-difference gradient; last row/column of each part is zero."""
    g1 = np.zeros_like(u)
    g2 = np.zeros_like(u)
    g1[:-1, :] = u[1:, :] - u[:-1, :]
    g2[:, :-1] = u[:, 1:] - u[:, :-1]
    return VectorField(g1, g2)


def div(p: VectorField) -> np.ndarray:
    """Backward-difference divergence, the negative adjoint of ``grad``."""
    p1, p2 = p
    if p1.shape != p2.shape:
        raise ValueError(f"field components differ in shape: {p1.shape} vs {p2.shape}")
    d = np.zeros_like(p1)
    d[0, :] += p1[0, :]
    d[1:-1, :] += p1[1:-1, :] - p1[:-2, :]
    d[-1, :] -= p1[-2, :]
    d[:, 0] += p2[:, 0]
    d[:, 1:-1] += p2[:, 1:-1] - p2[:, :-2]
    d[:, -1] -= p2[:, -2]
    return d


def total_variation(u: np.ndarray) -> float:
    """Sum over pixels of the discrete gradient magnitude."""
    g1, g2 = grad(u)
    return float(np.sum(np.hypot(g1, g2)))


def _grad_into(u: np.ndarray, g1: np.ndarray, g2: np.ndarray) -> None:
    np.subtract(u[1:, :], u[:-1, :], out=g1[:-1, :])
    g1[-1, :] = 0.0
    np.subtract(u[:, 1:], u[:, :-1], out=g2[:, :-1])
    g2[:, -1] = 0.0


def projection_steps(
    g: np.ndarray,
    lam: float,
    tau: float,
    op: Callable[[np.ndarray], np.ndarray] | None = None,
) -> Iterator[tuple[np.ndarray, float, float]]:
    """Yield ``(div_p, delta, p_norm_max)`` after each dual update.

    ``delta`` is the max-abs change of ``div(p)`` against the previous
    iterate and ``p_norm_max`` the largest pixel magnitude of ``p``.
    No step-size validation is done here; an out-of-range ``tau`` simply
    gives a non-convergent (but bounded) sequence.  Scratch buffers are
    reused across iterations; only the yielded ``div_p`` is fresh.
    """
    b = g / lam
    p1 = np.zeros_like(b)
    p2 = np.zeros_like(b)
    e1 = np.empty_like(b)
    e2 = np.empty_like(b)
    s = np.empty_like(b)
    denom = np.empty_like(b)
    d = np.zeros_like(b)
    while True:
        np.subtract(op(d) if op is not None else d, b, out=s)
        _grad_into(s, e1, e2)
        np.hypot(e1, e2, out=denom)
        denom *= tau
        denom += 1.0
        e1 *= tau
        p1 += e1
        p1 /= denom
        e2 *= tau
        p2 += e2
        p2 /= denom
        d_new = div(VectorField(p1, p2))
        np.subtract(d_new, d, out=s)
        delta = float(np.max(np.abs(s, out=s)))
        np.hypot(p1, p2, out=denom)
        p_norm_max = float(np.max(denom))
        d = d_new
        yield d, delta, p_norm_max


def _run_projection(
    g: np.ndarray,
    lam: float,
    cfg: ProjectorConfig,
    op: Callable[[np.ndarray], np.ndarray] | None = None,
) -> tuple[np.ndarray, ProjectorReport]:
    if lam <= 0:
        raise ValueError(f"lam must be > 0, got {lam}")
    if cfg.n_iter < 1:
        raise ValueError(f"n_iter must be >= 1, got {cfg.n_iter}")
    steps = projection_steps(g, lam, cfg.tau, op)
    p_max = 0.0
    d = np.zeros_like(g)
    delta = float("inf")
    converged = False
    n = 0
    for n in range(1, cfg.n_iter + 1):
        d, delta, p_norm_max = next(steps)
        p_max = max(p_max, p_norm_max)
        if cfg.tol is not None and delta < cfg.tol:
            converged = True
            break
    v = lam * (op(d) if op is not None else d)
    if not np.all(np.isfinite(v)):
        raise ArithmeticError("projector produced non-finite values")
    return v, ProjectorReport(n, delta, p_max, converged)


def project_g(
    g: np.ndarray,
    lam: float,
    cfg: ProjectorConfig | None = None,
    full_output: bool = False,
):
    """Project ``g`` onto ``{lam * div q : |q| <= 1}``.

    Returns ``lam * div(p)`` after the dual iteration; with
    ``full_output=True`` also returns a :class:`ProjectorReport`.
    Requires ``0 < cfg.tau < 1/8`` (the convergence regime).
    """
    cfg = cfg or ProjectorConfig()
    if not 0.0 < cfg.tau < 0.125:
        raise ValueError(f"tau must satisfy 0 < tau < 1/8, got {cfg.tau}")
    v, report = _run_projection(g, lam, cfg)
    return (v, report) if full_output else v


def project_g_mu(
    g: np.ndarray,
    mu: float,
    cfg: ProjectorConfig | None = None,
    full_output: bool = False,
):
    """Projection onto the radius-``mu`` ball of divergence-form textures.

    Same iteration as :func:`project_g` with ``mu`` as the radius; the
    output is ``mu * div(p)`` which lies in the ball by construction.
    """
    return project_g(g, mu, cfg, full_output)


def project_k(
    g: np.ndarray,
    lam: float,
    k_inv: Callable[[np.ndarray], np.ndarray],
    cfg: ProjectorConfig | None = None,
    k_inv_norm: float | None = None,
    full_output: bool = False,
):
    """Dual iteration with the operator ``k_inv`` interposed.

    Returns ``lam * k_inv(div p)``.  ``k_inv`` must be linear, symmetric
    and positive semidefinite; ``k_inv_norm`` is its operator norm (an
    upper bound is fine) and is estimated by power iteration when not
    given.  Requires ``0 < cfg.tau < 1/(8*k_inv_norm)``.
    """
    cfg = cfg or ProjectorConfig(tau=1.0 / 65.0)
    if k_inv_norm is None:
        k_inv_norm = operator_norm(k_inv, g.shape)
    if k_inv_norm <= 0:
        raise ValueError(f"k_inv_norm must be > 0, got {k_inv_norm}")
    bound = 1.0 / (8.0 * k_inv_norm)
    if not 0.0 < cfg.tau < bound:
        raise ValueError(
            f"tau must satisfy 0 < tau < 1/(8*||k_inv||) = {bound:.6g}, got {cfg.tau}"
        )
    v, report = _run_projection(g, lam, cfg, op=k_inv)
    return (v, report) if full_output else v


# ---------------------------------------------------------------------------
# Laplacian helpers for the negative-order Sobolev model
# ---------------------------------------------------------------------------


def laplacian(u: np.ndarray, boundary: str = "neumann") -> np.ndarray:
    """5-point Laplacian with mirror (``neumann``) or ``periodic`` boundary."""
    if boundary == "neumann":
        out = -4.0 * u
        out[1:, :] += u[:-1, :]
        out[0, :] += u[0, :]
        out[:-1, :] += u[1:, :]
        out[-1, :] += u[-1, :]
        out[:, 1:] += u[:, :-1]
        out[:, 0] += u[:, 0]
        out[:, :-1] += u[:, 1:]
        out[:, -1] += u[:, -1]
        return out
    if boundary == "periodic":
        return (
            np.roll(u, 1, axis=0)
            + np.roll(u, -1, axis=0)
            + np.roll(u, 1, axis=1)
            + np.roll(u, -1, axis=1)
            - 4.0 * u
        )
    raise ValueError(f"unknown boundary {boundary!r}")


def neg_laplacian(u: np.ndarray, boundary: str = "neumann") -> np.ndarray:
    """``-laplacian``; symmetric positive semidefinite for both boundaries."""
    return -laplacian(u, boundary)


#: Spectral norm bound of the 5-point (negative) Laplacian.
NEG_LAPLACIAN_NORM = 8.0


def operator_norm(
    op: Callable[[np.ndarray], np.ndarray],
    shape: tuple[int, int],
    n_iter: int = 100,
    seed: int = 0,
) -> float:
    """Power-iteration estimate of the operator norm of a symmetric ``op``."""
    rng = np.random.Generator(np.random.PCG64(seed))
    x = rng.standard_normal(shape)
    x /= np.linalg.norm(x)
    norm = 0.0
    for _ in range(n_iter):
        y = op(x)
        norm = float(np.linalg.norm(y))
        if norm == 0.0:
            return 0.0
        x = y / norm
    return norm
