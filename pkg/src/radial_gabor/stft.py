"""Rotation-averaged time-frequency shifts of radial windows and the
radial short-time Fourier transform built from them.

The average of the Schroedinger time-frequency shift over all rotations of
a phase-space point (x, omega) maps radial functions to radial functions
and depends only on the orbit invariants (r, s, c) = (|x|, |omega|,
cos of the angle between x and omega).  Acting on a radial part f0 it is
the single integral

    (|S^(d-2)| / |S^(d-1)|) * int_0^pi f0(sqrt(theta^2 - 2 r theta cos(phi)
        + r^2)) * exp(2 pi i theta s c cos(phi))
        * B_(d-1)(theta s sin(alpha) sin(phi)) * sin(phi)^(d-2) d phi,

evaluated here by Gauss-Legendre quadrature on [0, pi] with a node count
that grows with the total oscillation theta_max * (r + s).

``stft_direct_2d`` is a deliberately independent tensor-quadrature STFT in
d = 2, used as an oracle by the tests and the acceptance suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

from .bessel import sph_bessel_values
from .profiles import GaussianSpec, RadialProfile, inner, sphere_area

__all__ = [
    "InsufficientQuadratureError",
    "OrbitPoint",
    "phi_node_count",
    "rot_avg_shift",
    "radial_stft",
    "stft_direct_2d",
    "stft_rotation_average_2d",
]


class InsufficientQuadratureError(ValueError):
    """Raised when a caller-supplied node count cannot resolve the
    oscillation of the averaged shift integrand."""


@dataclass(frozen=True)
class OrbitPoint:
    """Rotation-invariant coordinates of a phase-space pair.

    r = |x|, s = |omega|, c = cos of the angle between x and omega.
    When r or s vanishes the angle is meaningless and c is normalized to 1.
    """

    r: float
    s: float
    c: float = 1.0

    def __post_init__(self) -> None:
        if self.r < 0.0 or self.s < 0.0:
            raise ValueError("orbit radii must be nonnegative")
        if abs(self.c) > 1.0 + 1e-12:
            raise ValueError("|c| must not exceed 1")
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "s", float(self.s))
        c = min(1.0, max(-1.0, float(self.c)))
        if self.r == 0.0 or self.s == 0.0:
            c = 1.0
        object.__setattr__(self, "c", c)


@lru_cache(maxsize=128)
def _gl_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(n)
    return x, w


def _gl_on(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = _gl_rule(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def _phi_min_nodes(theta_max: float, r: float, s: float) -> int:
    return max(64, math.ceil(8.0 * (1.0 + theta_max * s + theta_max * r)))


def phi_node_count(theta_max: float, r: float, s: float) -> int:
    """Default Gauss-Legendre node count on [0, pi]: the oscillation
    resolving minimum, rounded up to a multiple of 32 so rules can be
    cached across lattice rings."""
    return ((_phi_min_nodes(theta_max, r, s) + 31) // 32) * 32


def _shifted_window_samples(
    window: RadialProfile, r: float, quad_nodes: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Window samples on the shifted radius sqrt(theta^2 - 2 r theta cos(phi)
    + r^2); shared by every angle index on one lattice ring."""
    phi, w_phi = _gl_on(0.0, math.pi, quad_nodes)
    cos_phi = np.cos(phi)
    sin_phi = np.sin(phi)
    theta = window.radii[:, None]
    radicand = theta**2 - 2.0 * r * theta * cos_phi[None, :] + r * r
    if (radicand < -1e-12 * max(1.0, r * r)).any():
        raise FloatingPointError("shift argument radicand is significantly negative")
    fvals = window.evaluate(np.sqrt(np.maximum(radicand, 0.0)))
    return fvals, cos_phi, sin_phi, w_phi


def _averaged_shift_values(
    window: RadialProfile,
    point: OrbitPoint,
    quad_nodes: int,
    ring: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray] | None = None,
) -> np.ndarray:
    d = window.dim
    if ring is None:
        ring = _shifted_window_samples(window, point.r, quad_nodes)
    fvals, cos_phi, sin_phi, w_phi = ring
    theta = window.radii[:, None]
    s, c = point.s, point.c
    sin_alpha = math.sqrt(max(0.0, 1.0 - c * c))

    kernel = fvals
    if s != 0.0 and sin_alpha != 0.0:
        kernel = kernel * sph_bessel_values(d - 1, (s * sin_alpha) * theta * sin_phi[None, :])
    if d > 2:
        kernel = kernel * sin_phi[None, :] ** (d - 2)

    prefactor = sphere_area(d - 1) / sphere_area(d)
    if s == 0.0 or c == 0.0:
        values = prefactor * (kernel @ w_phi)
        return values.astype(complex)
    # split the oscillatory factor into real transcendentals; complex exp
    # on large grids costs several times two real ones
    phase_arg = (2.0 * math.pi * s * c) * theta * cos_phi[None, :]
    if np.iscomplexobj(kernel):
        return prefactor * ((kernel * np.cos(phase_arg)) @ w_phi + 1j * ((kernel * np.sin(phase_arg)) @ w_phi))
    re = (kernel * np.cos(phase_arg)) @ w_phi
    im = (kernel * np.sin(phase_arg)) @ w_phi
    return prefactor * (re + 1j * im)


def rot_avg_shift(
    window: RadialProfile,
    point: OrbitPoint,
    quad_nodes: int | None = None,
) -> RadialProfile:
    """Apply the rotation-averaged time-frequency shift at ``point`` to a
    radial profile, sampled on the profile's own grid.

    The result is linear in ``window`` and contractive in L2 norm (the
    operator is an average of unitaries).
    """
    if quad_nodes is None:
        quad_nodes = phi_node_count(window.theta_max, point.r, point.s)
    else:
        required = _phi_min_nodes(window.theta_max, point.r, point.s)
        if quad_nodes < required:
            raise InsufficientQuadratureError(
                f"quad_nodes={quad_nodes} is below the resolving minimum {required}"
            )
    return window.with_values(_averaged_shift_values(window, point, quad_nodes))


def radial_stft(f: RadialProfile, g: RadialProfile, point: OrbitPoint) -> complex:
    """Radial STFT coefficient <f, pi(point) g> with the half-phase
    convention exp(-i pi r s c); its magnitude is what coefficients and
    norms use downstream."""
    shifted = rot_avg_shift(g, point)
    phase = complex(math.cos(math.pi * point.r * point.s * point.c),
                    -math.sin(math.pi * point.r * point.s * point.c))
    return phase * inner(f, shifted)


# ----------------------------------------------------------------------
# direct 2-d oracles (tensor quadrature, no radial reduction)
# ----------------------------------------------------------------------

def _gaussian_halfwidth(fn) -> float:
    if isinstance(fn, GaussianSpec):
        # |amp| e^(-alpha w^2) ~ 1e-18
        return math.sqrt(41.0 / fn.alpha)
    return 4.5


def stft_direct_2d(
    f,
    g,
    x: np.ndarray,
    omega: np.ndarray,
    nodes_per_axis: int | None = None,
) -> complex:
    """Short-time Fourier transform in d = 2 by direct tensor quadrature:
    int f(t) conj(g(t - x)) exp(-2 pi i t.omega) dt.

    f and g are analytic radial evaluators with decay (for example
    ``GaussianSpec``); accuracy target 1e-7 for Gaussian-type inputs.
    """
    x = np.asarray(x, dtype=float)
    omega = np.asarray(omega, dtype=float)
    half = max(_gaussian_halfwidth(f), _gaussian_halfwidth(g))
    center = 0.5 * x
    width = half + 0.5 * float(np.linalg.norm(x))
    if nodes_per_axis is None:
        freq = float(np.linalg.norm(omega)) + 1.0
        nodes_per_axis = max(64, math.ceil(2.0 * math.pi * width * freq) + 32)
        nodes_per_axis = ((nodes_per_axis + 31) // 32) * 32
    t1, w1 = _gl_on(center[0] - width, center[0] + width, nodes_per_axis)
    t2, w2 = _gl_on(center[1] - width, center[1] + width, nodes_per_axis)

    rad_f = np.sqrt(t1[:, None] ** 2 + t2[None, :] ** 2)
    rad_g = np.sqrt((t1[:, None] - x[0]) ** 2 + (t2[None, :] - x[1]) ** 2)
    phase1 = np.exp(-2.0j * math.pi * omega[0] * t1) * w1
    phase2 = np.exp(-2.0j * math.pi * omega[1] * t2) * w2
    grid = np.asarray(f(rad_f), dtype=complex) * np.conj(np.asarray(g(rad_g), dtype=complex))
    return complex(phase1 @ grid @ phase2)


def stft_rotation_average_2d(
    f,
    g,
    x: np.ndarray,
    omega: np.ndarray,
    n_psi: int = 192,
    nodes_per_axis: int | None = None,
) -> complex:
    """Average of the direct STFT over simultaneous rotations of (x, omega),
    by trapezoid quadrature in the rotation angle (the integrand is smooth
    and 2 pi periodic, so the trapezoid rule converges geometrically)."""
    x = np.asarray(x, dtype=float)
    omega = np.asarray(omega, dtype=float)
    total = 0.0 + 0.0j
    for psi in np.arange(n_psi) * (2.0 * math.pi / n_psi):
        rot = np.array([[math.cos(psi), -math.sin(psi)], [math.sin(psi), math.cos(psi)]])
        total += stft_direct_2d(f, g, rot @ x, rot @ omega, nodes_per_axis=nodes_per_axis)
    return total / n_psi
