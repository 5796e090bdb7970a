"""Radial Gabor frame systems on truncated phase-space lattices.

A frame system caches the images of one radial window under the
rotation-averaged time-frequency shift at every lattice point, with the
half-phase exp(i pi r s c) attached and, optionally, the sqrt(mu)
normalization that turns the family into a Hilbert frame.  Analysis,
synthesis and the frame operator are dense linear algebra against the
cached profile matrix.

``reconstruct`` computes canonical-dual coefficients by conjugate-gradient
iteration on the Gram (normal) system with Jacobi preconditioning by the
atom-profile squared norms.  CG minimizes the Gram-energy norm of the
coefficient error, which equals the L2 distance between the running
reconstruction and the best one, so the reported reconstruction error is
monotone in the iteration count by construction.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .lattice import LatticeAtom, LatticeIndex, LatticeSpec, LatticeTable, lattice_table
from .profiles import RadialProfile, norm, sphere_area
from .stft import (
    OrbitPoint,
    _averaged_shift_values,
    _shifted_window_samples,
    phi_node_count,
)

__all__ = [
    "CoeffSeq",
    "FrameSystem",
    "ReconstructionResult",
    "CalibrationResult",
    "worker_count",
    "build_frame",
    "analyze",
    "synthesize",
    "frame_operator",
    "reconstruct",
    "frame_bounds",
    "calibrate_steps",
    "coeffs_to_csv",
]


def worker_count() -> int:
    """Worker cap for atom-parallel stages; RADIAL_GABOR_THREADS overrides."""
    env = os.environ.get("RADIAL_GABOR_THREADS")
    if env is not None:
        n = int(env)
        if n < 1:
            raise ValueError("RADIAL_GABOR_THREADS must be a positive integer")
        return n
    return min(8, os.cpu_count() or 1)


@dataclass(frozen=True)
class CoeffSeq:
    """Sparse coefficient sequence keyed by lattice index."""

    entries: dict[LatticeIndex, complex]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class FrameSystem:
    window: RadialProfile
    spec: LatticeSpec
    table: LatticeTable
    atom_matrix: np.ndarray  # (n_atoms, n_grid) cached atom profiles
    normalized: bool
    _atoms: list = field(default_factory=list, repr=False, compare=False)

    @property
    def atoms(self) -> list[LatticeAtom]:
        if not self._atoms:
            self._atoms.extend(self.table.atoms())
        return self._atoms

    @property
    def atom_profiles(self) -> list[RadialProfile]:
        return [self.window.with_values(row) for row in self.atom_matrix]

    def __len__(self) -> int:
        return self.atom_matrix.shape[0]

    def atom_norms_sq(self) -> np.ndarray:
        area = sphere_area(self.window.dim)
        return area * np.sum(self.window.weights * np.abs(self.atom_matrix) ** 2, axis=1).real

    def _analyze_values(self, values: np.ndarray) -> np.ndarray:
        area = sphere_area(self.window.dim)
        return area * (np.conj(self.atom_matrix) @ (self.window.weights * values))

    def _synthesize_values(self, coeffs: np.ndarray) -> np.ndarray:
        return self.atom_matrix.T @ coeffs


def build_frame(window: RadialProfile, spec: LatticeSpec, normalized: bool = True) -> FrameSystem:
    """Cache all atom profiles for the truncated lattice.

    Atoms on one (j, k) ring share the shifted window samples, and for real
    windows the atom at -ell is the conjugate of the one at +ell, so only
    half of each ring is integrated.  Rings are independent and run on a
    small thread pool; results are deterministic because every profile is
    stored by index.
    """
    if norm(window) == 0.0:
        raise ValueError("frame window must be nonzero")
    if window.dim != spec.d:
        raise ValueError("window dimension does not match the lattice spec")
    table = lattice_table(spec)
    n_atoms = len(table)
    matrix = np.empty((n_atoms, window.radii.size), dtype=complex)
    window_is_real = np.all(window.values.imag == 0.0) and not np.iscomplexobj(
        window.evaluate(window.radii[:1])
    )

    ring_starts = [0]
    for i in range(1, n_atoms):
        if table.j[i] != table.j[i - 1] or table.k[i] != table.k[i - 1]:
            ring_starts.append(i)
    ring_starts.append(n_atoms)

    def fill_ring(ring_idx: int) -> None:
        start, stop = ring_starts[ring_idx], ring_starts[ring_idx + 1]
        r = float(table.r[start])
        s = float(table.s[start])
        nodes = phi_node_count(window.theta_max, r, s)
        ring = _shifted_window_samples(window, r, nodes)
        n_ang = int(table.n_angles[start])
        for i in range(start, stop):
            ell = int(table.ell[i])
            if window_is_real and ell < 0:
                continue  # filled from the +ell conjugate below
            point = OrbitPoint(r, s, float(table.c[i]))
            values = _averaged_shift_values(window, point, nodes, ring=ring)
            phase = complex(
                math.cos(math.pi * point.r * point.s * point.c),
                math.sin(math.pi * point.r * point.s * point.c),
            )
            scale = math.sqrt(table.mu[i]) if normalized else 1.0
            matrix[i] = (scale * phase) * values
            if window_is_real and ell > 0:
                matrix[start + (n_ang - ell)] = np.conj(matrix[i])

    n_rings = len(ring_starts) - 1
    workers = worker_count()
    if workers > 1 and n_rings >= 16:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill_ring, range(n_rings)))
    else:
        for i in range(n_rings):
            fill_ring(i)
    return FrameSystem(window=window, spec=spec, table=table, atom_matrix=matrix, normalized=normalized)


def _coeff_vector(fr: FrameSystem, coeffs: CoeffSeq) -> np.ndarray:
    lookup = {
        (int(j), int(k), int(ell)): i
        for i, (j, k, ell) in enumerate(zip(fr.table.j, fr.table.k, fr.table.ell))
    }
    vec = np.zeros(len(fr), dtype=complex)
    for idx, value in coeffs.entries.items():
        key = (idx.j, idx.k, idx.ell)
        if key not in lookup:
            raise KeyError(f"coefficient index {key} is not in the frame lattice")
        vec[lookup[key]] = value
    return vec


def _coeff_seq(fr: FrameSystem, vec: np.ndarray) -> CoeffSeq:
    entries = {
        LatticeIndex(int(j), int(k), int(ell)): complex(v)
        for j, k, ell, v in zip(fr.table.j, fr.table.k, fr.table.ell, vec)
    }
    return CoeffSeq(entries)


def analyze(f: RadialProfile, fr: FrameSystem) -> CoeffSeq:
    """Frame coefficients <f, atom_i> for every cached atom."""
    _check_grid(f, fr)
    return _coeff_seq(fr, fr._analyze_values(f.values))


def synthesize(coeffs: CoeffSeq, fr: FrameSystem) -> RadialProfile:
    """Linear combination of cached atom profiles."""
    return fr.window.with_values(fr._synthesize_values(_coeff_vector(fr, coeffs)))


def frame_operator(f: RadialProfile, fr: FrameSystem) -> RadialProfile:
    """S f = sum_i <f, atom_i> atom_i; self-adjoint and positive
    semidefinite on the truncated system."""
    _check_grid(f, fr)
    return fr.window.with_values(fr._synthesize_values(fr._analyze_values(f.values)))


def _check_grid(f: RadialProfile, fr: FrameSystem) -> None:
    if f.dim != fr.window.dim or not np.array_equal(f.radii, fr.window.radii):
        raise ValueError("profile does not live on the frame grid")


@dataclass(frozen=True)
class ReconstructionResult:
    profile: RadialProfile
    relative_error: float
    converged: bool
    iterations: int
    coefficients: CoeffSeq
    error_history: np.ndarray


def reconstruct(
    f: RadialProfile,
    fr: FrameSystem,
    tol: float = 1e-6,
    max_iter: int = 400,
) -> ReconstructionResult:
    """Canonical-dual reconstruction sum_i <f, S^-1 atom_i> atom_i via
    conjugate gradients on the Gram system.

    Plain (unpreconditioned) CG from a zero start converges to the
    minimal-norm coefficient vector, which is exactly the canonical dual;
    diagonal rescaling by atom norms changes that limit and inflates
    coefficients on numerically degenerate atoms by many orders of
    magnitude, so it is deliberately not used.  CG minimizes the
    Gram-energy error, which equals the L2 distance between the running
    and the best reconstruction, so the recorded error history is
    non-increasing by construction.

    Iteration stops once the L2 reconstruction residual drops to
    tol * norm(f), or at max_iter with ``converged`` False (the best
    iterate is still returned; persistent failure indicates steps (a, b)
    outside the empirical frame regime).
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    _check_grid(f, fr)
    f_norm = norm(f)
    if f_norm == 0.0:
        zero = fr.window.with_values(np.zeros_like(f.values))
        return ReconstructionResult(zero, 0.0, True, 0, _coeff_seq(fr, np.zeros(len(fr), dtype=complex)), np.zeros(0))

    b = fr._analyze_values(f.values)
    gram = lambda v: fr._analyze_values(fr._synthesize_values(v))

    gamma = np.zeros_like(b)
    r = b.copy()
    p = r.copy()
    rr = np.vdot(r, r).real
    history = []
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        gp = gram(p)
        denom = np.vdot(p, gp).real
        if denom <= 0.0:
            break
        alpha = rr / denom
        gamma = gamma + alpha * p
        r = r - alpha * gp
        history.append(_l2_error(fr, gamma, f) / f_norm)
        if history[-1] <= tol:
            converged = True
            break
        rr_next = np.vdot(r, r).real
        if rr_next <= 0.0:
            break
        p = r + (rr_next / rr) * p
        rr = rr_next

    recon_values = fr._synthesize_values(gamma)
    recon = fr.window.with_values(recon_values)
    rel_err = _l2_error(fr, gamma, f) / f_norm
    return ReconstructionResult(recon, rel_err, converged, iterations, _coeff_seq(fr, gamma), np.asarray(history))


def _l2_error(fr: FrameSystem, gamma: np.ndarray, f: RadialProfile) -> float:
    diff = fr._synthesize_values(gamma) - f.values
    area = sphere_area(fr.window.dim)
    return math.sqrt(max(0.0, (area * np.sum(fr.window.weights * np.abs(diff) ** 2)).real))


# ----------------------------------------------------------------------
# empirical frame bounds on a polynomial-times-Gaussian test subspace
# ----------------------------------------------------------------------

def _test_subspace(fr: FrameSystem, test_dim: int) -> np.ndarray:
    """Orthonormal basis (rows) of span{theta^(2m) exp(-pi theta^2)}."""
    theta = fr.window.radii
    area = sphere_area(fr.window.dim)
    basis = []
    for m in range(test_dim):
        v = theta ** (2 * m) * np.exp(-math.pi * theta**2)
        v = v.astype(complex)
        for u in basis:  # modified Gram-Schmidt, two passes
            v = v - (area * np.sum(fr.window.weights * v * np.conj(u))) * u
        for u in basis:
            v = v - (area * np.sum(fr.window.weights * v * np.conj(u))) * u
        nrm = math.sqrt((area * np.sum(fr.window.weights * np.abs(v) ** 2)).real)
        if nrm < 1e-13:
            raise ValueError("test subspace degenerated; reduce test_dim")
        basis.append(v / nrm)
    return np.array(basis)


def frame_bounds(fr: FrameSystem, test_dim: int = 6) -> tuple[float, float]:
    """Extreme Rayleigh quotients (A, B) of the frame operator over the
    test subspace, via power iteration and inverse iteration."""
    if test_dim < 1 or test_dim > len(fr):
        raise ValueError("test_dim must be in [1, number of atoms]")
    basis = _test_subspace(fr, test_dim)
    images = np.array([fr._synthesize_values(fr._analyze_values(e)) for e in basis])
    area = sphere_area(fr.window.dim)
    m = area * (np.conj(basis) @ (fr.window.weights[:, None] * images.T))
    m = 0.5 * (m + np.conj(m.T))

    rng = np.random.default_rng(1234)
    v = rng.standard_normal(test_dim) + 1j * rng.standard_normal(test_dim)
    v /= np.linalg.norm(v)
    b_val = 0.0
    for _ in range(10000):
        w = m @ v
        new = float(np.vdot(v, w).real)
        v = w / np.linalg.norm(w)
        if abs(new - b_val) <= 1e-13 * max(1.0, abs(new)):
            b_val = new
            break
        b_val = new

    v = rng.standard_normal(test_dim) + 1j * rng.standard_normal(test_dim)
    v /= np.linalg.norm(v)
    a_val = b_val
    for _ in range(10000):
        w = np.linalg.solve(m, v)
        w /= np.linalg.norm(w)
        new = float(np.vdot(w, m @ w).real)
        if abs(new - a_val) <= 1e-13 * max(1.0, abs(new)):
            a_val = new
            v = w
            break
        a_val = new
        v = w
    return a_val, b_val


@dataclass(frozen=True)
class CalibrationResult:
    step: float
    lower: float
    upper: float
    tried: tuple[float, ...]


def calibrate_steps(
    window: RadialProfile,
    d: int,
    jk_max: int,
    candidates: tuple[float, ...] = (1.0, 0.75, 0.5, 0.35, 0.25),
    ratio_cap: float = 100.0,
    test_dim: int = 6,
) -> CalibrationResult | None:
    """Scan equal steps a = b over ``candidates`` (descending) and return
    the largest one whose empirical frame-bound ratio stays below
    ``ratio_cap`` on the test subspace; None when all fail."""
    tried = []
    for step in sorted(candidates, reverse=True):
        tried.append(step)
        fr = build_frame(window, LatticeSpec(a=step, b=step, d=d, jk_max=jk_max), normalized=True)
        lo, hi = frame_bounds(fr, test_dim)
        if lo > 0.0 and hi / lo < ratio_cap:
            return CalibrationResult(step, lo, hi, tuple(tried))
    return None


def coeffs_to_csv(coeffs: CoeffSeq, path: str | Path) -> None:
    """Write coefficients as CSV with columns j,k,ell,re,im in
    lexicographic index order."""
    lines = ["j,k,ell,re,im"]
    for idx in sorted(coeffs.entries, key=lambda i: (i.j, i.k, i.ell)):
        v = coeffs.entries[idx]
        lines.append(f"{idx.j},{idx.k},{idx.ell},{v.real:.17g},{v.imag:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")
