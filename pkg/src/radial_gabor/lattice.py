"""The explicit well-spread point set in phase space.

For steps a, b > 0 the points live on rings of radii a*j in space and b*k
in frequency; each ring pair (j, k) carries 2 N(j, k) + 1 relative angles
with cosines sin(pi*l / (2 N(j, k))), l = -N..N, plus measure weights mu
that estimate the Lebesgue volume of the orbit neighborhoods.  Everything
downstream is rotation invariant, so points are stored as orbit
coordinates (r, s, c); explicit R^2 vectors are materialized only by the
d = 2 covering verifier and the CSV export.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .stft import OrbitPoint

__all__ = [
    "LatticeIndex",
    "LatticeSpec",
    "LatticeAtom",
    "LatticeTable",
    "angle_count",
    "measure_weight",
    "lattice_table",
    "build_lattice",
    "index_count",
    "covered_2d",
    "lattice_to_csv",
]

_CEIL_GUARD = 1e-9  # protects the ceiling against off-by-one at exact integers


@dataclass(frozen=True)
class LatticeIndex:
    j: int
    k: int
    ell: int

    def __post_init__(self) -> None:
        if self.j < 0 or self.k < 0:
            raise ValueError("ring indices must be nonnegative")
        n = angle_count(self.j, self.k)
        if abs(self.ell) > n:
            raise ValueError(f"|ell| must not exceed {n} for ring ({self.j}, {self.k})")


@dataclass(frozen=True)
class LatticeSpec:
    """Steps a (space) and b (frequency), dimension d and the truncation
    jk_max keeping rings with j + k <= jk_max."""

    a: float
    b: float
    d: int = 2
    jk_max: int = 8

    def __post_init__(self) -> None:
        if self.a <= 0.0 or self.b <= 0.0:
            raise ValueError("lattice steps must be positive")
        if self.d < 2:
            raise ValueError("dimension must be >= 2")
        if self.jk_max < 1:
            raise ValueError("jk_max must be >= 1")


@dataclass(frozen=True)
class LatticeAtom:
    index: LatticeIndex
    point: OrbitPoint
    mu: float


def _angle_count_array(j: np.ndarray, k: np.ndarray) -> np.ndarray:
    jf = j.astype(float)
    kf = k.astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        root_j = np.sqrt(3.0 + 3.0 / (2.0 * jf) - (3.0 / (4.0 * jf)) ** 2)
        root_k = np.sqrt(3.0 + 3.0 / (2.0 * kf) - (3.0 / (4.0 * kf)) ** 2)
        num = kf * root_j + jf * root_k
        den = jf * kf + 0.5 * (jf + kf) - 0.375 * (jf / kf + kf / jf) + 1.0
        val = np.ceil((math.pi / 4.0) / np.arctan(num / den) - _CEIL_GUARD)
    out = np.where((j == 0) | (k == 0), 0.0, val)
    return out.astype(int)


def angle_count(j: int, k: int) -> int:
    """Number N(j, k) of angular subdivisions on ring pair (j, k); zero on
    the boundary rows j = 0 or k = 0."""
    if j < 0 or k < 0:
        raise ValueError("ring indices must be nonnegative")
    return int(_angle_count_array(np.array([j]), np.array([k]))[0])


def measure_weight(index: LatticeIndex | tuple[int, int, int], d: int) -> float:
    """Orbit-neighborhood volume weight mu for one lattice index."""
    if isinstance(index, tuple):
        index = LatticeIndex(*index)
    j, k, ell = index.j, index.k, index.ell
    n = angle_count(j, k)
    if abs(ell) == n:
        return float(j ** (d - 1) + k ** (d - 1) + 1)
    return float((j + k) * (j * k * math.cos(math.pi * ell / (2.0 * n))) ** (d - 2))


@dataclass(frozen=True)
class LatticeTable:
    """Columnar lattice representation for large truncations."""

    spec: LatticeSpec
    j: np.ndarray
    k: np.ndarray
    ell: np.ndarray
    n_angles: np.ndarray
    r: np.ndarray
    s: np.ndarray
    c: np.ndarray
    mu: np.ndarray

    def __len__(self) -> int:
        return self.j.size

    def atoms(self) -> list[LatticeAtom]:
        return [
            LatticeAtom(
                LatticeIndex(int(j), int(k), int(ell)),
                OrbitPoint(float(r), float(s), float(c)),
                float(mu),
            )
            for j, k, ell, r, s, c, mu in zip(
                self.j, self.k, self.ell, self.r, self.s, self.c, self.mu
            )
        ]


def lattice_table(spec: LatticeSpec) -> LatticeTable:
    """All lattice atoms with j + k <= jk_max in lexicographic (j, k, ell)
    order, built with vectorized arithmetic."""
    jmax = spec.jk_max
    pair_j, pair_k = np.meshgrid(np.arange(jmax + 1), np.arange(jmax + 1), indexing="ij")
    keep = (pair_j + pair_k) <= jmax
    pair_j, pair_k = pair_j[keep], pair_k[keep]
    n_pair = _angle_count_array(pair_j, pair_k)
    counts = 2 * n_pair + 1

    j = np.repeat(pair_j, counts)
    k = np.repeat(pair_k, counts)
    n = np.repeat(n_pair, counts)
    offsets = np.concatenate([[0], np.cumsum(counts)])[:-1]
    ell = np.arange(counts.sum()) - np.repeat(offsets + n_pair, counts)

    with np.errstate(divide="ignore", invalid="ignore"):
        half_angle = math.pi * ell / (2.0 * np.maximum(n, 1))
    c = np.where(n == 0, 1.0, np.sin(half_angle))
    boundary = np.abs(ell) == n
    jf, kf = j.astype(float), k.astype(float)
    mu = np.where(
        boundary,
        jf ** (spec.d - 1) + kf ** (spec.d - 1) + 1.0,
        (jf + kf) * (jf * kf * np.cos(half_angle)) ** (spec.d - 2),
    )
    return LatticeTable(
        spec=spec,
        j=j,
        k=k,
        ell=ell,
        n_angles=n,
        r=spec.a * jf,
        s=spec.b * kf,
        c=c,
        mu=mu,
    )


def build_lattice(spec: LatticeSpec) -> list[LatticeAtom]:
    """Materialized atom list; prefer ``lattice_table`` above a few
    thousand atoms."""
    return lattice_table(spec).atoms()


def index_count(n: int) -> int:
    """Number of lattice indices with j + k <= n; grows like n^3."""
    if n < 0:
        raise ValueError("n must be >= 0")
    pair_j, pair_k = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
    keep = (pair_j + pair_k) <= n
    return int(np.sum(2 * _angle_count_array(pair_j[keep], pair_k[keep]) + 1))


# ----------------------------------------------------------------------
# covering verifier for d = 2
# ----------------------------------------------------------------------

_COARSE_PSI = 1024
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _candidate_rows(value: float, step: float, cap: int) -> range:
    lo = max(0, math.ceil(value / step - 1.0 - 1e-12))
    hi = min(cap, math.floor(value / step + 1.0 + 1e-12))
    return range(lo, hi + 1)


def _pair_max_ratio(psi, r, phi_x, s, phi_w, aj, bk, beta, a, b):
    dx2 = r * r + aj * aj - 2.0 * aj * r * np.cos(phi_x - psi)
    dw2 = s * s + bk * bk - 2.0 * bk * s * np.cos(phi_w - beta - psi)
    return np.maximum(dx2 / (a * a), dw2 / (b * b))


def covered_2d(x: np.ndarray, omega: np.ndarray, spec: LatticeSpec) -> bool:
    """Whether (x, omega) lies in some lattice atom's orbit neighborhood of
    step sizes (a, b).

    The neighborhoods depend on the pair only through (|x|, |omega|,
    x.omega), so membership is tested against the plane isometries that
    preserve those invariants: rotations and the reflection that flips the
    sign of the relative angle (the lattice itself only carries
    nonnegative relative angles).  Each isometry class is decided on a
    coarse 1024-sample rotation grid with golden-section refinement of the
    worst-coordinate ratio; candidate atoms are pre-filtered by ring
    distance.  Truncation must satisfy |x|/a + |omega|/b + 2 <= jk_max for
    a negative answer to be reliable.
    """
    if spec.d != 2:
        raise ValueError("covering verification is implemented for d = 2 only")
    x = np.asarray(x, dtype=float)
    omega = np.asarray(omega, dtype=float)
    a, b = spec.a, spec.b
    r = float(np.linalg.norm(x))
    s = float(np.linalg.norm(omega))
    phi_x = math.atan2(x[1], x[0]) if r > 0.0 else 0.0
    phi_w = math.atan2(omega[1], omega[0]) if s > 0.0 else 0.0

    candidates: list[tuple[float, float, float]] = []  # (aj, bk, beta)
    for j in _candidate_rows(r, a, spec.jk_max):
        for k in _candidate_rows(s, b, spec.jk_max - j):
            n = angle_count(j, k)
            for ell in range(-n, n + 1):
                if n == 0:
                    beta = 0.0
                else:
                    half = math.pi * ell / (2.0 * n)
                    beta = math.atan2(math.cos(half), math.sin(half))
                candidates.append((a * j, b * k, beta))
    if not candidates:
        return False

    aj = np.array([c[0] for c in candidates])
    bk = np.array([c[1] for c in candidates])
    beta = np.array([c[2] for c in candidates])
    psi = np.linspace(0.0, 2.0 * math.pi, _COARSE_PSI, endpoint=False)

    for px, pw in ((phi_x, phi_w), (-phi_x, -phi_w)):
        ratios = _pair_max_ratio(
            psi[None, :], r, px, s, pw, aj[:, None], bk[:, None], beta[:, None], a, b
        )
        if ratios.min() <= 1.0:
            return True
        span = 2.0 * math.pi / _COARSE_PSI
        order = np.argsort(ratios.min(axis=1))
        for idx in order[:8]:
            if ratios[idx].min() > 2.0:
                break
            center = psi[int(np.argmin(ratios[idx]))]
            lo, hi = center - 1.5 * span, center + 1.5 * span

            def f(p, _i=idx, _px=px, _pw=pw):
                return _pair_max_ratio(p, r, _px, s, _pw, aj[_i], bk[_i], beta[_i], a, b)

            x1 = hi - _GOLDEN * (hi - lo)
            x2 = lo + _GOLDEN * (hi - lo)
            f1, f2 = f(x1), f(x2)
            for _ in range(60):
                if f1 <= f2:
                    hi, x2, f2 = x2, x1, f1
                    x1 = hi - _GOLDEN * (hi - lo)
                    f1 = f(x1)
                else:
                    lo, x1, f1 = x1, x2, f2
                    x2 = lo + _GOLDEN * (hi - lo)
                    f2 = f(x2)
                if min(f1, f2) <= 1.0 + 1e-9:
                    return True
    return False


def lattice_to_csv(table: LatticeTable | Sequence[LatticeAtom], path: str | Path) -> None:
    """Write atoms as CSV with columns j,k,ell,r,s,c,mu."""
    if isinstance(table, LatticeTable):
        rows: Iterator = zip(table.j, table.k, table.ell, table.r, table.s, table.c, table.mu)
    else:
        rows = (
            (t.index.j, t.index.k, t.index.ell, t.point.r, t.point.s, t.point.c, t.mu)
            for t in table
        )
    lines = ["j,k,ell,r,s,c,mu"]
    for j, k, ell, r, s, c, mu in rows:
        lines.append(f"{int(j)},{int(k)},{int(ell)},{r:.17g},{s:.17g},{c:.17g},{mu:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")
