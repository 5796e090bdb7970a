"""Embedding and compactness classification for radial modulation spaces,
with the sequence-space machinery behind it.

The source and target spaces carry weights (1 + |omega|)^s and
(1 + |omega|)^t; with alpha = 1/p - 1/q the embedding is continuous iff
t - s <= alpha (d - 1) and compact iff additionally p < q and the
inequality is strict.  All exponent arithmetic is written so that exact
rational inputs (``fractions.Fraction``) pass through unharmed, and
p = infinity or q = infinity contribute 1/inf = 0 exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .lattice import LatticeAtom, LatticeTable
from .profiles import sphere_area

__all__ = [
    "EmbeddingStatus",
    "EmbeddingQuery",
    "EmbeddingVerdict",
    "classify_embedding",
    "h_sequence",
    "rearrange",
    "carl_exponent",
    "entropy_exponent",
    "approx_number_exponent",
    "PgqDiagnostic",
    "pgq_diagnostic",
    "sigma_tail",
    "fit_decay_slope",
]


def _inv(p):
    """1/p with 1/inf = 0 exactly; keeps Fractions exact."""
    if p == math.inf:
        return 0
    return 1 / p


def _validate_exponent(p, name: str) -> None:
    if p != math.inf and not 1 <= p:
        raise ValueError(f"{name} must lie in [1, inf]")


class EmbeddingStatus(str, Enum):
    NOT_EMBEDDED = "NotEmbedded"
    CONTINUOUS = "Continuous"
    COMPACT = "Compact"


@dataclass(frozen=True)
class EmbeddingQuery:
    """Source space (p, weight exponent s) against target (q, t) in
    dimension d."""

    p: float
    q: float
    s: float
    t: float
    d: int

    def __post_init__(self) -> None:
        _validate_exponent(self.p, "p")
        _validate_exponent(self.q, "q")
        if self.d < 2:
            raise ValueError("d must be >= 2")


@dataclass(frozen=True)
class EmbeddingVerdict:
    status: EmbeddingStatus
    alpha: float
    threshold: float


def classify_embedding(query: EmbeddingQuery) -> EmbeddingVerdict:
    """Exact-arithmetic embedding decision for p <= q.

    For p > q the sequence-space route is integral-based; use
    ``pgq_diagnostic``.
    """
    p, q = query.p, query.q
    if p > q:
        raise ValueError("classify_embedding requires p <= q; use pgq_diagnostic for p > q")
    alpha = _inv(p) - _inv(q)
    threshold = alpha * (query.d - 1)
    diff = query.t - query.s
    if diff > threshold:
        status = EmbeddingStatus.NOT_EMBEDDED
    elif p < q and diff < threshold:
        status = EmbeddingStatus.COMPACT
    else:
        status = EmbeddingStatus.CONTINUOUS
    return EmbeddingVerdict(status, alpha, threshold)


def h_sequence(
    lat: LatticeTable | list[LatticeAtom],
    query: EmbeddingQuery,
    b_step: float,
) -> np.ndarray:
    """Weight-ratio sequence (1 + b k)^(t-s) mu^(-alpha) on the lattice;
    bounded iff the embedding is continuous, vanishing iff compact."""
    alpha = float(_inv(query.p) - _inv(query.q))
    if alpha < 0.0:
        raise ValueError("h_sequence requires p <= q")
    if isinstance(lat, LatticeTable):
        k = lat.k.astype(float)
        mu = lat.mu
    else:
        k = np.array([a.index.k for a in lat], dtype=float)
        mu = np.array([a.mu for a in lat])
    return (1.0 + b_step * k) ** (query.t - query.s) * mu ** (-alpha)


def rearrange(v) -> np.ndarray:
    """Non-increasing rearrangement; ties keep their original order."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError("rearrange expects a 1-d sequence")
    if np.any(v < 0.0):
        raise ValueError("rearrange expects nonnegative entries")
    return v[np.argsort(-v, kind="stable")]


def carl_exponent(p, q, r):
    """Entropy-number exponent 1/s = 1/r + 1/p - 1/q for the embedding
    l^p -> l^q_w with a weight in the Lorentz space of exponent r."""
    _validate_exponent(p, "p")
    _validate_exponent(q, "q")
    if not r > 0:
        raise ValueError("r must be positive")
    return 1 / r + _inv(p) - _inv(q)


def entropy_exponent(p, q, r):
    """Entropy-number decay exponent of the radial modulation-space
    embedding when the inverse measure sequence decays like n^(-1/r).

    The embedding weight is the alpha power of the inverse measures, so its
    Lorentz exponent is r / alpha and the composed rate is
    (1/p - 1/q) (1 + 1/r); with r = 3/(d-1) this is (d+2)/3 (1/p - 1/q).
    """
    _validate_exponent(p, "p")
    _validate_exponent(q, "q")
    if not r > 0:
        raise ValueError("r must be positive")
    if p > q:
        raise ValueError("entropy_exponent requires p <= q")
    alpha = _inv(p) - _inv(q)
    if alpha == 0:
        return 0 * alpha
    return carl_exponent(p, q, r / alpha)


def approx_number_exponent(p, q, d):
    """Approximation-number decay exponent (d-1)/3 (1/p - 1/q)."""
    _validate_exponent(p, "p")
    _validate_exponent(q, "q")
    if p > q:
        raise ValueError("approx_number_exponent requires p <= q")
    return (_inv(p) - _inv(q)) * (d - 1) / 3


@dataclass(frozen=True)
class PgqDiagnostic:
    value: float
    growth_ratio: float
    beta: float


def pgq_diagnostic(p: float, q: float, s: float, t: float, d: int, radius: float) -> PgqDiagnostic:
    """Integral compactness diagnostic for the reversed exponent order
    p > q, with beta = 1/q - 1/p.

    Integrates ((1 + |x| + |omega|)^(t-s))^(1/beta) over |x|, |omega| <=
    radius (the frequency-only weight family is never integrable here, so
    the space variable must be punished as well).  Reduces to a 2-d radial
    integral; the returned growth ratio value(R)/value(R/2) is ~1 for a
    convergent tail and ~2^(2d) for a constant integrand.
    """
    _validate_exponent(p, "p")
    _validate_exponent(q, "q")
    if not p > q:
        raise ValueError("pgq_diagnostic requires p > q")
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    beta = float(_inv(q) - _inv(p))
    gamma = (t - s) / beta

    def value(rad: float) -> float:
        nodes, weights = np.polynomial.legendre.leggauss(96)
        u = 0.5 * rad * (nodes + 1.0)
        wu = 0.5 * rad * weights
        ring = wu * u ** (d - 1)
        grid = (1.0 + u[:, None] + u[None, :]) ** gamma
        return sphere_area(d) ** 2 * float(ring @ grid @ ring)

    v_full = value(radius)
    v_half = value(0.5 * radius)
    return PgqDiagnostic(v_full, v_full / v_half, beta)


def sigma_tail(b, n: int, q) -> float:
    """Tail q-norm (sum_{k >= n} b_k^q)^(1/q) of a non-increasing sequence,
    1-based in n; the sup of the tail when q is infinite."""
    b = np.asarray(b, dtype=float)
    if n < 1:
        raise ValueError("n must be >= 1")
    if np.any(np.diff(b) > 0.0):
        raise ValueError("sigma_tail expects a non-increasing sequence")
    tail = b[n - 1 :]
    if tail.size == 0:
        return 0.0
    if q == math.inf:
        return float(tail[0])
    return float(np.sum(tail ** float(q)) ** (1.0 / float(q)))


def fit_decay_slope(n_values, values) -> tuple[float, float]:
    """Least-squares slope of log(values) against log(n) with the rms
    residual of the fit."""
    n_values = np.asarray(n_values, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = (n_values > 0) & (values > 0)
    if keep.sum() < 2:
        return math.nan, math.nan
    x = np.log(n_values[keep])
    y = np.log(values[keep])
    coeffs, res = np.polyfit(x, y, 1, full=True)[:2]
    rms = math.sqrt(float(res[0]) / x.size) if res.size else 0.0
    return float(coeffs[0]), rms
