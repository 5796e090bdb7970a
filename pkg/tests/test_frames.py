"""Frame construction, analysis/synthesis, CG reconstruction and empirical
frame bounds."""

import math

import numpy as np
import pytest

from radial_gabor.frames import (
    CoeffSeq,
    analyze,
    build_frame,
    coeffs_to_csv,
    frame_bounds,
    frame_operator,
    reconstruct,
    synthesize,
)
from radial_gabor.lattice import LatticeIndex, LatticeSpec
from radial_gabor.profiles import (
    GaussianSpec,
    inner,
    make_profile,
    norm,
    normalized_gaussian_window,
)
from radial_gabor.stft import OrbitPoint, radial_stft, rot_avg_shift


@pytest.fixture(scope="module")
def frame8():
    window = normalized_gaussian_window(2)
    return build_frame(window, LatticeSpec(a=0.5, b=0.5, d=2, jk_max=8), normalized=True)


@pytest.fixture(scope="module")
def frame12():
    window = normalized_gaussian_window(2)
    return build_frame(window, LatticeSpec(a=0.5, b=0.5, d=2, jk_max=12), normalized=True)


class TestBuildFrame:
    def test_minimal_frame_contains_window(self):
        window = normalized_gaussian_window(2)
        fr = build_frame(window, LatticeSpec(a=0.5, b=0.5, d=2, jk_max=1), normalized=False)
        assert len(fr) == 3
        assert np.max(np.abs(fr.atom_matrix[0] - window.values)) < 1e-12

    def test_normalized_scaling(self, frame8):
        window = frame8.window
        unnorm = build_frame(window, LatticeSpec(a=0.5, b=0.5, d=2, jk_max=3), normalized=False)
        renorm = build_frame(window, LatticeSpec(a=0.5, b=0.5, d=2, jk_max=3), normalized=True)
        scale = np.sqrt(unnorm.table.mu)
        assert np.max(np.abs(renorm.atom_matrix - scale[:, None] * unnorm.atom_matrix)) < 1e-12

    def test_matches_reference_shift_path(self, frame8):
        tab = frame8.table
        rng = np.random.default_rng(0)
        for i in rng.integers(0, len(frame8), 6):
            p = OrbitPoint(float(tab.r[i]), float(tab.s[i]), float(tab.c[i]))
            ref = rot_avg_shift(frame8.window, p).values
            phase = np.exp(1j * math.pi * p.r * p.s * p.c)
            expected = math.sqrt(tab.mu[i]) * phase * ref
            assert np.max(np.abs(frame8.atom_matrix[i] - expected)) < 1e-12

    def test_rejects_zero_window(self):
        window = normalized_gaussian_window(2)
        zero = window.with_values(np.zeros_like(window.values))
        with pytest.raises(ValueError):
            build_frame(zero, LatticeSpec(a=0.5, b=0.5, d=2, jk_max=2))

    def test_complex_window_conjugate_pairs_still_exact(self):
        # complex windows bypass the conjugate shortcut; spot-check one ring
        window = normalized_gaussian_window(2)
        cw = window.with_values(window.values * np.exp(0.3j))
        fr = build_frame(cw, LatticeSpec(a=0.5, b=0.5, d=2, jk_max=3), normalized=True)
        tab = fr.table
        i = int(np.flatnonzero((tab.j == 1) & (tab.k == 1) & (tab.ell == -1))[0])
        p = OrbitPoint(float(tab.r[i]), float(tab.s[i]), float(tab.c[i]))
        phase = np.exp(1j * math.pi * p.r * p.s * p.c)
        expected = math.sqrt(tab.mu[i]) * phase * rot_avg_shift(cw, p).values
        assert np.max(np.abs(fr.atom_matrix[i] - expected)) < 1e-12


class TestAnalyzeSynthesize:
    def test_analyze_zero(self, frame8):
        zero = frame8.window.with_values(np.zeros_like(frame8.window.values))
        coeffs = analyze(zero, frame8)
        assert all(v == 0.0 for v in coeffs.entries.values())

    def test_analyze_matches_radial_stft(self, frame8):
        f = make_profile(2, 8.0, 1024, GaussianSpec(2.0 * math.pi))
        coeffs = analyze(f, frame8)
        tab = frame8.table
        for i in (0, 5, 17, 40):
            idx = LatticeIndex(int(tab.j[i]), int(tab.k[i]), int(tab.ell[i]))
            p = OrbitPoint(float(tab.r[i]), float(tab.s[i]), float(tab.c[i]))
            expected = math.sqrt(tab.mu[i]) * radial_stft(f, frame8.window, p)
            assert coeffs.entries[idx] == pytest.approx(expected, abs=1e-10)

    def test_analyze_atom_gives_squared_norm(self, frame8):
        i0 = 7
        atom = frame8.window.with_values(frame8.atom_matrix[i0])
        coeffs = analyze(atom, frame8)
        tab = frame8.table
        idx = LatticeIndex(int(tab.j[i0]), int(tab.k[i0]), int(tab.ell[i0]))
        assert coeffs.entries[idx] == pytest.approx(norm(atom) ** 2, rel=1e-10)

    def test_window_coefficient_at_origin(self, frame8):
        coeffs = analyze(frame8.window, frame8)
        assert coeffs.entries[LatticeIndex(0, 0, 0)] == pytest.approx(1.0, abs=1e-9)

    def test_synthesize_unit_coefficient(self, frame8):
        unit = CoeffSeq({LatticeIndex(0, 0, 0): 1.0 + 0.0j})
        out = synthesize(unit, frame8)
        assert np.max(np.abs(out.values - frame8.window.values)) < 1e-12

    def test_synthesize_unknown_key_rejected(self, frame8):
        bad = CoeffSeq({LatticeIndex(20, 20, 0): 1.0 + 0.0j})
        with pytest.raises(KeyError):
            synthesize(bad, frame8)

    def test_synthesis_of_analysis_is_frame_operator(self, frame8):
        f = make_profile(2, 8.0, 1024, GaussianSpec(1.3))
        via_coeffs = synthesize(analyze(f, frame8), frame8)
        direct = frame_operator(f, frame8)
        assert np.max(np.abs(via_coeffs.values - direct.values)) < 1e-12

    def test_synthesize_linearity(self, frame8):
        rng = np.random.default_rng(1)
        n = len(frame8)
        tab = frame8.table
        indices = [
            LatticeIndex(int(j), int(k), int(ell))
            for j, k, ell in zip(tab.j, tab.k, tab.ell)
        ]
        c1 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        c2 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        a, b = 0.3 - 1.1j, 0.8 + 0.2j
        s1 = synthesize(CoeffSeq(dict(zip(indices, c1))), frame8).values
        s2 = synthesize(CoeffSeq(dict(zip(indices, c2))), frame8).values
        s12 = synthesize(CoeffSeq(dict(zip(indices, a * c1 + b * c2))), frame8).values
        assert np.max(np.abs(s12 - (a * s1 + b * s2))) < 1e-10


class TestFrameOperator:
    def test_positive(self, frame8):
        rng = np.random.default_rng(2)
        base = frame8.window
        for _ in range(10):
            f = base.with_values(
                rng.standard_normal(base.radii.size) + 1j * rng.standard_normal(base.radii.size)
            )
            assert inner(frame_operator(f, frame8), f).real >= -1e-10

    def test_self_adjoint(self, frame8):
        rng = np.random.default_rng(3)
        base = frame8.window
        for _ in range(5):
            f = base.with_values(
                rng.standard_normal(base.radii.size) + 1j * rng.standard_normal(base.radii.size)
            )
            h = base.with_values(
                rng.standard_normal(base.radii.size) + 1j * rng.standard_normal(base.radii.size)
            )
            lhs = inner(frame_operator(f, frame8), h)
            rhs = np.conj(inner(frame_operator(h, frame8), f))
            assert lhs == pytest.approx(rhs, abs=1e-10 * max(1.0, abs(rhs)))

    def test_rayleigh_quotient_of_window_within_bounds(self, frame12):
        lo, hi = frame_bounds(frame12, test_dim=6)
        g = frame12.window
        rq = inner(frame_operator(g, frame12), g).real / norm(g) ** 2
        assert lo - 1e-9 <= rq <= hi + 1e-9


class TestReconstruct:
    def test_zero_input(self, frame8):
        zero = frame8.window.with_values(np.zeros_like(frame8.window.values))
        res = reconstruct(zero, frame8, tol=1e-6)
        assert res.relative_error == 0.0
        assert res.iterations == 0
        assert res.converged

    def test_span_consistency(self, frame8):
        rng = np.random.default_rng(3)
        coeffs = rng.standard_normal(len(frame8)) + 1j * rng.standard_normal(len(frame8))
        f = frame8.window.with_values(frame8._synthesize_values(coeffs))
        res = reconstruct(f, frame8, tol=1e-6, max_iter=3000)
        assert res.relative_error <= 10.0 * 1e-6

    def test_dilated_gaussian(self, frame12):
        f = make_profile(2, 8.0, 1024, GaussianSpec(2.0 * math.pi))
        res = reconstruct(f, frame12, tol=1e-6, max_iter=1500)
        assert res.relative_error < 1e-3
        assert np.all(np.diff(res.error_history) <= 1e-12)

    def test_error_history_monotone_on_random_target(self, frame8):
        rng = np.random.default_rng(4)
        f = frame8.window.with_values(
            rng.standard_normal(1024) + 1j * rng.standard_normal(1024)
        )
        res = reconstruct(f, frame8, tol=1e-8, max_iter=200)
        assert np.all(np.diff(res.error_history) <= 1e-12)

    def test_invalid_tolerance(self, frame8):
        with pytest.raises(ValueError):
            reconstruct(frame8.window, frame8, tol=0.0)


class TestFrameBounds:
    def test_reference_configuration(self, frame12):
        lo, hi = frame_bounds(frame12, test_dim=6)
        assert hi >= lo > 0.0
        assert hi / lo < 10.0

    def test_single_direction_collapses(self, frame12):
        lo, hi = frame_bounds(frame12, test_dim=1)
        g = frame12.window
        rq = inner(frame_operator(g, frame12), g).real / norm(g) ** 2
        assert lo == pytest.approx(hi, rel=1e-10)
        assert lo == pytest.approx(rq, rel=1e-9)

    def test_matches_dense_eigensolver(self, frame12):
        lo, hi = frame_bounds(frame12, test_dim=5)
        from radial_gabor.frames import _test_subspace
        from radial_gabor.profiles import sphere_area

        basis = _test_subspace(frame12, 5)
        images = np.array(
            [frame12._synthesize_values(frame12._analyze_values(e)) for e in basis]
        )
        area = sphere_area(2)
        m = area * (np.conj(basis) @ (frame12.window.weights[:, None] * images.T))
        eig = np.linalg.eigvalsh(0.5 * (m + np.conj(m.T)))
        assert lo == pytest.approx(eig[0], rel=1e-8)
        assert hi == pytest.approx(eig[-1], rel=1e-8)

    def test_truncation_stability(self):
        window = normalized_gaussian_window(2)
        lo1, hi1 = frame_bounds(
            build_frame(window, LatticeSpec(a=0.5, b=0.5, d=2, jk_max=8)), test_dim=4
        )
        lo2, hi2 = frame_bounds(
            build_frame(window, LatticeSpec(a=0.5, b=0.5, d=2, jk_max=16)), test_dim=4
        )
        assert abs(lo2 - lo1) / lo2 < 0.05
        assert abs(hi2 - hi1) / hi2 < 0.05

    def test_invalid_test_dim(self, frame8):
        with pytest.raises(ValueError):
            frame_bounds(frame8, test_dim=0)
        with pytest.raises(ValueError):
            frame_bounds(frame8, test_dim=len(frame8) + 1)


class TestFrameNormEquivalences:
    def test_parseval_sandwich_on_subspace(self, frame12):
        from radial_gabor.frames import _test_subspace

        lo, hi = frame_bounds(frame12, test_dim=5)
        basis = _test_subspace(frame12, 5)
        rng = np.random.default_rng(5)
        for _ in range(100):
            c = rng.standard_normal(5) + 1j * rng.standard_normal(5)
            values = c @ basis
            f = frame12.window.with_values(values)
            total = float(np.sum(np.abs(frame12._analyze_values(f.values)) ** 2))
            nf2 = norm(f) ** 2
            assert lo * nf2 - 1e-9 <= total <= hi * nf2 + 1e-9

    def test_weighted_coefficient_norm_equivalence(self, frame12):
        # sum |lambda_i|^2 mu_i over the plain atoms equals the normalized
        # analysis energy, with ratio spread bounded by the measured B/A
        from radial_gabor.frames import _test_subspace

        lo, hi = frame_bounds(frame12, test_dim=5)
        basis = _test_subspace(frame12, 5)
        unnorm = build_frame(
            frame12.window, LatticeSpec(a=0.5, b=0.5, d=2, jk_max=12), normalized=False
        )
        mu = unnorm.table.mu
        rng = np.random.default_rng(6)
        ratios = []
        for _ in range(40):
            c = rng.standard_normal(5) + 1j * rng.standard_normal(5)
            f = frame12.window.with_values(c @ basis)
            lam = unnorm._analyze_values(f.values)
            ratios.append(float(np.sum(np.abs(lam) ** 2 * mu)) / norm(f) ** 2)
        assert max(ratios) / min(ratios) <= hi / lo * (1.0 + 1e-9)


class TestCoeffCsv:
    def test_export_schema(self, frame8, tmp_path):
        f = make_profile(2, 8.0, 1024, GaussianSpec(2.0 * math.pi))
        coeffs = analyze(f, frame8)
        path = tmp_path / "coeffs.csv"
        coeffs_to_csv(coeffs, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "j,k,ell,re,im"
        assert len(lines) - 1 == len(frame8)
