import numpy as np
import pytest

from tmdl.errors import NonHermitianError
from tmdl.hilbert import build_space, h_single_site, operator
from tmdl.params import symmetric_params
from tmdl.spectra import (GroundExpectation, cutoff_converged, eigs_lowest,
                          ground_expectation, low_lying_gap_profile, staircase)

from oracles import jump_positions_g, mu_jump_positions, sector_ground_energies


class TestEigsLowest:
    def test_diagonal(self):
        r = eigs_lowest(np.diag([3.0, 1.0, 2.0]), 2)
        assert np.allclose(r.eigenvalues, [1.0, 2.0])

    def test_pauli_x(self):
        r = eigs_lowest(np.array([[0.0, 1.0], [1.0, 0.0]]), 2)
        assert np.allclose(r.eigenvalues, [-1.0, 1.0])

    def test_site_ground_at_zero_coupling(self):
        s = build_space(2, 3, 3)
        h = h_single_site(s, symmetric_params(g=0.0, n_atoms=2))
        r = eigs_lowest(h, 1)
        assert r.ground_energy == pytest.approx(-1.0, abs=1e-12)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NonHermitianError):
            eigs_lowest(np.array([[0.0, 1.0], [0.0, 0.0]]), 1)

    def test_expectations_attached(self):
        s = build_space(1, 4, 4)
        h = h_single_site(s, symmetric_params(g=0.7, n_atoms=1))
        r = eigs_lowest(h, 3)
        assert set(r.expectations) == {"n_e", "n_e_var", "parity"}
        assert np.all(np.abs(r.expectations["parity"]) <= 1.0 + 1e-9)

    def test_orthonormal_and_residuals(self, rng):
        # also the second-method agreement check on random Hermitian matrices
        for _ in range(10):
            m = rng.normal(size=(50, 50)) + 1j * rng.normal(size=(50, 50))
            m = m + m.conj().T
            dense = np.linalg.eigvalsh(m)[:4]
            r = eigs_lowest(m, 4)
            assert np.allclose(r.eigenvalues, dense, atol=1e-9)
            gram = r.eigenvectors.conj().T @ r.eigenvectors
            assert np.abs(gram - np.eye(4)).max() < 1e-10

    def test_sparse_path_matches_dense(self):
        s = build_space(1, 16, 16)            # dim 578 > dense threshold
        h = h_single_site(s, symmetric_params(g=1.0, n_atoms=1))
        r = eigs_lowest(h, 2)
        dense = np.linalg.eigvalsh(h.toarray())[:2]
        assert np.allclose(r.eigenvalues, dense, atol=1e-9)


class TestGroundExpectation:
    @pytest.mark.parametrize("n_atoms", [1, 3])
    def test_vacuum_value(self, n_atoms):
        s = build_space(n_atoms, 3, 3)
        h = h_single_site(s, symmetric_params(g=0.0, n_atoms=n_atoms))
        r = ground_expectation(h, operator(s, "N_e"))
        assert isinstance(r, GroundExpectation)
        assert r.value == pytest.approx(-n_atoms / 2.0, abs=1e-10)

    def test_unchanged_at_strong_coupling_for_single_atom(self):
        s = build_space(1, 16, 16)
        h = h_single_site(s, symmetric_params(g=1.0, n_atoms=1))
        r = ground_expectation(h, operator(s, "N_e"))
        assert r.value == pytest.approx(-0.5, abs=1e-8)

    def test_dimension_mismatch(self):
        s = build_space(1, 2, 2)
        h = h_single_site(s, symmetric_params(g=0.1, n_atoms=1))
        with pytest.raises(ValueError):
            ground_expectation(h, np.eye(3))


class TestStaircase:
    def test_single_atom_flat(self):
        c = staircase(symmetric_params(g=0.0, n_atoms=1), "g",
                      np.linspace(0, 2, 41), n_max=16)
        assert len(c.jumps) == 0
        assert np.abs(c.n + 0.5).max() < 1e-8

    def test_three_atoms_jump_against_oracle(self):
        c = staircase(symmetric_params(g=0.0, n_atoms=3), "g",
                      np.linspace(0.5, 1.2, 36), n_max=16)
        assert len(c.jumps) == 1
        (g_star,) = jump_positions_g(3, 0.5, 1.2, m_c=20, m_d=20)
        assert c.jumps[0].position == pytest.approx(g_star, abs=2e-4)
        assert c.jumps[0].label_above - c.jumps[0].label_below == 1

    def test_plateaus_flat_between_jumps(self):
        c = staircase(symmetric_params(g=0.0, n_atoms=3), "g",
                      np.linspace(0.0, 1.2, 25), n_max=16)
        labels = np.round(c.n + 1.5)
        for lab in np.unique(labels):
            vals = c.n[labels == lab]
            assert vals.max() - vals.min() < 1e-8

    def test_plateau_quantization_variance(self):
        c = staircase(symmetric_params(g=0.0, n_atoms=2), "g",
                      np.linspace(0.0, 1.2, 13), n_max=14)
        assert np.all(c.quantized)
        assert c.n_variance.max() < 1e-8

    def test_mu_staircase_against_oracle(self):
        p = symmetric_params(g=1.0, n_atoms=1)
        c = staircase(p, "mu", np.linspace(0.0, 0.8, 33), n_max=18)
        mu_star = mu_jump_positions(1.0, 1.0, 1.0, 1, q_max=2)
        assert len(c.jumps) >= 2
        assert c.jumps[0].position == pytest.approx(mu_star[0], abs=2e-4)
        assert c.jumps[1].position == pytest.approx(mu_star[1], abs=2e-4)
        # plateaus at successive half-integers
        assert set(np.round(c.plateau_values() + 0.5)) >= {0.0, 1.0, 2.0}

    def test_dicke_curve_is_smooth(self):
        c = staircase(symmetric_params(g=0.0, n_atoms=3), "g",
                      np.linspace(0.0, 1.5, 16), n_max=14, model="dicke")
        assert len(c.jumps) == 0
        assert c.n_variance[-1] > 1e-4       # no exact plateau

    def test_rejects_descending_grid(self):
        with pytest.raises(ValueError):
            staircase(symmetric_params(g=0.0, n_atoms=1), "g", [1.0, 0.5])


class TestGapProfile:
    def test_free_spectrum_gap(self):
        p = symmetric_params(g=0.0, n_atoms=1)
        prof = low_lying_gap_profile(p, [0.0, 0.1], n_max=10)
        assert prof.gap1[0] == pytest.approx(1.0, abs=1e-10)

    def test_adjacent_labels_along_profile(self):
        p = symmetric_params(g=0.0, n_atoms=1)
        prof = low_lying_gap_profile(p, np.linspace(0.5, 2.0, 7), n_max=20)
        assert np.abs(np.abs(prof.n1 - prof.n0) - 1.0).max() < 1e-8

    def test_quasi_degeneracy_develops(self):
        p = symmetric_params(g=0.0, n_atoms=1)
        prof = low_lying_gap_profile(p, [2.0, 3.5], n_max=40)
        ratio = prof.gap1 / prof.gap2
        assert ratio[1] < ratio[0]
        assert ratio[1] < 0.1                 # deep ultrastrong regime


class TestCutoffConverged:
    def test_converges_immediately_at_zero_coupling(self):
        p = symmetric_params(g=0.0, n_atoms=1)

        def ground(params, space):
            h = h_single_site(space, params)
            return eigs_lowest(h, 1).ground_energy

        value, n_used = cutoff_converged(p, ground)
        assert value == pytest.approx(-0.5, abs=1e-12)
        assert n_used == 0

    def test_expectation_stable_between_cutoffs(self):
        p = symmetric_params(g=1.0, n_atoms=1)

        def n_e(params, space):
            h = h_single_site(space, params)
            r = eigs_lowest(h, 1, compute_expectations=True)
            return float(r.expectations["n_e"][0])

        value, _ = cutoff_converged(p, n_e, rel_tol=1e-8)
        assert value == pytest.approx(-0.5, abs=1e-7)
        v16 = n_e(p, build_space(1, 16, 16))
        v32 = n_e(p, build_space(1, 32, 32))
        assert abs(v16 - v32) < 1e-8

    def test_ceiling_reached_before_convergence(self):
        from tmdl.errors import CutoffError

        p = symmetric_params(g=1.0, n_atoms=1)

        def never_converges(params, space):
            return float(space.n_max1)

        with pytest.raises(CutoffError):
            cutoff_converged(p, never_converges, ceiling=200)

    def test_strong_coupling_needs_larger_cutoff(self):
        p = symmetric_params(g=2.0, n_atoms=3)

        def ground(params, space):
            return eigs_lowest(h_single_site(space, params), 1).ground_energy

        value, n_used = cutoff_converged(p, ground, rel_tol=1e-8)
        assert n_used >= 8
        oracle = sector_ground_energies(2.0, 1.0, 1.0, 3, m_c=34, m_d=34)
        assert value == pytest.approx(min(oracle.values()), rel=1e-6)


class TestVariationalMonotonicity:
    def test_ground_energy_non_increasing_in_cutoff(self):
        p = symmetric_params(g=1.5, n_atoms=2)
        energies = []
        for nm in (4, 8, 16, 24):
            s = build_space(2, nm, nm)
            energies.append(eigs_lowest(h_single_site(s, p), 1).ground_energy)
        diffs = np.diff(energies)
        assert np.all(diffs <= 1e-12)
