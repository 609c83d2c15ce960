from dataclasses import replace

import numpy as np
import pytest
import sympy

from tmdl.circuit import (CircuitParams, Composites, composites,
                          effective_params, tune_degenerate)


def sample_circuit(**overrides):
    # natural units (phi0 = e = 1) keep both couplings on comparable scales
    base = dict(
        L1=2.0, L2=3.0, La=1.5, Lb=2.5,
        Ca=0.4, Cb=0.3, Cg=0.05, CJ=0.02,
        D=2.0, xs=0.4, matrix_element=0.2, omega0=1.5,
        phi0=1.0, e_charge=1.0,
    )
    base.update(overrides)
    return CircuitParams(**base)


def sympy_composites(L1, L2, La) -> dict:
    """Independent symbolic evaluation of the inductance polynomials."""
    l1, l2, la = sympy.symbols("l1 l2 la", positive=True)
    ls = l2 * la + l1 * la + l1 * l2
    lt_j = (l1**2 * l2**3 + 3 * l1**2 * l2**2 * la + 3 * l1**2 * l2**2 * la
            + 3 * l1**2 * l2 * la**2 + l1**2 * la**3 + l1 * l2**3 * la
            + 2 * l1 * l2**2 * la**2 + l1 * l2 * la**3
            - 2 * ls * l1 * l2**2 - 4 * ls * l1 * l2 * la - 2 * ls * l1 * la**2
            + ls**2 * l2 + ls**2 * la)
    lt_s = (l1**2 * l2**3 + l1**2 * l2**2 * la + l1 * l2**3 * la
            - 2 * ls * l1 * l2**2 + ls**2 * l2)
    lt_c = (4 * ls * l1 * l2**2 + 4 * ls * l1 * l2 * la - 2 * l1**2 * l2**3
            - 4 * l1**2 * l2**2 * la - 2 * l1**2 * l2 * la**2
            - 2 * l1 * l2**3 * la - 2 * l1 * l2**2 * la**2 - 2 * ls**2 * l2)
    subs = {l1: L1, l2: L2, la: La}
    # expand first so the arithmetic grouping differs from the direct path
    return {
        "l_sigma": float(sympy.expand(ls).evalf(30, subs=subs)),
        "lt_j": float(sympy.expand(lt_j).evalf(30, subs=subs)),
        "lt_s": float(sympy.expand(lt_s).evalf(30, subs=subs)),
        "lt_c": float(sympy.expand(lt_c).evalf(30, subs=subs)),
    }


class TestComposites:
    def test_equal_inductances_closed_forms(self):
        c = sample_circuit(L1=2e-9, L2=2e-9, La=2e-9)
        comp = composites(c)
        L = 2e-9
        assert comp.l_sigma == pytest.approx(3 * L**2, rel=1e-12)
        assert comp.lt_s == pytest.approx(5 * L**5, rel=1e-12)
        assert comp.lt_j == pytest.approx(9 * L**5, rel=1e-12)
        assert comp.lt_c == pytest.approx(-6 * L**5, rel=1e-12)
        assert composites(c, dedup_lt_j=True).lt_j == pytest.approx(6 * L**5,
                                                                    rel=1e-12)

    def test_c_sigma_arithmetic(self):
        c = sample_circuit(Cg=0.5, Ca=0.5, Cb=2.0, CJ=3.0)
        assert composites(c).c_sigma == pytest.approx(2 + 3 + 6, rel=1e-12)

    def test_dual_evaluation_against_sympy(self, rng):
        for _ in range(20):
            L1, L2, La = np.exp(rng.uniform(np.log(0.1), np.log(10.0), 3))
            c = sample_circuit(L1=L1, L2=L2, La=La)
            comp = composites(c)
            ref = sympy_composites(L1, L2, La)
            for key in ref:
                assert getattr(comp, key) == pytest.approx(ref[key], rel=1e-12)

    def test_e_q_definition(self):
        c = sample_circuit()
        comp = composites(c)
        assert comp.e_q == pytest.approx(
            (c.Cg + c.Ca + c.Cb) / (2 * comp.c_sigma), rel=1e-14)


class TestEffectiveParams:
    def test_atom_at_midpoint_kills_charge_coupling(self):
        eff = effective_params(sample_circuit(xs=1.0, D=2.0))
        assert eff.g2 == 0.0
        assert eff.g1 != 0.0

    def test_atom_at_end_kills_flux_coupling(self):
        eff_end = effective_params(sample_circuit(xs=2.0 * (1 - 1e-15), D=2.0))
        eff_mid = effective_params(sample_circuit(xs=0.5, D=2.0))
        assert abs(eff_end.g1) < 1e-12 * abs(eff_mid.g1)

    def test_matched_lines_give_equal_frequencies(self):
        c = sample_circuit(La=2.0, Ca=0.3, Lb=3.0, Cb=0.2)
        eff = effective_params(c)
        assert eff.omega1 == pytest.approx(eff.omega2, rel=1e-12)
        assert eff.omega1 == pytest.approx(
            np.pi / (c.D * np.sqrt(2.0 * 0.3)), rel=1e-12)

    def test_impedance_scaling_leaves_frequencies(self, rng):
        c = sample_circuit()
        base = effective_params(c)
        for s in (0.5, 2.0, 7.3):
            scaled = replace(c, L1=c.L1 * s, L2=c.L2 * s, La=c.La * s,
                             Lb=c.Lb * s, Ca=c.Ca / s, Cb=c.Cb / s,
                             Cg=c.Cg / s, CJ=c.CJ / s)
            eff = effective_params(scaled)
            assert eff.omega1 == pytest.approx(base.omega1, rel=1e-12)
            assert eff.omega2 == pytest.approx(base.omega2, rel=1e-12)
            # both couplings rescale identically, preserving their ratio
            assert eff.g1 / base.g1 == pytest.approx(eff.g2 / base.g2, rel=1e-9)

    def test_positivity_validation(self):
        with pytest.raises(ValueError):
            sample_circuit(La=-1.0)
        with pytest.raises(ValueError):
            sample_circuit(xs=3.0, D=2.0)


class TestTuneDegenerate:
    TARGET_W = 1.0
    TARGET_G = 0.2

    def seed_degenerate(self):
        # tune resonator-b elements and the atom position onto both
        # degeneracy lines
        c = sample_circuit()
        res = tune_degenerate(c, self.TARGET_W, self.TARGET_G,
                              ["Lb", "Cb", "xs"])
        assert res.converged, res.message
        return res.circuit

    def test_already_degenerate_seed_unchanged(self):
        tuned = self.seed_degenerate()
        res = tune_degenerate(tuned, self.TARGET_W, self.TARGET_G, ["Lb", "xs"])
        assert res.converged
        assert res.circuit is tuned           # early return, untouched object
        assert res.message == "seed already degenerate"

    def test_reconverges_after_perturbation(self):
        tuned = self.seed_degenerate()
        bumped = replace(tuned, Lb=1.05 * tuned.Lb)
        r0 = effective_params(bumped)
        assert abs(r0.omega1 - r0.omega2) / r0.omega1 > 1e-6
        res = tune_degenerate(bumped, self.TARGET_W, self.TARGET_G, ["Lb", "xs"])
        assert res.converged, res.message
        eff = res.effective
        assert abs(eff.omega1 - eff.omega2) / self.TARGET_W < 1e-6
        assert abs(abs(eff.g1) - abs(eff.g2)) / self.TARGET_G < 1e-6

    def test_no_free_parameters_rejected(self):
        with pytest.raises(ValueError):
            tune_degenerate(sample_circuit(), 1.0, 0.2, [])
        with pytest.raises(ValueError):
            tune_degenerate(sample_circuit(), 1.0, 0.2, ["Lb"])
        with pytest.raises(ValueError):
            tune_degenerate(sample_circuit(), 1.0, 0.2, ["Lb", "bogus"])
