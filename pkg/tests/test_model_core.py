"""Covariant model core: tensor algebra, contractions, power counting."""

import numpy as np
import pytest
from fractions import Fraction
from hypothesis import given, settings
from hypothesis import strategies as st

from dipole_loop.core import (
    METRIC,
    AtomPair,
    DipoleTensor,
    FieldStrength,
    Metric,
    classify_renormalizability,
    contractions,
    dipole_from_moment,
    engineering_dimension,
    gamma_sq_dot,
    minkowski_dot,
)
from dipole_loop.units import EV_SI, HBAR_SI, C_SI, UnitSystem


finite = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False, width=64)


def antisym(entries):
    """Build a 4x4 antisymmetric matrix from 6 upper-triangle entries."""
    m = np.zeros((4, 4))
    (m[0, 1], m[0, 2], m[0, 3], m[1, 2], m[1, 3], m[2, 3]) = entries
    return m - m.T


def boost_x(eta: float) -> np.ndarray:
    L = np.eye(4)
    L[0, 0] = L[1, 1] = np.cosh(eta)
    L[0, 1] = L[1, 0] = -np.sinh(eta)
    return L


class TestMetric:
    def test_signature(self):
        assert np.array_equal(METRIC.g, np.diag([-1.0, 1.0, 1.0, 1.0]))

    def test_lower_raise_roundtrip(self):
        rng = np.random.default_rng(3)
        t = rng.normal(size=(4, 4))
        assert np.allclose(METRIC.raise_(METRIC.lower(t)), t)

    def test_planar_metric(self):
        m = Metric(2)
        assert m.dim == 3
        assert np.array_equal(m.g, np.diag([-1.0, 1.0, 1.0]))

    def test_minkowski_dot(self):
        p = np.array([2.0, 1.0, 0.0, 0.0])
        assert minkowski_dot(p, p) == pytest.approx(-3.0)


class TestDipoleTensor:
    def test_rejects_symmetric_part(self):
        m = np.zeros((4, 4))
        m[0, 1] = 1.0  # missing the - transpose
        with pytest.raises(ValueError, match="antisymmetric"):
            DipoleTensor(m)

    def test_components_frozen(self):
        gamma = DipoleTensor(antisym([1.0, 0, 0, 0, 0, 0]))
        with pytest.raises(ValueError):
            gamma.components[0, 1] = 2.0

    def test_electric_magnetic_split(self):
        gamma = DipoleTensor(antisym([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]))
        assert np.array_equal(gamma.electric, [1.0, 2.0, 3.0])
        assert np.array_equal(gamma.magnetic, antisym([0, 0, 0, 4.0, 5.0, 6.0])[1:, 1:])

    def test_dipole_from_moment(self):
        atoms = AtomPair(m1=4.0, m2=1.0)
        gamma = dipole_from_moment(np.array([0.5, 0.0, -0.25]), atoms)
        # gamma^{0i} = d_i sqrt(m1 m2)
        assert np.allclose(gamma.electric, [1.0, 0.0, -0.5])
        assert np.allclose(gamma.magnetic, 0.0)

    def test_single_component_contraction(self):
        # one electric entry g: gamma_{mu nu} gamma^{mu nu} = -2 g^2
        gamma = DipoleTensor(antisym([3.0, 0, 0, 0, 0, 0]))
        assert contractions(gamma)["gamma_sq"] == pytest.approx(-18.0)

    @given(st.lists(finite, min_size=6, max_size=6))
    def test_contraction_oracle(self, entries):
        # brute-force index loops against the vectorized contractions
        gamma = DipoleTensor(antisym(entries))
        up = gamma.components
        g = METRIC.g
        scalar = 0.0
        tensor = np.zeros((4, 4))
        for mu in range(4):
            for nu in range(4):
                low = 0.0
                for a in range(4):
                    for bb in range(4):
                        low += g[mu, a] * g[nu, bb] * up[a, bb]
                scalar += low * up[mu, nu]
        for tau in range(4):
            for lam in range(4):
                acc = 0.0
                for mu in range(4):
                    mixed = sum(g[tau, nu] * up[mu, nu] for nu in range(4))
                    low = sum(g[mu, a] * g[lam, bb] * up[a, bb] for a in range(4) for bb in range(4))
                    acc += mixed * low
                tensor[tau, lam] = acc
        out = contractions(gamma)
        assert out["gamma_sq"] == pytest.approx(scalar, abs=1e-9)
        assert np.allclose(out["gamma_sq_tensor"], tensor, atol=1e-9)

    @given(st.lists(finite, min_size=6, max_size=6), st.floats(-2.0, 2.0))
    @settings(max_examples=50)
    def test_gamma_sq_boost_invariant(self, entries, eta):
        gamma = DipoleTensor(antisym(entries))
        L = boost_x(eta)
        boosted = L @ gamma.components @ L.T
        boosted = 0.5 * (boosted - boosted.T)  # kill round-off symmetric part
        gamma_b = DipoleTensor(boosted)
        a = contractions(gamma)["gamma_sq"]
        b = contractions(gamma_b)["gamma_sq"]
        assert b == pytest.approx(a, rel=1e-8, abs=1e-8)

    def test_gamma_sq_dot_matches_tensor(self):
        gamma = DipoleTensor(antisym([1.0, -2.0, 0.5, 0.0, 1.5, -1.0]))
        p = np.array([1.0, 0.2, -0.3, 0.7])
        q = np.array([0.5, -1.0, 0.0, 2.0])
        t = contractions(gamma)["gamma_sq_tensor"]
        assert gamma_sq_dot(gamma, p, q) == pytest.approx(float(p @ t @ q))
        assert gamma_sq_dot(gamma, p) == pytest.approx(float(p @ t @ p))

    def test_scaled(self):
        gamma = DipoleTensor(antisym([1.0, 0, 0, 0, 0, 0]))
        assert contractions(gamma.scaled(2.0))["gamma_sq"] == pytest.approx(
            4.0 * contractions(gamma)["gamma_sq"]
        )


class TestFieldStrength:
    def test_from_electric_roundtrip(self):
        e = np.array([1.0, -2.0, 0.5])
        F = FieldStrength.from_electric(e)
        assert np.allclose(F.electric, e)

    def test_interaction_scalar(self):
        # gamma . F = 2 gamma^{0i} F_{0i} = -2 sqrt(m1 m2) d . E
        atoms = AtomPair(m1=1.0, m2=1.0)
        gamma = dipole_from_moment(np.array([0.3, 0.0, 0.0]), atoms)
        F = FieldStrength.from_electric(np.array([2.0, 0.0, 0.0]))
        assert gamma.dot_field(F) == pytest.approx(-2.0 * 0.3 * 2.0)


class TestAtomPair:
    def test_derived_quantities(self):
        atoms = AtomPair(m1=1.0, m2=0.95)
        assert atoms.M2 == pytest.approx(0.5 * (1.0 + 0.9025))
        assert atoms.delta == pytest.approx(1.0 - 0.9025)
        assert atoms.b == pytest.approx(atoms.delta / atoms.M2)
        assert atoms.omega12 == pytest.approx(0.05)
        assert atoms.mass(1) == 1.0
        assert atoms.mass(2) == 0.95

    def test_positivity(self):
        with pytest.raises(ValueError):
            AtomPair(m1=-1.0, m2=1.0)
        with pytest.raises(ValueError):
            AtomPair(m1=1.0, m2=0.0)

    def test_require_small_b(self):
        AtomPair(m1=1.0, m2=0.95).require_small_b()
        with pytest.raises(ValueError, match="expansion"):
            AtomPair(m1=10.0, m2=1.0).require_small_b()


class TestPowerCounting:
    def test_dimension_table(self):
        assert engineering_dimension("P_tilde", 3) == Fraction(1)
        assert engineering_dimension("P_tilde", 2) == Fraction(1, 2)
        assert engineering_dimension("P", 3) == Fraction(0)
        assert engineering_dimension("P", 2) == Fraction(-1, 2)

    def test_classification(self):
        assert classify_renormalizability("P_tilde", 3) == "non_renormalizable"
        assert classify_renormalizability("P_tilde", 2) == "non_renormalizable"
        assert classify_renormalizability("P", 3) == "marginal"
        assert classify_renormalizability("P", 2) == "super"

    def test_rejects_unknown(self):
        with pytest.raises(ValueError):
            engineering_dimension("Q", 3)
        with pytest.raises(ValueError):
            engineering_dimension("P", 4)


class TestUnits:
    def test_natural_mode_trivial(self):
        us = UnitSystem("natural")
        assert us.hbar == 1.0 and us.c == 1.0 and us.eps0 == 1.0

    def test_known_scales_at_1ev(self):
        us = UnitSystem("SI", base_energy_ev=1.0)
        # hbar c / (1 eV) = 197.327 nm
        assert us.to_si(1.0, "length") == pytest.approx(HBAR_SI * C_SI / EV_SI, rel=1e-12)
        assert us.to_si(1.0, "length") == pytest.approx(1.9732698e-7, rel=1e-6)
        assert us.to_si(1.0, "time") == pytest.approx(6.582120e-16, rel=1e-6)
        # mass of one natural unit: 1 eV / c^2
        assert us.to_si(1.0, "mass") == pytest.approx(EV_SI / C_SI**2, rel=1e-12)

    @given(st.floats(1e-6, 1e6), st.sampled_from(("mass", "length", "volume", "time",
                                                  "angular_frequency", "energy",
                                                  "electric_field", "dipole_moment")))
    def test_roundtrip(self, v, q):
        us = UnitSystem("SI", base_energy_ev=2.5)
        assert us.to_natural(us.to_si(v, q), q) == pytest.approx(v, rel=1e-12)

    def test_dipole_times_field_is_energy(self):
        us = UnitSystem("SI", base_energy_ev=1.0)
        d = us.to_si(1.0, "dipole_moment")
        e = us.to_si(1.0, "electric_field")
        assert d * e == pytest.approx(us.to_si(1.0, "energy"), rel=1e-12)

    def test_rejects_bad_mode(self):
        with pytest.raises(ValueError):
            UnitSystem("imperial")
        with pytest.raises(ValueError):
            UnitSystem("SI", base_energy_ev=-1.0)

    def test_unknown_quantity(self):
        with pytest.raises(ValueError, match="unknown quantity"):
            UnitSystem("SI").to_si(1.0, "charge")
