import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modelkit.errors import DegenerateSystem, FiniteBlaschkeTheta, GridTooCoarse, IllConditionedBasis
from modelkit.inner_core import B_I, InnerFunctionSpec, arith, blaschke, reproducing_kernel, singular
from modelkit.spectral import ExpRational, kernel_function
from modelkit.toeplitz import (
    ProbeConfig,
    ToeplitzSymbol,
    basis_points,
    carleson_window_sup,
    classify_trend,
    discretize_toeplitz,
    generalized_sigma_min,
    kernel_triviality_probe,
    lemma1_construct,
    multiplier_residual,
    symbol,
    symbol_eval,
    symbol_linear_coefficient,
)

S = singular(1.0)
B3 = blaschke([1j, 1 + 2j, -0.5 + 0.7j])
upper = st.complex_numbers(max_magnitude=10).filter(lambda w: 0.1 < w.imag < 10)


@st.composite
def symbols(draw):
    n = draw(st.integers(1, 4))
    out = []
    for _ in range(n):
        zeros = tuple(draw(st.lists(upper, max_size=3)))
        spec = InnerFunctionSpec(mass=draw(st.floats(0, 3)), zeros=zeros)
        out.append((spec, draw(st.sampled_from([1, -1]))))
    return ToeplitzSymbol(tuple(out))


class TestSymbol:
    def test_cancelling_pair(self):
        assert symbol_eval(symbol((S, 1), (S, -1)), 0.7).value == pytest.approx(1.0)

    def test_exponent_arithmetic(self):
        x = 1.3
        assert symbol_eval(symbol((singular(2), 1), (S, -1)), x).value == pytest.approx(cmath.exp(1j * x))

    def test_conjugated_b_i(self):
        # U conj(V b_i) with U = V = S reduces to conj(b_i)
        x = 0.4
        v = symbol_eval(symbol((S, 1), (S, -1), (B_I, -1)), x).value
        assert v == pytest.approx(((x - 1j) / (x + 1j)).conjugate())

    def test_linear_coefficient(self):
        a, b = 2.5, 0.75
        assert symbol_linear_coefficient(symbol((singular(a), 1), (singular(b), -1), (B_I, -1))) == a - b
        assert symbol_linear_coefficient(symbol((B_I, 1))) == 0.0
        assert symbol_linear_coefficient(symbol((singular(3), 1), (singular(1), -1), (singular(2), -1))) == 0.0

    @settings(max_examples=40, deadline=None)
    @given(symbols(), st.floats(-30, 30))
    def test_unimodular_and_involution(self, sym, x):
        r = symbol_eval(sym, x)
        assert abs(abs(r.value) - 1) <= 1e-12 + r.truncation_error_bound
        assert symbol_eval(sym.conj(), x).value == pytest.approx(r.value.conjugate(), abs=1e-12)

    def test_split_cancels(self):
        sym = symbol((blaschke([1j, 2j], mass=3), 1), (blaschke([2j], mass=1), -1), (arith(), 1), (arith(), -1))
        I, J, truncated = sym.split()
        assert I.mass == 2 and I.zeros == (1j,)
        assert J.mass == 0 and J.zeros == ()
        assert not truncated


class TestDiscretization:
    def test_identity_symbol(self):
        m = discretize_toeplitz(ToeplitzSymbol(()), basis_points(6))
        assert np.allclose(m.M, m.G, atol=1e-14)

    def test_gram_matches_kernel_values(self):
        pts = basis_points(5)
        m = discretize_toeplitz(symbol((S, -1)), pts)
        ks = [kernel_function(S, p) for p in pts]
        closed = np.array([[complex(kj(pl)) for pl in pts] for kj in ks])  # <k_j, k_l> = k_j(l)
        assert np.allclose(m.G, closed, atol=1e-14)

    @settings(max_examples=15, deadline=None)
    @given(symbols())
    def test_gram_positive(self, sym):
        m = discretize_toeplitz(sym, basis_points(6))
        ev = np.linalg.eigvalsh(m.G)
        assert ev[0] >= -1e-12 * ev[-1]
        assert np.allclose(m.A, m.A.conj().T)

    def test_analytic_symbol_is_isometric(self):
        m = discretize_toeplitz(symbol((singular(2), 1)), basis_points(10))
        assert np.allclose(m.A, m.G, rtol=1e-12, atol=1e-15)
        s, _ = generalized_sigma_min(m.A, m.G)
        assert s == pytest.approx(1.0, abs=1e-6)

    def test_ill_conditioned(self):
        with pytest.raises(IllConditionedBasis):
            discretize_toeplitz(symbol((S, -1)), basis_points(16), cond_max=1e6)

    def test_rejects_bad_basis(self):
        with pytest.raises(ValueError):
            discretize_toeplitz(symbol((S, -1)), [1j, 1j])
        with pytest.raises(ValueError):
            discretize_toeplitz(symbol((S, -1)), [1.0])


class TestProbe:
    def test_trend_rules(self):
        assert classify_trend([1e-2, 4e-3, 1e-3, 1e-7], 1e-6, 0.5, 0.2) == "LikelyNontrivial"
        assert classify_trend([1e-8, 1e-9, 2e-9], 1e-6, 0.5, 0.2) == "LikelyNontrivial"
        assert classify_trend([1e-2, 9e-3, 1e-7], 1e-6, 0.5, 0.2) == "Inconclusive"
        assert classify_trend([1.0, 0.9, 0.85], 1e-6, 0.5, 0.2) == "LikelyTrivial"
        assert classify_trend([1.0, 0.5, 0.45], 1e-6, 0.5, 0.2) == "Inconclusive"

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ProbeConfig(sizes=(8, 16))
        with pytest.raises(ValueError):
            ProbeConfig(sizes=(8, 8, 16))

    @pytest.mark.parametrize("c", [0.5, 1.0, 3.0])
    def test_known_cases(self, c):
        assert kernel_triviality_probe(symbol((singular(c), -1))).verdict == "LikelyNontrivial"
        assert kernel_triviality_probe(symbol((singular(c), 1))).verdict == "LikelyTrivial"

    def test_monotonicity_in_mass(self):
        small = kernel_triviality_probe(symbol((singular(1), -1), (B3, 1)))
        large = kernel_triviality_probe(symbol((singular(2), -1), (B3, 1)))
        assert small.verdict == "LikelyNontrivial"
        assert large.verdict != "LikelyTrivial"

    def test_finite_blaschke_symbol(self):
        # conj(B) has kernel K_B; B conj(b) with fewer zeros in b is injective
        assert kernel_triviality_probe(symbol((B3, -1))).verdict == "LikelyNontrivial"
        assert kernel_triviality_probe(symbol((B3, 1), (B_I, -1))).verdict != "LikelyNontrivial"

    def test_report_serialization(self):
        r = kernel_triviality_probe(symbol((S, 1)), ProbeConfig(sizes=(4, 8, 12)))
        d = r.to_dict()
        assert d["basis_sizes"] == [4, 8, 12] and "disclaimer" in d
        assert r.to_csv().splitlines()[0] == "basis_size,sigma_min"

    def test_disagreement_is_flagged(self):
        with pytest.warns(RuntimeWarning):
            r = kernel_triviality_probe(symbol((S, 1)), ProbeConfig(sizes=(4, 8, 12)), expected="LikelyNontrivial")
        assert any("DISAGREEMENT" in f for f in r.flags)


class TestLemma1:
    def test_single_zero(self):
        el = lemma1_construct(S, [1j])
        assert el.norm == pytest.approx(1.0, abs=1e-12)
        assert abs(el(1j)) < 1e-10
        assert el.hardy_residual < 1e-6

    def test_double_zero(self):
        el = lemma1_construct(S, [0.5 + 1j], [2])
        assert abs(el.f(0.5 + 1j)) < 1e-8
        assert abs(el.f.derivative()(0.5 + 1j)) < 1e-8
        assert el.hardy_residual < 1e-6

    def test_no_constraints(self):
        el = lemma1_construct(S, [])
        assert len(el.coefficients) == 1
        k = kernel_function(S, el.points[0])
        z = 0.3 + 0.4j
        assert complex(el.f(z)) == pytest.approx(el.coefficients[0] * complex(k(z)))

    def test_rejects_finite_blaschke(self):
        with pytest.raises(FiniteBlaschkeTheta):
            lemma1_construct(B3, [1j])

    def test_degenerate(self):
        with pytest.raises(DegenerateSystem):
            lemma1_construct(S, [1j], points=[1j, 2j])


class TestCarleson:
    def _grid(self, X, per_unit=64):
        return np.linspace(-X, X, 2 * X * per_unit + 1)

    def test_constant(self):
        x = self._grid(20)
        w = carleson_window_sup(np.ones_like(x), x)
        assert w.sup == pytest.approx(1.0, abs=1e-12) and w.trend == "bounded"

    def test_hardy_kernel_at_i(self):
        x = self._grid(50)
        w = carleson_window_sup(reproducing_kernel(None, 1j, x), x)
        # sup over windows sits at [-1/2, 1/2]: (2/pi^2) arctan(1/2)
        assert w.sup == pytest.approx(2 * math.atan(0.5) / math.pi ** 2, rel=1e-4)
        assert w.sup < 1 / math.pi

    def test_identity_is_not_carleson(self):
        x = self._grid(100)
        assert carleson_window_sup(x, x).trend == "unbounded-trend"

    def test_coarse(self):
        x = np.linspace(-20, 20, 41)
        with pytest.raises(GridTooCoarse):
            carleson_window_sup(np.ones_like(x), x)
        x = np.linspace(-5, 5, 641)
        with pytest.raises(GridTooCoarse):
            carleson_window_sup(np.ones_like(x), x)


class TestMultiplierResidual:
    def test_identity(self):
        pts = [0.5 + 1j, -1 + 0.7j]
        assert max(multiplier_residual(S, S, 1.0, pts)) < 1e-12

    def test_kernel_multiplier(self):
        phi = kernel_function(S, 1j)
        pts = [0.5 + 1j, -1 + 0.7j, 2 + 2j]
        assert max(multiplier_residual(S, singular(2), phi, pts)) < 1e-10
        assert min(multiplier_residual(singular(2), S, phi, pts)) > 1e-2

    def test_terms_input(self):
        phi = ExpRational.constant(2.0)
        assert max(multiplier_residual(B3, B3, phi, [1j])) < 1e-12
