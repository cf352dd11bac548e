"""Tests for the one-variable arithmetic parser and its compiled callables."""
import math

import numpy as np
import pytest

from oiso.symfn import SymFn, parse_symfn


class TestParsing:
    def test_polynomial(self):
        f = parse_symfn("2*t + 1")
        assert f(0.0) == 1.0
        assert f(3.0) == 7.0

    def test_precedence_and_parens(self):
        assert parse_symfn("1 + 2*3")(0.0) == 7.0
        assert parse_symfn("(1 + 2)*3")(0.0) == 9.0
        assert parse_symfn("2 - 1 - 1")(0.0) == 0.0  # left associative
        assert parse_symfn("8 / 4 / 2")(0.0) == 1.0

    def test_unary_minus(self):
        assert parse_symfn("-t")(2.5) == -2.5
        assert parse_symfn("--t")(2.5) == 2.5
        assert parse_symfn("3 * -t")(1.0) == -3.0

    def test_pi_and_sin(self):
        f = parse_symfn("sin(pi*t/2)")
        assert f(1.0) == pytest.approx(1.0, abs=1e-15)
        assert f(0.0) == 0.0
        assert f(1.0 / 3.0) == pytest.approx(0.5, abs=1e-15)

    def test_scientific_notation(self):
        assert parse_symfn("1e-3 + t")(0.0) == 1e-3
        assert parse_symfn("2.5E2")(0.0) == 250.0

    def test_custom_variable_name(self):
        f = parse_symfn("k*k", var="k")
        assert f(4.0) == 16.0

    def test_unknown_name_rejected(self):
        with pytest.raises(ValueError, match="unknown name"):
            parse_symfn("x + 1")

    def test_malformed_inputs_rejected(self):
        for bad in ("1 +", "(t", "sin t", "t )", "1 2", "@"):
            with pytest.raises(ValueError):
                parse_symfn(bad)


class TestEvaluation:
    def test_scalar_in_scalar_out(self):
        f = parse_symfn("t*t")
        out = f(3.0)
        assert isinstance(out, float) and out == 9.0

    def test_array_in_array_out(self):
        f = parse_symfn("t*t")
        xs = np.array([1.0, 2.0, 3.0])
        out = f(xs)
        assert isinstance(out, np.ndarray)
        assert np.array_equal(out, [1.0, 4.0, 9.0])

    def test_constant_broadcasts_to_input_shape(self):
        f = parse_symfn("2")
        out = f(np.zeros(5))
        assert out.shape == (5,)
        assert np.all(out == 2.0)

    def test_division_by_zero_is_signed_infinity(self):
        f = parse_symfn("1/t")
        assert f(0.0) == math.inf
        assert f(-0.0) == -math.inf
        assert f(2.0) == 0.5

    def test_oscillatory_boundary_function(self):
        f = parse_symfn("sin(1/t)")
        ks = np.arange(1, 6, dtype=float)
        assert np.allclose(f(1.0 / (ks * math.pi)), np.sin(ks * math.pi), atol=1e-12)

    def test_repr_carries_source_text(self):
        assert repr(parse_symfn("2*t")) == "SymFn('2*t')"

    def test_frozen(self):
        f = parse_symfn("t")
        with pytest.raises(AttributeError):
            f.text = "other"

    def test_is_symfn_instance(self):
        assert isinstance(parse_symfn("t"), SymFn)
