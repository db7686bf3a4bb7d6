"""Forward-mode carriers."""

import math

import numpy as np
import pytest

from ivexpand.errors import DomainError
from ivexpand.jets import GradJet, Series


class TestGradJet:
    def test_product_rule(self):
        x = GradJet.variable(2.0, 0, 2)
        y = GradJet.variable(3.0, 1, 2)
        z = x * y
        assert z.v == 6.0
        np.testing.assert_allclose(z.d, [3.0, 2.0])

    def test_exp_log_sqrt(self):
        x = GradJet.variable(4.0, 0, 1)
        assert x.exp().d[0] == pytest.approx(math.exp(4.0))
        assert x.log().d[0] == pytest.approx(0.25)
        assert x.sqrt().d[0] == pytest.approx(0.25)

    def test_powi(self):
        x = GradJet.variable(2.0, 0, 1)
        assert x.powi(3).v == 8.0
        assert x.powi(3).d[0] == pytest.approx(12.0)
        assert x.powi(0).d[0] == 0.0

    def test_domain(self):
        with pytest.raises(DomainError):
            GradJet.variable(0.0, 0, 1).log()
        with pytest.raises(DomainError):
            GradJet.variable(0.0, 0, 1).sqrt()
        with pytest.raises(DomainError):
            GradJet.variable(1000.0, 0, 1).exp()

    def test_agrees(self):
        x = GradJet.variable(0.0, 0, 1)
        assert x.agrees(x + x.const(5.0))
        assert not x.agrees(x * x.const(2.0))


class TestSeries:
    def test_exp_coefficients(self):
        s = Series.variable(0.0, 1.0, 5).exp()
        np.testing.assert_allclose(s.c, [1.0 / math.factorial(k) for k in range(6)])

    def test_log_inverts_exp(self):
        s = Series.variable(0.5, 1.0, 4)
        np.testing.assert_allclose(s.exp().log().c, s.c, atol=1e-14)

    def test_sqrt_squares_back(self):
        s = Series.variable(2.0, 1.0, 4)
        root = s.sqrt()
        np.testing.assert_allclose((root * root).c, s.c, atol=1e-14)

    def test_powi_matches_repeated_product(self):
        s = Series.variable(1.5, 2.0, 4)
        np.testing.assert_allclose(s.powi(3).c, (s * s * s).c)

    def test_sqrt_at_zero(self):
        with pytest.raises(DomainError):
            Series.variable(0.0, 1.0, 2).sqrt()
