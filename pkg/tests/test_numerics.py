####################################
##### Arquivo: test_numerics.py
##### Trabalho: Lidar FMCW além de Nyquist
####################################

"""Testes unitários para as rotinas numéricas compartilhadas."""
import numpy as np
import pytest

from src.core.numerics import (
    centered_modulo,
    maximize_quasi_newton,
    maximize_scalar_bounded,
    maximize_simplex,
    upsample_fourier,
)
from src.models.errors import InvalidArgumentError, NumericFailureError


class TestCenteredModulo:
    """Casos de teste para o módulo centrado."""

    def test_range_is_half_open(self):
        """Testa se os valores caem em (−r/2, r/2]."""
        values = centered_modulo(np.linspace(-10.0, 10.0, 4001), 1.0)
        assert np.all(values > -0.5)
        assert np.all(values <= 0.5)

    def test_boundaries(self):
        """Testa os extremos: −r/2 e r/2 são mapeados para r/2."""
        assert centered_modulo(0.5, 1.0) == pytest.approx(0.5)
        assert centered_modulo(-0.5, 1.0) == pytest.approx(0.5)
        assert centered_modulo(1.5, 1.0) == pytest.approx(0.5)

    def test_congruence(self):
        """Testa se o resultado é congruente à entrada."""
        x = np.array([-3.7, 0.2, 2.6, 7.25])
        wrapped = centered_modulo(x, 2.0)
        assert np.allclose(np.exp(1j * np.pi * wrapped), np.exp(1j * np.pi * x), atol=1e-12)

    def test_scalar_returns_float(self):
        """Testa se entradas escalares produzem float."""
        assert isinstance(centered_modulo(3.3, 1.0), float)

    @pytest.mark.parametrize("period", [0.0, -1.0, np.inf])
    def test_invalid_period(self, period):
        """Testa a rejeição de períodos inválidos."""
        with pytest.raises(InvalidArgumentError):
            centered_modulo(0.1, period)

    def test_non_finite_input(self):
        """Testa a rejeição de valores não finitos."""
        with pytest.raises(InvalidArgumentError):
            centered_modulo(np.nan, 1.0)


class TestUpsampleFourier:
    """Casos de teste para a sobreamostragem por Fourier."""

    @pytest.mark.parametrize("n", [16, 17])
    def test_preserves_original_samples(self, n):
        """Testa se toda M-ésima amostra reproduz a entrada."""
        rng = np.random.default_rng(3)
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        y = upsample_fourier(x, 4)
        assert y.size == 4 * n
        assert np.allclose(y[::4], x, atol=1e-12)

    def test_factor_one_is_copy(self):
        """Testa se o fator 1 devolve uma cópia."""
        x = np.arange(5, dtype=complex)
        y = upsample_fourier(x, 1)
        assert np.array_equal(x, y)
        assert y is not x

    def test_band_limited_tone(self):
        """Testa a interpolação exata de um tom dentro da banda."""
        n = 32
        t = np.arange(n)
        x = np.exp(2j * np.pi * 3 * t / n)
        y = upsample_fourier(x, 3)
        fine = np.arange(3 * n) / 3.0
        assert np.allclose(y, np.exp(2j * np.pi * 3 * fine / n), atol=1e-10)

    @pytest.mark.parametrize("factor", [0, 2.5, -1])
    def test_invalid_factor(self, factor):
        """Testa a rejeição de fatores inválidos."""
        with pytest.raises(InvalidArgumentError):
            upsample_fourier(np.ones(4), factor)


class TestOptimizers:
    """Casos de teste para os maximizadores."""

    def test_scalar_bounded(self):
        """Testa Brent numa parábola."""
        result = maximize_scalar_bounded(lambda x: -(x - 0.3) ** 2, 0.0, 1.0, 0.5, tol=1e-10)
        assert result.scalar == pytest.approx(0.3, abs=1e-6)
        assert result.value <= 0.0

    def test_scalar_never_worse_than_start(self):
        """Testa se o resultado nunca é pior que o ponto inicial."""
        objective = lambda x: -abs(x - 0.2) + (5.0 if x == 0.2 else 0.0)  # noqa: E731
        result = maximize_scalar_bounded(objective, 0.0, 1.0, 0.2)
        assert result.value >= objective(0.2)

    def test_scalar_invalid_interval(self):
        """Testa a rejeição de intervalo vazio."""
        with pytest.raises(InvalidArgumentError):
            maximize_scalar_bounded(lambda x: x, 1.0, 0.0, 0.5)

    def test_simplex(self):
        """Testa Nelder–Mead numa quádrica 2D dentro da caixa."""
        result = maximize_simplex(
            lambda x: -((x[0] - 1.0) ** 2 + 2.0 * (x[1] + 0.5) ** 2),
            [0.0, 0.0],
            [(-2.0, 2.0), (-2.0, 2.0)],
            tol=1e-10,
        )
        assert result.point[0] == pytest.approx(1.0, abs=1e-4)
        assert result.point[1] == pytest.approx(-0.5, abs=1e-4)

    def test_simplex_respects_box(self):
        """Testa se o ótimo fora da caixa é projetado na fronteira."""
        result = maximize_simplex(lambda x: -(x[0] - 5.0) ** 2, [0.0], [(-1.0, 1.0)], initial_step=[0.5])
        assert -1.0 <= result.point[0] <= 1.0
        assert result.point[0] == pytest.approx(1.0, abs=1e-3)

    def test_simplex_dimension_mismatch(self):
        """Testa a rejeição de caixas com dimensão incompatível."""
        with pytest.raises(InvalidArgumentError):
            maximize_simplex(lambda x: 0.0, [0.0, 0.0], [(-1.0, 1.0)])

    def test_quasi_newton_with_gradient(self):
        """Testa BFGS com o objetivo devolvendo (valor, gradiente)."""

        def objective(x):
            value = -((x[0] - 2.0) ** 2 + (x[1] - 1.0) ** 2)
            return value, np.array([-2.0 * (x[0] - 2.0), -2.0 * (x[1] - 1.0)])

        result = maximize_quasi_newton(objective, True, [0.0, 0.0], tol=1e-10)
        assert result.converged
        assert np.allclose(result.point, [2.0, 1.0], atol=1e-6)

    def test_quasi_newton_separate_gradient(self):
        """Testa BFGS com gradiente em função separada."""
        result = maximize_quasi_newton(
            lambda x: -float(np.sum((x - 3.0) ** 2)), lambda x: -2.0 * (x - 3.0), [0.0], tol=1e-10
        )
        assert result.scalar == pytest.approx(3.0, abs=1e-6)

    def test_non_finite_objective(self):
        """Testa se valores não finitos geram NumericFailureError."""
        with pytest.raises(NumericFailureError):
            maximize_quasi_newton(lambda x: (np.nan, np.zeros(1)), True, [0.0])
