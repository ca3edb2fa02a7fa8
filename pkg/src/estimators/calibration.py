####################################
##### Arquivo: calibration.py
##### Trabalho: Lidar FMCW além de Nyquist
####################################

"""Calibração da variância do ruído da frequência instantânea.

Este módulo implementa a estimativa de SNR_η a partir do canal auxiliar,
a regressão Monte Carlo da variância do ruído aditivo projetado (tabela ĥ)
e a variância total σ̂² = L/(πf_s) + ĥ(SNR̂) usada pelo estimador IFF.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator, UnivariateSpline

from ..core.numerics import centered_modulo
from ..models.errors import CalibrationMissingError, DegenerateInputError, InvalidArgumentError

logger = logging.getLogger(__name__)

UNIFORM_VARIANCE = 1.0 / 12.0
HIGH_SNR_CORRELATION = -0.5
DEFAULT_SNR_GRID_DB = tuple(float(x) for x in range(-30, 41))
DEFAULT_SAMPLES_PER_POINT = 10000


@dataclass(eq=False)
class HTable:
    """Tabela ĥ: variância e correlação de lag 1 do ruído ε em função da SNR.

    Atributos:
        snr_db: Grade de SNR_η em dB, estritamente crescente
        variance: Variância ajustada de ε em cada ponto (não crescente)
        lag1_correlation: Coeficiente de correlação entre ε_n e ε_{n+1}
        samples_per_point: Comprimento das sequências simuladas
        seed: Semente usada na simulação
    """

    snr_db: np.ndarray
    variance: np.ndarray
    lag1_correlation: np.ndarray
    samples_per_point: int = DEFAULT_SAMPLES_PER_POINT
    seed: int = 0

    def __post_init__(self):
        self.snr_db = np.asarray(self.snr_db, dtype=float)
        self.variance = np.asarray(self.variance, dtype=float)
        self.lag1_correlation = np.asarray(self.lag1_correlation, dtype=float)
        self._validate_grid()
        self._log_variance = PchipInterpolator(self.snr_db, np.log(self.variance))
        self._correlation = PchipInterpolator(self.snr_db, self.lag1_correlation)

    def _validate_grid(self):
        if self.snr_db.ndim != 1 or self.snr_db.size < 2:
            raise InvalidArgumentError("Tabela ĥ precisa de ao menos 2 pontos")
        if self.variance.shape != self.snr_db.shape or self.lag1_correlation.shape != self.snr_db.shape:
            raise InvalidArgumentError("Colunas da tabela ĥ com tamanhos diferentes")
        if np.any(np.diff(self.snr_db) <= 0):
            raise InvalidArgumentError("snr_db da tabela ĥ deve ser estritamente crescente")
        if np.any(self.variance <= 0) or np.any(~np.isfinite(self.variance)):
            raise InvalidArgumentError("Variâncias da tabela ĥ devem ser positivas e finitas")

    def evaluate(self, snr):
        """Variância ĥ(SNR) para SNR linear.

        Abaixo da grade devolve 1/12; acima dela segue a cauda ∝ 1/SNR a
        partir do último ponto; SNR infinita devolve 0.
        """
        snr = float(snr)
        if math.isnan(snr) or snr <= 0:
            return UNIFORM_VARIANCE
        if math.isinf(snr):
            return 0.0
        snr_db = 10.0 * math.log10(snr)
        if snr_db < self.snr_db[0]:
            return UNIFORM_VARIANCE
        if snr_db > self.snr_db[-1]:
            top = 10.0 ** (self.snr_db[-1] / 10.0)
            return float(self.variance[-1] * top / snr)
        return float(np.exp(self._log_variance(snr_db)))

    def correlation(self, snr):
        """Coeficiente de correlação de lag 1 de ε para SNR linear."""
        snr = float(snr)
        if math.isnan(snr) or snr <= 0:
            return float(self.lag1_correlation[0])
        if math.isinf(snr):
            return HIGH_SNR_CORRELATION
        snr_db = float(np.clip(10.0 * math.log10(snr), self.snr_db[0], self.snr_db[-1]))
        return float(self._correlation(snr_db))


@dataclass(eq=False)
class NoiseCalibration:
    """Parâmetros de ruído usados pelo L_IFF.

    Atributos:
        snr_eta_hat: SNR_η estimada (linear, possivelmente infinita)
        sigma2_hat: Variância σ̂² em ciclos² por amostra²
        K: Truncamento da soma da normal enrolada, ≥ ⌈3σ⌉
        h_table: Tabela ĥ usada (None quando a SNR é infinita)
    """

    snr_eta_hat: float
    sigma2_hat: float
    K: int = 2
    h_table: Optional[HTable] = None

    def __post_init__(self):
        if not self.sigma2_hat >= 0:
            raise InvalidArgumentError(f"σ̂² deve ser não negativa: {self.sigma2_hat}")
        minimum = int(math.ceil(3.0 * math.sqrt(self.sigma2_hat)))
        if self.K < max(1, minimum):
            logger.info(f"K elevado de {self.K} para {max(1, minimum)} (σ̂={math.sqrt(self.sigma2_hat):.3f})")
            self.K = max(1, minimum)


def estimate_snr(u, v_aux) -> float:
    """Estima SNR_η por (‖u‖² − var(v))/var(v).

    ‖u‖² é tomado por amostra (média quadrática) e var(v) é a variância
    amostral complexa do canal auxiliar.

    Raises:
        InvalidArgumentError: Se os vetores tiverem tamanhos diferentes ou < 16
        DegenerateInputError: Se o canal auxiliar for constante (var(v) = 0)
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v_aux, dtype=complex)
    if u.shape != v.shape or u.size < 16:
        raise InvalidArgumentError(
            f"u e v devem ter o mesmo tamanho ≥ 16 (recebido {u.size} e {v.size})"
        )
    # v constante: a média arredondada deixaria uma variância espúria ~1e-30
    if np.ptp(v.real) == 0 and np.ptp(v.imag) == 0:
        raise DegenerateInputError("Canal auxiliar sem ruído (var(v) = 0)")
    variance = float(np.mean(np.abs(v - v.mean()) ** 2))
    return (float(np.mean(np.abs(u) ** 2)) - variance) / variance


def simulate_epsilon(snr: float, samples: int, rng: np.random.Generator) -> np.ndarray:
    """Sequência ε_n do ruído aditivo projetado para uma SNR linear."""
    z = rng.standard_normal(samples + 1) + 1j * rng.standard_normal(samples + 1)
    angles = np.angle(1.0 + np.sqrt(1.0 / (2.0 * snr)) * z)
    return centered_modulo(np.diff(angles), 2.0 * np.pi) / (2.0 * np.pi)


def h_fit(
    snr_grid_db: Sequence[float] = DEFAULT_SNR_GRID_DB,
    samples_per_point: int = DEFAULT_SAMPLES_PER_POINT,
    seed: int = 0,
) -> HTable:
    """Ajusta a tabela ĥ por simulação Monte Carlo.

    Para cada SNR da grade, simula ε e calcula sua variância e correlação
    de lag 1. O log da variância é suavizado por B-splines e forçado a ser
    não crescente e limitado a 1/12.

    Args:
        snr_grid_db: Grade de SNR_η em dB
        samples_per_point: Comprimento de cada sequência ε
        seed: Semente da simulação

    Returns:
        HTable: Tabela ajustada
    """
    grid = np.asarray(snr_grid_db, dtype=float)
    if grid.ndim != 1 or grid.size < 4 or np.any(np.diff(grid) <= 0):
        raise InvalidArgumentError("Grade de SNR deve ser estritamente crescente com ≥ 4 pontos")
    if grid[0] > -30.0 or grid[-1] < 40.0:
        logger.warning(f"Grade de SNR [{grid[0]}, {grid[-1]}] dB não cobre [−30, 40] dB")
    if samples_per_point < 100:
        raise InvalidArgumentError(f"Amostras por ponto insuficientes: {samples_per_point}")

    rng = np.random.default_rng(seed)
    variances = np.empty(grid.size)
    correlations = np.empty(grid.size)
    for i, snr_db in enumerate(grid):
        epsilon = simulate_epsilon(10.0 ** (snr_db / 10.0), samples_per_point, rng)
        centered = epsilon - epsilon.mean()
        variances[i] = float(np.mean(centered ** 2))
        correlations[i] = float(np.sum(centered[1:] * centered[:-1]) / np.sum(centered ** 2))

    # variância relativa de uma variância amostral ≈ 2/n
    spline = UnivariateSpline(grid, np.log(variances), k=3, s=grid.size * 4.0 / samples_per_point)
    smoothed = np.minimum.accumulate(np.minimum(np.exp(spline(grid)), UNIFORM_VARIANCE))
    logger.info(
        f"Tabela ĥ ajustada: {grid.size} pontos em [{grid[0]}, {grid[-1]}] dB, "
        f"{samples_per_point} amostras, semente {seed}"
    )
    return HTable(
        snr_db=grid,
        variance=smoothed,
        lag1_correlation=np.clip(correlations, HIGH_SNR_CORRELATION, 0.0),
        samples_per_point=int(samples_per_point),
        seed=int(seed),
    )


def sigma_hat(linewidth: float, fs: float, snr_hat: float, h: Optional[HTable]) -> float:
    """σ̂² = L/(πf_s) + ĥ(SNR̂).

    Raises:
        InvalidArgumentError: Para L negativo ou entradas não finitas
        CalibrationMissingError: Se a SNR é finita e nenhuma tabela foi fornecida
    """
    if not math.isfinite(linewidth) or linewidth < 0 or not fs > 0:
        raise InvalidArgumentError(f"Parâmetros inválidos para σ̂² (L={linewidth}, f_s={fs})")
    if math.isnan(snr_hat):
        raise InvalidArgumentError("SNR estimada não é um número")
    phase_term = linewidth / (math.pi * fs)
    if math.isinf(snr_hat) and snr_hat > 0:
        return phase_term
    if h is None:
        raise CalibrationMissingError("data/calibration/h_table.csv")
    return phase_term + h.evaluate(snr_hat)
