####################################
##### Arquivo: bounds.py
##### Trabalho: Lidar FMCW além de Nyquist
####################################

"""Limites teóricos de desempenho para a estimação de distância.

Este módulo constrói a covariância Σ_d do ruído da frequência instantânea
(ruído de fase do laser mais ruído aditivo projetado), o CRB e o CRB
mal especificado (MCRB) da distância, a média do MCRB sobre o intervalo
sem ambiguidade (exata por quadratura e aproximada por um único produto
vetor-matriz-vetor) e os limites de Fisher para sinais CBF ideais em
ruído branco.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import integrate, linalg, signal

from ..models.config import SPEED_OF_LIGHT, AcquisitionConfig
from ..models.errors import DegenerateInputError, IllConditionedError, InvalidArgumentError
from ..signal.modulation import ModulationWaveform
from ..signal.synthesis import snr_eta
from ..estimators.calibration import HIGH_SNR_CORRELATION, UNIFORM_VARIANCE, HTable

logger = logging.getLogger(__name__)

DENSE_LIMIT = 4096
DEFAULT_QUADRATURE_POINTS = 512
MAX_QUADRATURE_POINTS = 16384
QUADRATURE_TOLERANCE = 0.005


@dataclass
class CovarianceSpec:
    """Covariância Toeplitz em banda Σ_d do ruído de ζ.

    Atributos:
        autocovariance: Valor de Σ_d em cada lag m = 0..N−2
        far_lag: Lag ⌊τf_s⌋ da banda distante do ruído de fase
    """

    autocovariance: np.ndarray
    far_lag: int

    @property
    def size(self) -> int:
        return self.autocovariance.size

    @property
    def diagonal(self) -> float:
        return float(self.autocovariance[0])

    @property
    def adjacent(self) -> float:
        return float(self.autocovariance[1]) if self.size > 1 else 0.0

    @property
    def bandwidth(self) -> int:
        nonzero = np.nonzero(self.autocovariance)[0]
        return int(nonzero[-1]) if nonzero.size else 0

    def to_dense(self) -> np.ndarray:
        return linalg.toeplitz(self.autocovariance)

    def to_banded(self) -> np.ndarray:
        """Forma superior usada por `scipy.linalg.solveh_banded`."""
        width = self.bandwidth
        banded = np.zeros((width + 1, self.size))
        for lag in range(width + 1):
            banded[width - lag, lag:] = self.autocovariance[lag]
        return banded

    def quadratic_form(self, vector: np.ndarray) -> float:
        """vᵀΣv somando apenas os lags não nulos."""
        lags = np.nonzero(self.autocovariance)[0]
        total = 0.0
        for lag in lags:
            product = float(np.dot(vector[: self.size - lag], vector[lag:]))
            total += self.autocovariance[lag] * product * (1.0 if lag == 0 else 2.0)
        return total


def _delay(d: float) -> float:
    if not d > 0:
        raise InvalidArgumentError(f"Distância deve ser positiva: {d}")
    return 2.0 * d / SPEED_OF_LIGHT


def _midpoints(cfg: AcquisitionConfig) -> np.ndarray:
    return (np.arange(cfg.num_samples - 1) + 0.5) / cfg.fs_hz


def shot_terms(snr: float, h_table: Optional[HTable] = None) -> Tuple[float, float]:
    """Variância p do ruído aditivo projetado e covariância adjacente q = ρ̂p.

    Sem tabela, usa a assíntota de alta SNR p = 1/((2π)²SNR), limitada a
    1/12, com ρ = −1/2.
    """
    if math.isinf(snr) and snr > 0:
        return 0.0, 0.0
    if h_table is not None:
        p = h_table.evaluate(snr)
        return p, h_table.correlation(snr) * p
    if not snr > 0:
        return UNIFORM_VARIANCE, 0.0
    p = min(1.0 / (4.0 * math.pi ** 2 * snr), UNIFORM_VARIANCE)
    return p, HIGH_SNR_CORRELATION * p


def _phase_autocovariance(linewidth: float, tau: float, lags: np.ndarray, dt: float) -> np.ndarray:
    """(1/4π²)[2R(mΔ) − R((m+1)Δ) − R(|m−1|Δ)] com R(u) = 2πL·max(τ − |u|, 0)."""

    def R(u):
        return 2.0 * math.pi * linewidth * np.maximum(tau - np.abs(u), 0.0)

    return (2.0 * R(lags * dt) - R((lags + 1) * dt) - R(np.abs(lags - 1) * dt)) / (4.0 * math.pi ** 2)


def _phase_autocovariance_derivative(linewidth: float, tau: float, lags: np.ndarray, dt: float) -> np.ndarray:
    """∂/∂d dos valores de banda do ruído de fase (índices de lag fixos)."""

    def step(u):
        return (tau > np.abs(u)).astype(float)

    bands = 2.0 * step(lags * dt) - step((lags + 1) * dt) - step(np.abs(lags - 1) * dt)
    return (2.0 / SPEED_OF_LIGHT) * 2.0 * math.pi * linewidth * bands / (4.0 * math.pi ** 2)


def _snr_at(cfg: AcquisitionConfig, d: float, snr: Optional[float]) -> float:
    return snr_eta(cfg, d) if snr is None else float(snr)


def covariance_matrix(
    d: float,
    w: ModulationWaveform,
    cfg: AcquisitionConfig,
    snr: Optional[float] = None,
    h_table: Optional[HTable] = None,
) -> CovarianceSpec:
    """Covariância Σ_d da soma dos ruídos de fase e aditivo.

    Args:
        d: Distância (m)
        w: Forma de onda (não afeta Σ_d; mantida por simetria com os limites)
        cfg: Configuração de aquisição
        snr: SNR_η linear; quando omitida, vem da equação do lidar em d
        h_table: Tabela ĥ (assíntota de alta SNR quando omitida)

    Returns:
        CovarianceSpec: Σ_d de dimensão N−1
    """
    tau = _delay(d)
    size = cfg.num_samples - 1
    if size < 2:
        raise InvalidArgumentError(f"Σ_d precisa de ao menos 3 amostras, recebido {cfg.num_samples}")
    dt = 1.0 / cfg.fs_hz
    lags = np.arange(size, dtype=float)
    autocovariance = _phase_autocovariance(cfg.linewidth_hz, tau, lags, dt)
    p, q = shot_terms(_snr_at(cfg, d, snr), h_table)
    autocovariance[0] += p
    autocovariance[1] += q
    return CovarianceSpec(autocovariance=autocovariance, far_lag=int(math.floor(tau * cfg.fs_hz)))


def _covariance_derivative(
    d: float, cfg: AcquisitionConfig, snr: Optional[float], h_table: Optional[HTable]
) -> np.ndarray:
    lags = np.arange(cfg.num_samples - 1, dtype=float)
    derivative = _phase_autocovariance_derivative(cfg.linewidth_hz, _delay(d), lags, 1.0 / cfg.fs_hz)
    if snr is None and not cfg.noiseless:
        h = 1e-6 * d
        upper = shot_terms(snr_eta(cfg, d + h), h_table)
        lower = shot_terms(snr_eta(cfg, d - h), h_table)
        derivative[0] += (upper[0] - lower[0]) / (2.0 * h)
        derivative[1] += (upper[1] - lower[1]) / (2.0 * h)
    return derivative


def distance_jacobian(d: float, w: ModulationWaveform, cfg: AcquisitionConfig) -> np.ndarray:
    """∂g̃_d/∂d = (2/c)(1/f_s)·ȧ(t′_n − τ), com derivada pela direita nas quinas."""
    tau = _delay(d)
    return (2.0 / (SPEED_OF_LIGHT * cfg.fs_hz)) * w.derivative(_midpoints(cfg) - tau)


def crb_delay(
    d: float,
    w: ModulationWaveform,
    cfg: AcquisitionConfig,
    snr: Optional[float] = None,
    h_table: Optional[HTable] = None,
) -> float:
    """CRB da distância: [JᵀΣ⁻¹J + ½tr(Σ⁻¹Σ′Σ⁻¹Σ′)]⁻¹, em m².

    Raises:
        IllConditionedError: Se Σ_d não for definida positiva
    """
    spec = covariance_matrix(d, w, cfg, snr, h_table)
    jacobian = distance_jacobian(d, w, cfg)
    derivative = linalg.toeplitz(_covariance_derivative(d, cfg, snr, h_table))
    try:
        if spec.size <= DENSE_LIMIT:
            factor = linalg.cho_factor(spec.to_dense(), lower=True)
            weighted = linalg.cho_solve(factor, jacobian)
            product = linalg.cho_solve(factor, derivative)
        else:
            banded = spec.to_banded()
            weighted = linalg.solveh_banded(banded, jacobian)
            product = linalg.solveh_banded(banded, derivative)
    except linalg.LinAlgError as e:
        condition = float(np.linalg.cond(spec.to_dense()))
        logger.error(f"Σ_d singular em d={d} m (condição {condition:.3e}): {e}")
        raise IllConditionedError(
            f"Σ_d não é definida positiva em d={d} m", condition=condition
        ) from e
    information = float(jacobian @ weighted) + 0.5 * float(np.einsum("ij,ji->", product, product))
    if not information > 0:
        raise IllConditionedError(f"Informação de Fisher não positiva em d={d} m ({information})")
    return 1.0 / information


def mcrb_delay(
    d: float,
    w: ModulationWaveform,
    cfg: AcquisitionConfig,
    snr: Optional[float] = None,
    h_table: Optional[HTable] = None,
) -> float:
    """MCRB da distância (JᵀΣJ)/(JᵀJ)², em m².

    Raises:
        DegenerateInputError: Se ‖J‖ = 0 (modulação plana)
    """
    jacobian = distance_jacobian(d, w, cfg)
    norm = float(jacobian @ jacobian)
    if norm == 0:
        raise DegenerateInputError(f"Jacobiano nulo em d={d} m; modulação sem variação")
    spec = covariance_matrix(d, w, cfg, snr, h_table)
    return spec.quadratic_form(jacobian) / norm ** 2


def _midpoint_mean(w: ModulationWaveform, cfg: AcquisitionConfig, nodes: int, h_table: Optional[HTable]) -> float:
    span = SPEED_OF_LIGHT * w.chirp_duration_s
    distances = (np.arange(nodes) + 0.5) * span / nodes
    return float(np.mean([mcrb_delay(d, w, cfg, None, h_table) for d in distances]))


def mmcrb(
    w: ModulationWaveform,
    cfg: AcquisitionConfig,
    num_quadrature_points: int = DEFAULT_QUADRATURE_POINTS,
    h_table: Optional[HTable] = None,
) -> float:
    """Média do MCRB sobre (0, cT] pela regra do ponto médio.

    O número de nós é dobrado até que duas estimativas sucessivas difiram
    menos de 0,5%.
    """
    if num_quadrature_points < 32:
        raise InvalidArgumentError(f"Quadratura precisa de ao menos 32 nós: {num_quadrature_points}")
    nodes = int(num_quadrature_points)
    previous = _midpoint_mean(w, cfg, nodes, h_table)
    while nodes < MAX_QUADRATURE_POINTS:
        nodes *= 2
        current = _midpoint_mean(w, cfg, nodes, h_table)
        if abs(current - previous) <= QUADRATURE_TOLERANCE * abs(current):
            return current
        previous = current
    logger.warning(f"Quadratura do MMCRB não atingiu a tolerância com {nodes} nós")
    return previous


def _integrated_phase_autocovariance(linewidth: float, period: float, lags: np.ndarray, dt: float) -> np.ndarray:
    """∫₀^{cT} da banda de fase em d, usando F(u) = max(2T − u, 0)²/2."""

    def F(u):
        return 0.5 * np.maximum(period - np.abs(u), 0.0) ** 2

    bands = 2.0 * F(lags * dt) - F((lags + 1) * dt) - F(np.abs(lags - 1) * dt)
    return (SPEED_OF_LIGHT / 2.0) * 2.0 * math.pi * linewidth * bands / (4.0 * math.pi ** 2)


def mmcrb_approx(w: ModulationWaveform, cfg: AcquisitionConfig, h_table: Optional[HTable] = None) -> float:
    """Aproximação do MMCRB: (1/cT)·Jᵀ(∫Σ_d dd)J/(JᵀJ)² com J em d = 0.

    A integral da banda de fase é analítica; as parcelas p(d) e q(d) do
    ruído aditivo são integradas numericamente.
    """
    span = SPEED_OF_LIGHT * w.chirp_duration_s
    size = cfg.num_samples - 1
    dt = 1.0 / cfg.fs_hz
    lags = np.arange(size, dtype=float)
    integrated = _integrated_phase_autocovariance(cfg.linewidth_hz, w.period, lags, dt)
    if not cfg.noiseless:
        p_integral, _ = integrate.quad(lambda d: shot_terms(snr_eta(cfg, d), h_table)[0], 0.0, span, limit=200)
        q_integral, _ = integrate.quad(lambda d: shot_terms(snr_eta(cfg, d), h_table)[1], 0.0, span, limit=200)
        integrated[0] += p_integral
        integrated[1] += q_integral

    jacobian = (2.0 / (SPEED_OF_LIGHT * cfg.fs_hz)) * w.derivative(_midpoints(cfg))
    norm = float(jacobian @ jacobian)
    if norm == 0:
        raise DegenerateInputError("Jacobiano nulo; modulação sem variação")
    correlation = signal.correlate(jacobian, jacobian, mode="full")[size - 1:]
    weights = np.where(lags == 0, 1.0, 2.0)
    return float(np.sum(weights * integrated * correlation)) / (span * norm ** 2)


def sign_diagnostic(
    d: float,
    w: ModulationWaveform,
    cfg: AcquisitionConfig,
    snr: Optional[float] = None,
    h_table: Optional[HTable] = None,
) -> Tuple[int, int]:
    """Conta entradas fora da diagonal com sinais opostos/iguais entre JJᵀ e Σ_d.

    Sinais opostos reduzem JᵀΣJ e, portanto, o MCRB.

    Returns:
        Tupla (opostos, iguais) sobre os pares (i, j), i ≠ j, com Σ_ij ≠ 0
    """
    spec = covariance_matrix(d, w, cfg, snr, h_table)
    jacobian = np.sign(distance_jacobian(d, w, cfg))
    opposite = same = 0
    for lag in np.nonzero(spec.autocovariance)[0]:
        if lag == 0:
            continue
        products = jacobian[: spec.size - lag] * jacobian[lag:] * np.sign(spec.autocovariance[lag])
        opposite += 2 * int(np.count_nonzero(products < 0))
        same += 2 * int(np.count_nonzero(products > 0))
    return opposite, same


def crb_awgn_cbf(
    cfg: AcquisitionConfig, alpha: float, chirp_rate: float, n: int, sigma2: float = 1.0
) -> Tuple[float, float]:
    """Limites de Fisher de (τ, f) para um sinal CBF triangular ideal em ruído branco.

    Monta a matriz de Fisher 4×4 em (α, b, f, τ) sobre 2N amostras
    (N de subida e N de descida), inverte-a após equilibrar a diagonal e
    devolve as entradas (τ, τ) e (f, f).

    Args:
        cfg: Configuração de aquisição (fornece f_s)
        alpha: Amplitude α
        chirp_rate: Taxa de chirp γ = B/T (Hz/s)
        n: Amostras por segmento N (≥ 3)
        sigma2: Variância de cada quadratura do ruído

    Returns:
        Tupla (var_tau_bound, var_f_bound) em s² e Hz²
    """
    if n < 3:
        raise InvalidArgumentError(f"Matriz de Fisher singular para N={n} < 3")
    if not alpha > 0 or not sigma2 > 0 or chirp_rate == 0:
        raise InvalidArgumentError("α, σ² e γ devem ser não nulos (α, σ² positivos)")
    t = np.arange(2 * n) / cfg.fs_hz
    # a fase de s não altera Re{∂s̄·∂s}
    s = np.full(2 * n, alpha, dtype=complex)
    sign = np.where(np.arange(2 * n) < n, 1.0, -1.0)
    derivatives = np.stack([
        s / alpha,
        1j * s,
        2j * np.pi * t * s,
        2j * np.pi * chirp_rate * sign * t * s,
    ])
    fisher = np.real(np.conj(derivatives) @ derivatives.T) / sigma2
    scale = 1.0 / np.sqrt(np.diag(fisher))
    equilibrated = fisher * np.outer(scale, scale)
    try:
        factor = linalg.cho_factor(equilibrated)
        inverse = linalg.cho_solve(factor, np.eye(4)) * np.outer(scale, scale)
    except linalg.LinAlgError as e:
        raise IllConditionedError(
            f"Matriz de Fisher singular para N={n}", condition=float(np.linalg.cond(equilibrated))
        ) from e
    return float(inverse[3, 3]), float(inverse[2, 2])


def crb_awgn_cbf_closed_form(
    cfg: AcquisitionConfig, alpha: float, chirp_rate: float, n: int, sigma2: float = 1.0
) -> Tuple[float, float]:
    """Formas fechadas de var(τ̂) e var(f̂) para o sinal CBF ideal."""
    if n < 3:
        raise InvalidArgumentError(f"Formas fechadas exigem N ≥ 3, recebido {n}")
    fs = cfg.fs_hz
    common = 4.0 * n * math.pi ** 2 * alpha ** 2 * (n - 1) * (n + 1) * (4 * n - 1)
    var_tau = sigma2 * 3.0 * fs ** 2 * (2 * n + 1) / (common * chirp_rate ** 2)
    var_f = sigma2 * 3.0 * fs ** 2 * (13 * n ** 2 - 12 * n + 2) / (common * (2 * n - 1))
    return var_tau, var_f
