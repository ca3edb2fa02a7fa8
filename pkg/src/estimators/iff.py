####################################
##### Arquivo: iff.py
##### Trabalho: Lidar FMCW além de Nyquist
####################################

"""Estimador por ajuste da frequência instantânea (IFF).

Extrai a frequência instantânea por diferenciação de fase, ajusta a
frequência instantânea parametrizada enrolada g̃^w_{τ,f} pela
verossimilhança da normal enrolada truncada e resolve a multimodalidade
com múltiplos pontos iniciais e recozimento de σ².
"""
import logging
import math
import traceback
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import logsumexp, softmax

from ..core.numerics import centered_modulo, maximize_quasi_newton
from ..models.errors import DegenerateInputError, InvalidArgumentError, NumericFailureError
from ..models.estimate import Estimate, EstimationMethod
from ..models.measurement import IfSequence, Measurement
from ..signal.modulation import ModulationWaveform, wrapped_if
from .calibration import HTable, NoiseCalibration, estimate_snr, sigma_hat
from .landscape import initial_lattice

logger = logging.getLogger(__name__)

MIN_SIGMA2 = 1e-8
RELAXED_SIGMA2 = 1e-2


def extract_if(u, fs: float) -> IfSequence:
    """ζ_n = (1/2π)·arg{u(t_{n+1})·conj(u(t_n))}.

    Args:
        u: Amostras complexas (≥ 2)
        fs: Taxa de amostragem (Hz)

    Returns:
        IfSequence: ζ em (−1/2, 1/2] nos pontos médios t′_n

    Raises:
        DegenerateInputError: Se alguma amostra tiver módulo nulo
    """
    u = np.asarray(u, dtype=complex)
    if u.ndim != 1 or u.size < 2:
        raise InvalidArgumentError(f"Sequência precisa de ao menos 2 amostras, recebido {u.shape}")
    if not fs > 0:
        raise InvalidArgumentError(f"Taxa de amostragem deve ser positiva: {fs}")
    zeros = np.nonzero(u == 0)[0]
    if zeros.size:
        raise DegenerateInputError(f"Amostra nula no índice {zeros[0]}", index=int(zeros[0]))
    zeta = centered_modulo(np.angle(u[1:] * np.conj(u[:-1])) / (2.0 * np.pi), 1.0)
    return IfSequence(zeta=zeta, midpoint_times=(np.arange(u.size - 1) + 0.5) / fs, fs_hz=fs)


def wrapped_normal_loglik(
    z: IfSequence, w: ModulationWaveform, tau: float, f: float, sigma2: float, K: int
) -> Tuple[float, np.ndarray]:
    """Log-verossimilhança da normal enrolada truncada e seu gradiente.

    L = Σ_n log Σ_{k=−K}^{K} exp{−[Ω₁(ζ_n − g̃^w(t′_n)) − k]²/(2σ²)}

    Args:
        z: Frequência instantânea extraída
        w: Forma de onda
        tau: Atraso τ (s)
        f: Doppler f (Hz)
        sigma2: Variância σ² (> 0)
        K: Truncamento (≥ 1)

    Returns:
        Tupla (valor, gradiente em (∂τ, ∂f))
    """
    if not sigma2 > 0:
        raise InvalidArgumentError(f"σ² deve ser positiva: {sigma2}")
    if K < 1:
        raise InvalidArgumentError(f"K deve ser ≥ 1: {K}")
    fs = z.fs_hz
    residual = centered_modulo(z.zeta - wrapped_if(w, tau, f, fs, z.midpoint_times), 1.0)
    shifts = residual[:, None] - np.arange(-K, K + 1)[None, :]
    exponents = -(shifts ** 2) / (2.0 * sigma2)
    value = float(np.sum(logsumexp(exponents, axis=1)))

    # ∂L/∂g̃_n = E[r_n − k]/σ², com pesos a posteriori de cada k
    score = np.sum(softmax(exponents, axis=1) * shifts, axis=1) / sigma2
    d_tau = float(np.sum(score * w.derivative(z.midpoint_times - tau))) / fs
    d_f = float(np.sum(score)) / fs
    return value, np.array([d_tau, d_f])


@dataclass
class AnnealingSchedule:
    """Variâncias decrescentes σ₁² > σ₂² > σ₃² = σ̂² do recozimento.

    Atributos:
        variances: Variância de cada estágio, em ordem de uso
        max_iter_per_stage: Iterações BFGS por estágio
    """

    variances: Tuple[float, ...]
    max_iter_per_stage: int = 200

    def __post_init__(self):
        self.variances = tuple(float(v) for v in self.variances)
        if not self.variances or any(not v > 0 for v in self.variances):
            raise InvalidArgumentError(f"Variâncias do recozimento inválidas: {self.variances}")
        if self.max_iter_per_stage < 1:
            raise InvalidArgumentError("Iterações por estágio devem ser ≥ 1")

    @classmethod
    def default(cls, sigma2_hat: float, max_iter_per_stage: int = 200) -> "AnnealingSchedule":
        """Três estágios: max(σ̂², 10⁻²), média geométrica e σ̂²."""
        final = max(sigma2_hat, MIN_SIGMA2)
        first = max(final, RELAXED_SIGMA2)
        return cls((first, math.sqrt(first * final), final), max_iter_per_stage)


def _run_start(
    z: IfSequence,
    w: ModulationWaveform,
    start: Tuple[float, float],
    schedule: AnnealingSchedule,
    K: int,
    estimate_velocity: bool,
):
    """Otimiza a partir de um ponto inicial em coordenadas (τf_s, f/f_s)."""
    fs = z.fs_hz
    count = max(len(z), 1)
    point = np.array([start[0] * fs, start[1] / fs]) if estimate_velocity else np.array([start[0] * fs])
    converged = False
    for sigma2 in schedule.variances:

        def objective(x, sigma2=sigma2):
            tau = x[0] / fs
            doppler = x[1] * fs if estimate_velocity else 0.0
            value, gradient = wrapped_normal_loglik(z, w, tau, doppler, sigma2, K)
            scaled = np.array([gradient[0] / fs, gradient[1] * fs])
            return value / count, (scaled if estimate_velocity else scaled[:1]) / count

        result = maximize_quasi_newton(objective, True, point, tol=1e-9, max_iter=schedule.max_iter_per_stage)
        point = result.point
        # o estágio final define o sinalizador
        converged = result.converged
    tau = float(point[0]) / fs
    doppler = float(point[1]) * fs if estimate_velocity else 0.0
    value, _ = wrapped_normal_loglik(z, w, tau, doppler, schedule.variances[-1], K)
    return tau, doppler, value, converged


def reduce_parameters(tau: float, f: float, period: float, fs: float) -> Tuple[float, float]:
    """Reduz τ a (0, 2T] e f a (−f_s/2, f_s/2]."""
    return period - float(np.mod(period - tau, period)), centered_modulo(f, fs)


def _best(candidates: List[Tuple[float, float, float, bool]]):
    """Maior objetivo; empates por menor τ e depois menor |f|."""
    return min(candidates, key=lambda c: (-c[2], c[0], abs(c[1])))


def iff_estimate(
    m: Measurement,
    w: ModulationWaveform,
    L: float,
    K: int = 2,
    gamma: float = 0.9,
    anneal: Optional[AnnealingSchedule] = None,
    h_table: Optional[HTable] = None,
    estimate_velocity: bool = True,
    max_iter_per_stage: int = 200,
) -> Estimate:
    """Estimador IFF com múltiplos pontos iniciais e recozimento.

    Args:
        m: Medição
        w: Forma de onda usada na medição
        L: Largura de linha do laser (Hz)
        K: Truncamento inicial da normal enrolada
        gamma: Espaçamento do reticulado de pontos iniciais
        anneal: Esquema de recozimento (padrão derivado de σ̂²)
        h_table: Tabela ĥ (dispensável apenas quando var(v) = 0)
        estimate_velocity: Se False, f é fixado em 0
        max_iter_per_stage: Iterações BFGS por estágio do recozimento padrão

    Returns:
        Estimate: τ̂ em (0, 2T] e f̂ em (−f_s/2, f_s/2]
    """
    fs = m.fs_hz
    z = extract_if(m.u, fs)
    try:
        snr = estimate_snr(m.u, m.v_aux)
    except DegenerateInputError:
        logger.debug("Canal auxiliar sem ruído; SNR tratada como infinita")
        snr = math.inf
    calibration = NoiseCalibration(
        snr_eta_hat=snr, sigma2_hat=sigma_hat(L, fs, snr, h_table), K=K, h_table=h_table
    )
    schedule = anneal or AnnealingSchedule.default(calibration.sigma2_hat, max_iter_per_stage)
    lattice = initial_lattice(w, fs, gamma, estimate_velocity)

    candidates = []
    for start in lattice:
        try:
            candidates.append(_run_start(z, w, start, schedule, calibration.K, estimate_velocity))
        except NumericFailureError as e:
            logger.warning(f"Ponto inicial {start} falhou: {e}")
            logger.debug(f"Stack trace: {traceback.format_exc()}")

    diagnostics = {
        "snr_eta_hat": snr,
        "sigma2_hat": calibration.sigma2_hat,
        "K": calibration.K,
        "starts": len(lattice),
    }
    if not candidates:
        logger.error("Todos os pontos iniciais falharam; devolvendo o melhor ponto do reticulado")
        final = schedule.variances[-1]
        scored = [
            (tau, f, wrapped_normal_loglik(z, w, tau, f, final, calibration.K)[0], False)
            for tau, f in lattice
        ]
        tau, f, value, _ = _best(scored)
        tau, f = reduce_parameters(tau, f, w.period, fs)
        return Estimate(tau, f, EstimationMethod.IFF, w.center_frequency_hz, value, False, diagnostics)

    tau, f, value, converged = _best(candidates)
    tau, f = reduce_parameters(tau, f, w.period, fs)
    return Estimate(
        tau_hat=tau,
        f_hat=f,
        method=EstimationMethod.IFF,
        center_frequency_hz=w.center_frequency_hz,
        objective_value=value,
        converged=converged,
        diagnostics=diagnostics,
    )
