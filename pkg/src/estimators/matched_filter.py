####################################
##### Arquivo: matched_filter.py
##### Trabalho: Lidar FMCW além de Nyquist
####################################

"""Estimadores por filtro casado.

O objetivo |Σ u(t_n)·e^{−jφ(t_n;τ,f)}|² é avaliado numa grade fina de
atrasos τ = m/(M f_s) por correlação no domínio de Fourier do sinal
demodulado u·e^{−jφ0} com o modelo e^{−jφ0(·−τ)} sobreamostrado, e o
máximo da grade é refinado localmente (Brent em τ, Nelder–Mead em (τ, f)).
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sp_fft

from ..core.numerics import centered_modulo, maximize_scalar_bounded, maximize_simplex
from ..models.errors import InvalidArgumentError, ResourceLimitError
from ..models.estimate import Estimate, EstimationMethod
from ..models.measurement import Measurement
from ..signal.modulation import ModulationWaveform, interference_phase
from .iff import reduce_parameters

logger = logging.getLogger(__name__)

DEFAULT_GRID_CAP = 2e9
DOPPLER_CHUNK = 64


@dataclass
class MatchedFilterGrid:
    """Grades de atraso e Doppler do filtro casado.

    Atributos:
        upsample_factor: Fator M = ⌈B/f_s⌉
        fs_hz: Taxa de amostragem
        num_samples: Número de amostras N
        chirp_duration_s: Duração do chirp T
    """

    upsample_factor: int
    fs_hz: float
    num_samples: int
    chirp_duration_s: float

    def __post_init__(self):
        if self.upsample_factor < 1:
            raise InvalidArgumentError(f"Fator de sobreamostragem deve ser ≥ 1: {self.upsample_factor}")
        if self.num_samples < 2:
            raise InvalidArgumentError(f"Grade precisa de ao menos 2 amostras: {self.num_samples}")

    @classmethod
    def for_waveform(cls, w: ModulationWaveform, fs: float, num_samples: int) -> "MatchedFilterGrid":
        return cls(
            upsample_factor=max(1, int(math.ceil(w.bandwidth_hz / fs - 1e-12))),
            fs_hz=fs,
            num_samples=num_samples,
            chirp_duration_s=w.chirp_duration_s,
        )

    @property
    def fine_length(self) -> int:
        return self.upsample_factor * self.num_samples

    @property
    def delay_step(self) -> float:
        return 1.0 / (self.upsample_factor * self.fs_hz)

    @property
    def delay_count(self) -> int:
        """Número de atrasos da grade em [0, min(N/f_s, 2T))."""
        in_period = int(math.ceil(2.0 * self.chirp_duration_s / self.delay_step - 1e-9))
        return min(self.fine_length, in_period)

    @property
    def delay_grid(self) -> np.ndarray:
        return np.arange(self.delay_count) * self.delay_step

    @property
    def doppler_grid(self) -> np.ndarray:
        """Candidatos ℓ/(2T) enrolados e centrados em (−f_s/2, f_s/2]."""
        count = max(1, int(round(2.0 * self.chirp_duration_s * self.fs_hz)))
        return np.sort(centered_modulo(np.arange(count) / (2.0 * self.chirp_duration_s), self.fs_hz))

    @property
    def whole_periods(self) -> bool:
        """Se a janela fina contém um número inteiro de períodos 2T."""
        period_fine = 2.0 * self.chirp_duration_s / self.delay_step
        periods = self.fine_length / period_fine
        return abs(period_fine - round(period_fine)) < 1e-9 and abs(periods - round(periods)) < 1e-9 and round(periods) > 0


def mf_objective(u, w: ModulationWaveform, tau: float, f: float, fs: float) -> float:
    """|Σ_n u(t_n)·exp[−jφ(t_n;τ,f)]|² com φ = φ0(t) − φ0(t−τ) + 2πft.

    Args:
        u: Amostras complexas
        w: Forma de onda
        tau: Atraso (s)
        f: Doppler (Hz)
        fs: Taxa de amostragem (Hz)

    Returns:
        float: Valor não negativo do objetivo
    """
    u = np.asarray(u, dtype=complex)
    times = np.arange(u.size) / fs
    return float(np.abs(np.sum(u * np.exp(-1j * interference_phase(w, tau, f, times)))) ** 2)


class _Correlator:
    """Correlação de sinais amostrados com o modelo e^{j2πP̃(t − τ)} na grade fina."""

    def __init__(self, w: ModulationWaveform, grid: MatchedFilterGrid):
        self.grid = grid
        self.circular = grid.whole_periods
        fine = grid.fine_length
        count = grid.delay_count
        step = grid.delay_step
        if self.circular:
            template = np.exp(2j * np.pi * w.periodic_phase(np.arange(fine) * step))
            # correlação circular: C(j) = IFFT(X · H[−l])
            spectrum = sp_fft.fft(template)
            self.kernel = np.roll(spectrum[::-1], 1)
            self.length = fine
        else:
            indices = np.arange(-(count - 1), fine)
            template = np.exp(2j * np.pi * w.periodic_phase(indices * step))
            self.length = sp_fft.next_fast_len(fine + template.size - 1)
            self.kernel = sp_fft.fft(template[::-1], self.length)
        self.demodulation = np.exp(-2j * np.pi * w.periodic_phase(np.arange(grid.num_samples) / grid.fs_hz))

    def correlate(self, rows: np.ndarray) -> np.ndarray:
        """|C(j)|² para cada linha de `rows` (amostras já demoduladas em Doppler)."""
        grid = self.grid
        M = grid.upsample_factor
        x = rows * self.demodulation
        # C(j) = Σ_n x[n]·h̄(nM − j): o objetivo exato em τ = j/(M f_s)
        inserted = np.zeros((x.shape[0], grid.fine_length), dtype=complex)
        inserted[:, ::M] = x
        spectrum = sp_fft.fft(inserted, self.length, axis=1)
        full = sp_fft.ifft(spectrum * self.kernel[None, :], axis=1)
        count = grid.delay_count
        if self.circular:
            values = full[:, :count]
        else:
            values = full[:, grid.fine_length - 1: grid.fine_length - 1 + count]
        return np.abs(values) ** 2


def _reduce_delay(tau: float, period: float) -> float:
    return period - float(np.mod(period - tau, period))


def mf_distance(m: Measurement, w: ModulationWaveform) -> Estimate:
    """Filtro casado de distância (f = 0).

    Args:
        m: Medição
        w: Forma de onda

    Returns:
        Estimate: τ̂ em (0, 2T] e f̂ = 0
    """
    fs = m.fs_hz
    grid = MatchedFilterGrid.for_waveform(w, fs, m.num_samples)
    correlator = _Correlator(w, grid)
    values = correlator.correlate(m.u[None, :])[0]
    index = int(np.argmax(values))
    coarse = index * grid.delay_step
    logger.debug(
        f"Filtro casado: M={grid.upsample_factor}, {grid.delay_count} atrasos, "
        f"{'circular' if correlator.circular else 'linear'}, máximo em τ={coarse:.4e} s"
    )
    result = maximize_scalar_bounded(
        lambda tau: mf_objective(m.u, w, tau, 0.0, fs),
        coarse - grid.delay_step,
        coarse + grid.delay_step,
        coarse,
        tol=1e-12,
    )
    return Estimate(
        tau_hat=_reduce_delay(result.scalar, w.period),
        f_hat=0.0,
        method=EstimationMethod.MF,
        center_frequency_hz=w.center_frequency_hz,
        objective_value=result.value,
        converged=result.converged,
        diagnostics={"upsample_factor": grid.upsample_factor, "grid_index": index},
    )


def mf_joint(m: Measurement, w: ModulationWaveform, grid_cap: float = DEFAULT_GRID_CAP) -> Estimate:
    """Filtro casado conjunto de atraso e Doppler.

    Avalia a grade completa (uma correlação de Fourier por candidato
    Doppler), escolhe o máximo (empates: menor τ, depois menor |f|) e o
    refina com Nelder–Mead dentro das células vizinhas.

    Raises:
        ResourceLimitError: Se M·N·N_f exceder `grid_cap`
    """
    fs = m.fs_hz
    grid = MatchedFilterGrid.for_waveform(w, fs, m.num_samples)
    dopplers = grid.doppler_grid
    size = float(grid.fine_length) * dopplers.size
    if size > grid_cap:
        raise ResourceLimitError(
            f"Grade conjunta com {size:.3e} pontos excede o limite {grid_cap:.3e}; "
            "use o modo somente distância (--method mf)",
            {"grid_points": size, "cap": grid_cap},
        )
    correlator = _Correlator(w, grid)
    times = m.sample_times
    surface = np.empty((dopplers.size, grid.delay_count))
    for start in range(0, dopplers.size, DOPPLER_CHUNK):
        chunk = dopplers[start:start + DOPPLER_CHUNK]
        rows = m.u[None, :] * np.exp(-2j * np.pi * chunk[:, None] * times[None, :])
        surface[start:start + chunk.size] = correlator.correlate(rows)

    peak = surface.max()
    rows, columns = np.nonzero(surface == peak)
    order = sorted(zip(columns, np.abs(dopplers[rows]), rows))
    column, _, row = order[0]
    tau0 = column * grid.delay_step
    f0 = float(dopplers[row])
    f_step = 1.0 / (2.0 * w.chirp_duration_s)

    def objective(x):
        return mf_objective(m.u, w, x[0] * grid.delay_step, x[1] * f_step, fs)

    start = np.array([tau0 / grid.delay_step, f0 / f_step])
    result = maximize_simplex(
        objective,
        start,
        [(start[0] - 1.0, start[0] + 1.0), (start[1] - 1.0, start[1] + 1.0)],
        tol=1e-8,
        initial_step=(0.5, 0.5),
    )
    tau, f = reduce_parameters(result.point[0] * grid.delay_step, result.point[1] * f_step, w.period, fs)
    return Estimate(
        tau_hat=tau,
        f_hat=f,
        method=EstimationMethod.MF_JOINT,
        center_frequency_hz=w.center_frequency_hz,
        objective_value=result.value,
        converged=result.converged,
        diagnostics={"upsample_factor": grid.upsample_factor, "doppler_candidates": int(dopplers.size)},
    )
