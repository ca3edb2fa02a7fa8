####################################
##### Arquivo: modulation.py
##### Trabalho: Lidar FMCW além de Nyquist
####################################

"""Funções de modulação a(t) e frequência instantânea parametrizada.

Todas as diferenças de frequência são calculadas sobre o desvio em banda
base a(t) − f_c; a portadora f_c (da ordem de 193 THz) só aparece na fase
transmitida e na conversão Doppler → velocidade.
"""
import logging
from dataclasses import dataclass
from enum import Enum, auto
from functools import cached_property
from typing import Optional

import numpy as np
from scipy import integrate

from ..core.numerics import centered_modulo
from ..models.config import DEFAULT_CENTER_FREQUENCY_HZ, WaveformSettings
from ..models.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

# Constantes da escada suave (t0 = T/10, c1 = 13.68 B/T², c2 = −0.069 B, c3 = 30/T)
SMOOTH_STAIR_T0 = 0.1
SMOOTH_STAIR_C1 = 13.68
SMOOTH_STAIR_C2 = -0.069
SMOOTH_STAIR_C3 = 30.0


class WaveformKind(Enum):
    """Tipos de modulação suportados."""

    TRIANGULAR = auto()
    SINUSOIDAL = auto()
    SMOOTH_STAIR = auto()
    TABULATED = auto()

    @classmethod
    def from_name(cls, name: str) -> "WaveformKind":
        key = name.strip().upper()
        if key not in cls.__members__:
            raise InvalidArgumentError(f"Modulação desconhecida: {name}")
        return cls[key]


@dataclass(frozen=True, eq=False)
class ModulationWaveform:
    """Função de modulação a(t), periódica com período 2T.

    Atributos:
        kind: Tipo de modulação
        bandwidth_hz: Largura de banda B
        chirp_duration_s: Duração do chirp T
        center_frequency_hz: Frequência central f_c
        table_times: Instantes da tabela (somente TABULATED)
        table_values: Desvio a(t) − f_c nos instantes da tabela (somente TABULATED)
    """

    kind: WaveformKind
    bandwidth_hz: float
    chirp_duration_s: float
    center_frequency_hz: float = DEFAULT_CENTER_FREQUENCY_HZ
    table_times: Optional[np.ndarray] = None
    table_values: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.bandwidth_hz <= 0 or self.chirp_duration_s <= 0:
            raise InvalidArgumentError(
                f"B e T devem ser positivos (B={self.bandwidth_hz}, T={self.chirp_duration_s})"
            )
        if self.kind == WaveformKind.TABULATED:
            self._validate_table()

    def _validate_table(self):
        """Garantir que a tabela cobre [0, 2T] com passo ≤ 1/(4B)."""
        if self.table_times is None or self.table_values is None:
            raise InvalidArgumentError("Modulação tabelada exige tabela (t, a)")
        times = np.asarray(self.table_times, dtype=float)
        values = np.asarray(self.table_values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or times.size < 2:
            raise InvalidArgumentError("Tabela de modulação malformada")
        steps = np.diff(times)
        if np.any(steps <= 0):
            raise InvalidArgumentError("Instantes da tabela devem ser estritamente crescentes")
        tolerance = 1e-9 * self.period
        if times[0] > tolerance or times[-1] < self.period - tolerance:
            raise InvalidArgumentError(
                f"Tabela cobre [{times[0]}, {times[-1]}] mas precisa cobrir [0, {self.period}]"
            )
        max_step = 1.0 / (4.0 * self.bandwidth_hz)
        if steps.max() > max_step * (1 + 1e-9):
            raise InvalidArgumentError(
                f"Passo da tabela {steps.max():.3e} s excede 1/(4B) = {max_step:.3e} s"
            )

    @classmethod
    def from_settings(cls, settings: WaveformSettings, table=None) -> "ModulationWaveform":
        """Criar a forma de onda a partir da configuração.

        Args:
            settings: Seção `waveform.*` da configuração
            table: Tupla (tempos, desvios) já carregada, para TABULATED

        Returns:
            ModulationWaveform: Forma de onda pronta para uso
        """
        kind = WaveformKind.from_name(settings.kind)
        times, values = (None, None) if table is None else table
        return cls(
            kind=kind,
            bandwidth_hz=settings.bandwidth_hz,
            chirp_duration_s=settings.chirp_duration_s,
            center_frequency_hz=settings.center_frequency_hz,
            table_times=None if times is None else np.asarray(times, dtype=float),
            table_values=None if values is None else np.asarray(values, dtype=float),
        )

    @property
    def period(self) -> float:
        """Período 2T."""
        return 2.0 * self.chirp_duration_s

    # ----- desvio a(t) − f_c -----

    def deviation(self, t):
        """Desvio em banda base a(t) − f_c, em Hz."""
        s = np.mod(np.asarray(t, dtype=float), self.period)
        B, T = self.bandwidth_hz, self.chirp_duration_s
        if self.kind == WaveformKind.TRIANGULAR:
            return np.where(s < T, (B / T) * (s - 0.5 * T), -(B / T) * (s - 1.5 * T))
        if self.kind == WaveformKind.SINUSOIDAL:
            return -0.5 * B * np.cos(np.pi * s / T)
        if self.kind == WaveformKind.SMOOTH_STAIR:
            return self._stair_deviation(s)
        return np.interp(s, self.table_times, self.table_values)

    def evaluate(self, t):
        """Frequência instantânea transmitida a(t), em Hz."""
        return self.center_frequency_hz + self.deviation(t)

    def derivative(self, t):
        """Derivada da(t)/dt pela direita, em Hz/s."""
        s = np.mod(np.asarray(t, dtype=float), self.period)
        B, T = self.bandwidth_hz, self.chirp_duration_s
        if self.kind == WaveformKind.TRIANGULAR:
            return np.where(s < T, B / T, -B / T)
        if self.kind == WaveformKind.SINUSOIDAL:
            return 0.5 * B * (np.pi / T) * np.sin(np.pi * s / T)
        if self.kind == WaveformKind.SMOOTH_STAIR:
            return self._stair_derivative(s)
        index = self._table_segment(s)
        return self._table_slopes[index]

    # ----- integral da fase -----

    def phase_integral(self, t):
        """Integral ∫₀ᵗ (a(s) − f_c) ds, em ciclos."""
        t = np.asarray(t, dtype=float)
        periods = np.floor(t / self.period)
        s = t - periods * self.period
        # floor pode deixar s = 2T por arredondamento
        s = np.where(s >= self.period, s - self.period, s)
        return periods * self._full_period_integral + self._phase_within_period(s)

    def transmitted_phase(self, t):
        """Fase transmitida φ0(t) = 2π∫₀ᵗ a(s) ds, em radianos."""
        t = np.asarray(t, dtype=float)
        return 2.0 * np.pi * (self.center_frequency_hz * t + self.phase_integral(t))

    def periodic_phase(self, t):
        """Integral do desvio sem o termo linear médio (periódica em 2T), em ciclos."""
        t = np.asarray(t, dtype=float)
        return self.phase_integral(t) - self.mean_deviation * t

    @property
    def mean_deviation(self) -> float:
        """Valor médio do desvio em um período."""
        return self._full_period_integral / self.period

    @cached_property
    def _full_period_integral(self) -> float:
        return float(self._phase_within_period(np.array([self.period]))[0])

    def _phase_within_period(self, s):
        """Integral de 0 a s ∈ [0, 2T]."""
        B, T = self.bandwidth_hz, self.chirp_duration_s
        if self.kind == WaveformKind.TRIANGULAR:
            up = (B / (2 * T)) * (s * s - T * s)
            down = -(B / (2 * T)) * (s - T) * (s - 2 * T)
            return np.where(s < T, up, down)
        if self.kind == WaveformKind.SINUSOIDAL:
            return -0.5 * B * (T / np.pi) * np.sin(np.pi * s / T)
        if self.kind == WaveformKind.SMOOTH_STAIR:
            return self._stair_phase(s)
        index = self._table_segment(s)
        offset = s - self.table_times[index]
        return (
            self._table_cumulative[index]
            + self.table_values[index] * offset
            + 0.5 * self._table_slopes[index] * offset * offset
        )

    def abs_deviation_integral(self) -> float:
        """Integral ∫₀^{2T} |a(t) − f_c| dt, em ciclos."""
        T = self.chirp_duration_s
        if self.kind == WaveformKind.TRIANGULAR:
            return 0.5 * self.bandwidth_hz * T
        if self.kind == WaveformKind.SINUSOIDAL:
            return 2.0 * self.bandwidth_hz * T / np.pi
        value, _ = integrate.quad(
            lambda x: abs(float(self.deviation(x))), 0.0, self.period, limit=400
        )
        return value

    # ----- escada suave -----

    @cached_property
    def _stair_constants(self):
        B, T = self.bandwidth_hz, self.chirp_duration_s
        return (
            SMOOTH_STAIR_T0 * T,
            SMOOTH_STAIR_C1 * B / (T * T),
            SMOOTH_STAIR_C2 * B,
            SMOOTH_STAIR_C3 / T,
        )

    def _stair_branch(self, s):
        t0, _, _, _ = self._stair_constants
        T = self.chirp_duration_s
        edges = np.array([t0, T - t0, T + t0, 2 * T - t0])
        return np.searchsorted(edges, s, side="right")

    def _stair_deviation(self, s):
        t0, c1, c2, c3 = self._stair_constants
        B, T = self.bandwidth_hz, self.chirp_duration_s
        branch = self._stair_branch(s)
        return np.select(
            [branch == 0, branch == 1, branch == 2, branch == 3],
            [
                c1 * s ** 2,
                (B / T) * s - c2 * np.sin(c3 * (s - 0.5 * T)),
                B - c1 * (s - T) ** 2,
                (B / T) * (2 * T - s) - c2 * np.sin(c3 * (1.5 * T - s)),
            ],
            default=c1 * (s - 2 * T) ** 2,
        )

    def _stair_derivative(self, s):
        t0, c1, c2, c3 = self._stair_constants
        B, T = self.bandwidth_hz, self.chirp_duration_s
        branch = self._stair_branch(s)
        return np.select(
            [branch == 0, branch == 1, branch == 2, branch == 3],
            [
                2 * c1 * s,
                B / T - c2 * c3 * np.cos(c3 * (s - 0.5 * T)),
                -2 * c1 * (s - T),
                -B / T + c2 * c3 * np.cos(c3 * (1.5 * T - s)),
            ],
            default=2 * c1 * (s - 2 * T),
        )

    def _stair_antiderivatives(self, s):
        """Primitivas de cada ramo avaliadas em s (sem constantes de junção)."""
        _, c1, c2, c3 = self._stair_constants
        B, T = self.bandwidth_hz, self.chirp_duration_s
        return [
            c1 * s ** 3 / 3.0,
            (B / T) * s ** 2 / 2.0 + (c2 / c3) * np.cos(c3 * (s - 0.5 * T)),
            B * s - c1 * (s - T) ** 3 / 3.0,
            (B / T) * (2 * T * s - s ** 2 / 2.0) - (c2 / c3) * np.cos(c3 * (1.5 * T - s)),
            c1 * (s - 2 * T) ** 3 / 3.0,
        ]

    @cached_property
    def _stair_offsets(self):
        """Constantes que tornam a integral contínua nas junções dos ramos."""
        t0, _, _, _ = self._stair_constants
        T = self.chirp_duration_s
        starts = [0.0, t0, T - t0, T + t0, 2 * T - t0]
        offsets = [0.0]
        accumulated = 0.0
        for branch in range(1, 5):
            previous = self._stair_antiderivatives(starts[branch])[branch - 1]
            previous_start = self._stair_antiderivatives(starts[branch - 1])[branch - 1]
            accumulated += previous - previous_start
            current_start = self._stair_antiderivatives(starts[branch])[branch]
            offsets.append(accumulated - current_start)
        return np.array(offsets)

    def _stair_phase(self, s):
        branch = self._stair_branch(s)
        primitives = self._stair_antiderivatives(s)
        value = np.choose(branch, primitives)
        return value + self._stair_offsets[branch]

    # ----- tabela -----

    @cached_property
    def _table_slopes(self) -> np.ndarray:
        slopes = np.diff(self.table_values) / np.diff(self.table_times)
        return np.append(slopes, slopes[-1])

    @cached_property
    def _table_cumulative(self) -> np.ndarray:
        widths = np.diff(self.table_times)
        areas = 0.5 * (self.table_values[1:] + self.table_values[:-1]) * widths
        return np.concatenate([[0.0], np.cumsum(areas)])

    def _table_segment(self, s):
        index = np.searchsorted(self.table_times, s, side="right") - 1
        return np.clip(index, 0, self.table_times.size - 2)


def if_difference(w: ModulationWaveform, tau: float, t):
    """Diferença de frequência a(t) − a(t−τ), em Hz."""
    t = np.asarray(t, dtype=float)
    return w.deviation(t) - w.deviation(t - tau)


def wrapped_if(w: ModulationWaveform, tau: float, f: float, fs: float, t):
    """Frequência instantânea enrolada normalizada g̃^w_{τ,f}(t).

    Args:
        w: Forma de onda
        tau: Atraso τ (s)
        f: Doppler f (Hz)
        fs: Taxa de amostragem (Hz)
        t: Instantes de avaliação (s)

    Returns:
        Valores (1/f_s)·Ω_{f_s}[a(t) − a(t−τ) + f], em ciclos por amostra
    """
    if fs <= 0:
        raise InvalidArgumentError(f"Taxa de amostragem deve ser positiva: {fs}")
    return centered_modulo((if_difference(w, tau, t) + f) / fs, 1.0)


def interference_phase(w: ModulationWaveform, tau: float, f: float, t):
    """Fase da interferência φ(t) = φ0(t) − φ0(t−τ) + 2πft, em radianos.

    O termo constante 2πf_cτ é reduzido módulo 2π antes da soma.
    """
    t = np.asarray(t, dtype=float)
    carrier_cycles = np.mod(w.center_frequency_hz * tau, 1.0)
    cycles = w.phase_integral(t) - w.phase_integral(t - tau) + f * t
    return 2.0 * np.pi * (cycles + carrier_cycles)
