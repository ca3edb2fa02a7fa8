####################################
##### Arquivo: measurement.py
##### Trabalho: Lidar FMCW além de Nyquist
####################################

"""Modelos das medições amostradas e da sequência de frequência instantânea."""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import ExperimentConfig
from .errors import InvalidArgumentError


@dataclass
class Measurement:
    """Medição complexa I/Q e canal auxiliar de soma.

    Atributos:
        u: Amostras complexas da interferência u(t_n)
        v_aux: Amostras do canal auxiliar A₂ + η′(t_n)
        config: Configuração que gerou (ou descreve) a medição
        seed: Semente usada na síntese
    """

    u: np.ndarray
    v_aux: np.ndarray
    config: ExperimentConfig
    seed: Optional[int] = None

    def __post_init__(self):
        """Validar os vetores da medição."""
        self.u = np.asarray(self.u, dtype=complex)
        self.v_aux = np.asarray(self.v_aux, dtype=complex)
        if self.u.ndim != 1 or self.u.size < 2:
            raise InvalidArgumentError(f"Medição precisa de ao menos 2 amostras, recebido {self.u.shape}")
        if self.v_aux.shape != self.u.shape:
            raise InvalidArgumentError(
                f"Canal auxiliar com tamanho {self.v_aux.size} difere de u ({self.u.size})"
            )
        if not np.all(np.isfinite(self.u)):
            raise InvalidArgumentError("Amostras de u devem ser finitas")

    @property
    def fs_hz(self) -> float:
        return self.config.acquisition.fs_hz

    @property
    def num_samples(self) -> int:
        return self.u.size

    @property
    def sample_times(self) -> np.ndarray:
        """Instantes de amostragem t_n = n/f_s."""
        return np.arange(self.u.size) / self.fs_hz


@dataclass
class IfSequence:
    """Frequência instantânea extraída por diferenciação de fase.

    Atributos:
        zeta: Valores ζ_n em ciclos por amostra, em (−1/2, 1/2]
        midpoint_times: Instantes médios t′_n = (t_n + t_{n+1})/2
        fs_hz: Taxa de amostragem usada na normalização
    """

    zeta: np.ndarray
    midpoint_times: np.ndarray
    fs_hz: float

    def __post_init__(self):
        self.zeta = np.asarray(self.zeta, dtype=float)
        self.midpoint_times = np.asarray(self.midpoint_times, dtype=float)
        if self.zeta.shape != self.midpoint_times.shape:
            raise InvalidArgumentError("ζ e instantes médios com tamanhos diferentes")
        if np.any(self.zeta <= -0.5) or np.any(self.zeta > 0.5):
            raise InvalidArgumentError("Valores de ζ fora de (−1/2, 1/2]")

    def __len__(self) -> int:
        return self.zeta.size
