####################################
##### Arquivo: estimate.py
##### Trabalho: Lidar FMCW além de Nyquist
####################################

"""Modelos dos resultados de estimação.

Este módulo define os métodos de estimação disponíveis, o par de
frequências de batimento e a estimativa final de atraso e Doppler com as
grandezas derivadas (distância e velocidade).
"""
import math
from dataclasses import dataclass, field
from enum import Enum, auto
from typing import Any, Dict

from .config import SPEED_OF_LIGHT
from .errors import InvalidArgumentError


class EstimationMethod(Enum):
    """Métodos de estimação suportados."""

    PERIODOGRAM = auto()
    LORENTZIAN = auto()
    TSUCHIDA = auto()
    MF = auto()
    MF_JOINT = auto()
    IFF = auto()

    @property
    def cli_name(self) -> str:
        """Nome usado na linha de comando (ex.: mf-joint)."""
        return self.name.lower().replace("_", "-")

    @classmethod
    def from_cli(cls, name: str) -> "EstimationMethod":
        """Converte o nome da linha de comando no método.

        Raises:
            InvalidArgumentError: Se o nome não corresponder a nenhum método
        """
        key = name.strip().upper().replace("-", "_")
        if key not in cls.__members__:
            valid = ", ".join(m.cli_name for m in cls)
            raise InvalidArgumentError(f"Método desconhecido '{name}'. Opções: {valid}")
        return cls[key]


@dataclass
class BeatFrequencies:
    """Frequências de batimento enroladas dos dois segmentos do chirp.

    Atributos:
        f_b1: Batimento do chirp de subida, em (−f_s/2, f_s/2]
        f_b2: Batimento do chirp de descida, em (−f_s/2, f_s/2]
        fs_hz: Taxa de amostragem que define o intervalo enrolado
    """

    f_b1: float
    f_b2: float
    fs_hz: float

    def __post_init__(self):
        half = 0.5 * self.fs_hz
        for name in ("f_b1", "f_b2"):
            value = getattr(self, name)
            if not -half - 1e-9 * half < value <= half + 1e-9 * half:
                raise InvalidArgumentError(f"{name}={value} fora do intervalo enrolado (−{half}, {half}]")


@dataclass
class Estimate:
    """Estimativa de atraso e Doppler.

    Atributos:
        tau_hat: Atraso estimado τ̂ (s)
        f_hat: Doppler estimado f̂ (Hz)
        method: Método que produziu a estimativa
        center_frequency_hz: f_c usada na conversão para velocidade
        objective_value: Valor do objetivo no ótimo
        converged: Se o otimizador convergiu
        diagnostics: Informações adicionais (iterações, pontos iniciais, ...)
        d_hat: Distância derivada τ̂·c/2 (m)
        v_hat: Velocidade derivada f̂·c/(2f_c) (m/s)
    """

    tau_hat: float
    f_hat: float
    method: EstimationMethod
    center_frequency_hz: float
    objective_value: float = math.nan
    converged: bool = True
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    d_hat: float = field(init=False)
    v_hat: float = field(init=False)

    def __post_init__(self):
        self.tau_hat = float(self.tau_hat)
        self.f_hat = float(self.f_hat)
        self.d_hat = self.tau_hat * SPEED_OF_LIGHT / 2.0
        if self.center_frequency_hz > 0:
            self.v_hat = self.f_hat * SPEED_OF_LIGHT / (2.0 * self.center_frequency_hz)
        else:
            self.v_hat = math.nan

    def to_dict(self) -> Dict[str, Any]:
        """Converter a estimativa para um dicionário serializável."""
        return {
            "method": self.method.cli_name,
            "tau_hat_s": self.tau_hat,
            "f_hat_hz": self.f_hat,
            "d_hat_m": self.d_hat,
            "v_hat_mps": self.v_hat,
            "objective": self.objective_value,
            "converged": self.converged,
        }
