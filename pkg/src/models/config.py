####################################
##### Arquivo: config.py
##### Trabalho: Lidar FMCW além de Nyquist
####################################

"""Modelos de configuração dos experimentos de lidar FMCW.

Este módulo define as estruturas de dados e a lógica de validação para a
forma de onda, a aquisição, o alvo e os parâmetros dos estimadores. O
arquivo de configuração é um objeto JSON plano com chaves pontuadas
(`waveform.kind`, `acq.fs_hz`, `target.d_m`, ...).
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from .errors import ConfigError

logger = logging.getLogger(__name__)

SPEED_OF_LIGHT = 299792458.0
ELECTRON_CHARGE = 1.602176634e-19
DEFAULT_WAVELENGTH_M = 1550e-9
DEFAULT_CENTER_FREQUENCY_HZ = SPEED_OF_LIGHT / DEFAULT_WAVELENGTH_M

WAVEFORM_KINDS = ("triangular", "sinusoidal", "smooth_stair", "tabulated")
FREQUENCY_ESTIMATORS = ("periodogram", "lorentzian")
PERSISTENCE_MODES = ("local", "oracle", "auto")


def _require_positive(key: str, value: float):
    if not math.isfinite(value) or value <= 0:
        raise ConfigError(key, f"deve ser positivo e finito, recebido {value}")


def _require_non_negative(key: str, value: float):
    if not math.isfinite(value) or value < 0:
        raise ConfigError(key, f"não pode ser negativo, recebido {value}")


@dataclass
class WaveformSettings:
    """Parâmetros da função de modulação a(t).

    Atributos:
        kind: Tipo de modulação (triangular, sinusoidal, smooth_stair, tabulated)
        bandwidth_hz: Largura de banda B
        chirp_duration_s: Duração do chirp T (período 2T)
        center_frequency_hz: Frequência central f_c
        table_path: CSV `t_seconds,a_hz` para modulações tabeladas
    """

    kind: str = "triangular"
    bandwidth_hz: float = 500e6
    chirp_duration_s: float = 2e-6
    center_frequency_hz: float = DEFAULT_CENTER_FREQUENCY_HZ
    table_path: Optional[str] = None

    def __post_init__(self):
        """Validar valores de configuração."""
        if self.kind not in WAVEFORM_KINDS:
            raise ConfigError("waveform.kind", f"tipo desconhecido '{self.kind}', use um de {WAVEFORM_KINDS}")
        _require_positive("waveform.bandwidth_hz", self.bandwidth_hz)
        _require_positive("waveform.chirp_duration_s", self.chirp_duration_s)
        _require_non_negative("waveform.center_frequency_hz", self.center_frequency_hz)
        if self.kind == "tabulated" and not self.table_path:
            raise ConfigError("waveform.table_path", "obrigatório para modulação tabelada")


@dataclass
class AcquisitionConfig:
    """Parâmetros de amostragem e do orçamento de potência do lidar.

    Atributos:
        fs_hz: Taxa de amostragem f_s
        num_samples: Número de amostras N
        linewidth_hz: Largura de linha do laser L
        tx_power_w: Potência transmitida P_TX
        lo_power_w: Potência do oscilador local P_LO
        aperture_m2: Área da abertura de recepção A
        reflectivity: Refletividade do alvo ρ
        responsivity_a_per_w: Responsividade do fotodetector R_PD
        noiseless: Desativa ruído de fase e ruído shot (depuração)
    """

    fs_hz: float = 200e6
    num_samples: int = 800
    linewidth_hz: float = 100e3
    tx_power_w: float = 1e-3
    lo_power_w: float = 1e-3
    aperture_m2: float = 1e-6
    reflectivity: float = 0.01
    responsivity_a_per_w: float = 1.0
    noiseless: bool = False

    electron_charge = ELECTRON_CHARGE
    speed_of_light = SPEED_OF_LIGHT

    def __post_init__(self):
        """Validar valores de configuração."""
        self._validate_sampling()
        self._validate_powers()

    def _validate_sampling(self):
        _require_positive("acq.fs_hz", self.fs_hz)
        if int(self.num_samples) != self.num_samples or self.num_samples < 2:
            raise ConfigError("acq.num_samples", f"deve ser um inteiro ≥ 2, recebido {self.num_samples}")
        self.num_samples = int(self.num_samples)
        _require_non_negative("acq.linewidth_hz", self.linewidth_hz)

    def _validate_powers(self):
        _require_non_negative("acq.tx_power_w", self.tx_power_w)
        _require_non_negative("acq.lo_power_w", self.lo_power_w)
        _require_non_negative("acq.aperture_m2", self.aperture_m2)
        _require_non_negative("acq.responsivity_a_per_w", self.responsivity_a_per_w)
        if not 0.0 <= self.reflectivity <= 1.0:
            raise ConfigError("acq.reflectivity", f"deve estar em [0, 1], recebido {self.reflectivity}")

    @property
    def window_s(self) -> float:
        """Duração da janela de observação N/f_s."""
        return self.num_samples / self.fs_hz


@dataclass
class Target:
    """Alvo pontual.

    Atributos:
        d_m: Distância d
        v_mps: Velocidade radial v
    """

    d_m: float = 100.0
    v_mps: float = 0.0

    def __post_init__(self):
        """Validar valores de configuração."""
        _require_non_negative("target.d_m", self.d_m)
        if not math.isfinite(self.v_mps):
            raise ConfigError("target.v_mps", f"deve ser finito, recebido {self.v_mps}")

    def delay_s(self) -> float:
        """Atraso de ida e volta τ = 2d/c."""
        return 2.0 * self.d_m / SPEED_OF_LIGHT

    def doppler_hz(self, center_frequency_hz: float) -> float:
        """Deslocamento Doppler f = 2 v f_c / c."""
        return 2.0 * self.v_mps * center_frequency_hz / SPEED_OF_LIGHT


@dataclass
class EstimatorSettings:
    """Parâmetros dos estimadores.

    Atributos:
        K: Truncamento da soma da normal enrolada
        gamma: Fator de espaçamento do reticulado de pontos iniciais
        estimate_velocity: Se o IFF estima também a frequência Doppler
        frequency_estimator: Estimador de batimento do CBF
        h_table_path: Caminho da tabela ĥ
        mf_grid_cap: Limite M·N·N_f de pontos da grade conjunta do filtro casado
        max_iter_per_stage: Iterações BFGS por estágio de recozimento
    """

    K: int = 2
    gamma: float = 0.9
    estimate_velocity: bool = True
    frequency_estimator: str = "lorentzian"
    h_table_path: str = "data/calibration/h_table.csv"
    mf_grid_cap: float = 2e9
    max_iter_per_stage: int = 200

    def __post_init__(self):
        """Validar valores de configuração."""
        if int(self.K) != self.K or self.K < 1:
            raise ConfigError("estimator.K", f"deve ser um inteiro ≥ 1, recebido {self.K}")
        self.K = int(self.K)
        if not 0.0 < self.gamma <= 1.0:
            raise ConfigError("estimator.gamma", f"deve estar em (0, 1], recebido {self.gamma}")
        if self.frequency_estimator not in FREQUENCY_ESTIMATORS:
            raise ConfigError(
                "estimator.frequency_estimator",
                f"valor desconhecido '{self.frequency_estimator}', use um de {FREQUENCY_ESTIMATORS}",
            )
        _require_positive("estimator.mf_grid_cap", self.mf_grid_cap)
        if self.max_iter_per_stage < 1:
            raise ConfigError("estimator.max_iter_per_stage", "deve ser ≥ 1")


# chave pontuada -> (seção, atributo, tipo)
_KEY_MAP = {
    "waveform.kind": ("waveform", "kind", "str"),
    "waveform.bandwidth_hz": ("waveform", "bandwidth_hz", "float"),
    "waveform.chirp_duration_s": ("waveform", "chirp_duration_s", "float"),
    "waveform.center_frequency_hz": ("waveform", "center_frequency_hz", "float"),
    "waveform.table_path": ("waveform", "table_path", "optional_str"),
    "acq.fs_hz": ("acquisition", "fs_hz", "float"),
    "acq.num_samples": ("acquisition", "num_samples", "int"),
    "acq.linewidth_hz": ("acquisition", "linewidth_hz", "float"),
    "acq.tx_power_w": ("acquisition", "tx_power_w", "float"),
    "acq.lo_power_w": ("acquisition", "lo_power_w", "float"),
    "acq.aperture_m2": ("acquisition", "aperture_m2", "float"),
    "acq.reflectivity": ("acquisition", "reflectivity", "float"),
    "acq.responsivity_a_per_w": ("acquisition", "responsivity_a_per_w", "float"),
    "acq.noiseless": ("acquisition", "noiseless", "bool"),
    "target.d_m": ("target", "d_m", "float"),
    "target.v_mps": ("target", "v_mps", "float"),
    "estimator.K": ("estimator", "K", "int"),
    "estimator.gamma": ("estimator", "gamma", "float"),
    "estimator.estimate_velocity": ("estimator", "estimate_velocity", "bool"),
    "estimator.frequency_estimator": ("estimator", "frequency_estimator", "str"),
    "estimator.h_table_path": ("estimator", "h_table_path", "str"),
    "estimator.mf_grid_cap": ("estimator", "mf_grid_cap", "float"),
    "estimator.max_iter_per_stage": ("estimator", "max_iter_per_stage", "int"),
    "seed": ("root", "seed", "int"),
    "storage.persistence_mode": ("root", "persistence_mode", "str"),
}


def coerce_value(key: str, value: Any, kind: str) -> Any:
    """Converte um valor JSON para o tipo esperado pela chave.

    Args:
        key: Chave pontuada (para mensagens de erro)
        value: Valor lido do JSON
        kind: Um de float, int, bool, str, optional_str

    Returns:
        Valor convertido

    Raises:
        ConfigError: Se o tipo não for compatível
    """
    if kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(key, f"esperado booleano, recebido {value!r}")
        return value
    if kind in ("str", "optional_str"):
        if value is None and kind == "optional_str":
            return None
        if not isinstance(value, str):
            raise ConfigError(key, f"esperado texto, recebido {value!r}")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"esperado número, recebido {value!r}")
    if kind == "int":
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(key, f"esperado inteiro, recebido {value!r}")
        return int(value)
    return float(value)


@dataclass
class ExperimentConfig:
    """Configuração completa de um experimento.

    Atributos:
        waveform: Parâmetros da modulação
        acquisition: Parâmetros de aquisição
        target: Alvo simulado
        estimator: Parâmetros dos estimadores
        seed: Semente da simulação
        persistence_mode: Modo de persistência (local, oracle, auto)
    """

    waveform: WaveformSettings = field(default_factory=WaveformSettings)
    acquisition: AcquisitionConfig = field(default_factory=AcquisitionConfig)
    target: Target = field(default_factory=Target)
    estimator: EstimatorSettings = field(default_factory=EstimatorSettings)
    seed: int = 0
    persistence_mode: str = "local"

    def __post_init__(self):
        """Validar valores de configuração."""
        if self.persistence_mode not in PERSISTENCE_MODES:
            raise ConfigError(
                "storage.persistence_mode",
                f"modo desconhecido '{self.persistence_mode}', use um de {PERSISTENCE_MODES}",
            )
        if self.seed < 0:
            raise ConfigError("seed", f"deve ser não negativa, recebido {self.seed}")
        period_samples = 2.0 * self.waveform.chirp_duration_s * self.acquisition.fs_hz
        ratio = self.acquisition.num_samples / period_samples
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) == 0:
            logger.warning(
                f"Janela de observação ({self.acquisition.num_samples} amostras) não é múltipla "
                f"inteira do período 2T ({period_samples:.3f} amostras)"
            )

    @classmethod
    def from_dict(cls, config_dict: Dict[str, Any]) -> "ExperimentConfig":
        """Criar uma configuração a partir de um dicionário de chaves pontuadas.

        Args:
            config_dict: Dicionário plano lido do arquivo JSON

        Returns:
            ExperimentConfig: Nova configuração validada

        Raises:
            ConfigError: Para chaves desconhecidas, tipos ou valores inválidos
        """
        sections: Dict[str, Dict[str, Any]] = {
            "waveform": {}, "acquisition": {}, "target": {}, "estimator": {}, "root": {},
        }
        for key, value in config_dict.items():
            if key not in _KEY_MAP:
                raise ConfigError(key, "chave desconhecida")
            section, attribute, kind = _KEY_MAP[key]
            sections[section][attribute] = coerce_value(key, value, kind)

        return cls(
            waveform=WaveformSettings(**sections["waveform"]),
            acquisition=AcquisitionConfig(**sections["acquisition"]),
            target=Target(**sections["target"]),
            estimator=EstimatorSettings(**sections["estimator"]),
            **sections["root"],
        )

    def to_dict(self) -> Dict[str, Any]:
        """Converter a configuração para um dicionário de chaves pontuadas.

        Returns:
            Dict: Dicionário plano ordenado pelas chaves
        """
        objects = {
            "waveform": self.waveform,
            "acquisition": self.acquisition,
            "target": self.target,
            "estimator": self.estimator,
            "root": self,
        }
        flat = {}
        for key, (section, attribute, _) in _KEY_MAP.items():
            flat[key] = getattr(objects[section], attribute)
        return dict(sorted(flat.items()))
