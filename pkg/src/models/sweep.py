####################################
##### Arquivo: sweep.py
##### Trabalho: Lidar FMCW além de Nyquist
####################################

"""Modelos das varreduras Monte Carlo.

Este módulo define a especificação de uma varredura (grade de distâncias e
velocidades, métodos e número de ensaios), o registro de cada ensaio e o
resumo por ponto e método.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

from .config import SPEED_OF_LIGHT, ExperimentConfig, coerce_value
from .errors import ConfigError, InvalidArgumentError
from .estimate import EstimationMethod

logger = logging.getLogger(__name__)

SWEEP_PREFIX = "sweep."
RECORD_COLUMNS = (
    "distance_m", "velocity_mps", "method", "trial", "seed", "d_hat_m", "v_hat_mps",
    "abs_err_d_m", "abs_err_v_mps", "runtime_ms", "converged",
)
SUMMARY_COLUMNS = ("distance_m", "velocity_mps", "method", "rmse_d", "rmse_v", "se_std")


def _number_list(key: str, value: Any) -> List[float]:
    if not isinstance(value, list):
        raise ConfigError(key, f"esperada lista de números, recebido {value!r}")
    return [coerce_value(key, item, "float") for item in value]


@dataclass
class SweepSpec:
    """Especificação de uma varredura Monte Carlo.

    Atributos:
        experiment: Configuração base (modulação, aquisição, estimadores)
        distances_m: Grade de distâncias
        velocities_mps: Grade de velocidades
        methods: Métodos comparados
        trials_per_point: Ensaios por ponto da grade
        master_seed: Semente mestre das sementes de cada ensaio
        output_path: Prefixo dos arquivos CSV de saída
        expect_ambiguous: Permite pontos fora do espaço sem ambiguidade
    """

    experiment: ExperimentConfig
    distances_m: List[float]
    velocities_mps: List[float] = field(default_factory=lambda: [0.0])
    methods: List[EstimationMethod] = field(default_factory=lambda: [EstimationMethod.IFF])
    trials_per_point: int = 20
    master_seed: int = 0
    output_path: str = "data/output/sweep"
    expect_ambiguous: bool = False

    def __post_init__(self):
        """Validar a grade e os métodos."""
        if not self.methods:
            raise ConfigError("sweep.methods", "lista de métodos vazia")
        if not self.distances_m:
            raise ConfigError("sweep.distances_m", "lista de distâncias vazia")
        if not self.velocities_mps:
            raise ConfigError("sweep.velocities_mps", "lista de velocidades vazia")
        if any(not d > 0 for d in self.distances_m):
            raise ConfigError("sweep.distances_m", "todas as distâncias devem ser positivas")
        if self.trials_per_point < 1:
            raise ConfigError("sweep.trials_per_point", f"deve ser ≥ 1, recebido {self.trials_per_point}")
        if self.master_seed < 0:
            raise ConfigError("sweep.master_seed", "deve ser não negativa")
        self._validate_unambiguous()

    def _validate_unambiguous(self):
        """Garantir que os pontos estão em (0, cT] × |f| ≤ f_s/2, salvo se marcado."""
        max_distance = SPEED_OF_LIGHT * self.experiment.waveform.chirp_duration_s
        half_fs = 0.5 * self.experiment.acquisition.fs_hz
        fc = self.experiment.waveform.center_frequency_hz
        outside = [
            (d, v) for d, v in self.points
            if d > max_distance or abs(2.0 * v * fc / SPEED_OF_LIGHT) > half_fs
        ]
        if outside and not self.expect_ambiguous:
            raise ConfigError(
                "sweep.distances_m",
                f"{len(outside)} ponto(s) fora do espaço sem ambiguidade (ex.: {outside[0]}); "
                "marque sweep.expect_ambiguous para permitir",
            )
        if outside:
            logger.info(f"{len(outside)} ponto(s) da varredura fora do espaço sem ambiguidade")

    @property
    def points(self) -> List[Tuple[float, float]]:
        """Pontos (d, v) na ordem distância × velocidade."""
        return [(d, v) for d in self.distances_m for v in self.velocities_mps]

    @classmethod
    def from_dict(cls, config_dict: Dict[str, Any]) -> "SweepSpec":
        """Criar a especificação a partir do dicionário de chaves pontuadas.

        As chaves `sweep.*` definem a varredura; as demais formam a
        configuração base do experimento.

        Raises:
            ConfigError: Para chaves desconhecidas ou valores inválidos
        """
        base = {k: v for k, v in config_dict.items() if not k.startswith(SWEEP_PREFIX)}
        sweep = {k: v for k, v in config_dict.items() if k.startswith(SWEEP_PREFIX)}
        kwargs: Dict[str, Any] = {"experiment": ExperimentConfig.from_dict(base)}
        for key, value in sweep.items():
            name = key[len(SWEEP_PREFIX):]
            if name in ("distances_m", "velocities_mps"):
                kwargs[name] = _number_list(key, value)
            elif name == "methods":
                if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
                    raise ConfigError(key, f"esperada lista de nomes de métodos, recebido {value!r}")
                try:
                    kwargs[name] = [EstimationMethod.from_cli(v) for v in value]
                except InvalidArgumentError as e:
                    raise ConfigError(key, e.message) from e
            elif name in ("trials_per_point", "master_seed"):
                kwargs[name] = coerce_value(key, value, "int")
            elif name == "output_path":
                kwargs[name] = coerce_value(key, value, "str")
            elif name == "expect_ambiguous":
                kwargs[name] = coerce_value(key, value, "bool")
            else:
                raise ConfigError(key, "chave desconhecida")
        if "distances_m" not in kwargs:
            raise ConfigError("sweep.distances_m", "campo obrigatório ausente")
        return cls(**kwargs)

    def to_dict(self) -> Dict[str, Any]:
        """Converter para o dicionário de chaves pontuadas."""
        flat = self.experiment.to_dict()
        flat.update({
            "sweep.distances_m": list(self.distances_m),
            "sweep.velocities_mps": list(self.velocities_mps),
            "sweep.methods": [m.cli_name for m in self.methods],
            "sweep.trials_per_point": self.trials_per_point,
            "sweep.master_seed": self.master_seed,
            "sweep.output_path": self.output_path,
            "sweep.expect_ambiguous": self.expect_ambiguous,
        })
        return dict(sorted(flat.items()))


@dataclass
class SweepRecord:
    """Resultado de um ensaio de um método num ponto da grade.

    Os erros absolutos são recalculados a partir das estimativas e da
    verdade; estimativas NaN (ensaio com falha) produzem erros NaN.
    """

    distance_m: float
    velocity_mps: float
    method: str
    trial: int
    seed: int
    d_hat_m: float
    v_hat_mps: float
    runtime_ms: float
    converged: bool
    abs_err_d_m: float = field(init=False)
    abs_err_v_mps: float = field(init=False)

    def __post_init__(self):
        self.abs_err_d_m = abs(self.d_hat_m - self.distance_m)
        self.abs_err_v_mps = abs(self.v_hat_mps - self.velocity_mps)

    def to_row(self) -> List[str]:
        values = {
            "distance_m": repr(float(self.distance_m)),
            "velocity_mps": repr(float(self.velocity_mps)),
            "method": self.method,
            "trial": str(self.trial),
            "seed": str(self.seed),
            "d_hat_m": repr(float(self.d_hat_m)),
            "v_hat_mps": repr(float(self.v_hat_mps)),
            "abs_err_d_m": repr(float(self.abs_err_d_m)),
            "abs_err_v_mps": repr(float(self.abs_err_v_mps)),
            "runtime_ms": f"{self.runtime_ms:.3f}",
            "converged": str(self.converged).lower(),
        }
        return [values[column] for column in RECORD_COLUMNS]


@dataclass
class SweepSummary:
    """Erro quadrático médio de um método num ponto da grade.

    Atributos:
        distance_m: Distância verdadeira
        velocity_mps: Velocidade verdadeira
        method: Nome do método
        rmse_d: RMSE da distância (m)
        rmse_v: RMSE da velocidade (m/s)
        se_std: Erro padrão da média do erro absoluto de distância
        trials: Ensaios com estimativa válida
    """

    distance_m: float
    velocity_mps: float
    method: str
    rmse_d: float
    rmse_v: float
    se_std: float
    trials: int = 0

    def to_row(self) -> List[str]:
        return [
            repr(float(self.distance_m)),
            repr(float(self.velocity_mps)),
            self.method,
            repr(float(self.rmse_d)),
            repr(float(self.rmse_v)),
            repr(float(self.se_std)),
        ]
