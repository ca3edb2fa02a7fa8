####################################
##### Arquivo: file_storage.py
##### Trabalho: Lidar FMCW além de Nyquist
####################################

"""Implementação de armazenamento baseado em arquivos.

Este módulo manipula a leitura e escrita dos arquivos do toolkit: as
configurações JSON de experimentos e varreduras, o contêiner binário das
medições, a tabela de calibração ĥ, as tabelas de modulação e os CSVs de
resultados (registros, resumos e limites).
"""
import json
import logging
import math
import re
import struct
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from ..estimators.calibration import HTable
from ..models.config import ExperimentConfig
from ..models.errors import CalibrationMissingError, ConfigError, InvalidArgumentError
from ..models.measurement import Measurement
from ..models.sweep import RECORD_COLUMNS, SUMMARY_COLUMNS, SweepRecord, SweepSpec, SweepSummary

logger = logging.getLogger(__name__)

MEASUREMENT_MAGIC = b"FMCWMEAS"
MEASUREMENT_VERSION = 1
# magia (8 bytes) + versão + tamanho do eco de configuração
_HEADER = struct.Struct("<8sII")
H_TABLE_HEADER = "snr_db,variance,lag1_correlation"
WAVEFORM_TABLE_HEADER = "t_seconds,a_hz"
BOUNDS_HEADER = "waveform,distance_m,bound_m2,bound_root_m"

PathLike = Union[str, Path]


def _key_line(text: str, key: Optional[str]) -> Optional[int]:
    """Linha (1-based) em que a chave aparece no texto JSON."""
    if not key:
        return None
    pattern = re.compile(r'"' + re.escape(key) + r'"\s*:')
    for number, line in enumerate(text.splitlines(), start=1):
        if pattern.search(line):
            return number
    return None


class FileStorage:
    """Manipula operações de armazenamento de dados baseadas em arquivo."""

    def __init__(self, base_path: str = "data"):
        """Inicializa o armazenamento de arquivos.

        Args:
            base_path: Diretório base para arquivos de dados
        """
        self.base_path = Path(base_path)
        self.config_path = self.base_path / "config"
        self.logs_path = self.base_path / "logs"
        self.calibration_path = self.base_path / "calibration"
        self.output_path = self.base_path / "output"
        self._ensure_directories()

    def _ensure_directories(self):
        """Cria os diretórios necessários se não existirem."""
        self.base_path.mkdir(parents=True, exist_ok=True)
        self.config_path.mkdir(exist_ok=True)
        self.logs_path.mkdir(exist_ok=True)
        self.calibration_path.mkdir(exist_ok=True)
        self.output_path.mkdir(exist_ok=True)

    @staticmethod
    def _prepare(path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    # ----- configuração -----

    def _read_config_dict(self, path: PathLike) -> Tuple[Dict[str, Any], str]:
        """Lê o objeto JSON de chaves pontuadas.

        Raises:
            ConfigError: Arquivo ausente, JSON inválido (com a linha) ou raiz não objeto
        """
        path = Path(path)
        if not path.exists():
            raise ConfigError(None, f"arquivo de configuração não encontrado: {path}")
        text = path.read_text(encoding="utf-8")
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            logger.error(f"JSON inválido em {path}: {e}")
            raise ConfigError(None, f"JSON inválido ({e.msg})", line=e.lineno) from e
        if not isinstance(data, dict):
            raise ConfigError(None, "a raiz da configuração deve ser um objeto JSON", line=1)
        return data, text

    def _parse(self, path: PathLike, factory):
        data, text = self._read_config_dict(path)
        try:
            return factory(data)
        except ConfigError as e:
            line = e.line if e.line is not None else _key_line(text, e.field)
            logger.error(f"Configuração inválida em {path}: {e.message}")
            raise ConfigError(e.field, e.reason, line=line) from e

    def load_experiment_config(self, path: PathLike) -> ExperimentConfig:
        """Carrega uma configuração de experimento.

        Args:
            path: Caminho do arquivo JSON

        Returns:
            ExperimentConfig: Configuração validada

        Raises:
            ConfigError: Com o campo e, quando possível, a linha do problema
        """
        config = self._parse(path, ExperimentConfig.from_dict)
        logger.info(f"Configuração carregada de {path}")
        return config

    def load_sweep_spec(self, path: PathLike) -> SweepSpec:
        """Carrega uma especificação de varredura (chaves `sweep.*` mais a configuração base)."""
        spec = self._parse(path, SweepSpec.from_dict)
        logger.info(f"Especificação de varredura carregada de {path}: {len(spec.points)} pontos")
        return spec

    def save_config(self, config: Union[ExperimentConfig, SweepSpec], path: PathLike):
        """Salva a configuração em arquivo JSON.

        Args:
            config: Configuração de experimento ou de varredura
            path: Caminho de destino
        """
        path = self._prepare(path)
        try:
            with open(path, "w", encoding="utf-8") as f:
                json.dump(config.to_dict(), f, indent=2)
                f.write("\n")
            logger.info(f"Configuração salva em {path}")
        except Exception as e:
            logger.error(f"Falha ao salvar configuração: {e}")
            raise

    # ----- medições -----

    def save_measurement(self, m: Measurement, path: PathLike):
        """Grava a medição no contêiner binário.

        Layout: cabeçalho de 16 bytes (magia, versão, tamanho do eco), eco
        JSON da configuração e da semente, u e v_aux como complexos de 64
        bits por componente em little-endian.
        """
        path = self._prepare(path)
        echo = json.dumps(
            {"config": m.config.to_dict(), "seed": m.seed}, sort_keys=True, separators=(",", ":")
        ).encode("utf-8")
        try:
            with open(path, "wb") as f:
                f.write(_HEADER.pack(MEASUREMENT_MAGIC, MEASUREMENT_VERSION, len(echo)))
                f.write(echo)
                f.write(m.u.astype("<c16").tobytes())
                f.write(m.v_aux.astype("<c16").tobytes())
            logger.info(f"Medição com {m.num_samples} amostras salva em {path}")
        except Exception as e:
            logger.error(f"Falha ao salvar medição em {path}: {e}")
            raise

    def load_measurement(self, path: PathLike) -> Measurement:
        """Lê uma medição gravada por `save_measurement`.

        Raises:
            InvalidArgumentError: Arquivo ausente, truncado ou de outro formato
        """
        path = Path(path)
        if not path.exists():
            raise InvalidArgumentError(f"Arquivo de medição não encontrado: {path}")
        raw = path.read_bytes()
        if len(raw) < _HEADER.size:
            raise InvalidArgumentError(f"Arquivo de medição truncado: {path}")
        magic, version, echo_size = _HEADER.unpack_from(raw)
        if magic != MEASUREMENT_MAGIC:
            raise InvalidArgumentError(f"{path} não é um arquivo de medição")
        if version != MEASUREMENT_VERSION:
            raise InvalidArgumentError(f"Versão de medição {version} não suportada em {path}")
        body = raw[_HEADER.size + echo_size:]
        if len(body) % 32 != 0 or not body:
            raise InvalidArgumentError(f"Corpo da medição com tamanho inválido ({len(body)} bytes)")
        try:
            echo = json.loads(raw[_HEADER.size:_HEADER.size + echo_size].decode("utf-8"))
            config = ExperimentConfig.from_dict(echo["config"])
        except (ValueError, KeyError) as e:
            logger.error(f"Eco de configuração inválido em {path}: {e}")
            raise InvalidArgumentError(f"Eco de configuração inválido em {path}: {e}") from e
        samples = np.frombuffer(body, dtype="<c16")
        n = samples.size // 2
        return Measurement(u=samples[:n].copy(), v_aux=samples[n:].copy(), config=config, seed=echo.get("seed"))

    # ----- calibração ĥ -----

    def save_h_table(self, table: HTable, path: PathLike):
        """Salva a tabela ĥ com a procedência na linha de comentário inicial."""
        path = self._prepare(path)
        try:
            with open(path, "w") as f:
                f.write(f"# samples_per_point={table.samples_per_point},seed={table.seed}\n")
                f.write(H_TABLE_HEADER + "\n")
                for snr_db, variance, rho in zip(table.snr_db, table.variance, table.lag1_correlation):
                    f.write(f"{float(snr_db)!r},{float(variance)!r},{float(rho)!r}\n")
            logger.info(f"Tabela ĥ com {table.snr_db.size} pontos salva em {path}")
        except Exception as e:
            logger.error(f"Falha ao salvar tabela ĥ: {e}")
            raise

    def load_h_table(self, path: PathLike) -> HTable:
        """Carrega a tabela ĥ.

        Raises:
            CalibrationMissingError: Se o arquivo não existir
            ConfigError: Se o conteúdo estiver malformado
        """
        path = Path(path)
        if not path.exists():
            logger.error(f"Tabela ĥ ausente em {path}")
            raise CalibrationMissingError(str(path))
        provenance = {"samples_per_point": 0, "seed": 0}
        rows = []
        with open(path, "r") as f:
            for number, line in enumerate(f, start=1):
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    for item in line[1:].split(","):
                        key, _, value = item.strip().partition("=")
                        if key in provenance and value:
                            provenance[key] = int(value)
                    continue
                if line.startswith("snr_db"):
                    continue
                parts = line.split(",")
                try:
                    values = [float(p) for p in parts]
                except ValueError as e:
                    raise ConfigError(None, f"valor inválido na tabela ĥ: {line}", line=number) from e
                if len(values) == 2:
                    # tabelas sem a coluna de correlação usam o limite de alta SNR
                    values.append(-0.5)
                if len(values) != 3:
                    raise ConfigError(None, f"esperadas 3 colunas na tabela ĥ: {line}", line=number)
                rows.append(values)
        if not rows:
            raise ConfigError(None, f"tabela ĥ vazia: {path}")
        data = np.array(rows)
        return HTable(
            snr_db=data[:, 0],
            variance=data[:, 1],
            lag1_correlation=data[:, 2],
            samples_per_point=provenance["samples_per_point"],
            seed=provenance["seed"],
        )

    # ----- modulação tabelada -----

    def load_waveform_table(self, path: PathLike) -> Tuple[np.ndarray, np.ndarray]:
        """Carrega a tabela `t_seconds,a_hz` de uma modulação tabelada.

        Returns:
            Tupla (tempos, desvios a(t) − f_c)
        """
        path = Path(path)
        if not path.exists():
            raise ConfigError("waveform.table_path", f"tabela de modulação não encontrada: {path}")
        try:
            data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        except ValueError as e:
            logger.error(f"Tabela de modulação malformada em {path}: {e}")
            raise ConfigError("waveform.table_path", f"tabela malformada: {e}") from e
        if data.shape[1] != 2:
            raise ConfigError("waveform.table_path", f"esperadas 2 colunas ({WAVEFORM_TABLE_HEADER})")
        return data[:, 0], data[:, 1]

    # ----- resultados -----

    def save_sweep(
        self, records: Sequence[SweepRecord], summaries: Sequence[SweepSummary], prefix: PathLike
    ) -> Tuple[Path, Path]:
        """Salva `<prefixo>.csv` com os registros e `<prefixo>_summary.csv` com o resumo."""
        prefix = Path(prefix)
        records_file = self._prepare(prefix.with_name(prefix.name + ".csv"))
        summary_file = self._prepare(prefix.with_name(prefix.name + "_summary.csv"))
        try:
            with open(records_file, "w") as f:
                f.write(",".join(RECORD_COLUMNS) + "\n")
                for record in records:
                    f.write(",".join(record.to_row()) + "\n")
            with open(summary_file, "w") as f:
                f.write(",".join(SUMMARY_COLUMNS) + "\n")
                for summary in summaries:
                    f.write(",".join(summary.to_row()) + "\n")
            logger.info(f"Varredura salva em {records_file} e {summary_file}")
        except Exception as e:
            logger.error(f"Falha ao salvar resultados da varredura: {e}")
            raise
        return records_file, summary_file

    def save_bounds(self, rows: Sequence[Tuple[str, float, float, float]], path: PathLike) -> Path:
        """Salva as linhas (waveform, distance_m, bound_m2, bound_root_m)."""
        path = self._prepare(path)
        try:
            with open(path, "w") as f:
                f.write(BOUNDS_HEADER + "\n")
                for kind, d, bound, root in rows:
                    distance = "nan" if math.isnan(d) else repr(float(d))
                    f.write(f"{kind},{distance},{float(bound)!r},{float(root)!r}\n")
            logger.info(f"{len(rows)} linha(s) de limites salvas em {path}")
        except Exception as e:
            logger.error(f"Falha ao salvar limites: {e}")
            raise
        return path
