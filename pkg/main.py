####################################
##### Arquivo: main.py
##### Trabalho: Lidar FMCW além de Nyquist
####################################

"""Ponto de entrada principal do toolkit de lidar FMCW além de Nyquist.

Este módulo fornece a interface de linha de comando `fmcw` com os
subcomandos simulate, estimate, sweep, bounds e hfit. Os erros do toolkit
são convertidos no código de saída correspondente.
"""
import argparse
import dataclasses
import logging
import os
import sys
import traceback
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from db import config as db_config
from src.estimators.calibration import DEFAULT_SAMPLES_PER_POINT, HTable, h_fit
from src.experiments.runner import (
    BOUND_KINDS,
    build_waveform,
    evaluate_bounds,
    experiment_for_kind,
    run_sweep,
    summarize,
    timed_estimate,
    with_periods,
)
from src.models.errors import CalibrationMissingError, FmcwError, InvalidArgumentError
from src.models.estimate import EstimationMethod
from src.models.sweep import SweepSpec
from src.signal.synthesis import synth_measurement
from src.storage.file_storage import FileStorage
from src.storage.oracle_db import OracleStorage

LOG_FILE = "data/logs/fmcw_lidar.log"

logger = logging.getLogger(__name__)


def configure_logging():
    """Log apenas em arquivo; o terminal fica reservado aos resultados."""
    os.makedirs(os.path.dirname(LOG_FILE), exist_ok=True)
    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s [%(levelname)s] %(name)s - %(message)s",
        handlers=[
            logging.FileHandler(LOG_FILE),
        ],
    )
    logging.getLogger('src.storage.oracle_db').setLevel(logging.DEBUG)


def _float_list(text: Optional[str]) -> List[float]:
    if not text:
        return []
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise InvalidArgumentError(f"Lista de números inválida: '{text}'") from e


def _snr_grid(text: str) -> np.ndarray:
    """Grade `início:fim:passo` em dB, fim incluído."""
    try:
        start, stop, step = (float(part) for part in text.split(":"))
    except ValueError as e:
        raise InvalidArgumentError(f"Grade de SNR deve ter o formato início:fim:passo, recebido '{text}'") from e
    if step <= 0 or stop <= start:
        raise InvalidArgumentError(f"Grade de SNR vazia: '{text}'")
    count = int(round((stop - start) / step)) + 1
    return start + step * np.arange(count)


class FmcwLidarApp:
    """Executa os subcomandos sobre o armazenamento local e, opcionalmente, o Oracle."""

    def __init__(self, base_path: str = "data"):
        self.file_storage = FileStorage(base_path)

    def _h_table(self, path: str, required: bool) -> Optional[HTable]:
        """Carrega a tabela ĥ; sem ela, só prossegue quando não é necessária."""
        try:
            return self.file_storage.load_h_table(path)
        except CalibrationMissingError:
            if required:
                raise
            logger.info(f"Tabela ĥ ausente em {path}; usando a assíntota de alta SNR quando aplicável")
            return None

    def simulate(self, config_path: str, out_path: str, seed: Optional[int] = None) -> Path:
        """Sintetiza a medição descrita pela configuração e grava o arquivo binário."""
        experiment = self.file_storage.load_experiment_config(config_path)
        if seed is not None:
            experiment = dataclasses.replace(experiment, seed=seed)
        w = build_waveform(experiment.waveform, self.file_storage)
        m = synth_measurement(w, experiment.acquisition, experiment.target, experiment.seed, echo=experiment)
        self.file_storage.save_measurement(m, out_path)
        return Path(out_path)

    def estimate(self, measurement_path: str, method: EstimationMethod, h_table_path: Optional[str] = None) -> str:
        """Estima (d, v) de uma medição e devolve a linha `d_hat_m,v_hat_mps,objective,runtime_ms`."""
        m = self.file_storage.load_measurement(measurement_path)
        w = build_waveform(m.config.waveform, self.file_storage)
        h_table = None
        if method == EstimationMethod.IFF:
            path = h_table_path or m.config.estimator.h_table_path
            h_table = self._h_table(path, required=not m.config.acquisition.noiseless)
        estimate, runtime = timed_estimate(method, m, w, h_table)
        logger.info(f"Estimativa {method.cli_name}: {estimate.to_dict()}")
        return f"{estimate.d_hat:.9g},{estimate.v_hat:.9g},{estimate.objective_value:.9g},{runtime:.3f}"

    def sweep(self, spec_path: str, out_prefix: Optional[str] = None, jobs: Optional[int] = None,
              h_table_path: Optional[str] = None):
        """Executa a varredura, grava os CSVs e, conforme o modo, envia ao Oracle."""
        spec = self.file_storage.load_sweep_spec(spec_path)
        if out_prefix:
            spec = dataclasses.replace(spec, output_path=out_prefix)
        experiment = spec.experiment
        w = build_waveform(experiment.waveform, self.file_storage)
        h_table = None
        if EstimationMethod.IFF in spec.methods:
            path = h_table_path or experiment.estimator.h_table_path
            h_table = self._h_table(path, required=not experiment.acquisition.noiseless)

        records = run_sweep(spec, w, h_table, jobs)
        summaries = summarize(records)
        files = self.file_storage.save_sweep(records, summaries, spec.output_path)
        self._persist(spec, records, summaries)
        return files

    def _persist(self, spec: SweepSpec, records, summaries):
        mode = spec.experiment.persistence_mode
        if mode == "local":
            return
        try:
            storage = OracleStorage(db_config.username, db_config.password, db_config.dsn)
            storage.connect()
            try:
                if not storage.test_connection():
                    raise FmcwError("Conexão Oracle aberta, mas SELECT 1 FROM DUAL falhou")
                status = storage.check_schema_exists()
                if not all(status.values()):
                    from db.setup_db import initialize_schema
                    logger.warning(f"Esquema Oracle incompleto ({status}); tentando criar")
                    initialize_schema(db_config.username, db_config.password, db_config.dsn)
                run_id = storage.store_sweep(spec, records, summaries)
                logger.info(f"Varredura persistida no Oracle com run_id={run_id}")
            finally:
                storage.disconnect()
        except Exception as e:
            logger.error(f"Falha ao persistir varredura no Oracle: {e}")
            logger.error(f"Stack trace: {traceback.format_exc()}")
            if mode == "oracle":
                raise FmcwError(f"Falha ao persistir varredura no Oracle: {e}") from e
            print("AVISO: Oracle indisponível; resultados mantidos apenas nos arquivos CSV.", file=sys.stderr)

    def bounds(self, config_path: str, which: str, distances: Sequence[float], out_path: str,
               waveforms: Sequence[str] = (), periods: Optional[int] = None,
               h_table_path: Optional[str] = None) -> Path:
        """Avalia um limite para uma ou mais modulações e grava o CSV."""
        experiment = self.file_storage.load_experiment_config(config_path)
        h_table = self._h_table(h_table_path or experiment.estimator.h_table_path, required=False)
        rows = []
        for kind in (waveforms or [experiment.waveform.kind]):
            variant = experiment_for_kind(experiment, kind)
            acquisition = variant.acquisition
            if periods is not None:
                acquisition = with_periods(acquisition, variant.waveform.chirp_duration_s, periods)
            w = build_waveform(variant.waveform, self.file_storage)
            rows.extend(evaluate_bounds(which, w, acquisition, distances, h_table))
        return self.file_storage.save_bounds(rows, out_path)

    def hfit(self, out_path: str, grid: str = "-30:40:1", samples: int = DEFAULT_SAMPLES_PER_POINT,
             seed: int = 0) -> Path:
        """Gera a tabela ĥ por simulação e grava o CSV."""
        table = h_fit(_snr_grid(grid), samples, seed)
        self.file_storage.save_h_table(table, out_path)
        return Path(out_path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fmcw", description="Lidar FMCW além de Nyquist")
    parser.add_argument("--data-dir", default="data", help="Diretório base de dados")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="Sintetiza uma medição")
    simulate.add_argument("--config", required=True, help="Configuração do experimento (JSON)")
    simulate.add_argument("--out", required=True, help="Arquivo de medição de saída")
    simulate.add_argument("--seed", type=int, default=None, help="Substitui a semente da configuração")

    estimate = commands.add_parser("estimate", help="Estima distância e velocidade de uma medição")
    estimate.add_argument("measurement", help="Arquivo de medição")
    estimate.add_argument(
        "--method", default="iff", help=f"Método: {', '.join(m.cli_name for m in EstimationMethod)}"
    )
    estimate.add_argument("--h-table", default=None, help="Tabela ĥ (padrão: estimator.h_table_path)")

    sweep = commands.add_parser("sweep", help="Executa uma varredura Monte Carlo")
    sweep.add_argument("--config", required=True, help="Especificação da varredura (JSON)")
    sweep.add_argument("--out", default=None, help="Prefixo dos CSVs (padrão: sweep.output_path)")
    sweep.add_argument("--jobs", type=int, default=None, help="Processos em paralelo (padrão: núcleos)")
    sweep.add_argument("--h-table", default=None, help="Tabela ĥ (padrão: estimator.h_table_path)")

    bounds = commands.add_parser("bounds", help="Avalia limites teóricos")
    bounds.add_argument("--config", required=True, help="Configuração do experimento (JSON)")
    bounds.add_argument("--which", required=True, choices=BOUND_KINDS, help="Limite a avaliar")
    bounds.add_argument("--distances", default=None, help="Distâncias em metros separadas por vírgula")
    bounds.add_argument("--waveforms", default=None, help="Modulações separadas por vírgula")
    bounds.add_argument("--periods", type=int, default=None, help="Janela de N períodos 2T consecutivos")
    bounds.add_argument("--out", default="data/output/bounds.csv", help="CSV de saída")
    bounds.add_argument("--h-table", default=None, help="Tabela ĥ (padrão: estimator.h_table_path)")

    hfit = commands.add_parser("hfit", help="Gera a tabela de calibração ĥ")
    hfit.add_argument("--out", default="data/calibration/h_table.csv", help="CSV de saída")
    hfit.add_argument("--grid", default="-30:40:1", help="Grade de SNR em dB (início:fim:passo)")
    hfit.add_argument("--samples", type=int, default=DEFAULT_SAMPLES_PER_POINT, help="Amostras por ponto")
    hfit.add_argument("--seed", type=int, default=0, help="Semente da simulação")
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Executa a CLI e devolve o código de saída."""
    args = build_parser().parse_args(argv)
    try:
        app = FmcwLidarApp(args.data_dir)
        if args.command == "simulate":
            path = app.simulate(args.config, args.out, args.seed)
            print(f"Medição gravada em {path}", file=sys.stderr)
        elif args.command == "estimate":
            print(app.estimate(args.measurement, EstimationMethod.from_cli(args.method), args.h_table))
        elif args.command == "sweep":
            records_file, summary_file = app.sweep(args.config, args.out, args.jobs, args.h_table)
            print(f"Registros em {records_file}; resumo em {summary_file}", file=sys.stderr)
        elif args.command == "bounds":
            waveforms = [k.strip() for k in args.waveforms.split(",")] if args.waveforms else []
            path = app.bounds(args.config, args.which, _float_list(args.distances), args.out,
                              waveforms, args.periods, args.h_table)
            print(f"Limites gravados em {path}", file=sys.stderr)
        elif args.command == "hfit":
            path = app.hfit(args.out, args.grid, args.samples, args.seed)
            print(f"Tabela ĥ gravada em {path}", file=sys.stderr)
        return 0
    except FmcwError as e:
        logger.error(f"{type(e).__name__}: {e.message}")
        print(f"ERRO: {e.message}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.error(f"Erro inesperado: {e}")
        logger.error(f"Stack trace: {traceback.format_exc()}")
        print(f"ERRO: {e}", file=sys.stderr)
        return 1


def main():
    """Ponto de entrada principal."""
    configure_logging()
    sys.exit(run())


if __name__ == "__main__":
    main()
