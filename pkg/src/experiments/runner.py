####################################
##### Arquivo: runner.py
##### Trabalho: Lidar FMCW além de Nyquist
####################################

"""Motor de experimentos: despacho dos estimadores, varreduras e limites.

Este módulo liga a configuração aos estimadores. Ele escolhe o estimador
pelo nome do método, mede o tempo de cada estimativa, executa varreduras
Monte Carlo com ensaios independentes num pool de processos e avalia os
limites teóricos numa grade de distâncias.
"""
import dataclasses
import logging
import math
import os
import time
import traceback
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..analysis.bounds import crb_awgn_cbf, crb_delay, mcrb_delay, mmcrb, mmcrb_approx
from ..estimators.calibration import HTable
from ..estimators.cbf import estimate_cbf, tsuchida_estimate
from ..estimators.iff import iff_estimate
from ..estimators.matched_filter import mf_distance, mf_joint
from ..models.config import SPEED_OF_LIGHT, AcquisitionConfig, ExperimentConfig, Target, WaveformSettings
from ..models.errors import FmcwError, InvalidArgumentError, UnsupportedModulationError
from ..models.estimate import Estimate, EstimationMethod
from ..models.measurement import Measurement
from ..models.sweep import SweepRecord, SweepSpec, SweepSummary
from ..signal.modulation import ModulationWaveform, WaveformKind
from ..signal.synthesis import signal_amplitudes, synth_measurement, trial_seed

logger = logging.getLogger(__name__)

BOUND_KINDS = ("crb", "mcrb", "mmcrb", "mmcrb-approx", "awgn-cbf")
AVERAGED_BOUNDS = ("mmcrb", "mmcrb-approx")


def build_waveform(settings: WaveformSettings, storage=None) -> ModulationWaveform:
    """Cria a forma de onda, carregando a tabela quando a modulação é tabelada.

    Args:
        settings: Seção `waveform.*` da configuração
        storage: FileStorage usado para ler a tabela `t_seconds,a_hz`
    """
    table = None
    if settings.kind == "tabulated":
        if storage is None:
            raise InvalidArgumentError("Modulação tabelada exige um FileStorage para ler a tabela")
        table = storage.load_waveform_table(settings.table_path)
    return ModulationWaveform.from_settings(settings, table)


def run_estimator(
    method: EstimationMethod,
    m: Measurement,
    w: ModulationWaveform,
    h_table: Optional[HTable] = None,
) -> Estimate:
    """Executa o estimador `method` com os parâmetros ecoados na medição.

    Args:
        method: Método de estimação
        m: Medição (a configuração ecoada fornece L e os parâmetros do estimador)
        w: Forma de onda da medição
        h_table: Tabela ĥ para o IFF

    Returns:
        Estimate: Estimativa do método

    Raises:
        UnsupportedModulationError: Para pares método/modulação inválidos
    """
    settings = m.config.estimator
    if method == EstimationMethod.PERIODOGRAM:
        return estimate_cbf(m, w, "periodogram")
    if method == EstimationMethod.LORENTZIAN:
        return estimate_cbf(m, w, "lorentzian")
    if method == EstimationMethod.TSUCHIDA:
        return tsuchida_estimate(m, w)
    if method == EstimationMethod.MF:
        return mf_distance(m, w)
    if method == EstimationMethod.MF_JOINT:
        return mf_joint(m, w, settings.mf_grid_cap)
    if method == EstimationMethod.IFF:
        return iff_estimate(
            m,
            w,
            m.config.acquisition.linewidth_hz,
            K=settings.K,
            gamma=settings.gamma,
            h_table=h_table,
            estimate_velocity=settings.estimate_velocity,
            max_iter_per_stage=settings.max_iter_per_stage,
        )
    raise UnsupportedModulationError(method.cli_name, w.kind.name.lower())


def timed_estimate(
    method: EstimationMethod, m: Measurement, w: ModulationWaveform, h_table: Optional[HTable] = None
) -> Tuple[Estimate, float]:
    """Executa o estimador e devolve (estimativa, tempo de parede em ms)."""
    start = time.perf_counter()
    estimate = run_estimator(method, m, w, h_table)
    return estimate, (time.perf_counter() - start) * 1000.0


def _run_trial(task) -> List[SweepRecord]:
    """Executa todos os métodos num ensaio; roda em processo separado."""
    point, trial, d, v, seed, experiment, w, methods, h_table = task
    target = Target(d_m=d, v_mps=v)
    echo = dataclasses.replace(experiment, target=target, seed=seed)
    m = synth_measurement(w, experiment.acquisition, target, seed, echo=echo)
    records = []
    for method in methods:
        start = time.perf_counter()
        try:
            estimate, runtime = timed_estimate(method, m, w, h_table)
            d_hat, v_hat, converged = estimate.d_hat, estimate.v_hat, estimate.converged
        except FmcwError as e:
            runtime = (time.perf_counter() - start) * 1000.0
            logger.warning(f"Ensaio {trial} do ponto {point} falhou com {method.cli_name}: {e.message}")
            d_hat, v_hat, converged = math.nan, math.nan, False
        except Exception as e:
            runtime = (time.perf_counter() - start) * 1000.0
            logger.error(f"Erro inesperado no ensaio {trial} do ponto {point} ({method.cli_name}): {e}")
            logger.error(f"Stack trace: {traceback.format_exc()}")
            d_hat, v_hat, converged = math.nan, math.nan, False
        records.append(SweepRecord(
            distance_m=d,
            velocity_mps=v,
            method=method.cli_name,
            trial=trial,
            seed=seed,
            d_hat_m=d_hat,
            v_hat_mps=v_hat,
            runtime_ms=runtime,
            converged=converged,
        ))
    return records


def _sort_key(spec: SweepSpec):
    points = {p: i for i, p in enumerate(spec.points)}
    order = {m.cli_name: i for i, m in enumerate(spec.methods)}
    return lambda r: (points[(r.distance_m, r.velocity_mps)], order[r.method], r.trial)


def run_sweep(
    spec: SweepSpec,
    w: ModulationWaveform,
    h_table: Optional[HTable] = None,
    jobs: Optional[int] = None,
) -> List[SweepRecord]:
    """Executa a varredura Monte Carlo.

    Cada ensaio recebe a semente trial_seed(master, ponto, ensaio), de modo
    que o resultado independe do número de processos. Falhas de um ensaio
    são registradas com converged=false e estimativas NaN.

    Args:
        spec: Especificação da varredura
        w: Forma de onda
        h_table: Tabela ĥ (obrigatória para IFF com ruído)
        jobs: Número de processos (padrão: núcleos lógicos; 1 executa em série)

    Returns:
        Registros ordenados por ponto, método e ensaio
    """
    jobs = jobs or os.cpu_count() or 1
    if jobs < 1:
        raise InvalidArgumentError(f"--jobs deve ser ≥ 1, recebido {jobs}")
    tasks = [
        (j, i, d, v, trial_seed(spec.master_seed, j, i), spec.experiment, w, spec.methods, h_table)
        for j, (d, v) in enumerate(spec.points)
        for i in range(spec.trials_per_point)
    ]
    logger.info(
        f"Varredura: {len(spec.points)} pontos × {spec.trials_per_point} ensaios × "
        f"{len(spec.methods)} métodos com {jobs} processo(s)"
    )

    records: List[SweepRecord] = []
    if jobs == 1:
        for task in tasks:
            records.extend(_run_trial(task))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            futures = {executor.submit(_run_trial, task): task[:2] for task in tasks}
            for future in as_completed(futures):
                records.extend(future.result())
    records.sort(key=_sort_key(spec))
    failed = sum(1 for r in records if not r.converged)
    if failed:
        logger.warning(f"{failed} de {len(records)} estimativas sem convergência")
    return records


def summarize(records: Sequence[SweepRecord]) -> List[SweepSummary]:
    """RMSE por ponto e método, ignorando ensaios com estimativa NaN.

    se_std é o erro padrão da média do erro absoluto de distância.
    """
    groups: Dict[Tuple[float, float, str], List[SweepRecord]] = {}
    for record in records:
        groups.setdefault((record.distance_m, record.velocity_mps, record.method), []).append(record)

    summaries = []
    for (d, v, method), group in groups.items():
        err_d = np.array([r.abs_err_d_m for r in group])
        err_v = np.array([r.abs_err_v_mps for r in group])
        valid = np.isfinite(err_d)
        count = int(np.count_nonzero(valid))
        if count == 0:
            summaries.append(SweepSummary(d, v, method, math.nan, math.nan, math.nan, 0))
            continue
        rmse_d = float(np.sqrt(np.mean(err_d[valid] ** 2)))
        rmse_v = float(np.sqrt(np.nanmean(err_v[valid] ** 2)))
        se_std = float(np.std(err_d[valid], ddof=1) / math.sqrt(count)) if count > 1 else 0.0
        summaries.append(SweepSummary(d, v, method, rmse_d, rmse_v, se_std, count))
    return summaries


def with_periods(cfg: AcquisitionConfig, chirp_duration: float, periods: int) -> AcquisitionConfig:
    """Configuração com janela de `periods` períodos 2T consecutivos."""
    if periods < 1:
        raise InvalidArgumentError(f"--periods deve ser ≥ 1, recebido {periods}")
    samples = int(round(periods * 2.0 * chirp_duration * cfg.fs_hz))
    return dataclasses.replace(cfg, num_samples=samples)


def _awgn_cbf_bound(w: ModulationWaveform, cfg: AcquisitionConfig, d: float) -> float:
    if w.kind != WaveformKind.TRIANGULAR:
        raise UnsupportedModulationError("awgn-cbf", w.kind.name.lower())
    a1, a2 = signal_amplitudes(cfg, d)
    n = int(round(w.chirp_duration_s * cfg.fs_hz))
    chirp_rate = w.bandwidth_hz / w.chirp_duration_s
    var_tau, _ = crb_awgn_cbf(cfg, a1, chirp_rate, n, cfg.electron_charge * a2)
    return var_tau * (SPEED_OF_LIGHT / 2.0) ** 2


def evaluate_bounds(
    which: str,
    w: ModulationWaveform,
    cfg: AcquisitionConfig,
    distances: Sequence[float],
    h_table: Optional[HTable] = None,
) -> List[Tuple[str, float, float, float]]:
    """Avalia um limite na grade de distâncias.

    Os limites médios (mmcrb, mmcrb-approx) produzem uma única linha com
    distance_m = NaN.

    Returns:
        Linhas (waveform, distance_m, bound_m2, bound_root_m)
    """
    if which not in BOUND_KINDS:
        raise InvalidArgumentError(f"Limite desconhecido '{which}'. Opções: {', '.join(BOUND_KINDS)}")
    kind = w.kind.name.lower()
    if which in AVERAGED_BOUNDS:
        value = mmcrb(w, cfg, h_table=h_table) if which == "mmcrb" else mmcrb_approx(w, cfg, h_table)
        logger.info(f"{which} ({kind}): √limite = {math.sqrt(value):.4e} m")
        return [(kind, math.nan, value, math.sqrt(value))]
    if not distances:
        raise InvalidArgumentError(f"Limite {which} exige uma grade de distâncias (--distances)")

    rows = []
    for d in distances:
        if which == "crb":
            value = crb_delay(d, w, cfg, h_table=h_table)
        elif which == "mcrb":
            value = mcrb_delay(d, w, cfg, h_table=h_table)
        else:
            value = _awgn_cbf_bound(w, cfg, d)
        rows.append((kind, float(d), value, math.sqrt(value)))
    return rows


def experiment_for_kind(experiment: ExperimentConfig, kind: str) -> ExperimentConfig:
    """Cópia da configuração com outra modulação (para comparar formas de onda)."""
    waveform = dataclasses.replace(experiment.waveform, kind=kind)
    return dataclasses.replace(experiment, waveform=waveform)
