####################################
##### Arquivo: test_storage.py
##### Trabalho: Lidar FMCW além de Nyquist
####################################

"""Testes unitários para funcionalidades de armazenamento em arquivo."""
import csv
import math
import tempfile
from pathlib import Path

import numpy as np
import pytest

from src.estimators.calibration import HTable
from src.models.config import AcquisitionConfig, Target
from src.models.errors import CalibrationMissingError, ConfigError, InvalidArgumentError
from src.models.sweep import SweepRecord, SweepSummary
from src.signal.modulation import ModulationWaveform, WaveformKind
from src.signal.synthesis import synth_measurement
from src.storage.file_storage import BOUNDS_HEADER, FileStorage


def read_csv(path):
    """Lê um CSV de resultados como lista de dicionários."""
    with open(path, newline="") as f:
        return list(csv.DictReader(line for line in f if not line.startswith("#")))


class TestFileStorage:
    """Casos de teste para a classe FileStorage."""

    @pytest.fixture
    def temp_dir(self):
        """Cria um diretório temporário para arquivos de teste."""
        with tempfile.TemporaryDirectory() as tmpdirname:
            yield tmpdirname

    @pytest.fixture
    def storage(self, temp_dir):
        """Cria uma instância de FileStorage usando diretório temporário."""
        return FileStorage(temp_dir)

    @pytest.fixture
    def measurement(self):
        """Cria uma medição com ruído."""
        w = ModulationWaveform(WaveformKind.TRIANGULAR, 500e6, 2e-6)
        return synth_measurement(w, AcquisitionConfig(), Target(130.0, 1.5), 99)

    def test_directories_created(self, storage, temp_dir):
        """Testa a criação da estrutura de diretórios."""
        for name in ("config", "logs", "calibration", "output"):
            assert (Path(temp_dir) / name).is_dir()

    # ----- configuração -----

    def test_load_experiment_config(self, storage, temp_dir):
        """Testa a leitura de uma configuração válida."""
        path = Path(temp_dir) / "config" / "exp.json"
        path.write_text('{\n  "waveform.kind": "sinusoidal",\n  "target.d_m": 42.0\n}\n')
        config = storage.load_experiment_config(path)
        assert config.waveform.kind == "sinusoidal"
        assert config.target.d_m == 42.0

    def test_json_syntax_error_line(self, storage, temp_dir):
        """Testa a linha reportada para JSON inválido."""
        path = Path(temp_dir) / "bad.json"
        path.write_text('{\n  "target.d_m": 10,\n  "acq.fs_hz": ,\n}\n')
        with pytest.raises(ConfigError) as excinfo:
            storage.load_experiment_config(path)
        assert excinfo.value.line == 3

    def test_invalid_value_line(self, storage, temp_dir):
        """Testa o campo e a linha de um valor inválido."""
        path = Path(temp_dir) / "negative.json"
        path.write_text('{\n  "waveform.kind": "triangular",\n  "target.d_m": -5\n}\n')
        with pytest.raises(ConfigError) as excinfo:
            storage.load_experiment_config(path)
        assert excinfo.value.field == "target.d_m"
        assert excinfo.value.line == 3
        assert "linha 3" in str(excinfo.value)

    def test_missing_config(self, storage, temp_dir):
        """Testa ConfigError para arquivo ausente."""
        with pytest.raises(ConfigError):
            storage.load_experiment_config(Path(temp_dir) / "nope.json")

    def test_root_must_be_object(self, storage, temp_dir):
        """Testa a rejeição de raiz que não é objeto."""
        path = Path(temp_dir) / "list.json"
        path.write_text("[1, 2]\n")
        with pytest.raises(ConfigError):
            storage.load_experiment_config(path)

    def test_sweep_spec_round_trip(self, storage, temp_dir):
        """Testa save_config seguido de load_sweep_spec."""
        path = Path(temp_dir) / "sweep.json"
        path.write_text('{"sweep.distances_m": [10, 20], "sweep.methods": ["mf", "iff"]}')
        spec = storage.load_sweep_spec(path)
        copy = Path(temp_dir) / "sweep_copy.json"
        storage.save_config(spec, copy)
        assert storage.load_sweep_spec(copy).to_dict() == spec.to_dict()

    # ----- medições -----

    def test_measurement_round_trip(self, storage, temp_dir, measurement):
        """Testa a leitura exata das amostras e do eco de configuração."""
        path = Path(temp_dir) / "m.bin"
        storage.save_measurement(measurement, path)
        loaded = storage.load_measurement(path)
        assert np.array_equal(loaded.u, measurement.u)
        assert np.array_equal(loaded.v_aux, measurement.v_aux)
        assert loaded.seed == 99
        assert loaded.config.to_dict() == measurement.config.to_dict()

    def test_measurement_bytes_reproducible(self, storage, temp_dir, measurement):
        """Testa arquivos idênticos byte a byte para a mesma medição."""
        first = Path(temp_dir) / "a.bin"
        second = Path(temp_dir) / "b.bin"
        storage.save_measurement(measurement, first)
        storage.save_measurement(measurement, second)
        assert first.read_bytes() == second.read_bytes()

    def test_measurement_bad_magic(self, storage, temp_dir):
        """Testa a rejeição de arquivo de outro formato."""
        path = Path(temp_dir) / "other.bin"
        path.write_bytes(b"NOTAMEAS" + bytes(40))
        with pytest.raises(InvalidArgumentError):
            storage.load_measurement(path)

    def test_measurement_truncated(self, storage, temp_dir, measurement):
        """Testa a rejeição de arquivo truncado."""
        path = Path(temp_dir) / "m.bin"
        storage.save_measurement(measurement, path)
        path.write_bytes(path.read_bytes()[:-7])
        with pytest.raises(InvalidArgumentError):
            storage.load_measurement(path)

    # ----- calibração ĥ -----

    def test_h_table_round_trip(self, storage, temp_dir):
        """Testa a gravação e leitura da tabela ĥ com a procedência."""
        table = HTable(
            snr_db=np.array([-10.0, 0.0, 10.0, 20.0]),
            variance=np.array([0.08, 0.03, 0.004, 0.0003]),
            lag1_correlation=np.array([-0.1, -0.3, -0.45, -0.5]),
            samples_per_point=5000,
            seed=7,
        )
        path = Path(temp_dir) / "calibration" / "h.csv"
        storage.save_h_table(table, path)
        loaded = storage.load_h_table(path)
        assert np.array_equal(loaded.snr_db, table.snr_db)
        assert np.array_equal(loaded.variance, table.variance)
        assert loaded.samples_per_point == 5000
        assert loaded.seed == 7

    def test_h_table_missing(self, storage, temp_dir):
        """Testa CalibrationMissingError para tabela ausente."""
        with pytest.raises(CalibrationMissingError) as excinfo:
            storage.load_h_table(Path(temp_dir) / "missing.csv")
        assert excinfo.value.exit_code == 3

    def test_h_table_two_columns(self, storage, temp_dir):
        """Testa tabela sem a coluna de correlação."""
        path = Path(temp_dir) / "h2.csv"
        path.write_text("snr_db,variance\n0.0,0.03\n10.0,0.004\n")
        loaded = storage.load_h_table(path)
        assert np.all(loaded.lag1_correlation == -0.5)

    def test_h_table_malformed(self, storage, temp_dir):
        """Testa ConfigError com a linha do valor inválido."""
        path = Path(temp_dir) / "h3.csv"
        path.write_text("snr_db,variance,lag1_correlation\n0.0,abc,-0.5\n")
        with pytest.raises(ConfigError) as excinfo:
            storage.load_h_table(path)
        assert excinfo.value.line == 2

    # ----- modulação tabelada -----

    def test_waveform_table(self, storage, temp_dir):
        """Testa a leitura da tabela t_seconds,a_hz."""
        path = Path(temp_dir) / "table.csv"
        path.write_text("t_seconds,a_hz\n0.0,-1.0\n1e-9,0.0\n2e-9,1.0\n")
        times, values = storage.load_waveform_table(path)
        assert np.allclose(times, [0.0, 1e-9, 2e-9])
        assert np.allclose(values, [-1.0, 0.0, 1.0])

    def test_waveform_table_missing(self, storage, temp_dir):
        """Testa ConfigError para tabela de modulação ausente."""
        with pytest.raises(ConfigError) as excinfo:
            storage.load_waveform_table(Path(temp_dir) / "none.csv")
        assert excinfo.value.field == "waveform.table_path"

    # ----- resultados -----

    def test_save_sweep(self, storage, temp_dir):
        """Testa os CSVs de registros e de resumo."""
        records = [SweepRecord(10.0, 0.0, "iff", 0, 123, 10.01, 0.0, 1.5, True)]
        summaries = [SweepSummary(10.0, 0.0, "iff", 0.01, 0.0, 0.0, 1)]
        records_file, summary_file = storage.save_sweep(records, summaries, Path(temp_dir) / "output" / "run")
        assert records_file.name == "run.csv"
        assert summary_file.name == "run_summary.csv"
        rows = read_csv(records_file)
        assert rows[0]["method"] == "iff"
        assert rows[0]["seed"] == "123"
        assert float(rows[0]["abs_err_d_m"]) == pytest.approx(0.01)
        assert read_csv(summary_file)[0]["rmse_d"] == "0.01"

    def test_save_bounds(self, storage, temp_dir):
        """Testa distâncias NaN gravadas como 'nan' nos limites médios."""
        path = storage.save_bounds(
            [("triangular", math.nan, 2.9e-3, 5.4e-2), ("sinusoidal", 100.0, 1e-4, 1e-2)],
            Path(temp_dir) / "bounds.csv",
        )
        lines = path.read_text().splitlines()
        assert lines[0] == BOUNDS_HEADER
        assert lines[1].startswith("triangular,nan,")
        assert read_csv(path)[1]["distance_m"] == "100.0"
