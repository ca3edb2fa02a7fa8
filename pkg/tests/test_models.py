####################################
##### Arquivo: test_models.py
##### Trabalho: Lidar FMCW além de Nyquist
####################################

"""Testes unitários para os modelos de configuração, estimativa e varredura."""
import math

import pytest

from src.models.config import (
    SPEED_OF_LIGHT,
    AcquisitionConfig,
    EstimatorSettings,
    ExperimentConfig,
    Target,
    WaveformSettings,
)
from src.models.errors import ConfigError, InvalidArgumentError
from src.models.estimate import BeatFrequencies, Estimate, EstimationMethod
from src.models.sweep import SweepRecord, SweepSpec


class TestExperimentConfig:
    """Casos de teste para a configuração de experimento."""

    def test_defaults(self):
        """Testa os valores padrão do sistema de referência."""
        config = ExperimentConfig()
        assert config.waveform.bandwidth_hz == 500e6
        assert config.waveform.chirp_duration_s == 2e-6
        assert config.acquisition.fs_hz == 200e6
        assert config.acquisition.num_samples == 800
        assert config.acquisition.linewidth_hz == 100e3
        assert config.estimator.K == 2
        assert config.persistence_mode == "local"

    def test_from_dict_round_trip(self):
        """Testa from_dict(to_dict()) com chaves pontuadas."""
        config = ExperimentConfig.from_dict({
            "waveform.kind": "sinusoidal",
            "target.d_m": 250.0,
            "target.v_mps": -3.0,
            "acq.noiseless": True,
            "seed": 12,
        })
        assert config.waveform.kind == "sinusoidal"
        assert config.target.d_m == 250.0
        assert config.acquisition.noiseless is True
        assert ExperimentConfig.from_dict(config.to_dict()).to_dict() == config.to_dict()

    def test_unknown_key(self):
        """Testa a rejeição de chaves desconhecidas com o nome do campo."""
        with pytest.raises(ConfigError) as excinfo:
            ExperimentConfig.from_dict({"acq.sample_rate": 1.0})
        assert excinfo.value.field == "acq.sample_rate"

    def test_negative_distance(self):
        """Testa a rejeição de distância negativa."""
        with pytest.raises(ConfigError) as excinfo:
            ExperimentConfig.from_dict({"target.d_m": -5.0})
        assert excinfo.value.field == "target.d_m"
        assert excinfo.value.exit_code == 2

    def test_wrong_type(self):
        """Testa a rejeição de tipos incompatíveis."""
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"acq.num_samples": "800"})
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"acq.noiseless": 1})
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"acq.num_samples": 800.5})

    def test_invalid_values(self):
        """Testa a validação de cada seção."""
        with pytest.raises(ConfigError):
            WaveformSettings(kind="sawtooth")
        with pytest.raises(ConfigError):
            WaveformSettings(kind="tabulated")
        with pytest.raises(ConfigError):
            AcquisitionConfig(reflectivity=1.5)
        with pytest.raises(ConfigError):
            EstimatorSettings(gamma=0.0)
        with pytest.raises(ConfigError):
            EstimatorSettings(frequency_estimator="fft")
        with pytest.raises(ConfigError):
            ExperimentConfig(persistence_mode="cloud")

    def test_partial_window_warns(self, caplog):
        """Testa o aviso para janela que não é múltipla de 2T."""
        with caplog.at_level("WARNING"):
            ExperimentConfig(acquisition=AcquisitionConfig(num_samples=500))
        assert "não é múltipla" in caplog.text

    def test_target_conversions(self):
        """Testa τ = 2d/c e f = 2vf_c/c."""
        target = Target(150.0, 10.0)
        assert target.delay_s() == pytest.approx(2 * 150.0 / SPEED_OF_LIGHT)
        assert target.doppler_hz(1e14) == pytest.approx(2 * 10.0 * 1e14 / SPEED_OF_LIGHT)


class TestEstimate:
    """Casos de teste para a estimativa e os métodos."""

    def test_derived_quantities(self):
        """Testa d̂ = τ̂c/2 e v̂ = f̂c/(2f_c)."""
        estimate = Estimate(1e-6, 2e6, EstimationMethod.IFF, 1.9e14)
        assert estimate.d_hat == pytest.approx(SPEED_OF_LIGHT / 2 * 1e-6)
        assert estimate.v_hat == pytest.approx(2e6 * SPEED_OF_LIGHT / (2 * 1.9e14))
        assert estimate.to_dict()["method"] == "iff"

    def test_zero_center_frequency(self):
        """Testa v̂ indefinida com f_c = 0."""
        assert math.isnan(Estimate(1e-6, 2e6, EstimationMethod.MF, 0.0).v_hat)

    @pytest.mark.parametrize("name,method", [("mf-joint", EstimationMethod.MF_JOINT), ("IFF", EstimationMethod.IFF)])
    def test_method_names(self, name, method):
        """Testa a conversão de nomes da linha de comando."""
        assert EstimationMethod.from_cli(name) == method

    def test_unknown_method(self):
        """Testa a rejeição de método desconhecido."""
        with pytest.raises(InvalidArgumentError):
            EstimationMethod.from_cli("music")

    def test_beat_range(self):
        """Testa o intervalo semiaberto dos batimentos."""
        BeatFrequencies(100e6, -99e6, 200e6)
        with pytest.raises(InvalidArgumentError):
            BeatFrequencies(0.0, 101e6, 200e6)


class TestSweepSpec:
    """Casos de teste para a especificação da varredura."""

    @pytest.fixture
    def config_dict(self):
        return {
            "waveform.kind": "triangular",
            "sweep.distances_m": [10, 130, 599],
            "sweep.methods": ["lorentzian", "iff"],
            "sweep.trials_per_point": 5,
            "sweep.master_seed": 3,
        }

    def test_from_dict(self, config_dict):
        """Testa a leitura das chaves sweep.*."""
        spec = SweepSpec.from_dict(config_dict)
        assert spec.distances_m == [10.0, 130.0, 599.0]
        assert spec.methods == [EstimationMethod.LORENTZIAN, EstimationMethod.IFF]
        assert spec.points == [(10.0, 0.0), (130.0, 0.0), (599.0, 0.0)]
        assert SweepSpec.from_dict(spec.to_dict()).to_dict() == spec.to_dict()

    def test_empty_methods(self, config_dict):
        """Testa ConfigError para lista de métodos vazia."""
        config_dict["sweep.methods"] = []
        with pytest.raises(ConfigError) as excinfo:
            SweepSpec.from_dict(config_dict)
        assert excinfo.value.field == "sweep.methods"

    def test_unknown_method(self, config_dict):
        """Testa ConfigError para método desconhecido."""
        config_dict["sweep.methods"] = ["music"]
        with pytest.raises(ConfigError):
            SweepSpec.from_dict(config_dict)

    def test_ambiguous_points(self, config_dict):
        """Testa a rejeição de pontos além de cT sem a marcação explícita."""
        config_dict["sweep.distances_m"] = [700.0]
        with pytest.raises(ConfigError):
            SweepSpec.from_dict(config_dict)
        config_dict["sweep.expect_ambiguous"] = True
        assert SweepSpec.from_dict(config_dict).distances_m == [700.0]

    def test_missing_distances(self, config_dict):
        """Testa a obrigatoriedade de sweep.distances_m."""
        del config_dict["sweep.distances_m"]
        with pytest.raises(ConfigError):
            SweepSpec.from_dict(config_dict)

    def test_record_errors(self):
        """Testa os erros absolutos calculados pelo registro."""
        record = SweepRecord(100.0, 2.0, "iff", 0, 1, 100.25, 1.5, 3.2, True)
        assert record.abs_err_d_m == pytest.approx(0.25)
        assert record.abs_err_v_mps == pytest.approx(0.5)
        assert record.to_row()[-1] == "true"

    def test_failed_record(self):
        """Testa erros NaN para estimativas NaN."""
        record = SweepRecord(100.0, 0.0, "mf", 0, 1, math.nan, math.nan, 1.0, False)
        assert math.isnan(record.abs_err_d_m)
