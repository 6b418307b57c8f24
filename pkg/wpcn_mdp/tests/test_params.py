import math

import numpy as np
import pytest

from wpcn_mdp.params import (ConfigurationError, battery_capacity_joules, load_params, mean_channel_gain,
                             noise_power_watts, parse_gamma_db, read_config, validate)


class TestConversions:

    @pytest.mark.parametrize("psd, bandwidth, expected", [
        (-125.0, 1e6, 3.1623e-10),
        (-30.0, 1.0, 1e-6),
        (0.0, 1.0, 1e-3),
    ])
    def test_noise_power(self, psd, bandwidth, expected):
        assert noise_power_watts(psd, bandwidth) == pytest.approx(expected, rel=1e-4)

    def test_noise_power_rejects_zero_bandwidth(self):
        with pytest.raises(ConfigurationError):
            noise_power_watts(-125.0, 0.0)

    def test_noise_power_increasing(self):
        psds = np.linspace(-140, -100, 9)
        assert np.all(np.diff([noise_power_watts(p, 1e6) for p in psds]) > 0)
        bandwidths = [1e3, 1e4, 1e5, 1e6]
        assert np.all(np.diff([noise_power_watts(-125, b) for b in bandwidths]) > 0)

    @pytest.mark.parametrize("d, beta, expected", [(5, 2, 5e-5), (10, 2, 1.25e-5), (1, 3.7, 1.25e-3)])
    def test_mean_channel_gain(self, d, beta, expected):
        assert mean_channel_gain(d, beta) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("d, beta_ref, zeta, expected", [(5, 2, 0.1, 5e-6), (10, 2, 1, 1.25e-5), (1, 2, 1, 1.25e-3)])
    def test_battery_capacity(self, d, beta_ref, zeta, expected):
        assert battery_capacity_joules(d, beta_ref, zeta) == pytest.approx(expected, rel=1e-12)

    def test_gain_and_capacity_decrease_with_distance_and_exponent(self):
        distances = [1.5, 2, 5, 10, 20]
        assert np.all(np.diff([mean_channel_gain(d, 2) for d in distances]) < 0)
        assert np.all(np.diff([mean_channel_gain(5, b) for b in [2, 2.5, 3, 4]]) < 0)
        assert np.all(np.diff([battery_capacity_joules(d, 2, 0.1) for d in distances]) < 0)
        assert np.all(np.diff([battery_capacity_joules(5, b, 0.1) for b in [2, 2.5, 3, 4]]) < 0)

    @pytest.mark.parametrize("text, expected", [
        ("perfect", 0.0),
        ("-70", 1e-7),
        ("−70 dB", 1e-7),
        ("-110dB", 1e-11),
        (-100, 1e-10),
    ])
    def test_parse_gamma_db(self, text, expected):
        assert parse_gamma_db(text) == pytest.approx(expected, rel=1e-12)

    def test_parse_gamma_db_rejects_garbage(self):
        with pytest.raises(ConfigurationError):
            parse_gamma_db("strong")


class TestValidate:

    def test_defaults(self, default_params):
        assert default_params.quantum(0) == pytest.approx(5e-7, rel=1e-12)
        assert default_params.quantum(1) == pytest.approx(1.25e-6, rel=1e-12)
        assert default_params.rho_max(0) == pytest.approx(5e-6, rel=1e-12)
        assert default_params.noise_power == pytest.approx(3.1623e-10, rel=1e-4)
        assert default_params.gamma_si == 0.0
        assert default_params.b_max(0) == 10

    def test_alpha_out_of_range(self):
        with pytest.raises(ConfigurationError) as info:
            validate({"alpha": 1.3})
        assert any("alpha" in v for v in info.value.violations)

    def test_gamma_db(self):
        params = validate({"gamma_db": "−70 dB"})
        assert params.gamma_si == pytest.approx(1e-7, rel=1e-12)

    def test_every_violation_reported(self):
        with pytest.raises(ConfigurationError) as info:
            validate({"alpha": "2", "eta1": "0", "channel_bins": "0", "colour": "red"})
        joined = " ".join(info.value.violations)
        assert "colour" in joined

        with pytest.raises(ConfigurationError) as info:
            validate({"alpha": "2", "eta1": "0", "channel_bins": "0"})
        assert len(info.value.violations) == 3

    def test_unparsable_number(self):
        with pytest.raises(ConfigurationError) as info:
            validate({"b1_max": "ten"})
        assert "b1_max" in info.value.violations[0]

    def test_non_integer_count(self):
        with pytest.raises(ConfigurationError):
            validate({"channel_bins": "2.5"})

    def test_mutually_exclusive_keys(self):
        with pytest.raises(ConfigurationError):
            validate({"gamma_db": "-70", "gamma_si": "1e-7"})

    def test_single_battery_level_rejected(self):
        with pytest.raises(ConfigurationError):
            validate({"b1_max": 0})

    def test_idempotent(self, default_params):
        assert validate(default_params) is default_params
        assert validate(default_params.to_raw()) == default_params

    def test_p_max_dbm(self):
        assert validate({"p_max_dbm": 33}).p_max == pytest.approx(1.99526, rel=1e-5)

    def test_overrides_keep_battery_reference(self, default_params):
        steeper = default_params.with_overrides(beta=3.0)
        assert steeper.pathloss_beta == 3.0
        assert steeper.battery_capacity(0) == default_params.battery_capacity(0)
        assert steeper.mean_gain(0) < default_params.mean_gain(0)

    def test_params_hash(self, default_params):
        assert default_params.params_hash() == validate({}).params_hash()
        assert default_params.params_hash() != default_params.with_overrides(alpha=0.3).params_hash()
        assert len(default_params.params_hash()) == 16


class TestConfigFile:

    def test_read_config(self, config_file):
        path = config_file("# comment\n\nalpha = 0.25   # weight\ngamma_db = perfect\nb1_max=4\n")
        assert read_config(path) == {"alpha": "0.25", "gamma_db": "perfect", "b1_max": "4"}

    def test_malformed_line(self, config_file):
        with pytest.raises(ConfigurationError):
            read_config(config_file("alpha 0.25\n"))

    def test_load_params_with_overrides(self, config_file):
        path = config_file("alpha = 0.25\ngamma_db = -70\n")
        params = load_params(path, gamma_db="perfect", alpha=None)
        assert params.alpha == 0.25
        assert params.gamma_si == 0.0

        params = load_params(path, gamma_si="1e-9")
        assert math.isclose(params.gamma_si, 1e-9)
