import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from isacsim.scenario import (
    SPEED_OF_LIGHT,
    ConfigurationError,
    ScenarioConfig,
    TargetSpec,
    WaveformConfig,
    array_gain,
    db_to_linear,
    derive_paths,
    load_scenario,
    noise_variance,
    round_half_away,
    save_scenario,
    scenario_to_dict,
    snap_to_grid,
)


def unbeamformed_magnitude(cfg, path):
    return abs(path.gain) / abs(array_gain(cfg, path.aod))


class TestLinkBudget:
    def test_los_free_space_magnitude(self, ref_scenario):
        # lambda = c/fc and lambda/(4 pi d0) evaluated by hand
        lam = SPEED_OF_LIGHT / 28e9
        assert lam == pytest.approx(1.0707e-2, rel=1e-4)
        paths = derive_paths(ref_scenario)
        raw = unbeamformed_magnitude(ref_scenario, paths[0])
        assert raw == pytest.approx(lam / (4 * np.pi * 50.0), rel=1e-12)
        assert raw == pytest.approx(1.70405e-5, rel=1e-4)
        assert raw * (4 * np.pi * 50.0) / lam == pytest.approx(1.0, rel=1e-12)

    def test_boresight_array_gain(self, ref_scenario):
        # coherent sum of N_T unit phasors at boresight: |g| = sqrt(P_T N_T)
        g = array_gain(ref_scenario, ref_scenario.beam_angle)
        assert abs(g) == pytest.approx(math.sqrt(0.1 * 8), rel=1e-12)
        assert abs(g) == pytest.approx(0.8944, rel=1e-4)

    def test_rcs_sqrt_scaling(self, ref_scenario):
        base = derive_paths(ref_scenario)
        for s in (0.25, 2.0, 9.0, 100.0):
            scaled = derive_paths(
                ref_scenario.with_target_rcs(0, ref_scenario.targets[0].rcs * s)
            )
            ratio = abs(scaled[1].gain) / abs(base[1].gain)
            assert ratio == pytest.approx(math.sqrt(s), rel=1e-12)
            # other paths untouched
            assert abs(scaled[2].gain) == pytest.approx(abs(base[2].gain), rel=1e-12)

    def test_doubling_both_legs_quarters_gain(self):
        wf = WaveformConfig(fc=28e9, df=120e3, n_subc=64, n_sym=16)
        h1 = 20.0
        d1 = math.hypot(25.0, h1)
        h2 = math.sqrt(4 * (625.0 + h1 ** 2) - 625.0)
        near = ScenarioConfig(wf, (0.0, 0.0), (50.0, 0.0), 0.0,
                              (TargetSpec((25.0, h1), (0.0, 0.0), 1.0),))
        far = ScenarioConfig(wf, (0.0, 0.0), (50.0, 0.0), 0.0,
                             (TargetSpec((25.0, h2), (0.0, 0.0), 1.0),))
        assert math.hypot(25.0, h2) == pytest.approx(2 * d1, rel=1e-12)
        m_near = unbeamformed_magnitude(near, derive_paths(near)[1])
        m_far = unbeamformed_magnitude(far, derive_paths(far)[1])
        assert m_far / m_near == pytest.approx(0.25, rel=1e-12)


class TestGeometry:
    def test_first_target_oracle(self, ref_scenario):
        # independent Euclidean-distance / projection arithmetic
        paths = derive_paths(ref_scenario)
        d11 = math.hypot(56.9, 10.0)
        d12 = math.hypot(56.9 - 50.0, 10.0)
        total = d11 + d12
        assert total == pytest.approx(69.922, abs=1e-3)
        assert paths[1].delay == pytest.approx(total / SPEED_OF_LIGHT, rel=1e-12)
        assert paths[1].delay == pytest.approx(233.23e-9, abs=0.01e-9)
        assert total - 50.0 == pytest.approx(19.92, abs=1e-2)

        v = np.array([1.4, -2.2])
        u_t = np.array([56.9, 10.0]) / d11
        u_r = np.array([6.9, 10.0]) / d12
        lam = SPEED_OF_LIGHT / 28e9
        nu = -(v @ u_t + v @ u_r) / lam
        assert paths[1].doppler == pytest.approx(nu, rel=1e-12)
        assert paths[1].doppler == pytest.approx(1.65, abs=0.01)

    def test_los_doppler_zero(self, ref_scenario):
        assert derive_paths(ref_scenario)[0].doppler == 0.0

    def test_stationary_target_zero_doppler(self):
        wf = WaveformConfig(fc=28e9, df=120e3, n_subc=64, n_sym=16)
        cfg = ScenarioConfig(wf, (0.0, 0.0), (50.0, 0.0), 0.0,
                             (TargetSpec((30.0, 20.0), (0.0, 0.0), 1.0),))
        assert derive_paths(cfg)[1].doppler == 0.0

    def test_receding_target_negative_doppler(self):
        # both bistatic legs growing -> doppler < 0 under the +j phase sign
        wf = WaveformConfig(fc=28e9, df=120e3, n_subc=64, n_sym=16)
        cfg = ScenarioConfig(wf, (0.0, 0.0), (50.0, 0.0), 0.0,
                             (TargetSpec((100.0, 0.0), (5.0, 0.0), 1.0),))
        assert derive_paths(cfg)[1].doppler < 0.0

    def test_scattered_delay_exceeds_los(self, ref_scenario):
        paths = derive_paths(ref_scenario)
        assert all(p.delay > paths[0].delay for p in paths[1:])

    def test_deterministic(self, ref_scenario):
        a = derive_paths(ref_scenario)
        b = derive_paths(ref_scenario)
        assert np.array_equal(a.gains, b.gains)
        assert np.array_equal(a.delays, b.delays)
        assert np.array_equal(a.dopplers, b.dopplers)

    def test_random_phase_flag(self, ref_scenario):
        cfg = ScenarioConfig(
            ref_scenario.waveform, ref_scenario.tx_pos, ref_scenario.rx_pos,
            ref_scenario.beam_angle, ref_scenario.targets,
            random_gain_phase=True, gain_phase_seed=3,
        )
        base = derive_paths(ref_scenario)
        rot = derive_paths(cfg)
        assert np.allclose(np.abs(rot.gains), np.abs(base.gains), rtol=1e-12)
        assert not np.allclose(np.angle(rot.gains), np.angle(base.gains))
        assert np.array_equal(rot.gains, derive_paths(cfg).gains)


class TestNoiseVariance:
    def test_table_values(self, ref_waveform):
        assert ref_waveform.bandwidth == pytest.approx(48e6)
        # -174 dBm/Hz + 10log10(48e6) + 8 dB, in watts
        expected = 10 ** ((-174.0 + 10 * math.log10(48e6) + 8.0 - 30.0) / 10.0)
        assert noise_variance(ref_waveform) == pytest.approx(expected, rel=1e-12)
        assert noise_variance(ref_waveform) == pytest.approx(1.206e-12, rel=1e-3)

    def test_identity_case(self):
        wf = WaveformConfig(fc=1e9, df=1.0, n_subc=1, n_sym=1,
                            noise_psd=3.5e-15, noise_figure=1.0)
        assert noise_variance(wf) == pytest.approx(3.5e-15, rel=1e-15)


class TestValidation:
    def test_colocated_tx_rx_rejected(self):
        wf = WaveformConfig(fc=28e9, df=120e3, n_subc=8, n_sym=4)
        with pytest.raises(ConfigurationError):
            ScenarioConfig(wf, (0.0, 0.0), (0.0, 0.0), 0.0)

    def test_target_on_tx_rejected(self):
        wf = WaveformConfig(fc=28e9, df=120e3, n_subc=8, n_sym=4)
        with pytest.raises(ConfigurationError):
            ScenarioConfig(wf, (0.0, 0.0), (50.0, 0.0), 0.0,
                           (TargetSpec((0.0, 0.0), (0.0, 0.0), 1.0),))

    def test_nonpositive_rcs_rejected(self):
        with pytest.raises(ConfigurationError):
            TargetSpec((10.0, 10.0), (0.0, 0.0), 0.0)

    def test_delay_spread_beyond_cp_rejected(self):
        wf = WaveformConfig(fc=28e9, df=120e3, n_subc=8, n_sym=4)
        cfg = ScenarioConfig(wf, (0.0, 0.0), (50.0, 0.0), 0.0,
                             (TargetSpec((400.0, 5.0), (0.0, 0.0), 1.0),))
        with pytest.raises(ConfigurationError):
            derive_paths(cfg)

    def test_derived_durations(self, ref_waveform):
        assert ref_waveform.t_elem == pytest.approx(1 / 120e3)
        assert ref_waveform.t_cp == pytest.approx(0.07 / 120e3)
        assert ref_waveform.t_sym == pytest.approx(1.07 / 120e3)


class TestGridSnap:
    def test_snapped_paths_on_bins(self, ref_scenario):
        wf = ref_scenario.waveform
        snapped = snap_to_grid(derive_paths(ref_scenario), wf)
        d_res = 1.0 / (wf.n_subc * wf.df)
        v_res = 1.0 / (wf.n_sym * wf.t_sym)
        for p in snapped:
            assert p.delay / d_res == pytest.approx(round(p.delay / d_res), abs=1e-9)
            assert p.doppler / v_res == pytest.approx(round(p.doppler / v_res), abs=1e-9)

    @given(st.floats(-1e6, 1e6, allow_nan=False))
    def test_round_half_away(self, x):
        r = round_half_away(x)
        assert abs(r - x) <= 0.5 + 1e-9
        if abs(x - math.floor(x) - 0.5) < 1e-12 and x >= 0:
            assert r == math.floor(x) + 1

    def test_round_half_away_examples(self):
        assert round_half_away(0.5) == 1
        assert round_half_away(1.5) == 2
        assert round_half_away(2.5) == 3
        assert round_half_away(-0.5) == -1
        assert round_half_away(-2.5) == -3


class TestSerialization:
    def test_roundtrip(self, ref_scenario, tmp_path):
        path = str(tmp_path / "scene.json")
        save_scenario(ref_scenario, path)
        loaded = load_scenario(path)
        assert loaded.waveform.fc == ref_scenario.waveform.fc
        assert loaded.waveform.tx_power == pytest.approx(
            ref_scenario.waveform.tx_power, rel=1e-12)
        assert loaded.beam_angle == pytest.approx(ref_scenario.beam_angle, rel=1e-12)
        for a, b in zip(loaded.targets, ref_scenario.targets):
            assert a.rcs == pytest.approx(b.rcs, rel=1e-12)
            assert a.position == b.position
        assert np.array_equal(derive_paths(loaded).gains,
                              derive_paths(ref_scenario).gains)

    def test_file_units(self, ref_scenario, tmp_path):
        d = scenario_to_dict(ref_scenario)
        assert d["beam_angle_deg"] == pytest.approx(10.0)
        assert d["waveform"]["tx_power_dbm"] == pytest.approx(20.0)
        assert d["waveform"]["noise_psd_dbm_hz"] == pytest.approx(-174.0)
        assert d["waveform"]["noise_figure_db"] == pytest.approx(8.0)
        assert d["targets"][0]["rcs_dbsm"] == pytest.approx(4.9)
        path = tmp_path / "scene.json"
        path.write_text(json.dumps(d))
        loaded = load_scenario(str(path))
        assert loaded.targets[0].rcs == pytest.approx(db_to_linear(4.9), rel=1e-12)

    def test_reference_scenario_matches_table(self, ref_scenario):
        wf = ref_scenario.waveform
        assert (wf.fc, wf.df, wf.n_subc, wf.n_sym, wf.n_tx) == (28e9, 120e3, 400, 60, 8)
        assert wf.tx_power == pytest.approx(0.1)
        assert ref_scenario.tx_pos == (0.0, 0.0)
        assert ref_scenario.rx_pos == (50.0, 0.0)
