"""Steering vectors, path loss, channel synthesis and the config loader."""

import math

import numpy as np
import pytest

from rispower.channel import (
    ChannelSet,
    ConfigError,
    SystemConfig,
    draw_channels,
    effective_channel,
    load_config,
    parse_config_lines,
    path_loss,
    steering_bs,
    steering_ris,
)


class TestSteering:
    def test_bs_broadside(self):
        np.testing.assert_allclose(steering_bs(2, 0.0), [1.0, 1.0])

    def test_bs_endfire(self):
        np.testing.assert_allclose(steering_bs(2, np.pi / 2), [1.0, -1.0], atol=1e-15)

    def test_bs_formula(self):
        got = steering_bs(4, np.pi / 6)
        want = np.exp(-1j * np.pi * np.arange(4) * 0.5)
        np.testing.assert_allclose(got, want)

    def test_ris_single_element(self):
        np.testing.assert_allclose(steering_ris(1, 1, 0.3, 1.1), [1.0])

    def test_ris_zero_elevation(self):
        np.testing.assert_allclose(steering_ris(3, 2, 0.7, 0.0), np.ones(6))

    def test_ris_kron_order(self):
        got = steering_ris(2, 2, 0.0, np.pi / 2)
        np.testing.assert_allclose(got, [1, 1, -1, -1], atol=1e-15)

    def test_unit_norm_squared(self):
        for m in (1, 3, 8):
            v = steering_bs(m, 0.4)
            assert np.linalg.norm(v) ** 2 == pytest.approx(m)
        v = steering_ris(4, 3, 0.2, 0.9)
        assert np.linalg.norm(v) ** 2 == pytest.approx(12)


class TestPathLoss:
    CFG = SystemConfig()

    def test_reference_distance(self):
        assert path_loss(1.0, 3.8, self.CFG) == pytest.approx(1e-3)

    def test_decade(self):
        assert path_loss(10.0, 2.0, self.CFG) == pytest.approx(1e-5)
        assert path_loss(100.0, 2.0, self.CFG) == pytest.approx(1e-7)

    def test_nonpositive_distance_rejected(self):
        with pytest.raises(ValueError):
            path_loss(0.0, 2.0, self.CFG)


class TestDrawChannels:
    def test_pure_los_ris_bs_is_rank_one(self):
        cfg = SystemConfig(n_x=4, n_y=4)
        ch = draw_channels(cfg, np.random.default_rng(0))
        s = np.linalg.svd(ch.ris_bs, compute_uv=False)
        assert s[1] / s[0] < 1e-12
        beta = path_loss(cfg.bs_ris_distance, cfg.alpha_g, cfg)
        assert np.linalg.norm(ch.ris_bs) ** 2 == pytest.approx(
            beta * cfg.m_antennas * cfg.n_elements
        )

    def test_deterministic_given_seed(self):
        cfg = SystemConfig(n_x=2, n_y=2)
        a = draw_channels(cfg, np.random.default_rng(42))
        b = draw_channels(cfg, np.random.default_rng(42))
        np.testing.assert_array_equal(a.direct, b.direct)
        np.testing.assert_array_equal(a.device_ris, b.device_ris)
        np.testing.assert_array_equal(a.ris_bs, b.ris_bs)

    def test_direct_channel_mean_power(self):
        # kappa_d = 0: pure NLoS, E||d_k||^2 = beta_d * M
        cfg = SystemConfig(k_devices=1, m_antennas=4, n_x=2, n_y=2, vert_spread=0.0)
        rng = np.random.default_rng(1)
        beta = path_loss(cfg.horiz_distance, cfg.alpha_d, cfg)
        total = 0.0
        n_draws = 10_000
        for _ in range(n_draws):
            total += np.linalg.norm(draw_channels(cfg, rng).direct[0]) ** 2
        assert total / n_draws == pytest.approx(beta * cfg.m_antennas, rel=0.05)

    def test_rician_mixing_preserves_power(self):
        # E||u_k||^2 = beta_u * N regardless of kappa
        rng = np.random.default_rng(2)
        for kappa in (0.0, 10.0):
            cfg = SystemConfig(
                k_devices=1, m_antennas=2, n_x=2, n_y=2, vert_spread=0.0, rician_u=kappa
            )
            dist = math.hypot(cfg.horiz_distance - cfg.bs_ris_distance, 0.0)
            beta = path_loss(dist, cfg.alpha_u, cfg)
            total = 0.0
            n_draws = 10_000
            for _ in range(n_draws):
                total += np.linalg.norm(draw_channels(cfg, rng).device_ris[0]) ** 2
            assert total / n_draws == pytest.approx(beta * cfg.n_elements, rel=0.05)


class TestEffectiveChannel:
    def test_no_ris_path(self):
        ch = ChannelSet(
            direct=np.array([[1.0 + 0j, 2.0]]),
            device_ris=np.array([[1.0 + 0j]]),
            ris_bs=np.zeros((2, 1), complex),
        )
        np.testing.assert_allclose(effective_channel(ch, np.array([1.0 + 0j]), 0), [1.0, 2.0])

    def test_scalar_sum(self):
        ch = ChannelSet(
            direct=np.array([[1.0 + 0j]]),
            device_ris=np.array([[1.0 + 0j]]),
            ris_bs=np.array([[1.0 + 0j]]),
        )
        np.testing.assert_allclose(effective_channel(ch, np.array([1.0 + 0j]), 0), [2.0])

    def test_matches_elementwise_loop(self):
        rng = np.random.default_rng(3)
        cfg = SystemConfig(k_devices=2, m_antennas=3, n_x=2, n_y=3)
        ch = draw_channels(cfg, rng)
        phases = np.exp(1j * rng.uniform(0, 2 * np.pi, cfg.n_elements))
        for k in range(2):
            want = ch.direct[k].copy()
            for m in range(3):
                for n in range(cfg.n_elements):
                    want[m] += ch.ris_bs[m, n] * ch.device_ris[k, n] * phases[n]
            np.testing.assert_allclose(effective_channel(ch, phases, k), want)

    def test_index_out_of_range(self):
        cfg = SystemConfig(n_x=2, n_y=2)
        ch = draw_channels(cfg, np.random.default_rng(0))
        with pytest.raises(IndexError):
            effective_channel(ch, np.ones(4, complex), 5)

    def test_linearity_in_phases(self):
        rng = np.random.default_rng(4)
        cfg = SystemConfig(k_devices=1, m_antennas=2, n_x=2, n_y=2)
        ch = draw_channels(cfg, rng)
        t1 = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        t2 = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        a, b = 0.7, -1.3
        d = ch.direct[0]
        lhs = effective_channel(ch, a * t1 + b * t2, 0)
        rhs = (
            a * (effective_channel(ch, t1, 0) - d)
            + b * (effective_channel(ch, t2, 0) - d)
            + d
        )
        np.testing.assert_allclose(lhs, rhs)


class TestConfig:
    def test_defaults_match_reference_scenario(self):
        cfg = SystemConfig()
        assert cfg.k_devices == 2
        assert cfg.m_antennas == 4
        assert cfg.n_elements == 64
        assert cfg.noise_power == pytest.approx(1e-9)
        assert cfg.rate_min == pytest.approx(0.3)
        assert cfg.p_max == pytest.approx(1.0)

    def test_parse_overrides_and_defaults(self):
        cfg, extra = parse_config_lines(
            ["# comment", "", "k_devices = 3", "noise_power = 2e-9"]
        )
        assert cfg.k_devices == 3
        assert cfg.noise_power == pytest.approx(2e-9)
        assert cfg.m_antennas == 4  # default retained
        assert extra == {}

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            parse_config_lines(["k_device = 3"])  # typo

    def test_bad_value_rejected(self):
        with pytest.raises(ConfigError):
            parse_config_lines(["k_devices = many"])

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "scenario.cfg"
        path.write_text("n_x = 4\nn_y = 4\nrng_seed = 7\n", encoding="utf-8")
        cfg, _ = load_config(path)
        assert cfg.n_elements == 16
        assert cfg.rng_seed == 7

    def test_validation(self):
        with pytest.raises(ConfigError):
            SystemConfig(k_devices=0).validate()
        with pytest.raises(ConfigError):
            SystemConfig(noise_power=0.0).validate()
