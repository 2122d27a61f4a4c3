"""Scenario geometry, path loss, steering vectors and Rician channel synthesis.

Layout convention (2-D plane): the BS is a uniform linear array at the origin
with broadside along +x, the RIS sits at (bs_ris_distance, 0), and device k is
at (horiz_distance, y_k) with y_k uniform on [-vert_spread, vert_spread].
RIS steering uses azimuth = atan2(dy, dx) toward the target and a fixed
in-plane elevation of pi/2; phases are optimized downstream, so any consistent
convention yields an equivalent experiment.

RIS elements are indexed x-major: element (ix, iy) has linear index
ix * n_y + iy, matching the Kronecker order of the steering vector.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class ConfigError(ValueError):
    """Bad or unknown key/value in a config file."""


@dataclass(frozen=True)
class SystemConfig:
    """Scenario parameters; defaults reproduce the reference setup."""

    k_devices: int = 2
    m_antennas: int = 4
    n_x: int = 8
    n_y: int = 8
    bs_ris_distance: float = 65.0
    horiz_distance: float = 57.0
    vert_spread: float = 3.0
    rician_d: float = 0.0
    rician_u: float = 10.0
    rician_g: float = math.inf
    pathloss_ref_db: float = -30.0
    ref_distance: float = 1.0
    alpha_d: float = 3.8
    alpha_u: float = 2.8
    alpha_g: float = 2.0
    noise_power: float = 1e-9
    rate_min: float = 0.3
    p_max: float = 1.0
    rng_seed: int = 0

    @property
    def n_elements(self) -> int:
        return self.n_x * self.n_y

    def validate(self) -> None:
        if min(self.k_devices, self.m_antennas, self.n_x, self.n_y) < 1:
            raise ConfigError("counts must be >= 1")
        if min(self.bs_ris_distance, self.horiz_distance, self.ref_distance) <= 0:
            raise ConfigError("distances must be positive")
        if self.vert_spread < 0:
            raise ConfigError("vert_spread must be >= 0")
        if min(self.rician_d, self.rician_u, self.rician_g) < 0:
            raise ConfigError("Rician factors must be >= 0")
        if self.noise_power <= 0 or self.p_max <= 0:
            raise ConfigError("noise_power and p_max must be positive")
        if self.rate_min <= 0:
            raise ConfigError("rate_min must be positive")

    def replace(self, **kwargs) -> "SystemConfig":
        return dataclasses.replace(self, **kwargs)


@dataclass(frozen=True)
class ChannelSet:
    """One channel realization.

    direct:     (K, M) device -> BS
    device_ris: (K, N) device -> RIS
    ris_bs:     (M, N) RIS -> BS
    """

    direct: np.ndarray
    device_ris: np.ndarray
    ris_bs: np.ndarray

    @property
    def k_devices(self) -> int:
        return self.direct.shape[0]

    def validate(self) -> None:
        k, m = self.direct.shape
        if self.device_ris.shape[0] != k or self.ris_bs.shape[0] != m:
            raise ValueError("inconsistent channel shapes")
        if self.device_ris.shape[1] != self.ris_bs.shape[1]:
            raise ValueError("RIS dimension mismatch")
        for arr in (self.direct, self.device_ris, self.ris_bs):
            if not np.all(np.isfinite(arr)):
                raise ValueError("channel entries must be finite")


def steering_bs(m: int, angle: float) -> np.ndarray:
    """ULA steering vector, entry i = exp(-j pi i sin(angle))."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return np.exp(-1j * np.pi * np.arange(m) * np.sin(angle))


def steering_ris(n_x: int, n_y: int, azimuth: float, elevation: float) -> np.ndarray:
    """Planar-array steering vector: x-array kron y-array.

    The x-array exponent is -j pi i cos(azimuth) sin(elevation), the y-array
    exponent -j pi i sin(azimuth) sin(elevation).
    """
    if n_x < 1 or n_y < 1:
        raise ValueError("array dimensions must be >= 1")
    ax = np.exp(-1j * np.pi * np.arange(n_x) * np.cos(azimuth) * np.sin(elevation))
    ay = np.exp(-1j * np.pi * np.arange(n_y) * np.sin(azimuth) * np.sin(elevation))
    return np.kron(ax, ay)


def path_loss(distance: float, exponent: float, cfg: SystemConfig) -> float:
    """Linear power gain 10^(ref_db/10) * (d/d0)^(-exponent)."""
    if distance <= 0:
        raise ValueError("distance must be positive")
    return 10.0 ** (cfg.pathloss_ref_db / 10.0) * (distance / cfg.ref_distance) ** (-exponent)


def _complex_normal(rng: np.random.Generator, *shape: int) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _rician_mix(los: np.ndarray, kappa: float, rng: np.random.Generator) -> np.ndarray:
    """sqrt(k/(k+1)) LoS + sqrt(1/(k+1)) NLoS; kappa = inf is pure LoS."""
    if math.isinf(kappa):
        return los.astype(complex)
    nlos = _complex_normal(rng, *los.shape)
    if kappa == 0.0:
        return nlos
    return np.sqrt(kappa / (kappa + 1.0)) * los + np.sqrt(1.0 / (kappa + 1.0)) * nlos


def draw_channels(cfg: SystemConfig, rng: np.random.Generator) -> ChannelSet:
    """Synthesize one realization of all channels from the scenario geometry."""
    cfg.validate()
    k, m = cfg.k_devices, cfg.m_antennas
    n = cfg.n_elements
    ris_x = cfg.bs_ris_distance

    ys = rng.uniform(-cfg.vert_spread, cfg.vert_spread, k)

    # RIS -> BS
    beta_g = path_loss(ris_x, cfg.alpha_g, cfg)
    aoa_bs_from_ris = 0.0
    az_to_bs = math.atan2(0.0, -ris_x)
    g_los = np.outer(
        steering_bs(m, aoa_bs_from_ris),
        np.conj(steering_ris(cfg.n_x, cfg.n_y, az_to_bs, np.pi / 2)),
    )
    ris_bs = np.sqrt(beta_g) * _rician_mix(g_los, cfg.rician_g, rng)

    direct = np.empty((k, m), dtype=complex)
    device_ris = np.empty((k, n), dtype=complex)
    for i in range(k):
        dist_bs = math.hypot(cfg.horiz_distance, ys[i])
        dist_ris = math.hypot(cfg.horiz_distance - ris_x, ys[i])
        beta_d = path_loss(dist_bs, cfg.alpha_d, cfg)
        beta_u = path_loss(dist_ris, cfg.alpha_u, cfg)
        d_los = steering_bs(m, math.atan2(ys[i], cfg.horiz_distance))
        direct[i] = np.sqrt(beta_d) * _rician_mix(d_los, cfg.rician_d, rng)
        az_u = math.atan2(ys[i], cfg.horiz_distance - ris_x)
        u_los = steering_ris(cfg.n_x, cfg.n_y, az_u, np.pi / 2)
        device_ris[i] = np.sqrt(beta_u) * _rician_mix(u_los, cfg.rician_u, rng)

    return ChannelSet(direct, device_ris, ris_bs)


def effective_channel(ch: ChannelSet, phases: np.ndarray, k: int) -> np.ndarray:
    """Composite uplink channel d_k + G (u_k * phases) for device k."""
    if not 0 <= k < ch.k_devices:
        raise IndexError(f"device index {k} out of range")
    return ch.direct[k] + ch.ris_bs @ (ch.device_ris[k] * phases)


_CONFIG_KEYS = {f.name for f in dataclasses.fields(SystemConfig)}
_INT_KEYS = {"k_devices", "m_antennas", "n_x", "n_y", "rng_seed"}


def parse_config_lines(lines, known_extra: dict | None = None) -> tuple[SystemConfig, dict]:
    """Build a SystemConfig from flat ``key = value`` lines.

    Missing keys take the defaults. Keys in ``known_extra`` (name -> parser)
    are collected and returned separately; anything else is a ConfigError.
    """
    known_extra = known_extra or {}
    values: dict = {}
    extra: dict = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key in _CONFIG_KEYS:
            try:
                values[key] = int(val) if key in _INT_KEYS else float(val)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: bad value for {key}: {val!r}") from exc
        elif key in known_extra:
            try:
                extra[key] = known_extra[key](val)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: bad value for {key}: {val!r}") from exc
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    cfg = SystemConfig(**values)
    cfg.validate()
    return cfg, extra


def load_config(path: str | Path, known_extra: dict | None = None) -> tuple[SystemConfig, dict]:
    """Read a UTF-8 key-value config file."""
    text = Path(path).read_text(encoding="utf-8")
    return parse_config_lines(text.splitlines(), known_extra)
