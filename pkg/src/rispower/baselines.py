"""Reference schemes: random phases with maximum-ratio beams, and no RIS at all."""

from __future__ import annotations

import numpy as np

from .channel import ChannelSet, SystemConfig
from .manifold import ProductPoint
from .power import (
    InfeasiblePowerError,
    SolveReport,
    achievable_rate,
    min_power,
    mrt_beams,
)


def _finish_report(
    ch: ChannelSet, cfg: SystemConfig, x: ProductPoint, seed: int
) -> SolveReport:
    try:
        p = min_power(ch, x.phases, x.beams, cfg)
        feasible = True
    except InfeasiblePowerError:
        p = np.full(cfg.k_devices, cfg.p_max)
        feasible = False
    slack = np.array(
        [
            achievable_rate(ch, x.phases, x.beams, p, k, cfg) - cfg.rate_min
            for k in range(cfg.k_devices)
        ]
    )
    if feasible:
        feasible = bool(np.all(slack >= -1e-9))
    return SolveReport(
        powers=p,
        point=x,
        total_power=float(p.sum()),
        outer_iterations=0,
        inner_traces=[],
        rate_slack=slack,
        feasible=feasible,
        seed=seed,
        outer_powers=[float(p.sum())],
    )


def baseline_random_phase_mrt(
    ch: ChannelSet, cfg: SystemConfig, rng: np.random.Generator, seed: int = 0
) -> SolveReport:
    """Random reflection phases, maximum-ratio beams, minimal feasible power."""
    phases = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, cfg.n_elements))
    x = ProductPoint(phases, mrt_beams(ch, phases))
    return _finish_report(ch, cfg, x, seed)


def baseline_no_ris(
    ch: ChannelSet, cfg: SystemConfig, rng: np.random.Generator, seed: int = 0
) -> SolveReport:
    """No reflected path (G = 0) and random unit-norm beams."""
    blocked = ChannelSet(ch.direct, ch.device_ris, np.zeros_like(ch.ris_bs))
    beams = rng.standard_normal((cfg.m_antennas, cfg.k_devices)) + 1j * rng.standard_normal(
        (cfg.m_antennas, cfg.k_devices)
    )
    beams /= np.linalg.norm(beams, axis=0)
    x = ProductPoint(np.ones(cfg.n_elements, dtype=complex), beams)
    return _finish_report(blocked, cfg, x, seed)
