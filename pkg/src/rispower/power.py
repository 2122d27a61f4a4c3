"""Joint phase/beamforming optimization and minimum-power allocation.

The pipeline alternates two blocks until the total transmit power settles:

1. At fixed device powers, maximize the SINR slack of every device by
   minimizing the multiplier-weighted Lagrangian

       L = sum_k lam_k ( -p_k/(2^Rmin - 1) A_kk + sum_{j!=k} p_j A_jk + sigma^2 )

   over the phase/beam product manifold (Fletcher-Reeves RCG with strong Wolfe
   steps), interleaved with projected-subgradient multiplier updates.
2. At fixed phases/beams, solve the minimum-power problem: the componentwise
   minimal feasible power meets every SINR constraint with equality, which
   reduces the LP to one K-by-K linear solve plus bound checks.

A_jk is the coupling gain |w_k^H h_j|^2 on the composite channel h_j.

Internally the solver scales the multipliers by 1/sigma^2, an exact rescaling
of the objective (L is linear in the multipliers) that keeps its magnitude
O(1) regardless of the physical noise floor; all public functions evaluate the
unscaled expressions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSet, SystemConfig, effective_channel
from .manifold import ProductPoint, random_point
from .rcg import Objective, RcgOptions, RcgTrace, rcg_minimize

# Calibrated for the power pipeline: the step criterion carries the stopping
# load (the absolute gradient tolerance is unreachable at wireless scales
# within the iteration budget), and quality comes from accumulation across
# warm-started multiplier rounds rather than per-solve precision.
PIPELINE_RCG_OPTIONS = RcgOptions(max_iters=60, tol=0.3, grad_tol=1e-6)


class InfeasiblePowerError(RuntimeError):
    """No power vector in [0, p_max]^K meets every rate constraint."""


@dataclass
class SolveReport:
    """Outcome of one power-minimization run."""

    powers: np.ndarray
    point: ProductPoint
    total_power: float
    outer_iterations: int
    inner_traces: list[RcgTrace]
    rate_slack: np.ndarray
    feasible: bool
    seed: int
    outer_powers: list[float] = field(default_factory=list)

    @property
    def inner_iterations_max(self) -> int:
        return max((t.iterations for t in self.inner_traces), default=0)


def _rate_gain_factor(cfg: SystemConfig) -> float:
    return 2.0 ** cfg.rate_min - 1.0


def coupling_gain(ch: ChannelSet, phases: np.ndarray, beam: np.ndarray, j: int) -> float:
    """|beam^H h_j|^2 for one beamformer column; always >= 0."""
    return float(np.abs(np.vdot(beam, effective_channel(ch, phases, j))) ** 2)


def _effective_channels(ch: ChannelSet, phases: np.ndarray) -> np.ndarray:
    """(K, M) stack of composite channels d_k + G (u_k * phases)."""
    return ch.direct + (ch.ris_bs @ (ch.device_ris * phases).T).T


def coupling_matrix(ch: ChannelSet, phases: np.ndarray, beams: np.ndarray) -> np.ndarray:
    """(K, K) matrix with entry [j, k] = |w_k^H h_j|^2."""
    comps = _effective_channels(ch, phases)
    return np.abs(comps @ np.conj(beams)) ** 2


def achievable_rate(
    ch: ChannelSet, phases: np.ndarray, beams: np.ndarray, p: np.ndarray, k: int, cfg: SystemConfig
) -> float:
    """log2(1 + SINR_k) with the given powers and beamformers."""
    gains = coupling_matrix(ch, phases, beams)
    signal = p[k] * gains[k, k]
    interference = float(p @ gains[:, k]) - signal
    return float(np.log2(1.0 + signal / (interference + cfg.noise_power)))


def lagrangian_value(
    ch: ChannelSet,
    phases: np.ndarray,
    beams: np.ndarray,
    p: np.ndarray,
    lam: np.ndarray,
    cfg: SystemConfig,
) -> float:
    """Multiplier-weighted sum of negated SINR slacks."""
    return float(lam @ _slack_terms(coupling_matrix(ch, phases, beams), p, cfg))


def _slack_terms(gains: np.ndarray, p: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    """Per-device g_k = -p_k/(2^Rmin - 1) A_kk + sum_{j!=k} p_j A_jk + sigma^2."""
    diag = np.diag(gains)
    interference = p @ gains - p * diag
    return -p / _rate_gain_factor(cfg) * diag + interference + cfg.noise_power


def _coefficients(p: np.ndarray, lam: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    """coef[j, k]: weight of A_jk in the Lagrangian (lam_k times +-power)."""
    k = p.shape[0]
    coef = np.tile(p[:, None], (1, k)).astype(float)
    np.fill_diagonal(coef, -p / _rate_gain_factor(cfg))
    return coef * lam[None, :]


def euclidean_grad_phases(
    ch: ChannelSet,
    phases: np.ndarray,
    beams: np.ndarray,
    p: np.ndarray,
    lam: np.ndarray,
    cfg: SystemConfig,
) -> np.ndarray:
    """Ambient gradient of the Lagrangian in the phase vector.

    Per coupling term, d A_jk / d phases = 2 conj(u_j) * (G^H w_k) (w_k^H h_j)
    in the convention where the real directional derivative along v equals
    Re{grad^H v}.
    """
    comps = _effective_channels(ch, phases)
    steered = ch.ris_bs.conj().T @ beams          # (N, K), col k = G^H w_k
    s = comps @ np.conj(beams)                    # s[j, k] = w_k^H h_j
    weights = _coefficients(p, lam, cfg) * s      # (K, K)
    return 2.0 * np.sum(np.conj(ch.device_ris).T * (steered @ weights.T), axis=1)


def euclidean_grad_beams(
    ch: ChannelSet,
    phases: np.ndarray,
    beams: np.ndarray,
    p: np.ndarray,
    lam: np.ndarray,
    cfg: SystemConfig,
) -> np.ndarray:
    """Ambient gradient of the Lagrangian in the beam matrix.

    Per coupling term, d A_jk / d w_k = 2 h_j (h_j^H w_k), same convention as
    the phase gradient.
    """
    comps = _effective_channels(ch, phases)
    s = comps @ np.conj(beams)
    return 2.0 * comps.T @ (_coefficients(p, lam, cfg) * np.conj(s))


def lagrangian_objective(
    ch: ChannelSet, p: np.ndarray, lam: np.ndarray, cfg: SystemConfig
) -> Objective:
    """Objective handle bundling the Lagrangian value and its gradient pair."""
    return Objective(
        value=lambda x: lagrangian_value(ch, x.phases, x.beams, p, lam, cfg),
        euclidean_gradient=lambda x: (
            euclidean_grad_phases(ch, x.phases, x.beams, p, lam, cfg),
            euclidean_grad_beams(ch, x.phases, x.beams, p, lam, cfg),
        ),
    )


def subgradient_step(
    ch: ChannelSet,
    phases: np.ndarray,
    beams: np.ndarray,
    p: np.ndarray,
    lam: np.ndarray,
    cfg: SystemConfig,
    step: float,
) -> np.ndarray:
    """Projected subgradient ascent on the multipliers: max(lam + step*g, 0)."""
    if step <= 0:
        raise ValueError("step must be positive")
    if np.any(lam < 0):
        raise ValueError("multipliers must be nonnegative")
    g = _slack_terms(coupling_matrix(ch, phases, beams), p, cfg)
    return np.maximum(lam + step * g, 0.0)


def min_power(
    ch: ChannelSet, phases: np.ndarray, beams: np.ndarray, cfg: SystemConfig
) -> np.ndarray:
    """Componentwise minimal power meeting every rate constraint with equality.

    Solves p = F p + u with F[k, j] = (2^Rmin - 1) A_jk / A_kk (j != k) and
    u_k = (2^Rmin - 1) sigma^2 / A_kk. Raises InfeasiblePowerError when the
    system is singular, the solution leaves [0, p_max], or any direct gain
    vanishes.
    """
    gains = coupling_matrix(ch, phases, beams)
    return min_power_from_gains(gains, cfg)


def min_power_from_gains(gains: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    """min_power on a precomputed coupling matrix (entry [j, k] = A_jk)."""
    diag = np.diag(gains)
    if np.any(diag <= 0.0):
        raise InfeasiblePowerError("a device has zero coupling gain")
    c = _rate_gain_factor(cfg)
    k = gains.shape[0]
    f = c * gains.T / diag[:, None]
    np.fill_diagonal(f, 0.0)
    u = c * cfg.noise_power / diag
    try:
        p = np.linalg.solve(np.eye(k) - f, u)
    except np.linalg.LinAlgError as exc:
        raise InfeasiblePowerError("singular power-balance system") from exc
    if np.any(p < 0.0) or np.any(p > cfg.p_max) or not np.all(np.isfinite(p)):
        raise InfeasiblePowerError("required power outside [0, p_max]")
    return p


def mrt_beams(ch: ChannelSet, phases: np.ndarray) -> np.ndarray:
    """Maximum-ratio beamformers w_k = h_k / ||h_k|| as matrix columns."""
    comps = _effective_channels(ch, phases)
    beams = np.empty((ch.direct.shape[1], ch.k_devices), dtype=complex)
    for k in range(ch.k_devices):
        nrm = np.linalg.norm(comps[k])
        if nrm == 0.0:
            beams[:, k] = 0.0
            beams[0, k] = 1.0
        else:
            beams[:, k] = comps[k] / nrm
    return beams


def optimize_phase_beam(
    ch: ChannelSet,
    p: np.ndarray,
    lam0: np.ndarray,
    cfg: SystemConfig,
    x0: ProductPoint,
    opts: RcgOptions | None = None,
    lam_budget: int = 100,
    lam_tol: float = 1e-3,
) -> tuple[ProductPoint, np.ndarray, list[RcgTrace]]:
    """Joint phase/beam optimization at fixed powers with multiplier updates.

    Alternates a manifold solve of the Lagrangian at fixed multipliers with a
    projected-subgradient multiplier step (diminishing step, self-normalized
    to the first subgradient), until neither the point nor the multipliers
    move appreciably or the round budget is hit.
    """
    if np.any(lam0 < 0):
        raise ValueError("multipliers must be nonnegative")
    opts = opts or PIPELINE_RCG_OPTIONS
    sigma_tol = max(opts.tol, 1e-9)
    lam = lam0.astype(float).copy()
    x = x0
    traces: list[RcgTrace] = []
    eta0 = None
    for i in range(1, lam_budget + 1):
        obj = lagrangian_objective(ch, p, lam / cfg.noise_power, cfg)
        x_new, trace = rcg_minimize(obj, x, opts)
        traces.append(trace)
        g = _slack_terms(coupling_matrix(ch, x_new.phases, x_new.beams), p, cfg)
        if eta0 is None:
            peak = float(np.max(np.abs(g)))
            eta0 = 1.0 / peak if peak > 0 else 0.0
        lam_new = np.maximum(lam + (eta0 / np.sqrt(i)) * g, 0.0) if eta0 else lam
        moved = (
            np.linalg.norm(x_new.phases - x.phases) ** 2
            + np.linalg.norm(x_new.beams - x.beams) ** 2
        )
        lam_moved = np.linalg.norm(lam_new - lam) / (1.0 + np.linalg.norm(lam))
        x, lam = x_new, lam_new
        if moved < sigma_tol and lam_moved < lam_tol:
            break
    return x, lam, traces


def rcg_jo(
    ch: ChannelSet,
    cfg: SystemConfig,
    opts: RcgOptions | None = None,
    rng: np.random.Generator | None = None,
    seed: int | None = None,
    outer_budget: int = 50,
    lam_budget: int = 100,
    power_rel_tol: float = 1e-4,
    warm_start_multipliers: bool = True,
    retries: int = 3,
) -> SolveReport:
    """Full alternating pipeline: joint (phases, beams) solve, then power LP.

    Starts from random phases, maximum-ratio beams and the minimal feasible
    power (p_max/2 when none exists); stops when the total power change falls
    below ``power_rel_tol`` relative or the outer budget is hit. When the
    power step is infeasible the whole pipeline restarts from fresh random
    phases up to ``retries`` times before reporting infeasible with the
    documented p = p_max fallback.
    """
    if seed is None:
        seed = cfg.rng_seed
    if rng is None:
        rng = np.random.default_rng(seed)
    opts = opts or PIPELINE_RCG_OPTIONS
    k, m, n = cfg.k_devices, cfg.m_antennas, cfg.n_elements

    best: SolveReport | None = None
    for _ in range(max(retries, 1)):
        phases = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, n))
        x = ProductPoint(phases, mrt_beams(ch, phases))
        try:
            p = min_power(ch, x.phases, x.beams, cfg)
        except InfeasiblePowerError:
            p = np.full(k, cfg.p_max / 2.0)
        lam = np.ones(k)
        traces: list[RcgTrace] = []
        outer_powers: list[float] = []
        p_feasible = None
        total_prev = np.inf
        outer = 0
        for outer in range(1, outer_budget + 1):
            lam0 = lam if warm_start_multipliers else np.ones(k)
            x, lam, round_traces = optimize_phase_beam(
                ch, p, lam0, cfg, x, opts, lam_budget=lam_budget
            )
            traces.extend(round_traces)
            try:
                p_new = min_power(ch, x.phases, x.beams, cfg)
            except InfeasiblePowerError:
                break
            total = float(p_new.sum())
            if total > total_prev + 1e-12:
                break  # keep the monotone trajectory; no further progress
            p, p_feasible = p_new, p_new
            outer_powers.append(total)
            if total_prev < np.inf and abs(total_prev - total) <= power_rel_tol * max(
                total, 1e-30
            ):
                total_prev = total
                break
            total_prev = total

        if p_feasible is not None:
            slack = np.array(
                [
                    achievable_rate(ch, x.phases, x.beams, p_feasible, i, cfg) - cfg.rate_min
                    for i in range(k)
                ]
            )
            feasible = bool(
                np.all(slack >= -1e-9)
                and np.all(p_feasible >= 0)
                and np.all(p_feasible <= cfg.p_max + 1e-12)
            )
            report = SolveReport(
                powers=p_feasible,
                point=x,
                total_power=float(p_feasible.sum()),
                outer_iterations=outer,
                inner_traces=traces,
                rate_slack=slack,
                feasible=feasible,
                seed=seed,
                outer_powers=outer_powers,
            )
            if feasible:
                return report
            if best is None or report.total_power < best.total_power:
                best = report
        elif best is None:
            fallback = np.full(k, cfg.p_max)
            slack = np.array(
                [
                    achievable_rate(ch, x.phases, x.beams, fallback, i, cfg) - cfg.rate_min
                    for i in range(k)
                ]
            )
            best = SolveReport(
                powers=fallback,
                point=x,
                total_power=float(fallback.sum()),
                outer_iterations=outer,
                inner_traces=traces,
                rate_slack=slack,
                feasible=False,
                seed=seed,
                outer_powers=outer_powers,
            )
    assert best is not None
    return best
