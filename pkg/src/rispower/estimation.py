"""Sampled channel estimation at active RIS elements and low-rank completion.

Only the active elements (index set ``SampleMask``) observe pilots; the full
per-antenna / per-device channel matrices are recovered from those entries by
nuclear-norm minimization

    min ||X||_*   s.t.   X agrees with the samples on the mask,

solved with Douglas-Rachford splitting: alternate the singular-value
soft-threshold prox with exact projection onto the data constraint. LoS-
dominated channels are (near) rank-1, which is what makes this work.

Vectorization is x-major (C order) throughout: matrix entry (ix, iy) maps to
linear index ix * n_y + iy, matching the steering Kronecker order, so pure-LoS
matrices are exactly rank-1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet


class CompletionError(RuntimeError):
    """Completion did not meet the data-residual tolerance.

    Carries the last iterate and its relative on-mask residual.
    """

    def __init__(self, message: str, last_iterate: np.ndarray, residual: float):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


@dataclass(frozen=True)
class SampleMask:
    """Active-element index pairs on an n_x-by-n_y grid."""

    active: frozenset
    n_x: int
    n_y: int

    def __post_init__(self):
        if not self.active:
            raise ValueError("mask must contain at least one active element")
        for x, y in self.active:
            if not (0 <= x < self.n_x and 0 <= y < self.n_y):
                raise ValueError(f"mask index ({x}, {y}) out of range")

    @property
    def size(self) -> int:
        return len(self.active)

    def indicator(self) -> np.ndarray:
        """Boolean (n_x, n_y) array, True on active elements."""
        ind = np.zeros((self.n_x, self.n_y), dtype=bool)
        for x, y in self.active:
            ind[x, y] = True
        return ind


@dataclass(frozen=True)
class SampledMatrix:
    """Entries known on the mask, exactly zero elsewhere."""

    values: np.ndarray
    mask: SampleMask

    def __post_init__(self):
        if self.values.shape != (self.mask.n_x, self.mask.n_y):
            raise ValueError("values shape does not match the mask grid")
        if np.any(self.values[~self.mask.indicator()] != 0):
            raise ValueError("off-mask entries must be zero")


def make_mask(n_x: int, n_y: int, fraction: float, rng: np.random.Generator) -> SampleMask:
    """Uniform random subset of round(fraction * N) distinct elements."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must be in (0, 1]")
    n = n_x * n_y
    count = int(round(fraction * n))
    if count < 1:
        raise ValueError("fraction too small: no active elements")
    flat = rng.choice(n, size=count, replace=False)
    return SampleMask(frozenset((int(i) // n_y, int(i) % n_y) for i in flat), n_x, n_y)


def apply_mask(matrix: np.ndarray, mask: SampleMask) -> SampledMatrix:
    """The sampling operator: keep on-mask entries, zero the rest."""
    ind = mask.indicator()
    return SampledMatrix(np.where(ind, matrix, 0.0), mask)


def ls_sampled_estimate(
    received: np.ndarray, pilot: complex, mask: SampleMask, conjugate_pilot: bool = False
) -> SampledMatrix:
    """Least-squares estimate of the sampled entries from one pilot observation.

    Divides by the pilot (or its conjugate when the received model multiplies
    by the conjugated pilot, as in the BS-side downlink slots).
    """
    if pilot == 0:
        raise ValueError("pilot must be nonzero")
    divisor = np.conj(pilot) if conjugate_pilot else pilot
    ind = mask.indicator()
    return SampledMatrix(np.where(ind, received / divisor, 0.0), mask)


def complete_low_rank(
    sampled: SampledMatrix,
    max_iters: int = 500,
    tol: float = 1e-6,
    prox_scale: float = 0.1,
    relaxation: float = 1.2,
) -> np.ndarray:
    """Nuclear-norm completion of ``sampled`` by Douglas-Rachford splitting.

    Alternates the singular-value soft-threshold prox (level ``prox_scale``
    times the largest singular value of the zero-filled data) with projection
    onto the ball of relative on-mask radius ``tol`` around the samples
    (equality for noiseless data, a slack ball for noisy pipelines);
    ``relaxation`` is the DR step. Converged when the two prox outputs agree;
    raises CompletionError otherwise, carrying the last iterate and its
    relative fixed-point gap.
    """
    data = sampled.values
    ind = sampled.mask.indicator()
    data_norm = float(np.linalg.norm(data))
    if data_norm == 0.0:
        return np.zeros_like(data)
    tau = prox_scale * np.linalg.svd(data, compute_uv=False)[0]
    radius = tol * data_norm

    def project_data(x: np.ndarray) -> np.ndarray:
        err = np.where(ind, x - data, 0.0)
        err_norm = np.linalg.norm(err)
        if err_norm <= radius:
            return x
        keep = radius / err_norm
        return np.where(ind, data + keep * err, x)

    def shrink(y: np.ndarray) -> np.ndarray:
        u, s, vh = np.linalg.svd(y, full_matrices=False)
        return (u * np.maximum(s - tau, 0.0)) @ vh

    z = data.copy()
    gap = np.inf
    for _ in range(max_iters):
        x = project_data(z)
        y = shrink(2.0 * x - z)
        z = z + relaxation * (y - x)
        gap = float(np.linalg.norm(y - x) / data_norm)
        if gap <= 0.1 * tol:
            break
    else:
        raise CompletionError(
            f"no convergence after {max_iters} iterations (gap {gap:.2e})",
            project_data(z),
            gap,
        )
    return project_data(z)


def matrix_to_vector(matrix: np.ndarray) -> np.ndarray:
    """x-major vec: entry (ix, iy) goes to index ix * n_y + iy."""
    return matrix.reshape(-1)


def vector_to_matrix(vec: np.ndarray, n_x: int, n_y: int) -> np.ndarray:
    """Inverse of matrix_to_vector."""
    return vec.reshape(n_x, n_y)


def reconstruct_channel_set(
    samples_g: list[SampledMatrix],
    samples_u: list[SampledMatrix],
    direct: np.ndarray,
    max_iters: int = 500,
    tol: float = 1e-6,
) -> ChannelSet:
    """Complete every sampled matrix and reassemble the full channel set.

    Row m of the RIS-to-BS matrix is the vectorized completion of the m-th
    per-antenna matrix; device-to-RIS vectors likewise. The direct channels
    are estimated by conventional means and passed through unchanged.
    """
    if not samples_g or not samples_u:
        raise ValueError("need at least one sampled matrix per channel")
    if direct.ndim != 2 or direct.shape[0] != len(samples_u):
        raise ValueError("direct must be (K, M) matching samples_u")
    n_x, n_y = samples_g[0].mask.n_x, samples_g[0].mask.n_y
    m_ant, k_dev = len(samples_g), len(samples_u)

    ris_bs = np.empty((m_ant, n_x * n_y), dtype=complex)
    for m, sm in enumerate(samples_g):
        try:
            ris_bs[m] = matrix_to_vector(complete_low_rank(sm, max_iters, tol))
        except CompletionError as exc:
            raise CompletionError(
                f"RIS-BS matrix {m}: {exc}", exc.last_iterate, exc.residual
            ) from exc
    device_ris = np.empty((k_dev, n_x * n_y), dtype=complex)
    for k, sm in enumerate(samples_u):
        try:
            device_ris[k] = matrix_to_vector(complete_low_rank(sm, max_iters, tol))
        except CompletionError as exc:
            raise CompletionError(
                f"device-RIS matrix {k}: {exc}", exc.last_iterate, exc.residual
            ) from exc
    return ChannelSet(direct.astype(complex), device_ris, ris_bs)


def sample_and_reconstruct(
    ch: ChannelSet,
    n_x: int,
    n_y: int,
    fraction: float,
    rng: np.random.Generator,
    pilot: complex = 1.0,
    noise_std: float = 0.0,
    max_iters: int = 500,
    tol: float = 1e-6,
) -> ChannelSet:
    """Full estimation pipeline against a known true ``ChannelSet``.

    Draws one shared active-element mask, observes each per-antenna and
    per-device matrix through it (optionally with additive noise), LS-estimates
    the samples and completes them. Completion tolerance is relaxed to the
    noise level when pilots are noisy.
    """
    mask = make_mask(n_x, n_y, fraction, rng)
    ind = mask.indicator()
    eff_tol = tol if noise_std == 0.0 else max(tol, 1e-2)

    def observe(vec: np.ndarray, conjugate_pilot: bool) -> SampledMatrix:
        full = vector_to_matrix(vec, n_x, n_y)
        factor = np.conj(pilot) if conjugate_pilot else pilot
        received = factor * np.where(ind, full, 0.0)
        if noise_std > 0.0:
            noise = (rng.standard_normal(full.shape) + 1j * rng.standard_normal(full.shape))
            received = received + noise_std / np.sqrt(2.0) * np.where(ind, noise, 0.0)
        return ls_sampled_estimate(received, pilot, mask, conjugate_pilot)

    samples_g = [observe(ch.ris_bs[m], True) for m in range(ch.ris_bs.shape[0])]
    samples_u = [observe(ch.device_ris[k], False) for k in range(ch.k_devices)]
    return reconstruct_channel_set(samples_g, samples_u, ch.direct, max_iters, eff_tol)
