"""Geometry of the phase/beamforming product manifold.

Points pair a unit-modulus complex vector (RIS reflection coefficients, the
complex circle manifold) with a unit-column-norm complex matrix (BS receive
beamformers, the complex oblique manifold). The product carries the additive
real inner product Re{a^H b} + Re{tr(A^H B)}; tangent projection, retraction
and the Riemannian gradient are all componentwise.

All operations are pure functions; nothing here holds mutable state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MODULUS_TOL = 1e-12
TANGENT_TOL = 1e-10


class RetractionError(ValueError):
    """Retraction hit a zero-modulus entry or zero-norm column."""


@dataclass(frozen=True)
class ProductPoint:
    """A joint point: unit-modulus ``phases`` (N,) and unit-norm-column ``beams`` (M, K)."""

    phases: np.ndarray
    beams: np.ndarray

    @property
    def n_elements(self) -> int:
        return self.phases.shape[0]

    @property
    def shape(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return (self.phases.shape, self.beams.shape)

    def validate(self, tol: float = MODULUS_TOL) -> None:
        """Raise if either component is off its manifold by more than ``tol``."""
        if self.phases.ndim != 1 or self.beams.ndim != 2:
            raise ValueError("phases must be a vector and beams a matrix")
        if np.max(np.abs(np.abs(self.phases) - 1.0), initial=0.0) > tol:
            raise ValueError("phase entries must have unit modulus")
        if np.max(np.abs(np.linalg.norm(self.beams, axis=0) - 1.0), initial=0.0) > tol:
            raise ValueError("beam columns must have unit norm")


@dataclass(frozen=True)
class TangentVector:
    """A direction in the tangent space at ``base``, same shapes as the point."""

    d_phases: np.ndarray
    d_beams: np.ndarray
    base: ProductPoint

    @property
    def shape(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return (self.d_phases.shape, self.d_beams.shape)

    def validate(self, tol: float = TANGENT_TOL) -> None:
        """Raise if the tangency residuals exceed ``tol``."""
        circle = np.real(np.conj(self.d_phases) * self.base.phases)
        oblique = np.real(np.sum(np.conj(self.base.beams) * self.d_beams, axis=0))
        if np.max(np.abs(circle), initial=0.0) > tol:
            raise ValueError("d_phases is not tangent to the circle manifold")
        if np.max(np.abs(oblique), initial=0.0) > tol:
            raise ValueError("d_beams is not tangent to the oblique manifold")


def _check_same_shape(a, b, what: str) -> None:
    if a.shape != b.shape:
        raise ValueError(f"{what} shapes differ: {a.shape} vs {b.shape}")


def inner_product(a: TangentVector, b: TangentVector) -> float:
    """Riemannian metric: Re{a_phases^H b_phases} + Re{tr(a_beams^H b_beams)}."""
    _check_same_shape(a.d_phases, b.d_phases, "tangent phase")
    _check_same_shape(a.d_beams, b.d_beams, "tangent beam")
    return float(
        np.real(np.vdot(a.d_phases, b.d_phases))
        + np.real(np.sum(np.conj(a.d_beams) * b.d_beams))
    )


def norm(v: TangentVector) -> float:
    return np.sqrt(inner_product(v, v))


def project_tangent(
    base: ProductPoint, ambient_phases: np.ndarray, ambient_beams: np.ndarray
) -> TangentVector:
    """Orthogonal projection of an ambient pair onto the tangent space at ``base``.

    Circle part: u - Re{conj(phases) * u} * phases.
    Oblique part, per column k: U_k - Re{w_k^H U_k} w_k.
    """
    _check_same_shape(base.phases, ambient_phases, "phase")
    _check_same_shape(base.beams, ambient_beams, "beam")
    d_phases = ambient_phases - np.real(np.conj(base.phases) * ambient_phases) * base.phases
    radial = np.real(np.sum(np.conj(base.beams) * ambient_beams, axis=0))
    d_beams = ambient_beams - base.beams * radial
    return TangentVector(d_phases, d_beams, base)


def riemannian_gradient(
    base: ProductPoint, grad_phases: np.ndarray, grad_beams: np.ndarray
) -> TangentVector:
    """Project the Euclidean gradient pair onto the tangent space at ``base``."""
    return project_tangent(base, grad_phases, grad_beams)


def retract(base: ProductPoint, v: TangentVector, step: float) -> ProductPoint:
    """Move from ``base`` along ``step * v`` and renormalize back onto the manifold.

    Circle part is entrywise (phases + step*v)/|phases + step*v|; oblique part
    renormalizes each column to unit norm. ``step == 0`` returns ``base`` exactly.
    """
    _check_same_shape(base.phases, v.d_phases, "phase")
    _check_same_shape(base.beams, v.d_beams, "beam")
    if step == 0.0:
        return base
    moved_phases = base.phases + step * v.d_phases
    moduli = np.abs(moved_phases)
    if np.any(moduli == 0.0):
        raise RetractionError("phase entry retracted through the origin")
    moved_beams = base.beams + step * v.d_beams
    col_norms = np.linalg.norm(moved_beams, axis=0)
    if np.any(col_norms == 0.0):
        raise RetractionError("beam column retracted to zero norm")
    return ProductPoint(moved_phases / moduli, moved_beams / col_norms)


def point_difference_sq(a: ProductPoint, b: ProductPoint) -> float:
    """Squared ambient (Frobenius over both blocks) distance between two points."""
    _check_same_shape(a.phases, b.phases, "phase")
    _check_same_shape(a.beams, b.beams, "beam")
    return float(
        np.linalg.norm(a.phases - b.phases) ** 2 + np.linalg.norm(a.beams - b.beams) ** 2
    )


def zero_tangent(base: ProductPoint) -> TangentVector:
    return TangentVector(
        np.zeros_like(base.phases), np.zeros_like(base.beams), base
    )


def random_point(n: int, m: int, k: int, rng: np.random.Generator) -> ProductPoint:
    """Uniform-phase circle component and normalized complex-Gaussian beam columns."""
    phases = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, n))
    beams = rng.standard_normal((m, k)) + 1j * rng.standard_normal((m, k))
    beams /= np.linalg.norm(beams, axis=0)
    return ProductPoint(phases, beams)


def random_tangent(base: ProductPoint, rng: np.random.Generator, unit: bool = True) -> TangentVector:
    """Project an ambient complex-Gaussian pair; optionally normalize to unit norm."""
    n = base.phases.shape[0]
    m, k = base.beams.shape
    v = project_tangent(
        base,
        rng.standard_normal(n) + 1j * rng.standard_normal(n),
        rng.standard_normal((m, k)) + 1j * rng.standard_normal((m, k)),
    )
    if unit:
        scale = norm(v)
        if scale > 0:
            v = TangentVector(v.d_phases / scale, v.d_beams / scale, base)
    return v
