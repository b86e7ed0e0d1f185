"""Continuum spinors on disks, where the uniformizing map is a Möbius map."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

INV_2PI = 1.0 / (2.0 * math.pi)


class OutsideDomainError(ValueError):
    pass


class BranchError(RuntimeError):
    pass


@dataclass(frozen=True)
class ConformalFrame:
    """Map ``psi`` from the disk ``|z - center| < radius`` onto the unit disk with ``psi(a) = 0``, ``psi'(a) > 0``."""

    center: complex
    radius: float
    a: complex

    def _u(self, z):
        return (np.asarray(z, dtype=complex) - self.center) / self.radius

    @property
    def _b(self) -> complex:
        return (self.a - self.center) / self.radius

    def contains(self, z) -> bool:
        return bool(np.all(np.abs(np.asarray(z) - self.center) < self.radius))

    def psi(self, z):
        u, b = self._u(z), self._b
        return (u - b) / (1.0 - np.conj(b) * u)

    def dpsi(self, z):
        u, b = self._u(z), self._b
        return (1.0 - abs(b) ** 2) / (self.radius * (1.0 - np.conj(b) * u) ** 2)

    def sqrt_dpsi(self, z):
        """Square root of ``psi'`` continued from the positive root at ``a``.

        On a disk ``1 - conj(b) u`` stays in the right half plane, so this
        closed form is the continuous branch.
        """
        u, b = self._u(z), self._b
        return math.sqrt((1.0 - abs(b) ** 2) / self.radius) / (1.0 - np.conj(b) * u)

    def sqrt_dpsi_tracked(self, z: complex, steps: int = 256) -> complex:
        """Same branch obtained by continuing the principal root along the segment from ``a``."""
        if not self.contains(z):
            raise OutsideDomainError(f"{z} is outside the disk")
        root = cmath.sqrt(complex(self.dpsi(self.a)))
        for t in np.linspace(0.0, 1.0, steps + 1)[1:]:
            w = cmath.sqrt(complex(self.dpsi(self.a + t * (z - self.a))))
            if abs(w - root) > abs(w + root):
                w = -w
            if abs(w - root) > 0.5 * abs(root):
                raise BranchError("square root jumped; refine the tracking")
            root = w
        return root


def frame_disk(center: complex = 0j, radius: float = 1.0, a: complex = 0j) -> ConformalFrame:
    if radius <= 0:
        raise ValueError("radius must be positive")
    if abs(complex(a) - complex(center)) >= radius:
        raise OutsideDomainError(f"a = {a} is not inside the disk")
    return ConformalFrame(complex(center), float(radius), complex(a))


def hyperbolic_element(frame: ConformalFrame, a: complex | None = None) -> float:
    """``2 psi_a'(a)``."""
    if a is not None and complex(a) != frame.a:
        frame = frame_disk(frame.center, frame.radius, a)
    return 2.0 * float(np.real(frame.dpsi(frame.a)))


def continuous_spinor(frame: ConformalFrame, z, a: complex | None = None):
    """Bounded-domain spinor: ``(1/2π) sqrt(psi'(a)) sqrt(psi'(z)) (psi(z) + 1) / psi(z)``."""
    if a is not None and complex(a) != frame.a:
        frame = frame_disk(frame.center, frame.radius, a)
    p = frame.psi(z)
    if np.any(p == 0):
        raise ValueError("z coincides with the source")
    return INV_2PI * math.sqrt(float(np.real(frame.dpsi(frame.a)))) * frame.sqrt_dpsi(z) * (p + 1.0) / p


def full_plane_continuous(a: complex, z):
    """``1 / (2π (z - a))``."""
    return INV_2PI / (np.asarray(z, dtype=complex) - a)


def diagonal_difference(frame: ConformalFrame) -> float:
    """Limit of the bounded minus full-plane spinor at the source, ``psi'(a) / (2π)``."""
    return float(np.real(frame.dpsi(frame.a))) * INV_2PI


def difference_near_source(frame: ConformalFrame, h):
    """``(f_bounded - f_plane)(a, a + h)``; tends to :func:`diagonal_difference` as ``h -> 0``."""
    z = frame.a + np.asarray(h, dtype=complex)
    return continuous_spinor(frame, z) - full_plane_continuous(frame.a, z)


def energy_target(frame: ConformalFrame) -> float:
    """Continuum limit of energy density over mesh: ``ℓ(a) / (2π)``."""
    return hyperbolic_element(frame) * INV_2PI


def boundary_samples(frame: ConformalFrame, n: int = 64):
    """Points on the boundary circle and their outward unit normals."""
    th = 2.0 * np.pi * (np.arange(n) + 0.5) / n
    nu = np.exp(1j * th)
    return frame.center + frame.radius * nu, nu


def boundary_condition_residual(frame: ConformalFrame, points=None, normals=None, spinor=None) -> float:
    """``max |Im(f(z) nu(z)^(1/2))|`` over boundary samples."""
    if points is None:
        points, normals = boundary_samples(frame)
    f = continuous_spinor(frame, points) if spinor is None else spinor(points)
    return float(np.max(np.abs(np.imag(f * np.sqrt(np.asarray(normals, dtype=complex))))))


def boundary_square_integral(frame: ConformalFrame, t0: float, t1: float) -> float:
    """``Re ∫ f^2 dz`` along the boundary arc from angle ``t0`` to ``t1``."""
    def integrand(t):
        nu = cmath.exp(1j * t)
        z = frame.center + frame.radius * nu
        f = complex(continuous_spinor(frame, z))
        return (f * f * 1j * frame.radius * nu).real

    return quad(integrand, t0, t1, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
