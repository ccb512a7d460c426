"""Planar drift field with a stable focus inside a repelling unit-circle limit cycle.

The field family is the Hopf normal form pushed through a disk automorphism
(a Moebius map), which slides the focus from the origin to (-alpha, 0) while
keeping the unit circle invariant.  In complex notation, with z = x + iy,

    b(z) = (z + alpha)(1 + alpha z) / (1 - alpha^2) * (-1 + |m(z)|^2 + i omega),
    m(z) = (z + alpha) / (1 + alpha z).

All downstream solvers work from the boundary-strip data of this field: the
tangential speed B(theta) on the circle, the inward decay rate b0(theta) of
the normal component, and the normal-normal noise component sigma(theta).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "FieldSpec",
    "BoundaryData",
    "drift",
    "boundary_components",
    "sample_boundary",
    "linearization_at_focus",
]

TWO_PI = 2.0 * np.pi


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class FieldSpec:
    """Parameters of the drift/noise model.

    Parameters
    ----------
    alpha : float
        Focus-shift parameter, |alpha| < 1.  The focus sits at (-alpha, 0);
        alpha = 0 is the plain Hopf system.
    omega : float
        Angular velocity of the field, > 0.
    noise_amplitude_matrix : (2, 2) array_like, optional
        Constant noise amplitude matrix ``a`` in dx = b dt + sqrt(2 eps) a dW.
        Defaults to the identity.
    """

    alpha: float
    omega: float
    noise_amplitude_matrix: np.ndarray = field(
        default_factory=lambda: np.eye(2))

    def __post_init__(self):
        alpha = float(self.alpha)
        omega = float(self.omega)
        if not np.isfinite(alpha) or abs(alpha) >= 1.0:
            raise ValueError(f"alpha must satisfy |alpha| < 1, got {alpha}")
        if not np.isfinite(omega) or omega <= 0.0:
            raise ValueError(f"omega must be positive, got {omega}")
        a = np.asarray(self.noise_amplitude_matrix, dtype=float)
        if a.shape != (2, 2) or not np.all(np.isfinite(a)):
            raise ValueError("noise_amplitude_matrix must be a finite 2x2 matrix")
        if abs(np.linalg.det(a)) < 1e-14:
            raise ValueError("noise_amplitude_matrix must be nonsingular")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "noise_amplitude_matrix", _readonly(a))

    def __eq__(self, other):
        if not isinstance(other, FieldSpec):
            return NotImplemented
        return (self.alpha == other.alpha and self.omega == other.omega
                and np.array_equal(self.noise_amplitude_matrix,
                                   other.noise_amplitude_matrix))

    def __hash__(self):
        return hash((self.alpha, self.omega,
                     self.noise_amplitude_matrix.tobytes()))

    @property
    def focus(self) -> np.ndarray:
        """Fixed point of the drift, (-alpha, 0)."""
        return np.array([-self.alpha, 0.0])

    @property
    def is_identity_noise(self) -> bool:
        return bool(np.array_equal(self.noise_amplitude_matrix, np.eye(2)))

    def sigma_matrix(self) -> np.ndarray:
        """Diffusion matrix sigma = a a^T."""
        a = self.noise_amplitude_matrix
        return a @ a.T

    # -- plain-text configuration (exact decimal round-trip via repr) --------

    def to_config_text(self) -> str:
        lines = [f"alpha = {self.alpha!r}", f"omega = {self.omega!r}"]
        if self.is_identity_noise:
            lines.append("noise = identity")
        else:
            a = self.noise_amplitude_matrix
            entries = " ".join(repr(v) for v in a.ravel())
            lines.append(f"noise = {entries}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_config_text(cls, text: str) -> "FieldSpec":
        kv = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"malformed config line: {raw!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            kv[key] = val
        try:
            alpha = float(kv["alpha"])
            omega = float(kv["omega"])
        except KeyError as exc:
            raise ValueError(f"missing config key: {exc}") from exc
        noise = kv.get("noise", "identity")
        if noise == "identity":
            mat = np.eye(2)
        else:
            vals = [float(v) for v in noise.split()]
            if len(vals) != 4:
                raise ValueError("noise must be 'identity' or 4 entries")
            mat = np.array(vals).reshape(2, 2)
        return cls(alpha=alpha, omega=omega, noise_amplitude_matrix=mat)


@dataclass(frozen=True)
class BoundaryData:
    """Boundary functions of the field sampled on a uniform angle grid.

    theta holds grid_size angles in [0, 2pi); all arrays are 2pi-periodic
    samplings (index grid_size wraps to 0).  B must be positive everywhere
    and b0/B must have positive mean, which is what the periodic Bernoulli
    solver needs.  phi is the extra boundary-layer coefficient multiplying
    2*sigma; it is zero for this field family.
    """

    grid_size: int
    theta: np.ndarray
    b0: np.ndarray
    B: np.ndarray
    sigma: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        m = int(self.grid_size)
        if m < 16:
            raise ValueError(f"grid_size must be >= 16, got {m}")
        arrays = {}
        for name in ("theta", "b0", "B", "sigma", "phi"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (m,):
                raise ValueError(f"{name} must have shape ({m},)")
            arrays[name] = _readonly(arr)
        if np.any(arrays["B"] <= 0.0):
            raise ValueError("B(theta) must be positive everywhere")
        if np.mean(arrays["b0"] / arrays["B"]) <= 0.0:
            raise ValueError("mean of b0/B over the period must be positive")
        object.__setattr__(self, "grid_size", m)
        for name, arr in arrays.items():
            object.__setattr__(self, name, arr)


def drift(spec: FieldSpec, z) -> np.ndarray:
    """Drift vector b(z) of the Moebius-shifted Hopf field.

    Parameters
    ----------
    spec : FieldSpec
    z : array_like, shape (..., 2)
        Point(s) in the plane.

    Returns
    -------
    ndarray, shape (..., 2)
    """
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != 2:
        raise ValueError("z must have shape (..., 2)")
    alpha, omega = spec.alpha, spec.omega
    x, y = z[..., 0], z[..., 1]
    # p = (z + alpha)(1 + alpha z), r2 = |(z+alpha)/(1+alpha z)|^2
    w1r = x + alpha
    w1i = y
    w2r = 1.0 + alpha * x
    w2i = alpha * y
    pr = w1r * w2r - w1i * w2i
    pi = w1r * w2i + w1i * w2r
    r2 = (w1r * w1r + w1i * w1i) / (w2r * w2r + w2i * w2i)
    fr = r2 - 1.0
    one_m_a2 = 1.0 - alpha * alpha
    bx = (pr * fr - pi * omega) / one_m_a2
    by = (pr * omega + pi * fr) / one_m_a2
    return np.stack([bx, by], axis=-1)


def boundary_components(spec: FieldSpec, theta):
    """Boundary-strip components (b0, B) of the drift at angle theta.

    b0 is the normal derivative of the normal component (decay rate of the
    inward drift just inside the circle); B is the tangential speed on the
    circle.  Both follow in closed form from the field:

        b0(theta) = 2 (1 - alpha^2 - omega alpha sin theta) / (1 - alpha^2),
        B(theta)  = omega (1 + 2 alpha cos theta + alpha^2) / (1 - alpha^2).

    b0 may go negative on part of the circle when omega*|alpha| is large;
    downstream solvers only need mean(b0/B) > 0, which equals 2/omega here.
    """
    theta = np.asarray(theta, dtype=float)
    alpha, omega = spec.alpha, spec.omega
    one_m_a2 = 1.0 - alpha * alpha
    b0 = 2.0 * (one_m_a2 - omega * alpha * np.sin(theta)) / one_m_a2
    B = omega * (1.0 + 2.0 * alpha * np.cos(theta) + alpha * alpha) / one_m_a2
    return b0, B


def sample_boundary(spec: FieldSpec, grid_size: int) -> BoundaryData:
    """Tabulate boundary functions on a uniform grid of `grid_size` angles.

    sigma(theta) is the normal-normal component nu . (sigma_matrix nu) of the
    diffusion matrix; it is identically 1 for identity noise.  phi is zero.
    Powers of two are recommended for grid_size so that the Bernoulli
    solver's grid-halving convergence ladder can subsample evenly.

    Raises
    ------
    ValueError
        If B <= 0 anywhere or mean(b0/B) <= 0 (checked by BoundaryData).
    """
    m = int(grid_size)
    theta = np.arange(m) * (TWO_PI / m)
    b0, B = boundary_components(spec, theta)
    if spec.is_identity_noise:
        sigma = np.ones(m)
    else:
        smat = spec.sigma_matrix()
        nu = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        sigma = np.einsum("ti,ij,tj->t", nu, smat, nu)
    return BoundaryData(grid_size=m, theta=theta, b0=b0, B=B,
                        sigma=sigma, phi=np.zeros(m))


def linearization_at_focus(spec: FieldSpec) -> np.ndarray:
    """Jacobian of the drift at the focus.

    The complex derivative of b at z = -alpha is (-1 + i omega) for every
    alpha (the Moebius factors cancel at the fixed point), so the Jacobian
    is the rotation-plus-contraction matrix [[-1, -omega], [omega, -1]]
    with eigenvalues -1 +/- i omega.
    """
    omega = spec.omega
    return np.array([[-1.0, -omega], [omega, -1.0]])
