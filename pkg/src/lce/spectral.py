"""Spectral asymptotics for escape across the repelling limit cycle.

Everything here evaluates closed-form small-noise asymptotics built on the
periodic boundary-layer width function xi(theta):

* the periodic Bernoulli problem  -sigma xi^3 + b0 xi + B xi' = 0, solved
  exactly through the substitution u = xi^-2 which makes it linear;
* the eigenvalue ladder  lambda_{m,n} = (n kappa) + i m omega_tilde  of the
  absorbing Fokker-Planck operator, whose imaginary parts set the period of
  the oscillations in the exit-time density;
* the mean first passage time and the exit-point density on the circle;
* the Hopf-family closed forms used for cross-checking.

Quadrature note: full-period integrals of smooth periodic samples use the
periodic trapezoid rule (spectrally accurate).  Cumulative integrals use the
trigonometric antiderivative of the sampled integrand; a plain cumulative
trapezoid loses six orders of magnitude in the residual of xi at alpha ~ 0.9
and cannot meet the grid-stability targets, so it is used only as the
coarse-grid convergence control.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import solve_continuous_lyapunov
from scipy.special import erf

from .fields import BoundaryData, FieldSpec, linearization_at_focus, sample_boundary

__all__ = [
    "SolverError",
    "XiSolution",
    "Spectrum",
    "ExitDensity",
    "solve_bernoulli_periodic",
    "omega_tilde",
    "eigenvalues",
    "riccati_H",
    "mfpt",
    "c_of_omega",
    "hopf_barrier",
    "hopf_k0xi_integral_closed_form",
    "mfpt_hopf_closed_form",
    "k0xi_integral",
    "exit_density",
    "exit_density_closed_form",
    "exit_density_l1_distance",
    "boundary_layer_Q0",
    "radial_eigenfunction_R",
    "radial_separation_constant",
    "tangential_factor_T",
    "radial_eikonal_oracle",
    "compute_spectrum",
]

TWO_PI = 2.0 * math.pi


class SolverError(RuntimeError):
    """A numerical solver failed to converge or found no valid solution."""


# ---------------------------------------------------------------------------
# quadrature helpers on uniform periodic grids
# ---------------------------------------------------------------------------

def periodic_trapezoid(values: np.ndarray, period: float = TWO_PI) -> float:
    """Trapezoid rule over one closed period for uniform periodic samples.

    With the wrap sample f(period) = f(0) the trapezoid weights collapse to
    the plain mean, which is spectrally accurate for smooth periodic data.
    """
    values = np.asarray(values, dtype=float)
    return float(values.mean() * period)


def _fourier_antiderivative(f: np.ndarray) -> tuple[np.ndarray, float]:
    """Cumulative integral of uniform periodic samples at the grid nodes.

    Returns (F, total) with F[j] = int_0^{theta_j} f and total = int over the
    period.  Exact for trigonometric polynomials resolved by the grid; the
    Nyquist sine component vanishes at the nodes, so even grids are safe.
    """
    f = np.asarray(f, dtype=float)
    m = len(f)
    h = TWO_PI / m
    fhat = np.fft.rfft(f)
    mean = fhat[0].real / m
    ph = np.zeros_like(fhat)
    k = np.arange(1, len(fhat))
    ph[1:] = fhat[1:] / (1j * k)
    periodic_part = np.fft.irfft(ph, n=m)
    theta = np.arange(m) * h
    return mean * theta + (periodic_part - periodic_part[0]), mean * TWO_PI


def _fourier_derivative(f: np.ndarray) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    m = len(f)
    fhat = np.fft.rfft(f)
    k = np.arange(len(fhat))
    dhat = fhat * (1j * k)
    if m % 2 == 0:
        dhat[-1] = 0.0  # Nyquist derivative is odd, zero at the nodes
    return np.fft.irfft(dhat, n=m)


# ---------------------------------------------------------------------------
# the periodic Bernoulli problem
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class XiSolution:
    """Positive periodic boundary-layer width function xi(theta).

    u = xi^-2 is the solution of the linearized problem; residual_max is the
    largest grid value of |-sigma xi^3 + b_eff xi + B xi'| with xi' computed
    by spectral differencing of the returned samples (an independent check,
    not the identity used to build u).
    """

    theta: np.ndarray
    xi: np.ndarray
    u: np.ndarray
    residual_max: float


def _u_pipeline(b_eff, B, sigma, theta):
    """u(theta) of u' = (2/B)(b_eff u - sigma) with periodic closure."""
    m = len(theta)
    g = 2.0 * b_eff / B
    G, G_total = _fourier_antiderivative(g)
    if G_total <= 0.0:
        raise SolverError(
            "no decaying periodic solution: integrating factor mu(2pi) = "
            f"exp({-G_total:.6g}) >= 1")
    gbar = G_total / TWO_PI
    mu = np.exp(-G)
    mu_2pi = math.exp(-G_total)
    # I(theta) = int_0^theta q e^{-gbar s} ds with q periodic
    q = (2.0 * sigma / B) * np.exp(-(G - gbar * theta))
    qf = np.fft.fft(q) / m
    freqs = np.fft.fftfreq(m, d=1.0 / m)
    w = qf / (1j * freqs - gbar)
    S = np.fft.ifft(w * m)
    I = (np.exp(-gbar * theta) * S - S[0]).real
    I_total = (math.exp(-gbar * TWO_PI) * S[0] - S[0]).real
    u0 = I_total / (1.0 - mu_2pi)
    u = (u0 - I) / mu
    return u, u0


def _u0_trapezoid(b_eff, B, sigma, theta):
    """u(0) by plain cumulative trapezoid; coarse-grid convergence control."""
    m = len(theta)
    h = TWO_PI / m
    g = np.concatenate([2.0 * b_eff / B, [2.0 * b_eff[0] / B[0]]])
    G = np.concatenate([[0.0], np.cumsum(0.5 * (g[1:] + g[:-1])) * h])
    mu = np.exp(-G)
    f = np.concatenate([2.0 * sigma / B, [2.0 * sigma[0] / B[0]]]) * mu
    I_total = np.sum(0.5 * (f[1:] + f[:-1])) * h
    if mu[-1] >= 1.0:
        raise SolverError("no decaying periodic solution (mu(2pi) >= 1)")
    return I_total / (1.0 - mu[-1])


def solve_bernoulli_periodic(bd: BoundaryData, tol: float = 1e-8) -> XiSolution:
    """Unique positive 2pi-periodic solution of the boundary-layer equation.

    The substitution u = xi^-2 linearizes -sigma xi^3 + b_eff xi + B xi' = 0
    (b_eff = b0 + 2 sigma phi) into u' = (2/B)(b_eff u - sigma); periodicity
    pins u(0) = I(2pi) / (1 - mu(2pi)) with mu the integrating factor.

    Convergence is certified by a grid-halving ladder: u(0) is recomputed on
    the grid subsampled by 4x and 2x, with Richardson extrapolation of the
    trapezoid control values, and the relative change between successive
    doublings must fall below `tol`.

    Raises
    ------
    SolverError
        If mu(2pi) >= 1 (no decaying periodic solution), if u is not
        positive everywhere, or if the ladder has not converged at the
        full grid.
    """
    theta = bd.theta
    b_eff = bd.b0 + 2.0 * bd.sigma * bd.phi
    B = bd.B
    sigma = bd.sigma

    u, u0 = _u_pipeline(b_eff, B, sigma, theta)
    if np.any(u <= 0.0):
        raise SolverError("computed u = xi^-2 is not positive everywhere")

    # grid-halving ladder on u(0): spectral values on subsampled grids plus
    # Richardson-extrapolated trapezoid control values
    levels = [1]
    while bd.grid_size % (levels[-1] * 2) == 0 and bd.grid_size // (levels[-1] * 2) >= 64:
        levels.append(levels[-1] * 2)
        if len(levels) >= 3:
            break
    ladder = []
    for step in reversed(levels):  # coarse to fine
        sl = slice(None, None, step)
        ladder.append(_u_pipeline(b_eff[sl], B[sl], sigma[sl], theta[sl])[1])
    scale = max(1.0, abs(u0))
    if len(ladder) >= 2:
        change = abs(ladder[-1] - ladder[-2]) / scale
        if change >= tol:
            raise SolverError(
                f"u(0) not grid-converged: relative change {change:.3e} >= "
                f"tol {tol:.3e} at grid_size {bd.grid_size}; refine the grid")
    trap = [_u0_trapezoid(b_eff[::s], B[::s], sigma[::s], theta[::s])
            for s in reversed(levels)]
    if len(trap) >= 2:
        rich = [(4.0 * trap[i + 1] - trap[i]) / 3.0 for i in range(len(trap) - 1)]
        control = rich[-1]
    else:
        control = trap[-1]
    # the trapezoid control is O(h^4); it guards against a silent spectral
    # failure (e.g. non-smooth inputs), not against its own h^4 error
    ctrl_tol = max(100.0 * tol, 1e-4)
    if abs(control - u0) / scale >= ctrl_tol:
        raise SolverError(
            f"quadrature disagreement: spectral u(0) = {u0:.9g}, trapezoid "
            f"control = {control:.9g}")

    xi = 1.0 / np.sqrt(u)
    xi_prime = _fourier_derivative(xi)
    residual = -sigma * xi**3 + b_eff * xi + B * xi_prime
    return XiSolution(theta=theta, xi=xi, u=u,
                      residual_max=float(np.max(np.abs(residual))))


# ---------------------------------------------------------------------------
# spectrum
# ---------------------------------------------------------------------------

def omega_tilde(bd: BoundaryData) -> float:
    """Harmonic-mean angular speed around the boundary, 2pi / int(ds / B)."""
    return TWO_PI / periodic_trapezoid(1.0 / bd.B)


def eigenvalues(bd: BoundaryData, xi: XiSolution, n_max: int, m_max: int,
                include_zero_mode: bool = False):
    """Ladder of complex eigenvalues lambda_{m,n} = (n kappa) + i m omega_t.

    kappa = (omega_t / pi) int sigma xi^2 / B ds is the real-part spacing.
    Entries are returned as (n, m, lambda) for n = 1..n_max and
    m = -m_max..m_max; include_zero_mode adds the purely imaginary n = 0,
    m != 0 entries, which are excluded by default because they do not decay.
    """
    omega_t = omega_tilde(bd)
    ray = periodic_trapezoid(bd.sigma * xi.xi**2 / bd.B)
    out = []
    if include_zero_mode:
        for m in range(-m_max, m_max + 1):
            if m != 0:
                out.append((0, m, complex(0.0, m * omega_t)))
    for n in range(1, n_max + 1):
        for m in range(-m_max, m_max + 1):
            out.append((n, m, complex(n * ray / math.pi * omega_t,
                                      m * omega_t)))
    return out


def riccati_H(B_matrix: np.ndarray, sigma_matrix: np.ndarray,
              tol: float = 1e-12, max_iter: int = 50) -> np.ndarray:
    """Symmetric positive-definite H solving 2 H sigma H + H B + B^T H = 0.

    Newton iteration on the quadratic matrix equation; each step solves the
    Lyapunov equation A^T D + D A = -F(H) with A = 2 sigma H + B.  The
    starting point is the Lyapunov solution of H B + B^T H = -2 sigma,
    rescaled so the quadratic and linear terms balance in Frobenius norm.

    Raises
    ------
    ValueError
        If B is not stable or sigma is not symmetric positive definite.
    SolverError
        If the residual has not dropped below `tol` after `max_iter` steps.
    """
    B = np.asarray(B_matrix, dtype=float)
    sig = np.asarray(sigma_matrix, dtype=float)
    if B.shape != sig.shape or B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError("B_matrix and sigma_matrix must be square and equal-shaped")
    if np.max(np.linalg.eigvals(B).real) >= 0.0:
        raise ValueError("B_matrix must be stable (eigenvalue real parts < 0)")
    if not np.allclose(sig, sig.T, rtol=0, atol=1e-12) or \
            np.min(np.linalg.eigvalsh(sig)) <= 0.0:
        raise ValueError("sigma_matrix must be symmetric positive definite")

    def res(H):
        return 2.0 * H @ sig @ H + H @ B + B.T @ H

    H = solve_continuous_lyapunov(B.T, -2.0 * sig)
    K = H @ sig @ H
    s = float(np.tensordot(K, sig) / np.tensordot(K, K))
    H = s * H
    r = res(H)
    for _ in range(max_iter):
        norm = np.linalg.norm(r, "fro")
        if norm < tol:
            if np.min(np.linalg.eigvalsh(H)) <= 0.0:
                raise SolverError("Riccati iteration converged to a non-PD matrix")
            return (H + H.T) / 2.0
        A = 2.0 * sig @ H + B
        delta = solve_continuous_lyapunov(A.T, -r)
        H = H + (delta + delta.T) / 2.0
        r = res(H)
    raise SolverError(
        f"Riccati iteration did not converge: last residual "
        f"{np.linalg.norm(r, 'fro'):.3e} > tol {tol:.3e}")


def k0xi_integral(bd: BoundaryData, xi: XiSolution) -> float:
    """int_0^2pi K0(0, s) xi(s) ds with K0(0, s) = xi(s) / B(s)."""
    return periodic_trapezoid(xi.xi**2 / bd.B)


def mfpt(bd: BoundaryData, xi: XiSolution, H: np.ndarray, psi_hat: float,
         eps: float) -> float:
    """Small-noise mean first passage time to the limit cycle.

        tau = pi^(3/2) sqrt(2 eps) exp(psi_hat / eps)
              / (sqrt(det H) * int xi^2 / B ds)
    """
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    if psi_hat < 0.0:
        raise ValueError(f"psi_hat must be nonnegative, got {psi_hat}")
    det_h = float(np.linalg.det(np.asarray(H, dtype=float)))
    if det_h <= 0.0:
        raise ValueError("H must have positive determinant")
    denom = math.sqrt(det_h) * k0xi_integral(bd, xi)
    return math.pi**1.5 * math.sqrt(2.0 * eps) * math.exp(psi_hat / eps) / denom


def c_of_omega(omega: float) -> float:
    """C(omega) = 3w/8 - (8/w)/(1+(4/w)^2) + (4/w)/(4+(4/w)^2)."""
    if omega <= 0.0:
        raise ValueError(f"omega must be positive, got {omega}")
    w = float(omega)
    return 3.0 * w / 8.0 - (8.0 / w) / (1.0 + (4.0 / w) ** 2) \
        + (4.0 / w) / (4.0 + (4.0 / w) ** 2)


def hopf_barrier(alpha: float) -> float:
    """Quadratic-form barrier height (1 - |alpha|)^2 / 2 for the Hopf family.

    For alpha > 0 this is the published value psi(-1) = (1 - alpha)^2 / 2 at
    the boundary point closest to the focus; the |alpha| makes the mirrored
    family alpha < 0 (focus at (|alpha|, 0), escape near theta = 0) use the
    barrier on its own near side.
    """
    return 0.5 * (1.0 - abs(alpha)) ** 2


def hopf_k0xi_integral_closed_form(alpha: float, omega: float) -> float:
    """Published closed form 4 pi (a^4 + 4 a^2 + 1) / (C(w) (1 + a^2)).

    This does not agree with the general quadrature (which evaluates to
    4 pi / omega exactly for the Hopf family, any alpha); both are reported
    so the discrepancy stays visible.
    """
    a2 = alpha * alpha
    return 4.0 * math.pi * (a2 * a2 + 4.0 * a2 + 1.0) / (c_of_omega(omega) * (1.0 + a2))


def mfpt_hopf_closed_form(alpha: float, omega: float, eps: float,
                          variant: str = "paper") -> float:
    """Closed-form MFPT variants for the Hopf family.

    variant "paper" uses the (1 + alpha)^2 numerator of the final published
    display (whose alpha -> 1 limit is 1/6); variant "den" is what direct
    substitution of the closed-form boundary integral gives, with
    (1 + alpha^2) instead.  The two disagree; the general quadrature in
    `mfpt` is the authoritative value.
    """
    if variant == "paper":
        numerator = (1.0 + alpha) ** 2
    elif variant == "den":
        numerator = 1.0 + alpha * alpha
    else:
        raise ValueError(f"unknown variant {variant!r}")
    a2 = alpha * alpha
    psi = hopf_barrier(alpha)
    return c_of_omega(omega) * math.sqrt(TWO_PI * eps) * numerator \
        / (4.0 * (1.0 + 4.0 * a2 + a2 * a2)) * math.exp(psi / eps)


# ---------------------------------------------------------------------------
# exit-point density
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExitDensity:
    """Normalized density of exit points on the circle."""

    theta: np.ndarray
    density: np.ndarray
    closed_form_available: bool

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        dens = np.asarray(self.density, dtype=float)
        if theta.shape != dens.shape or theta.ndim != 1:
            raise ValueError("theta and density must be 1-d arrays of equal length")
        if np.any(dens < 0.0):
            raise ValueError("density must be nonnegative")
        total = _wrapped_trapezoid(theta, dens)
        if abs(total - 1.0) > 1e-8:
            raise ValueError(f"density must integrate to 1, got {total!r}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "density", dens)

    def to_text(self, header_lines: Sequence[str] = ()) -> str:
        lines = [f"# {h}" for h in header_lines]
        lines.append("# theta density")
        for t, d in zip(self.theta, self.density):
            lines.append(f"{t:.12g} {d:.12g}")
        return "\n".join(lines) + "\n"


def _wrapped_trapezoid(theta: np.ndarray, values: np.ndarray) -> float:
    """Trapezoid over [theta_0, theta_0 + 2pi] with the wrap sample appended."""
    t = np.concatenate([theta, [theta[0] + TWO_PI]])
    v = np.concatenate([values, [values[0]]])
    return float(np.trapezoid(v, t))


def exit_density(bd: BoundaryData, xi: XiSolution) -> ExitDensity:
    """Exit-point density P(theta) = (xi^2 sigma / B) / int(xi^2 sigma / B)."""
    raw = xi.xi**2 * bd.sigma / bd.B
    dens = raw / _wrapped_trapezoid(bd.theta, raw)
    return ExitDensity(theta=bd.theta, density=dens, closed_form_available=False)


def exit_density_closed_form(alpha: float, theta_grid) -> ExitDensity:
    """Large-omega closed form P(theta) ~ (1 + 2 alpha cos theta + alpha^2)^-3."""
    if abs(alpha) >= 1.0:
        raise ValueError(f"alpha must satisfy |alpha| < 1, got {alpha}")
    theta = np.asarray(theta_grid, dtype=float)
    raw = (1.0 + 2.0 * alpha * np.cos(theta) + alpha * alpha) ** -3.0
    dens = raw / _wrapped_trapezoid(theta, raw)
    return ExitDensity(theta=theta, density=dens, closed_form_available=True)


def exit_density_l1_distance(a: ExitDensity, b: ExitDensity) -> float:
    """L1 distance between two densities sampled on the same grid."""
    if a.theta.shape != b.theta.shape or not np.allclose(a.theta, b.theta):
        raise ValueError("densities must share the same theta grid")
    return _wrapped_trapezoid(a.theta, np.abs(a.density - b.density))


# ---------------------------------------------------------------------------
# boundary layer and radial eigenfunctions
# ---------------------------------------------------------------------------

def boundary_layer_Q0(xi_at_s: float, zeta: float) -> float:
    """Leading boundary-layer profile -sqrt(2/pi) int_0^{xi zeta} e^{-z^2/2} dz.

    Vanishes at the absorbing boundary (zeta = 0) and matches the outer
    solution (-> 1) as zeta -> -inf.  Equals erf(-xi zeta / sqrt(2)).
    """
    if xi_at_s <= 0.0:
        raise ValueError(f"xi_at_s must be positive, got {xi_at_s}")
    if zeta > 0.0:
        raise ValueError(f"zeta must be <= 0 (interior side), got {zeta}")
    return float(erf(-xi_at_s * zeta / math.sqrt(2.0)))


def radial_separation_constant(n: int) -> float:
    """Separation constant mu_n = 2n of the radial eigenvalue problem."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return 2.0 * n


def radial_eigenfunction_R(n: int, eta) -> np.ndarray | float:
    """Radial eigenfunction R_n(eta) = exp(-eta^2/2) H_{2n+1}(eta / sqrt 2).

    H_k are the physicists' Hermite polynomials by the standard recurrence
    H_{k+1}(x) = 2 x H_k(x) - 2 k H_{k-1}(x).  R_n solves
    R'' + eta R' + 2n R = 0 with R(0) = 0 and decay as eta -> -inf.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    eta_arr = np.asarray(eta, dtype=float)
    x = eta_arr / math.sqrt(2.0)
    h_prev = np.ones_like(x)
    h = 2.0 * x
    for k in range(1, 2 * n + 1):
        h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
    out = np.exp(-eta_arr**2 / 2.0) * h
    return out if out.ndim else float(out)


def tangential_factor_T(bd: BoundaryData, xi: XiSolution, lam: complex,
                        n: int, s: float) -> complex:
    """T(s) = exp(-lambda int_0^s ds'/B + 2n int_0^s sigma xi^2 / B ds').

    For lambda on the eigenvalue ladder T is 2pi-periodic (T(2pi) = T(0));
    off-ladder values break the periodicity, which is the defining property
    behind the ladder formula.
    """
    if not 0.0 <= s <= TWO_PI:
        raise ValueError(f"s must lie in [0, 2pi], got {s}")
    inv_b, inv_b_total = _fourier_antiderivative(1.0 / bd.B)
    w, w_total = _fourier_antiderivative(bd.sigma * xi.xi**2 / bd.B)
    grid = np.concatenate([bd.theta, [TWO_PI]])
    a1 = float(np.interp(s, grid, np.concatenate([inv_b, [inv_b_total]])))
    a2 = float(np.interp(s, grid, np.concatenate([w, [w_total]])))
    return complex(np.exp(-lam * a1 + 2.0 * n * a2))


def radial_eikonal_oracle(n_points: int, alpha: float = 0.0):
    """Rotationally symmetric eikonal barrier, integrated numerically.

    Integrates psi'(r) = r (1 - r^2) from psi(0) = 0 by cumulative
    trapezoid, independent of the closed form r^2/2 - r^4/4 it is used to
    check.  Only the alpha = 0 case is rotationally symmetric.
    """
    if alpha != 0.0:
        raise ValueError("the radial eikonal oracle is only valid at alpha = 0")
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    r = np.linspace(0.0, 1.0, int(n_points))
    f = r * (1.0 - r**2)
    psi = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(r))])
    return r, psi


# ---------------------------------------------------------------------------
# assembled spectrum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Spectrum:
    """Analytic spectrum summary for one (field, eps) configuration."""

    lambda0: float
    omega_tilde: float
    kappa: float
    eigenvalues: tuple
    mfpt: float
    psi_hat: float
    H: np.ndarray
    k0xi_integral: float

    def to_text(self, header_lines: Sequence[str] = ()) -> str:
        lines = [f"# {h}" for h in header_lines]
        lines += [
            f"lambda0 = {self.lambda0:.12g}",
            f"mfpt = {self.mfpt:.12g}",
            f"omega_tilde = {self.omega_tilde:.12g}",
            f"kappa = {self.kappa:.12g}",
            f"psi_hat = {self.psi_hat:.12g}",
            f"k0xi_integral = {self.k0xi_integral:.12g}",
            "H = " + " ".join(f"{v:.12g}" for v in np.asarray(self.H).ravel()),
        ]
        for (n, m, lam) in self.eigenvalues:
            lines.append(f"eigenvalue = {n} {m} {lam.real:.12g} {lam.imag:.12g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Spectrum":
        kv = {}
        eigs = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, val = (s.strip() for s in line.split("=", 1))
            if key == "eigenvalue":
                n_s, m_s, re_s, im_s = val.split()
                eigs.append((int(n_s), int(m_s), complex(float(re_s), float(im_s))))
            else:
                kv[key] = val
        h_vals = [float(v) for v in kv["H"].split()]
        return cls(
            lambda0=float(kv["lambda0"]),
            omega_tilde=float(kv["omega_tilde"]),
            kappa=float(kv["kappa"]),
            eigenvalues=tuple(eigs),
            mfpt=float(kv["mfpt"]),
            psi_hat=float(kv["psi_hat"]),
            H=np.array(h_vals).reshape(2, 2),
            k0xi_integral=float(kv["k0xi_integral"]),
        )


def compute_spectrum(spec: FieldSpec, eps: float, n_max: int = 3,
                     m_max: int = 3, grid_size: int = 4096,
                     psi_hat: float | None = None, tol: float = 1e-8,
                     include_zero_mode: bool = False) -> Spectrum:
    """Assemble the full analytic spectrum for a field at noise level eps.

    psi_hat defaults to the Hopf quadratic-form barrier (1 - |alpha|)^2 / 2;
    pass an explicit value to override (e.g. the exact radial barrier 1/4 at
    alpha = 0, which the quadratic form does not reproduce).
    """
    bd = sample_boundary(spec, grid_size)
    xi = solve_bernoulli_periodic(bd, tol=tol)
    omega_t = omega_tilde(bd)
    eigs = eigenvalues(bd, xi, n_max, m_max, include_zero_mode=include_zero_mode)
    kappa = (omega_t / math.pi) * periodic_trapezoid(bd.sigma * xi.xi**2 / bd.B)
    H = riccati_H(linearization_at_focus(spec), spec.sigma_matrix())
    if psi_hat is None:
        psi_hat = hopf_barrier(spec.alpha)
    tau = mfpt(bd, xi, H, psi_hat, eps)
    return Spectrum(
        lambda0=1.0 / tau,
        omega_tilde=omega_t,
        kappa=kappa,
        eigenvalues=tuple(eigs),
        mfpt=tau,
        psi_hat=psi_hat,
        H=H,
        k0xi_integral=k0xi_integral(bd, xi),
    )
