"""Empirical statistics of escape ensembles and their spectral counterparts.

Turns exit records into the observables of interest: the exit-time
histogram and survival curve, the period of the oscillatory peaks, the
two-exponential fit

    f(t) ~ C0 exp(-lambda0 t) + C1 exp(-omega1 t) cos(omega t + phi),

winding-number statistics with the geometric per-turn law
f(n) = p (1-p)^(n-1), and the L1 comparison of exit-angle histograms
against analytic densities.

Censored trajectories are excluded from exit-time histograms but survive
through t_max in the survival curve; every report carries the censoring
fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.signal import find_peaks

from .engine import ExitRecord
from .spectral import ExitDensity, Spectrum

__all__ = [
    "Histogram",
    "FitParams",
    "WindingStats",
    "AnalysisReport",
    "build_histogram",
    "survival_curve",
    "detect_peak_period",
    "fit_two_exponential",
    "fit_single_exponential",
    "winding_statistics",
    "compare_exit_density",
    "model_exit_time_density",
    "analyze_records",
]

TWO_PI = 2.0 * math.pi


def _arrays(records: Iterable[ExitRecord]):
    recs = list(records)
    times = np.array([r.exit_time for r in recs])
    angles = np.array([r.exit_angle for r in recs])
    windings = np.array([r.winding_number for r in recs], dtype=np.int64)
    censored = np.array([r.censored for r in recs], dtype=bool)
    return times, angles, windings, censored


# ---------------------------------------------------------------------------
# histogram and survival
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Histogram:
    """Uniform-bin histogram of uncensored exit times.

    normalized_density integrates (sum times bin width) to the uncensored
    fraction of the ensemble it was built from.
    """

    bin_edges: np.ndarray
    counts: np.ndarray
    normalized_density: np.ndarray

    @property
    def bin_centers(self) -> np.ndarray:
        return (self.bin_edges[:-1] + self.bin_edges[1:]) / 2.0

    @property
    def bin_width(self) -> float:
        return float(self.bin_edges[1] - self.bin_edges[0])


def build_histogram(records: Iterable[ExitRecord], n_bins: int) -> Histogram:
    """Histogram of uncensored exit times on uniform bins [0, max exit time].

    The density is normalized by (bin width x uncensored count) and then
    scaled by the uncensored fraction, so that it integrates to the
    probability mass actually observed to exit.
    """
    if n_bins < 10:
        raise ValueError(f"n_bins must be >= 10, got {n_bins}")
    times, _, _, censored = _arrays(records)
    if times.size == 0 or np.all(censored):
        raise ValueError("need at least one uncensored record")
    uncensored = times[~censored]
    top = float(uncensored.max())
    if top <= 0.0:
        top = np.finfo(float).tiny  # degenerate all-at-zero ensembles
    edges = np.linspace(0.0, top, n_bins + 1)
    counts, _ = np.histogram(uncensored, bins=edges)
    frac = uncensored.size / times.size
    width = edges[1] - edges[0]
    density = counts / (width * uncensored.size) * frac
    return Histogram(bin_edges=edges, counts=counts, normalized_density=density)


def survival_curve(records: Iterable[ExitRecord]) -> np.ndarray:
    """Empirical survival fraction, evaluated at each uncensored exit time.

    Returns rows (t, fraction with exit_time > t); right-continuous, with a
    leading (0, fraction surviving past 0) row.  Censored records survive
    through t_max.
    """
    times, _, _, censored = _arrays(records)
    if times.size == 0:
        raise ValueError("need at least one record")
    n = times.size
    ts = np.unique(times[~censored]) if np.any(~censored) else np.array([])
    grid = np.concatenate([[0.0], ts])
    # censored times equal t_max and count as surviving up to there
    surviving = np.array([(np.sum(times[~censored] > t) +
                           np.sum(censored & (times > t))) / n for t in grid])
    return np.column_stack([grid, surviving])


def detect_peak_period(hist: Histogram, smooth_window: int = 3):
    """Period of the oscillatory peaks in the exit-time density.

    Moving-average smoothing over `smooth_window` bins, then local maxima
    with height at least 10% of the smoothed global maximum; the period is
    the mean spacing of consecutive peak centers.

    Returns (period, n_peaks); period is None when fewer than two peaks are
    found.  Bin width must be well below the expected period or the peaks
    alias away.
    """
    if len(hist.counts) < 30:
        raise ValueError("histogram must have >= 30 bins")
    win = max(1, int(smooth_window))
    dens = hist.normalized_density
    smooth = np.convolve(dens, np.ones(win) / win, mode="same")
    if smooth.max() <= 0.0:
        return None, 0
    peaks, _ = find_peaks(smooth, height=0.1 * smooth.max())
    if len(peaks) < 2:
        return None, int(len(peaks))
    centers = hist.bin_centers[peaks]
    return float(np.mean(np.diff(centers))), int(len(peaks))


# ---------------------------------------------------------------------------
# exit-time density fits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FitParams:
    """Two-exponential fit of the exit-time density.

    model(t) = C0 exp(-lambda0_hat t)
             + C1 exp(-omega1_hat t) cos(omega_hat t + phase)
    """

    C0: float
    lambda0_hat: float
    C1: float
    omega1_hat: float
    omega_hat: float
    phase: float
    rms_residual: float
    converged: bool = True

    def model(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return (self.C0 * np.exp(-self.lambda0_hat * t)
                + self.C1 * np.exp(-self.omega1_hat * t)
                * np.cos(self.omega_hat * t + self.phase))


def _tail_log_slope(t: np.ndarray, y: np.ndarray) -> float:
    """Decay-rate seed: minus the slope of log density past its median mass."""
    pos = y > 0
    if pos.sum() < 4:
        return 1.0
    t_pos, y_pos = t[pos], y[pos]
    cum = np.cumsum(y_pos)
    start = int(np.searchsorted(cum, 0.5 * cum[-1]))
    if len(t_pos) - start < 4:
        start = max(0, len(t_pos) - 4)
    slope = np.polyfit(t_pos[start:], np.log(y_pos[start:]), 1)[0]
    return max(1e-8, -float(slope))


def _amplitudes(t, y, lam0, om1, om, phase):
    """Linear least squares for (C0, C1) at fixed nonlinear parameters."""
    basis = np.column_stack([np.exp(-lam0 * t),
                             np.exp(-om1 * t) * np.cos(om * t + phase)])
    coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
    resid = y - basis @ coef
    return coef, math.sqrt(float(np.mean(resid**2)))


def fit_single_exponential(hist: Histogram):
    """Best pure-exponential fit C0 exp(-lambda t); returns (C0, lambda, rms)."""
    t = hist.bin_centers
    y = hist.normalized_density
    lam = _tail_log_slope(t, y)

    def rms_of(lam_val):
        basis = np.exp(-lam_val * t)[:, None]
        coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
        return math.sqrt(float(np.mean((y - basis @ coef)**2))), float(coef[0])

    width = 0.9
    best_rms, best_c0 = rms_of(lam)
    for _ in range(40):
        res = minimize_scalar(lambda v: rms_of(v)[0],
                              bounds=(lam * (1 - width), lam * (1 + width)),
                              method="bounded")
        r, c0 = rms_of(res.x)
        if r < best_rms - 1e-12:
            lam, best_rms, best_c0 = float(res.x), r, c0
        width *= 0.5
        if width < 1e-4:
            break
    return best_c0, lam, best_rms


def fit_two_exponential(hist: Histogram, initial_omega: float,
                        omega1_seed: float = 4.0,
                        max_rounds: int = 60) -> FitParams:
    """Least-squares two-exponential fit to the bin-center density values.

    Seeds: lambda0 from the tail log-slope, omega from detect_peak_period
    (falling back to initial_omega), omega1 from `omega1_seed` (pass the
    spectral kappa when available).  The amplitudes solve a linear least
    squares at fixed nonlinear parameters; the nonlinear parameters
    (lambda0, omega1, omega, phase) are refined by coordinate descent over
    shrinking brackets until the rms improves by less than 1e-6.
    """
    if len(hist.counts) < 50:
        raise ValueError("histogram must have >= 50 bins")
    if initial_omega <= 0.0:
        raise ValueError(f"initial_omega must be positive, got {initial_omega}")
    t = hist.bin_centers
    y = hist.normalized_density
    if np.count_nonzero(y) < 8:
        raise ValueError("histogram is degenerate: fewer than 8 occupied bins")

    lam0 = _tail_log_slope(t, y)
    period, n_peaks = detect_peak_period(hist)
    om = TWO_PI / period if (period and n_peaks >= 2) else float(initial_omega)
    om1 = float(omega1_seed)
    phase = 0.0

    params = {"lam0": lam0, "om1": om1, "om": om, "phase": phase}
    widths = {"lam0": 0.6, "om1": 0.6, "om": 0.25, "phase": math.pi}

    def rms_at(p):
        _, r = _amplitudes(t, y, p["lam0"], p["om1"], p["om"], p["phase"])
        return r

    best = rms_at(params)
    converged = False
    for _ in range(max_rounds):
        previous = best
        for key in ("lam0", "om1", "om", "phase"):
            center = params[key]
            if key == "phase":
                lo, hi = center - widths[key], center + widths[key]
            else:
                lo = center * (1.0 - widths[key])
                hi = center * (1.0 + widths[key])
                lo = max(lo, 1e-10)

            def objective(v, key=key):
                trial = dict(params)
                trial[key] = v
                return rms_at(trial)

            res = minimize_scalar(objective, bounds=(lo, hi), method="bounded")
            if res.fun < best:
                params[key] = float(res.x)
                best = float(res.fun)
        for key in widths:
            widths[key] *= 0.6
        if previous - best < 1e-6:
            converged = True
            break

    (c0, c1), rms = _amplitudes(t, y, params["lam0"], params["om1"],
                                params["om"], params["phase"])
    phase = math.remainder(params["phase"], TWO_PI)
    if phase > math.pi:
        phase -= TWO_PI
    if c1 < 0.0:  # absorb the sign into the phase
        c1 = -c1
        phase = math.remainder(phase + math.pi, TWO_PI)
    return FitParams(C0=float(c0), lambda0_hat=params["lam0"], C1=float(c1),
                     omega1_hat=params["om1"], omega_hat=params["om"],
                     phase=float(phase), rms_residual=rms, converged=converged)


# ---------------------------------------------------------------------------
# winding statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WindingStats:
    """Statistics of trajectory turns around the focus before exit.

    p_estimate = 1 - f(2)/f(1) from the geometric law f(n) = p (1-p)^(n-1);
    None when fewer than two turn bins are occupied.  linear_slope is the
    least-squares slope of conditional mean exit time vs winding number
    (about one rotation period per extra turn).
    """

    counts_per_turn: dict[int, int]
    p_estimate: float | None
    conditional_mean_exit_time: dict[int, float]
    linear_slope: float

    def log_count_correlation(self, n_lo: int = 1, n_hi: int = 5) -> float:
        """Correlation of log counts vs n over [n_lo, n_hi] (occupied bins)."""
        ns = [n for n in range(n_lo, n_hi + 1)
              if self.counts_per_turn.get(n, 0) > 0]
        if len(ns) < 3:
            return math.nan
        logs = np.log([self.counts_per_turn[n] for n in ns])
        return float(np.corrcoef(ns, logs)[0, 1])


def winding_statistics(records: Iterable[ExitRecord]) -> WindingStats:
    """Winding-number counts, geometric-law estimate, conditional means."""
    times, _, windings, censored = _arrays(records)
    keep = ~censored
    if keep.sum() < 100:
        raise ValueError("need at least 100 uncensored records")
    times, windings = times[keep], windings[keep]
    counts = {int(n): int(c) for n, c in zip(*np.unique(windings,
                                                        return_counts=True))}
    if counts.get(1, 0) > 0 and counts.get(2, 0) > 0:
        p = 1.0 - counts[2] / counts[1]
        p_estimate = p if 0.0 < p < 1.0 else None
    else:
        p_estimate = None
    cond = {n: float(times[windings == n].mean()) for n in sorted(counts)}
    occupied = sorted(cond)
    if len(occupied) >= 2:
        slope = float(np.polyfit(occupied, [cond[n] for n in occupied], 1)[0])
    else:
        slope = math.nan
    return WindingStats(counts_per_turn=counts, p_estimate=p_estimate,
                        conditional_mean_exit_time=cond, linear_slope=slope)


# ---------------------------------------------------------------------------
# exit-angle density comparison
# ---------------------------------------------------------------------------

def _circular_bin_edges(n_bins: int):
    """Bins of width h = 2pi/n with one bin centered at theta = 0.

    Centering (rather than starting an edge) at zero keeps a symmetric
    boundary-point peak inside a single bin instead of splitting it.
    """
    h = TWO_PI / n_bins
    centers = np.arange(n_bins) * h          # center of bin k is k*h
    return h, centers


def binned_exit_angle_density(records: Iterable[ExitRecord], n_bins: int):
    """(centers, density) of uncensored exit angles on circular bins."""
    _, angles, _, censored = _arrays(records)
    angles = angles[~censored]
    h, centers = _circular_bin_edges(n_bins)
    shifted = (angles + h / 2.0) % TWO_PI
    counts, _ = np.histogram(shifted, bins=np.arange(n_bins + 1) * h)
    density = counts / (counts.sum() * h)
    return centers, density


def compare_exit_density(records: Iterable[ExitRecord], analytic: ExitDensity,
                         n_bins: int) -> float:
    """L1 distance between the binned empirical exit-angle density and the
    analytic density evaluated at the bin centers (renormalized on them)."""
    times, angles, _, censored = _arrays(records)
    if (~censored).sum() < 1000:
        raise ValueError("need at least 1000 uncensored records")
    centers, density = binned_exit_angle_density(records, n_bins)
    h = TWO_PI / n_bins
    ana = np.interp(centers, analytic.theta, analytic.density, period=TWO_PI)
    ana = ana / (ana.sum() * h)
    return float(np.sum(np.abs(density - ana)) * h)


def model_exit_time_density(spectrum: Spectrum, coefficients: Sequence[complex],
                            t: float) -> float:
    """Spectral model density lambda0 e^{-lambda0 t} + sum Re[C e^{-lambda t}].

    `coefficients` aligns with spectrum.eigenvalues; an empty sequence gives
    the Poissonian reference.  The expansion coefficients are not predicted
    by the asymptotics here; supply fitted or assumed values.
    """
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t}")
    coefficients = list(coefficients)
    if coefficients and len(coefficients) != len(spectrum.eigenvalues):
        raise ValueError("coefficient list must match the eigenvalue list")
    out = spectrum.lambda0 * math.exp(-spectrum.lambda0 * t)
    for coef, (_, _, lam) in zip(coefficients, spectrum.eigenvalues):
        out += (complex(coef) * np.exp(-lam * t)).real
    return float(out)


# ---------------------------------------------------------------------------
# assembled report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AnalysisReport:
    """Everything the analysis computes from one ensemble."""

    histogram: Histogram
    survival: np.ndarray
    peak_period: float | None
    n_peaks: int
    fit: FitParams
    winding: WindingStats
    exit_density_l1: float
    mfpt_empirical: float
    censored_fraction: float

    def to_text(self, header_lines: Sequence[str] = ()) -> str:
        lines = [f"# {h}" for h in header_lines]
        lines += [
            f"mfpt_empirical = {self.mfpt_empirical:.12g}",
            f"censored_fraction = {self.censored_fraction:.12g}",
            "peak_period = " + ("none" if self.peak_period is None
                                else f"{self.peak_period:.12g}"),
            f"n_peaks = {self.n_peaks}",
            f"fit_C0 = {self.fit.C0:.12g}",
            f"fit_lambda0 = {self.fit.lambda0_hat:.12g}",
            f"fit_C1 = {self.fit.C1:.12g}",
            f"fit_omega1 = {self.fit.omega1_hat:.12g}",
            f"fit_omega = {self.fit.omega_hat:.12g}",
            f"fit_phase = {self.fit.phase:.12g}",
            f"fit_rms = {self.fit.rms_residual:.12g}",
            f"fit_converged = {int(self.fit.converged)}",
            "exit_density_l1 = " + ("nan" if math.isnan(self.exit_density_l1)
                                    else f"{self.exit_density_l1:.12g}"),
            "winding_p = " + ("none" if self.winding.p_estimate is None
                              else f"{self.winding.p_estimate:.12g}"),
            f"winding_slope = {self.winding.linear_slope:.12g}",
        ]
        for n in sorted(self.winding.counts_per_turn):
            count = self.winding.counts_per_turn[n]
            mean_t = self.winding.conditional_mean_exit_time[n]
            lines.append(f"winding_bin = {n} {count} {mean_t:.12g}")
        return "\n".join(lines) + "\n"


def analyze_records(records: Sequence[ExitRecord], n_bins: int,
                    omega_seed: float, analytic: ExitDensity | None = None,
                    smooth_window: int = 3, omega1_seed: float = 4.0,
                    density_bins: int = 64) -> AnalysisReport:
    """Full analysis pipeline for one ensemble's records."""
    hist = build_histogram(records, n_bins)
    surv = survival_curve(records)
    period, n_peaks = detect_peak_period(hist, smooth_window=smooth_window)
    fit = fit_two_exponential(hist, initial_omega=omega_seed,
                              omega1_seed=omega1_seed)
    winding = winding_statistics(records)
    times, _, _, censored = _arrays(records)
    if analytic is not None and (~censored).sum() >= 1000:
        l1 = compare_exit_density(records, analytic, density_bins)
    else:
        l1 = math.nan
    mfpt_emp = float(times[~censored].mean()) if np.any(~censored) else math.nan
    return AnalysisReport(
        histogram=hist, survival=surv, peak_period=period, n_peaks=n_peaks,
        fit=fit, winding=winding, exit_density_l1=l1, mfpt_empirical=mfpt_emp,
        censored_fraction=float(censored.mean()))
