"""Euler-Maruyama simulation of escape across the unit circle.

Each trajectory integrates dz = b(z) dt + sqrt(2 eps dt) a xi_k with its own
counter-based random stream: a Philox bit generator keyed by
(master_seed, trajectory_index), with standard normals drawn by numpy's
ziggurat.  That makes every trajectory a pure function of (field, config,
index), so ensembles are bit-for-bit reproducible for any worker count and
any chunking of the noise stream (chunks only pre-draw a prefix of the
stream).

Absorption: the step that first lands on or outside |z| = 1 is cut at the
circle by solving |z + s dz| = 1 for s in [0, 1]; the exit time and exit
angle come from that crossing point, which removes the O(dt) overshoot
bias.  The winding number is the number of completed turns of the sampled
path around the focus: straight segments that miss the focus subtend less
than pi, so counting signed crossings of the ray opposite the focus equals
unwrapped-angle accumulation.

The inner loop is a numba kernel when numba imports, with a pure-Python
fallback that performs the identical arithmetic (same operation order, same
results bit for bit).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.random import Generator, Philox

from .fields import FieldSpec

__all__ = [
    "SimConfig",
    "ExitRecord",
    "EnsembleResult",
    "step",
    "run_trajectory",
    "run_ensemble",
    "trajectory_path",
    "write_ensemble",
    "read_ensemble",
    "default_t_max",
]

TWO_PI = 2.0 * math.pi
NOISE_CHUNK = 8192  # steps pre-drawn per refill; perf knob, not results

try:
    from ._kernels import advance_chunk as _advance_numba
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dep, but stay usable
    _advance_numba = None
    _HAVE_NUMBA = False


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo run configuration.

    dt must resolve both the rotation (dt <= 0.1 / omega, checked against
    the field at run time) and the boundary layer (dt <= 1e-3).  eps = 0 is
    accepted for deterministic-flow diagnostics.  x0 must lie in the closed
    unit disk; starting on the circle is immediate absorption.
    """

    eps: float
    dt: float
    x0: tuple[float, float] = (-0.5, 0.0)
    n_trajectories: int = 1000
    master_seed: int = 1
    t_max: float = 1e4

    def __post_init__(self):
        if not (self.eps >= 0.0 and math.isfinite(self.eps)):
            raise ValueError(f"eps must be >= 0, got {self.eps}")
        if not (0.0 < self.dt <= 1e-3):
            raise ValueError(f"dt must lie in (0, 1e-3], got {self.dt}")
        x0 = (float(self.x0[0]), float(self.x0[1]))
        if math.hypot(*x0) > 1.0:
            raise ValueError(f"x0 must lie in the closed unit disk, got {x0}")
        if self.n_trajectories < 0:
            raise ValueError("n_trajectories must be >= 0")
        if not (0 <= int(self.master_seed) < 2**64):
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if not (self.t_max > 0.0 and math.isfinite(self.t_max)):
            raise ValueError(f"t_max must be positive and finite, got {self.t_max}")
        object.__setattr__(self, "eps", float(self.eps))
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "n_trajectories", int(self.n_trajectories))
        object.__setattr__(self, "master_seed", int(self.master_seed))
        object.__setattr__(self, "t_max", float(self.t_max))

    def validate_against(self, field: FieldSpec) -> None:
        limit = 0.1 / field.omega
        if self.dt > limit:
            raise ValueError(
                f"dt = {self.dt} too coarse for omega = {field.omega}: "
                f"need dt <= 0.1/omega = {limit:.3g}")


@dataclass(frozen=True)
class ExitRecord:
    """One trajectory's exit data.

    Censored records (t_max reached without exit) carry exit_time = t_max
    and exit_angle = nan.
    """

    trajectory_index: int
    exit_time: float
    exit_angle: float
    winding_number: int
    censored: bool


@dataclass(frozen=True)
class EnsembleResult:
    """All trajectories of one run, ordered by trajectory_index."""

    config: SimConfig
    field: FieldSpec
    records: tuple[ExitRecord, ...]

    def __post_init__(self):
        if len(self.records) != self.config.n_trajectories:
            raise ValueError("record count must equal n_trajectories")
        object.__setattr__(self, "records", tuple(self.records))

    @property
    def exit_times(self) -> np.ndarray:
        return np.array([r.exit_time for r in self.records])

    @property
    def exit_angles(self) -> np.ndarray:
        return np.array([r.exit_angle for r in self.records])

    @property
    def winding_numbers(self) -> np.ndarray:
        return np.array([r.winding_number for r in self.records], dtype=np.int64)

    @property
    def censored_mask(self) -> np.ndarray:
        return np.array([r.censored for r in self.records], dtype=bool)

    @property
    def censored_fraction(self) -> float:
        if not self.records:
            return 0.0
        return float(self.censored_mask.mean())


# ---------------------------------------------------------------------------
# stepping
# ---------------------------------------------------------------------------

def _drift_scalar(alpha: float, omega: float, x: float, y: float):
    """Scalar drift, in the exact operation order of the numba kernel."""
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
    return bx, by


def step(field: FieldSpec, eps: float, dt: float, z, gaussian_pair) -> np.ndarray:
    """One Euler-Maruyama step z' = z + b(z) dt + sqrt(2 eps dt) a xi."""
    x, y = float(z[0]), float(z[1])
    bx, by = _drift_scalar(field.alpha, field.omega, x, y)
    amp = math.sqrt(2.0 * eps * dt)
    g0, g1 = float(gaussian_pair[0]), float(gaussian_pair[1])
    if field.is_identity_noise:
        nx, ny = g0, g1
    else:
        a = field.noise_amplitude_matrix
        nx = a[0, 0] * g0 + a[0, 1] * g1
        ny = a[1, 0] * g0 + a[1, 1] * g1
    return np.array([x + bx * dt + amp * nx, y + by * dt + amp * ny])


def _advance_python(x, y, cuts, t, alpha, omega, amp, dt, noise,
                    a00, a01, a10, a11, fx, fy):
    """Pure-Python chunk advance; mirrors the numba kernel bit for bit."""
    one_m_a2 = 1.0 - alpha * alpha
    n = noise.shape[0]
    ux = x - fx
    uy = y - fy
    for i in range(n):
        w1r = x + alpha
        w1i = y
        w2r = 1.0 + alpha * x
        w2i = alpha * y
        pr = w1r * w2r - w1i * w2i
        pi = w1r * w2i + w1i * w2r
        r2 = (w1r * w1r + w1i * w1i) / (w2r * w2r + w2i * w2i)
        fr = r2 - 1.0
        bx = (pr * fr - pi * omega) / one_m_a2
        by = (pr * omega + pi * fr) / one_m_a2
        g0 = noise[i, 0]
        g1 = noise[i, 1]
        nx = a00 * g0 + a01 * g1
        ny = a10 * g0 + a11 * g1
        xn = x + bx * dt + amp * nx
        yn = y + by * dt + amp * ny
        exited = xn * xn + yn * yn >= 1.0
        if exited:
            dx = xn - x
            dy = yn - y
            a = dx * dx + dy * dy
            b = 2.0 * (x * dx + y * dy)
            c = x * x + y * y - 1.0
            disc = b * b - 4.0 * a * c
            if disc < 0.0:
                disc = 0.0
            s = (-b + math.sqrt(disc)) / (2.0 * a)
            xn = x + s * dx
            yn = y + s * dy
            t += s * dt
        else:
            t += dt
        vx = xn - fx
        vy = yn - fy
        if (uy < 0.0) != (vy < 0.0):
            xc = ux + (vx - ux) * (0.0 - uy) / (vy - uy)
            if xc < 0.0:
                # upward crossing left of the focus is a clockwise turn
                cuts += -1 if vy >= 0.0 else 1
        if exited:
            return xn, yn, cuts, t, i + 1, 1
        x = xn
        y = yn
        ux = vx
        uy = vy
    return x, y, cuts, t, n, 0


def _resolve_backend(backend: str | None) -> str:
    if backend is None:
        return "numba" if _HAVE_NUMBA else "python"
    if backend not in ("numba", "python"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not _HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    return backend


def _trajectory_rng(master_seed: int, trajectory_index: int) -> Generator:
    key = (np.uint64(master_seed), np.uint64(trajectory_index))
    return Generator(Philox(key=key))


def run_trajectory(field: FieldSpec, config: SimConfig, trajectory_index: int,
                   backend: str | None = None) -> ExitRecord:
    """Integrate one trajectory until absorption at |z| = 1 or t >= t_max.

    The Gaussian stream is Philox keyed by (master_seed, trajectory_index);
    the result does not depend on how the stream is chunked.
    """
    config.validate_against(field)
    advance = _advance_numba if _resolve_backend(backend) == "numba" \
        else _advance_python
    alpha, omega = field.alpha, field.omega
    fx, fy = -alpha, 0.0
    a = field.noise_amplitude_matrix
    amp = math.sqrt(2.0 * config.eps * config.dt)
    dt = config.dt
    x0, y0 = config.x0
    if x0 * x0 + y0 * y0 >= 1.0:
        return ExitRecord(trajectory_index, 0.0,
                          math.atan2(y0, x0) % TWO_PI, 0, False)

    rng = _trajectory_rng(config.master_seed, trajectory_index)
    max_steps = int(math.ceil(config.t_max / dt))
    x, y, cuts, t = x0, y0, 0, 0.0
    buf = np.empty((NOISE_CHUNK, 2))
    done = 0
    exited = False
    while done < max_steps:
        m = min(NOISE_CHUNK, max_steps - done)
        rng.standard_normal(out=buf[:m])
        x, y, cuts, t, used, status = advance(
            x, y, cuts, t, alpha, omega, amp, dt, buf[:m],
            a[0, 0], a[0, 1], a[1, 0], a[1, 1], fx, fy)
        done += used
        if status == 1:
            exited = True
            break

    total_angle = (math.atan2(y - fy, x - fx) - math.atan2(y0 - fy, x0 - fx)) \
        + TWO_PI * cuts
    winding = int(math.floor(abs(total_angle) / TWO_PI))
    if exited:
        return ExitRecord(trajectory_index, t,
                          math.atan2(y, x) % TWO_PI, winding, False)
    return ExitRecord(trajectory_index, config.t_max, math.nan, winding, True)


def trajectory_path(field: FieldSpec, config: SimConfig, trajectory_index: int,
                    stride: int = 1) -> np.ndarray:
    """Sampled path of one trajectory (diagnostics and plotting).

    Returns the positions every `stride` steps, ending with the interpolated
    crossing point (or the last interior point if censored).  Follows the
    same noise stream as run_trajectory, so the path belongs to the record
    with the same (master_seed, trajectory_index).
    """
    config.validate_against(field)
    alpha = field.alpha
    a = field.noise_amplitude_matrix
    amp = math.sqrt(2.0 * config.eps * config.dt)
    dt = config.dt
    x, y = config.x0
    if x * x + y * y >= 1.0:
        return np.array([[x, y]])
    rng = _trajectory_rng(config.master_seed, trajectory_index)
    max_steps = int(math.ceil(config.t_max / dt))
    pts = [(x, y)]
    buf = np.empty((NOISE_CHUNK, 2))
    done = 0
    k = 0
    while done < max_steps:
        m = min(NOISE_CHUNK, max_steps - done)
        rng.standard_normal(out=buf[:m])
        for i in range(m):
            bx, by = _drift_scalar(alpha, field.omega, x, y)
            g0, g1 = buf[i, 0], buf[i, 1]
            nx = a[0, 0] * g0 + a[0, 1] * g1
            ny = a[1, 0] * g0 + a[1, 1] * g1
            xn = x + bx * dt + amp * nx
            yn = y + by * dt + amp * ny
            if xn * xn + yn * yn >= 1.0:
                dx, dy = xn - x, yn - y
                aa = dx * dx + dy * dy
                bb = 2.0 * (x * dx + y * dy)
                cc = x * x + y * y - 1.0
                disc = max(bb * bb - 4.0 * aa * cc, 0.0)
                s = (-bb + math.sqrt(disc)) / (2.0 * aa)
                pts.append((x + s * dx, y + s * dy))
                return np.array(pts)
            x, y = xn, yn
            k += 1
            if k % stride == 0:
                pts.append((x, y))
        done += m
    pts.append((x, y))
    return np.array(pts)


# ---------------------------------------------------------------------------
# parallel driver
# ---------------------------------------------------------------------------

def _worker_count(n_workers: int | None, n_tasks: int) -> int:
    if n_workers is None:
        env = os.environ.get("LCE_THREADS")
        if env:
            n_workers = int(env)
        else:
            n_workers = os.cpu_count() or 1
    n_workers = max(1, int(n_workers))
    return min(n_workers, max(1, n_tasks))


def _run_slice(field: FieldSpec, config: SimConfig, lo: int, hi: int,
               backend: str | None):
    times = np.empty(hi - lo)
    angles = np.empty(hi - lo)
    windings = np.empty(hi - lo, dtype=np.int64)
    censored = np.empty(hi - lo, dtype=bool)
    for i in range(lo, hi):
        rec = run_trajectory(field, config, i, backend=backend)
        times[i - lo] = rec.exit_time
        angles[i - lo] = rec.exit_angle
        windings[i - lo] = rec.winding_number
        censored[i - lo] = rec.censored
    return lo, times, angles, windings, censored


def run_ensemble(field: FieldSpec, config: SimConfig,
                 n_workers: int | None = None,
                 backend: str | None = None) -> EnsembleResult:
    """Run all trajectories; output is independent of the worker count.

    Workers default to LCE_THREADS or the CPU count.  Trajectories are
    independent and carry their own random streams, so the partition into
    workers cannot affect the records.  Worker processes are forked when the
    platform supports it (the noise generator holds the GIL, so threads
    do not scale); results are identical either way.
    """
    config.validate_against(field)
    n = config.n_trajectories
    workers = _worker_count(n_workers, n)
    if workers == 1 or n == 0:
        _, times, angles, windings, censored = _run_slice(field, config, 0, n, backend)
    else:
        edges = np.linspace(0, n, workers + 1).astype(int)
        parts = [None] * workers
        try:
            import multiprocessing as mp
            ctx = mp.get_context("fork")
            pool_cls = lambda: ProcessPoolExecutor(max_workers=workers, mp_context=ctx)
        except ValueError:  # pragma: no cover - platforms without fork
            pool_cls = lambda: ThreadPoolExecutor(max_workers=workers)
        with pool_cls() as ex:
            futs = [ex.submit(_run_slice, field, config, int(edges[k]),
                              int(edges[k + 1]), backend)
                    for k in range(workers)]
            for k, fut in enumerate(futs):
                parts[k] = fut.result()[1:]
        times = np.concatenate([p[0] for p in parts])
        angles = np.concatenate([p[1] for p in parts])
        windings = np.concatenate([p[2] for p in parts])
        censored = np.concatenate([p[3] for p in parts])

    records = tuple(
        ExitRecord(i, float(times[i]), float(angles[i]),
                   int(windings[i]), bool(censored[i]))
        for i in range(n))
    return EnsembleResult(config=config, field=field, records=records)


def default_t_max(field: FieldSpec, eps: float) -> float:
    """200x the spectral MFPT estimate, or 1e4 when the estimate fails."""
    from . import spectral
    try:
        spec = spectral.compute_spectrum(field, eps, n_max=1, m_max=0,
                                         grid_size=1024)
        return 200.0 * spec.mfpt
    except Exception:
        return 1e4


# ---------------------------------------------------------------------------
# ensemble file I/O
# ---------------------------------------------------------------------------

_HEADER = "trajectory_index,exit_time,exit_angle,winding,censored"


def write_ensemble(result: EnsembleResult, path, extra_comments: Sequence[str] = ()):
    """Write a delimited ensemble file with the configuration echoed as
    '#'-prefixed comment lines (12 significant digits, LF endings)."""
    cfg, fld = result.config, result.field
    lines = [f"# {c}" for c in extra_comments]
    lines += [
        f"# alpha = {fld.alpha!r}",
        f"# omega = {fld.omega!r}",
        "# noise = " + ("identity" if fld.is_identity_noise else
                        " ".join(repr(v) for v in
                                 fld.noise_amplitude_matrix.ravel())),
        f"# eps = {cfg.eps!r}",
        f"# dt = {cfg.dt!r}",
        f"# x0 = {cfg.x0[0]!r} {cfg.x0[1]!r}",
        f"# n_trajectories = {cfg.n_trajectories}",
        f"# master_seed = {cfg.master_seed}",
        f"# t_max = {cfg.t_max!r}",
        _HEADER,
    ]
    for r in result.records:
        angle = "nan" if math.isnan(r.exit_angle) else f"{r.exit_angle:.12g}"
        lines.append(f"{r.trajectory_index},{r.exit_time:.12g},{angle},"
                     f"{r.winding_number},{int(r.censored)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_ensemble(path) -> EnsembleResult:
    """Read an ensemble file written by write_ensemble."""
    meta = {}
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, val = (s.strip() for s in body.split("=", 1))
                    meta[key] = val
                continue
            if line == _HEADER:
                continue
            idx_s, t_s, a_s, w_s, c_s = line.split(",")
            records.append(ExitRecord(
                trajectory_index=int(idx_s),
                exit_time=float(t_s),
                exit_angle=float(a_s),
                winding_number=int(w_s),
                censored=bool(int(c_s)),
            ))
    try:
        noise = meta.get("noise", "identity")
        if noise == "identity":
            mat = np.eye(2)
        else:
            mat = np.array([float(v) for v in noise.split()]).reshape(2, 2)
        field = FieldSpec(alpha=float(meta["alpha"]), omega=float(meta["omega"]),
                          noise_amplitude_matrix=mat)
        x0s = meta["x0"].split()
        config = SimConfig(
            eps=float(meta["eps"]), dt=float(meta["dt"]),
            x0=(float(x0s[0]), float(x0s[1])),
            n_trajectories=int(meta["n_trajectories"]),
            master_seed=int(meta["master_seed"]),
            t_max=float(meta["t_max"]))
    except KeyError as exc:
        raise ValueError(f"ensemble file missing config comment: {exc}") from exc
    return EnsembleResult(config=config, field=field, records=tuple(records))
