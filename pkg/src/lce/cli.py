"""Command-line entry points.

Subcommands: simulate, spectrum, exit-density, analyze, verify.  Exit codes:
0 success, 1 verification failure, 2 configuration error, 3 numerical
failure.  Every output file starts with '#'-prefixed manifest comment lines;
stripping comments leaves machine-parseable data.  LCE_THREADS caps the
worker count without changing any result.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__, analysis, engine, spectral
from .fields import FieldSpec, sample_boundary

__all__ = ["main", "RunManifest", "run_verify"]

TWO_PI = 2.0 * math.pi


@dataclass
class RunManifest:
    """Provenance block written at the top of every output file."""

    command: str
    params: dict
    master_seed: int | None = None
    outputs: tuple = ()
    wall_seconds: float = 0.0
    version: str = field(default_factory=lambda: __version__)

    def comment_lines(self) -> list[str]:
        lines = [f"lce {self.version}", f"command = {self.command}"]
        for key in sorted(self.params):
            lines.append(f"param {key} = {self.params[key]}")
        if self.master_seed is not None:
            lines.append(f"master_seed = {self.master_seed}")
        for out in self.outputs:
            lines.append(f"output = {out}")
        lines.append(f"wall_seconds = {self.wall_seconds:.3f}")
        return lines


def _field_from_args(args) -> FieldSpec:
    return FieldSpec(alpha=args.alpha, omega=args.omega)


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    t0 = time.time()
    field_spec = _field_from_args(args)
    t_max = args.tmax if args.tmax is not None else \
        engine.default_t_max(field_spec, args.eps)
    config = engine.SimConfig(
        eps=args.eps, dt=args.dt, x0=(args.x0, args.y0),
        n_trajectories=args.n, master_seed=args.seed, t_max=t_max)
    result = engine.run_ensemble(field_spec, config, n_workers=args.workers)
    manifest = RunManifest(
        command="simulate",
        params={"alpha": args.alpha, "omega": args.omega, "eps": args.eps,
                "n": args.n, "dt": args.dt, "x0": args.x0, "y0": args.y0,
                "tmax": t_max},
        master_seed=args.seed, outputs=(args.out,),
        wall_seconds=time.time() - t0)
    engine.write_ensemble(result, args.out,
                          extra_comments=manifest.comment_lines())
    print(f"wrote {args.out}: {args.n} trajectories, "
          f"censored fraction {result.censored_fraction:.4f}")
    return 0


# ---------------------------------------------------------------------------
# spectrum
# ---------------------------------------------------------------------------

def cmd_spectrum(args) -> int:
    t0 = time.time()
    field_spec = _field_from_args(args)
    spectrum = spectral.compute_spectrum(
        field_spec, args.eps, n_max=args.nmax, m_max=args.mmax,
        grid_size=args.grid)
    alpha, omega = args.alpha, args.omega
    closed_integral = spectral.hopf_k0xi_integral_closed_form(alpha, omega)
    deviation = abs(spectrum.k0xi_integral - closed_integral) / closed_integral
    tau_paper = spectral.mfpt_hopf_closed_form(alpha, omega, args.eps, "paper")
    tau_den = spectral.mfpt_hopf_closed_form(alpha, omega, args.eps, "den")
    manifest = RunManifest(
        command="spectrum",
        params={"alpha": alpha, "omega": omega, "eps": args.eps,
                "nmax": args.nmax, "mmax": args.mmax, "grid": args.grid},
        outputs=(args.out,), wall_seconds=time.time() - t0)
    header = manifest.comment_lines() + [
        "closed-form cross-checks (the published reductions disagree with",
        "the general quadrature; reported, not reconciled):",
        f"k0xi_integral_closed_form = {closed_integral:.12g}",
        f"k0xi_integral_relative_deviation = {deviation:.12g}",
        f"mfpt_closed_form_paper_variant = {tau_paper:.12g}",
        f"mfpt_closed_form_den_variant = {tau_den:.12g}",
    ]
    text = spectrum.to_text(header_lines=header)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    print(f"wrote {args.out}: lambda0 = {spectrum.lambda0:.6g}, "
          f"mfpt = {spectrum.mfpt:.6g}, omega_tilde = {spectrum.omega_tilde:.6g}, "
          f"kappa = {spectrum.kappa:.6g}")
    return 0


# ---------------------------------------------------------------------------
# exit-density
# ---------------------------------------------------------------------------

def cmd_exit_density(args) -> int:
    t0 = time.time()
    field_spec = _field_from_args(args)
    theta = np.arange(args.grid) * (TWO_PI / args.grid)
    if args.closed_form:
        dens = spectral.exit_density_closed_form(args.alpha, theta)
    else:
        bd = sample_boundary(field_spec, args.grid)
        xi = spectral.solve_bernoulli_periodic(bd)
        dens = spectral.exit_density(bd, xi)
    manifest = RunManifest(
        command="exit-density",
        params={"alpha": args.alpha, "omega": args.omega, "grid": args.grid,
                "closed_form": args.closed_form},
        outputs=(args.out,), wall_seconds=time.time() - t0)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dens.to_text(header_lines=manifest.comment_lines()))
    mode = float(dens.theta[np.argmax(dens.density)])
    print(f"wrote {args.out}: mode at theta = {mode:.6g}")
    return 0


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

def cmd_analyze(args) -> int:
    t0 = time.time()
    result = engine.read_ensemble(args.infile)
    omega_seed = args.omega if args.omega is not None else result.field.omega
    analytic = None
    try:
        bd = sample_boundary(result.field, 4096)
        xi = spectral.solve_bernoulli_periodic(bd)
        analytic = spectral.exit_density(bd, xi)
    except spectral.SolverError:
        pass
    report = analysis.analyze_records(
        result.records, n_bins=args.bins, omega_seed=omega_seed,
        analytic=analytic)
    manifest = RunManifest(
        command="analyze",
        params={"in": args.infile, "bins": args.bins, "omega": omega_seed},
        outputs=(args.out,), wall_seconds=time.time() - t0)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report.to_text(header_lines=manifest.comment_lines()))
    hist_path = args.out + ".histogram.txt"
    with open(hist_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# t density\n")
        for t, d in zip(report.histogram.bin_centers,
                        report.histogram.normalized_density):
            fh.write(f"{t:.12g} {d:.12g}\n")
    surv_path = args.out + ".survival.txt"
    with open(surv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# t fraction_surviving\n")
        for t, s in report.survival:
            fh.write(f"{t:.12g} {s:.12g}\n")
    if args.svg:
        _write_svg_plots(args.svg, result, report, analytic)
    period = "absent" if report.peak_period is None \
        else f"{report.peak_period:.6g}"
    print(f"wrote {args.out}: mfpt_empirical = {report.mfpt_empirical:.6g}, "
          f"peak_period = {period}, fitted omega = {report.fit.omega_hat:.6g}")
    return 0


def _write_svg_plots(prefix: str, result, report, analytic) -> None:
    from . import svgplot
    hist = report.histogram
    fit_curve = report.fit.model(hist.bin_centers)
    svgplot.line_plot(
        prefix + "_histogram.svg",
        [(hist.bin_centers, hist.normalized_density, "exit-time density"),
         (hist.bin_centers, fit_curve, "two-exponential fit")],
        title="Exit-time density", xlabel="t", ylabel="density", steps=True)
    svgplot.line_plot(
        prefix + "_survival.svg",
        [(report.survival[:, 0], report.survival[:, 1], "survival")],
        title="Survival probability", xlabel="t", ylabel="fraction surviving")
    uncensored = [r for r in result.records if not r.censored]
    if analytic is not None and len(uncensored) >= 1000:
        centers, dens = analysis.binned_exit_angle_density(uncensored, 64)
        svgplot.line_plot(
            prefix + "_exit_density.svg",
            [(centers, dens, "empirical"),
             (analytic.theta, analytic.density, "analytic")],
            title="Exit-point density", xlabel="theta", ylabel="density",
            steps=True)


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _check_constant_coefficient():
    spec = FieldSpec(alpha=0.0, omega=15.0)
    bd = sample_boundary(spec, 1024)
    xi = spectral.solve_bernoulli_periodic(bd)
    omega_t = spectral.omega_tilde(bd)
    eigs = spectral.eigenvalues(bd, xi, 1, 1)
    kappa = eigs[0][2].real
    ok = (abs(omega_t - 15.0) < 1e-8
          and np.max(np.abs(xi.xi - math.sqrt(2.0))) < 1e-8
          and abs(kappa - 4.0) < 1e-6)
    return ok, f"omega_tilde={omega_t:.12g} kappa={kappa:.12g}"


def _check_omega_tilde_sweep():
    worst = 0.0
    for alpha in (-0.9, -0.5, 0.5, 0.9):
        for omega in (10.0, 15.0):
            bd = sample_boundary(FieldSpec(alpha=alpha, omega=omega), 4096)
            worst = max(worst, abs(spectral.omega_tilde(bd) - omega))
    return worst < 1e-8, f"max |omega_tilde - omega| = {worst:.3e}"


def _check_riccati():
    H = spectral.riccati_H(np.array([[-1.0, -15.0], [15.0, -1.0]]), np.eye(2))
    resid = np.linalg.norm(2 * H @ H + H @ np.array([[-1.0, -15.0], [15.0, -1.0]])
                           + np.array([[-1.0, 15.0], [-15.0, -1.0]]) @ H, "fro")
    ok = np.allclose(H, np.eye(2), atol=1e-10) and resid < 1e-12
    return ok, f"|H - I| = {np.max(np.abs(H - np.eye(2))):.3e}"


def _check_large_omega_convergence():
    dists = []
    for omega in (5.0, 10.0, 20.0, 40.0):
        bd = sample_boundary(FieldSpec(alpha=0.5, omega=omega), 4096)
        xi = spectral.solve_bernoulli_periodic(bd)
        general = spectral.exit_density(bd, xi)
        closed = spectral.exit_density_closed_form(0.5, bd.theta)
        dists.append(spectral.exit_density_l1_distance(general, closed))
    ok = all(dists[i + 1] < dists[i] for i in range(len(dists) - 1))
    return ok, "L1 over omega {5,10,20,40}: " + \
        " ".join(f"{d:.4f}" for d in dists)


def _check_determinism():
    spec = FieldSpec(alpha=0.5, omega=10.0)
    config = engine.SimConfig(eps=0.05, dt=1e-3, x0=(0.0, 0.0),
                              n_trajectories=64, master_seed=2024, t_max=50.0)
    results = [engine.run_ensemble(spec, config, n_workers=w)
               for w in (1, 2, 8)]
    ok = all(results[0].records == r.records for r in results[1:])
    return ok, "records identical for workers {1, 2, 8}"


def _check_reduced_fig1():
    spec = FieldSpec(alpha=0.9, omega=15.0)
    config = engine.SimConfig(eps=0.001, dt=1e-4, x0=(-0.5, 0.0),
                              n_trajectories=2000, master_seed=42, t_max=8800.0)
    result = engine.run_ensemble(spec, config)
    records = result.records
    target = TWO_PI / 15.0
    n_bins = int(math.ceil(max(r.exit_time for r in records
                               if not r.censored) / 0.05))
    hist = analysis.build_histogram(records, n_bins)
    period, n_peaks = analysis.detect_peak_period(hist, smooth_window=3)
    ok_period = (period is not None and n_peaks >= 3
                 and abs(period - target) / target < 0.2)
    winding = analysis.winding_statistics(records)
    corr = winding.log_count_correlation(1, 5)
    cond = winding.conditional_mean_exit_time
    ns = [n for n in sorted(cond) if n <= 3]
    increasing = all(cond[a] < cond[b] for a, b in zip(ns, ns[1:]))
    ok_wind = (not math.isnan(corr)) and corr <= -0.9 and increasing
    detail = (f"period={'absent' if period is None else f'{period:.4f}'} "
              f"(target {target:.4f}, n_peaks={n_peaks}), "
              f"winding corr={corr:.4f}")
    return (ok_period and ok_wind), detail, result


def _check_reduced_fig2():
    spec = FieldSpec(alpha=-0.9, omega=10.0)
    config = engine.SimConfig(eps=0.005, dt=1e-4, x0=(0.9, 0.0),
                              n_trajectories=2000, master_seed=4242, t_max=500.0)
    result = engine.run_ensemble(spec, config)
    closed = spectral.exit_density_closed_form(
        -0.9, np.arange(4096) * (TWO_PI / 4096))
    l1 = analysis.compare_exit_density(result.records, closed, 24)
    centers, dens = analysis.binned_exit_angle_density(result.records, 24)
    mode = int(np.argmax(dens))
    ok = l1 <= 0.2 and mode in (0, 1, 23)
    return ok, f"L1={l1:.4f} (<= 0.2), mode bin={mode}"


def run_verify(print_fn=print) -> int:
    """Run the reduced acceptance gate; returns 0 on pass, 1 on failure."""
    checks = []

    def run(name, fn):
        t0 = time.time()
        try:
            out = fn()
            ok, detail = out[0], out[1]
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        checks.append((name, ok, detail, time.time() - t0))

    run("1 constant-coefficient spectrum", _check_constant_coefficient)
    run("2 omega_tilde equals omega", _check_omega_tilde_sweep)
    run("8 Riccati H = I", _check_riccati)
    run("9 large-omega density convergence", _check_large_omega_convergence)
    run("10 worker-count determinism", _check_determinism)
    run("3/5-reduced exit-time oscillation + winding", _check_reduced_fig1)
    run("4-reduced exit-point density", _check_reduced_fig2)

    width = max(len(name) for name, *_ in checks)
    failures = 0
    for name, ok, detail, wall in checks:
        status = "PASS" if ok else "FAIL"
        failures += 0 if ok else 1
        print_fn(f"[{status}] {name:<{width}}  ({wall:6.1f} s)  {detail}")
    if failures:
        print_fn(f"verify: {failures} of {len(checks)} checks failed")
        return 1
    print_fn(f"verify: all {len(checks)} checks passed")
    return 0


def cmd_verify(args) -> int:
    return run_verify()


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lce",
        description="Noise-activated escape across an unstable limit cycle: "
                    "Monte Carlo ensembles and spectral asymptotics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run an escape ensemble")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dt", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--x0", type=float, default=-0.5)
    p.add_argument("--y0", type=float, default=0.0)
    p.add_argument("--tmax", type=float, default=None,
                   help="default: 200x the spectral MFPT estimate")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("spectrum", help="evaluate the analytic spectrum")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--nmax", type=int, default=3)
    p.add_argument("--mmax", type=int, default=3)
    p.add_argument("--grid", type=int, default=4096)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("exit-density", help="exit-point density on the circle")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--grid", type=int, default=4096)
    p.add_argument("--closed-form", action="store_true",
                   help="use the large-omega closed form instead of the "
                        "general quadrature")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_exit_density)

    p = sub.add_parser("analyze", help="analyze an ensemble file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--bins", type=int, default=200)
    p.add_argument("--omega", type=float, default=None,
                   help="oscillation seed; default: the ensemble's omega")
    p.add_argument("--svg", default=None,
                   help="prefix for optional SVG plots")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("verify", help="run the reduced acceptance gate")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except spectral.SolverError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
