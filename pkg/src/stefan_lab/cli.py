"""Command-line front end: ``stefan-lab <command> ...``.

Exit codes: 0 success, 2 invalid input or configuration (including unknown
flags), 3 numerical failure.
"""

import argparse
import csv
import glob
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .errors import InputError, NumericError, StefanLabError
from .manifest import MANIFEST_NAME, RunManifest, thread_limit

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _fmt(x):
    return format(float(x), ".17g")


def _write_rows(path, header, rows):
    fh = sys.stdout if path in (None, "-") else open(path, "w", newline="")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    finally:
        if fh is not sys.stdout:
            fh.close()


def _sidecar(out, manifest):
    """Record ``out`` in ``manifest`` and write it next to the file."""
    if out in (None, "-"):
        return
    root = os.path.dirname(os.path.abspath(out))
    manifest.add_output(out, root)
    manifest.write(os.path.abspath(out) + "." + MANIFEST_NAME)


# ---------------------------------------------------------------- simulate

def _simulate_one(config_path, out, snapshots):
    from .solver.config import config_to_dict, load_config, save_config
    from .solver.simulate import simulate
    from .fields import write_binary

    t0 = time.perf_counter()
    cfg = load_config(config_path)
    os.makedirs(out, exist_ok=True)
    man = RunManifest("simulate", config_to_dict(cfg), seed=cfg.seed)
    man.timings["load"] = time.perf_counter() - t0
    res = simulate(cfg, keep_snapshots=snapshots)
    man.timings.update(res.stats.pop("timings"))
    t0 = time.perf_counter()
    paths = [os.path.join(out, "history.csv"), os.path.join(out, "config.cfg")]
    res.history.to_csv(paths[0])
    save_config(cfg, paths[1])
    if snapshots:
        sdir = os.path.join(out, "snapshots")
        os.makedirs(sdir, exist_ok=True)
        for k, f in enumerate(res.snapshots):
            p = os.path.join(sdir, f"snap_{k:05d}.bin")
            write_binary(f, p)
            paths.append(p)
    for p in paths:
        man.add_output(p, out)
    man.timings["write"] = time.perf_counter() - t0
    man.results = {"t_star": res.t_star, **res.stats}
    man.flags = {"extinct": res.t_star is not None,
                 "complementarity_ok": res.stats["max_complementarity_residual"] <= 1e-10}
    man.write(out)
    return out, res.t_star


def cmd_simulate(args):
    if len(args.config) == 1:
        out, t_star = _simulate_one(args.config[0], args.out, not args.no_snapshots)
        print(f"{out}: T* = {t_star}")
        return EXIT_OK
    # independent runs, each in its own directory
    outs = [os.path.join(args.out, os.path.splitext(os.path.basename(c))[0]) for c in args.config]
    if len(set(outs)) != len(outs):
        raise InputError("config file names must be distinct")
    with ProcessPoolExecutor(max_workers=min(thread_limit(), len(outs))) as pool:
        futures = [pool.submit(_simulate_one, c, o, not args.no_snapshots)
                   for c, o in zip(args.config, outs)]
        for f in futures:
            out, t_star = f.result()
            print(f"{out}: T* = {t_star}")
    return EXIT_OK


# ---------------------------------------------------------------- spectra

EIGEN_HEADER = ("eta", "eps", "eps_ub", "eps_abslog_eta", "eps_eta_power")


def cmd_eigen(args):
    from .spectra import eigen_table

    t0 = time.perf_counter()
    rows = eigen_table(args.n, args.eta, R=args.R, N=args.N, m=0, with_bound=not args.no_bound)
    man = RunManifest("eigen", {"n": args.n, "eta": args.eta, "R": args.R, "N": args.N})
    man.timings["total"] = time.perf_counter() - t0
    _write_rows(args.out, EIGEN_HEADER, rows)
    _sidecar(args.out, man)
    return EXIT_OK


def cmd_competitor(args):
    from .spectra import eigen_table

    t0 = time.perf_counter()
    with_eigen = args.m == 0 and not args.no_eigen
    if with_eigen:
        rows = eigen_table(args.n, args.eta_list, m=0)
    else:
        rows = eigen_table(args.n, args.eta_list, m=args.m)
        rows[:, 1] = np.nan
    man = RunManifest("competitor", {"n": args.n, "m": args.m, "eta_list": args.eta_list})
    man.timings["total"] = time.perf_counter() - t0
    if with_eigen:
        man.flags["upper_bound_consistent"] = bool(np.all(rows[:, 2] >= rows[:, 1]))
    _write_rows(args.out, EIGEN_HEADER, rows)
    _sidecar(args.out, man)
    return EXIT_OK


# ---------------------------------------------------------------- frequency

def _find_manifest(path):
    d = path if os.path.isdir(path) else os.path.dirname(os.path.abspath(path))
    for cand in (os.path.join(d, MANIFEST_NAME), os.path.join(os.path.dirname(d), MANIFEST_NAME)):
        if os.path.exists(cand):
            return RunManifest.read(cand)
    return None


def cmd_freq(args):
    from .fields import read_binary
    from .frequency import FieldHistory, estimate_lambda_star
    from .types import BlowupPolynomial

    src = args.input
    if os.path.isdir(os.path.join(src, "snapshots")):
        src = os.path.join(src, "snapshots")
    files = sorted(glob.glob(os.path.join(src, "*.bin")))
    if not files:
        raise InputError(f"no snapshot files in {args.input}")
    snaps = [read_binary(f) for f in files]
    if args.tstar == "auto":
        man = _find_manifest(args.input)
        t_star = None if man is None else man.results.get("t_star")
        if t_star is None:
            raise InputError("no extinction time recorded; pass --tstar")
    else:
        t_star = float(args.tstar)
    p2 = None
    if args.p2:
        try:
            A = np.atleast_2d(np.loadtxt(args.p2, delimiter=None))
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot read {args.p2}: {exc}") from exc
        p2 = BlowupPolynomial(A)
    center = tuple(args.center) if args.center else (0.0,) * (1 if snaps[0].radial else snaps[0].values.ndim)
    t0 = time.perf_counter()
    hist = FieldHistory(snaps, t_star, center, p2)
    lam, curve = estimate_lambda_star(hist, args.radii, with_cutoff=not args.no_cutoff)
    man = RunManifest("freq", {"input": os.path.abspath(args.input), "radii": args.radii,
                               "t_star": t_star, "center": list(center), "cutoff": not args.no_cutoff,
                               "p2": None if p2 is None else p2.A.tolist()})
    man.timings["total"] = time.perf_counter() - t0
    man.results = {"lambda_star": lam}
    man.flags = {"monotone": curve.monotone}
    _write_rows(args.out, ("r", "H", "D", "phi"), zip(curve.r, curve.H, curve.D, curve.phi))
    _sidecar(args.out, man)
    print(f"lambda* = {lam:.10g} (monotone tail: {curve.monotone})", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------- rates

def _load_history(path, tstar):
    from .rates import estimate_tstar
    from .solver.simulate import ContactSetHistory

    if os.path.isdir(path):
        path = os.path.join(path, "history.csv")
    if not os.path.exists(path):
        raise InputError(f"history file {path} does not exist")
    hist = ContactSetHistory.from_csv(path)
    if tstar == "auto":
        man = _find_manifest(path)
        hist.t_star = None if man is None else man.results.get("t_star")
        hist.t_star = estimate_tstar(hist)
    else:
        try:
            hist.t_star = float(tstar)
        except ValueError as exc:
            raise InputError(f"--tstar must be 'auto' or a number, got {tstar!r}") from exc
    return hist


def _emit_json(path, payload):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path in (None, "-"):
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def cmd_rates_fit(args):
    from .rates import fit_rate

    hist = _load_history(args.history, args.tstar)
    fit = fit_rate(hist, args.model, window=tuple(args.window), exclude_last=args.exclude_last,
                   min_samples=args.min_samples, radius=args.radius)
    payload = {"t_star": hist.t_star, **fit.to_dict()}
    _emit_json(args.out, payload)
    man = RunManifest("rates fit", {"history": os.path.abspath(args.history), "model": args.model,
                                    "window": args.window, "tstar": args.tstar}, results=payload)
    _sidecar(args.out, man)
    return EXIT_OK


def cmd_rates_envelope(args):
    from .barriers import envelope

    lo, hi, count = args.t_grid
    if count < 2 or not 0 < lo < hi:
        raise InputError("--t-grid needs 0 < lo < hi and count >= 2")
    t = np.logspace(np.log10(lo), np.log10(hi), int(count))
    inner, outer = envelope(args.theorem, t, delta=args.delta, n=args.n)
    rows = zip(t, inner, outer)
    man = RunManifest("rates envelope", {"theorem": args.theorem, "delta": args.delta, "n": args.n,
                                         "t_grid": args.t_grid})
    if args.history:
        from .rates import check_envelope
        hist = _load_history(args.history, args.tstar)
        rep = check_envelope(hist, args.theorem, args.delta, n=args.n)
        man.results = rep.to_dict()
        man.flags = {"inclusion": rep.ok}
        print(json.dumps(rep.to_dict(), sort_keys=True), file=sys.stderr)
    _write_rows(args.out, ("t", "inner", "outer"), rows)
    _sidecar(args.out, man)
    return EXIT_OK


# ---------------------------------------------------------------- geometry

def cmd_geom_sandwich(args):
    from .geometry import sample_domain, sandwich_check_many
    from .types import ConeDomain

    D = ConeDomain(args.n, args.m, args.eta)
    rng = np.random.default_rng(args.seed)
    t0 = time.perf_counter()
    X, T = sample_domain(D, args.samples, rng)
    lower, dist, upper, ok = sandwich_check_many(X, T, D)
    header = ["point"] + [f"x{i + 1}" for i in range(args.n)] + ["t", "lower", "dist", "upper", "ok"]
    rows = ([k, *X[k], T[k], lower[k], dist[k], upper[k], int(ok[k])] for k in range(len(T)))
    man = RunManifest("geom check-sandwich", {"n": args.n, "m": args.m, "eta": args.eta,
                                              "samples": args.samples}, seed=args.seed)
    man.timings["total"] = time.perf_counter() - t0
    man.results = {"violations": int(np.sum(~ok))}
    man.flags = {"sandwich": bool(ok.all())}
    _write_rows(args.out, header, rows)
    _sidecar(args.out, man)
    print(f"{len(T)} points, {int(np.sum(~ok))} violations", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------- selfcheck / report

def cmd_selfcheck(args):
    from .selfcheck import run_all

    def show(item):
        name, ok, sec, err = item
        print(f"{'PASS' if ok else 'FAIL'}  {name:32s} {sec:7.3f}s" + (f"  {err}" if err else ""))

    results = run_all(show)
    failed = [r for r in results if not r[1]]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    if failed:
        raise NumericError(f"{len(failed)} self-checks failed")
    return EXIT_OK


REPORT_COLUMNS = ("run", "command", "seed", "t_star", "outputs", "intact", "flags")


def build_report(run_dir):
    """Aggregate every manifest under ``run_dir`` into one dictionary."""
    paths = sorted(glob.glob(os.path.join(run_dir, "**", f"*{MANIFEST_NAME}"), recursive=True))
    if not paths:
        raise InputError(f"no manifests under {run_dir}")
    runs = []
    for p in paths:
        man = RunManifest.read(p)
        root = os.path.dirname(p)
        runs.append({"run": os.path.relpath(p, run_dir), "manifest": man.to_dict(),
                     "damaged": man.verify(root)})
    return {"version": __version__, "run_dir": os.path.abspath(run_dir), "runs": runs}


def report_rows(report):
    for r in report["runs"]:
        m = r["manifest"]
        yield (r["run"], m["command"], "" if m["seed"] is None else m["seed"],
               (m.get("results") or {}).get("t_star", ""), len(m["outputs"]),
               int(not r["damaged"]), json.dumps(m["flags"], sort_keys=True))


def cmd_report(args):
    report = build_report(args.run_dir)
    base = args.out or os.path.join(args.run_dir, "report")
    with open(base + ".json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
    _write_rows(base + ".csv", REPORT_COLUMNS, report_rows(report))
    damaged = [r["run"] for r in report["runs"] if r["damaged"]]
    print(f"{len(report['runs'])} runs aggregated into {base}.json / {base}.csv"
          + (f"; damaged outputs in {damaged}" if damaged else ""))
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _add_eigen(p):
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eta", type=_floats, required=True, help="aperture(s), comma separated")
    p.add_argument("--R", type=float, default=16.0, help="radial truncation")
    p.add_argument("--N", type=int, default=8000, help="grid intervals")
    p.add_argument("--no-bound", action="store_true", help="skip the competitor bound")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_eigen)


def _add_competitor(p):
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--eta-list", type=_floats, required=True)
    p.add_argument("--no-eigen", action="store_true", help="skip the grid eigenvalue (m = 0)")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_competitor)


def build_parser():
    ap = argparse.ArgumentParser(prog="stefan-lab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the obstacle solver until extinction")
    p.add_argument("--config", nargs="+", required=True, help="config file(s); several run in parallel")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--no-snapshots", action="store_true")
    p.set_defaults(func=cmd_simulate)

    _add_eigen(sub.add_parser("eigen", help="principal eigenvalue on the cone slice"))
    _add_competitor(sub.add_parser("competitor", help="explicit competitor upper bounds"))
    p = sub.add_parser("spectra", help="eigen / competitor tables")
    ssub = p.add_subparsers(dest="spectra_command", required=True)
    _add_eigen(ssub.add_parser("eigen"))
    _add_competitor(ssub.add_parser("competitor"))

    p = sub.add_parser("freq", help="frequency curve of a snapshot history")
    p.add_argument("--input", required=True, help="run directory or directory of .bin snapshots")
    p.add_argument("--p2", help="text file with the matrix of the blow-up polynomial")
    p.add_argument("--radii", type=_floats, default=[0.25, 0.125, 0.0625])
    p.add_argument("--tstar", default="auto")
    p.add_argument("--center", type=_floats)
    p.add_argument("--no-cutoff", action="store_true")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_freq)

    p = sub.add_parser("rates", help="extinction-rate fits and envelopes")
    rsub = p.add_subparsers(dest="rates_command", required=True)
    q = rsub.add_parser("fit")
    q.add_argument("--history", required=True, help="history.csv or its run directory")
    q.add_argument("--model", required=True, choices=("sqrtlog_2d", "loglog_nd"))
    q.add_argument("--tstar", default="auto")
    q.add_argument("--window", type=_floats, default=[1e-8, 1e-2])
    q.add_argument("--exclude-last", type=int, default=5)
    q.add_argument("--min-samples", type=int, default=30)
    q.add_argument("--radius", choices=("inradius", "circumradius"), default="inradius")
    q.add_argument("--out", default="-")
    q.set_defaults(func=cmd_rates_fit)
    q = rsub.add_parser("envelope")
    q.add_argument("--theorem", required=True, choices=("planar", "higher_dim", "planar_conditional"))
    q.add_argument("--delta", type=float, default=0.1)
    q.add_argument("--n", type=int, default=3)
    q.add_argument("--t-grid", type=_floats, default=[1e-8, 1e-2, 61], help="lo,hi,count")
    q.add_argument("--history")
    q.add_argument("--tstar", default="auto")
    q.add_argument("--out", default="-")
    q.set_defaults(func=cmd_rates_envelope)

    p = sub.add_parser("geom", help="cone-domain geometry checks")
    gsub = p.add_subparsers(dest="geom_command", required=True)
    q = gsub.add_parser("check-sandwich")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--m", type=int, default=0)
    q.add_argument("--eta", type=float, required=True)
    q.add_argument("--samples", type=int, default=1000)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out", default="-")
    q.set_defaults(func=cmd_geom_sandwich)

    p = sub.add_parser("selfcheck", help="run the built-in exact examples")
    p.set_defaults(func=cmd_selfcheck)

    p = sub.add_parser("report", help="aggregate run manifests")
    p.add_argument("--run-dir", required=True)
    p.add_argument("--out", help="output path without extension (default <run-dir>/report)")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)  # argparse exits with 2 on bad usage
    if getattr(args, "t_grid", None) is not None and len(args.t_grid) != 3:
        parser.error("--t-grid expects lo,hi,count")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except StefanLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
