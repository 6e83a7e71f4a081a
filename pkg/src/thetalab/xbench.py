"""
Command-line experiment runner.

Every subcommand fans out over seeds, runs one independent trial per seed
and writes, into ``--out``:

* ``<experiment>_trials.csv``: one row per seed, sorted by seed, with the
  columns of :data:`TRIAL_COLUMNS`;
* ``<experiment>_summary.json``: mean and standard deviation of each
  normalized constant plus the matching free-convolution prediction;
* experiment-specific extras (histograms, optimizer histories, diagnostics).

Trials run in worker processes (``--threads`` of them, or the value of the
``XBENCH_THREADS`` environment variable). Each process pins its BLAS pool to
one thread, so a trial computes the same bits no matter how many workers run
next to it. Values that do not apply to a row are written as ``undefined``.

Exit codes: 0 success, 1 at least one trial failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import multiprocessing
import os
import sys
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, Iterable, List, Optional

import numpy as np
from threadpoolctl import threadpool_limits

from . import certificate as cert
from . import esd
from . import freeconv as fc
from .rmt_core import eigh, sample_gnp_half, spectral_split
from .theta_opt import MAX_N, OptConfig, minimize

TRIAL_COLUMNS = [
    "experiment", "n", "seed", "variant", "tau", "eta", "recursion_depth",
    "lambda1", "lambdan", "sigma1", "lambda1_norm", "sigma1_norm", "theta_upper",
    "ks_fit", "diag_mean", "avg_free_entry", "runtime_seconds",
]
#: Columns averaged in the summary.
SUMMARY_COLUMNS = ["lambda1_norm", "sigma1_norm", "theta_upper", "ks_fit", "diag_mean", "avg_free_entry"]
UNDEFINED = "undefined"
THREADS_ENV = "XBENCH_THREADS"

EXPERIMENTS = {
    "certify": "certify",
    "radius": "certify",
    "esd": "esd",
    "freeconv-predict": "freeconv_predict",
    "theta-min": "theta_min",
    "iid-baseline": "iid_baseline",
    "diagnostics": "diagnostics",
    "crosscorr": "crosscorr",
    "lower-bound": "lower_bound",
}

#: Reference values quoted alongside measurements in summaries and reports.
REFERENCE = {
    ("certify", "theta"): 1.544,
    ("certify", "radius"): 1.75,
}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

DEFAULTS = {
    "n": 2000,
    "seeds": "5",
    "seed_base": 0,
    "out": "xbench_out",
    "threads": 0,
    "variant": "theta",
    "tau": 1.0,
    "eta": None,
    "recursion_depth": 0,
    "cut": None,
    "law": "adjacency",
    "bins": 60,
    "target": "both",
    "phi": -1.0,
    "psi": 1.0,
    "dist": "gaussian",
    "max_iters": 2000,
    "objective": "lambda1",
    "step_size": None,
    "cluster_tol": 1e-8,
    "initial": "adjacency",
    "C": 10.0,
}

_TYPES = {
    "n": int, "seed_base": int, "threads": int, "tau": float, "eta": float,
    "recursion_depth": int, "cut": int, "bins": int, "phi": float, "psi": float,
    "max_iters": int, "step_size": float, "cluster_tol": float, "C": float,
}


def read_config(path: str) -> Dict[str, object]:
    """Parse a ``key = value`` file. Blank lines and ``#`` comments are ignored."""
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS and key != "experiment":
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def _coerce(key, value):
    if value is None or key not in _TYPES:
        return value
    try:
        return _TYPES[key](value)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{key} expects {_TYPES[key].__name__}, got {value!r}") from exc


def resolve_settings(args: argparse.Namespace) -> Dict[str, object]:
    """Merge built-in defaults, the config file and command-line flags (flags win)."""
    settings = dict(DEFAULTS)
    if getattr(args, "config", None):
        settings.update(read_config(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    settings = {k: _coerce(k, v) for k, v in settings.items()}
    if settings["n"] < 1:
        raise UsageError("--n must be at least 1")
    settings["seed_list"] = parse_seeds(str(settings["seeds"]), settings["seed_base"])
    return settings


def parse_seeds(spec: str, base: int) -> List[int]:
    """``"10"`` means ten seeds starting at ``base``; ``"3,7,11"`` lists seeds explicitly."""
    spec = spec.strip()
    try:
        if "," in spec:
            seeds = sorted({int(s) for s in spec.split(",") if s.strip()})
        else:
            count = int(spec)
            if count < 1:
                raise UsageError("--seeds needs a count of at least 1")
            seeds = list(range(base, base + count))
    except ValueError as exc:
        raise UsageError(f"cannot parse --seeds {spec!r}") from exc
    if not seeds or min(seeds) < 0:
        raise UsageError("seeds must be non-negative integers")
    return seeds


def resolve_threads(requested: int) -> int:
    if requested and requested > 0:
        return int(requested)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError as exc:
            raise UsageError(f"{THREADS_ENV} must be an integer, got {env!r}") from exc
        if value > 0:
            return value
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# Trials
# ---------------------------------------------------------------------------

_PREDICTION_CACHE: Dict[str, object] = {}


def _prediction_law(variant: str):
    """Limiting law of the normalized certificate spectrum (tau = 1, no recursion)."""
    if variant not in _PREDICTION_CACHE:
        if variant == "theta":
            dens = fc.free_conv_law(*fc.theta_prediction_inputs())
            _PREDICTION_CACHE[variant] = esd.Shifted(dens.law(), fc.THETA_SHIFT)
        else:
            _PREDICTION_CACHE[variant] = fc.free_conv_law(*fc.radius_prediction_inputs()).law()
    return _PREDICTION_CACHE[variant]


def _row(experiment, n, seed, **values):
    row = {c: UNDEFINED for c in TRIAL_COLUMNS}
    row.update(experiment=experiment, n=n, seed=seed)
    for key, value in values.items():
        if key not in row:
            raise KeyError(key)
        if value is None or (isinstance(value, float) and not math.isfinite(value)):
            value = UNDEFINED
        row[key] = value
    return row


def _trial_certify(s, seed):
    n = s["n"]
    spec = cert.CertificateSpec(variant=s["variant"], tau=s["tau"], eta=s["eta"],
                                recursion_depth=s["recursion_depth"], cut=s["cut"])
    start = time.perf_counter()
    g = sample_gnp_half(n, seed)
    res = cert.certify(g, spec)
    ks = None
    if spec.tau == 1.0 and spec.recursion_depth == 0 and spec.cut is None and spec.eta is None:
        ks = esd.ks_distance(np.linalg.eigvalsh(res.M) / np.sqrt(n), _prediction_law(spec.variant))
    eta = (spec.eta if spec.eta is not None else 3 * np.pi / 8 * np.sqrt(n)) if spec.variant == "radius" else None
    free = g.free_mask
    row = _row("certify", n, seed, variant=spec.variant, tau=spec.tau, eta=eta,
               recursion_depth=spec.recursion_depth, lambda1=res.lambda1, lambdan=res.lambdan,
               sigma1=res.sigma1, lambda1_norm=res.lambda1_norm, sigma1_norm=res.sigma1_norm,
               theta_upper=res.theta_upper, ks_fit=ks,
               diag_mean=res.diagnostics.diag_Z_mean / np.sqrt(n),
               avg_free_entry=float(res.M[free].mean()) if free.any() else None,
               runtime_seconds=time.perf_counter() - start)
    extra = {"checkpoint_norm": res.checkpoint_norm}
    return row, extra


def _esd_matrix(law_name, g, d, seed):
    n = g.n
    if law_name == "adjacency":
        return g.adjacency, esd.Semicircle(1.0)
    if law_name == "pair":
        xp, xm = spectral_split(d)
        return 1.5 * xm + 0.5 * xp, esd.QuartercirclePair(1.5, 0.5)
    if law_name == "w_theta":
        return cert.resample_w(d, cert.build_z_theta(d), seed), esd.Semicircle(fc.ALPHA_THETA)
    if law_name == "w_radius":
        return cert.resample_w(d, cert.build_z_radius(d), seed), esd.Semicircle(fc.TAU_RADIUS)
    if law_name == "sum":
        xp, xm = spectral_split(d)
        w = cert.resample_w(d, cert.build_z_theta(d), seed)
        law = esd.Shifted(_prediction_law("theta"), -fc.THETA_SHIFT)
        return 1.5 * xm + 0.5 * xp + 0.5 * w, law
    raise UsageError(f"unknown --law {law_name!r}")


ESD_LAWS = ("adjacency", "pair", "w_theta", "w_radius", "sum")


def _trial_esd(s, seed):
    n = s["n"]
    start = time.perf_counter()
    g = sample_gnp_half(n, seed)
    d = eigh(g.adjacency)
    mat, law = _esd_matrix(s["law"], g, d, seed)
    vals = np.linalg.eigvalsh(mat) / np.sqrt(n)
    ks = esd.ks_distance(vals, law)
    row = _row("esd", n, seed, variant=s["law"], lambda1=float(vals[-1] * np.sqrt(n)),
               lambdan=float(vals[0] * np.sqrt(n)), sigma1=float(max(vals[-1], -vals[0]) * np.sqrt(n)),
               lambda1_norm=float(vals[-1]), sigma1_norm=float(max(vals[-1], -vals[0])), ks_fit=ks,
               runtime_seconds=time.perf_counter() - start)
    return row, {"eigenvalues": vals.tolist()}


def _trial_theta_min(s, seed):
    n = s["n"]
    start = time.perf_counter()
    g = sample_gnp_half(n, seed)
    cfg = OptConfig(max_iters=s["max_iters"], objective=s["objective"], step_size=s["step_size"],
                    cluster_tol=s["cluster_tol"], initial=s["initial"])
    res = minimize(g, cfg)
    w = np.linalg.eigvalsh(res.M)
    lam1, lamn = float(w[-1]), float(w[0])
    sig = max(lam1, -lamn)
    free = g.free_mask
    row = _row("theta_min", n, seed, variant=s["objective"], lambda1=lam1, lambdan=lamn, sigma1=sig,
               lambda1_norm=lam1 / np.sqrt(n), sigma1_norm=sig / np.sqrt(n), theta_upper=lam1 + 1.0,
               avg_free_entry=float(res.M[free].mean()) if free.any() else None,
               runtime_seconds=time.perf_counter() - start)
    return row, {"history": res.history, "value": res.value}


def _trial_iid(s, seed):
    n = s["n"]
    start = time.perf_counter()
    lam1 = cert.iid_baseline(n, s["phi"], s["psi"], s["dist"], seed)
    row = _row("iid_baseline", n, seed, variant=f"{s['dist']}(phi={s['phi']},psi={s['psi']})",
               lambda1=lam1, lambda1_norm=lam1 / np.sqrt(n), theta_upper=lam1 + 1.0,
               avg_free_entry=s["phi"], runtime_seconds=time.perf_counter() - start)
    return row, {}


def _trial_diagnostics(s, seed):
    n = s["n"]
    start = time.perf_counter()
    g = sample_gnp_half(n, seed)
    d = eigh(g.adjacency)
    z = cert.build_z_theta(d) if s["variant"] == "theta" else cert.build_z_radius(d, s["eta"])
    diag = cert.run_diagnostics(g, d, z)
    row = _row("diagnostics", n, seed, variant=s["variant"], lambda1=float(d.eigenvalues[0]),
               lambdan=float(d.eigenvalues[-1]), lambda1_norm=float(d.eigenvalues[0] / np.sqrt(n)),
               diag_mean=diag.diag_Z_mean / np.sqrt(n), avg_free_entry=diag.avg_free_Xplus,
               runtime_seconds=time.perf_counter() - start)
    extra = {k: getattr(diag, k) for k in diag.__dataclass_fields__ if k != "undefined"}
    extra["undefined"] = list(diag.undefined)
    return row, extra


def _trial_crosscorr(s, seed):
    n = s["n"]
    start = time.perf_counter()
    g = sample_gnp_half(n, seed)
    d = eigh(g.adjacency)
    z = cert.build_z_theta(d)
    value = cert.eigvec_cross_corr(d, eigh(z.dense * g.adjacency))
    scale = math.sqrt(2 * math.log(n) / n) if n > 1 else float("nan")
    row = _row("crosscorr", n, seed, variant="theta", lambda1=float(d.eigenvalues[0]),
               lambdan=float(d.eigenvalues[-1]), runtime_seconds=time.perf_counter() - start)
    return row, {"cross_corr": value, "ratio_to_sqrt_2logn_over_n": value / scale}


def _trial_lower_bound(s, seed):
    n = s["n"]
    start = time.perf_counter()
    g = sample_gnp_half(n, seed)
    d = eigh(g.adjacency)
    res = cert.certify(g, cert.CertificateSpec(variant="radius", eta=s["eta"]), decomposition=d, diagnostics=False)
    rep = cert.lower_bound_check(g, res.M, C=s["C"], decomposition=d)
    row = _row("lower_bound", n, seed, variant="radius", lambda1=res.lambda1, lambdan=res.lambdan,
               sigma1=res.sigma1, lambda1_norm=res.lambda1_norm, sigma1_norm=res.sigma1_norm,
               runtime_seconds=time.perf_counter() - start)
    extra = {"lhs": rep.lhs, "rhs": rep.rhs, "bound_ok": rep.bound_ok, "hw_slack": rep.hw_slack,
             "hw_ok": rep.hw_ok, "typical_ok": rep.typical_ok, **rep.details}
    return row, extra


TRIALS = {
    "certify": _trial_certify,
    "esd": _trial_esd,
    "theta_min": _trial_theta_min,
    "iid_baseline": _trial_iid,
    "diagnostics": _trial_diagnostics,
    "crosscorr": _trial_crosscorr,
    "lower_bound": _trial_lower_bound,
}


def _run_trial(job):
    experiment, settings, seed = job
    with threadpool_limits(limits=1):
        try:
            row, extra = TRIALS[experiment](settings, seed)
            return seed, row, extra, None
        except Exception as exc:  # a failed trial must not stop the run
            return seed, _row(experiment, settings["n"], seed), {}, f"{type(exc).__name__}: {exc}\n{traceback.format_exc()}"


def _init_worker():
    # Guard against BLAS pools created before the limits in _run_trial take effect.
    threadpool_limits(limits=1)


def run_trials(experiment: str, settings: Dict[str, object], threads: int):
    jobs = [(experiment, settings, seed) for seed in settings["seed_list"]]
    if threads <= 1 or len(jobs) == 1:
        results = [_run_trial(job) for job in jobs]
    else:
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=min(threads, len(jobs)), mp_context=ctx, initializer=_init_worker) as pool:
            results = list(pool.map(_run_trial, jobs))
    return sorted(results, key=lambda r: r[0])


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def write_trials_csv(path: Path, rows: Iterable[dict]):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=TRIAL_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for k, v in row.items()})


def read_trials_csv(path) -> List[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def summarize(rows: List[dict]) -> Dict[str, Dict[str, float]]:
    """Mean, standard deviation, min and max of each summary column over defined values."""
    out = {}
    for col in SUMMARY_COLUMNS:
        vals = [float(r[col]) for r in rows if r[col] not in (UNDEFINED, "", None)]
        if vals:
            arr = np.array(vals)
            out[col] = {"mean": float(arr.mean()), "std": float(arr.std()), "min": float(arr.min()),
                        "max": float(arr.max()), "count": len(vals)}
    return out


def _prediction_for(experiment: str, settings) -> Optional[dict]:
    if experiment != "certify" or settings["tau"] != 1.0 or settings["recursion_depth"] != 0:
        return None
    if settings["variant"] == "theta":
        sup = fc.predict_theta_support()
        return {"column": "lambda1_norm", "value": sup.t + fc.THETA_SHIFT, "support": sup.as_dict(), "shift": fc.THETA_SHIFT}
    sup = fc.predict_radius_support()
    return {"column": "sigma1_norm", "value": max(abs(sup.s), sup.t), "support": sup.as_dict(), "shift": 0.0}


def _write_json(path: Path, payload):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _write_extras(experiment, out: Path, settings, results):
    if experiment == "esd":
        pooled = np.concatenate([np.asarray(extra["eigenvalues"]) for _, _, extra, err in results if err is None] or [np.zeros(0)])
        if pooled.size:
            hist = esd.histogram(pooled, settings["bins"])
            with open(out / f"esd_{settings['law']}_histogram.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["bin_left", "bin_right", "count", "density"])
                w.writerows(hist.rows())
    elif experiment == "theta_min":
        with open(out / "theta_min_history.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["seed", "iteration", "best_value"])
            for seed, _, extra, err in results:
                if err is None:
                    w.writerows((seed, i + 1, repr(v)) for i, v in enumerate(extra["history"]))
    elif experiment in ("diagnostics", "crosscorr", "lower_bound", "certify"):
        _write_json(out / f"{experiment}_details.json",
                    {str(seed): extra for seed, _, extra, err in results if err is None})


def run_experiment(experiment: str, settings: Dict[str, object], threads: int) -> int:
    out = Path(settings["out"])
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    results = run_trials(experiment, settings, threads)
    rows = [row for _, row, _, _ in results]
    write_trials_csv(out / f"{experiment}_trials.csv", rows)
    _write_extras(experiment, out, settings, results)
    failed = {str(seed): err for seed, _, _, err in results if err is not None}
    summary = {
        "experiment": experiment,
        "n": settings["n"],
        "seeds": settings["seed_list"],
        "settings": {k: v for k, v in settings.items() if k not in ("seed_list",)},
        "stats": summarize(rows),
        "prediction": _prediction_for(experiment, settings),
        "reference": REFERENCE.get((experiment, settings.get("variant"))),
        "failed": failed,
        "wall_seconds": time.perf_counter() - started,
    }
    _write_json(out / f"{experiment}_summary.json", summary)
    print(_format_summary(summary))
    for seed, err in failed.items():
        print(f"trial seed={seed} failed: {err.splitlines()[0]}", file=sys.stderr)
    return 1 if failed else 0


def _format_summary(summary) -> str:
    lines = [f"{summary['experiment']}: n={summary['n']} trials={len(summary['seeds'])} failed={len(summary['failed'])}"]
    for col, st in summary["stats"].items():
        lines.append(f"  {col:15s} mean={st['mean']:.6f} std={st['std']:.6f} min={st['min']:.6f} max={st['max']:.6f}")
    pred = summary.get("prediction")
    if pred:
        lines.append(f"  prediction ({pred['column']}) = {pred['value']:.6f}")
    if summary.get("reference") is not None:
        lines.append(f"  reference value = {summary['reference']}")
    return "\n".join(lines)


def run_freeconv_predict(settings) -> int:
    out = Path(settings["out"])
    out.mkdir(parents=True, exist_ok=True)
    targets = ("theta", "radius") if settings["target"] == "both" else (settings["target"],)
    payload = {}
    for target in targets:
        if target == "theta":
            a, b = fc.theta_prediction_inputs()
            shift = fc.THETA_SHIFT
            sup = fc.free_conv_support(a, b)
            value = sup.t + shift
        elif target == "radius":
            a, b = fc.radius_prediction_inputs()
            shift = 0.0
            sup = fc.free_conv_support(a, b)
            value = max(abs(sup.s), sup.t)
        else:
            raise UsageError(f"--target must be theta, radius or both, got {target!r}")
        dens = fc.free_conv_law(a, b)
        with open(out / f"freeconv_{target}_density.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "density", "failed"])
            for x, y, bad in zip(dens.grid + shift, dens.density, dens.failed):
                w.writerow([repr(float(x)), UNDEFINED if bad else repr(float(y)), int(bad)])
        payload[target] = {"prediction": value, "support": sup.as_dict(), "shift": shift, "density_mass": dens.mass,
                           "failed_points": int(dens.failed.sum())}
    _write_json(out / "freeconv_predict.json", payload)
    for target, info in payload.items():
        print(f"{target}: {info['prediction']:.6f}")
    print(json.dumps({t: info["support"] for t, info in payload.items()}, indent=2))
    return 0


def run_report(settings) -> int:
    out = Path(settings["out"])
    summaries = sorted(out.glob("*_summary.json"))
    if not summaries and not (out / "freeconv_predict.json").exists():
        print(f"no results found in {out}", file=sys.stderr)
        return 1
    lines = [f"report for {out}"]
    pred_path = out / "freeconv_predict.json"
    if pred_path.exists():
        preds = json.loads(pred_path.read_text())
        for target, info in preds.items():
            lines.append(f"  free-convolution prediction [{target}] = {info['prediction']:.6f}")
    for path in summaries:
        s = json.loads(path.read_text())
        lines.append(_format_summary(s))
        pred = s.get("prediction")
        if pred and pred["column"] in s["stats"]:
            mean = s["stats"][pred["column"]]["mean"]
            lines.append(f"  measured - predicted = {mean - pred['value']:+.6f}")
    print("\n".join(lines))
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--n", type=int, help="matrix dimension (default 2000)")
    common.add_argument("--seeds", help="seed count, or a comma-separated list of seeds")
    common.add_argument("--seed-base", dest="seed_base", type=int, help="first seed when --seeds is a count")
    common.add_argument("--out", help="output directory")
    common.add_argument("--threads", type=int, help=f"worker processes; 0 = ${THREADS_ENV} or all cores")
    common.add_argument("--config", help="key = value settings file; flags override it")

    parser = _Parser(prog="xbench", description="Spectral certificate experiments on G(n, 1/2).")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text)

    for name in ("certify", "radius"):
        p = add(name, "build certificates and record their extreme eigenvalues")
        if name == "certify":
            p.add_argument("--variant", choices=("theta", "radius"))
        p.add_argument("--tau", type=float)
        p.add_argument("--eta", type=float, help="radius shift (default (3 pi / 8) sqrt(n))")
        p.add_argument("--recursion-depth", dest="recursion_depth", type=int)
        p.add_argument("--cut", type=int)
    p = add("esd", "fit empirical spectra against their limiting laws")
    p.add_argument("--law", choices=ESD_LAWS)
    p.add_argument("--bins", type=int)
    p = add("freeconv-predict", "predict certificate constants by free convolution")
    p.add_argument("--target", choices=("theta", "radius", "both"))
    p = add("theta-min", "minimize lambda_1 over the feasible set by subgradient descent")
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--objective", choices=("lambda1", "spectral_radius"))
    p.add_argument("--step-size", dest="step_size", type=float)
    p.add_argument("--cluster-tol", dest="cluster_tol", type=float)
    p.add_argument("--initial", choices=("adjacency", "zeros_on_free"))
    p = add("iid-baseline", "certificates with iid free entries")
    p.add_argument("--phi", type=float)
    p.add_argument("--psi", type=float)
    p.add_argument("--dist", choices=cert.DISTRIBUTIONS)
    p = add("diagnostics", "identity and concentration statistics")
    p.add_argument("--variant", choices=("theta", "radius"))
    p.add_argument("--eta", type=float)
    add("crosscorr", "eigenbasis overlap of A and Z o A")
    p = add("lower-bound", "Hoffman-Wielandt lower-bound check on radius certificates")
    p.add_argument("--C", type=float)
    p.add_argument("--eta", type=float)
    add("report", "summarize results already in --out")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        settings = resolve_settings(args)
        command = args.command
        if command == "radius":
            settings["variant"] = "radius"
        threads = resolve_threads(settings["threads"])
        if command == "report":
            return run_report(settings)
        if command == "freeconv-predict":
            return run_freeconv_predict(settings)
        experiment = EXPERIMENTS[command]
        if experiment == "theta_min" and settings["n"] > MAX_N:
            raise UsageError(f"theta-min supports n <= {MAX_N}")
        if experiment == "certify":
            cert.CertificateSpec(variant=settings["variant"], tau=settings["tau"], eta=settings["eta"],
                                 recursion_depth=settings["recursion_depth"], cut=settings["cut"])
        if experiment == "esd" and settings["law"] not in ESD_LAWS:
            raise UsageError(f"--law must be one of {ESD_LAWS}")
        return run_experiment(experiment, settings, threads)
    except UsageError as exc:
        print(f"xbench: usage error: {exc}", file=sys.stderr)
        return 2
    except cert.InvalidParameterError as exc:
        print(f"xbench: usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
