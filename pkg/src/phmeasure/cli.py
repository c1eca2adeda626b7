"""Command-line interface.

Subcommands and their CSV columns (fixed order)::

    validate     observable,metric,dim,residual,definiteness,valid
    spectrum     k,eigenvalue,sign,raw_eta_norm,gram_residual,completeness_residual
    measure      expectation,variance,p_0..p_{n-1},s_0..s_{n-1},renormalized
    dilate       k,field,i,j,re,im
    sample       k,e_k,s_k,n_k,p_kk_analytic,p_hat
    uncertainty  theta1,theta2,var_a,var_b,re_cross,im_cross,R,mode,std_error_R,status
    reproduce    fig3*: figure,theta1,theta2,observable,expectation,variance,
                        expectation_hat,expectation_se,variance_hat,variance_se,status
                 fig4*: figure,theta1,theta2,var_a,var_b,re_cross,im_cross,R,
                        R_hat,std_error_R,status

Observables are fixture names (eq5.A, eq5.B, eq6.A, eq6.B), JSON files, or
inline JSON. Metrics are eta_pos, eta_indef, identity, a file, or inline
JSON; when omitted, a fixture observable uses the metric it was published
with. Angles are in radians. Domain errors exit with status 2 and a JSON
object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Iterable, Optional

import numpy as np

from . import fixtures
from .core import (
    Normalization,
    PHMetric,
    PHObservable,
    QuantumState,
    check_pseudo_hermitian,
    make_metric,
    matrix_from_json,
    state_from_density,
    state_from_pure,
    vector_from_json,
)
from .dilation import build_dilation
from .errors import ConfigParse, PHError
from .measurement import decomposition_coefficients, measure
from .sampler import run_experiment, simulate_events
from .spectral import completeness_residual, decompose, eta_gram
from .uncertainty import uncertainty_ratio

FIGURES = {
    # name: (kind, theta1, observable names)
    "fig3a": ("fig3", 0.0, ("eq5.A",)),
    "fig3b": ("fig3", 0.0, ("eq5.B",)),
    "fig3c": ("fig3", fixtures.THETA1_TILTED, ("eq5.A",)),
    "fig3d": ("fig3", fixtures.THETA1_TILTED, ("eq5.B",)),
    "fig4a": ("fig4", 0.0, ("eq5.A", "eq5.B")),
    "fig4b": ("fig4", fixtures.THETA1_TILTED, ("eq5.A", "eq5.B")),
    "fig4c": ("fig4", 0.0, ("eq6.A", "eq6.B")),
    "fig4d": ("fig4", fixtures.THETA1_TILTED, ("eq6.A", "eq6.B")),
}

FIG3_COLUMNS = [
    "figure", "theta1", "theta2", "observable", "expectation", "variance",
    "expectation_hat", "expectation_se", "variance_hat", "variance_se", "status",
]
FIG4_COLUMNS = [
    "figure", "theta1", "theta2", "var_a", "var_b", "re_cross", "im_cross", "R",
    "R_hat", "std_error_R", "status",
]
UNCERTAINTY_COLUMNS = [
    "theta1", "theta2", "var_a", "var_b", "re_cross", "im_cross", "R", "mode",
    "std_error_R", "status",
]

DEFAULT_GRID_POINTS = 37
DEFAULT_TRIALS = 1_000_000
DEFAULT_SEED = 42


# ---------------------------------------------------------------- resolution


def _load_json_ref(ref: Any) -> Any:
    if not isinstance(ref, str):
        return ref
    s = ref.strip()
    if s.startswith("[") or s.startswith("{"):
        try:
            return json.loads(s)
        except json.JSONDecodeError as exc:
            raise ConfigParse(f"invalid inline JSON: {exc}") from None
    path = Path(s)
    if not path.is_file():
        raise ConfigParse(f"{ref!r} is neither a known fixture nor a readable file")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigParse(f"invalid JSON in {path}: {exc}") from None


def resolve_metric(ref: Any) -> PHMetric:
    if isinstance(ref, str) and ref in fixtures.METRICS:
        return fixtures.metric(ref)
    data = _load_json_ref(ref)
    if isinstance(data, dict):
        if "eta" not in data:
            raise ConfigParse("metric object needs an 'eta' entry")
        data = data["eta"]
    return make_metric(matrix_from_json(data))


def resolve_observable(ref: Any, metric_ref: Any = None) -> PHObservable:
    if isinstance(ref, str) and ref in fixtures.OBSERVABLES:
        metric = resolve_metric(metric_ref or fixtures.NATURAL_METRIC[ref])
        return check_pseudo_hermitian(fixtures.observable_matrix(ref), metric)
    data = _load_json_ref(ref)
    if isinstance(data, dict):
        if "matrix" not in data:
            raise ConfigParse("observable object needs a 'matrix' entry")
        if metric_ref is None:
            metric_ref = data.get("eta")
        data = data["matrix"]
    if metric_ref is None:
        raise ConfigParse("no metric given for a non-fixture observable")
    return check_pseudo_hermitian(matrix_from_json(data), resolve_metric(metric_ref))


def resolve_state(spec: Any, theta1: Optional[float], theta2: Optional[float], metric: PHMetric) -> QuantumState:
    if theta1 is not None or theta2 is not None:
        return state_from_pure(
            fixtures.theta_state(theta1 or 0.0, theta2 or 0.0), metric, Normalization.ETA
        )
    if spec is None:
        raise ConfigParse("no state given: use --theta1/--theta2 or --state")
    data = _load_json_ref(spec)
    if isinstance(data, dict):
        if "theta1" in data or "theta2" in data:
            return resolve_state(None, data.get("theta1", 0.0), data.get("theta2", 0.0), metric)
        if "psi" in data:
            return state_from_pure(vector_from_json(data["psi"]), metric, Normalization.ETA)
        if "rho" in data:
            return state_from_density(matrix_from_json(data["rho"]), metric, Normalization.ETA)
    raise ConfigParse("state must be an object with 'theta1'/'theta2', 'psi' or 'rho'")


# ------------------------------------------------------------------- output


def _fmt(x: Any) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _jsonable(x: Any) -> Any:
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        f = float(x)
        return f if math.isfinite(f) else None
    return x


def render(rows: Iterable[dict], columns: list[str], fmt: str) -> str:
    rows = list(rows)
    if fmt == "json":
        return json.dumps([{c: _jsonable(r.get(c, "")) for c in columns} for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c, "")) for c in columns])
    return buf.getvalue()


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ----------------------------------------------------------------- commands


def _config(args) -> dict:
    if not getattr(args, "config", None):
        return {}
    data = _load_json_ref(args.config)
    if not isinstance(data, dict):
        raise ConfigParse("config file must hold a single JSON object")
    return data


def _pick(args, cfg: dict, name: str, key: Optional[str] = None, default: Any = None) -> Any:
    v = getattr(args, name, None)
    if v is not None:
        return v
    return cfg.get(key or name, default)


def _observable(args, cfg, which: str = "observable") -> PHObservable:
    ref = _pick(args, cfg, which)
    if ref is None:
        raise ConfigParse(f"missing --{which.replace('_', '-')}")
    return resolve_observable(ref, _pick(args, cfg, "metric"))


def _state(args, cfg, metric: PHMetric) -> QuantumState:
    return resolve_state(args.state or cfg.get("state"), args.theta1, args.theta2, metric)


def cmd_validate(args) -> str:
    cfg = _config(args)
    ref = _pick(args, cfg, "observable")
    if ref is None:
        raise ConfigParse("missing --observable")
    h = _observable(args, cfg)
    metric_ref = _pick(args, cfg, "metric") or fixtures.NATURAL_METRIC.get(ref)
    row = {
        "observable": ref if ref in fixtures.OBSERVABLES else "inline",
        "metric": metric_ref if metric_ref in fixtures.METRICS else "inline",
        "dim": h.dim,
        "residual": h.residual,
        "definiteness": h.metric.definiteness.value,
        "valid": True,
    }
    return render([row], ["observable", "metric", "dim", "residual", "definiteness", "valid"], args.format)


def cmd_spectrum(args) -> str:
    cfg = _config(args)
    h = _observable(args, cfg)
    sp = decompose(h)
    gram_res = float(np.linalg.norm(eta_gram(sp) - np.diag(sp.signs)))
    comp = completeness_residual(sp)
    rows = [
        {
            "k": k,
            "eigenvalue": sp.eigenvalues[k],
            "sign": int(sp.signs[k]),
            "raw_eta_norm": sp.raw_eta_norms[k],
            "gram_residual": gram_res,
            "completeness_residual": comp,
        }
        for k in range(sp.dim)
    ]
    cols = ["k", "eigenvalue", "sign", "raw_eta_norm", "gram_residual", "completeness_residual"]
    return render(rows, cols, args.format)


def cmd_measure(args) -> str:
    cfg = _config(args)
    h = _observable(args, cfg)
    state = _state(args, cfg, h.metric)
    sp = decompose(h)
    stats = measure(h, sp, state)
    n = sp.dim
    row: dict[str, Any] = {"expectation": stats.expectation, "variance": stats.variance}
    for k in range(n):
        row[f"p_{k}"] = stats.populations[k]
    for k in range(n):
        row[f"s_{k}"] = int(stats.signs[k])
    row["renormalized"] = stats.renormalized
    cols = ["expectation", "variance"] + [f"p_{k}" for k in range(n)] + [f"s_{k}" for k in range(n)]
    return render([row], cols + ["renormalized"], args.format)


def cmd_dilate(args) -> str:
    cfg = _config(args)
    h = _observable(args, cfg)
    d = build_dilation(decompose(h))
    rows = []
    n = d.dim
    for k in range(n):
        rows.append({"k": k, "field": "eigenvalue", "i": "", "j": "", "re": d.eigenvalues[k], "im": 0.0})
        rows.append({"k": k, "field": "sign", "i": "", "j": "", "re": d.signs[k], "im": 0.0})
        rows.append({"k": k, "field": "weight", "i": "", "j": "", "re": d.overlaps[k], "im": 0.0})
        for i in range(n):
            z = d.duals[i, k]
            rows.append({"k": k, "field": "dual", "i": i, "j": "", "re": z.real, "im": z.imag})
        for i in range(n):
            for j in range(n):
                z = d.unitaries[k][i, j]
                rows.append({"k": k, "field": "unitary", "i": i, "j": j, "re": z.real, "im": z.imag})
        for m, f in enumerate(d.factorizations[k]):
            for name, val in (
                ("factor_mode", float(f.mode)),
                ("factor_theta", f.theta),
                ("factor_phi_a", f.phi_a),
                ("factor_phi_b", f.phi_b),
            ):
                rows.append({"k": k, "field": name, "i": m, "j": "", "re": val, "im": 0.0})
    rows.append({"k": "", "field": "normalizer", "i": "", "j": "", "re": d.normalizer, "im": 0.0})
    return render(rows, ["k", "field", "i", "j", "re", "im"], args.format)


def cmd_sample(args) -> str:
    cfg = _config(args)
    h = _observable(args, cfg)
    state = _state(args, cfg, h.metric)
    trials = int(_pick(args, cfg, "trials", default=DEFAULT_TRIALS))
    seed = int(_pick(args, cfg, "seed", default=DEFAULT_SEED))
    sp = decompose(h)
    d = build_dilation(sp)
    rec = simulate_events(d, sp, state, trials, seed, args.workers)
    p = decomposition_coefficients(sp, state).populations
    denom = float(np.sum(rec.signs * rec.counts))
    rows = [
        {
            "k": k,
            "e_k": sp.eigenvalues[k],
            "s_k": int(sp.signs[k]),
            "n_k": int(rec.counts[k]),
            "p_kk_analytic": p[k],
            "p_hat": rec.counts[k] / denom if denom else float("nan"),
        }
        for k in range(sp.dim)
    ]
    return render(rows, ["k", "e_k", "s_k", "n_k", "p_kk_analytic", "p_hat"], args.format)


def _uncertainty_row(a, b, state, mode, trials, seed, theta1, theta2, workers=1) -> dict:
    rep = uncertainty_ratio(a, b, state, mode, trials, seed, workers)
    return {
        "theta1": theta1,
        "theta2": theta2,
        "var_a": rep.var_a,
        "var_b": rep.var_b,
        "re_cross": rep.cross_term.real,
        "im_cross": rep.cross_term.imag,
        "R": rep.ratio_r,
        "mode": rep.mode,
        "std_error_R": rep.std_error_r,
        "status": rep.status,
    }


def cmd_uncertainty(args) -> str:
    cfg = _config(args)
    a = _observable(args, cfg, "observable")
    b = _observable(args, cfg, "observable_b")
    mode = _pick(args, cfg, "mode", default="analytic")
    trials = int(_pick(args, cfg, "trials", default=DEFAULT_TRIALS))
    seed = int(_pick(args, cfg, "seed", default=DEFAULT_SEED))
    if args.grid_points:
        t1 = args.theta1 or 0.0
        rows = []
        for j, t2 in enumerate(theta_grid(args.grid_points)):
            st = state_from_pure(fixtures.theta_state(t1, t2), a.metric, Normalization.ETA)
            rows.append(_uncertainty_row(a, b, st, mode, trials, _point_seed(seed, j, args.grid_points), t1, t2))
    else:
        state = _state(args, cfg, a.metric)
        rows = [
            _uncertainty_row(
                a, b, state, mode, trials, seed,
                "" if args.theta1 is None and args.theta2 is None else (args.theta1 or 0.0),
                "" if args.theta1 is None and args.theta2 is None else (args.theta2 or 0.0),
                args.workers,
            )
        ]
    return render(rows, UNCERTAINTY_COLUMNS, args.format)


def theta_grid(points: int) -> np.ndarray:
    """``points`` angles from 0 to pi inclusive (5 degree steps for 37 points)."""
    if points < 2:
        raise ConfigParse("grid_points must be >= 2")
    return np.linspace(0.0, np.pi, points)


def _point_seed(seed: int, j: int, points: int) -> int:
    child = np.random.SeedSequence(seed).spawn(points)[j]
    return int(child.generate_state(1, np.uint64)[0])


def _fig3_row(name, theta1, theta2, obs_name, trials, seed) -> dict:
    row: dict[str, Any] = {"figure": name, "theta1": theta1, "theta2": theta2, "observable": obs_name}
    try:
        h = fixtures.observable(obs_name)
        st = state_from_pure(fixtures.theta_state(theta1, theta2), h.metric, Normalization.ETA)
        res = run_experiment(h, st, trials, seed)
        row.update(
            expectation=res.analytic_expectation,
            variance=res.analytic_variance,
            expectation_hat=res.sampled.expectation_hat,
            expectation_se=res.sampled.std_error,
            variance_hat=res.sampled.variance_hat,
            variance_se=res.sampled.variance_std_error,
            status="ok",
        )
    except PHError as exc:
        row["status"] = f"error:{type(exc).__name__}"
    return row


def _fig4_row(name, theta1, theta2, names, trials, seed) -> dict:
    row: dict[str, Any] = {"figure": name, "theta1": theta1, "theta2": theta2}
    try:
        a = fixtures.observable(names[0])
        b = fixtures.observable(names[1])
        st = state_from_pure(fixtures.theta_state(theta1, theta2), a.metric, Normalization.ETA)
        an = uncertainty_ratio(a, b, st, "analytic")
        row.update(
            var_a=an.var_a,
            var_b=an.var_b,
            re_cross=an.cross_term.real,
            im_cross=an.cross_term.imag,
            R=an.ratio_r,
            status=an.status,
        )
        if an.status == "ok":
            sm = uncertainty_ratio(a, b, st, "sampled", trials, seed)
            row.update(R_hat=sm.ratio_r, std_error_R=sm.std_error_r)
            if sm.status != "ok":
                row["status"] = f"sampled_{sm.status}"
    except PHError as exc:
        row["status"] = f"error:{type(exc).__name__}"
    return row


def reproduce_figure(which: str, grid_points: int = DEFAULT_GRID_POINTS, trials: int = DEFAULT_TRIALS,
                     seed: int = DEFAULT_SEED, workers: int = 1, fmt: str = "csv") -> str:
    """Sweep theta2 for one figure panel and render analytic and sampled columns."""
    if which not in FIGURES:
        raise ConfigParse(f"unknown figure {which!r}", known=sorted(FIGURES))
    kind, theta1, names = FIGURES[which]
    grid = theta_grid(grid_points)

    def point(j: int) -> dict:
        sd = _point_seed(seed, j, grid_points)
        if kind == "fig3":
            return _fig3_row(which, theta1, float(grid[j]), names[0], trials, sd)
        return _fig4_row(which, theta1, float(grid[j]), names, trials, sd)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(point, range(grid_points)))
    else:
        rows = [point(j) for j in range(grid_points)]
    return render(rows, FIG3_COLUMNS if kind == "fig3" else FIG4_COLUMNS, fmt)


def cmd_reproduce(args) -> str:
    cfg = _config(args)
    return reproduce_figure(
        args.figure,
        args.grid_points or DEFAULT_GRID_POINTS,
        int(_pick(args, cfg, "trials", default=DEFAULT_TRIALS)),
        int(_pick(args, cfg, "seed", default=DEFAULT_SEED)),
        args.workers,
        args.format,
    )


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--seed", type=int, help=f"RNG seed (default {DEFAULT_SEED})")
    common.add_argument("--trials", type=int, help=f"emitted photons per run (default {DEFAULT_TRIALS})")
    common.add_argument("--config", help="JSON file with a single experiment config object")
    common.add_argument("--workers", type=int, default=1, help="threads for sampling / grid points")

    obs = argparse.ArgumentParser(add_help=False)
    obs.add_argument("--observable", help="fixture name, JSON file or inline JSON")
    obs.add_argument("--metric", help="eta_pos, eta_indef, identity, JSON file or inline JSON")

    state = argparse.ArgumentParser(add_help=False)
    state.add_argument("--theta1", type=float)
    state.add_argument("--theta2", type=float)
    state.add_argument("--state", help="JSON file or inline JSON: {psi}, {rho} or {theta1, theta2}")

    p = argparse.ArgumentParser(
        prog="phmeasure",
        description=__doc__.split("\n\n")[0],
        epilog=__doc__.split("\n\n", 1)[1],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common, obs], help="check the PH condition").set_defaults(func=cmd_validate)
    sub.add_parser("spectrum", parents=[common, obs], help="eigenvalues and signs").set_defaults(func=cmd_spectrum)
    sub.add_parser("measure", parents=[common, obs, state], help="analytic statistics").set_defaults(func=cmd_measure)
    sub.add_parser("dilate", parents=[common, obs], help="dilation parameters").set_defaults(func=cmd_dilate)
    sub.add_parser("sample", parents=[common, obs, state], help="Monte Carlo event counts").set_defaults(func=cmd_sample)
    u = sub.add_parser("uncertainty", parents=[common, obs, state], help="uncertainty ratio R")
    u.add_argument("--observable-b", dest="observable_b", help="second observable")
    u.add_argument("--mode", choices=["analytic", "sampled"])
    u.add_argument("--grid-points", type=int, help="sweep theta2 over [0, pi] at fixed --theta1")
    u.set_defaults(func=cmd_uncertainty)
    r = sub.add_parser("reproduce", parents=[common], help="figure curves as CSV")
    r.add_argument("--figure", required=True, choices=sorted(FIGURES))
    r.add_argument("--grid-points", type=int, help=f"theta2 grid size (default {DEFAULT_GRID_POINTS})")
    r.set_defaults(func=cmd_reproduce)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.func(args)
    except PHError as exc:
        sys.stderr.write(json.dumps(exc.to_dict(), default=str) + "\n")
        return 2
    _emit(text, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
