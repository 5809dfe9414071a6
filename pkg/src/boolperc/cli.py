"""Experiment runner: config parsing, dispatch, and result persistence.

Every run writes a CSV of results plus a JSON manifest, both atomically
(temp file + rename).  The same config and seed reproduce byte-identical CSV
apart from the wall_ms column.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .connectivity import BigBall, Crossing, Seed
from .estimators import (BracketInvalid, CriticalSearch, correlation_length,
                         critical_search, delta_derivative, estimate_event,
                         estimate_phi, estimate_pivotal, talagrand_diagnostic,
                         two_arm_decay)
from .exploration import (SprinkleParams, run_abstract_exploration,
                          run_exploration, sprinkling_gain)
from .geometry import Ball
from .hypercube import (BooleanFunction, all_functions, encoding_bounds_check,
                        talagrand_check)
from .measures import measure_from_config
from .sampling import TruncationBudgetExceeded, sample

CSV_HEADER = ("run_id,op,d,measure,delta,lambda,n,N,rho,scale,replicas,"
              "estimate,stderr,ci_lo,ci_hi,seed,wall_ms")

# ops whose estimate column is a Bernoulli frequency (merge pools successes)
BERNOULLI_OPS = {"estimate-event", "crossing", "two-arm", "explore-gm",
                 "explore-abstract", "sprinkle-gain-before",
                 "sprinkle-gain-after"}


class ConfigInvalid(ValueError):
    pass


class SchemaMismatch(ConfigInvalid):
    pass


def _fmt(v) -> str:
    if v is None or v == "":
        return ""
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".boolperc-")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


_RUN_ID_SKIP = {"out", "inputs", "threads", "config"}


def _run_id(op: str, cfg: dict) -> str:
    # keys that do not affect the estimand or the stream keep the id stable
    blob = json.dumps({"op": op, **{k: repr(v) for k, v in sorted(cfg.items())
                                    if k not in _RUN_ID_SKIP}},
                      sort_keys=True).encode()
    return f"{op}-{hashlib.blake2b(blob, digest_size=6).hexdigest()}"


def _row(run_id, op, cfg, est=None, **overrides) -> dict:
    row = {
        "run_id": run_id, "op": op, "d": cfg.get("d", ""),
        "measure": cfg.get("measure", {}).get("kind", ""),
        "delta": cfg.get("measure", {}).get("delta", ""),
        "lambda": cfg.get("lam", ""), "n": cfg.get("n", ""),
        "N": cfg.get("big_n", ""), "rho": cfg.get("rho", ""),
        "scale": cfg.get("scale", ""), "replicas": cfg.get("replicas", ""),
        "estimate": "", "stderr": "", "ci_lo": "", "ci_hi": "",
        "seed": cfg.get("seed", ""), "wall_ms": "",
    }
    if est is not None:
        row.update(estimate=est.value, stderr=est.stderr,
                   ci_lo=est.ci[0], ci_hi=est.ci[1], replicas=est.replicas)
    row.update(overrides)
    return row


def _emit(out: str, rows: list, manifest: dict) -> None:
    lines = [CSV_HEADER]
    for row in rows:
        lines.append(",".join(_fmt(row[k]) for k in CSV_HEADER.split(",")))
    _atomic_write(out, "\n".join(lines) + "\n")
    manifest["rows"] = len(rows)
    _atomic_write(out + ".manifest.json", json.dumps(manifest, indent=2,
                                                     default=str) + "\n")


def _load_config_file(path: str) -> dict:
    try:
        with open(path, "rb") as handle:
            return tomllib.load(handle)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc


def _merge_config(defaults: dict, file_cfg: dict, cli: dict) -> dict:
    cfg = dict(defaults)
    cfg.update({k: v for k, v in file_cfg.items() if v is not None})
    cfg.update({k: v for k, v in cli.items() if v is not None})
    return cfg


def _require(cfg: dict, *keys) -> None:
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise ConfigInvalid(f"missing required config keys: {missing}")


def _measure_cfg(cfg: dict) -> dict:
    m = cfg.get("measure")
    if isinstance(m, dict):
        return m
    spec = {"kind": cfg.get("measure_kind", "powerlaw")}
    if cfg.get("delta") is not None:
        spec["delta"] = cfg["delta"]
    if cfg.get("cutoff") is not None:
        spec["cutoff"] = cfg["cutoff"]
    if cfg.get("radius") is not None:
        spec["radius"] = cfg["radius"]
    return spec


def _build_measure(cfg: dict):
    try:
        return measure_from_config(cfg["measure"], d=int(cfg["d"]))
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigInvalid(f"bad measure spec: {exc}") from exc


def _build_event(cfg: dict):
    kind = cfg.get("event")
    d = int(cfg["d"])
    delta = cfg.get("measure", {}).get("delta")
    if kind == "bigball":
        _require(cfg, "n")
        n = float(cfg["n"])
        threshold = cfg.get("threshold")
        if threshold is None:
            if delta is None:
                raise ConfigInvalid("bigball default threshold needs delta")
            threshold = n ** (d / (d + float(delta)))
        return BigBall(n=n, threshold=float(threshold))
    if kind == "crossing":
        _require(cfg, "outer")
        return Crossing(inner=float(cfg.get("inner") or 0.0),
                        outer=float(cfg["outer"]), d=d)
    if kind == "seed":
        _require(cfg, "n", "big_n")
        return Seed(n=float(cfg["n"]), N=float(cfg["big_n"]),
                    rho=float(cfg.get("rho") or 1.0))
    raise ConfigInvalid(f"unknown event kind: {kind!r}")


def _chunks(total: int, parts: int) -> list:
    parts = max(1, min(parts, total))
    base, extra = divmod(total, parts)
    out = []
    start = 0
    for i in range(parts):
        size = base + (1 if i < extra else 0)
        out.append((start, size))
        start += size
    return out


def _parallel_event(ev, cfg: dict, mu, *, window=None, tag="event"):
    replicas, seed = int(cfg["replicas"]), int(cfg["seed"])
    threads = int(cfg.get("threads") or 1)
    r_max = cfg.get("r_max")
    r_max = float(r_max) if r_max is not None else None
    jobs = _chunks(replicas, threads)
    if len(jobs) == 1:
        return estimate_event(ev, float(cfg["lam"]), mu, replicas, seed,
                              window=window, r_max=r_max, tag=tag)
    with ThreadPoolExecutor(max_workers=len(jobs)) as pool:
        futures = [pool.submit(estimate_event, ev, float(cfg["lam"]), mu,
                               size, seed, window=window, r_max=r_max,
                               tag=tag, replica_offset=start)
                   for start, size in jobs]
        parts = [f.result() for f in futures]
    merged = parts[0]
    for part in parts[1:]:
        merged = merged.merge(part)
    return merged


# --- subcommand bodies --------------------------------------------------------

def _cmd_sample(cfg: dict) -> tuple:
    _require(cfg, "lam", "scale")
    mu = _build_measure(cfg)
    window = Ball(float(cfg["scale"]), d=int(cfg["d"]))
    snap = sample(float(cfg["lam"]), mu, window, seed=int(cfg["seed"]))
    d = snap.d
    lines = [",".join([f"x{i}" for i in range(d)] + ["r"])]
    for z, r in zip(snap.centers, snap.radii):
        lines.append(",".join(_fmt(float(v)) for v in z) + "," + _fmt(float(r)))
    return None, "\n".join(lines) + "\n", {"balls": len(snap),
                                           "r_max": snap.r_max,
                                           "truncation_tail": snap.truncation_tail}


def _cmd_estimate_event(cfg: dict) -> tuple:
    _require(cfg, "lam", "event", "replicas")
    mu = _build_measure(cfg)
    ev = _build_event(cfg)
    est = _parallel_event(ev, cfg, mu)
    run_id = _run_id("estimate-event", cfg)
    return [_row(run_id, "estimate-event", cfg, est)], None, \
        {"bias_notes": [est.bias_note] if est.bias_note else []}


def _cmd_crossing(cfg: dict) -> tuple:
    _require(cfg, "lam", "scale", "replicas")
    r = float(cfg["scale"])
    mu = _build_measure(cfg)
    ev = Crossing(inner=r, outer=2 * r, d=int(cfg["d"]))
    est = _parallel_event(ev, cfg, mu, window=Ball(2 * r, d=int(cfg["d"])))
    run_id = _run_id("crossing", cfg)
    return [_row(run_id, "crossing", cfg, est)], None, {}


def _cmd_critical(cfg: dict, mode: str, op: str) -> tuple:
    _require(cfg, "bracket_lo", "bracket_hi", "tolerance", "ladder",
             "replicas")
    mu = _build_measure(cfg)
    ladder = cfg["ladder"]
    if isinstance(ladder, str):
        ladder = [float(v) for v in ladder.split(",")]
    cs = CriticalSearch(bracket=(float(cfg["bracket_lo"]),
                                 float(cfg["bracket_hi"])),
                        tolerance=float(cfg["tolerance"]),
                        ladder=tuple(ladder),
                        theta=float(cfg.get("theta") or 0.5))
    slab_k = cfg.get("slab_k")
    result = critical_search(cs, mu, mode, int(cfg["replicas"]),
                             int(cfg["seed"]),
                             slab_k=float(slab_k) if slab_k else None)
    lo, hi = result["interval"]
    run_id = _run_id(op, cfg)
    row = _row(run_id, op, cfg, scale=cs.ladder[-1],
               estimate=0.5 * (lo + hi), ci_lo=lo, ci_hi=hi, stderr="")
    return [row], None, {"trace": result["trace"], "interval": [lo, hi]}


def _cmd_phi(cfg: dict) -> tuple:
    _require(cfg, "lam", "n", "scale", "replicas")
    mu = _build_measure(cfg)
    est = estimate_phi(float(cfg["n"]), Ball(float(cfg["scale"]),
                                             d=int(cfg["d"])),
                       float(cfg["lam"]), mu, int(cfg["replicas"]),
                       int(cfg["seed"]))
    run_id = _run_id("phi", cfg)
    return [_row(run_id, "phi", cfg, est)], None, {}


def _cmd_correlation_length(cfg: dict) -> tuple:
    _require(cfg, "lam", "n", "ell_max", "replicas")
    mu = _build_measure(cfg)
    est = correlation_length(float(cfg["n"]), float(cfg["lam"]), mu,
                             float(cfg["ell_max"]), int(cfg["replicas"]),
                             int(cfg["seed"]))
    run_id = _run_id("correlation-length", cfg)
    return [_row(run_id, "correlation-length", cfg, est)], None, \
        {"bias_notes": [est.bias_note]}


def _cmd_pivotal(cfg: dict) -> tuple:
    _require(cfg, "lam", "event", "cell_x", "cell_n", "replicas")
    ev = _build_event(cfg)
    delta = float(cfg["measure"]["delta"])
    cell_x = cfg["cell_x"]
    if isinstance(cell_x, str):
        cell_x = [float(v) for v in cell_x.split(",")]
    est = estimate_pivotal(ev, (tuple(cell_x), int(cfg["cell_n"])),
                           float(cfg["lam"]), delta, int(cfg["replicas"]),
                           int(cfg.get("insertion_draws") or 8),
                           int(cfg["seed"]), d=int(cfg["d"]))
    run_id = _run_id("pivotal", cfg)
    return [_row(run_id, "pivotal", cfg, est, n=int(cfg["cell_n"]))], None, {}


def _cmd_delta_derivative(cfg: dict) -> tuple:
    _require(cfg, "lam", "event", "replicas")
    ev = _build_event(cfg)
    delta = float(cfg["measure"]["delta"])
    est = delta_derivative(ev, float(cfg["lam"]), delta,
                           int(cfg["replicas"]), int(cfg["seed"]),
                           d=int(cfg["d"]),
                           insertion_draws=int(cfg.get("insertion_draws") or 4),
                           n_max=int(cfg.get("n_max") or 8))
    run_id = _run_id("delta-derivative", cfg)
    return [_row(run_id, "delta-derivative", cfg, est)], None, \
        {"bias_notes": [est.bias_note]}


def _cmd_talagrand(cfg: dict) -> tuple:
    _require(cfg, "lam", "event", "replicas", "cell_budget")
    ev = _build_event(cfg)
    delta = float(cfg["measure"]["delta"])
    report = talagrand_diagnostic(ev, float(cfg["lam"]), delta,
                                  int(cfg["cell_budget"]),
                                  int(cfg["replicas"]), int(cfg["seed"]),
                                  d=int(cfg["d"]))
    run_id = _run_id("talagrand-diagnostic", cfg)
    row = _row(run_id, "talagrand-diagnostic", cfg, estimate=report["c0"],
               replicas=int(cfg["replicas"]))
    manifest = {"lhs": report["lhs"], "p": report["p"].value,
                "max_piv": report["max_piv"], "c0": report["c0"],
                "cells": [{"x": list(x), "n": n, "piv": est.value}
                          for (x, n), est in report["cells"]]}
    return [row], None, manifest


def _cmd_two_arm(cfg: dict) -> tuple:
    _require(cfg, "lam", "k", "K_list", "replicas")
    mu = _build_measure(cfg)
    k_list = cfg["K_list"]
    if isinstance(k_list, str):
        k_list = [float(v) for v in k_list.split(",")]
    results = two_arm_decay(float(cfg["k"]), k_list, float(cfg["lam"]), mu,
                            int(cfg["replicas"]), int(cfg["seed"]))
    run_id = _run_id("two-arm", cfg)
    rows = [_row(run_id, "two-arm", cfg, item["a2"], scale=item["K"])
            for item in results]
    manifest = {"bad_balls": [{"K": item["K"], "empirical": item["bad"].value,
                               "exact": item["bad_exact"]}
                              for item in results]}
    return rows, None, manifest


def _cmd_hypercube_check(cfg: dict) -> tuple:
    _require(cfg, "n", "p")
    n = int(cfg["n"])
    p = float(cfg["p"])
    lines = ["function_id,p,lhs,var,maxterm,implied_c"]
    min_c = math.inf
    for fid, f in enumerate(all_functions(n, p)):
        lhs, var, maxterm, implied = talagrand_check(f)
        if var > 0:
            min_c = min(min_c, implied)
        lines.append(f"{fid},{_fmt(p)},{_fmt(lhs)},{_fmt(float(var))},"
                     f"{_fmt(float(maxterm))},{_fmt(implied)}")
    if not min_c > 0:
        raise AssertionError(f"nonpositive implied constant: {min_c}")
    return None, "\n".join(lines) + "\n", {"min_implied_c": min_c}


def _cmd_encoding_check(cfg: dict) -> tuple:
    _require(cfg, "n", "p", "table_id")
    n = int(cfg["n"])
    p = [float(v) for v in str(cfg["p"]).split(",")]
    if len(p) == 1:
        p = p * n
    fid = int(cfg["table_id"])
    table = tuple((fid >> x) & 1 for x in range(1 << n))
    f = BooleanFunction(n=n, table=table, p=tuple(p))
    lines = ["i,j,inf,flip_prob,bound,identity_ok,bounds_ok,aggregate_ok"]
    for i in range(n):
        report = encoding_bounds_check(f, i)
        for item in report["per_bit"]:
            lines.append(f"{i},{item['j']},{_fmt(float(item['inf']))},"
                         f"{_fmt(float(item['flip_prob']))},"
                         f"{_fmt(float(item['bound']))},"
                         f"{report['identity_ok']},{report['bounds_ok']},"
                         f"{report['aggregate_ok']}")
    return None, "\n".join(lines) + "\n", {"table_id": fid}


def _cmd_explore_gm(cfg: dict) -> tuple:
    _require(cfg, "lam", "n", "big_n", "m_sites", "beta", "xi", "replicas")
    mu = _build_measure(cfg)
    params = SprinkleParams(beta=float(cfg["beta"]), xi=float(cfg["xi"]))
    reached = 0
    trace = None
    for i in range(int(cfg["replicas"])):
        outcome = run_exploration(float(cfg["lam"]), mu, float(cfg["n"]),
                                  float(cfg["big_n"]), int(cfg["m_sites"]),
                                  params, int(cfg["seed"]) + i)
        reached += outcome["reached_boundary"]
        if trace is None:
            trace = outcome["trace"]
    from .estimators import Estimate
    est = Estimate.from_bernoulli(reached, int(cfg["replicas"]),
                                  int(cfg["seed"]))
    run_id = _run_id("explore-gm", cfg)
    return [_row(run_id, "explore-gm", cfg, est)], None, \
        {"trace_jsonl": [json.dumps(rec) for rec in (trace or [])]}


def _cmd_explore_abstract(cfg: dict) -> tuple:
    _require(cfg, "q", "m_sites", "replicas")
    reached = 0
    trace = None
    for i in range(int(cfg["replicas"])):
        outcome = run_abstract_exploration(float(cfg["q"]),
                                           int(cfg["m_sites"]),
                                           int(cfg["seed"]) + i)
        reached += outcome["reached_boundary"]
        if trace is None:
            trace = outcome["trace"]
    from .estimators import Estimate
    est = Estimate.from_bernoulli(reached, int(cfg["replicas"]),
                                  int(cfg["seed"]))
    run_id = _run_id("explore-abstract", cfg)
    return [_row(run_id, "explore-abstract", cfg, est)], None, \
        {"trace_jsonl": [json.dumps(rec) for rec in (trace or [])]}


def _cmd_sprinkle_gain(cfg: dict) -> tuple:
    _require(cfg, "lam", "a_radius", "target_radius", "target_dist", "beta",
             "xi", "window_half", "replicas")
    mu = _build_measure(cfg)
    d = int(cfg["d"])
    from .geometry import Box
    a_region = Ball(float(cfg["a_radius"]), d=d)
    center = (float(cfg["target_dist"]),) + (0.0,) * (d - 1)
    target = Ball(float(cfg["target_radius"]), d=d, center=center)
    window = Box(halves=(float(cfg["window_half"]),) * d)
    report = sprinkling_gain(a_region, float(cfg["lam"]), float(cfg["beta"]),
                             float(cfg["xi"]), target, mu, window,
                             int(cfg["replicas"]), int(cfg["seed"]))
    run_id = _run_id("sprinkle-gain", cfg)
    rows = [_row(run_id, "sprinkle-gain-before", cfg, report["p_before"]),
            _row(run_id, "sprinkle-gain-after", cfg, report["p_after"])]
    return rows, None, {"conditioning_rate": report["conditioning_rate"],
                        "floor": report["floor"]}


def _cmd_merge(cfg: dict) -> tuple:
    from .estimators import Estimate
    inputs = cfg.get("inputs") or []
    if not inputs:
        return [], None, {"merged_from": []}
    header = None
    groups = {}
    order = []
    key_cols = [c for c in CSV_HEADER.split(",")
                if c not in ("run_id", "replicas", "estimate", "stderr",
                             "ci_lo", "ci_hi", "wall_ms")]
    for path in inputs:
        with open(path) as handle:
            lines = [ln.rstrip("\n") for ln in handle if ln.strip()]
        if not lines:
            continue
        if lines[0] != CSV_HEADER:
            raise SchemaMismatch(f"{path}: unexpected header")
        header = lines[0]
        cols = header.split(",")
        for line in lines[1:]:
            vals = dict(zip(cols, line.split(",")))
            key = tuple(vals[c] for c in key_cols)
            if key not in groups:
                groups[key] = []
                order.append(key)
            groups[key].append(vals)
    if header is None:
        return [], None, {"merged_from": inputs}
    rows = []
    for key in order:
        parts = groups[key]
        op = parts[0]["op"]
        kind = "bernoulli" if op in BERNOULLI_OPS else "mean"
        merged = None
        for vals in parts:
            n = int(float(vals["replicas"]))
            est_v = float(vals["estimate"])
            se = float(vals["stderr"]) if vals["stderr"] else 0.0
            seed = int(float(vals["seed"])) if vals["seed"] else 0
            if kind == "bernoulli":
                part = Estimate.from_bernoulli(round(est_v * n), n, seed)
            else:
                total = est_v * n
                total_sq = se * se * n * (n - 1) + total * total / n
                part = Estimate._from_moments(total, total_sq, n, seed)
            merged = part if merged is None else merged.merge(part)
        base = dict(parts[0])
        base.update(run_id=_run_id("merge", {"key": key}),
                    replicas=merged.replicas, estimate=merged.value,
                    stderr=merged.stderr, ci_lo=merged.ci[0],
                    ci_hi=merged.ci[1], wall_ms="")
        rows.append(base)
    return rows, None, {"merged_from": list(inputs)}


_COMMANDS = {
    "sample": _cmd_sample,
    "estimate-event": _cmd_estimate_event,
    "crossing": _cmd_crossing,
    "lambda-c": lambda cfg: _cmd_critical(cfg, "lambda_c", "lambda-c"),
    "lambda-hat-c": lambda cfg: _cmd_critical(cfg, "lambda_hat_c",
                                              "lambda-hat-c"),
    "slab": lambda cfg: _cmd_critical(cfg, "slab", "slab"),
    "phi": _cmd_phi,
    "correlation-length": _cmd_correlation_length,
    "pivotal": _cmd_pivotal,
    "delta-derivative": _cmd_delta_derivative,
    "talagrand-diagnostic": _cmd_talagrand,
    "two-arm": _cmd_two_arm,
    "hypercube-check": _cmd_hypercube_check,
    "encoding-check": _cmd_encoding_check,
    "explore-gm": _cmd_explore_gm,
    "explore-abstract": _cmd_explore_abstract,
    "sprinkle-gain": _cmd_sprinkle_gain,
    "merge": _cmd_merge,
}

_DEFAULTS = {"d": 2, "replicas": 100, "threads": 1, "theta": 0.5, "rho": 1.0}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="boolperc",
                                     description="Boolean model experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--replicas", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--out", default=None, required=(name != "merge"))
        p.add_argument("--d", type=int, default=None)
        p.add_argument("--measure-kind", dest="measure_kind", default=None)
        p.add_argument("--delta", type=float, default=None)
        p.add_argument("--cutoff", type=float, default=None)
        p.add_argument("--radius", type=float, default=None)
        p.add_argument("--lambda", dest="lam", type=float, default=None)
        p.add_argument("--n", type=float, default=None)
        p.add_argument("--N", dest="big_n", type=float, default=None)
        p.add_argument("--rho", type=float, default=None)
        p.add_argument("--scale", type=float, default=None)
        p.add_argument("--r-max", dest="r_max", type=float, default=None)
        p.add_argument("--event", default=None)
        p.add_argument("--threshold", type=float, default=None)
        p.add_argument("--inner", type=float, default=None)
        p.add_argument("--outer", type=float, default=None)
        p.add_argument("--bracket-lo", dest="bracket_lo", type=float,
                       default=None)
        p.add_argument("--bracket-hi", dest="bracket_hi", type=float,
                       default=None)
        p.add_argument("--tolerance", type=float, default=None)
        p.add_argument("--ladder", default=None)
        p.add_argument("--theta", type=float, default=None)
        p.add_argument("--slab-k", dest="slab_k", type=float, default=None)
        p.add_argument("--ell-max", dest="ell_max", type=float, default=None)
        p.add_argument("--cell-x", dest="cell_x", default=None)
        p.add_argument("--cell-n", dest="cell_n", type=int, default=None)
        p.add_argument("--insertion-draws", dest="insertion_draws", type=int,
                       default=None)
        p.add_argument("--n-max", dest="n_max", type=int, default=None)
        p.add_argument("--cell-budget", dest="cell_budget", type=int,
                       default=None)
        p.add_argument("--k", type=float, default=None)
        p.add_argument("--K-list", dest="K_list", default=None)
        p.add_argument("--p", default=None)
        p.add_argument("--table-id", dest="table_id", type=int, default=None)
        p.add_argument("--q", type=float, default=None)
        p.add_argument("--M", dest="m_sites", type=int, default=None)
        p.add_argument("--beta", type=float, default=None)
        p.add_argument("--xi", type=float, default=None)
        p.add_argument("--a-radius", dest="a_radius", type=float, default=None)
        p.add_argument("--target-radius", dest="target_radius", type=float,
                       default=None)
        p.add_argument("--target-dist", dest="target_dist", type=float,
                       default=None)
        p.add_argument("--window-half", dest="window_half", type=float,
                       default=None)
        if name == "merge":
            p.add_argument("inputs", nargs="*", default=None)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    cli = {k: v for k, v in vars(args).items() if k != "command"}
    try:
        file_cfg = _load_config_file(cli.pop("config")) if cli.get("config") \
            else (cli.pop("config"), {})[1]
        cfg = _merge_config(_DEFAULTS, file_cfg, cli)
        if cfg.get("seed") is None:
            cfg["seed"] = int(os.environ.get("BOOLPERC_SEED", "0"))
        cfg["measure"] = _measure_cfg(cfg)
        out = cfg.get("out")
        if out is None and args.command != "merge":
            raise ConfigInvalid("missing output path")
        start = time.monotonic()
        rows, raw_csv, extra = _COMMANDS[args.command](cfg)
        wall_ms = int(1000 * (time.monotonic() - start))
        manifest = {
            "version": __version__, "op": args.command,
            "config": {k: v for k, v in sorted(cfg.items())
                       if k not in ("out", "inputs") and v is not None},
            "seed": cfg["seed"], "wall_ms": wall_ms,
        }
        manifest.update(extra)
        if raw_csv is not None:
            _atomic_write(out, raw_csv)
            manifest["rows"] = raw_csv.count("\n") - 1
            _atomic_write(out + ".manifest.json",
                          json.dumps(manifest, indent=2, default=str) + "\n")
        else:
            for row in rows:
                row["wall_ms"] = wall_ms
            if out is None:
                for row in rows:
                    print(",".join(_fmt(row[k])
                                   for k in CSV_HEADER.split(",")))
            else:
                _emit(out, rows, manifest)
        return 0
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except TruncationBudgetExceeded as exc:
        print(f"truncation budget exceeded: {exc}", file=sys.stderr)
        return 3
    except BracketInvalid as exc:
        print(f"invalid bracket: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
