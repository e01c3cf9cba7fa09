"""Command-line front end: ``lassobo run | compare | check | list-benchmarks``.

Settings come from built-in defaults, then an optional JSON config file, then
flags; later sources win. Everything is validated before any file is
written, so a bad config leaves the output directory untouched (exit 2).
A run that aborts still has its partial trace written and flagged in the
manifest (exit 1).

Output layout::

    <out>/manifest.json
    <out>/summary.csv
    <out>/regret.svg                       (unless --no-svg)
    <out>/<method>/seed_<s>/trace.csv
    <out>/<method>/seed_<s>/rho_trace.csv  (with --trace-rho)
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from . import __version__
from .acquisition import AcqConfig
from .benchmarks import REGISTRY_EXAMPLES, make_benchmark
from .checks import SUITES, run_suite
from .engine import DROPOUT_BO, LASSOBO, METHODS, RANDOM_SEARCH, VANILLA_BO, RunConfig, run_seeds, summarize
from .gp import parse_family
from .likelihood import FitConfig

TRACE_COLUMNS = ("iter", "x_json", "y", "best_y", "simple_regret", "log_regret",
                 "d_t", "I_t", "fit_ms", "acq_ms")
SUMMARY_COLUMNS = ("method", "iter", "median_log_regret", "q25", "q75")
DEFAULT_OUT = "lassobo_out"
OUT_ENV = "LASSOBO_OUT"

# top-level keys of the config file and the RunConfig field each one feeds
_RUN_KEYS = {"budget": "budget_T", "n_init": "n_init", "schedule_n": "schedule_n",
             "window": "window_W", "dropout_d": "dropout_d"}
_TOP_KEYS = {"benchmark", "method", "methods", "repeats", "seed", "jobs", "out", "emit_svg",
             "trace_rho", "timings", "noise_sd", "fit", "acq", *_RUN_KEYS}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    benchmark: str
    methods: tuple
    run: RunConfig
    n_repeats: int = 10
    out: str = DEFAULT_OUT
    emit_svg: bool = True
    trace_rho: bool = False
    timings: bool = False
    noise_sd: float = 0.0
    jobs: int = 1
    dropout_d: int = 10
    extras: dict = field(default_factory=dict)

    @property
    def seeds(self):
        return [self.run.seed + r for r in range(self.n_repeats)]

    def method_config(self, method):
        cfg = replace(self.run, method=method)
        if method == VANILLA_BO:
            cfg = replace(cfg, fit=replace(cfg.fit, lam=0.0))
        return cfg


# ---------------------------------------------------------------- config


def _load_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config file {path}: {err.strerror}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"config file {path} is not valid JSON: {err}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return data


def _flag_overrides(args):
    """Translate the flags that were actually given into config-file form."""
    top, fit, acq = {}, {}, {}
    for key in ("benchmark", "method", "repeats", "seed", "jobs", "out", "noise_sd",
                *_RUN_KEYS):
        val = getattr(args, key, None)
        if val is not None:
            top[key] = val
    if getattr(args, "methods", None) is not None:
        top["methods"] = [m.strip() for m in args.methods.split(",") if m.strip()]
    if args.no_svg:
        top["emit_svg"] = False
    if args.trace_rho:
        top["trace_rho"] = True
    if args.timings:
        top["timings"] = True
    for flag, key in (("lam", "lam"), ("kernel", "family"), ("adam_steps", "adam_steps"),
                      ("fit_starts", "n_init_samples")):
        if getattr(args, flag) is not None:
            fit[key] = getattr(args, flag)
    if args.learn_noise:
        fit["learn_noise"] = True
    for flag, key in (("beta", "beta_override"), ("delta", "delta"),
                      ("restarts", "restarts_total")):
        if getattr(args, flag) is not None:
            acq[key] = getattr(args, flag)
    return top, fit, acq


def _build(sub_cls, values, what):
    try:
        return sub_cls(**values)
    except TypeError as err:
        raise ConfigError(f"bad {what} settings: {err}") from None


def resolve_config(args, command):
    """Merge defaults, the config file and flags into an :class:`ExperimentConfig`."""
    data = _load_file(args.config) if args.config else {}
    top, fit_flags, acq_flags = _flag_overrides(args)
    fit_vals = {**dict(data.get("fit") or {}), **fit_flags}
    acq_vals = {**dict(data.get("acq") or {}), **acq_flags}
    merged = {**data, **top}

    if "family" in fit_vals:
        fit_vals["family"] = parse_family(fit_vals["family"])
    try:
        fit = _build(FitConfig, fit_vals, "fit")
        acq = _build(AcqConfig, acq_vals, "acq")
        run_kw = {field_: merged[key] for key, field_ in _RUN_KEYS.items() if key in merged}
        run_cfg = RunConfig(fit=fit, acq=acq, seed=int(merged.get("seed", 0)), **run_kw)
    except ValueError as err:
        raise ConfigError(str(err)) from None

    if command == "run":
        methods = (merged.get("method", LASSOBO),)
    else:
        methods = tuple(merged.get("methods", (LASSOBO, RANDOM_SEARCH, DROPOUT_BO)))
        if len(methods) < 2:
            raise ConfigError("compare needs at least two methods")
        if len(set(methods)) != len(methods):
            raise ConfigError("compare methods must be distinct")
    for m in methods:
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r}; choose from {list(METHODS)}")

    if "benchmark" not in merged:
        raise ConfigError("no benchmark given (use --benchmark or the config file)")
    out = merged.get("out") or os.environ.get(OUT_ENV) or DEFAULT_OUT
    exp = ExperimentConfig(
        benchmark=str(merged["benchmark"]), methods=methods, run=run_cfg,
        n_repeats=int(merged.get("repeats", 10)), out=str(out),
        emit_svg=bool(merged.get("emit_svg", True)), trace_rho=bool(merged.get("trace_rho", False)),
        timings=bool(merged.get("timings", False)), noise_sd=float(merged.get("noise_sd", 0.0)),
        jobs=int(merged.get("jobs", 1)), dropout_d=run_cfg.dropout_d)
    if exp.n_repeats < 1:
        raise ConfigError("repeats must be >= 1")
    if exp.jobs < 1:
        raise ConfigError("jobs must be >= 1")
    if exp.noise_sd < 0:
        raise ConfigError("noise_sd must be nonnegative")
    return exp


def _objective(exp):
    try:
        obj = make_benchmark(exp.benchmark, noise_sd=exp.noise_sd)
    except KeyError as err:
        raise ConfigError(f"{err.args[0]} (see `lassobo list-benchmarks`)") from None
    if DROPOUT_BO in exp.methods and exp.dropout_d > obj.dim:
        raise ConfigError(f"dropout_d={exp.dropout_d} exceeds the dimension {obj.dim}")
    return obj


def _check_writable(out):
    path = Path(out)
    if path.exists() and not path.is_dir():
        raise ConfigError(f"output path {out} exists and is not a directory")
    probe = path
    while not probe.exists():
        probe = probe.parent
    if not os.access(probe, os.W_OK):
        raise ConfigError(f"output directory {out} is not writable")


# ---------------------------------------------------------------- writers


def _num(v):
    return "" if v is None else repr(float(v))


def write_trace(path, result, timings=False):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for r in result.records:
            w.writerow([r.iter, json.dumps([float(v) for v in r.x]), _num(r.y), _num(r.best_y),
                        _num(r.simple_regret), _num(r.log_regret), r.d_t,
                        ";".join(str(i) for i in sorted(r.important)),
                        _num(r.fit_ms) if timings else "", _num(r.acq_ms) if timings else ""])


def write_rho_trace(path, result, dim):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iter"] + [f"rho_{i}" for i in range(dim)])
        for r in result.records:
            if r.rho is not None:
                w.writerow([r.iter] + [_num(v) for v in r.rho])


def write_summary(path, blocks):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for method, (med, q25, q75) in blocks.items():
            for i in range(med.size):
                w.writerow([method, i + 1, _num(med[i]), _num(q25[i]), _num(q75[i])])


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def render_svg(blocks, title, width=720, height=440):
    """Median log regret with interquartile band, one colour per method."""
    left, right, top, bottom = 70, 150, 40, 50
    pw, ph = width - left - right, height - top - bottom
    n = max(b[0].size for b in blocks.values())
    vals = np.concatenate([np.concatenate(b) for b in blocks.values()])
    vals = vals[np.isfinite(vals)]
    lo, hi = (float(vals.min()), float(vals.max())) if vals.size else (0.0, 1.0)
    if hi - lo < 1e-9:
        lo, hi = lo - 0.5, hi + 0.5

    def sx(i):
        return left + pw * (i / max(n - 1, 1))

    def sy(v):
        return top + ph * (hi - v) / (hi - lo)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{left + pw / 2:.1f}" y="22" text-anchor="middle" font-size="14">'
           f'{escape(title)}</text>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for k in range(5):
        v = lo + (hi - lo) * k / 4
        out.append(f'<line x1="{left - 4}" y1="{sy(v):.2f}" x2="{left}" y2="{sy(v):.2f}" '
                   f'stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{sy(v) + 4:.2f}" text-anchor="end">{v:.2f}</text>')
        i = round((n - 1) * k / 4)
        out.append(f'<text x="{sx(i):.2f}" y="{top + ph + 18}" text-anchor="middle">{i + 1}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">'
               f'evaluation</text>')
    out.append(f'<text x="18" y="{top + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {top + ph / 2:.1f})">log simple regret</text>')
    for c, (method, (med, q25, q75)) in enumerate(blocks.items()):
        color = _PALETTE[c % len(_PALETTE)]
        ok = np.isfinite(med) & np.isfinite(q25) & np.isfinite(q75)
        idx = np.flatnonzero(ok)
        if idx.size:
            band = [f"{sx(i):.2f},{sy(q75[i]):.2f}" for i in idx]
            band += [f"{sx(i):.2f},{sy(q25[i]):.2f}" for i in idx[::-1]]
            out.append(f'<polygon points="{" ".join(band)}" fill="{color}" fill-opacity="0.18" '
                       f'stroke="none"/>')
            line = " ".join(f"{sx(i):.2f},{sy(med[i]):.2f}" for i in idx)
            out.append(f'<polyline points="{line}" fill="none" stroke="{color}" '
                       f'stroke-width="2"/>')
        ly = top + 16 + 20 * c
        out.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 36}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="3"/>')
        out.append(f'<text x="{left + pw + 42}" y="{ly + 4}">{escape(method)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- commands


def _benchmark_info(obj):
    return {"id": obj.name, "base": obj.base, "dim": obj.dim, "d_e": obj.d_e,
            "effective_indices": [int(i) for i in obj.effective_indices],
            "f_max": obj.f_max, "noise_sd": obj.noise_sd,
            "alpha": None if obj.alpha is None else [float(a) for a in obj.alpha]}


def _verdict(blocks, final_regret):
    final = {m: float(b[0][-1]) for m, b in blocks.items()}
    order = sorted(final, key=lambda m: (final[m], list(blocks).index(m)))
    return {"ordering_best_first": order, "final_median_log_regret": final,
            "final_median_simple_regret": final_regret,
            "best_method": order[0]}


def execute(exp, command):
    """Run every method over the shared seed list and write all artifacts."""
    obj = _objective(exp)
    _check_writable(exp.out)
    out = Path(exp.out)
    out.mkdir(parents=True, exist_ok=True)

    manifest = {
        "artifact_version": __version__, "command": command,
        "benchmark": _benchmark_info(obj), "methods": list(exp.methods),
        "n_repeats": exp.n_repeats, "seeds": exp.seeds, "jobs": exp.jobs, "out": str(out),
        "emit_svg": exp.emit_svg, "trace_rho": exp.trace_rho, "timings": exp.timings,
        "run_configs": {m: exp.method_config(m).to_dict() for m in exp.methods},
        "runs": [], "partial": False,
    }
    blocks, final_regret = {}, {}
    for method in exp.methods:
        cfg = exp.method_config(method)
        completed = []
        for seed, res, err in run_seeds(obj, cfg, exp.seeds, exp.jobs):
            run_dir = out / method / f"seed_{seed}"
            run_dir.mkdir(parents=True, exist_ok=True)
            write_trace(run_dir / "trace.csv", res, exp.timings)
            entry = {"method": method, "seed": seed, "status": "ok" if err is None else "aborted",
                     "n_evaluations": len(res.records), "wall_time_s": res.wall_time_s,
                     "trace": str((run_dir / "trace.csv").relative_to(out))}
            if exp.trace_rho and method != RANDOM_SEARCH:
                write_rho_trace(run_dir / "rho_trace.csv", res, obj.dim)
                entry["rho_trace"] = str((run_dir / "rho_trace.csv").relative_to(out))
            if res.records:
                entry["final_best_y"] = res.records[-1].best_y
                entry["final_simple_regret"] = res.records[-1].simple_regret
            if err is None:
                completed.append(res)
            else:
                entry["error"] = str(err)
                manifest["partial"] = True
            manifest["runs"].append(entry)
        if completed:
            blocks[method] = summarize(completed)
            final_regret[method] = float(np.median([r.final_simple_regret for r in completed]))

    write_summary(out / "summary.csv", blocks)
    manifest["summary"] = "summary.csv"
    manifest["svg"] = None
    if exp.emit_svg and blocks:
        title = f"{obj.name}: median log regret, IQR band ({exp.n_repeats} seeds)"
        (out / "regret.svg").write_text(render_svg(blocks, title), encoding="utf-8")
        manifest["svg"] = "regret.svg"
    if command == "compare" and blocks:
        manifest["verdict"] = _verdict(blocks, final_regret)
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def _cmd_experiment(args, command):
    try:
        exp = resolve_config(args, command)
        # resolve the benchmark and output path up front so nothing is written on error
        _objective(exp)
        _check_writable(exp.out)
    except (ConfigError, ValueError) as err:
        print(f"lassobo: config error: {err}", file=sys.stderr)
        return 2
    manifest = execute(exp, command)
    n_bad = sum(r["status"] != "ok" for r in manifest["runs"])
    print(f"wrote {len(manifest['runs'])} traces to {exp.out}")
    if "verdict" in manifest:
        v = manifest["verdict"]
        for m in v["ordering_best_first"]:
            print(f"  {m:10s} final median log regret {v['final_median_log_regret'][m]: .4f}")
    if n_bad:
        print(f"lassobo: {n_bad} run(s) aborted; partial traces flagged in manifest.json",
              file=sys.stderr)
        return 1
    return 0


def _cmd_check(args):
    results = run_suite(args.suite)
    for r in results:
        print(r.line())
    n_ok = sum(r.passed for r in results)
    print(f"{args.suite}: {n_ok}/{len(results)} passed")
    return 0 if n_ok == len(results) else 1


def _cmd_list(args):
    print("ids: <levy|ackley|sumsq>-d<D>-e<d_e>[-s<seed>]  or  hartmann6-d<D>[-s<seed>]")
    print("     -s<seed> scatters the effective coordinates by a seeded permutation")
    for bid in REGISTRY_EXAMPLES:
        obj = make_benchmark(bid)
        print(f"  {bid:18s} D={obj.dim:<4d} d_e={obj.d_e:<3d} f_max={obj.f_max:.6g}")
    return 0


def _experiment_flags(p, command):
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--benchmark", help="registry id, e.g. levy-d60-e10")
    if command == "run":
        p.add_argument("--method", help=f"one of {', '.join(METHODS)} (default lassobo)")
    else:
        p.add_argument("--methods", help="comma-separated (default lassobo,random,dropout)")
    p.add_argument("--budget", type=int, help="BO iterations after the initial design")
    p.add_argument("--n-init", dest="n_init", type=int, help="initial uniform points")
    p.add_argument("--repeats", type=int, help="number of seeds (default 10)")
    p.add_argument("--seed", type=int, help="first seed; repeats use seed, seed+1, ...")
    p.add_argument("--jobs", type=int, help="parallel worker processes")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    p.add_argument("--noise-sd", dest="noise_sd", type=float, help="additive evaluation noise")
    p.add_argument("--lam", type=float, help="L1 weight on the inverse squared lengthscales")
    p.add_argument("--kernel", help="se or matern52")
    p.add_argument("--learn-noise", action="store_true", help="fit the noise variance too")
    p.add_argument("--adam-steps", dest="adam_steps", type=int)
    p.add_argument("--fit-starts", dest="fit_starts", type=int,
                   help="random hyperparameter candidates per fit")
    p.add_argument("--beta", type=float, help="fixed UCB beta instead of the schedule")
    p.add_argument("--delta", type=float, help="confidence level of the beta schedule")
    p.add_argument("--restarts", type=int, help="acquisition random starts per iteration")
    p.add_argument("--window", type=int, help="median window over past rho vectors")
    p.add_argument("--schedule-n", dest="schedule_n", type=int,
                   help="random imputations per step: ceil(t^(1/n))")
    p.add_argument("--dropout-d", dest="dropout_d", type=int, help="Dropout subset size")
    p.add_argument("--no-svg", action="store_true", help="skip the regret plot")
    p.add_argument("--trace-rho", action="store_true", help="write rho_trace.csv per run")
    p.add_argument("--timings", action="store_true",
                   help="fill fit_ms/acq_ms (makes traces machine dependent)")


def build_parser():
    parser = argparse.ArgumentParser(prog="lassobo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"lassobo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    _experiment_flags(sub.add_parser("run", help="run one method over several seeds"), "run")
    _experiment_flags(sub.add_parser("compare", help="run several methods on shared seeds"),
                      "compare")
    chk = sub.add_parser("check", help="run a property suite")
    chk.add_argument("suite", choices=sorted(SUITES))
    sub.add_parser("list-benchmarks", help="show benchmark ids")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "check":
        return _cmd_check(args)
    if args.command == "list-benchmarks":
        return _cmd_list(args)
    return _cmd_experiment(args, args.command)


if __name__ == "__main__":
    sys.exit(main())
