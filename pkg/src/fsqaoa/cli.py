"""Experiment harness.  Run `fsqaoa <command> --help` for per-command keys.

Commands
    generate     engineered false-minimum instances to .qubo files
    solve        exhaustive ground truth of a problem
    aqa-run      one problem, one depth, selected strategies
    aqa-sweep    strategies across a range of depths (success/false-min CSV)
    qaoa-run     ensemble of variational angle optimizations
    cdf          success-probability CDFs over many generated instances
    phase-map    eigenstate layer phases along the schedule parameter r
    three-qubit  the X-basis-resolved three-qubit experiment

Configuration is plain key=value text (INI sections): a `[common]` section
plus one section per command, overridable with repeated `--set key=value`.
Every command echoes its effective configuration into the output directory;
rerunning with the same configuration reproduces all output files
byte-identically (exact metric mode).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import configparser
import hashlib
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import __version__
from .analysis import (
    cdf as empirical_cdf,
    phase_difference_map,
    standard_error,
    three_qubit_quantities,
    three_qubit_sampled,
)
from .protocols import (
    MixerStrategy,
    RunRecord,
    linear_aqa_schedule,
    parse_metric_mode,
    run_fixed_zeta,
    run_protocol,
    tau_of_p,
)
from .qaoa_opt import OptConfig, OptRun, aggregate_convergence, final_histogram, optimize
from .qubo_core import (
    GadgetParams,
    GroundTruth,
    QuboMatrix,
    attach_false_minima,
    exhaustive_solve,
    false_minimum_manifold,
    format_bits,
    generate_gadget_problem,
    load_qubo,
    parse_bits,
    random_qubo,
    save_qubo,
)
from .statevector import product_state

STRATEGY_NAMES = ("unmodified", "suppressed", "thresholded")


class CliError(Exception):
    """User-facing configuration or input error (exit code 1)."""


# --------------------------------------------------------------------------
# built-in fixtures

_FIXTURES: Dict[str, Optional[str]] = {
    "three_qubit": "three_qubit.qubo",
    "gadget14": "gadget14.qubo",
    "random16": "random16.qubo",
    "toy_gadget3": "toy_gadget3.qubo",
    "external8": None,
    "external16": None,
}


def _load_fixture(name: str) -> Tuple[QuboMatrix, dict]:
    from importlib.resources import as_file, files

    if name not in _FIXTURES:
        raise CliError(
            f"unknown builtin problem {name!r}; available: {', '.join(sorted(_FIXTURES))}"
        )
    fname = _FIXTURES[name]
    if fname is None:
        raise CliError(
            f"builtin '{name}' is an empty fixture slot (instance not distributable "
            "as text); see src/fsqaoa/fixtures/README.md, then pass problem=load:<path>"
        )
    with as_file(files("fsqaoa").joinpath("fixtures").joinpath(fname)) as p:
        Q = load_qubo(p)
        meta_path = Path(str(p)).with_suffix(".meta.json")
        meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    return Q, meta


# --------------------------------------------------------------------------
# configuration schema and parsing


def _cast_int(raw: str, key: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"key {key}: expected integer, got {raw!r}")


def _cast_float(raw: str, key: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise CliError(f"key {key}: expected number, got {raw!r}")


def _cast_str(raw: str, key: str) -> str:
    return raw


def _cast_bool(raw: str, key: str) -> bool:
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise CliError(f"key {key}: expected boolean, got {raw!r}")


def _cast_metric(raw: str, key: str) -> str:
    try:
        parse_metric_mode(raw)
    except ValueError as exc:
        raise CliError(f"key {key}: {exc}")
    return raw


def _cast_layer_order(raw: str, key: str) -> str:
    if raw not in ("prose", "literal"):
        raise CliError(f"key {key}: expected 'prose' or 'literal', got {raw!r}")
    return raw


def _cast_strategies(raw: str, key: str) -> Tuple[str, ...]:
    names = tuple(s.strip() for s in raw.split(",") if s.strip())
    if not names or any(s not in STRATEGY_NAMES for s in names):
        raise CliError(f"key {key}: expected comma list from {STRATEGY_NAMES}, got {raw!r}")
    return names


def _cast_p_values(raw: str, key: str) -> Tuple[int, ...]:
    raw = raw.strip()
    try:
        if ".." in raw:
            lo, hi = raw.split("..", 1)
            values = tuple(range(int(lo), int(hi) + 1))
        else:
            values = tuple(int(s) for s in raw.split(",") if s.strip())
    except ValueError:
        raise CliError(f"key {key}: expected 'a..b' or comma list, got {raw!r}")
    if not values or any(p < 1 for p in values):
        raise CliError(f"key {key}: depths must be >= 1, got {raw!r}")
    return values


def _cast_tau(raw: str, key: str) -> object:
    if raw == "formula":
        return "formula"
    return _cast_float(raw, key)


_TAU_3Q_DEFAULT = repr(3.0 * np.pi / 4.0)
_TAU_HALFPI = repr(np.pi / 2.0)

_COMMON_SCHEMA = {
    "seed": (_cast_int, "0", "base RNG seed"),
    "jobs": (_cast_int, "1", "parallel worker processes for sweeps"),
    "out": (_cast_str, "", "output directory (default out/<command>)"),
    "metric": (_cast_metric, "exact", "metric mode: exact or sampled:<shots>"),
    "layer_order": (_cast_layer_order, "prose", "phase/mixer order inside a layer"),
}

_GADGET_KEYS = {
    "n_cut": (_cast_int, "4", "cut variables"),
    "n_gadget": (_cast_int, "3", "gadget variables (total n = n_cut + 2*n_gadget)"),
    "j_gadget": (_cast_float, "0.25", "gadget block coupling"),
    "j_couple": (_cast_float, "0.5", "cut-to-gadget coupling"),
    "bias": (_cast_float, "1.5", "energy gap of the false manifold above the optimum"),
}

_PROBLEM_KEYS = {
    "problem": (_cast_str, None, "builtin:<name> | load:<path> | random:<n>"),
    "diag_substitute": (_cast_str, "", "replace diagonal entries, format <old>:<new>"),
}

_SCHEMAS: Dict[str, Dict[str, tuple]] = {
    "generate": {**_GADGET_KEYS, "count": (_cast_int, "1", "instances to generate")},
    "solve": {**_PROBLEM_KEYS},
    "aqa-run": {
        **_PROBLEM_KEYS,
        "p": (_cast_int, None, "layer count"),
        "tau": (_cast_tau, "formula", "'formula' for tau(p) or a fixed radian value"),
        "strategies": (_cast_strategies, ",".join(STRATEGY_NAMES), "strategies to run"),
        "theta": (_cast_float, "0.2", "thresholding cutoff"),
    },
    "aqa-sweep": {
        **_PROBLEM_KEYS,
        "p_values": (_cast_p_values, None, "depths, e.g. 1..20 or 5,10,15"),
        "tau": (_cast_tau, "formula", "'formula' for tau(p) or a fixed radian value"),
        "strategies": (_cast_strategies, ",".join(STRATEGY_NAMES), "strategies to run"),
        "theta": (_cast_float, "0.2", "thresholding cutoff"),
        "records": (_cast_bool, "true", "also write per-run RunRecord JSONs"),
    },
    "qaoa-run": {
        **_PROBLEM_KEYS,
        "p": (_cast_int, None, "layer count"),
        "n_runs": (_cast_int, "100", "independent optimizations"),
        "max_iters": (_cast_int, "300", "objective evaluations per run"),
        "shots": (_cast_int, "1000", "samples per objective evaluation"),
        "init": (_cast_str, "random_uniform", "random_uniform or aqa_warm_start"),
        "histogram_bins": (_cast_int, "20", "bins of the final-success histogram"),
    },
    "cdf": {
        **_GADGET_KEYS,
        "count": (_cast_int, "25", "instances"),
        "p": (_cast_int, "50", "layer count"),
        "tau": (_cast_tau, "formula", "'formula' for tau(p) or a fixed radian value"),
        "strategies": (_cast_strategies, ",".join(STRATEGY_NAMES), "strategies to run"),
        "theta": (_cast_float, "0.2", "thresholding cutoff"),
        "problem_dir": (_cast_str, "", "load instance_*.qubo from here instead of generating"),
    },
    "phase-map": {
        **_PROBLEM_KEYS,
        "true_state": (_cast_str, None, "per-qubit chars over 0,1,+,- for the first state"),
        "false_state": (_cast_str, None, "per-qubit chars over 0,1,+,- for the second state"),
        "tau": (_cast_float, _TAU_HALFPI, "total layer angle gamma + beta"),
        "r_min": (_cast_float, "0.001", "grid start, in (0,1)"),
        "r_max": (_cast_float, "0.999", "grid end, in (0,1)"),
        "r_points": (_cast_int, "401", "grid size"),
    },
    "three-qubit": {
        "problem": (_cast_str, "builtin:three_qubit", "any 3-qubit problem"),
        "diag_substitute": (_cast_str, "", "replace diagonal entries, format <old>:<new>"),
        "p_values": (_cast_p_values, "1..8", "depths"),
        "tau": (_cast_float, _TAU_3Q_DEFAULT, "fixed total layer angle"),
        "zeta2": (_cast_float, "0.5", "fixed mixer scaling of qubit 2 in the second variant"),
    },
}


def _effective_config(cmd: str, args: argparse.Namespace) -> Tuple[dict, str, str]:
    """Merge defaults, config file sections, --set pairs and flag sugar.

    Returns (typed config, canonical text, sha256-12 of that text).
    """
    raw: Dict[str, str] = {}
    if args.config:
        parser = configparser.ConfigParser()
        try:
            read = parser.read(args.config)
        except configparser.Error as exc:
            raise CliError(f"bad config file {args.config}: {exc}")
        if not read:
            raise CliError(f"config file not found: {args.config}")
        for section in ("common", cmd):
            if parser.has_section(section):
                raw.update(parser[section])
    for pair in args.set or []:
        if "=" not in pair:
            raise CliError(f"--set expects key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        raw[key.strip()] = value.strip()
    for flag in ("seed", "jobs", "out", "metric", "layer_order"):
        value = getattr(args, flag.replace("-", "_"), None)
        if value is not None:
            raw[flag] = str(value)

    schema = {**_COMMON_SCHEMA, **_SCHEMAS[cmd]}
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise CliError(
            f"unknown key(s) {', '.join(unknown)} for command {cmd}; "
            f"allowed: {', '.join(sorted(schema))}"
        )
    cfg: Dict[str, object] = {}
    canon: Dict[str, str] = {}
    for key, (cast, default, _help) in schema.items():
        if key in raw:
            text = raw[key]
        elif default is None:
            raise CliError(f"missing required key {key!r} for command {cmd}")
        else:
            text = default
        cfg[key] = cast(text, key)
        canon[key] = text
    if not cfg["out"]:
        cfg["out"] = f"out/{cmd}"
        canon["out"] = cfg["out"]
    text = f"[{cmd}]\n" + "".join(f"{k} = {canon[k]}\n" for k in sorted(canon))
    # jobs and out are execution details; the hash identifies the experiment
    hashed = f"[{cmd}]\n" + "".join(
        f"{k} = {canon[k]}\n" for k in sorted(canon) if k not in ("jobs", "out")
    )
    sha = hashlib.sha256(hashed.encode()).hexdigest()[:12]
    return cfg, text, sha


# --------------------------------------------------------------------------
# output helpers


def _out_dir(cfg: dict, text: str) -> Path:
    out = Path(str(cfg["out"]))
    out.mkdir(parents=True, exist_ok=True)
    (out / "effective_config.ini").write_text(text, encoding="utf-8")
    return out


def _fmt_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path: Path, meta_line: str, columns: List[str], rows: List[tuple]) -> None:
    lines = [meta_line, ",".join(columns)]
    lines.extend(",".join(_fmt_cell(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _meta_line(cmd: str, cfg: dict, sha: str) -> str:
    return f"# artifact v{__version__} | command={cmd} | seed={cfg['seed']} | config_sha={sha}"


# --------------------------------------------------------------------------
# problem resolution


def _resolve_problem(cfg: dict) -> Tuple[QuboMatrix, dict]:
    spec = str(cfg["problem"])
    if spec.startswith("builtin:"):
        Q, meta = _load_fixture(spec.split(":", 1)[1])
    elif spec.startswith("load:"):
        path = Path(spec.split(":", 1)[1])
        if not path.exists():
            raise CliError(f"problem file not found: {path}")
        Q = load_qubo(path)
        meta_path = path.with_suffix(".meta.json")
        meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    elif spec.startswith("random:"):
        n = _cast_int(spec.split(":", 1)[1], "problem")
        Q = random_qubo(n, np.random.default_rng([int(cfg["seed"]), 424242]))
        meta = {}
    else:
        raise CliError(
            f"problem must be builtin:<name>, load:<path> or random:<n>, got {spec!r}"
        )
    sub = str(cfg.get("diag_substitute", ""))
    if sub:
        try:
            old, new = (float(x) for x in sub.split(":", 1))
        except ValueError:
            raise CliError(f"diag_substitute expects <old>:<new>, got {sub!r}")
        q = np.array(Q.q)
        hits = np.isclose(np.diag(q), old, rtol=0.0, atol=1e-12)
        if not hits.any():
            raise CliError(f"diag_substitute: no diagonal entry equals {old}")
        q[np.diag_indices(Q.n)] = np.where(hits, new, np.diag(q))
        Q = QuboMatrix(q)
        meta = dict(meta, diag_substitute=sub)
    return Q, meta


def _truth_for(Q: QuboMatrix, meta: dict) -> GroundTruth:
    truth = exhaustive_solve(Q)
    if all(k in meta for k in ("sol", "n_cut", "n_gadget")):
        manifold = false_minimum_manifold(
            parse_bits(meta["sol"]), int(meta["n_cut"]), int(meta["n_gadget"])
        )
        try:
            truth = attach_false_minima(truth, Q, manifold)
        except ValueError as exc:
            # a diagonal substitution can split the engineered manifold;
            # keep the exhaustive truth and drop the false-minimum scoring
            print(f"note: false-minimum manifold dropped ({exc})", file=sys.stderr)
    return truth


def _tau_value(tau_setting, p: int) -> float:
    return tau_of_p(p) if tau_setting == "formula" else float(tau_setting)


# --------------------------------------------------------------------------
# parallel task runner (workers are module-level for pickling)


def _map_tasks(fn, tasks: List[dict], jobs: int) -> List[dict]:
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def _rebuild_truth(task: dict) -> Optional[GroundTruth]:
    if task["opt_states"] is None:
        return None
    optimal = tuple(tuple(s) for s in task["opt_states"])
    false_states = tuple(tuple(s) for s in task["false_states"] or ())
    return GroundTruth(
        min_energy=task["min_energy"],
        optimal_states=optimal,
        false_min_states=false_states,
        false_min_energy=task["false_energy"],
    )


def _pack_truth(truth: Optional[GroundTruth]) -> dict:
    if truth is None:
        return {"opt_states": None, "false_states": None, "min_energy": None, "false_energy": None}
    return {
        "opt_states": [list(s) for s in truth.optimal_states],
        "false_states": [list(s) for s in truth.false_min_states],
        "min_energy": truth.min_energy,
        "false_energy": truth.false_min_energy,
    }


def _strategy_worker(task: dict) -> dict:
    Q = QuboMatrix(np.array(task["q"]))
    truth = _rebuild_truth(task)
    schedule = linear_aqa_schedule(task["p"], task["tau"])
    rng = None
    if task["rng_seed"] is not None:
        rng = np.random.default_rng(task["rng_seed"])
    record = run_protocol(
        Q,
        schedule,
        MixerStrategy(task["strategy"], task["theta"]),
        metric_mode=task["metric"],
        rng=rng,
        truth=truth,
        layer_order=task["layer_order"],
        seed=task["seed"],
    )
    return {
        "key": task["key"],
        "p": task["p"],
        "strategy": task["strategy"],
        "success": record.success_prob,
        "false_min": record.false_min_prob,
        "record": record.to_json_dict() if task["keep_record"] else None,
    }


def _qaoa_worker(task: dict) -> dict:
    Q = QuboMatrix(np.array(task["q"]))
    truth = _rebuild_truth(task)
    config = OptConfig(
        p=task["p"],
        max_iters=task["max_iters"],
        shots_per_iter=task["shots"],
        n_runs=task["n_runs"],
        init_policy=task["init"],
        seed=task["base_seed"],
    )
    streams = np.random.SeedSequence(config.seed).spawn(config.n_runs)
    run = optimize(
        Q,
        config,
        truth=truth,
        rng=np.random.default_rng(streams[task["k"]]),
        layer_order=task["layer_order"],
    )
    run.seed = task["k"]
    return {"k": task["k"], "run": run.to_json_dict()}


def _strategy_tasks(
    Q: QuboMatrix,
    truth: Optional[GroundTruth],
    cfg: dict,
    p_values,
    strategies,
    keep_record: bool,
    key_prefix: str = "",
) -> List[dict]:
    metric_kind, _ = parse_metric_mode(str(cfg["metric"]))
    tasks = []
    packed = _pack_truth(truth)
    for p in p_values:
        for si, strategy in enumerate(strategies):
            rng_seed = None
            if metric_kind == "sampled":
                rng_seed = [int(cfg["seed"]), 1000 + p, si]
            tasks.append(
                {
                    "key": f"{key_prefix}p{p}_{strategy}",
                    "q": np.asarray(Q.q).tolist(),
                    "p": int(p),
                    "tau": _tau_value(cfg["tau"], int(p)),
                    "strategy": strategy,
                    "theta": float(cfg["theta"]),
                    "metric": str(cfg["metric"]),
                    "layer_order": str(cfg["layer_order"]),
                    "seed": int(cfg["seed"]),
                    "rng_seed": rng_seed,
                    "keep_record": keep_record,
                    **packed,
                }
            )
    return tasks


# --------------------------------------------------------------------------
# commands


def cmd_generate(cfg: dict, meta_line: str) -> int:
    out = Path(str(cfg["out"]))
    params = GadgetParams(
        n_cut=int(cfg["n_cut"]),
        n_gadget=int(cfg["n_gadget"]),
        j_gadget=float(cfg["j_gadget"]),
        j_couple=float(cfg["j_couple"]),
        bias=float(cfg["bias"]),
        seed=int(cfg["seed"]),
    )
    rng = np.random.default_rng(int(cfg["seed"]))
    count = int(cfg["count"])
    for k in range(count):
        instance = generate_gadget_problem(params, rng)
        stem = out / f"instance_{k:03d}"
        save_qubo(instance.matrix, stem.with_suffix(".qubo"))
        meta = {
            "instance_index": k,
            "sol": format_bits(instance.sol),
            "cut_ties": instance.cut_ties,
            "n_cut": params.n_cut,
            "n_gadget": params.n_gadget,
            "j_gadget": params.j_gadget,
            "j_couple": params.j_couple,
            "bias": params.bias,
            "seed": int(cfg["seed"]),
            "rng": "numpy default_rng (PCG64), instances drawn sequentially",
            "engine_version": __version__,
        }
        stem.with_suffix(".meta.json").write_text(
            json.dumps(meta, sort_keys=True, indent=1) + "\n", encoding="utf-8"
        )
    print(f"wrote {count} instance(s) under {out}")
    return 0


def cmd_solve(cfg: dict, meta_line: str) -> int:
    out = Path(str(cfg["out"]))
    Q, meta = _resolve_problem(cfg)
    truth = _truth_for(Q, meta)
    doc = {
        "n": Q.n,
        "min_energy": truth.min_energy,
        "optimal_states": [format_bits(s) for s in truth.optimal_states],
        "false_min_states": [format_bits(s) for s in truth.false_min_states],
        "false_min_energy": truth.false_min_energy,
    }
    (out / "solution.json").write_text(
        json.dumps(doc, sort_keys=True, indent=1) + "\n", encoding="utf-8"
    )
    states = " ".join(doc["optimal_states"])
    print(f"min energy {truth.min_energy:.12g} on {len(truth.optimal_states)} state(s): {states}")
    return 0


def cmd_aqa_run(cfg: dict, meta_line: str) -> int:
    out = Path(str(cfg["out"]))
    Q, meta = _resolve_problem(cfg)
    truth = _truth_for(Q, meta)
    tasks = _strategy_tasks(Q, truth, cfg, [int(cfg["p"])], cfg["strategies"], keep_record=True)
    results = _map_tasks(_strategy_worker, tasks, int(cfg["jobs"]))
    rows = []
    for res in results:
        rows.append((res["p"], res["strategy"], res["success"], res["false_min"]))
        record_path = out / f"record_{res['strategy']}.json"
        record_path.write_text(
            json.dumps(res["record"], sort_keys=True, indent=1) + "\n", encoding="utf-8"
        )
        print(
            f"p={res['p']} {res['strategy']:>11}: success={res['success']:.6f} "
            f"false_min={res['false_min']:.6f}"
        )
    _write_csv(out / "aqa_run.csv", meta_line,
               ["p", "strategy", "success_prob", "false_min_prob"], rows)
    return 0


def cmd_aqa_sweep(cfg: dict, meta_line: str) -> int:
    out = Path(str(cfg["out"]))
    Q, meta = _resolve_problem(cfg)
    truth = _truth_for(Q, meta)
    keep = bool(cfg["records"])
    tasks = _strategy_tasks(Q, truth, cfg, cfg["p_values"], cfg["strategies"], keep_record=keep)
    results = _map_tasks(_strategy_worker, tasks, int(cfg["jobs"]))
    rows = []
    for res in results:
        rows.append((res["p"], res["strategy"], res["success"], res["false_min"]))
        if keep:
            path = out / f"record_p{res['p']:03d}_{res['strategy']}.json"
            path.write_text(
                json.dumps(res["record"], sort_keys=True, indent=1) + "\n", encoding="utf-8"
            )
    _write_csv(out / "sweep.csv", meta_line,
               ["p", "strategy", "success_prob", "false_min_prob"], rows)
    print(f"swept p in {list(cfg['p_values'])} x {list(cfg['strategies'])} -> {out/'sweep.csv'}")
    return 0


def cmd_qaoa_run(cfg: dict, meta_line: str) -> int:
    out = Path(str(cfg["out"]))
    Q, meta = _resolve_problem(cfg)
    truth = _truth_for(Q, meta)
    if str(cfg["init"]) not in ("random_uniform", "aqa_warm_start"):
        raise CliError(f"init must be random_uniform or aqa_warm_start, got {cfg['init']!r}")
    n_runs = int(cfg["n_runs"])
    base = {
        "q": np.asarray(Q.q).tolist(),
        "p": int(cfg["p"]),
        "max_iters": int(cfg["max_iters"]),
        "shots": int(cfg["shots"]),
        "n_runs": n_runs,
        "init": str(cfg["init"]),
        "base_seed": int(cfg["seed"]),
        "layer_order": str(cfg["layer_order"]),
        **_pack_truth(truth),
    }
    tasks = [dict(base, k=k) for k in range(n_runs)]
    results = _map_tasks(_qaoa_worker, tasks, int(cfg["jobs"]))
    runs = [OptRun.from_json_dict(r["run"]) for r in sorted(results, key=lambda r: r["k"])]

    runs_dir = out / "runs"
    runs_dir.mkdir(exist_ok=True)
    for k, run in enumerate(runs):
        run.save(runs_dir / f"run_{k:03d}.json")
    mean, se = aggregate_convergence(runs)
    _write_csv(out / "convergence.csv", meta_line, ["iter", "mean", "stderr"],
               [(i, mean[i], se[i]) for i in range(mean.size)])
    counts, edges = final_histogram(runs, bins=int(cfg["histogram_bins"]))
    _write_csv(out / "histogram.csv", meta_line, ["bin_left", "bin_right", "count"],
               [(edges[i], edges[i + 1], int(counts[i])) for i in range(counts.size)])
    finals = [run.best_so_far[-1] for run in runs]
    se_final = standard_error(finals) if len(finals) > 1 else 0.0
    print(
        f"{n_runs} runs at p={cfg['p']}: mean best success {np.mean(finals):.6f} "
        f"+- {2 * se_final:.6f} (2 SE)"
    )
    return 0


def cmd_cdf(cfg: dict, meta_line: str) -> int:
    out = Path(str(cfg["out"]))
    instances: List[Tuple[QuboMatrix, dict]] = []
    if str(cfg["problem_dir"]):
        src = Path(str(cfg["problem_dir"]))
        paths = sorted(src.glob("*.qubo"))
        if not paths:
            raise CliError(f"no .qubo files in {src}")
        for path in paths:
            meta_path = path.with_suffix(".meta.json")
            meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
            instances.append((load_qubo(path), meta))
    else:
        params = GadgetParams(
            n_cut=int(cfg["n_cut"]),
            n_gadget=int(cfg["n_gadget"]),
            j_gadget=float(cfg["j_gadget"]),
            j_couple=float(cfg["j_couple"]),
            bias=float(cfg["bias"]),
            seed=int(cfg["seed"]),
        )
        rng = np.random.default_rng(int(cfg["seed"]))
        inst_dir = out / "instances"
        inst_dir.mkdir(parents=True, exist_ok=True)
        for k in range(int(cfg["count"])):
            inst = generate_gadget_problem(params, rng)
            save_qubo(inst.matrix, inst_dir / f"instance_{k:03d}.qubo")
            meta = {
                "sol": format_bits(inst.sol),
                "n_cut": params.n_cut,
                "n_gadget": params.n_gadget,
                "cut_ties": inst.cut_ties,
            }
            (inst_dir / f"instance_{k:03d}.meta.json").write_text(
                json.dumps(meta, sort_keys=True, indent=1) + "\n", encoding="utf-8"
            )
            instances.append((inst.matrix, meta))

    tasks = []
    for idx, (Q, meta) in enumerate(instances):
        truth = _truth_for(Q, meta)
        tasks.extend(
            _strategy_tasks(Q, truth, cfg, [int(cfg["p"])], cfg["strategies"],
                            keep_record=False, key_prefix=f"i{idx:03d}_")
        )
    results = _map_tasks(_strategy_worker, tasks, int(cfg["jobs"]))

    per_strategy: Dict[str, List[float]] = {s: [] for s in cfg["strategies"]}
    rows = []
    for idx, res in enumerate(results):
        instance_idx = idx // len(cfg["strategies"])
        rows.append((instance_idx, res["strategy"], res["success"], res["false_min"]))
        per_strategy[res["strategy"]].append(res["success"])
    _write_csv(out / "summary.csv", meta_line,
               ["instance", "strategy", "success_prob", "false_min_prob"], rows)
    for strategy, values in per_strategy.items():
        v, frac = empirical_cdf(values)
        _write_csv(out / f"cdf_{strategy}.csv", meta_line, ["value", "fraction"],
                   list(zip(v, frac)))
        print(f"{strategy:>11}: mean success {np.mean(values):.6f} over {len(values)} instances")
    if "thresholded" in per_strategy and "unmodified" in per_strategy:
        t = np.sort(per_strategy["thresholded"])
        u = np.sort(per_strategy["unmodified"])
        print(f"thresholded dominates unmodified per quantile: {bool(np.all(t >= u))}")
        print(f"lowest thresholded > best unmodified (informational): {bool(t[0] > u[-1])}")
    return 0


def cmd_phase_map(cfg: dict, meta_line: str) -> int:
    out = Path(str(cfg["out"]))
    Q, _meta = _resolve_problem(cfg)
    for key in ("true_state", "false_state"):
        if len(str(cfg[key])) != Q.n:
            raise CliError(f"{key} length {len(str(cfg[key]))} != problem size {Q.n}")
    r_min, r_max, points = float(cfg["r_min"]), float(cfg["r_max"]), int(cfg["r_points"])
    if not (0.0 < r_min < r_max < 1.0) or points < 2:
        raise CliError("need 0 < r_min < r_max < 1 and r_points >= 2")
    grid = np.linspace(r_min, r_max, points)
    pmap = phase_difference_map(
        Q,
        product_state(str(cfg["true_state"])),
        product_state(str(cfg["false_state"])),
        float(cfg["tau"]),
        grid,
    )
    rows = [
        (
            pmap.r_grid[i],
            pmap.r_grid[i] * pmap.tau,
            (1.0 - pmap.r_grid[i]) * pmap.tau,
            pmap.phase_true[i],
            pmap.phase_false[i],
            pmap.phase_true[i] - pmap.phase_false[i],
            bool(pmap.true_larger[i]),
        )
        for i in range(grid.size)
    ]
    _write_csv(out / "phase_map.csv", meta_line,
               ["r", "gamma", "beta", "phase_true", "phase_false", "phase_diff", "true_larger"],
               rows)
    changes = pmap.sign_changes()
    shown = ", ".join(f"{r:.6f}" for r in changes) if changes.size else "none"
    print(f"phase-preference crossings at r = {shown}")
    return 0


def cmd_three_qubit(cfg: dict, meta_line: str) -> int:
    out = Path(str(cfg["out"]))
    Q, meta = _resolve_problem(cfg)
    if Q.n != 3:
        raise CliError(f"three-qubit experiment needs a 3-qubit problem, got n={Q.n}")
    truth = _truth_for(Q, meta)
    metric_kind, metric_shots = parse_metric_mode(str(cfg["metric"]))
    zeta2 = float(cfg["zeta2"])
    variants = [("unmodified", None), (f"zeta2={zeta2:g}", np.array([1.0, 1.0, zeta2]))]
    columns = ["p", "variant", "p00_plus", "p00_minus", "p110_upper", "mean", "manifold_prob"]
    if metric_kind == "sampled":
        columns += ["se_p00_plus", "se_p00_minus", "se_p110_upper", "se_mean"]
    rows = []
    for p in cfg["p_values"]:
        schedule = linear_aqa_schedule(int(p), float(cfg["tau"]))
        for vi, (label, zeta) in enumerate(variants):
            if zeta is None:
                record = run_protocol(
                    Q, schedule, "unmodified", truth=truth,
                    layer_order=str(cfg["layer_order"]), keep_state=True,
                )
            else:
                record = run_fixed_zeta(
                    Q, schedule, zeta, truth=truth,
                    layer_order=str(cfg["layer_order"]), keep_state=True,
                )
            state = record.final_state
            if metric_kind == "sampled":
                rng = np.random.default_rng([int(cfg["seed"]), 3000 + int(p), vi])
                values, errors = three_qubit_sampled(state, metric_shots, rng)
                rows.append((p, label, values["p00_plus"], values["p00_minus"],
                             values["p110_upper"], values["mean"], record.success_prob,
                             errors["p00_plus"], errors["p00_minus"],
                             errors["p110_upper"], errors["mean"]))
            else:
                values = three_qubit_quantities(state)
                rows.append((p, label, values["p00_plus"], values["p00_minus"],
                             values["p110_upper"], values["mean"], record.success_prob))
    _write_csv(out / "three_qubit.csv", meta_line, columns, rows)
    print(f"wrote {len(rows)} rows -> {out/'three_qubit.csv'}")
    return 0


# --------------------------------------------------------------------------
# entry point

_COMMANDS = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "aqa-run": cmd_aqa_run,
    "aqa-sweep": cmd_aqa_sweep,
    "qaoa-run": cmd_qaoa_run,
    "cdf": cmd_cdf,
    "phase-map": cmd_phase_map,
    "three-qubit": cmd_three_qubit,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fsqaoa",
        description=__doc__.split("\n\n")[0],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"fsqaoa {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        keys = {**_COMMON_SCHEMA, **_SCHEMAS[name]}
        epilog = "configuration keys:\n" + "\n".join(
            f"  {key:<16} {help_} (default: {default!r})"
            for key, (_cast, default, help_) in sorted(keys.items())
        )
        sub = subs.add_parser(
            name, epilog=epilog, formatter_class=argparse.RawDescriptionHelpFormatter
        )
        sub.add_argument("--config", help="INI config file ([common] plus per-command sections)")
        sub.add_argument("--set", action="append", metavar="KEY=VALUE",
                         help="override one configuration key (repeatable)")
        sub.add_argument("--seed", type=int, help="shortcut for --set seed=...")
        sub.add_argument("--jobs", type=int, help="shortcut for --set jobs=...")
        sub.add_argument("--out", help="shortcut for --set out=...")
        sub.add_argument("--metric", help="shortcut for --set metric=...")
        sub.add_argument("--layer-order", dest="layer_order",
                         help="shortcut for --set layer_order=...")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    cmd = args.command
    try:
        cfg, text, sha = _effective_config(cmd, args)
        _out_dir(cfg, text)
        return _COMMANDS[cmd](cfg, _meta_line(cmd, cfg, sha))
    except (CliError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
