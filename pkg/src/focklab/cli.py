"""Command-line drivers for the verification suites.

Every command reads an optional JSON config overlaid on built-in
defaults, with flags winning over both.  Outputs are a CSV of per-trial
or per-grid-point rows plus a JSON summary; identical (config, seed)
pairs produce byte-identical files.  Exit codes: 0 all checks passed,
1 a mathematical claim failed, 2 configuration or I/O trouble.
"""

import argparse
import concurrent.futures
import copy
import csv
import json
import math
import os
import sys

from .channels import (
    AMPLIFIER_CROP_MARGIN,
    ChannelDims,
    ChannelKind,
    ChannelSpec,
    amplifier,
    apply_diagonal,
    attenuator,
)
from .cmoe import VERDICT_EQUALITY, VERDICT_VIOLATION, check_cmoe
from .entropy import spectral_distance
from .errors import ConfigError, DomainError, FockLabError, TruncationError
from .lemma import (
    LemmaGridSpec,
    amplifier_z_map,
    norm_ratio_log_derivative,
    phi,
    pq_norm_saturation_probe,
    scan_ratio_maximizer,
    solve_p_of_q,
    verify_lemma_inequalities,
)
from .sampling import (
    SamplerConfig,
    _splitmix64,
    adversarial_search,
    draw_state,
    state_to_json,
    substream,
)
from .thermal import thermal_state, thermal_tail_cutoff

SCHEMA_VERSION = 1
EXIT_OK = 0
EXIT_CLAIM_FAILED = 1
EXIT_CONFIG = 2

# q at or above this needs --exploratory; the scalar inequalities are
# only guaranteed on 1 < p < q < 3/2
ORDER_GUARANTEE_LIMIT = 1.5

THERMAL_CSV = "thermal_laws.csv"
THERMAL_SUMMARY = "thermal_laws_summary.json"
CMOE_CSV = "cmoe_trials.csv"
CMOE_SUMMARY = "cmoe_summary.json"
LEMMA_CSV = "lemma_solver.csv"
LEMMA_SUMMARY = "lemma_report.json"
REPORT_FILE = "report.json"

THERMAL_COLUMNS = [
    "channel",
    "parameter",
    "env_energy",
    "input_energy",
    "input_cutoff",
    "output_cutoff",
    "predicted_energy",
    "spectral_distance",
    "output_deficit",
    "passed",
]
CMOE_COLUMNS = [
    "suite",
    "channel",
    "parameter",
    "env_energy",
    "cutoff",
    "trial",
    "state_kind",
    "input_entropy",
    "output_entropy",
    "bound",
    "gap",
    "truncation_margin",
    "verdict",
]
LEMMA_COLUMNS = [
    "z_bar",
    "gain",
    "q",
    "p",
    "residual",
    "prefactor",
    "maximizer_z",
    "maximizer_offset",
    "exploratory",
    "passed",
]

DEFAULT_CONFIG = {
    "schema_version": SCHEMA_VERSION,
    "seed": 20260823,
    "jobs": 1,
    "out": "runs/latest",
    "thermal": {
        "input_energies": [0.0, 0.5, 1.0, 2.0],
        "transmissivities": [0.3, 0.7],
        "gains": [1.5, 2.0],
        "env_energies": [0.0, 1.0],
        "tail_target": 1e-14,
        "tolerance": 1e-7,
        "max_deficit": 1e-9,
        "fixed_cutoff": None,
    },
    "cmoe": {
        "trials_per_channel": 10000,
        "cutoffs": [16, 24],
        "channels": [
            {"kind": "attenuator", "transmissivity": 0.7, "env_energy": 0.5},
            {"kind": "amplifier", "gain": 2.0, "env_energy": 0.5},
            {"kind": "additive", "env_energy": 1.0},
            {"kind": "contravariant", "gain": 2.0, "env_energy": 0.5},
        ],
        "adversarial_searches": 10,
        "adversarial_iterations": 200,
        "adversarial_cutoff": 16,
        "equality_input_energies": [0.0, 0.5, 1.0, 2.0],
        "equality_transmissivities": [0.3, 0.7],
        "equality_gains": [1.5, 2.0],
        "equality_env_energies": [0.0, 1.0],
        "equality_tail_target": 1e-14,
        "thermal_only": False,
    },
    "lemma": {
        "grid_z_points": 199,
        "grid_order_points": 25,
        "grid_gains": [1.25, 1.5, 2.0, 4.0],
        "solver_z": [0.25, 0.5, 0.75],
        "solver_gains": [1.5, 2.0],
        "solver_q": [1.1, 1.3, 1.49],
        "trend_q": [1.1, 1.01, 1.001],
        "probe_gain": 2.0,
        "probe_p": 1.2,
        "probe_q": 1.35,
        "probe_cutoff": 24,
        "probe_trials": 500,
        "exploratory_q": [1.6, 2.0],
    },
}


def fmt(value) -> str:
    """Fixed 17-significant-digit float serialization for CSV cells."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.17g" % value
    if value is None:
        return ""
    return str(value)


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict) and isinstance(val, dict):
            out[key] = _merge(base[key], val, where)
        else:
            out[key] = val
    return out


def load_config(args) -> dict:
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                user = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {args.config} is not valid JSON: {exc}")
        if not isinstance(user, dict):
            raise ConfigError("config root must be a JSON object")
        cfg = _merge(cfg, user)
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = args.seed
    if getattr(args, "jobs", None) is not None:
        cfg["jobs"] = args.jobs
    if getattr(args, "out", None) is not None:
        cfg["out"] = args.out
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    if int(cfg["schema_version"]) != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {cfg['schema_version']!r}")
    if not isinstance(cfg["seed"], int) or cfg["seed"] < 0:
        raise ConfigError("seed must be a nonnegative integer")
    if not isinstance(cfg["jobs"], int) or cfg["jobs"] < 1:
        raise ConfigError("jobs must be a positive integer")
    th = cfg["thermal"]
    for key in ("tail_target", "tolerance", "max_deficit"):
        if not th[key] > 0.0:
            raise ConfigError(f"thermal.{key} must be positive")
    cm = cfg["cmoe"]
    if cm["trials_per_channel"] < 1:
        raise ConfigError("cmoe.trials_per_channel must be >= 1")
    if not cm["cutoffs"]:
        raise ConfigError("cmoe.cutoffs must not be empty")
    if not cm["channels"]:
        raise ConfigError("cmoe.channels must not be empty")
    for ch in cm["channels"]:
        parse_channel(ch)


def parse_channel(entry: dict) -> ChannelSpec:
    try:
        kind = ChannelKind(entry["kind"])
    except (KeyError, ValueError):
        raise ConfigError(f"bad channel entry {entry!r}")
    try:
        return ChannelSpec(
            kind=kind,
            transmissivity=entry.get("transmissivity"),
            gain=entry.get("gain"),
            env_energy=entry.get("env_energy", 0.0),
        )
    except FockLabError as exc:
        raise ConfigError(f"bad channel entry {entry!r}: {exc}")


def ensure_outdir(cfg: dict) -> str:
    out = cfg["out"]
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}")
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory {out} is not writable")
    return out


def write_csv(path: str, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(row[c]) for c in columns])


def write_summary(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# verify-thermal-laws
# ---------------------------------------------------------------------------


def _cutoff(energy: float, tail: float) -> int:
    return max(2, thermal_tail_cutoff(energy, tail))


def thermal_grid_dims(spec: ChannelSpec, input_energy: float, tail: float):
    """Input cutoff and dilation sizes tuned to a thermal input's tails."""
    c_in = _cutoff(input_energy, tail)
    e = spec.env_energy
    if spec.kind == ChannelKind.ATTENUATOR:
        k_env = _cutoff(e, tail) if e > 0.0 else 1
        d = c_in + k_env - 1
        return c_in, ChannelDims(d_sys=d, d_env=d, d_out=d)
    kap = spec.gain
    covariant_energy = kap * input_energy + (kap - 1.0) * (e + 1.0)
    env_side_energy = (kap - 1.0) * (input_energy + 1.0) + kap * e
    c_cov = _cutoff(covariant_energy, tail)
    c_env = _cutoff(env_side_energy, tail)
    if spec.kind == ChannelKind.AMPLIFIER:
        return c_in, ChannelDims(
            d_sys=c_cov + AMPLIFIER_CROP_MARGIN,
            d_env=c_env + AMPLIFIER_CROP_MARGIN,
            d_out=c_cov,
        )
    if spec.kind == ChannelKind.CONTRAVARIANT:
        return c_in, ChannelDims(
            d_sys=c_cov + AMPLIFIER_CROP_MARGIN,
            d_env=c_env + AMPLIFIER_CROP_MARGIN,
            d_out=c_env,
        )
    raise DomainError("additive noise is sized per factor")


def apply_thermal_grid_point(spec: ChannelSpec, input_energy: float, tail: float, fixed_cutoff):
    """Push a thermal input through the channel with tuned dimensions.

    Returns (input_cutoff, output DiagonalState).  With fixed_cutoff the
    input is truncated there instead, which is the deliberate
    small-cutoff failure path.
    """
    if spec.kind == ChannelKind.ADDITIVE:
        e = spec.env_energy
        att = attenuator(1.0 / (e + 1.0), 0.0)
        amp = amplifier(e + 1.0, 0.0)
        c_in, dims_att = thermal_grid_dims(att, input_energy, tail)
        if fixed_cutoff is not None:
            c_in = int(fixed_cutoff)
            d = c_in
            dims_att = ChannelDims(d_sys=d, d_env=d, d_out=d)
        state = thermal_state(input_energy, c_in)
        mid = apply_diagonal(att, state, dims_att)
        mid_energy = input_energy / (e + 1.0)
        if fixed_cutoff is not None:
            d = int(fixed_cutoff)
            dims_amp = ChannelDims(d_sys=d, d_env=d, d_out=d)
        else:
            _, dims_amp = thermal_grid_dims(amp, mid_energy, tail)
            dims_amp = ChannelDims(
                d_sys=max(dims_amp.d_sys, mid.dim + AMPLIFIER_CROP_MARGIN),
                d_env=dims_amp.d_env,
                d_out=max(dims_amp.d_out, mid.dim),
            )
        return c_in, apply_diagonal(amp, mid, dims_amp)
    c_in, dims = thermal_grid_dims(spec, input_energy, tail)
    if fixed_cutoff is not None:
        c_in = int(fixed_cutoff)
        dims = ChannelDims(d_sys=c_in, d_env=c_in, d_out=c_in)
    state = thermal_state(input_energy, c_in)
    return c_in, apply_diagonal(spec, state, dims)


def thermal_grid_channels(section: dict):
    chans = []
    for lam in section["transmissivities"]:
        for e in section["env_energies"]:
            chans.append(attenuator(lam, e))
    for kap in section["gains"]:
        for e in section["env_energies"]:
            chans.append(amplifier(kap, e))
    for e in section["env_energies"]:
        chans.append(ChannelSpec(kind=ChannelKind.ADDITIVE, env_energy=e))
    for kap in section["gains"]:
        for e in section["env_energies"]:
            chans.append(ChannelSpec(kind=ChannelKind.CONTRAVARIANT, gain=kap, env_energy=e))
    return chans


def cmd_verify_thermal_laws(cfg: dict) -> int:
    out_dir = ensure_outdir(cfg)
    section = cfg["thermal"]
    channels = thermal_grid_channels(section)
    if not channels or not section["input_energies"]:
        raise ConfigError("thermal grid is empty")
    tol = section["tolerance"]
    max_deficit = section["max_deficit"]
    rows = []
    failures = []
    for spec in channels:
        for e_in in section["input_energies"]:
            predicted_energy = spec.output_energy(e_in)
            try:
                c_in, out = apply_thermal_grid_point(
                    spec, e_in, section["tail_target"], section["fixed_cutoff"]
                )
                predicted = thermal_state(predicted_energy, out.dim)
                dist = spectral_distance(out, predicted)
                deficit = out.trace_deficit
                out_dim = out.dim
            except TruncationError as exc:
                if section["fixed_cutoff"] is not None:
                    c_in = int(section["fixed_cutoff"])
                else:
                    c_in = _cutoff(e_in, section["tail_target"])
                dist = float("nan")
                deficit = exc.deficit
                out_dim = 0
            passed = dist <= tol and deficit <= max_deficit
            if not passed:
                failures.append(
                    f"{spec.kind.value} parameter={fmt(spec.parameter)} env={fmt(spec.env_energy)}"
                    f" input_energy={fmt(e_in)}: distance={fmt(dist)} deficit={fmt(deficit)}"
                )
            rows.append(
                {
                    "channel": spec.kind.value,
                    "parameter": spec.parameter,
                    "env_energy": spec.env_energy,
                    "input_energy": e_in,
                    "input_cutoff": c_in,
                    "output_cutoff": out_dim,
                    "predicted_energy": predicted_energy,
                    "spectral_distance": dist,
                    "output_deficit": deficit,
                    "passed": passed,
                }
            )
    write_csv(os.path.join(out_dir, THERMAL_CSV), THERMAL_COLUMNS, rows)
    finite = [r["spectral_distance"] for r in rows if not math.isnan(r["spectral_distance"])]
    summary = {
        "schema_version": SCHEMA_VERSION,
        "command": "verify-thermal-laws",
        "seed": cfg["seed"],
        "config": section,
        "rows": len(rows),
        "max_spectral_distance": max(finite) if finite else float("nan"),
        "max_output_deficit": max(r["output_deficit"] for r in rows),
        "failures": failures,
        "passed": not failures,
    }
    write_summary(os.path.join(out_dir, THERMAL_SUMMARY), summary)
    if failures:
        for line in failures:
            print(f"FAIL {line}", file=sys.stderr)
        return EXIT_CLAIM_FAILED
    print(
        f"verify-thermal-laws: {len(rows)} grid points, "
        f"max spectral distance {summary['max_spectral_distance']:.3e}, "
        f"max deficit {summary['max_output_deficit']:.3e}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify-cmoe
# ---------------------------------------------------------------------------

STATE_KINDS = ("mixed", "pure", "diagonal", "pinned")

# offsets separating the substream families used by the suites
ADVERSARIAL_STREAM_BASE = 1 << 40


def _channel_row(spec: ChannelSpec) -> dict:
    return {
        "channel": spec.kind.value,
        "parameter": spec.parameter,
        "env_energy": spec.env_energy,
    }


def _cmoe_trial(seed: int, spec_entry: dict, cutoffs, trials_base: int, index: int) -> dict:
    """One random-suite trial; depends only on (seed, global index)."""
    spec = parse_channel(spec_entry)
    cutoff = cutoffs[index % len(cutoffs)]
    kind = STATE_KINDS[(index // len(cutoffs)) % len(STATE_KINDS)]
    stream = trials_base + index
    if kind == "pinned":
        rng = substream(seed, stream)
        target = 0.05 + rng.random() * (0.9 * math.log(cutoff) - 0.05)
        cfg = SamplerConfig(seed=seed, cutoff=cutoff, kind=kind, target_entropy=target)
    else:
        cfg = SamplerConfig(seed=seed, cutoff=cutoff, kind=kind)
    state = draw_state(cfg, stream)
    rep = check_cmoe(spec, state)
    row = {
        "suite": "random",
        **_channel_row(spec),
        "cutoff": cutoff,
        "trial": index,
        "state_kind": kind,
        "input_entropy": rep.input_entropy,
        "output_entropy": rep.output_entropy,
        "bound": rep.bound,
        "gap": rep.gap,
        "truncation_margin": rep.truncation_margin,
        "verdict": rep.verdict_label,
    }
    payload = None
    if rep.verdict == VERDICT_VIOLATION:
        dense = state if hasattr(state, "matrix") else state.to_density()
        payload = state_to_json(dense, seed, spec)
    return {"row": row, "counterexample": payload}


def _cmoe_trial_batch(args) -> list:
    seed, spec_entry, cutoffs, trials_base, indices = args
    return [_cmoe_trial(seed, spec_entry, cutoffs, trials_base, i) for i in indices]


def _adversarial_job(args) -> dict:
    seed, spec_entry, cutoff, iterations, stream_index = args
    spec = parse_channel(spec_entry)
    rng = substream(seed, ADVERSARIAL_STREAM_BASE + stream_index)
    target = 0.2 + rng.random() * (0.9 * math.log(cutoff) - 0.2)
    derived = _splitmix64(seed ^ _splitmix64(ADVERSARIAL_STREAM_BASE + stream_index))
    result = adversarial_search(spec, target, iterations, cutoff, derived)
    rep = result.best_report
    row = {
        "suite": "adversarial",
        **_channel_row(spec),
        "cutoff": cutoff,
        "trial": stream_index,
        "state_kind": "search-best",
        "input_entropy": rep.input_entropy,
        "output_entropy": rep.output_entropy,
        "bound": rep.bound,
        "gap": rep.gap,
        "truncation_margin": rep.truncation_margin,
        "verdict": rep.verdict_label,
    }
    payload = None
    if rep.verdict == VERDICT_VIOLATION:
        payload = state_to_json(result.best_state, seed, spec)
    return {"row": row, "counterexample": payload}


def _equality_rows(cfg: dict) -> list:
    section = cfg["cmoe"]
    tail = section["equality_tail_target"]
    grid_section = {
        "transmissivities": section["equality_transmissivities"],
        "gains": section["equality_gains"],
        "env_energies": section["equality_env_energies"],
    }
    rows = []
    trial = 0
    for spec in thermal_grid_channels(grid_section):
        for e_in in section["equality_input_energies"]:
            c_in = _cutoff(e_in, tail)
            state = thermal_state(e_in, c_in)
            if spec.kind == ChannelKind.ADDITIVE:
                rep = check_cmoe(spec, state)
            else:
                _, dims = thermal_grid_dims(spec, e_in, tail)
                rep = check_cmoe(spec, state, dims)
            rows.append(
                {
                    "suite": "equality",
                    **_channel_row(spec),
                    "cutoff": c_in,
                    "trial": trial,
                    "state_kind": "thermal",
                    "input_entropy": rep.input_entropy,
                    "output_entropy": rep.output_entropy,
                    "bound": rep.bound,
                    "gap": rep.gap,
                    "truncation_margin": rep.truncation_margin,
                    "verdict": rep.verdict_label,
                }
            )
            trial += 1
    return rows


def _warm_caches(channels, cutoffs) -> None:
    """Build every dilation the trial suites will need, pre-fork."""
    for entry in channels:
        spec = parse_channel(entry)
        for cutoff in cutoffs:
            probe = thermal_state(0.5, cutoff)
            apply_diagonal(spec, probe)


def _run_batches(jobs: int, worker, tasks: list) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        return [worker(t) for t in tasks]
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, tasks))


def cmd_verify_cmoe(cfg: dict) -> int:
    out_dir = ensure_outdir(cfg)
    section = cfg["cmoe"]
    seed = cfg["seed"]
    jobs = cfg["jobs"]
    rows = []
    counterexamples = []

    rows.extend(_equality_rows(cfg))
    equality_bad = [
        r for r in rows if r["suite"] == "equality" and r["verdict"] != VERDICT_EQUALITY
    ]

    if not section["thermal_only"]:
        cutoffs = [int(c) for c in section["cutoffs"]]
        trials = int(section["trials_per_channel"])
        _warm_caches(section["channels"], cutoffs)
        for ch_idx, entry in enumerate(section["channels"]):
            trials_base = ch_idx * trials
            chunk = max(1, trials // max(1, jobs * 8))
            tasks = [
                (seed, entry, cutoffs, trials_base, list(range(lo, min(lo + chunk, trials))))
                for lo in range(0, trials, chunk)
            ]
            for batch in _run_batches(jobs, _cmoe_trial_batch, tasks):
                for item in batch:
                    rows.append(item["row"])
                    if item["counterexample"] is not None:
                        counterexamples.append(item["counterexample"])
        searches = int(section["adversarial_searches"])
        tasks = []
        for ch_idx, entry in enumerate(section["channels"]):
            for s in range(searches):
                tasks.append(
                    (
                        seed,
                        entry,
                        int(section["adversarial_cutoff"]),
                        int(section["adversarial_iterations"]),
                        ch_idx * searches + s,
                    )
                )
        for item in _run_batches(jobs, _adversarial_job, tasks):
            rows.append(item["row"])
            if item["counterexample"] is not None:
                counterexamples.append(item["counterexample"])

    write_csv(os.path.join(out_dir, CMOE_CSV), CMOE_COLUMNS, rows)

    per_channel = {}
    for r in rows:
        key = f"{r['channel']}|{fmt(r['parameter'])}|{fmt(r['env_energy'])}"
        rec = per_channel.setdefault(
            key,
            {
                "channel": r["channel"],
                "parameter": r["parameter"],
                "env_energy": r["env_energy"],
                "trials": 0,
                "suppressed": 0,
                "violations": 0,
                "min_gap": math.inf,
                "min_gap_margin": 0.0,
            },
        )
        rec["trials"] += 1
        if r["verdict"] == "Suppressed":
            rec["suppressed"] += 1
            continue
        if r["verdict"] == VERDICT_VIOLATION:
            rec["violations"] += 1
        if r["gap"] < rec["min_gap"]:
            rec["min_gap"] = r["gap"]
            rec["min_gap_margin"] = r["truncation_margin"]
    for rec in per_channel.values():
        if math.isinf(rec["min_gap"]):
            rec["min_gap"] = float("nan")

    counterexample_paths = []
    for i, payload in enumerate(counterexamples):
        path = os.path.join(out_dir, f"counterexample_{i}.json")
        with open(path, "w") as fh:
            json.dump(payload, fh, sort_keys=True, indent=2)
            fh.write("\n")
        counterexample_paths.append(path)

    violations = sum(rec["violations"] for rec in per_channel.values())
    passed = violations == 0 and not equality_bad
    summary = {
        "schema_version": SCHEMA_VERSION,
        "command": "verify-cmoe",
        "seed": seed,
        "config": section,
        "rows": len(rows),
        "per_channel": per_channel,
        "equality_failures": len(equality_bad),
        "violations": violations,
        "counterexamples": counterexample_paths,
        "passed": passed,
    }
    write_summary(os.path.join(out_dir, CMOE_SUMMARY), summary)
    if not passed:
        if equality_bad:
            print(f"FAIL {len(equality_bad)} thermal equality rows off bound", file=sys.stderr)
        for path in counterexample_paths:
            print(f"FAIL violation candidate recorded at {path}", file=sys.stderr)
        return EXIT_CLAIM_FAILED
    worst = min(
        (rec["min_gap"] for rec in per_channel.values() if not math.isnan(rec["min_gap"])),
        default=float("nan"),
    )
    print(
        f"verify-cmoe: {len(rows)} rows, min gap {worst:.3e}, "
        f"0 violation candidates"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify-lemma
# ---------------------------------------------------------------------------


def _solver_row(seed_zbar: float, gain: float, q: float, exploratory: bool) -> dict:
    z_out = float(amplifier_z_map(seed_zbar, gain))
    try:
        p = solve_p_of_q(seed_zbar, gain, q)
        residual = abs(float(phi(seed_zbar, p)) - float(phi(z_out, q)))
        prefactor = (q / (q - 1.0)) * ((p - 1.0) / p)
        z_star, _ = scan_ratio_maximizer(gain, p, q)
        offset = abs(z_star - seed_zbar)
        passed = (
            residual <= 1e-12
            and 1.0 < p < q
            and 0.0 <= prefactor <= 1.0
            and offset <= 1.0 / 2001.0
        )
    except FockLabError:
        p = float("nan")
        residual = float("nan")
        prefactor = float("nan")
        z_star = float("nan")
        offset = float("nan")
        passed = False
    return {
        "z_bar": seed_zbar,
        "gain": gain,
        "q": q,
        "p": p,
        "residual": residual,
        "prefactor": prefactor,
        "maximizer_z": z_star,
        "maximizer_offset": offset,
        "exploratory": exploratory,
        "passed": passed,
    }


def cmd_verify_lemma(cfg: dict, exploratory: bool) -> int:
    out_dir = ensure_outdir(cfg)
    section = cfg["lemma"]
    for q in section["solver_q"]:
        if q >= ORDER_GUARANTEE_LIMIT and not exploratory:
            raise ConfigError(
                f"q={q} is outside the guaranteed region (q < {ORDER_GUARANTEE_LIMIT}); "
                "rerun with --exploratory"
            )
    grid = LemmaGridSpec(
        z_points=int(section["grid_z_points"]),
        order_points=int(section["grid_order_points"]),
        gains=tuple(float(g) for g in section["grid_gains"]),
    )
    grid_report = verify_lemma_inequalities(grid, strict=False)

    solver_rows = []
    for zb in section["solver_z"]:
        for gain in section["solver_gains"]:
            for q in section["solver_q"]:
                solver_rows.append(_solver_row(zb, gain, q, q >= ORDER_GUARANTEE_LIMIT))
    if exploratory:
        for zb in section["solver_z"]:
            for gain in section["solver_gains"]:
                for q in section["exploratory_q"]:
                    solver_rows.append(_solver_row(zb, gain, q, True))
    write_csv(os.path.join(out_dir, LEMMA_CSV), LEMMA_COLUMNS, solver_rows)

    trend = []
    for q in section["trend_q"]:
        p = solve_p_of_q(0.5, 2.0, q)
        trend.append({"q": q, "p_minus_one": p - 1.0})
    trend_ok = all(
        trend[i]["p_minus_one"] > trend[i + 1]["p_minus_one"] for i in range(len(trend) - 1)
    )

    # boundary behavior of the ratio derivative: climbing at z=0, falling
    # off a cliff toward z=1
    d0 = float(norm_ratio_log_derivative(1e-9, 2.0, 1.2, 1.35))
    d1 = float(norm_ratio_log_derivative(1.0 - 1e-3, 2.0, 1.2, 1.35))
    boundary_ok = d0 > 0.0 and d1 < -1.0

    probe = pq_norm_saturation_probe(
        gain=float(section["probe_gain"]),
        p=float(section["probe_p"]),
        q=float(section["probe_q"]),
        cutoff=int(section["probe_cutoff"]),
        trials=int(section["probe_trials"]),
        seed=cfg["seed"],
        strict=False,
    )

    strict_solver_rows = [r for r in solver_rows if not r["exploratory"]]
    solver_ok = all(r["passed"] for r in strict_solver_rows)
    passed = (
        grid_report.all_hold and solver_ok and trend_ok and boundary_ok and not probe.exceeded
    )
    summary = {
        "schema_version": SCHEMA_VERSION,
        "command": "verify-lemma",
        "seed": cfg["seed"],
        "config": section,
        "exploratory": exploratory,
        "grid": grid_report.to_dict(),
        "solver_rows": len(solver_rows),
        "solver_ok": solver_ok,
        "trend": trend,
        "trend_ok": trend_ok,
        "boundary_derivative_at_zero": d0,
        "boundary_derivative_near_one": d1,
        "boundary_ok": boundary_ok,
        "probe": {
            "gain": probe.gain,
            "p": probe.p,
            "q": probe.q,
            "cutoff": probe.cutoff,
            "trials": probe.trials,
            "thermal_log_ceiling": probe.thermal_log_ceiling,
            "best_trial_log_ratio": probe.best_trial_log_ratio,
            "worst_margin": probe.worst_margin,
            "exceeded": probe.exceeded,
        },
        "passed": passed,
    }
    write_summary(os.path.join(out_dir, LEMMA_SUMMARY), summary)
    if not passed:
        if not grid_report.all_hold:
            bad = {
                k: v for k, v in grid_report.margins.items() if not v["min_margin"] > 0.0
            }
            print(f"FAIL lemma grid margins: {bad}", file=sys.stderr)
        for r in strict_solver_rows:
            if not r["passed"]:
                print(
                    f"FAIL solver at z_bar={r['z_bar']} gain={r['gain']} q={r['q']}",
                    file=sys.stderr,
                )
        if probe.exceeded:
            print("FAIL saturation probe exceeded the thermal ceiling", file=sys.stderr)
        return EXIT_CLAIM_FAILED
    print(
        f"verify-lemma: {grid_report.points_checked} grid points, "
        f"fd residual {grid_report.fd_max_residual:.3e}, "
        f"probe margin {probe.worst_margin:.3e}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

CLAIM_DESCRIPTIONS = {
    "thermal": "thermal inputs map to thermal outputs with the predicted mean energy",
    "cmoe": "thermal inputs minimize output entropy at fixed input entropy; "
    "equality holds on the thermal family",
    "lemma": "scalar inequality family, stationary-order solver, and "
    "norm-ratio saturation ceiling",
}


def _read_csv_checked(path: str, expected_columns) -> list:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != expected_columns:
            raise ConfigError(f"corrupted CSV {path}: bad header at line 1")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(expected_columns):
                raise ConfigError(f"corrupted CSV {path}: wrong column count at line {lineno}")
            rows.append(row)
    return rows


def cmd_report(cfg: dict) -> int:
    out_dir = cfg["out"]
    if not os.path.isdir(out_dir):
        raise ConfigError(f"output directory {out_dir} does not exist")
    suites = []
    found = 0

    def load_suite(name: str, summary_file: str, csv_file, columns):
        nonlocal found
        spath = os.path.join(out_dir, summary_file)
        if not os.path.exists(spath):
            suites.append({"suite": name, "claim": CLAIM_DESCRIPTIONS[name], "status": "SKIPPED"})
            return
        with open(spath) as fh:
            try:
                summary = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"corrupted summary {spath}: {exc}")
        if csv_file is not None:
            cpath = os.path.join(out_dir, csv_file)
            if os.path.exists(cpath):
                _read_csv_checked(cpath, columns)
        found += 1
        suites.append(
            {
                "suite": name,
                "claim": CLAIM_DESCRIPTIONS[name],
                "status": "PASS" if summary.get("passed") else "FAIL",
                "summary": summary,
            }
        )

    load_suite("thermal", THERMAL_SUMMARY, THERMAL_CSV, THERMAL_COLUMNS)
    load_suite("cmoe", CMOE_SUMMARY, CMOE_CSV, CMOE_COLUMNS)
    load_suite("lemma", LEMMA_SUMMARY, LEMMA_CSV, LEMMA_COLUMNS)

    if found == 0:
        raise ConfigError(f"no suite outputs found under {out_dir}")

    overall = "PASS"
    if any(s["status"] == "FAIL" for s in suites):
        overall = "FAIL"
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "report",
        "seed": cfg["seed"],
        "overall": overall,
        "suites": suites,
    }
    write_summary(os.path.join(out_dir, REPORT_FILE), payload)
    for s in suites:
        print(f"{s['status']:7s} {s['suite']}: {s['claim']}")
    print(f"overall: {overall}")
    return EXIT_OK if overall == "PASS" else EXIT_CLAIM_FAILED


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="focklab",
        description="Verification suites for truncated-Fock-space Gaussian channels",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("verify-thermal-laws", "verify-cmoe", "verify-lemma", "report"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file overlaid on defaults")
        p.add_argument("--seed", type=int, help="base RNG seed")
        p.add_argument("--jobs", type=int, help="worker process count")
        p.add_argument("--out", help="output directory")
        if name == "verify-lemma":
            p.add_argument(
                "--exploratory",
                action="store_true",
                help="also attempt orders outside the guaranteed q < 3/2 region",
            )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        if args.command == "verify-thermal-laws":
            return cmd_verify_thermal_laws(cfg)
        if args.command == "verify-cmoe":
            return cmd_verify_cmoe(cfg)
        if args.command == "verify-lemma":
            return cmd_verify_lemma(cfg, getattr(args, "exploratory", False))
        return cmd_report(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
