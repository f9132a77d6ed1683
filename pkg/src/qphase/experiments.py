"""Seeded experiment runner.

A config is a flat mapping of dotted keys (nested JSON objects are flattened
on load). Every trial draws from its own generator derived from
``(seed, trial_index)``, so outputs do not depend on execution order or on
the number of worker processes.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import grover, noise, qec
from .errors import ConfigError, InvalidArgument
from .statevec import RegisterState, format_state

log = logging.getLogger(__name__)

GENERATOR_FAMILY = (
    f"numpy-{np.__version__}/PCG64/SeedSequence(entropy=seed, spawn_key=(trial,))"
)

EXPERIMENTS = (
    "grover",
    "grover-sensitivity",
    "init-noise",
    "qec-shor",
    "qec-steane",
    "stats",
    "decoherence",
    "phase-walk",
)


def derive_trial_stream(seed: int, trial_index: int) -> np.random.Generator:
    """Generator for one trial: PCG64 seeded by ``SeedSequence(seed, spawn_key=(trial,))``."""
    if not 0 <= seed < 2**64:
        raise InvalidArgument(f"seed must be a 64-bit unsigned integer, got {seed}")
    if trial_index < 0:
        raise InvalidArgument("trial_index must be >= 0")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial_index,))))


# -- configuration -------------------------------------------------------------


def _logical(value):
    if isinstance(value, str):
        parts = value.split(",")
    else:
        parts = list(value)
    if len(parts) != 2:
        raise ValueError("expected two comma-separated amplitudes a,b")
    return tuple(complex(str(p).strip().replace(" ", "")) if isinstance(p, str) else complex(p) for p in parts)


def _bool(value):
    if isinstance(value, bool):
        return value
    if str(value).lower() in ("1", "true", "yes", "on"):
        return True
    if str(value).lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _float_or_list(value):
    if isinstance(value, str):
        return [float(v) for v in value.split(",")]
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    return [float(value)]


def _int(value):
    if isinstance(value, bool):
        raise ValueError("booleans are not integers")
    if isinstance(value, float) and not value.is_integer():
        raise ValueError(f"not an integer: {value!r}")
    return int(value)


# key -> (parser, help)
KEYS: dict[str, tuple[Callable, str]] = {
    "experiment": (str, "experiment name"),
    "n_qubits": (_int, "register size"),
    "trials": (_int, "number of trials (draws for stats/phase-walk)"),
    "seed": (_int, "64-bit master seed"),
    "workers": (_int, "worker processes for trials"),
    "marked": (_int, "marked basis index for Grover"),
    "iterations": (_int, "Grover rounds (default round(pi/4 sqrt N))"),
    "eps": (float, "oracle phase error in radians"),
    "sigma": (float, "per-qubit rotation error std for QEC stress"),
    "logical": (_logical, "logical amplitudes a,b"),
    "error_mode": (str, "rotation or haar"),
    "threshold": (float, "component-count probability threshold"),
    "t": (_float_or_list, "time(s) for the decoherence experiment"),
    "theta_k": (float, "threshold angle for the phase-walk exceedance probability"),
    "init_phase.mode": (str, "per_qubit or per_basis_state"),
    "init_phase.sigma": (float, "initial phase std"),
    "init_phase.uniform": (_bool, "draw initial phases uniformly on [0, 2pi)"),
    "gate_phase.sigma": (float, "unknown phase std per Grover gate"),
    "walk.s": (float, "phase walk step size"),
    "walk.m": (_int, "phase walk steps (per Grover round for Grover experiments)"),
    "walk.tau": (float, "phase walk step time"),
    "walk.mode": (str, "per_qubit or per_basis_state walk increments in Grover"),
    "decoherence.t_d": (float, "decoherence time"),
    "decoherence.lambda": (float, "decay rate for the decay-probability law"),
    "decoherence.dt": (float, "time per Grover round for dephasing"),
    "stats.family": (str, "bose_einstein, fermi_dirac or maxwell_boltzmann"),
    "stats.N": (_int, "number of cells"),
    "stats.n": (_int, "number of error objects"),
}

DEFAULTS = {"trials": 1, "seed": 0, "workers": 1}


def _flatten(obj: dict, prefix: str = "") -> dict:
    flat = {}
    for key, value in obj.items():
        path = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, path + "."))
        else:
            flat[path] = value
    return flat


@dataclass(frozen=True)
class ExperimentConfig:
    params: dict

    @classmethod
    def from_mapping(cls, mapping: dict) -> ExperimentConfig:
        flat = _flatten(mapping)
        params = dict(DEFAULTS)
        for key, value in flat.items():
            if key not in KEYS:
                raise ConfigError(key, "unknown key")
            if value is None:
                continue
            parser = KEYS[key][0]
            try:
                params[key] = parser(value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(key, f"invalid value {value!r}: {exc}") from None
        if "experiment" not in params:
            raise ConfigError("experiment", "missing")
        if params["experiment"] not in EXPERIMENTS:
            raise ConfigError("experiment", f"unknown experiment {params['experiment']!r}; choose from {EXPERIMENTS}")
        if params["trials"] < 1:
            raise ConfigError("trials", "must be >= 1")
        if not 0 <= params["seed"] < 2**64:
            raise ConfigError("seed", "must be a 64-bit unsigned integer")
        if params["workers"] < 1:
            raise ConfigError("workers", "must be >= 1")
        return cls(params)

    @classmethod
    def from_json(cls, path) -> ExperimentConfig:
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError("", f"{path}: invalid JSON ({exc})") from None
        except OSError as exc:
            raise ConfigError("", f"cannot read {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("", "config must be a JSON object")
        return cls.from_mapping(data)

    def with_overrides(self, overrides: dict) -> ExperimentConfig:
        merged = dict(self.params)
        merged.update({k: v for k, v in overrides.items() if v is not None})
        return ExperimentConfig.from_mapping(merged)

    @property
    def experiment(self) -> str:
        return self.params["experiment"]

    @property
    def seed(self) -> int:
        return self.params["seed"]

    @property
    def trials(self) -> int:
        return self.params["trials"]

    def get(self, key, default=None):
        return self.params.get(key, default)

    def require(self, key):
        if key not in self.params:
            raise ConfigError(key, f"required for experiment {self.experiment!r}")
        return self.params[key]

    def echo(self) -> dict:
        out = {}
        for key, value in sorted(self.params.items()):
            if isinstance(value, tuple):
                value = [_json_number(v) for v in value]
            out[key] = value
        return out


def _json_number(v):
    if isinstance(v, complex):
        return v.real if v.imag == 0 else [v.real, v.imag]
    return v


def _build(path: str, factory, *args, **kwargs):
    try:
        return factory(*args, **kwargs)
    except InvalidArgument as exc:
        raise ConfigError(path, str(exc)) from None


# -- summary -------------------------------------------------------------------


def aggregate(values) -> dict:
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    mean = float(values.mean())
    std = float(values.std(ddof=1)) if n > 1 else 0.0
    half = 1.96 * std / math.sqrt(n)
    return {
        "count": n,
        "mean": mean,
        "std": std,
        "min": float(values.min()),
        "max": float(values.max()),
        "ci95": [mean - half, mean + half],
    }


@dataclass
class RunSummary:
    config: dict
    columns: list[str]
    records: list[dict]
    aggregates: dict
    extras: dict = field(default_factory=dict)
    wall_time: float = 0.0
    final_state: RegisterState | None = None

    def to_json(self) -> str:
        # wall_time is left out so reruns are byte-identical
        doc = {
            "config": self.config,
            "generator": GENERATOR_FAMILY,
            "trials_recorded": len(self.records),
            "aggregates": self.aggregates,
            "results": self.extras,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.records:
            writer.writerow([_csv_cell(row[c]) for c in self.columns])
        return buf.getvalue()

    def write(self, out_dir, dump_final: bool = False) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "trials.csv", "w", newline="") as fp:
            fp.write(self.to_csv())
        with open(out / "summary.json", "w", newline="") as fp:
            fp.write(self.to_json())
        if dump_final:
            if self.final_state is None:
                log.warning("experiment %s has no final state to dump", self.config.get("experiment"))
            else:
                with open(out / "state.dump", "w", newline="") as fp:
                    fp.write(format_state(self.final_state))


def _csv_cell(value):
    if isinstance(value, float):
        return repr(float(value))
    return value


# -- trial orchestration -------------------------------------------------------


def _run_trials(fn: Callable, cfg: ExperimentConfig, trials: int | None = None) -> list:
    trials = cfg.trials if trials is None else trials
    seed = cfg.seed
    workers = cfg.get("workers", 1)
    if workers > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, [seed] * trials, range(trials), chunksize=max(1, trials // (4 * workers))))
    return [fn(seed, i) for i in range(trials)]


def _grover_noise(cfg: ExperimentConfig) -> grover.GroverNoise:
    init = walk = deco = None
    if "init_phase.mode" in cfg.params:
        init = _build(
            "init_phase", noise.InitPhaseNoise,
            cfg.get("init_phase.mode"), cfg.get("init_phase.sigma", 0.0), cfg.get("init_phase.uniform", False),
        )
    if "walk.s" in cfg.params:
        walk = _build("walk", noise.PhaseWalkModel, cfg.get("walk.s"), cfg.get("walk.m", 1), cfg.get("walk.tau", 1.0))
    if "decoherence.t_d" in cfg.params and "decoherence.dt" in cfg.params:
        deco = _build("decoherence", noise.DecoherenceModel, cfg.get("decoherence.t_d"), cfg.get("decoherence.lambda", 1.0))
    return _build(
        "walk.mode", grover.GroverNoise,
        init=init, walk=walk, walk_mode=cfg.get("walk.mode", "per_qubit"),
        decoherence=deco, dt=cfg.get("decoherence.dt", 0.0),
        gate_phase_sigma=cfg.get("gate_phase.sigma", 0.0),
    )


def _grover_plan(cfg: ExperimentConfig, default_n: int | None = None) -> grover.GroverPlan:
    n = cfg.get("n_qubits", default_n)
    if n is None:
        raise ConfigError("n_qubits", "required")
    if not 1 <= n <= 20:
        raise ConfigError("n_qubits", "must lie in 1..20")
    return _build(
        "marked", grover.GroverPlan, n, cfg.get("marked", 0), cfg.get("iterations"), cfg.get("eps", 0.0)
    )


def _grover_trial(plan, gnoise, seed, trial):
    rng = derive_trial_stream(seed, trial)
    return grover.grover_run(plan, gnoise, rng)


GROVER_COLUMNS = ["trial", "iter", "amp_re", "amp_im", "success_prob"]


def _trace_rows(trial: int, trace) -> list[dict]:
    return [
        {
            "trial": trial,
            "iter": s.iteration,
            "amp_re": float(s.marked_amplitude.real),
            "amp_im": float(s.marked_amplitude.imag),
            "success_prob": s.success_prob,
        }
        for s in trace
    ]


def _exp_grover(cfg: ExperimentConfig) -> RunSummary:
    plan = _grover_plan(cfg)
    gnoise = _grover_noise(cfg)
    traces = _run_trials(partial(_grover_trial, plan, gnoise), cfg)
    rows = [row for i, tr in enumerate(traces) for row in _trace_rows(i, tr)]
    final = [tr.final.success_prob for tr in traces]
    extras = {
        "iterations": plan.iterations,
        "n_states": plan.n_states,
        "clean_success_prob": grover.clean_success_probability(plan.n_states, plan.iterations),
    }
    return RunSummary(
        {}, GROVER_COLUMNS, rows, {"final_success_prob": aggregate(final)}, extras, final_state=traces[0].final_state
    )


def _exp_grover_sensitivity(cfg: ExperimentConfig) -> RunSummary:
    plan = _grover_plan(cfg, default_n=8)
    params = dict(cfg.params)
    params.setdefault("walk.s", 0.02)
    params.setdefault("walk.m", 1)
    gnoise = _grover_noise(ExperimentConfig(params))
    traces = _run_trials(partial(_grover_trial, plan, gnoise), cfg)
    clean = [s.success_prob for s in grover.grover_run(plan)]
    noisy = np.mean([[s.success_prob for s in tr] for tr in traces], axis=0)
    loss = [1.0 - float(p) / c for p, c in zip(noisy, clean)]
    start = plan.iterations - max(1, plan.iterations // 4)
    tail = loss[start:]
    extras = {
        "iterations": plan.iterations,
        "clean_success_prob": clean,
        "mean_noisy_success_prob": [float(p) for p in noisy],
        "relative_loss": loss,
        "final_quarter_start": start,
        "final_quarter_nondecreasing": all(b >= a for a, b in zip(tail, tail[1:])),
    }
    rows = [row for i, tr in enumerate(traces) for row in _trace_rows(i, tr)]
    final = [tr.final.success_prob for tr in traces]
    return RunSummary({}, GROVER_COLUMNS, rows, {"final_success_prob": aggregate(final)}, extras,
                      final_state=traces[0].final_state)


def _init_noise_trial(plan, init, seed, trial):
    rng = derive_trial_stream(seed, trial)
    trace = grover.grover_run(plan, grover.GroverNoise(init=init), rng)
    return trace.steps[0], trace.final


def _exp_init_noise(cfg: ExperimentConfig) -> RunSummary:
    plan = _grover_plan(cfg)
    init = _build(
        "init_phase", noise.InitPhaseNoise,
        cfg.get("init_phase.mode", "per_basis_state"), cfg.get("init_phase.sigma", 0.0),
        cfg.get("init_phase.uniform", "init_phase.sigma" not in cfg.params),
    )
    results = _run_trials(partial(_init_noise_trial, plan, init), cfg)
    clean = grover.clean_success_probability(plan.n_states, plan.iterations)
    rows = [
        {"trial": i, "initial_prob": first.success_prob, "success_prob": last.success_prob, "clean_success_prob": clean}
        for i, (first, last) in enumerate(results)
    ]
    succ = [r["success_prob"] for r in rows]
    extras = {"iterations": plan.iterations, "clean_success_prob": clean,
              "noisy_over_clean": float(np.mean(succ)) / clean}
    return RunSummary({}, ["trial", "initial_prob", "success_prob", "clean_success_prob"], rows,
                      {"success_prob": aggregate(succ)}, extras)


def _qec_trial(code_name, sigma, logical, mode, threshold, seed, trial):
    rng = derive_trial_stream(seed, trial)
    return qec.analog_trial(qec.get_code(code_name), sigma, rng, logical, mode, threshold)


QEC_COLUMNS = ["trial", "sigma", "syndrome", "fidelity", "residual", "expected_residual", "components"]


def _exp_qec(cfg: ExperimentConfig, code_name: str) -> RunSummary:
    sigma = cfg.require("sigma")
    if sigma < 0:
        raise ConfigError("sigma", "must be >= 0")
    logical = cfg.get("logical", (0.6, 0.8))
    _build("logical", qec.encode, qec.get_code(code_name), logical)
    mode = cfg.get("error_mode", "rotation")
    if mode not in noise.ERROR_MODES:
        raise ConfigError("error_mode", f"must be one of {noise.ERROR_MODES}")
    threshold = cfg.get("threshold", qec.COMPONENT_THRESHOLD)
    records = _run_trials(partial(_qec_trial, code_name, sigma, logical, mode, threshold), cfg)
    rows = [
        {"trial": i, "sigma": sigma, "syndrome": r.syndrome_str, "fidelity": r.fidelity_after,
         "residual": r.residual_infidelity, "expected_residual": r.expected_residual,
         "components": r.component_count_after}
        for i, r in enumerate(records)
    ]
    comps = [r.component_count_after for r in records]
    values, freq = np.unique(comps, return_counts=True)
    extras = {
        "code": code_name,
        "component_histogram": {str(int(v)): int(f) for v, f in zip(values, freq)},
        "nonzero_syndromes": sum(any(r.syndrome_bits) for r in records),
        "recovered_within_1e-10": sum(r.corrected for r in records),
    }
    aggs = {
        "fidelity": aggregate([r["fidelity"] for r in rows]),
        "residual": aggregate([r["residual"] for r in rows]),
        "expected_residual": aggregate([r["expected_residual"] for r in rows]),
        "components": aggregate(comps),
    }
    return RunSummary({}, QEC_COLUMNS, rows, aggs, extras)


def _stats_trial(model, seed, trial):
    return noise.sample_error_pattern(model, derive_trial_stream(seed, trial))


def _pattern_key(pattern) -> str:
    return "".join(str(k) for k in pattern) if max(pattern, default=0) < 10 else "-".join(map(str, pattern))


def _exp_stats(cfg: ExperimentConfig) -> RunSummary:
    model = _build(
        "stats", noise.ErrorStatisticsModel,
        cfg.require("stats.N"), cfg.require("stats.n"), cfg.get("stats.family", "bose_einstein"),
    )
    patterns = _run_trials(partial(_stats_trial, model), cfg)
    space = noise.pattern_space(model)
    index = {p: i for i, p in enumerate(space)}
    rows = [{"trial": i, "pattern": _pattern_key(p), "pattern_index": index[p]} for i, p in enumerate(patterns)]
    counts = {p: 0 for p in space}
    for p in patterns:
        counts[p] += 1
    n = len(patterns)
    table = []
    max_z = 0.0
    for p in space:
        theory = noise.pattern_probability(model, p)
        freq = counts[p] / n
        sd = math.sqrt(float(theory) * (1 - float(theory)) / n)
        z = (freq - float(theory)) / sd if sd > 0 else 0.0
        max_z = max(max_z, abs(z))
        table.append({"pattern": _pattern_key(p), "count": counts[p], "frequency": freq,
                      "theory": str(theory), "z": z})
    total = sum((noise.pattern_probability(model, p) for p in space), Fraction(0))
    extras = {"family": model.family, "n_patterns": len(space), "patterns": table,
              "max_abs_z": max_z, "theory_sum": str(total)}
    return RunSummary({}, ["trial", "pattern", "pattern_index"], rows,
                      {"pattern_index": aggregate([r["pattern_index"] for r in rows])}, extras)


def _exp_decoherence(cfg: ExperimentConfig) -> RunSummary:
    model = _build(
        "decoherence", noise.DecoherenceModel, cfg.require("decoherence.t_d"), cfg.get("decoherence.lambda", 1.0)
    )
    n = cfg.get("n_qubits", 1)
    times = cfg.get("t", [model.t_d])
    rows = []
    for i, t in enumerate(times):
        if t < 0:
            raise ConfigError("t", "times must be >= 0")
        rows.append({
            "trial": i, "t": t, "n_qubits": n,
            "characteristic": noise.decoherence_characteristic(model, t, n),
            "single_characteristic": noise.single_characteristic(model, t),
            "decay_probability": noise.decay_probability(model, t),
            "amplitude_fraction": noise.amplitude_fraction(model, t),
        })
    extras = {"effective_decoherence_time": noise.effective_decoherence_time(model, n)}
    aggs = {k: aggregate([r[k] for r in rows]) for k in ("characteristic", "decay_probability")}
    return RunSummary({}, list(rows[0]), rows, aggs, extras)


def _walk_trial(model, seed, trial):
    return float(noise.phase_walk_sample(model, derive_trial_stream(seed, trial)))


def _exp_phase_walk(cfg: ExperimentConfig) -> RunSummary:
    model = _build("walk", noise.PhaseWalkModel, cfg.require("walk.s"), cfg.require("walk.m"), cfg.get("walk.tau", 1.0))
    theta_k = cfg.get("theta_k", 0.1)
    thetas = _run_trials(partial(_walk_trial, model), cfg)
    rows = [{"trial": i, "theta": th} for i, th in enumerate(thetas)]
    arr = np.array(thetas)
    n = arr.size
    var = float(arr.var(ddof=1)) if n > 1 else 0.0
    extras = {
        "theory_variance": model.variance,
        "sample_variance": var,
        "variance_sigma": model.variance * math.sqrt(2.0 / (n - 1)) if n > 1 else None,
        "theta_k": theta_k,
        "exceed_fraction": float(np.mean(np.abs(arr) > theta_k)),
        "exceed_theory": noise.exceed_probability(model, theta_k),
        "duration": model.duration,
    }
    return RunSummary({}, ["trial", "theta"], rows, {"theta": aggregate(arr)}, extras)


_DISPATCH: dict[str, Callable[[ExperimentConfig], RunSummary]] = {
    "grover": _exp_grover,
    "grover-sensitivity": _exp_grover_sensitivity,
    "init-noise": _exp_init_noise,
    "qec-shor": partial(_exp_qec, code_name="shor9"),
    "qec-steane": partial(_exp_qec, code_name="steane7"),
    "stats": _exp_stats,
    "decoherence": _exp_decoherence,
    "phase-walk": _exp_phase_walk,
}


def run_experiment(config: ExperimentConfig | dict, out_dir=None, dump_final: bool = False) -> RunSummary:
    if not isinstance(config, ExperimentConfig):
        config = ExperimentConfig.from_mapping(config)
    start = time.perf_counter()
    summary = _DISPATCH[config.experiment](config)
    summary.config = config.echo()
    summary.wall_time = time.perf_counter() - start
    log.info("%s: %d records in %.3fs", config.experiment, len(summary.records), summary.wall_time)
    if out_dir is not None:
        summary.write(out_dir, dump_final)
    return summary


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fp:
        return list(csv.DictReader(fp))
