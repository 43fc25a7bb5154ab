"""Scenario-driven command line: runs simulations, writes CSV/JSON + figures.

Every subcommand accepts ``--config <scenario.json>`` and a set of direct
flags that override config values.  Artifacts go to ``--out`` (or the
scenario's output path, resolved relative to the scenario file); without an
output path the delimited data is printed to stdout.  A PNG figure is
rendered next to each file artifact unless ``--no-figure`` is given.
Diagnostics go to stderr.  Exit codes: 0 success, 2 validation error,
3 numerical-contract failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from . import figures
from .adiabatic import (
    Schedule,
    adiabatic_evolve,
    inverse_passage,
    phase_tuned,
    schedule_from_obj,
    schedule_to_obj,
    tanh_ramp,
)
from .core import CouplingConfig, ModeLabel, polariton_basis, polariton_energies
from .dynamics import (
    CatState,
    CoherentAmplitudes,
    entanglement_scan,
    evolve_cat,
    evolve_coherent,
    evolve_fock,
    resonance_times,
)
from .errors import NumericsError, ValidationError
from .fock import entanglement_entropy, fock_basis_state
from .oracle import bosonization_error, expm_propagate
from .serialize import dumps_json, format_float, state_to_obj, write_csv_rows

_RUN_KINDS = (
    "evolve",
    "entanglement_scan",
    "resonance_times",
    "adiabatic",
    "inverse_adiabatic",
    "bosonization",
)
_INITIAL_KINDS = ("fock", "fock4", "coherent", "cat")


# ---------------------------------------------------------------------------
# Scenario plumbing


def _load_scenario(path_str: str) -> tuple[dict, Path]:
    path = Path(path_str)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read scenario file {path}: {exc}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"scenario file {path} is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ValidationError(f"scenario file {path} must hold a JSON object")
    return obj, path.parent


def _arg(args, name, default=None):
    value = getattr(args, name, None)
    return default if value is None else value


def _section(scenario: dict, key: str) -> dict:
    section = scenario.get(key) or {}
    if not isinstance(section, dict):
        raise ValidationError(f"scenario section {key!r} must be an object")
    return section


def _check_run_kind(scenario: dict, expected: str) -> dict:
    run = _section(scenario, "run")
    kind = run.get("kind")
    if kind is not None and kind != expected:
        raise ValidationError(
            f"scenario run kind {kind!r} does not match this subcommand "
            f"(expected {expected!r}); valid kinds: {', '.join(_RUN_KINDS)}"
        )
    return run


def _check_initial_kind(scenario: dict, allowed: tuple[str, ...], hint: str) -> dict:
    initial = _section(scenario, "initial")
    kind = initial.get("kind")
    if kind is not None and kind not in allowed:
        raise ValidationError(
            f"initial state kind {kind!r} is not supported here ({hint}); "
            f"valid kinds: {', '.join(_INITIAL_KINDS)}"
        )
    return initial


def _float_field(obj: dict, key: str, default=None, where: str = "scenario"):
    if key not in obj:
        if default is None:
            raise ValidationError(f"{where} is missing required field {key!r}")
        return float(default)
    try:
        return float(obj[key])
    except (TypeError, ValueError):
        raise ValidationError(f"{where} field {key!r} must be a number") from None


def _int_field(obj: dict, key: str, default=None, where: str = "scenario"):
    value = obj.get(key, default)
    if value is None:
        raise ValidationError(f"{where} is missing required field {key!r}")
    if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
        raise ValidationError(f"{where} field {key!r} must be an integer")
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{where} field {key!r} must be an integer") from None


def _complex_field(obj: dict, key: str, default: complex = 0.0) -> complex:
    value = obj.get(key)
    if value is None:
        return complex(default)
    if isinstance(value, (int, float)):
        return complex(float(value))
    if isinstance(value, (list, tuple)) and len(value) == 2:
        try:
            return complex(float(value[0]), float(value[1]))
        except (TypeError, ValueError):
            pass
    raise ValidationError(f"field {key!r} must be a number or a [re, im] pair")


def _pair(z: complex) -> list:
    return [z.real, z.imag]


def _resolve_coupling(scenario: dict, args) -> CouplingConfig:
    model = _section(scenario, "model")
    if "family" in model:
        raise ValidationError(
            "this subcommand needs a static coupling model "
            "({g_N, Omega, phi}), not a schedule"
        )
    g_N = float(_arg(args, "gn", _float_field(model, "g_N", 1.0, "model")))
    omega = float(_arg(args, "omega", _float_field(model, "Omega", 0.0, "model")))
    phi = float(_arg(args, "phi", _float_field(model, "phi", 0.0, "model")))
    return CouplingConfig(g_N, omega, phi)


def _coupling_obj(cfg: CouplingConfig) -> dict:
    return {"g_N": cfg.g_N, "Omega": cfg.Omega, "phi": cfg.phi}


def _resolve_grid(scenario: dict, args, default_tmax: float, default_steps: int) -> np.ndarray:
    run = _section(scenario, "run")
    grid = run.get("t_grid") or {}
    if not isinstance(grid, dict):
        raise ValidationError("run.t_grid must be an object")
    flag_tmax, flag_steps = _arg(args, "tmax"), _arg(args, "steps")
    if "times" in grid and flag_tmax is None and flag_steps is None:
        times = np.asarray(grid["times"], dtype=float)
        if times.ndim != 1 or times.size == 0 or not np.all(np.isfinite(times)):
            raise ValidationError("run.t_grid.times must be a non-empty list of finite times")
        return times
    tmax = float(flag_tmax if flag_tmax is not None else grid.get("tmax", default_tmax))
    steps = int(flag_steps if flag_steps is not None else grid.get("steps", default_steps))
    if not (math.isfinite(tmax) and tmax > 0):
        raise ValidationError(f"tmax must be positive, got {tmax}")
    if steps < 2:
        raise ValidationError(f"steps must be at least 2, got {steps}")
    return np.linspace(0.0, tmax, steps)


def _resolve_output(scenario: dict, args, base_dir: Path):
    """(path or None, format, path-as-written) with config paths relative to the scenario file."""
    out = scenario.get("output") or {}
    if not isinstance(out, dict):
        raise ValidationError("scenario section 'output' must be an object")
    flag_out = _arg(args, "out")
    if flag_out is not None:
        raw, root = str(flag_out), Path.cwd()
    elif out.get("path") is not None:
        raw, root = str(out["path"]), base_dir
    else:
        raw, root = None, None
    fmt = _arg(args, "format") or out.get("format")
    if fmt is None:
        fmt = "json" if (raw or "").endswith(".json") else "csv"
    if fmt not in ("csv", "json"):
        raise ValidationError(f"output format must be 'csv' or 'json', got {fmt!r}")
    if raw is None:
        return None, fmt, None
    path = Path(raw)
    if not path.is_absolute():
        path = root / path
    return path, fmt, raw


def _emit(text: str, out_path: Path | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
        return
    try:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot write {out_path}: {exc}") from None
    print(f"wrote {out_path}", file=sys.stderr)


def _maybe_figure(args, out_path: Path | None, render) -> None:
    if out_path is None or _arg(args, "no_figure", False):
        return
    figure_path = out_path.with_suffix(".png")
    render(figure_path)
    print(f"wrote {figure_path}", file=sys.stderr)


def _table_text(fmt: str, header, rows, resolved: dict) -> str:
    if fmt == "csv":
        return write_csv_rows(header, rows)
    return dumps_json(
        {
            "scenario": resolved,
            "columns": list(header),
            "rows": [list(row) for row in rows],
        }
    )


def _resolved_scenario(model_obj, initial_obj, run_obj, fmt, raw_path) -> dict:
    return {
        "model": model_obj,
        "initial": initial_obj,
        "run": run_obj,
        "output": {"path": raw_path, "format": fmt},
    }


# ---------------------------------------------------------------------------
# Subcommand cores (shared between flag-driven use and run_scenario)


def _cmd_spectrum(scenario, base_dir, args) -> int:
    cfg = _resolve_coupling(scenario, args)
    energies = polariton_energies(cfg)
    theta = polariton_basis(cfg).theta
    out_path, fmt, raw = _resolve_output(scenario, args, base_dir)
    if out_path is None:
        for i, eps in enumerate(energies, start=1):
            sys.stdout.write(f"epsilon_{i} = {format_float(float(eps))}\n")
        sys.stdout.write(f"theta = {format_float(theta)}\n")
        return 0
    header = ["epsilon_1", "epsilon_2", "epsilon_3", "epsilon_4", "theta"]
    row = [float(e) for e in energies] + [theta]
    resolved = _resolved_scenario(_coupling_obj(cfg), None, {"kind": "spectrum"}, fmt, raw)
    if fmt == "csv":
        _emit(write_csv_rows(header, [row]), out_path)
    else:
        _emit(
            dumps_json(
                {
                    "scenario": resolved,
                    "energies": [float(e) for e in energies],
                    "theta": theta,
                }
            ),
            out_path,
        )
    _maybe_figure(args, out_path, lambda p: figures.save_spectrum(p, energies, theta))
    return 0


def _fock_evolution_rows(cfg, initial_kind, m, n, occupation, t_grid):
    rows = []
    for t in t_grid:
        if initial_kind == "fock":
            state = evolve_fock(cfg, m, n, float(t))
        else:
            sector = sum(occupation)
            state = expm_propagate(
                fock_basis_state((sector + 1,) * 4, occupation), cfg, float(t)
            )
        occ = state.number_expectations()
        entropy = entanglement_entropy(state, [ModeLabel.a])
        rows.append([float(t)] + [float(x) for x in occ] + [entropy])
    return rows


def _cmd_evolve_fock(scenario, base_dir, args) -> int:
    _check_run_kind(scenario, "evolve")
    initial = _check_initial_kind(
        scenario,
        ("fock", "fock4"),
        "use evolve-coherent or evolve-cat for field-state inputs",
    )
    cfg = _resolve_coupling(scenario, args)
    kind = initial.get("kind", "fock")
    if kind == "fock4":
        raw_occ = initial.get("occupation", [1, 0, 0, 0])
        try:
            occupation = tuple(int(v) for v in raw_occ)
        except (TypeError, ValueError):
            occupation = ()
        if len(occupation) != 4 or any(v < 0 for v in occupation):
            raise ValidationError("initial.occupation must be four non-negative integers")
        m = n = None
        initial_obj = {"kind": "fock4", "occupation": list(occupation)}
    else:
        m = int(_arg(args, "m", _int_field(initial, "m", 1, "initial")))
        n = int(_arg(args, "n", _int_field(initial, "n", 0, "initial")))
        occupation = None
        initial_obj = {"kind": "fock", "m": m, "n": n}
    t_grid = _resolve_grid(scenario, args, default_tmax=10.0, default_steps=200)
    rows = _fock_evolution_rows(cfg, kind, m, n, occupation, t_grid)
    header = ["t", "n_a", "n_b", "n_A", "n_C", "entropy_a_bits"]
    out_path, fmt, raw = _resolve_output(scenario, args, base_dir)
    run_obj = {"kind": "evolve", "t_grid": {"times": [float(t) for t in t_grid]}}
    resolved = _resolved_scenario(_coupling_obj(cfg), initial_obj, run_obj, fmt, raw)
    _emit(_table_text(fmt, header, rows, resolved), out_path)
    _maybe_figure(args, out_path, lambda p: figures.save_occupations(p, rows))
    return 0


def _cmd_entanglement_scan(scenario, base_dir, args) -> int:
    run = _check_run_kind(scenario, "entanglement_scan")
    initial = _check_initial_kind(
        scenario, ("fock",), "entanglement scans take a two-photon Fock input"
    )
    cfg = _resolve_coupling(scenario, args)
    m = int(_arg(args, "m", _int_field(initial, "m", 1, "initial")))
    n = int(_arg(args, "n", _int_field(initial, "n", 1, "initial")))
    photon_limit = bool(_arg(args, "photon_limit", False) or run.get("photon_limit", False))
    t_grid = _resolve_grid(scenario, args, default_tmax=10.0, default_steps=200)
    scan = entanglement_scan(cfg, m, n, t_grid, photon_limit=photon_limit)
    rows = [[t, entropy] for t, entropy in scan]
    header = ["t", "entropy_bits"]
    out_path, fmt, raw = _resolve_output(scenario, args, base_dir)
    run_obj = {
        "kind": "entanglement_scan",
        "photon_limit": photon_limit,
        "t_grid": {"times": [float(t) for t in t_grid]},
    }
    resolved = _resolved_scenario(
        _coupling_obj(cfg), {"kind": "fock", "m": m, "n": n}, run_obj, fmt, raw
    )
    _emit(_table_text(fmt, header, rows, resolved), out_path)
    _maybe_figure(args, out_path, lambda p: figures.save_entanglement(p, rows))
    return 0


def _cmd_revival_times(scenario, base_dir, args) -> int:
    run = _check_run_kind(scenario, "resonance_times")
    cfg_model = _section(scenario, "model")
    p = _arg(args, "p", run.get("p"))
    q = _arg(args, "q", run.get("q"))
    count = int(_arg(args, "count", run.get("count", 5)))
    if count < 1:
        raise ValidationError(f"count must be at least 1, got {count}")
    if (p is None) != (q is None):
        raise ValidationError("give both --p and --q (or neither, with a model Omega)")
    if p is not None:
        g_N = float(_arg(args, "gn", _float_field(cfg_model, "g_N", 1.0, "model")))
        result = resonance_times(p=int(p), q=int(q), g_N=g_N)
        model_obj = {"g_N": g_N}
    else:
        cfg = _resolve_coupling(scenario, args)
        result = resonance_times(cfg)
        model_obj = _coupling_obj(cfg)
    revivals = result.revival_times.times(count)
    swaps = result.swap_times.times(count) if result.swap_times is not None else None
    if swaps is None:
        print("no swap times exist for this drive ratio (q odd)", file=sys.stderr)
    rows = [["revival", k, float(t)] for k, t in enumerate(revivals)]
    if swaps is not None:
        rows += [["swap", k, float(t)] for k, t in enumerate(swaps)]
    header = ["kind", "k", "time"]
    out_path, fmt, raw = _resolve_output(scenario, args, base_dir)
    run_obj = {"kind": "resonance_times", "p": result.p, "q": result.q, "count": count}
    resolved = _resolved_scenario(model_obj, None, run_obj, fmt, raw)
    if fmt == "csv":
        text = write_csv_rows(header, rows)
    else:
        sequences = {
            "revival": {
                "first": result.revival_times.first,
                "period": result.revival_times.period,
                "times": [float(t) for t in revivals],
            },
            "swap": None
            if swaps is None
            else {
                "first": result.swap_times.first,
                "period": result.swap_times.period,
                "times": [float(t) for t in swaps],
            },
        }
        text = dumps_json(
            {
                "scenario": resolved,
                "base_period": result.base_period,
                "sequences": sequences,
            }
        )
    _emit(text, out_path)
    _maybe_figure(args, out_path, lambda pth: figures.save_resonances(pth, revivals, swaps))
    return 0


def _cmd_evolve_coherent(scenario, base_dir, args) -> int:
    run = _check_run_kind(scenario, "evolve")
    initial = _check_initial_kind(
        scenario, ("coherent",), "evolve-coherent needs a coherent initial state"
    )
    cfg = _resolve_coupling(scenario, args)
    amps = CoherentAmplitudes(
        alpha=_complex_field(initial, "alpha", 1.0),
        beta=_complex_field(initial, "beta"),
        zeta=_complex_field(initial, "zeta"),
        eta=_complex_field(initial, "eta"),
    )
    photon_limit = bool(_arg(args, "photon_limit", False) or run.get("photon_limit", False))
    t_grid = _resolve_grid(scenario, args, default_tmax=10.0, default_steps=200)
    rows = []
    for t in t_grid:
        out = evolve_coherent(amps, cfg, float(t), photon_limit=photon_limit)
        rows.append(
            [float(t)]
            + _pair(out.alpha)
            + _pair(out.beta)
            + _pair(out.zeta)
            + _pair(out.eta)
        )
    header = ["t", "re_a", "im_a", "re_b", "im_b", "re_A", "im_A", "re_C", "im_C"]
    out_path, fmt, raw = _resolve_output(scenario, args, base_dir)
    initial_obj = {
        "kind": "coherent",
        "alpha": _pair(amps.alpha),
        "beta": _pair(amps.beta),
        "zeta": _pair(amps.zeta),
        "eta": _pair(amps.eta),
    }
    run_obj = {
        "kind": "evolve",
        "photon_limit": photon_limit,
        "t_grid": {"times": [float(t) for t in t_grid]},
    }
    resolved = _resolved_scenario(_coupling_obj(cfg), initial_obj, run_obj, fmt, raw)
    _emit(_table_text(fmt, header, rows, resolved), out_path)
    _maybe_figure(args, out_path, lambda p: figures.save_amplitudes(p, rows))
    return 0


def _cmd_evolve_cat(scenario, base_dir, args) -> int:
    run = _check_run_kind(scenario, "evolve")
    initial = _check_initial_kind(scenario, ("cat",), "evolve-cat needs a cat initial state")
    cfg = _resolve_coupling(scenario, args)
    mode_name = str(initial.get("mode", "a"))
    try:
        mode = ModeLabel[mode_name]
    except KeyError:
        raise ValidationError(f"initial.mode must be one of a, b, A, C; got {mode_name!r}") from None
    cat = CatState(
        alpha=_complex_field(initial, "alpha", 1.0),
        parity=str(initial.get("parity", "even")),
        mode=mode,
    )
    photon_limit = bool(_arg(args, "photon_limit", False) or run.get("photon_limit", False))
    t_grid = _resolve_grid(scenario, args, default_tmax=10.0, default_steps=200)
    rows = []
    for t in t_grid:
        branches = evolve_cat(cat, cfg, float(t), photon_limit=photon_limit)
        plus, minus = branches.branches
        rows.append(
            [float(t), branches.weights[0], branches.weights[1]]
            + _pair(plus.alpha)
            + _pair(plus.beta)
            + _pair(minus.alpha)
            + _pair(minus.beta)
            + [branches.gram_entropy()]
        )
    header = [
        "t",
        "w_plus",
        "w_minus",
        "re_a_plus",
        "im_a_plus",
        "re_b_plus",
        "im_b_plus",
        "re_a_minus",
        "im_a_minus",
        "re_b_minus",
        "im_b_minus",
        "entropy_bits",
    ]
    out_path, fmt, raw = _resolve_output(scenario, args, base_dir)
    initial_obj = {
        "kind": "cat",
        "mode": mode.name,
        "alpha": _pair(cat.alpha),
        "parity": cat.parity,
    }
    run_obj = {
        "kind": "evolve",
        "photon_limit": photon_limit,
        "t_grid": {"times": [float(t) for t in t_grid]},
    }
    resolved = _resolved_scenario(_coupling_obj(cfg), initial_obj, run_obj, fmt, raw)
    _emit(_table_text(fmt, header, rows, resolved), out_path)
    _maybe_figure(args, out_path, lambda p: figures.save_cat_scan(p, rows))
    return 0


def _resolve_schedule(scenario, args, ascending: bool) -> tuple[Schedule, bool]:
    """Schedule from the scenario model or built from flags; phase-tunes by default."""
    model = _section(scenario, "model")
    run = _section(scenario, "run")
    tune = bool(run.get("phase_tuned", True))
    if "family" in model:
        schedule = schedule_from_obj(model)
    else:
        g_N = float(_arg(args, "gn", _float_field(model, "g_N", 1.0, "model")))
        duration = float(_arg(args, "tmax", _float_field(model, "duration", 200.0 / g_N, "model")))
        schedule = tanh_ramp(g_N, duration, ascending=ascending)
    if tune:
        schedule = phase_tuned(schedule)
    return schedule, tune


def _passage_report(result, schedule, tuned, run_obj, initial_obj, fmt, raw, target_occ):
    target = fock_basis_state(result.exact_state.cutoffs, target_occ)
    exact_target_fidelity = abs(result.exact_state.overlap(target))
    scalars = {
        "dynamic_phase_integral": result.dynamic_phase_integral,
        "hold": schedule.hold,
        "phase_tuned": tuned,
        "storage_grade": schedule.storage_grade,
        "fidelity_vs_target": result.fidelity_vs_target,
        "fidelity_vs_exact": result.fidelity_vs_exact,
        "exact_target_fidelity": exact_target_fidelity,
    }
    resolved = _resolved_scenario(schedule_to_obj(schedule), initial_obj, run_obj, fmt, raw)
    if fmt == "csv":
        header = list(scalars.keys())
        text = write_csv_rows(header, [[scalars[k] for k in header]])
    else:
        text = dumps_json(
            {
                "scenario": resolved,
                **scalars,
                "predicted_state": state_to_obj(result.final_state),
                "exact_state": state_to_obj(result.exact_state),
            }
        )
    return text, scalars


def _schedule_figure(schedule, caption):
    ts = np.linspace(schedule.t_start, schedule.t_end, 512)
    omegas = schedule.omega(ts)
    return lambda p: figures.save_schedule(p, ts, omegas, schedule.g_N, caption)


def _cmd_adiabatic_transfer(scenario, base_dir, args) -> int:
    run = _check_run_kind(scenario, "adiabatic")
    initial = _check_initial_kind(scenario, ("fock",), "adiabatic transfer stores |m, n⟩_ab")
    schedule, tuned = _resolve_schedule(scenario, args, ascending=False)
    m = int(_arg(args, "m", _int_field(initial, "m", run.get("m", 1), "initial")))
    n = int(_arg(args, "n", _int_field(initial, "n", run.get("n", 0), "initial")))
    result = adiabatic_evolve(m, n, schedule)
    out_path, fmt, raw = _resolve_output(scenario, args, base_dir)
    text, scalars = _passage_report(
        result,
        schedule,
        tuned,
        {"kind": "adiabatic", "m": m, "n": n},
        {"kind": "fock", "m": m, "n": n},
        fmt,
        raw,
        (0, 0, n, m),
    )
    _emit(text, out_path)
    caption = (
        f"storage |{m},{n}⟩: exact-target fidelity "
        f"{scalars['exact_target_fidelity']:.6f}"
    )
    _maybe_figure(args, out_path, _schedule_figure(schedule, caption))
    return 0


def _cmd_inverse_transfer(scenario, base_dir, args) -> int:
    run = _check_run_kind(scenario, "inverse_adiabatic")
    initial = _check_initial_kind(scenario, ("fock4",), "retrieval starts from |0,0,n_A,n_C⟩")
    occupation = initial.get("occupation")
    if occupation is not None:
        if len(occupation) != 4 or occupation[0] or occupation[1]:
            raise ValidationError(
                "inverse-transfer initial.occupation must look like [0, 0, n_A, n_C]"
            )
        default_na, default_nc = int(occupation[2]), int(occupation[3])
    else:
        default_na, default_nc = int(run.get("n_A", 1)), int(run.get("n_C", 0))
    n_A = int(_arg(args, "na", default_na))
    n_C = int(_arg(args, "nc", default_nc))
    schedule, tuned = _resolve_schedule(scenario, args, ascending=True)
    result = inverse_passage(n_A, n_C, schedule)
    out_path, fmt, raw = _resolve_output(scenario, args, base_dir)
    text, scalars = _passage_report(
        result,
        schedule,
        tuned,
        {"kind": "inverse_adiabatic", "n_A": n_A, "n_C": n_C},
        {"kind": "fock4", "occupation": [0, 0, n_A, n_C]},
        fmt,
        raw,
        (n_C, n_A, 0, 0),
    )
    _emit(text, out_path)
    caption = (
        f"retrieval |n_A={n_A}, n_C={n_C}⟩: exact-target fidelity "
        f"{scalars['exact_target_fidelity']:.6f}"
    )
    _maybe_figure(args, out_path, _schedule_figure(schedule, caption))
    return 0


def _cmd_validate_bosonization(scenario, base_dir, args) -> int:
    run = _check_run_kind(scenario, "bosonization")
    cfg = _resolve_coupling(scenario, args)
    flag_N = _arg(args, "N")
    if flag_N is not None:
        try:
            N_values = [int(part) for part in str(flag_N).split(",") if part]
        except ValueError:
            raise ValidationError(f"--N must be a comma-separated integer list, got {flag_N!r}") from None
    else:
        N_values = [int(v) for v in run.get("N_list", [20, 40])]
    if not N_values or any(N < 1 for N in N_values):
        raise ValidationError(f"ensemble sizes must be positive integers, got {N_values}")
    s = int(_arg(args, "s", run.get("s", 1)))
    t_grid = _resolve_grid(scenario, args, default_tmax=6.0, default_steps=25)
    report = bosonization_error(N_values, s, cfg, t_grid)
    for (N, NN), ratio in sorted(report.ratios.items()):
        print(f"ratio err({N})/err({NN}) = {ratio:.6g}", file=sys.stderr)
    rows = [[N, report.errors[N]] for N in report.N_values]
    header = ["N", "max_trace_distance"]
    out_path, fmt, raw = _resolve_output(scenario, args, base_dir)
    run_obj = {
        "kind": "bosonization",
        "N_list": list(report.N_values),
        "s": s,
        "t_grid": {"times": [float(t) for t in t_grid]},
    }
    resolved = _resolved_scenario(_coupling_obj(cfg), None, run_obj, fmt, raw)
    if fmt == "csv":
        text = write_csv_rows(header, rows)
    else:
        text = dumps_json(
            {
                "scenario": resolved,
                "errors": {str(N): report.errors[N] for N in report.N_values},
                "ratios": {
                    f"{N}/{NN}": (ratio if math.isfinite(ratio) else None)
                    for (N, NN), ratio in sorted(report.ratios.items())
                },
            }
        )
    _emit(text, out_path)
    _maybe_figure(
        args,
        out_path,
        lambda p: figures.save_bosonization(
            p, list(report.N_values), [report.errors[N] for N in report.N_values]
        ),
    )
    return 0


def _cmd_oracle_compare(scenario, base_dir, args) -> int:
    cfg = _resolve_coupling(scenario, args)
    initial = _section(scenario, "initial")
    m = int(_arg(args, "m", _int_field(initial, "m", 1, "initial")))
    n = int(_arg(args, "n", _int_field(initial, "n", 1, "initial")))
    t_grid = _resolve_grid(scenario, args, default_tmax=10.0, default_steps=50)
    cutoffs = (m + n + 1,) * 4
    seed = fock_basis_state(cutoffs, (m, n, 0, 0))
    rows = []
    for t in t_grid:
        closed = evolve_fock(cfg, m, n, float(t))
        exact = expm_propagate(seed, cfg, float(t))
        rows.append([float(t), abs(1.0 - closed.fidelity(exact))])
    max_defect = max(row[1] for row in rows)
    sys.stdout.write(f"max fidelity defect = {format_float(max_defect)}\n")
    out_path, fmt, raw = _resolve_output(scenario, args, base_dir)
    if out_path is not None:
        run_obj = {
            "kind": "oracle_compare",
            "m": m,
            "n": n,
            "t_grid": {"times": [float(t) for t in t_grid]},
        }
        resolved = _resolved_scenario(
            _coupling_obj(cfg), {"kind": "fock", "m": m, "n": n}, run_obj, fmt, raw
        )
        header = ["t", "fidelity_defect"]
        if fmt == "csv":
            text = write_csv_rows(header, rows)
        else:
            text = dumps_json(
                {
                    "scenario": resolved,
                    "max_fidelity_defect": max_defect,
                    "columns": header,
                    "rows": [list(r) for r in rows],
                }
            )
        _emit(text, out_path)
        _maybe_figure(
            args,
            out_path,
            lambda p: figures.save_defects(p, [r[0] for r in rows], [r[1] for r in rows]),
        )
    return 0


# ---------------------------------------------------------------------------
# run_scenario + argument parsing


_SCENARIO_DISPATCH = {
    ("evolve", "fock"): _cmd_evolve_fock,
    ("evolve", "fock4"): _cmd_evolve_fock,
    ("evolve", "coherent"): _cmd_evolve_coherent,
    ("evolve", "cat"): _cmd_evolve_cat,
    ("entanglement_scan", None): _cmd_entanglement_scan,
    ("resonance_times", None): _cmd_revival_times,
    ("adiabatic", None): _cmd_adiabatic_transfer,
    ("inverse_adiabatic", None): _cmd_inverse_transfer,
    ("bosonization", None): _cmd_validate_bosonization,
}


def _empty_args() -> SimpleNamespace:
    return SimpleNamespace()


def run_scenario(path) -> int:
    """Execute a scenario file; returns the process exit code (0/2/3)."""
    try:
        scenario, base_dir = _load_scenario(str(path))
        run = _section(scenario, "run")
        kind = run.get("kind")
        if kind not in _RUN_KINDS:
            raise ValidationError(
                f"scenario run.kind must be one of {', '.join(_RUN_KINDS)}; got {kind!r}"
            )
        initial_kind = _section(scenario, "initial").get("kind")
        handler = _SCENARIO_DISPATCH.get((kind, initial_kind if kind == "evolve" else None))
        if handler is None:
            raise ValidationError(
                f"run kind 'evolve' needs initial.kind in {', '.join(_INITIAL_KINDS)}; "
                f"got {initial_kind!r}"
            )
        return handler(scenario, base_dir, _empty_args())
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"numerical-contract failure: {exc}", file=sys.stderr)
        return 3


def _add_output_flags(sub, jobs=False):
    sub.add_argument("--out", help="artifact path (default: print to stdout)")
    sub.add_argument("--format", choices=("csv", "json"), help="artifact format")
    sub.add_argument(
        "--no-figure",
        dest="no_figure",
        action="store_true",
        help="skip the PNG rendered next to a file artifact",
    )
    if jobs:
        sub.add_argument(
            "--jobs",
            type=int,
            help="parallelism hint; grid points are independent and are "
            "emitted in index order (current implementation runs serially)",
        )


def _add_model_flags(sub):
    sub.add_argument("--config", help="scenario JSON file")
    sub.add_argument("--gn", type=float, help="collective coupling g_N")
    sub.add_argument("--omega", type=float, help="drive amplitude Omega")
    sub.add_argument("--phi", type=float, help="drive phase phi")


def _add_grid_flags(sub):
    sub.add_argument("--tmax", type=float, help="grid end time")
    sub.add_argument("--steps", type=int, help="number of grid points")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deltapol",
        description="Cyclic three-level ensemble + two-mode cavity simulator",
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("spectrum", help="polariton energies and mixing angle")
    _add_model_flags(p)
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_spectrum)

    p = sub.add_parser("evolve-fock", help="occupation/entropy trace of a Fock input")
    _add_model_flags(p)
    p.add_argument("--m", type=int, help="photons in mode a")
    p.add_argument("--n", type=int, help="photons in mode b")
    _add_grid_flags(p)
    _add_output_flags(p, jobs=True)
    p.set_defaults(handler=_cmd_evolve_fock)

    p = sub.add_parser("entanglement-scan", help="mode-a entanglement entropy vs time")
    _add_model_flags(p)
    p.add_argument("--m", type=int, help="photons in mode a")
    p.add_argument("--n", type=int, help="photons in mode b")
    p.add_argument(
        "--photon-limit",
        dest="photon_limit",
        action="store_true",
        help="use the strong-drive photon-block dynamics",
    )
    _add_grid_flags(p)
    _add_output_flags(p, jobs=True)
    p.set_defaults(handler=_cmd_entanglement_scan)

    p = sub.add_parser("revival-times", help="revival/swap time table")
    _add_model_flags(p)
    p.add_argument("--p", type=int, help="numerator of Omega/sqrt(Omega²+4g²)")
    p.add_argument("--q", type=int, help="denominator of Omega/sqrt(Omega²+4g²)")
    p.add_argument("--count", type=int, help="entries per sequence (default 5)")
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_revival_times)

    p = sub.add_parser("evolve-coherent", help="first-moment trace of a coherent input")
    _add_model_flags(p)
    p.add_argument(
        "--photon-limit",
        dest="photon_limit",
        action="store_true",
        help="use the strong-drive photon-block dynamics",
    )
    _add_grid_flags(p)
    _add_output_flags(p, jobs=True)
    p.set_defaults(handler=_cmd_evolve_coherent)

    p = sub.add_parser("evolve-cat", help="cat-state branch trace (photon-only times)")
    _add_model_flags(p)
    p.add_argument(
        "--photon-limit",
        dest="photon_limit",
        action="store_true",
        help="use the strong-drive photon-block dynamics",
    )
    _add_grid_flags(p)
    _add_output_flags(p, jobs=True)
    p.set_defaults(handler=_cmd_evolve_cat)

    p = sub.add_parser("adiabatic-transfer", help="photon → atom storage passage report")
    _add_model_flags(p)
    p.add_argument("--m", type=int, help="photons in mode a")
    p.add_argument("--n", type=int, help="photons in mode b")
    p.add_argument("--tmax", type=float, help="sweep duration (default 200/g_N)")
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_adiabatic_transfer)

    p = sub.add_parser("inverse-transfer", help="atom → photon retrieval passage report")
    _add_model_flags(p)
    p.add_argument("--na", type=int, help="stored A-mode excitations n_A")
    p.add_argument("--nc", type=int, help="stored C-mode excitations n_C")
    p.add_argument("--tmax", type=float, help="sweep duration (default 200/g_N)")
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_inverse_transfer)

    p = sub.add_parser(
        "validate-bosonization", help="finite-N vs bosonized scaling report"
    )
    _add_model_flags(p)
    p.add_argument("--N", help="comma-separated ensemble sizes, e.g. 20,40")
    p.add_argument("--s", type=int, help="excitation number of the |s,0⟩ input")
    _add_grid_flags(p)
    _add_output_flags(p, jobs=True)
    p.set_defaults(handler=_cmd_validate_bosonization)

    p = sub.add_parser(
        "oracle-compare", help="closed-form vs eigendecomposition fidelity defect"
    )
    _add_model_flags(p)
    p.add_argument("--m", type=int, help="photons in mode a")
    p.add_argument("--n", type=int, help="photons in mode b")
    _add_grid_flags(p)
    _add_output_flags(p, jobs=True)
    p.set_defaults(handler=_cmd_oracle_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = getattr(args, "handler", None)
    if handler is None:
        parser.print_help(sys.stderr)
        return 2
    jobs = _arg(args, "jobs")
    if jobs is not None and jobs < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return 2
    try:
        if _arg(args, "config") is not None:
            scenario, base_dir = _load_scenario(args.config)
        else:
            scenario, base_dir = {}, Path.cwd()
        return handler(scenario, base_dir, args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"numerical-contract failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
