"""Experiment runner.

Subcommands: spectrum, build-pa, deviate, peel, correlate, functional,
decompose.  Every run writes CSV data, a JSON summary embedding the config
hash, and an SVG plot where a plot makes sense.  Outputs are a pure function
of (config, preset files): sweeps are partitioned across workers but reduced
in sorted order, so the emitted bytes do not depend on the worker count.

Exit codes: 0 success, 2 invariant violation, 3 configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import random
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import presets
from .cohomology import (
    IntegerMatrix,
    characteristic_polynomial,
    deviation_exponents,
    spectral_split,
)
from .config import ExperimentConfig, load_config
from .deviation import (
    combined_envelope_report,
    correlation_expansion_check,
    deviation_series,
    fit_power_law,
    peel_expansion,
)
from .errors import ConfigInvalid, ErgodevError, PresetMissing
from .iet import IetCombinatorics, find_pa_loop
from .reporting import config_hash, svg_plot, write_csv, write_json
from .returns import (
    asymptotic_gap,
    battery_forms,
    bufetov_beta,
    c_plus,
    c_plus_bound,
    concatenate,
    decompose_closest_returns,
    scale_constants,
)
from .suspension import FlowPoint, UnstableCurve, apply_pa
from .torus import TrigObservable, random_zero_mean_trig


def _random_starts(model, seed: int, count: int):
    rng = random.Random(seed)
    return [model.field.from_rational(Fraction(rng.randrange(1, 10 ** 6), 10 ** 6))
            for _ in range(count)]


# -- worker-pool machinery (fork): the model is rebuilt per worker ----------

_POOL_STATE: dict = {}


def _resolve_observable(model, obs_default, spec):
    """Config 'observable': None/'preset' (stored), 'constant', or JSON terms."""
    from .suspension import CellObservable, constant_observable

    if spec in (None, "preset"):
        return obs_default
    if spec == "constant":
        return constant_observable(model)
    return CellObservable.from_json(model, spec)


def _pool_init(preset_name: str, obs_spec=None):
    model, obs = presets.load_preset(preset_name)
    _POOL_STATE["model"] = model
    _POOL_STATE["obs"] = _resolve_observable(model, obs, obs_spec)


def _pool_task(args):
    idx, num, den, grid = args
    model, obs = _POOL_STATE["model"], _POOL_STATE["obs"]
    x = model.field.from_rational(Fraction(num, den))
    rep = deviation_series(model, obs, x, grid)
    return idx, rep


def _run_sweep(cfg: ExperimentConfig, preset_name: str):
    model, obs = presets.load_preset(preset_name)
    obs = _resolve_observable(model, obs, cfg["observable"])
    grid = cfg.t_grid()
    starts = cfg["starts"]
    if isinstance(starts, list):
        # explicit start points given as fractions ("p/q") or decimals
        fracs = [(Fraction(str(s)).numerator, Fraction(str(s)).denominator)
                 for s in starts]
    else:
        rng = random.Random(int(cfg["seed"]))
        fracs = [(rng.randrange(1, 10 ** 6), 10 ** 6) for _ in range(int(starts))]
    workers = int(cfg["workers"])
    if workers > 1:
        import multiprocessing as mp

        ctx = mp.get_context("fork")
        with ctx.Pool(workers, initializer=_pool_init,
                      initargs=(preset_name, cfg["observable"])) as pool:
            tasks = [(i, n, d, grid) for i, (n, d) in enumerate(fracs)]
            results = pool.map(_pool_task, tasks)
        results.sort(key=lambda t: t[0])
        reports = [r for _, r in results]
    else:
        reports = []
        for n, d in fracs:
            x = model.field.from_rational(Fraction(n, d))
            reports.append(deviation_series(model, obs, x, grid))
    return model, obs, combined_envelope_report(reports), reports


def cmd_spectrum(cfg: ExperimentConfig, out: Path) -> dict:
    if cfg["matrix"] is not None:
        m = IntegerMatrix.from_rows(cfg["matrix"])
    else:
        model, _ = presets.load_preset(cfg["preset"])
        m = model.B
    split = spectral_split(m)
    table = deviation_exponents(split)
    payload = split.to_json()
    payload["charpoly"] = characteristic_polynomial(m)
    payload["exponents"] = table.to_json()
    write_csv(out / "eigenvalues.csv",
              ["re", "im", "modulus", "location", "algebraic_mult", "geometric_mult"],
              [(r.value.real, r.value.imag, r.modulus, r.location,
                r.algebraic_multiplicity, r.geometric_multiplicity)
               for r in split.eigenvalues])
    return payload


def cmd_build_pa(cfg: ExperimentConfig, out: Path, args) -> dict:
    top = tuple(int(v) for v in args.top.split(","))
    bottom = tuple(int(v) for v in args.bottom.split(","))
    c = IetCombinatorics(top, bottom)
    word = args.loop or find_pa_loop(
        c, max_len=args.max_len,
        require_second_expanding=args.second_expanding,
        require_real_spectrum=args.real_spectrum)
    if word is None:
        raise ErgodevError("no admissible loop found within max-len")
    preset = presets.generate_preset(args.name, top, bottom, word,
                                     seed_start=int(cfg["seed"]))
    path = out / f"{args.name}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(preset, indent=1, sort_keys=True) + "\n")
    return {"loop": word, "preset_path": str(path),
            "matrix": preset["matrix"], "lambda_minpoly": preset["lambda_minpoly"]}


def cmd_deviate(cfg: ExperimentConfig, out: Path) -> dict:
    model, obs, combined, reports = _run_sweep(cfg, cfg["preset"])
    write_csv(out / "deviations.csv",
              ["T_flow_time", "max_abs_E_T_over_starts", "envelope_running_max"],
              [(t, e, v) for t, e, v in zip(combined.T_values,
                                            combined.deviations, combined.envelope)])
    from .errors import DegenerateWindow
    try:
        slope, intercept, stderr = fit_power_law(
            combined, (float(cfg["fit_tmin"]), float(cfg["tmax"])))
    except DegenerateWindow:
        slope = intercept = stderr = None
    svg_plot(out / "deviations.svg",
             [("envelope", list(combined.T_values), list(combined.envelope)),
              ("|E_T|", list(combined.T_values),
               [abs(v) or 1e-300 for v in combined.deviations])],
             f"deviation envelope ({cfg['preset']})", "T", "|E_T|")
    payload = {
        "preset": cfg["preset"],
        "mean": combined.mean_value,
        "fit": {"slope": slope, "intercept": intercept, "stderr": stderr,
                "window": [float(cfg["fit_tmin"]), float(cfg["tmax"])],
                "tolerance": float(cfg["fit_tol"])},
        "starts": len(reports),
        "exponents": model.exponents.to_json(),
    }
    secondary = model.exponents.secondary
    if slope is not None and secondary:
        payload["fit"]["matches_secondary_exponent"] = bool(
            abs(slope - secondary[0].nu) <= float(cfg["fit_tol"]))
    return payload


def cmd_peel(cfg: ExperimentConfig, out: Path) -> dict:
    model, obs, combined, reports = _run_sweep(cfg, cfg["preset"])
    rep = peel_expansion(combined, model.exponents)
    rows = []
    keys = sorted(rep.peeled.keys())
    for idx, t in enumerate(rep.T_values):
        row = [t] + [rep.peeled[k][idx] for k in keys]
        rows.append(tuple(row))
    write_csv(out / "peeled.csv",
              ["T_flow_time"] + [f"c_{i}_{j}" for (i, j) in keys], rows)
    if keys:
        svg_plot(out / "peeled.svg",
                 [(f"|c_{i}_{j}|", list(rep.T_values),
                   [abs(v) or 1e-300 for v in rep.peeled[(i, j)]])
                  for (i, j) in keys],
                 f"peeled coefficients ({cfg['preset']})", "T", "|c|")
    return {
        "preset": cfg["preset"],
        "coefficients_bounded": rep.coefficients_bounded,
        "recurrent_floor_c0": rep.recurrent_floor,
        "windows_above_floor": rep.recurrent_windows,
        "exponents": model.exponents.to_json(),
    }


def cmd_correlate(cfg: ExperimentConfig, out: Path) -> dict:
    m = IntegerMatrix.from_rows(cfg["matrix"] or [[2, 1], [1, 1]])
    rng = random.Random(int(cfg["seed"]))
    n_max = int(cfg["n_max"])
    rows = []
    summary_pairs = []
    worst_ratio = 0.0
    for pair in range(int(cfg["pairs"])):
        f = random_zero_mean_trig(rng, max_freq=int(cfg["max_freq"]))
        g = random_zero_mean_trig(rng, max_freq=int(cfg["max_freq"]))
        rep = correlation_expansion_check(m, f, g, n_max)
        late = [r.residual for r in rep.rows if r.n > rep.n0]
        ratios = [r.residual / r.bound for r in rep.rows if r.n > 0]
        worst_ratio = max(worst_ratio, max(ratios) if ratios else 0.0)
        summary_pairs.append({"pair": pair, "n0": rep.n0,
                              "max_residual_beyond_n0": max(late) if late else 0.0})
        for r in rep.rows:
            rows.append((pair, r.n, r.value.real, r.value.imag, abs(r.value),
                         r.residual, r.bound))
    write_csv(out / "correlations.csv",
              ["pair", "n_iterates", "re", "im", "abs", "residual", "decay_bound"],
              rows)
    svg_plot(out / "correlations.svg",
             [("max residual", list(range(1, n_max + 1)),
               [max((r[5] for r in rows if r[1] == n), default=1e-300) or 1e-300
                for n in range(1, n_max + 1)]),
              ("bound", list(range(1, n_max + 1)),
               [n ** 2 * math.exp(-n * spectral_split(m).h_top) for n in range(1, n_max + 1)])],
             "correlation residuals", "n", "residual", loglog=False)
    return {"matrix": [list(r) for r in m.entries], "pairs": summary_pairs,
            "worst_residual_to_bound_ratio": worst_ratio,
            "middle_sum_empty": len(spectral_split(m).expanding) == 1}


def cmd_functional(cfg: ExperimentConfig, out: Path) -> dict:
    model, obs = presets.load_preset(cfg["preset"])
    rng = random.Random(int(cfg["seed"]))
    depth = int(cfg["depth"])
    rows = []
    worst_add = worst_scale = 0.0
    holonomy_exact = True
    for trial in range(int(cfg["trials"])):
        x = model.field.from_rational(Fraction(rng.randrange(1, 10 ** 6), 10 ** 6))
        t1 = model.field.from_rational(Fraction(rng.randrange(10 ** 3, 10 ** 7), 10 ** 3))
        t2 = model.field.from_rational(Fraction(rng.randrange(10 ** 3, 10 ** 7), 10 ** 3))
        g1 = UnstableCurve(FlowPoint(x, model.field.zero), t1)
        g2, whole = concatenate(model, g1, t2)
        b1 = bufetov_beta(model, g1, depth)
        b2 = bufetov_beta(model, g2, depth)
        bw = bufetov_beta(model, whole, depth)
        add_resid = 0.0
        for a, b, c in zip(bw.coords, b1.rebase(bw.n_star).coords,
                           b2.rebase(bw.n_star).coords):
            add_resid += abs(a - b - c) ** 2
        add_resid = math.sqrt(add_resid)
        scale_resid = bufetov_beta(model, apply_pa(model, g1, 1), depth).distance(
            b1.apply_map(1))
        worst_add = max(worst_add, add_resid / bw.tail_bound)
        worst_scale = max(worst_scale, scale_resid / bw.tail_bound)
        rows.append((cfg["preset"], float(x), float(t1), float(t2), depth,
                     add_resid, scale_resid, bw.tail_bound, bw.norm()))
    write_csv(out / "functional.csv",
              ["model", "x_base_coord", "T1_flow_time", "T2_flow_time",
               "truncation_depth", "additivity_residual", "scaling_residual",
               "tail_bound", "value_norm"], rows)
    return {
        "preset": cfg["preset"], "depth": depth,
        "worst_additivity_over_tail": worst_add,
        "worst_scaling_over_tail": worst_scale,
        "c_plus_norm_bound": c_plus_bound(model),
    }


def cmd_decompose(cfg: ExperimentConfig, out: Path) -> dict:
    model, obs = presets.load_preset(cfg["preset"])
    rng = random.Random(int(cfg["seed"]))
    x = model.field.from_rational(Fraction(rng.randrange(1, 10 ** 6), 10 ** 6))
    t = model.field.from_rational(Fraction(int(float(cfg["tmax"]) * 1000), 1000))
    curve = UnstableCurve(FlowPoint(x, model.field.zero), t)
    dec = decompose_closest_returns(model, curve)
    write_csv(out / "decomposition.csv",
              ["index", "scale", "label", "base_x", "duration_flow_time"],
              [(i, it.scale, it.label, float(it.base_x), float(it.duration))
               for i, it in enumerate(dec.items)])
    payload = dec.to_json()
    payload["exact_additivity"] = dec.duration_additivity_exact()
    c, big_c = scale_constants(model)
    payload["multiplicity_bound"] = big_c * model.lam_float / c
    payload["multiplicities"] = {str(k): v for k, v in dec.multiplicities().items()}
    fv = c_plus(model, dec)
    payload["c_plus_norm"] = fv.norm()
    return payload


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="flat key=value or JSON config file")
    shared.add_argument("--preset", help="preset name")
    shared.add_argument("--out", help="output directory")
    shared.add_argument("--workers", type=int, help="worker processes")
    shared.add_argument("--seed", type=int, help="sweep seed")
    shared.add_argument("--tmax", type=float, help="largest flow time")
    shared.add_argument("--depth", type=int, help="functional truncation depth")
    shared.add_argument("--matrix", help="integer matrix as JSON rows")
    p = argparse.ArgumentParser(prog="ergodev",
                                description="deviation-of-ergodic-averages experiments")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[shared])
    bp = sub.add_parser("build-pa", parents=[shared])
    bp.add_argument("--name", default="custom")
    bp.add_argument("--top", default="0,1,2,3")
    bp.add_argument("--bottom", default="3,2,1,0")
    bp.add_argument("--loop", default=None)
    bp.add_argument("--max-len", type=int, default=12)
    bp.add_argument("--second-expanding", action="store_true")
    bp.add_argument("--real-spectrum", action="store_true")
    sub.add_parser("deviate", parents=[shared])
    sub.add_parser("peel", parents=[shared])
    sub.add_parser("correlate", parents=[shared])
    sub.add_parser("functional", parents=[shared])
    sub.add_parser("decompose", parents=[shared])
    return p


_COMMANDS = {
    "spectrum": cmd_spectrum,
    "deviate": cmd_deviate,
    "peel": cmd_peel,
    "correlate": cmd_correlate,
    "functional": cmd_functional,
    "decompose": cmd_decompose,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = {k: getattr(args, k) for k in
                     ("preset", "out", "workers", "seed", "tmax", "depth")}
        if getattr(args, "matrix", None):
            overrides["matrix"] = json.loads(args.matrix)
        cfg = load_config(args.config, overrides)
        out = Path(cfg["out"])
        if args.command == "build-pa":
            payload = cmd_build_pa(cfg, out, args)
        else:
            payload = _COMMANDS[args.command](cfg, out)
        payload["config_hash"] = config_hash(cfg.as_dict())
        payload["command"] = args.command
        write_json(out / f"{args.command.replace('-', '_')}_summary.json", payload)
        print(f"{args.command}: ok (outputs in {out})")
        return 0
    except (ConfigInvalid, PresetMissing) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 3
    except (ErgodevError, AssertionError) as e:
        print(f"invariant violation: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
