"""Command-line front end: validate | synthesize | simulate | converge | selftest.

Configuration is a single JSON file; tabular outputs are CSV and summaries are
JSON, with every float printed to 17 significant digits so written values
round-trip exactly.

Exit codes: 0 success, 1 unreadable/inconsistent config, 2 model rejected,
3 output I/O failure, 4 trajectory divergence, 5 not enough usable rows.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import __version__
from .convergence import (default_thresholds, estimate_order, evaluate_verdicts,
                          scenario_by_name, sweep)
from .dynamics import SimState, energy, exact_linear_propagate, run_verlet
from .errors import (ConfigError, DivergenceError, GradchainError, InsufficientDataError,
                     ValidationError)
from .lattice import sample_initial
from .model import InitialData, ModelSpec, PolynomialR, reduce_quadratic, validate_model
from .selftest import run_all
from .synthesis import assemble_stiffness, netlist_rows, verify_realizability

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_MODEL = 2
EXIT_IO = 3
EXIT_DIVERGED = 4
EXIT_INSUFFICIENT = 5


def _g17(x: float) -> str:
    return f"{float(x):.17g}"


def _json_text(obj, indent: int = 0) -> str:
    """Deterministic JSON with floats at 17 significant digits."""
    pad = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return _g17(x) if math.isfinite(x) else "null"
    if isinstance(obj, (list, tuple, np.ndarray)):
        items = [_json_text(v, indent + 1) for v in list(obj)]
        if not items:
            return "[]"
        body = ",\n".join("  " * (indent + 1) + it for it in items)
        return "[\n" + body + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        lines = [
            f'{"  " * (indent + 1)}{json.dumps(str(k))}: {_json_text(v, indent + 1)}'
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(lines) + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _load_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def model_from_config(cfg: dict) -> ModelSpec:
    try:
        m = cfg["model"]
    except KeyError:
        raise ConfigError("config is missing the 'model' block") from None
    if ("A" in m) == ("Q" in m):
        raise ConfigError("the model block needs exactly one of 'A' or 'Q'")
    if "Q" in m:
        A = tuple(float(a) for a in reduce_quadratic(m["Q"]))
    else:
        A = tuple(float(a) for a in m["A"])
    n = int(m.get("n", len(A) - 1))
    if n != len(A) - 1:
        raise ConfigError(f"n = {n} inconsistent with {len(A)} weights")
    R = PolynomialR(tuple((int(p), int(q), float(c)) for p, q, c in m.get("R", [])))
    init = m.get("initial", {})
    initial = InitialData(
        kind=init.get("kind", "trig"),
        u_cos=tuple(float(x) for x in init.get("u_cos", [])),
        u_sin=tuple(float(x) for x in init.get("u_sin", [])),
        v_cos=tuple(float(x) for x in init.get("v_cos", [])),
        v_sin=tuple(float(x) for x in init.get("v_sin", [])),
        envelope_power=int(init.get("envelope_power", 0)),
    )
    return ModelSpec(
        n=n, A=A, R=R,
        L=float(m.get("L", 2.0 * math.pi)),
        bc=m.get("bc", "periodic"),
        T=float(m.get("T", 1.0)),
        initial=initial,
    )


def _mesh_list(sweep_cfg: dict, L: float) -> list:
    if ("N" in sweep_cfg) == ("eps" in sweep_cfg):
        raise ConfigError("the sweep block needs exactly one of 'N' or 'eps'")
    if "N" in sweep_cfg:
        return [int(N) for N in sweep_cfg["N"]]
    out = []
    for e in sweep_cfg["eps"]:
        N = L / float(e)
        if abs(N - round(N)) > 1e-9 * max(abs(N), 1.0):
            raise ConfigError(f"eps = {e} does not divide L = {L} into whole cells")
        out.append(int(round(N)))
    return out


def _default_times(T: float, count: int = 5) -> list:
    return [T * (i + 1) / count for i in range(count)]


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text + "\n")


def _prepare_out(out_dir: str):
    import os

    os.makedirs(out_dir, exist_ok=True)
    return out_dir


# ---------------------------------------------------------------------------
# commands

def cmd_validate(args) -> int:
    cfg = _load_config(args.config)
    spec = model_from_config(cfg)
    report = validate_model(spec, eps0=cfg.get("eps0"))
    print(_json_text(report.as_dict()))
    return EXIT_OK if report.ok else EXIT_MODEL


def cmd_synthesize(args) -> int:
    cfg = _load_config(args.config)
    spec = model_from_config(cfg)
    vrep = validate_model(spec, eps0=cfg.get("eps0"))
    if not vrep.ok:
        print(_json_text(vrep.as_dict()), file=sys.stderr)
        return EXIT_MODEL
    blk = cfg.get("synthesize", {})
    if "N" not in blk:
        raise ConfigError("the synthesize block needs 'N'")
    N = int(blk["N"])
    eps = spec.L / N
    net = assemble_stiffness(spec.A, eps, N, spec.bc)
    rng = np.random.default_rng(args.seed)
    rrep = verify_realizability(net, A=spec.A, rng=rng)
    out = _prepare_out(args.out)
    try:
        rows = [(i, j, _g17(k)) for i, j, k in netlist_rows(net)]
        _write_csv(f"{out}/netlist.csv", ("i", "j", "k"), rows)
        payload = rrep.as_dict()
        payload.update({
            "N": N,
            "eps": eps,
            "band": list(net.band),
            "grounding": net.grounding,
            "rows_written": len(rows),
        })
        _write_text(f"{out}/realizability.json", _json_text(payload))
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"netlist: {len(rows)} springs -> {out}/netlist.csv "
          f"(realizability {'ok' if rrep.ok else 'FAILED'})")
    return EXIT_OK if rrep.ok else EXIT_MODEL


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    spec = model_from_config(cfg)
    vrep = validate_model(spec, eps0=cfg.get("eps0"))
    if not vrep.ok:
        print(_json_text(vrep.as_dict()), file=sys.stderr)
        return EXIT_MODEL
    blk = cfg.get("simulate", {})
    if "N" not in blk:
        raise ConfigError("the simulate block needs 'N'")
    N = int(blk["N"])
    integrator = blk.get("integrator", "verlet")
    if integrator not in ("verlet", "exact"):
        raise ConfigError(f"unknown integrator {integrator!r}")
    if integrator == "exact" and not (spec.is_linear and spec.bc == "periodic"):
        raise ConfigError("the exact integrator needs a linear periodic model")
    cfl = blk.get("cfl")
    dt = blk.get("dt")
    times = [float(t) for t in blk.get("sample_times", _default_times(spec.T))]
    eps = spec.L / N
    net = assemble_stiffness(spec.A, eps, N, spec.bc)
    state = SimState(0.0, sample_initial(spec, N, "u"), sample_initial(spec, N, "v"))
    states = [state]
    diverged_after = None
    for t in times:
        try:
            if integrator == "exact":
                nxt = exact_linear_propagate(spec, states[0], t)
            else:
                (nxt,) = run_verlet(spec, net, states[-1], [t], cfl=cfl, dt=dt)
        except DivergenceError:
            diverged_after = states[-1].t
            break
        states.append(nxt)
    out = _prepare_out(args.out)
    traj_rows = []
    energy_rows = []
    for st in states:
        ts = _g17(st.t)
        for i in range(st.u.values.size):
            traj_rows.append((ts, i, _g17(st.u.values[i]), _g17(st.v.values[i])))
        eb = energy(spec, net, st)
        energy_rows.append((ts, _g17(eb.kinetic), _g17(eb.quadratic),
                            _g17(eb.nonlinear), _g17(eb.total)))
    try:
        _write_csv(f"{out}/trajectory.csv", ("t", "i", "u", "v"), traj_rows)
        _write_csv(f"{out}/energy.csv", ("t", "kinetic", "quadratic", "nonlinear", "total"),
                   energy_rows)
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    if diverged_after is not None:
        print(f"error: trajectory diverged; last finite sample at t = {_g17(diverged_after)}",
              file=sys.stderr)
        return EXIT_DIVERGED
    print(f"simulated {len(states) - 1} sample times on N = {N} -> {out}/trajectory.csv")
    return EXIT_OK


def cmd_converge(args) -> int:
    cfg = _load_config(args.config)
    spec = model_from_config(cfg)
    vrep = validate_model(spec, eps0=cfg.get("eps0"))
    if not vrep.ok:
        print(_json_text(vrep.as_dict()), file=sys.stderr)
        return EXIT_MODEL
    blk = cfg.get("sweep", {})
    N_list = _mesh_list(blk, spec.L)
    times = blk.get("sample_times")
    if times is not None:
        times = [float(t) for t in times]
    scenario = scenario_by_name(spec, blk.get("scenario", "auto"))
    report = sweep(
        spec, N_list,
        sample_times=times,
        integrator=blk.get("integrator", "verlet"),
        cfl=blk.get("cfl"),
        ratio=int(blk.get("ratio", 16)),
        scenario=scenario,
        oracle_cfl=blk.get("oracle_cfl"),
        self_check=bool(blk.get("self_check", True)),
        threads=args.threads,
    )
    thresholds = dict(default_thresholds(scenario.name))
    thresholds.update(blk.get("thresholds", {}))
    verdicts = evaluate_verdicts(report, blk.get("thresholds"))
    out = _prepare_out(args.out)
    csv_rows = []
    for row in report.rows:
        for s in row.samples:
            csv_rows.append((scenario.name, _g17(row.eps), row.N, _g17(s.t), _g17(s.W),
                             _g17(s.E_total), _g17(s.E_drift), _g17(row.wall_s)))
        if row.failed:
            csv_rows.append((scenario.name, _g17(row.eps), row.N, "", "", "", "",
                             _g17(row.wall_s)))
    summary = {
        "scenario": scenario.name,
        "extrapolated": scenario.extrapolated,
        "order": report.order,
        "order_residual": report.order_residual,
        "rows_used": report.rows_used,
        "eps": list(report.eps_values()),
        "terminal_W": list(report.terminal_W()),
        "thresholds": thresholds,
        "verdicts": verdicts,
        "oracle_check": report.oracle_check,
        "oracle_wall_s": report.oracle_wall_s,
        "notes": list(report.notes),
    }
    try:
        _write_csv(f"{out}/report.csv",
                   ("scenario", "eps", "N", "t", "W", "E_total", "E_drift_rel", "wall_s"),
                   csv_rows)
        _write_text(f"{out}/summary.json", _json_text(summary))
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    if report.order is None and len(N_list) > 0:
        print("error: fewer than 3 usable rows; no order estimate", file=sys.stderr)
        return EXIT_INSUFFICIENT
    status = "pass" if verdicts.get("pass") else "FAIL"
    order_txt = "n/a" if report.order is None else f"{report.order:.3f}"
    print(f"{scenario.name}: order {order_txt}, verdicts {status} -> {out}/summary.json")
    return EXIT_OK if verdicts.get("pass") else EXIT_MODEL


def cmd_selftest(args) -> int:
    report = run_all(seed=args.seed)
    for r in report.results:
        mark = "PASS" if r.ok else "FAIL"
        print(f"[{mark}] {r.name:<22s} worst = {r.worst:12.5e}  {r.detail}")
    print(f"selftest: {'all suites passed' if report.ok else 'FAILURES detected'} "
          f"(seed = {args.seed})")
    return EXIT_OK if report.ok else EXIT_MODEL


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradchain",
        description="Design, simulate, and measure multi-neighbor spring chains "
                    "that approximate higher-gradient elastic continua.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="path to the JSON run configuration")
    common.add_argument("--out", default=".", help="output directory (default: current)")
    common.add_argument("--seed", type=int, default=0,
                        help="seed for randomized checks (default 0)")
    common.add_argument("--threads", type=int, default=1,
                        help="worker threads for independent sweep rows")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common],
                   help="check model admissibility").set_defaults(func=cmd_validate)
    sub.add_parser("synthesize", parents=[common],
                   help="emit the spring netlist and its audit").set_defaults(func=cmd_synthesize)
    sub.add_parser("simulate", parents=[common],
                   help="integrate one chain and dump trajectory/energy").set_defaults(func=cmd_simulate)
    sub.add_parser("converge", parents=[common],
                   help="run a mesh sweep and fit the deviation order").set_defaults(func=cmd_converge)
    sub.add_parser("selftest", parents=[common],
                   help="run the seeded property suites").set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.func is not cmd_selftest and not args.config:
        print("error: --config is required for this command", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (json.JSONDecodeError, ConfigError) as exc:
        print(f"error: bad configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationError as exc:
        print(f"error: model rejected: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except InsufficientDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except GradchainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
