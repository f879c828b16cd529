"""Command-line front end.

JSON goes to stdout (or ``--json-out``), a human summary to stderr.
Exit codes: 0 all checks pass, 1 a violation was found, 2 usage or model error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import models, suites, thermo
from .core import MatrixModel, ModelError, State, StateSpace, VertexPolytope, space_from_json
from .instruments import groenewold_majorizes, instrument_from_json, parse_state

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2

_S = 1 / np.sqrt(2)
QUBIT_BASES = {
    "z": [np.array([1, 0]), np.array([0, 1])],
    "x": [np.array([_S, _S]), np.array([_S, -_S])],
    "y": [np.array([_S, 1j * _S]), np.array([_S, -1j * _S])],
}


class UsageError(Exception):
    pass


def _load_json(arg: str):
    """Inline JSON text or a path to a JSON file."""
    text = arg.strip()
    if not text.startswith(("{", "[")):
        path = Path(arg)
        if not path.is_file():
            raise UsageError(f"no such file: {arg}")
        text = path.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON in {arg!r}: {exc}") from None


def load_space(arg: str) -> StateSpace:
    """A registered model name, or a state-space JSON description."""
    text = arg.strip()
    if text.startswith("{") or text.endswith(".json"):
        return space_from_json(_load_json(arg))
    return models.get_model(text)


def load_state(arg: str, space: StateSpace) -> State:
    if arg == "maximally-mixed":
        if isinstance(space, MatrixModel):
            return space.state_from_matrix(np.eye(space.dim) / space.dim)
        if isinstance(space, VertexPolytope):
            return space.state(space.vertices.mean(axis=0))
    if arg == "fixture" and space.name == "omega-bar":
        return models.load_omega_bar()[1].decomp_q.target
    return parse_state(_load_json(arg), space)


def load_decomposition(spec: str, rho: State, space: StateSpace) -> thermo.PDPDecomposition:
    """Decomposition specs: ``basis:z|x|y``, ``eigen``, ``enum:<i>``, ``fixture:q|p``, or JSON."""
    kind, _, arg = spec.partition(":")
    if kind == "basis":
        if not isinstance(space, MatrixModel) or space.dim != 2 or arg not in QUBIT_BASES:
            raise UsageError(f"basis:{arg} needs a qubit model and one of x, y, z")
        return thermo.pdp_from_basis(rho.matrix, QUBIT_BASES[arg], space)
    if kind == "eigen":
        if not isinstance(space, MatrixModel):
            raise UsageError("eigen decompositions need a matrix model")
        return thermo.quantum_pdp(rho.matrix, space)
    if kind == "enum":
        ds = thermo.enumerate_pdp_decompositions(rho, space)
        i = int(arg or 0)
        if not 0 <= i < len(ds):
            raise UsageError(f"enum:{i} out of range ({len(ds)} decompositions)")
        return ds.decompositions[i]
    if kind == "fixture":
        fx = models.load_omega_bar()[1]
        if arg not in ("q", "p"):
            raise UsageError("fixture decompositions are fixture:q and fixture:p")
        return fx.decomp_q if arg == "q" else fx.decomp_p
    obj = _load_json(spec)
    states = [parse_state(s, space) for s in obj["states"]]
    return thermo.PDPDecomposition(np.array([float(p) for p in obj["probs"]]), states)


def _emit(payload: dict, json_out: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2)
    if json_out:
        Path(json_out).write_text(text + "\n")
    else:
        print(text)


# --- subcommands ------------------------------------------------------------------------

def cmd_verify(args) -> int:
    if args.model is not None:
        models.get_model(args.model)
    report = suites.run_suite(args.target, args.model, args.trials, args.seed)
    _emit(report.to_json(), args.json_out)
    print(report.summary(), file=sys.stderr)
    return report.exit_code


def cmd_cycle(args) -> int:
    t0 = time.perf_counter()
    space = load_space(args.model)
    rho = load_state(args.state, space)
    dq = load_decomposition(args.q, rho, space)
    dp = load_decomposition(args.p, rho, space)
    for name, d in (("q", dq), ("p", dp)):
        gap = float(np.max(np.abs(d.target.coords - rho.coords)))
        if gap > args.tol:
            raise thermo.CycleNotClosedError(f"decomposition {name} misses the state (gap {gap:.3e})")
    rep = thermo.cycle_delta_work(dq, dp, N=args.N, T=args.kT, k_B=1.0, tol=args.tol)
    rows = (thermo.work_curve(dq.probs, args.N, args.kT, "separation", args.points)
            + thermo.work_curve(dp.probs, args.N, args.kT, "mixing", args.points))
    if args.csv_out:
        with open(args.csv_out, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
    payload = {"command": "cycle", "model": space.name, "N": args.N, "kT": args.kT,
               "decomp_q": dq.to_json(), "decomp_p": dp.to_json(), **rep.to_json(),
               "runtime_ms": int(round(1000 * (time.perf_counter() - t0)))}
    _emit(payload, args.json_out)
    print(f"W_separation={rep.W_separation:.9f} W_mixing={rep.W_mixing:.9f} "
          f"delta_W={rep.delta_W:.9f}", file=sys.stderr)
    return EXIT_OK


def cmd_majorize(args) -> int:
    t0 = time.perf_counter()
    space = load_space(args.model)
    rho = load_state(args.state, space)
    t = instrument_from_json(_load_json(args.t), space)
    s = instrument_from_json(_load_json(args.s), space)
    kernel = groenewold_majorizes(t, s, rho, tol=args.tol)
    payload = {"command": "majorize", "model": space.name,
               "result": "Feasible" if kernel is not None else "Infeasible",
               "kernel": None if kernel is None else [[float(x) for x in row] for row in kernel.p]}
    oracle = thermo.entropy_oracle(space)
    try:
        payload["info_gain"] = {"t": thermo.info_gain(rho, t, oracle), "s": thermo.info_gain(rho, s, oracle)}
    except thermo.EntropyError as exc:
        payload["info_gain"] = None
        print(f"information gain suppressed: {exc}", file=sys.stderr)
    payload["runtime_ms"] = int(round(1000 * (time.perf_counter() - t0)))
    _emit(payload, args.json_out)
    print(f"t majorizes s at rho: {payload['result']}", file=sys.stderr)
    return EXIT_OK


def cmd_export_fixture(args) -> int:
    _, fx = models.load_omega_bar()
    _emit({"command": "export-fixture", "fixture": fx.to_json()}, args.json_out)
    return EXIT_OK


# --- parser -----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gptengine", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("target", choices=sorted(suites.SUITES))
    v.add_argument("--model", default=None, help="restrict randomized suites to one model")
    v.add_argument("--trials", type=int, default=None)
    v.add_argument("--seed", type=int, default=suites.DEFAULT_SEED)
    v.add_argument("--json-out")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("cycle", help="work ledger of a separate-then-remix cycle")
    c.add_argument("--model", required=True)
    c.add_argument("--state", required=True, help="JSON state, file, 'maximally-mixed' or 'fixture'")
    c.add_argument("--q", required=True, help="decomposition used to separate")
    c.add_argument("--p", required=True, help="decomposition used to remix")
    c.add_argument("--N", type=float, default=1.0)
    c.add_argument("--kT", type=float, default=1.0)
    c.add_argument("--tol", type=float, default=1e-9)
    c.add_argument("--points", type=int, default=21)
    c.add_argument("--csv-out")
    c.add_argument("--json-out")
    c.set_defaults(func=cmd_cycle)

    m = sub.add_parser("majorize", help="test whether instrument t majorizes s at a state")
    m.add_argument("t")
    m.add_argument("s")
    m.add_argument("--model", required=True)
    m.add_argument("--state", required=True)
    m.add_argument("--tol", type=float, default=1e-9)
    m.add_argument("--json-out")
    m.set_defaults(func=cmd_majorize)

    e = sub.add_parser("export-fixture", help="write the extended two-qubit fixture as JSON")
    e.add_argument("--json-out")
    e.set_defaults(func=cmd_export_fixture)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ModelError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
