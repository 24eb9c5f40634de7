"""Command-line front end.

Exit codes: 0 ok, 2 parse/schema error, 3 structural condition violated
(not strongly connected, no spanning tree, invalid complex), 4 numerical
failure, 5 not controllable, 6 incomplete specification (no inverse).

Vertex and edge labels are 1-based in every file and flag.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from contextlib import contextmanager
from pathlib import Path

import jsonschema
import numpy as np

from . import dynamics as dyn
from . import io
from .complexes import (
    ChainComplex,
    HeatComplexSystem,
    coboundary,
    entropy_rate,
    heat_field,
    is_closed,
    validate_complex,
)
from .errors import (
    BracketingFailed,
    DimensionChainBroken,
    DimensionMismatch,
    DisconnectedInput,
    GraphError,
    NoInverseProvided,
    NonFiniteState,
    NoSpanningTree,
    NotBalanced,
    NotControllable,
    NotLaplacian,
    NotStrictlyConvex,
    NotStronglyConnected,
    NumericallyIndeterminate,
    OutOfEntropyDomain,
)
from .graph import connected_components, graph_from_dict, strongly_connected_components
from .kirchhoff import balance, consensus_value, sigma_per_component
from .laplacian import (
    LaplacianKind,
    LaplacianMatrix,
    consensus_laplacian,
    flow_laplacian,
    is_balanced,
    symmetric_laplacian,
)
from .storage import (
    GeneralizedSystem,
    available_storage_general,
    available_storage_generalized,
    controllability_check,
)

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_PARSE, EXIT_STRUCTURE, EXIT_NUMERIC, EXIT_CONTROL, EXIT_INCOMPLETE = 0, 2, 3, 4, 5, 6

BUILDERS = {
    "symmetric": symmetric_laplacian,
    "flow": flow_laplacian,
    "consensus": consensus_laplacian,
}


class InputError(Exception):
    """Malformed input file; message names the location."""


def _read_json(path: str | None, schema: dict | None = None):
    label = path or "<stdin>"
    text = sys.stdin.read() if path in (None, "-") else Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{label}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if schema is not None:
        _validate(data, schema, label)
    return data


def _validate(data, schema, label):
    try:
        jsonschema.validate(data, schema)
    except jsonschema.ValidationError as exc:
        field = "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in exc.absolute_path)
        raise InputError(f"{label}: field {field.lstrip('.') or '<root>'}: {exc.message}") from exc


@contextmanager
def _output(path: str | None):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _emit(args, obj):
    with _output(args.output) as fh:
        fh.write(io.dumps(obj) + "\n")


def _load_graph(args):
    data = _read_json(args.input, io.GRAPH_SCHEMA)
    try:
        return graph_from_dict(data)
    except GraphError as exc:
        raise InputError(f"{args.input or '<stdin>'}: field edges: {exc}") from exc


def _parse_vector(text: str, name: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.replace(" ", "").split(",") if t], dtype=float)
    except ValueError as exc:
        raise InputError(f"--{name}: expected comma-separated numbers") from exc


def _one_based(components):
    return [[v + 1 for v in comp] for comp in components]


def _laplacian_from(data, label) -> LaplacianMatrix:
    if "graph" in data:
        _validate(data["graph"], io.GRAPH_SCHEMA, f"{label}: laplacian.graph")
        kind = data.get("kind", "flow")
        if kind not in BUILDERS:
            raise InputError(f"{label}: field laplacian.kind: unknown kind {kind!r}")
        return BUILDERS[kind](graph_from_dict(data["graph"]))
    _validate(data, io.MATRIX_SCHEMA, f"{label}: laplacian")
    try:
        return LaplacianMatrix(np.array(data["entries"], dtype=float), data.get("kind", "flow"))
    except ValueError as exc:
        raise InputError(f"{label}: field laplacian.entries: {exc}") from exc


def _hamiltonian_from(data, n: int, label) -> dyn.HamiltonianSpec:
    _validate(data, io.HAMILTONIAN_SCHEMA, f"{label}: hamiltonian")
    kind = data["kind"]
    params = data.get("params") or {}
    try:
        if kind == "quadratic":
            coeffs = params.get("coefficients", [1.0] * n) if isinstance(params, dict) else params
            H = dyn.quadratic(coeffs)
        elif kind == "kinetic":
            masses = params.get("masses") if isinstance(params, dict) else params
            if masses is None:
                raise InputError(f"{label}: field hamiltonian.params.masses: required")
            H = dyn.kinetic(masses)
        elif kind == "exponential":
            H = dyn.exponential(n)
        else:
            coeffs = params.get("coefficients") if isinstance(params, dict) else params
            if not coeffs:
                raise InputError(f"{label}: field hamiltonian.params.coefficients: required")
            H = dyn.polynomial(n, coeffs)
    except ValueError as exc:
        raise InputError(f"{label}: field hamiltonian.params: {exc}") from exc
    if H.n != n:
        raise InputError(f"{label}: field hamiltonian.params: {H.n} components for {n} vertices")
    return H


# -- subcommands --------------------------------------------------------------

def cmd_analyze(args) -> int:
    g = _load_graph(args)
    L = BUILDERS[args.kind](g)
    weak = connected_components(g)
    strong = strongly_connected_components(g)
    weak_sets = [set(c) for c in weak]
    balanceable = all(any(set(s) == w for s in strong) for w in weak_sets)
    sig = sigma_per_component(L, left=(args.kind == "consensus"), jobs=args.jobs)
    sym = 0.5 * (L.entries + L.entries.T)
    eig = np.linalg.eigvalsh(sym)
    report = {
        "n": g.n,
        "m": g.m,
        "weak_components": _one_based(weak),
        "strong_components": _one_based(strong),
        "strongly_connected": len(strong) == 1,
        "balanceable": balanceable,
        "laplacian_kind": L.kind.value,
        "sigma": sig.values,
        "normalized": sig.normalized,
        "strictly_positive": sig.strictly_positive,
        "balanced": is_balanced(L, tol=args.tolerance),
        "symmetric_part": {"min_eigenvalue": float(eig[0]), "max_eigenvalue": float(eig[-1])},
    }
    if args.x0 is not None:
        x0 = _parse_vector(args.x0, "x0")
        if args.kind == "consensus":
            report["consensus_value"] = consensus_value(L, x0)
    _emit(args, report)
    if args.require_balanceable and not balanceable:
        logger.error("graph has a weak component that is not strongly connected")
        return EXIT_STRUCTURE
    return EXIT_OK


def cmd_laplacian(args) -> int:
    g = _load_graph(args)
    _emit(args, BUILDERS[args.kind](g).to_dict())
    return EXIT_OK


def cmd_sigma(args) -> int:
    g = _load_graph(args)
    L = BUILDERS[args.kind](g)
    sig = sigma_per_component(L, left=(args.kind == "consensus"), jobs=args.jobs)
    _emit(args, sig.to_dict())
    return EXIT_OK


def cmd_balance(args) -> int:
    g = _load_graph(args)
    Lb, Sigma = balance(flow_laplacian(g), normalized=args.normalized)
    out = Lb.to_dict()
    out["sigma"] = np.diag(Sigma)
    _emit(args, out)
    return EXIT_OK


def cmd_consensus(args) -> int:
    g = _load_graph(args)
    Lc = consensus_laplacian(g)
    x0 = _parse_vector(args.x0, "x0")
    if len(x0) != g.n:
        raise InputError(f"--x0: expected {g.n} values, got {len(x0)}")
    c = consensus_value(Lc, x0)
    sig = sigma_per_component(Lc, left=True)
    out = {
        "sigma": sig.values,
        "normalized": sig.normalized,
        "support": [i + 1 for i in np.flatnonzero(sig.values > 0)],
        "consensus_value": c,
    }
    if args.T is not None:
        dt = args.dt or dyn.default_step(Lc)
        traj = dyn.simulate(lambda x: -Lc.entries @ x, x0, dt, args.T)
        out["final_state"] = traj.final
        out["max_deviation"] = float(np.abs(traj.final - c).max())
    _emit(args, out)
    return EXIT_OK


def _trajectory_rows(traj, names):
    for k, t in enumerate(traj.times):
        yield [t, *traj.states[k], *(traj.diagnostics[nm][k] for nm in names)]


def _write_trajectory(args, traj, prefix, names):
    n = traj.states.shape[1]
    header = ["t", *(f"{prefix}{i + 1}" for i in range(n)), *names]
    with _output(args.output) as fh:
        io.write_csv(fh, header, _trajectory_rows(traj, names))


def _summary_stream(args):
    # keep CSV on stdout clean when no output file is given
    return sys.stderr if args.output in (None, "-") else sys.stdout


def cmd_simulate(args) -> int:
    label = args.input or "<stdin>"
    data = _read_json(args.input)
    for key in ("laplacian", "hamiltonian", "x0"):
        if key not in data:
            raise InputError(f"{label}: field {key}: required")
    L = _laplacian_from(data["laplacian"], label)
    H = _hamiltonian_from(data["hamiltonian"], L.n, label)
    x0 = np.asarray(data["x0"], dtype=float)
    if x0.shape != (L.n,):
        raise InputError(f"{label}: field x0: expected {L.n} values")
    dt = args.dt or data.get("dt") or dyn.default_step(L)
    T = args.T or data.get("T")
    if T is None:
        raise InputError(f"{label}: field T: required (or pass --T)")
    if L.kind is LaplacianKind.CONSENSUS:
        weights = sigma_per_component(L, left=True).values
    else:
        weights = np.ones(L.n)
    field_ = dyn.gradient_flow_field(L, H)
    names = ["H", "conserved", "dissipation_rate"]
    diagnostics = {
        "H": H,
        "conserved": lambda x: float(weights @ x),
        "dissipation_rate": lambda x: float(-H.grad(x) @ field_(x)),
    }
    code = EXIT_OK
    try:
        traj = dyn.simulate(field_, x0, dt, T, diagnostics, converge_tol=args.tolerance)
    except NonFiniteState as exc:
        traj = exc.trajectory
        code = EXIT_NUMERIC
        logger.error("%s; partial trajectory written", exc)
    _write_trajectory(args, traj, "x", names)
    rate = traj.diagnostics["dissipation_rate"]
    conserved = traj.diagnostics["conserved"]
    summary = {
        "final_time": traj.times[-1],
        "steps": len(traj.times) - 1,
        "final_state": traj.final,
        "total_dissipated": float(np.trapezoid(rate, traj.times)) if len(rate) > 1 else 0.0,
        "energy_change": float(traj.diagnostics["H"][-1] - traj.diagnostics["H"][0]),
        "conserved_drift": float(np.abs(conserved - conserved[0]).max()),
    }
    print(io.dumps(summary), file=_summary_stream(args))
    return code


def cmd_storage(args) -> int:
    label = args.input or "<stdin>"
    data = _read_json(args.input)
    if "hamiltonian" not in data:
        raise InputError(f"{label}: field hamiltonian: required")
    if args.x is not None:
        x = _parse_vector(args.x, "x")
    elif "x" in data:
        x = np.asarray(data["x"], dtype=float)
    else:
        raise InputError(f"{label}: field x: required (or pass --x)")
    H = _hamiltonian_from(data["hamiltonian"], len(x), label)
    out = {}
    if "sources" in data:
        if "graph" not in data:
            raise InputError(f"{label}: field graph: required when sources are given")
        _validate(data["graph"], io.GRAPH_SCHEMA, f"{label}: graph")
        g = graph_from_dict(data["graph"])
        if g.n != len(x):
            raise InputError(f"{label}: field x: expected {g.n} values")
        sources = [int(j) - 1 for j in data["sources"]]
        system = GeneralizedSystem.from_graph(g, sources, H)
        if args.check_controllability:
            out["controllable"] = controllability_check(system)
        result = available_storage_generalized(system, x, numeric_inverse=args.numeric_inverse)
    else:
        result = available_storage_general(H, x, numeric_inverse=args.numeric_inverse)
    out = {**result.to_dict(), **out}
    _emit(args, out)
    return EXIT_OK


def _load_complex(args, data=None, label=None) -> ChainComplex:
    label = label or args.input or "<stdin>"
    if data is None:
        data = _read_json(args.input, io.COMPLEX_SCHEMA)
    else:
        _validate(data, io.COMPLEX_SCHEMA, label)
    try:
        return ChainComplex.from_dict(data)
    except KeyError as exc:
        raise InputError(f"{label}: field boundaries.{exc.args[0]}: missing") from exc
    except ValueError as exc:
        raise InputError(f"{label}: field boundaries: {exc}") from exc


def cmd_complex_validate(args) -> int:
    c = _load_complex(args)
    valid = validate_complex(c)
    products = {
        f"d{j - 1}*d{j}": (c.boundary(j - 1) @ c.boundary(j)).tolist()
        for j in range(2, c.k + 1)
    }
    _emit(args, {"valid": valid, "k": c.k, "cells": list(c.cell_counts),
                 "closed": is_closed(c) if c.k >= 1 else False, "products": products,
                 "coboundaries": {f"d{j}": coboundary(c, j).tolist() for j in range(1, c.k + 1)}})
    return EXIT_OK if valid else EXIT_STRUCTURE


def cmd_complex_simulate(args) -> int:
    label = args.input or "<stdin>"
    data = _read_json(args.input)
    if "complex" not in data or "u0" not in data:
        raise InputError(f"{label}: fields complex and u0 are required")
    c = _load_complex(args, data["complex"], f"{label}: complex")
    if not validate_complex(c):
        logger.error("boundary compositions do not vanish")
        return EXIT_STRUCTURE
    try:
        system = HeatComplexSystem(c, data.get("conduction", 1.0))
    except ValueError as exc:
        raise InputError(f"{label}: field conduction: {exc}") from exc
    u0 = np.asarray(data["u0"], dtype=float)
    dt = args.dt or data.get("dt") or 1e-3
    T = args.T or data.get("T")
    if T is None:
        raise InputError(f"{label}: field T: required (or pass --T)")
    names = ["entropy", "energy", "entropy_rate"]
    diagnostics = {
        "entropy": system.entropy.value,
        "energy": lambda u: float(np.sum(u)),
        "entropy_rate": lambda u: entropy_rate(system, u),
    }
    code = EXIT_OK
    try:
        traj = dyn.simulate(heat_field(system), u0, dt, T, diagnostics)
    except NonFiniteState as exc:
        traj = exc.trajectory
        code = EXIT_NUMERIC
    _write_trajectory(args, traj, "u", names)
    s = traj.diagnostics["entropy"]
    e = traj.diagnostics["energy"]
    summary = {
        "final_time": traj.times[-1],
        "final_state": traj.final,
        "entropy_increase": float(s[-1] - s[0]),
        "min_entropy_step": float(np.diff(s).min()) if len(s) > 1 else 0.0,
        "energy_drift": float(np.abs(e - e[0]).max()),
    }
    print(io.dumps(summary), file=_summary_stream(args))
    return code


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i", help="input JSON file (default: stdin)")
    common.add_argument("--output", "-o", help="output file (default: stdout)")
    common.add_argument("--tolerance", type=float, default=None,
                        help="override the balance tolerance (analyze) or enable early "
                             "stopping when ||x'|| drops below it (simulate)")
    common.add_argument("--jobs", type=int, default=1, help="threads for cofactor evaluation")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="physnet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="connectivity, sigma and balance report")
    p.add_argument("--kind", choices=sorted(BUILDERS), default="flow")
    p.add_argument("--x0", help="initial state for the consensus value (kind=consensus)")
    p.add_argument("--require-balanceable", action="store_true",
                   help="exit 3 unless every weak component is strongly connected")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("laplacian", parents=[common], help="emit a Laplacian matrix")
    p.add_argument("--kind", choices=sorted(BUILDERS), default="flow")
    p.set_defaults(func=cmd_laplacian)

    p = sub.add_parser("sigma", parents=[common], help="Matrix-Tree kernel vector")
    p.add_argument("--kind", choices=["flow", "consensus"], default="flow")
    p.set_defaults(func=cmd_sigma)

    p = sub.add_parser("balance", parents=[common], help="balanced Laplacian L Sigma")
    p.add_argument("--normalized", action="store_true", help="scale sigma to max entry 1")
    p.set_defaults(func=cmd_balance)

    p = sub.add_parser("simulate", parents=[common], help="integrate x' = -L dH(x)")
    p.add_argument("--dt", type=float)
    p.add_argument("--T", type=float)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("consensus", parents=[common], help="consensus value of x' = -Lc x")
    p.add_argument("--x0", required=True)
    p.add_argument("--T", type=float, help="also simulate up to T")
    p.add_argument("--dt", type=float)
    p.set_defaults(func=cmd_consensus)

    p = sub.add_parser("storage", parents=[common], help="available storage")
    p.add_argument("--x", help="state, comma separated (overrides the file)")
    p.add_argument("--check-controllability", action="store_true",
                   help="report the Kalman controllability test in the output")
    p.add_argument("--numeric-inverse", action="store_true",
                   help="invert dH numerically when no closed-form inverse exists")
    p.set_defaults(func=cmd_storage)

    p = sub.add_parser("complex", help="chain complexes")
    csub = p.add_subparsers(dest="complex_command", required=True)
    q = csub.add_parser("validate", parents=[common], help="check d_{j-1} d_j = 0")
    q.set_defaults(func=cmd_complex_validate)
    q = csub.add_parser("simulate", parents=[common], help="heat transfer on a 2-complex")
    q.add_argument("--dt", type=float)
    q.add_argument("--T", type=float)
    q.set_defaults(func=cmd_complex_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="physnet: %(message)s")
    try:
        return args.func(args)
    except (InputError, OSError) as exc:
        print(f"physnet: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (NotStronglyConnected, NoSpanningTree, DisconnectedInput, NotBalanced,
            NotLaplacian, DimensionChainBroken, DimensionMismatch) as exc:
        print(f"physnet: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_STRUCTURE
    except (NonFiniteState, NumericallyIndeterminate, BracketingFailed,
            NotStrictlyConvex, OutOfEntropyDomain) as exc:
        print(f"physnet: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except NotControllable as exc:
        print(f"physnet: NotControllable: {exc}", file=sys.stderr)
        return EXIT_CONTROL
    except NoInverseProvided as exc:
        print(f"physnet: NoInverseProvided: {exc}", file=sys.stderr)
        return EXIT_INCOMPLETE


if __name__ == "__main__":
    sys.exit(main())
