"""Command-line front end.

Every subcommand accepts ``--config FILE`` (a JSON object); its entries act
as defaults that explicit flags override. Exit status: 0 on success, 1 when
an experiment check fails, 2 on invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from .effective_ops import EffectiveParams, count_operator, effective_spectrum, weyl_prediction
from .errors import MeshError, ParameterError, SolverError, TruncationError
from .geometry import make_curve
from .oned_models import OneDParams, interval_spectrum, weighted_spectrum
from .robin2d.disk import disk_negative_spectrum
from .robin2d.fem import RobinProblem, fem_spectrum, write_eigenfunction_csv
from .robin2d.tube import tube_spectrum
from .weyl_lab import (
    ExperimentConfig,
    bracketing_experiment,
    emit_report,
    report_csv,
    report_dict,
    sandwich_experiment,
    theorem1_experiment,
    theorem2_experiment,
)

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        raise UsageError(message)


def _float_list(text):
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


S = argparse.SUPPRESS
STDOUT = "-"

_CURVE_FLAGS = [
    (("--curve",), dict(choices=["circle", "ellipse", "star"], default=S)),
    (("--R",), dict(type=float, default=S)),
    (("--a",), dict(type=float, default=S)),
    (("--b",), dict(type=float, default=S)),
    (("--eps",), dict(type=float, default=S)),
    (("--k",), dict(type=int, default=S)),
]

_COMMANDS = {
    "oned": [
        (("--T",), dict(type=float, default=S, help="interval length (required)")),
        (("--B",), dict(type=float, default=S, help="weight slope (default 0)")),
        (("--n-eigs",), dict(type=int, default=S)),
        (("--n-grid",), dict(type=int, default=S)),
    ],
    "geometry": _CURVE_FLAGS,
    "effective": _CURVE_FLAGS
    + [
        (("--h",), dict(type=float, default=S)),
        (("--E",), dict(type=float, default=S)),
        (("--variant",), dict(choices=["plain", "plus", "minus"], default=S)),
        (("--C-plus",), dict(type=float, default=S)),
        (("--C-minus",), dict(type=float, default=S)),
        (("--n-eigs",), dict(type=int, default=S, help="number of eigenvalues (n_modes)")),
    ],
    "disk": [
        (("--R",), dict(type=float, default=S)),
        (("--h",), dict(type=float, default=S)),
        (("--ceiling",), dict(type=float, default=S)),
    ],
    "fem": _CURVE_FLAGS
    + [
        (("--h",), dict(type=float, default=S)),
        (("--n-eigs",), dict(type=int, default=S)),
        (("--mesh-size",), dict(type=float, default=S)),
        (("--refinements",), dict(type=int, default=S)),
        (("--mesh",), dict(default=S, help="triangle-list JSON mesh")),
        (("--eigenfunction-csv",), dict(default=S, help="write the ground state as x,y,value")),
    ],
    "tube": _CURVE_FLAGS
    + [
        (("--h",), dict(type=float, default=S)),
        (("--delta",), dict(type=float, default=S)),
        (("--n-eigs",), dict(type=int, default=S)),
    ],
}
_EXPERIMENT_FLAGS = _CURVE_FLAGS + [
    (("--h-grid",), dict(type=_float_list, default=S)),
    (("--E",), dict(type=float, default=S)),
    (("--eps0",), dict(type=float, default=S)),
    (("--C-plus",), dict(default=S, help="number or 'fit'")),
    (("--C-minus",), dict(default=S, help="number or 'fit'")),
]
for _name in ("theorem1", "theorem2", "sandwich"):
    _COMMANDS[_name] = _EXPERIMENT_FLAGS
_COMMANDS["bracketing"] = _EXPERIMENT_FLAGS + [(("--delta",), dict(type=_float_list, default=S, help="comma-separated widths"))]

_DEFAULTS = {
    "curve": "circle",
    "R": 1.0,
    "a": 2.0,
    "b": 1.0,
    "eps": 0.1,
    "k": 3,
    "B": 0.0,
    "n_eigs": 5,
    "n_grid": None,
    "h": 0.01,
    "E": 0.0,
    "variant": "plain",
    "C_plus": "fit",
    "C_minus": "fit",
    "ceiling": 0.0,
    "mesh_size": None,
    "refinements": 0,
    "mesh": None,
    "eigenfunction_csv": None,
    "delta": None,
    "h_grid": [1e-2, 1e-3, 1e-4],
    "eps0": 0.9,
}


def build_parser():
    parser = _Parser(prog="robinweyl", description="Semiclassical Robin Laplacian laboratory")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    parser.subcommands = {}
    for name, flags in _COMMANDS.items():
        p = sub.add_parser(name)
        parser.subcommands[name] = p
        for args, kwargs in flags:
            p.add_argument(*args, **kwargs)
        p.add_argument("--config", default=None, help="JSON file with default values")
        p.add_argument("--threads", type=int, default=S, help="worker threads (default: logical cores)")
        p.add_argument("--output", default=None, help="artifact path ('-' for stdout)")
        p.add_argument("--format", choices=["csv", "json"], default=S)
    return parser


def _dest(flag):
    return flag.lstrip("-").replace("-", "_")


def _merge(command, ns):
    """Defaults < config file < flags; unknown config keys are rejected."""
    allowed = {_dest(args[0]) for args, _ in _COMMANDS[command]} | {"threads", "format", "output"}
    params = {}
    if ns.config:
        try:
            with open(ns.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ParameterError(f"cannot read config {ns.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ParameterError("config file must hold a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        unknown = sorted(set(cfg) - allowed)
        if unknown:
            raise ParameterError(f"unknown config keys for '{command}': {unknown}")
        params.update(cfg)
    given = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
    if given.get("output") is None:
        given.pop("output", None)
        if "format" in given or "format" in params:
            # an explicit format without a path sends the artifact to stdout
            given["output"] = params.get("output") or STDOUT
    params.update(given)
    merged = {k: _DEFAULTS.get(k) for k in allowed}
    merged.update(params)
    merged.setdefault("threads", None)
    merged["threads"] = merged["threads"] or os.cpu_count() or 1
    merged["format"] = merged.get("format") or ("json" if command in ("oned", "geometry", "disk", "effective", "fem", "tube") else "csv")
    if merged["format"] not in ("csv", "json"):
        raise ParameterError("format must be csv or json")
    return merged


def _curve(p):
    kind = p["curve"]
    if kind == "circle":
        return make_curve("circle", R=p["R"]), {"kind": "circle", "R": p["R"]}
    if kind == "ellipse":
        return make_curve("ellipse", a=p["a"], b=p["b"]), {"kind": "ellipse", "a": p["a"], "b": p["b"]}
    if kind == "star":
        return make_curve("star", R=p["R"], eps=p["eps"], k=p["k"]), {"kind": "star", "R": p["R"], "eps": p["eps"], "k": p["k"]}
    raise ParameterError(f"unknown curve {kind!r}")


def _check_h(h):
    if not isinstance(h, (int, float)) or not 0 < h < 1:
        raise ParameterError("h must lie in (0, 1)")


def _summary(p, line):
    """One-line summary: stdout, or stderr when stdout carries the artifact."""
    print(line, file=sys.stderr if p["output"] == STDOUT else sys.stdout)


def _write(path, text):
    if path is None:
        return
    if path == STDOUT:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _values_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def _spectrum_out(spec, fmt):
    if fmt == "json":
        return json.dumps(spec.to_dict(), sort_keys=True) + "\n"
    return _values_csv(["n", "eigenvalue"], [(i + 1, v) for i, v in enumerate(spec.eigenvalues)])


def _cmd_oned(p):
    if p.get("T") is None:
        raise ParameterError("oned needs --T")
    n_eigs = p["n_eigs"] if p["n_eigs"] is not None else 1
    params = OneDParams(float(p["T"]), float(p["B"]), p["n_grid"])
    if n_eigs < 1:
        raise ParameterError("n_eigs must be positive")
    if params.B == 0.0:
        res = interval_spectrum(params.T, n_eigs)
    else:
        res = weighted_spectrum(params, n_eigs)
    _summary(p, f"oned T={params.T:g} B={params.B:g} method={res.method} lambda_1={res.eigenvalues[0]:.17g}")
    text = res.to_json(sort_keys=True) + "\n" if p["format"] == "json" else _values_csv(["n", "eigenvalue"], [(i + 1, v) for i, v in enumerate(res.eigenvalues)])
    _write(p["output"], text)
    return EXIT_OK


def _cmd_geometry(p):
    curve, _ = _curve(p)
    _summary(p, f"geometry {curve.kind} length={curve.length:.15g} kappa=[{curve.kappa_min:.6g}, {curve.kappa_max:.6g}] tube_halfwidth={curve.tube_halfwidth:.6g}")
    if p["format"] == "json":
        text = curve.to_json(sort_keys=True) + "\n"
    else:
        d = curve.to_dict()["samples"]
        text = _values_csv(["theta", "x", "y", "kappa"], zip(d["theta"], d["x"], d["y"], d["kappa"]))
    _write(p["output"], text)
    return EXIT_OK


def _cmd_effective(p):
    curve, _ = _curve(p)
    h = p["h"]
    _check_h(h)
    cp = 0.0 if p["C_plus"] == "fit" else float(p["C_plus"])
    cm = 0.0 if p["C_minus"] == "fit" else float(p["C_minus"])
    params = EffectiveParams(h=h, E=p["E"], variant=p["variant"], C_plus=cp, C_minus=cm, n_modes=max(8, p["n_eigs"]))
    spec = effective_spectrum(curve, params)
    n = count_operator(curve, math.sqrt(h), 1.0, 0.0, params.E)
    w = weyl_prediction(curve, h, params.E)
    _summary(p, f"effective {curve.kind} h={h:g} variant={params.variant} mu_1={spec.eigenvalues[0]:.12g} N(h^1/2 L - kappa <= {params.E:g})={n} weyl={w:.6g}")
    _write(p["output"], _spectrum_out(spec, p["format"]))
    return EXIT_OK


def _cmd_disk(p):
    h, R, ceiling = p["h"], p["R"], p["ceiling"]
    _check_h(h)
    if not R > 0:
        raise ParameterError("R must be positive")
    if ceiling > 0:
        raise ParameterError("ceiling must be nonpositive")
    spec = disk_negative_spectrum(R, h, ceiling)
    low = f"{spec.eigenvalues[0]:.12g}" if len(spec) else "none"
    _summary(p, f"disk R={R:g} h={h:g} ceiling={ceiling:g} count={len(spec)} lowest={low}")
    _write(p["output"], _spectrum_out(spec, p["format"]))
    return EXIT_OK


def _cmd_fem(p):
    curve, _ = _curve(p)
    h = p["h"]
    _check_h(h)
    if p["n_eigs"] < 1 or p["refinements"] < 0:
        raise ParameterError("n_eigs must be positive and refinements nonnegative")
    prob = RobinProblem(curve, h, float("inf"), mesh_size=p["mesh_size"], refinements=p["refinements"], mesh_file=p["mesh"])
    mesh = prob.build_mesh()
    spec = fem_spectrum(prob, p["n_eigs"], mesh=mesh, keep_vectors=p["eigenfunction_csv"] is not None)
    if p["eigenfunction_csv"]:
        u = spec.eigenvectors[:, 0]
        write_eigenfunction_csv(mesh, u * np.sign(u[np.argmax(np.abs(u))]), p["eigenfunction_csv"])
    _summary(p, f"fem {curve.kind} h={h:g} nodes={mesh.n_nodes} mu_1={spec.eigenvalues[0]:.10g}")
    _write(p["output"], _spectrum_out(spec, p["format"]))
    return EXIT_OK


def _cmd_tube(p):
    curve, _ = _curve(p)
    h = p["h"]
    _check_h(h)
    delta = p["delta"]
    if isinstance(delta, list):
        delta = delta[0]
    spec = tube_spectrum(curve, h, delta, p["n_eigs"])
    _summary(p, f"tube {curve.kind} h={h:g} delta={spec.meta['delta']:.6g} mu_1={spec.eigenvalues[0]:.12g}")
    _write(p["output"], _spectrum_out(spec, p["format"]))
    return EXIT_OK


def _experiment_config(p, command):
    _, spec = _curve(p)
    h_grid = p["h_grid"]
    if not isinstance(h_grid, list):
        h_grid = _float_list(h_grid)

    def const(v):
        if v == "fit":
            return "fit"
        try:
            return float(v)
        except (TypeError, ValueError) as exc:
            raise ParameterError(f"sandwich constant must be a number or 'fit', got {v!r}") from exc

    deltas = p.get("delta") or []
    if not isinstance(deltas, list):
        deltas = _float_list(deltas)
    if command == "bracketing" and not deltas:
        deltas = [0.3, 0.5, 0.8]
    return ExperimentConfig(
        curve=spec,
        h_grid=tuple(h_grid),
        E=float(p["E"]),
        epsilon0=float(p["eps0"]),
        C_plus=const(p["C_plus"]),
        C_minus=const(p["C_minus"]),
        delta_list=tuple(deltas),
        threads=int(p["threads"]),
    )


_EXPERIMENTS = {
    "theorem1": theorem1_experiment,
    "theorem2": theorem2_experiment,
    "sandwich": sandwich_experiment,
    "bracketing": bracketing_experiment,
}


def _cmd_experiment(p, command):
    config = _experiment_config(p, command)
    report = _EXPERIMENTS[command](config)
    if p["output"]:
        if p["format"] == "json":
            _write(p["output"], json.dumps(report_dict(report), indent=2, sort_keys=True) + "\n")
        elif p["output"] == STDOUT:
            _write(STDOUT, report_csv(report))
        else:
            emit_report(report, p["output"])
    if command in ("theorem1", "theorem2"):
        last = report.rows[-1]
        detail = f"final ratio1={last['ratio1']} ratio2={last['ratio2']}"
    elif command == "sandwich":
        s = report.summary
        detail = f"C_fit={s['C_fit']:.4g} violations={s['violations']} residual_constant={s['residual_constant']:.4g}"
    else:
        detail = f"max_log_slope={report.summary['max_log_slope']}"
    status = "PASS" if report.passed else "FAIL"
    _summary(p, f"{command} {status} {detail}")
    return EXIT_OK if report.passed else EXIT_FAILED


def run(argv=None) -> int:
    """Parse ``argv``, dispatch, and return the exit status."""
    parser = build_parser()
    try:
        ns, extra = parser.parse_known_args(argv)
        if ns.command is None:
            parser.print_help(sys.stderr)
            return EXIT_INPUT
        if extra:
            parser.subcommands[ns.command].print_help(sys.stderr)
            raise UsageError(f"unrecognized arguments: {' '.join(extra)}")
        p = _merge(ns.command, ns)
        if ns.command in _EXPERIMENTS:
            return _cmd_experiment(p, ns.command)
        return globals()[f"_cmd_{ns.command}"](p)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ParameterError, TruncationError, MeshError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main():
    sys.exit(run())
