"""``periodbounds`` command line.

Every subcommand prints one JSON document (or CSV for ``figure``) that
echoes the resolved configuration and the package version.  Output bytes
depend only on the configuration.

Exit status: 0 success, 2 domain error, 3 numerical non-convergence,
4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from . import constants, optimizer, orbits, pfunc
from ._errors import ConvergenceError, DomainError

EXIT_OK, EXIT_DOMAIN, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

DEFAULTS = {
    "constants": {"p": 2.0, "quadrature_tol": 1e-10},
    "figure": {"pmin": 1.05, "pmax": 4.0, "step": 0.01},
    "range": {"threshold": 6.0},
    "wirtinger": {"p": 2.0, "N": 512, "budget": 2000, "seed": 0, "T": 1.0},
    "lemma2": {"p": 2.0},
    "simulate": {"field": "rotation", "params": "", "dt": 1e-3, "steps": 6283, "x0": None, "p": 2.0},
    "certify": {"field": "rotation", "params": "", "p": 2.0, "x0": None, "seed": 0, "pairs": 10000},
    "optimize": {"p": 2.0, "n": 2, "K": 3, "budget": 20000, "seed": 0},
    "remark2": {"eps": 0.0},
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        sys.stderr.write(f"periodbounds: error: {message}\n")
        raise SystemExit(EXIT_DOMAIN)


def worker_count() -> int:
    avail = os.cpu_count() or 1
    raw = os.environ.get("PERIODBOUNDS_THREADS")
    if raw:
        try:
            return max(1, min(int(raw), avail))
        except ValueError:
            raise DomainError(f"PERIODBOUNDS_THREADS must be an integer, got {raw!r}")
    return avail


def _split_top_level(text: str):
    depth, start = 0, 0
    for i, ch in enumerate(text):
        if ch in "[(":
            depth += 1
        elif ch in "])":
            depth -= 1
        elif ch == "," and depth == 0:
            yield text[start:i]
            start = i + 1
    yield text[start:]


def parse_params(text) -> dict:
    """``"L=1"`` or ``"weights=[1,1],A=[0],B=[1]"`` to a dict; values are JSON when possible."""
    if isinstance(text, dict):
        return text
    out = {}
    for item in _split_top_level(text or ""):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise DomainError(f"malformed parameter {item!r}, expected key=value")
        key, value = item.split("=", 1)
        try:
            out[key.strip()] = json.loads(value)
        except json.JSONDecodeError:
            out[key.strip()] = value.strip()
    return out


def _vector(text, size=None):
    if text is None:
        return None
    if isinstance(text, str):
        try:
            text = json.loads(text if text.startswith("[") else f"[{text}]")
        except json.JSONDecodeError as exc:
            raise DomainError(f"malformed vector {text!r}") from exc
    v = np.asarray(text, dtype=float)
    if size is not None and v.shape != (size,):
        raise DomainError(f"x0 must have {size} components")
    return v


def _default_x0(field: orbits.FieldSpec) -> np.ndarray:
    if field.kind == "remark1_averaging":
        space = field.params["space"]
        x = np.zeros(field.dim)
        x[list(space.A)] = -1.0
        return x
    x = np.zeros(field.dim)
    x[0] = 1.0
    return x


def _doc(command, config, result) -> str:
    doc = {"command": command, "version": __version__, "config": config, "result": result}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)


def cmd_constants(cfg):
    wc = constants.compute_cp(cfg["p"])
    quad = constants.cp_quadrature(cfg["p"], cfg["quadrature_tol"])
    return {
        "p": wc.p.p,
        "conjugate": wc.p.conjugate,
        "c_p": wc.c_p,
        "c_p_inverse": wc.c_p_inverse,
        "c_p_quadrature": quad.c_p,
        "abs_diff_quadrature": abs(quad.c_p - wc.c_p),
        "exceeds_banach_6": wc.c_p_inverse > constants.BANACH_BOUND,
    }


def cmd_range(cfg):
    r = constants.supercritical_range(cfg["threshold"])
    return {"p_low": r.p_low, "p_high": r.p_high, "threshold": r.threshold,
            "contains_1.43_3.35": r.p_low < 1.43 and r.p_high > 3.35}


def cmd_wirtinger(cfg):
    res = pfunc.extremal_search(cfg["p"], N=cfg["N"], budget=cfg["budget"], seed=cfg["seed"], T=cfg["T"])
    report = pfunc.wirtinger_check(res.u, cfg["p"])
    c_p = constants.compute_cp(cfg["p"]).c_p
    return {
        "q_star": res.q,
        "c_p_times_T": c_p * cfg["T"],
        "relative_excess": res.q / (c_p * cfg["T"]) - 1.0,
        "status": res.status,
        "iterations": res.iterations,
        "wirtinger": vars(report),
    }, res.u


def cmd_lemma2(cfg):
    try:
        with open(cfg["curve_file"], encoding="utf-8") as fh:
            y = pfunc.from_csv(fh.read())
    except KeyError:
        raise DomainError("lemma2 needs --curve-file")
    return vars(pfunc.lemma2_ratio(y, cfg["p"]))


def cmd_simulate(cfg):
    field = orbits.builtin_field(cfg["field"], parse_params(cfg["params"]), cfg["p"])
    x0 = _vector(cfg["x0"], field.dim)
    x0 = _default_x0(field) if x0 is None else x0
    traj = orbits.integrate(field, x0, cfg["dt"], cfg["steps"])
    return pfunc.PeriodicGridFunction(traj[:-1], cfg["dt"] * cfg["steps"])


def cmd_certify(cfg, workers):
    field = orbits.builtin_field(cfg["field"], parse_params(cfg["params"]), cfg["p"])
    x0 = _vector(cfg["x0"], field.dim)
    x0 = _default_x0(field) if x0 is None else x0
    cert = orbits.certify_orbit(field, x0, n_pairs=cfg["pairs"], seed=cfg["seed"], workers=workers)
    return json.loads(cert.to_json())


def cmd_optimize(cfg, workers):
    return optimizer.search(cfg["p"], n=cfg["n"], K=cfg["K"], budget=cfg["budget"],
                            seed=cfg["seed"], workers=workers)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="periodbounds", description=__doc__.splitlines()[0],
                     argument_default=argparse.SUPPRESS)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_, argument_default=argparse.SUPPRESS)
        sp.add_argument("--config", help="JSON file with the same keys as the flags; flags win")
        sp.add_argument("--out", help="also write the primary output to this path")
        return sp

    sp = add("constants", "sharp constant C_p and its reciprocal")
    sp.add_argument("--p", type=float)
    sp.add_argument("--quadrature-tol", dest="quadrature_tol", type=float)

    sp = add("figure", "table of (p, 1/C_p) as CSV")
    sp.add_argument("--pmin", type=float)
    sp.add_argument("--pmax", type=float)
    sp.add_argument("--step", type=float)

    sp = add("range", "exponents with 1/C_p above a threshold")
    sp.add_argument("--threshold", type=float)

    sp = add("wirtinger", "discrete extremal of the Wirtinger quotient")
    sp.add_argument("--p", type=float)
    sp.add_argument("--N", type=int)
    sp.add_argument("--budget", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--T", type=float)
    sp.add_argument("--grid-out", dest="grid_out", help="write the extremal as grid-function CSV")

    sp = add("lemma2", "double-integral ratio of a sampled closed curve")
    sp.add_argument("--curve-file", dest="curve_file")
    sp.add_argument("--p", type=float)

    sp = add("simulate", "RK4 trajectory of a built-in field as grid-function CSV")
    sp.add_argument("--field")
    sp.add_argument("--params")
    sp.add_argument("--dt", type=float)
    sp.add_argument("--steps", type=int)
    sp.add_argument("--x0")
    sp.add_argument("--p", type=float)

    sp = add("certify", "period, Lipschitz estimate and lower-bound checks for an orbit")
    sp.add_argument("--field")
    sp.add_argument("--params")
    sp.add_argument("--p", type=float)
    sp.add_argument("--x0")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--pairs", type=int)

    sp = add("optimize", "search closed curves for small restricted T*L")
    sp.add_argument("--p", type=float)
    sp.add_argument("--n", type=int)
    sp.add_argument("--K", type=int)
    sp.add_argument("--budget", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--trace-out", dest="trace_out", help="write the iteration trace as CSV")

    sp = add("remark2", "lower bound for norms within 1 +- eps of a Hilbert norm")
    sp.add_argument("--eps", type=float)
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    explicit = vars(args).copy()
    command = explicit.pop("command")
    cfg = dict(DEFAULTS[command])
    path = explicit.pop("config", None)
    if path:
        with open(path, encoding="utf-8") as fh:
            from_file = json.load(fh)
        cfg.update({k.replace("-", "_"): v for k, v in from_file.items()})
    cfg.update(explicit)
    return cfg


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    command = args.command
    cfg = resolve_config(args)
    out = cfg.pop("out", None)
    # paths are not part of the payload so that reruns compare byte-equal
    side_paths = {k: cfg.pop(k) for k in ("grid_out", "trace_out") if k in cfg}
    workers = worker_count()

    if command == "figure":
        table = constants.figure_data(cfg["pmin"], cfg["pmax"], cfg["step"])
        _emit(constants.figure_csv(table), out)
        if out:
            with open(out + ".meta.json", "w", encoding="utf-8") as fh:
                fh.write(_doc(command, cfg, {"rows": len(table),
                                             "note": "grid starts at pmin > 1; p = 1 is degenerate"}))
        return EXIT_OK
    if command == "simulate":
        _emit(pfunc.to_csv(cmd_simulate(cfg)), out)
        return EXIT_OK

    if command == "constants":
        result = cmd_constants(cfg)
    elif command == "range":
        result = cmd_range(cfg)
    elif command == "remark2":
        result = {"eps": cfg["eps"], "bound": constants.remark2_bound(cfg["eps"])}
    elif command == "wirtinger":
        result, u = cmd_wirtinger(cfg)
        if "grid_out" in side_paths:
            with open(side_paths["grid_out"], "w", encoding="utf-8") as fh:
                fh.write(pfunc.to_csv(u))
    elif command == "lemma2":
        result = cmd_lemma2(cfg)
    elif command == "certify":
        result = cmd_certify(cfg, workers)
    elif command == "optimize":
        res = cmd_optimize(cfg, workers)
        result = json.loads(res.to_json())
        if "trace_out" in side_paths:
            with open(side_paths["trace_out"], "w", encoding="utf-8") as fh:
                fh.write(res.trace_csv())
    else:  # pragma: no cover - argparse restricts the choices
        raise DomainError(f"unknown command {command!r}")
    _emit(_doc(command, cfg, result), out)
    return EXIT_OK


def main(argv=None) -> int:
    try:
        return run(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_DOMAIN
    except DomainError as exc:
        sys.stderr.write(f"periodbounds: domain error: {exc}\n")
        return EXIT_DOMAIN
    except ConvergenceError as exc:
        sys.stderr.write(f"periodbounds: no convergence: {exc}\n")
        return EXIT_NUMERIC
    except OSError as exc:
        sys.stderr.write(f"periodbounds: I/O error: {exc}\n")
        return EXIT_IO
    except (ValueError, TypeError) as exc:
        if isinstance(exc, json.JSONDecodeError):
            sys.stderr.write(f"periodbounds: I/O error: malformed config: {exc}\n")
            return EXIT_IO
        sys.stderr.write(f"periodbounds: domain error: {exc}\n")
        return EXIT_DOMAIN


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
