"""Command-line entry point: ``delta-forge <command> [options]``.

Commands
--------
check      condition report for a mollifier
sift       sifting convergence study on an epsilon ladder
construct  synthesize a mollifier meeting every condition
scatter    regularized Rutherford cross section against the closed form
transform  damper <-> mollifier transforms with their side conditions
replay     re-run the configuration stored in a manifest

Every run writes ``manifest.json`` holding the resolved configuration.
Exit status: 0 pass, 1 condition failure, 2 input error.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .conditions import Overall, classify, squared_norm
from .construct import SYNTHESIS_WIDTH, InfeasibleError, build_constraints, solve_mollifier
from .mollifier import (
    NAMED_DAMPERS,
    NAMED_MOLLIFIERS,
    Damper,
    Mollifier,
    builtin,
    builtin_damper,
    damper_from_json,
    DeltaSequence,
    from_json,
)
from .quadrature import dump_lobes
from .scattering import (
    ALPHA,
    Kinematics,
    cross_section_regularized,
    rutherford_closed_form,
)
from .sifting import (
    DEFAULT_LADDER,
    convergence_study,
    corpus,
    fit_order,
    richardson_limit,
    sift,
    sift_squared,
)
from .transforms import (
    damper_side_conditions,
    damper_to_mollifier,
    fourier_transform,
    inverse_fourier_quad,
    mollifier_to_damper,
)

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
OUT_ENV = "DELTA_FORGE_OUT"
DEFAULT_OUT = "delta_forge_out"
COMMANDS = ("check", "sift", "construct", "scatter", "transform")
_DEFAULT_TOL = {"check": 1e-8, "construct": 1e-8, "sift": 1e-3, "scatter": 1e-3, "transform": 1e-8}


class InputError(ValueError):
    """Malformed input; the message names the offending key or flag."""


# output helpers

def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def _json_default(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _clean(obj):
    """Replace non-finite floats so the JSON stays standard."""
    if isinstance(obj, float):
        if math.isnan(obj):
            return "NaN"
        if math.isinf(obj):
            return "Divergent" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _write_json(path: Path, doc) -> None:
    _atomic_write(path, json.dumps(_clean(doc), indent=2, default=_json_default) + "\n")


def _write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)] + [",".join(repr(float(v)) for v in row) for row in rows]
    _atomic_write(path, "\n".join(lines) + "\n")


# input resolution

def _load_json_file(path: str, key: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"{key}: cannot read {path!r} ({exc.strerror})") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{key}: {path!r} is not valid JSON ({exc.msg})") from None


def _resolve_mollifier(spec: str) -> Mollifier:
    if spec.lower() in NAMED_MOLLIFIERS:
        return builtin(spec)
    if not os.path.exists(spec):
        raise InputError(f"mollifier: {spec!r} is neither a built-in name {NAMED_MOLLIFIERS} nor a file")
    try:
        return from_json(_load_json_file(spec, "mollifier"))
    except ValueError as exc:
        raise InputError(f"mollifier: {exc}") from None


def _resolve_damper(spec: str) -> Damper:
    try:
        return builtin_damper(spec)
    except ValueError:
        pass
    if not os.path.exists(spec):
        raise InputError(f"damper: {spec!r} is neither a built-in name {NAMED_DAMPERS} nor a file")
    try:
        return damper_from_json(_load_json_file(spec, "damper"))
    except ValueError as exc:
        raise InputError(f"damper: {exc}") from None


def _ladder(cfg) -> tuple:
    if cfg.get("eps_ladder"):
        try:
            ladder = tuple(float(v) for v in str(cfg["eps_ladder"]).split(","))
        except ValueError:
            raise InputError("eps-ladder: expected a comma-separated list of numbers") from None
        if any(not e > 0 for e in ladder) or any(b >= a for a, b in zip(ladder, ladder[1:])):
            raise InputError("eps-ladder: values must be positive and strictly decreasing")
        return ladder
    if cfg.get("eps") is not None:
        if not cfg["eps"] > 0:
            raise InputError("eps: must be positive")
        return (float(cfg["eps"]),)
    return DEFAULT_LADDER


def _kinematics(cfg) -> Kinematics:
    try:
        if cfg.get("kinematics"):
            return Kinematics.from_json(_load_json_file(cfg["kinematics"], "kinematics"))
        return Kinematics.from_degrees(cfg["Z"], cfg["Ei"], cfg["theta"], cfg["alpha"])
    except InputError:
        raise
    except ValueError as exc:
        raise InputError(f"kinematics: {exc}") from None


# commands

def _cmd_check(cfg, out: Path) -> int:
    rho = _resolve_mollifier(cfg["mollifier"])
    report = classify(rho, cfg["q"], cfg["tol"])
    doc = report.to_dict()
    _write_json(out / "report.json", doc)
    print(json.dumps(_clean(doc), indent=2))
    return EXIT_FAIL if report.overall is Overall.FAILS else EXIT_PASS


def _cmd_sift(cfg, out: Path) -> int:
    rho = _resolve_mollifier(cfg["mollifier"])
    funcs = corpus()
    if cfg["test_function"] not in funcs:
        raise InputError(f"test-function: unknown name {cfg['test_function']!r}; expected one of {sorted(funcs)}")
    f = funcs[cfg["test_function"]]
    ladder = _ladder(cfg)
    quantity = cfg["quantity"]
    if len(ladder) >= 4:
        study = convergence_study(f, rho, ladder, quantity=quantity)
        _atomic_write(out / "sift.csv", study.to_csv())
        summary = study.to_dict()
        limit, target = study.limit, study.target
    else:
        rows, values = [], []
        target = complex(f.value_at_zero) * (complex(rho(0.0)) if quantity == "golden" else 1.0)
        for eps in ladder:
            seq = DeltaSequence(rho, eps)
            r = (sift(f, seq, full_output=True) if quantity == "sift"
                 else sift_squared(f, seq, full_output=True).scaled(eps))
            v = complex(r.value)
            values.append(v)
            rows.append([eps, v.real, v.imag, abs(v - target), r.error_estimate])
        _write_csv(out / "sift.csv", ["epsilon", "value_re", "value_im", "residual", "err_estimate"], rows)
        limit = richardson_limit(ladder, values) if len(ladder) > 1 else values[-1]
        summary = {"quantity": quantity, "test_function": f.name, "mollifier": rho.name or rho.kind,
                   "epsilon_ladder": list(ladder), "target": target, "limit": limit,
                   "limit_residual": abs(limit - target),
                   "fitted_order": fit_order(ladder, [r[3] for r in rows], [r[4] for r in rows])
                   if len(ladder) > 1 else None}
    passed = abs(limit - target) <= cfg["tol"] * max(1.0, abs(target))
    summary["passed"] = passed
    _write_json(out / "sift.json", summary)
    print(json.dumps(_clean(summary), indent=2, default=_json_default))
    return EXIT_PASS if passed else EXIT_FAIL


def _cmd_construct(cfg, out: Path) -> int:
    q, K = cfg["q"], cfg["basis"]
    try:
        system = build_constraints(K, q, cfg["width"])
    except ValueError as exc:
        raise InputError(f"basis: {exc}") from None
    try:
        rho = solve_mollifier(system, cfg["tol"])
    except InfeasibleError as exc:
        doc = exc.to_dict() | {"q_order": q, "basis": K, "width": cfg["width"]}
        _write_json(out / "infeasible.json", doc)
        print(json.dumps(_clean(doc), indent=2, default=_json_default))
        return EXIT_FAIL
    report = classify(rho, q, cfg["tol"])
    _write_json(out / "mollifier.json", rho.to_dict())
    _write_json(out / "report.json", report.to_dict())
    print(json.dumps(_clean(report.to_dict()), indent=2))
    return EXIT_PASS if report.overall is Overall.FULL else EXIT_FAIL


def _cmd_scatter(cfg, out: Path) -> int:
    rho = _resolve_mollifier(cfg["mollifier"])
    kin = _kinematics(cfg)
    ladder = _ladder(cfg)
    closed = rutherford_closed_form(kin)
    rows, ratios = [], []
    for eps in ladder:
        sigma = cross_section_regularized(kin, rho, eps)
        ratios.append(sigma / closed)
        rows.append([eps, sigma, closed, sigma / closed])
    _write_csv(out / "scatter.csv", ["epsilon", "sigma_reg", "sigma_closed", "ratio"], rows)
    final = richardson_limit(ladder, ratios).real if len(ladder) > 1 else ratios[-1]
    sq = squared_norm(rho)
    predicted = math.pi * float(sq.value.real)
    passed = abs(final - predicted) <= cfg["tol"]
    verdict = {
        "kinematics": kin.to_json_dict(),
        "mollifier": rho.name or rho.kind,
        "epsilon_ladder": list(ladder),
        "ratio": final,
        "extrapolated": len(ladder) > 1,
        "predicted_ratio": predicted,
        "sigma_closed": closed,
        "tol": cfg["tol"],
        "passed": passed,
        "reproduces_closed_form": abs(final - 1.0) <= cfg["tol"],
    }
    _write_json(out / "verdict.json", verdict)
    print(json.dumps(_clean(verdict), indent=2))
    return EXIT_PASS if passed else EXIT_FAIL


def _cmd_transform(cfg, out: Path) -> int:
    if bool(cfg.get("damper")) == bool(cfg.get("mollifier_given")):
        raise InputError("damper/mollifier: give exactly one of --damper or --mollifier")
    rng = np.random.default_rng(cfg["seed"])
    probes = np.sort(rng.uniform(-10.0, 10.0, 100))
    if cfg.get("damper"):
        damper = _resolve_damper(cfg["damper"])
        rho = damper_to_mollifier(damper)
        cond = damper_side_conditions(damper, cfg["tol"])
        dual = float(np.max(np.abs(inverse_fourier_quad(damper, probes) - rho(probes))))
        x = np.linspace(-20.0, 20.0, 401)
        vals = rho(x)
        _write_csv(out / "mollifier_samples.csv", ["x", "re", "im"], zip(x, vals.real, vals.imag))
        _write_json(out / "mollifier.json", rho.to_dict())
        doc = {"direction": "damper_to_mollifier", "damper": {"kind": damper.kind, "samples": len(damper.values)},
               "side_conditions": cond.to_dict(), "duality_max_error": dual, "seed": cfg["seed"]}
    else:
        rho = _resolve_mollifier(cfg["mollifier"])
        damper = mollifier_to_damper(rho)
        cond = damper_side_conditions(damper, cfg["tol"])
        dual = None
        if rho.decay_class.value == "SchwartzClass":
            dual = float(np.max(np.abs(fourier_transform(rho, probes) - damper(probes))))
        p = np.linspace(-20.0, 20.0, 401)
        _write_csv(out / "damper_samples.csv", ["p", "value"], zip(p, damper(p)))
        doc = {"direction": "mollifier_to_damper", "mollifier": rho.name or rho.kind,
               "damper_kind": damper.kind, "imag_residual": damper.imag_residual,
               "side_conditions": cond.to_dict(), "duality_max_error": dual, "seed": cfg["seed"]}
    _write_json(out / "transform.json", doc)
    print(json.dumps(_clean(doc), indent=2, default=_json_default))
    return EXIT_PASS if cond.passed else EXIT_FAIL


_HANDLERS = {"check": _cmd_check, "sift": _cmd_sift, "construct": _cmd_construct,
             "scatter": _cmd_scatter, "transform": _cmd_transform}


# argument parsing

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="delta-forge", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, mollifier_default="sinc"):
        sp.add_argument("--mollifier", default=mollifier_default,
                        help="built-in name or path to a mollifier JSON document")
        sp.add_argument("--tol", type=float, default=None, help="pass/fail tolerance")
        sp.add_argument("--out", default=None, help=f"output directory (env {OUT_ENV} wins)")
        sp.add_argument("--seed", type=int, default=0, help="seed for sampled test points")
        sp.add_argument("--debug-lobes", action="store_true",
                        help="write lobe partial sums of oscillatory integrals to lobes.csv")

    sp = sub.add_parser("check", help="condition report")
    common(sp)
    sp.add_argument("--q", type=int, default=1, help="number of vanishing moments")

    sp = sub.add_parser("sift", help="sifting convergence study")
    common(sp)
    sp.add_argument("--eps", type=float, default=None)
    sp.add_argument("--eps-ladder", default=None, help="comma-separated, strictly decreasing")
    sp.add_argument("--test-function", default="exp(-x^2)")
    sp.add_argument("--quantity", choices=("sift", "golden"), default="sift")

    sp = sub.add_parser("construct", help="synthesize a mollifier")
    common(sp)
    sp.add_argument("--q", type=int, default=3)
    sp.add_argument("--basis", type=int, default=10, help="highest Hermite degree K")
    sp.add_argument("--width", type=float, default=SYNTHESIS_WIDTH, help="Hermite basis width")

    sp = sub.add_parser("scatter", help="regularized Rutherford cross section")
    common(sp)
    sp.add_argument("--kinematics", default=None, help="JSON {Z, alpha, m, E_i, theta_deg}")
    sp.add_argument("--Z", type=int, default=1)
    sp.add_argument("--Ei", type=float, default=1.5)
    sp.add_argument("--theta", type=float, default=90.0, help="scattering angle in degrees")
    sp.add_argument("--alpha", type=float, default=ALPHA)
    sp.add_argument("--eps", type=float, default=None)
    sp.add_argument("--eps-ladder", default=None)

    sp = sub.add_parser("transform", help="damper <-> mollifier")
    common(sp, mollifier_default=None)
    sp.add_argument("--damper", default=None, help="built-in name or path to a damper JSON document")

    sp = sub.add_parser("replay", help="re-run from a manifest")
    sp.add_argument("manifest")
    sp.add_argument("--out", default=None)
    return p


def _resolve_config(ns) -> dict:
    cfg = {k: v for k, v in vars(ns).items() if k != "out"}
    cmd = cfg["command"]
    if cfg.get("tol") is None:
        cfg["tol"] = _DEFAULT_TOL[cmd]
    if cmd == "transform":
        cfg["mollifier_given"] = cfg.get("mollifier") is not None
    return cfg


def _output_dir(cli_out) -> Path:
    return Path(os.environ.get(OUT_ENV) or cli_out or DEFAULT_OUT)


def run(cfg: dict, out: Path) -> int:
    """Execute one resolved configuration; returns the exit status."""
    cmd = cfg.get("command")
    if cmd not in _HANDLERS:
        raise InputError(f"command: unknown value {cmd!r}")
    _write_json(out / "manifest.json", {"version": __version__, "config": cfg})
    with contextlib.ExitStack() as stack:
        if cfg.get("debug_lobes"):
            stack.enter_context(dump_lobes(out / "lobes.csv"))
        return _HANDLERS[cmd](cfg, out)


def _load_manifest(path: str) -> dict:
    doc = _load_json_file(path, "manifest")
    if not isinstance(doc, dict) or not isinstance(doc.get("config"), dict):
        raise InputError("config: manifest has no 'config' object")
    cfg = doc["config"]
    if cfg.get("command") not in COMMANDS:
        raise InputError(f"command: unknown value {cfg.get('command')!r} in manifest")
    return cfg


def main(argv=None) -> int:
    ns = _parser().parse_args(argv)
    try:
        if ns.command == "replay":
            cfg = _load_manifest(ns.manifest)
        else:
            cfg = _resolve_config(ns)
        return run(cfg, _output_dir(ns.out))
    except InputError as exc:
        print(f"delta-forge: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
