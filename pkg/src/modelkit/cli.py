"""Command-line front end: one JSON document per run.

Exit codes: 0 definite result, 2 completed without a definite verdict
(Inconclusive, UndecidedBoundary, OutOfScope), 1 error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__
from .decider import DeciderConfig, MifPair, cross_validate, decide_multipliers
from .density import RegularityConfig, density_to_kernel_threshold, estimate_density_bracket, regularity_integral, star_transform
from .errors import ModelkitError, SchemaError
from .hilbert import PVSchedule, from_table, hilbert_transform, named
from .inner_core import DEFAULT_SCHEDULE
from .io import (
    _check_keys,
    complex_from_dict,
    jsonable,
    phi_from_dict,
    schedule_from_dict,
    sequence_from_dict,
    spec_from_dict,
    symbol_from_list,
)
from .toeplitz import ProbeConfig, carleson_window_sup, kernel_triviality_probe, lemma1_construct, multiplier_residual

DEFINITE = {"Nontrivial", "Trivial", "LikelyNontrivial", "LikelyTrivial", "InModelSpace",
            "NotInModelSpace", "Exact", "Constructed", "Computed"}

FACTS = {
    "regularity": "A real sequence is strongly a-regular when the integral of |n(x) - a x|/(1 + x^2) over R is finite.",
    "star": "Points of the upper half-plane enter density computations through lambda* = 1/Re(1/lambda).",
    "thresholds": "ker T for S^c conj(B_L) is trivial above 2 pi times the lower density and nontrivial below it; "
                  "for conj(S^c) B_L the roles flip with the upper density.",
    "toeplitz": "ker T_{conj U} = K_U for inner U; the probe tracks smallest generalized singular values.",
    "hilbert": "Regularized conjugate function on L^1(dt/(1+t^2)) with the kernel 1/(x-t) + t/(1+t^2).",
    "model_space": "K_V = H^2 cap V conj(H^2); a multiplier maps every kernel of K_U into K_V.",
    "carleson": "sup_x int_x^{x+1} |Phi|^2 < infinity makes |Phi|^2 dt a Carleson measure for the model space.",
    "interpolation": "If Theta is not a finite Blaschke product, K_Theta contains a nonzero f vanishing on the zeros of any "
                     "finite Blaschke product B, and f conj(B) lies in H^2.",
}


def _config_from(cls, d, where):
    if d is None:
        return cls()
    allowed = {f.name for f in fields(cls)}
    _check_keys(d, allowed, where)
    kw = {k: tuple(v) if isinstance(v, list) else v for k, v in d.items()}
    try:
        return cls(**kw)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{where}: {exc}") from None


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, float) else v for v in r])


def _side_path(out: Path, suffix: str) -> Path:
    return out.with_name(out.stem + suffix)


# -- commands -------------------------------------------------------------

def cmd_density(doc, args, schedule):
    _check_keys(doc, {"sequence", "a_grid", "check_a", "windows"}, "input", required=("sequence",))
    seq = sequence_from_dict(doc["sequence"])
    cfg = RegularityConfig() if args.tolerance is None else RegularityConfig(tol=args.tolerance)
    windows = tuple(doc["windows"]) if "windows" in doc else None
    bracket = estimate_density_bracket(seq, doc.get("a_grid"), windows, cfg)
    result = {"bracket": bracket.to_dict(), "verdict": "Exact" if bracket.exact else "Inconclusive"}
    if bracket.exact:
        c, sem = density_to_kernel_threshold(bracket)
        result["kernel_threshold"] = sem
    reports = []
    if doc.get("check_a"):
        real = seq if seq.is_real else star_transform(seq)[0]
        reports = [regularity_integral(real, float(a), windows, cfg) for a in doc["check_a"]]
        result["regularity"] = [r.to_dict() for r in reports]
    config = {"regularity": {"tol": cfg.tol, "min_exponent": cfg.min_exponent, "fit_points": cfg.fit_points},
              "a_grid": doc.get("a_grid"), "windows": list(windows) if windows else "default"}
    side = None
    if reports and args.output:
        rows = [(r.a, w, v) for r in reports for w, v in r.window_integrals]
        side = (".windows.csv", ["a", "W", "integral"], rows)
    return result, config, ["regularity", "star", "thresholds"], side


def cmd_decide(doc, args, schedule):
    _check_keys(doc, {"U", "V", "cross_validate", "probe"}, "input", required=("U", "V"))
    pair = MifPair(spec_from_dict(doc["U"], "U"), spec_from_dict(doc["V"], "V"))
    cfg = DeciderConfig() if args.tolerance is None else DeciderConfig(tau=args.tolerance)
    cert = decide_multipliers(pair, cfg, schedule)
    result = {"pair": pair.to_dict(), "certificate": cert.to_dict(), "verdict": cert.verdict}
    pcfg = _config_from(ProbeConfig, doc.get("probe"), "probe")
    if doc.get("cross_validate"):
        result["cross_validation"] = cross_validate(pair, cert, pcfg, schedule).to_dict()
    config = {"decider": cfg.to_dict(), "probe": pcfg.to_dict(),
              "cross_validate": bool(doc.get("cross_validate", False))}
    return result, config, cert.citations, None


def cmd_probe(doc, args, schedule):
    _check_keys(doc, {"symbol", "config", "expected", "source"}, "input", required=("symbol",))
    sym = symbol_from_list(doc["symbol"])
    cfg = _config_from(ProbeConfig, doc.get("config"), "config")
    if args.tolerance is not None:
        cfg = ProbeConfig(**{**cfg.to_dict(), "sizes": cfg.sizes, "floor": args.tolerance})
    source = spec_from_dict(doc["source"], "source") if doc.get("source") else None
    report = kernel_triviality_probe(sym, cfg, schedule, source, doc.get("expected"))
    result = {"symbol": sym.to_dict(), "report": report.to_dict(), "verdict": report.verdict}
    side = (".sigma.csv", ["basis_size", "sigma_min"],
            list(zip(report.basis_sizes, report.sigma_min))) if args.output else None
    return result, {"probe": cfg.to_dict()}, ["toeplitz"], side


def _pi_function(d):
    if isinstance(d, str):
        try:
            return named(d)
        except KeyError as exc:
            raise SchemaError(str(exc.args[0])) from None
    _check_keys(d, {"t", "values", "decay"}, "function", required=("t", "values"))
    return from_table(d["t"], d["values"], d.get("decay", 2.0))


def cmd_hilbert(doc, args, schedule):
    _check_keys(doc, {"function", "x", "pv"}, "input", required=("function", "x"))
    h = _pi_function(doc["function"])
    pv = _config_from(PVSchedule, doc.get("pv"), "pv")
    rows = []
    for x in doc["x"]:
        v, e = hilbert_transform(h, float(x), pv)
        rows.append({"x": float(x), "value": v, "error": e})
    result = {"function": h.name, "witness": h.witness, "values": rows, "verdict": "Computed"}
    return result, {"pv": pv.to_dict()}, ["hilbert"], None


def cmd_verify(doc, args, schedule):
    _check_keys(doc, {"U", "V", "phi", "test_points", "n_points", "carleson_X"}, "input",
                required=("U", "V", "phi"))
    U, V = spec_from_dict(doc["U"], "U"), spec_from_dict(doc["V"], "V")
    phi = phi_from_dict(doc["phi"], schedule)
    if "test_points" in doc:
        pts = [complex_from_dict(p, f"test_points[{k}]") for k, p in enumerate(doc["test_points"])]
    else:
        rng = np.random.default_rng(args.seed)
        n = int(doc.get("n_points", 10))
        pts = list(rng.uniform(-3, 3, n) + 1j * rng.uniform(0.5, 2.0, n))
    tol = 1e-4 if args.tolerance is None else args.tolerance
    res = multiplier_residual(U, V, phi, pts, schedule)
    if max(res) < tol:
        verdict = "InModelSpace"
    elif min(res) >= tol:
        verdict = "NotInModelSpace"
    else:
        verdict = "Inconclusive"
    windows = []
    for X in doc.get("carleson_X", [10, 50, 100]):
        x = np.linspace(-X, X, int(2 * X * 64) + 1)
        windows.append({"X": X, **carleson_window_sup(phi(x), x).to_dict()})
    result = {"test_points": pts, "residuals": res, "max_residual": max(res),
              "min_residual": min(res), "carleson": windows, "verdict": verdict}
    return result, {"tolerance": tol, "seed": args.seed}, ["model_space", "carleson"], None


def cmd_lemma1(doc, args, schedule):
    _check_keys(doc, {"theta", "zeros", "multiplicities"}, "input", required=("theta",))
    theta = spec_from_dict(doc["theta"], "theta")
    zs = [complex_from_dict(z, f"zeros[{k}]") for k, z in enumerate(doc.get("zeros", []))]
    tol = 1e-8 if args.tolerance is None else args.tolerance
    el = lemma1_construct(theta, zs, doc.get("multiplicities"), tol, schedule)
    return ({"element": el.to_dict(), "verdict": "Constructed"}, {"tolerance": tol},
            ["interpolation"], None)


COMMANDS = {"density": cmd_density, "decide": cmd_decide, "probe": cmd_probe,
            "hilbert": cmd_hilbert, "verify-multiplier": cmd_verify, "lemma1": cmd_lemma1}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="modelkit", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--input", required=True, help="JSON input document")
    p.add_argument("--output", help="JSON output path (default: stdout)")
    p.add_argument("--schedule", help="JSON truncation schedule overrides")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=None)
    return p


def _dump(doc) -> str:
    return json.dumps(jsonable(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.output) if args.output else None
    try:
        with open(args.input, encoding="utf-8") as fh:
            doc = json.load(fh)
        schedule = DEFAULT_SCHEDULE
        if args.schedule:
            with open(args.schedule, encoding="utf-8") as fh:
                schedule = schedule_from_dict(json.load(fh))
        result, config, cites, side = COMMANDS[args.command](doc, args, schedule)
        config = {"command": args.command, "seed": args.seed, "tolerance": args.tolerance,
                  "schedule": schedule.to_dict(), **config}
        citations = [FACTS[c] if c in FACTS else c for c in cites]
        text = _dump({"command": args.command, "config": config, "result": result,
                      "citations": citations, "metadata": {"package": "modelkit", "version": __version__}})
        code = 0 if result.get("verdict") in DEFINITE else 2
        if side is not None and out is not None:
            _write_csv(_side_path(out, side[0]), side[1], side[2])
    except (ModelkitError, OSError, json.JSONDecodeError, ValueError, KeyError, TypeError) as exc:
        err = exc.to_dict() if isinstance(exc, ModelkitError) else {
            "error": type(exc).__name__, "message": str(exc)}
        text = _dump({"command": args.command, "error": err,
                      "metadata": {"package": "modelkit", "version": __version__}})
        code = 1
    if out is not None:
        out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
