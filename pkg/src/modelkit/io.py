"""Strict JSON schemas for specs, sequences, symbols and multiplier functions."""

from __future__ import annotations

import math

import numpy as np

from .density import DiscreteSequence, generate
from .errors import SchemaError
from .inner_core import ArithFamily, InnerFunctionSpec, TruncationSchedule
from .spectral import ExpRational, kernel_function
from .toeplitz import ToeplitzSymbol


def _check_keys(d, allowed, where, required=()):
    if not isinstance(d, dict):
        raise SchemaError(f"{where}: expected an object, got {type(d).__name__}")
    unknown = sorted(set(d) - set(allowed))
    if unknown:
        raise SchemaError(f"{where}: unknown keys {unknown}; allowed {sorted(allowed)}")
    missing = [k for k in required if k not in d]
    if missing:
        raise SchemaError(f"{where}: missing keys {missing}")


def _number(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"{where}: expected a number, got {v!r}")
    if not math.isfinite(v):
        raise SchemaError(f"{where}: must be finite")
    return float(v)


def _opt_int(v, where):
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, int):
        raise SchemaError(f"{where}: expected an integer or null")
    return v


def complex_from_dict(d, where="point") -> complex:
    _check_keys(d, {"re", "im"}, where, required=("re", "im"))
    return complex(_number(d["re"], where + ".re"), _number(d["im"], where + ".im"))


def complex_to_dict(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def family_from_dict(d, where="family") -> ArithFamily:
    _check_keys(d, {"family", "alpha", "beta", "nmin", "nmax"}, where, required=("family", "alpha", "beta"))
    if d["family"] != "arith":
        raise SchemaError(f"{where}: unknown family {d['family']!r}")
    try:
        return ArithFamily(_number(d["alpha"], where + ".alpha"), _number(d["beta"], where + ".beta"),
                           _opt_int(d.get("nmin"), where + ".nmin"), _opt_int(d.get("nmax"), where + ".nmax"))
    except ValueError as exc:
        raise SchemaError(f"{where}: {exc}") from None


def spec_from_dict(d, where="spec") -> InnerFunctionSpec:
    """``{"mass": a, "constant": {re, im}, "zeros": [{re, im}, ...] | {"family": "arith", ...}}``."""
    _check_keys(d, {"mass", "constant", "zeros"}, where)
    mass = _number(d.get("mass", 0.0), where + ".mass")
    const = complex_from_dict(d["constant"], where + ".constant") if "constant" in d else 1.0
    zeros = d.get("zeros", [])
    try:
        if isinstance(zeros, dict):
            return InnerFunctionSpec(mass=mass, constant=const, family=family_from_dict(zeros, where + ".zeros"))
        if not isinstance(zeros, list):
            raise SchemaError(f"{where}.zeros: expected a list or a family object")
        zs = tuple(complex_from_dict(z, f"{where}.zeros[{k}]") for k, z in enumerate(zeros))
        return InnerFunctionSpec(mass=mass, zeros=zs, constant=const)
    except ValueError as exc:
        raise SchemaError(f"{where}: {exc}") from None


def sequence_from_dict(d, where="sequence") -> DiscreteSequence:
    """``{"points": [...]}``, ``{"generator": name, "N": n}`` or ``{"family": {...}}``."""
    _check_keys(d, {"points", "generator", "N", "family"}, where)
    if "points" in d:
        if len(d) != 1:
            raise SchemaError(f"{where}: 'points' cannot be combined with other keys")
        pts = [complex_from_dict(p, f"{where}.points[{k}]") for k, p in enumerate(d["points"])]
        try:
            return DiscreteSequence(np.array(pts, dtype=complex))
        except ValueError as exc:
            raise SchemaError(f"{where}: {exc}") from None
    if "generator" in d:
        _check_keys(d, {"generator", "N"}, where, required=("generator", "N"))
        n = _opt_int(d["N"], where + ".N")
        try:
            return generate(d["generator"], n)
        except KeyError as exc:
            raise SchemaError(f"{where}: {exc.args[0]}") from None
    if "family" in d:
        _check_keys(d, {"family"}, where)
        return DiscreteSequence.from_family(family_from_dict(d["family"], where + ".family"))
    raise SchemaError(f"{where}: one of 'points', 'generator', 'family' is required")


def symbol_from_list(items, where="symbol") -> ToeplitzSymbol:
    """``[{"spec": {...}, "exponent": 1 | -1}, ...]``."""
    if not isinstance(items, list) or not items:
        raise SchemaError(f"{where}: expected a non-empty list of factors")
    factors = []
    for k, it in enumerate(items):
        _check_keys(it, {"spec", "exponent"}, f"{where}[{k}]", required=("spec", "exponent"))
        e = it["exponent"]
        if e not in (1, -1) or isinstance(e, bool):
            raise SchemaError(f"{where}[{k}].exponent: must be 1 or -1")
        factors.append((spec_from_dict(it["spec"], f"{where}[{k}].spec"), e))
    return ToeplitzSymbol(tuple(factors))


def phi_from_dict(d, schedule: TruncationSchedule, where="phi") -> ExpRational:
    """Multiplier candidates: a model-space kernel, a constant, or explicit terms.

    ``{"kind": "kernel", "spec": {...}, "lam": {re, im}}``,
    ``{"kind": "constant", "value": {re, im}}`` or
    ``{"kind": "terms", "terms": [{"coef": {re, im}, "freq": c, "pole": {re, im}, "order": m}]}``.
    """
    if not isinstance(d, dict) or "kind" not in d:
        raise SchemaError(f"{where}: needs a 'kind'")
    kind = d["kind"]
    if kind == "kernel":
        _check_keys(d, {"kind", "spec", "lam"}, where, required=("spec", "lam"))
        spec = None if d["spec"] is None else spec_from_dict(d["spec"], where + ".spec")
        lam = complex_from_dict(d["lam"], where + ".lam")
        if not lam.imag > 0:
            raise SchemaError(f"{where}.lam: must lie in the upper half-plane")
        return kernel_function(spec, lam, schedule)
    if kind == "constant":
        _check_keys(d, {"kind", "value"}, where, required=("value",))
        return ExpRational.constant(complex_from_dict(d["value"], where + ".value"))
    if kind == "terms":
        _check_keys(d, {"kind", "terms"}, where, required=("terms",))
        terms = []
        for k, t in enumerate(d["terms"]):
            w = f"{where}.terms[{k}]"
            _check_keys(t, {"coef", "freq", "pole", "order"}, w, required=("coef", "order"))
            order = _opt_int(t["order"], w + ".order")
            if order is None or order < 0:
                raise SchemaError(f"{w}.order: must be a non-negative integer")
            pole = complex_from_dict(t["pole"], w + ".pole") if "pole" in t else 0j
            if order > 0 and pole.imag == 0:
                raise SchemaError(f"{w}.pole: must be off the real line")
            terms.append((complex_from_dict(t["coef"], w + ".coef"),
                          _number(t.get("freq", 0.0), w + ".freq"), pole, order))
        return ExpRational.from_terms(terms)
    raise SchemaError(f"{where}: unknown kind {kind!r}")


def schedule_from_dict(d, where="schedule") -> TruncationSchedule:
    _check_keys(d, {"n_terms", "levels", "tol"}, where)
    base = TruncationSchedule()
    n = _opt_int(d.get("n_terms", base.n_terms), where + ".n_terms")
    levels = tuple(d.get("levels", [lv for lv in base.levels if lv <= n]))
    if not levels or any(_opt_int(lv, where + ".levels") is None for lv in levels):
        raise SchemaError(f"{where}.levels: expected a non-empty list of integers")
    return TruncationSchedule(n, levels, _number(d.get("tol", base.tol), where + ".tol"))


def jsonable(x):
    """Convert numpy scalars, complex numbers and non-finite floats for ``json``."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": jsonable(float(x.real)), "im": jsonable(float(x.imag))}
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x
