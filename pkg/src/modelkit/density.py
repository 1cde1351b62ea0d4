"""Counting functions, the star map and Beurling-Malliavin density brackets."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import InconsistentDensity, InexactBracket, NonRealPoint
from .inner_core import ArithFamily, InnerFunctionSpec
from .util import max_workers


@dataclass(frozen=True)
class DiscreteSequence:
    """Locally finite points of the closed upper half-plane, with multiplicity.

    Points are kept sorted by real part, then imaginary part.  ``family`` marks
    a registered parametric sequence whose density is known in closed form.
    """

    points: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    family: Optional[ArithFamily] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).ravel()
        if np.any(pts.imag < 0):
            raise ValueError("points must lie in the closed upper half-plane")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        order = np.lexsort((pts.imag, pts.real))
        object.__setattr__(self, "points", pts[order])

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.points.imag == 0))

    @property
    def real_points(self) -> np.ndarray:
        if not self.is_real:
            raise NonRealPoint("sequence has points off the real line")
        return self.points.real

    def __len__(self):
        return self.points.size

    def scaled(self, s: float) -> "DiscreteSequence":
        fam = None
        if self.family is not None:
            fam = ArithFamily(self.family.alpha * s, self.family.beta * s,
                              self.family.nmin, self.family.nmax)
        return DiscreteSequence(self.points * s, fam)

    @classmethod
    def from_family(cls, fam: ArithFamily, n_terms: Optional[int] = None):
        """Materialize ``|n| <= n_terms`` of the family (tag kept)."""
        if n_terms is None and fam.infinite:
            return cls(np.zeros(0, dtype=complex), fam)
        spec = InnerFunctionSpec(family=fam)
        return cls(spec.zero_array(n_terms), fam)


# -- generators ---------------------------------------------------------------

def _n_plus_i(N: int):
    n = np.arange(-N, N + 1)
    return n + 1j


def _integers(N: int):
    return np.arange(-N, N + 1).astype(complex)


def _signed_squares(N: int):
    n = np.arange(-N, N + 1)
    return (np.sign(n) * n * n).astype(complex)


GENERATORS = {
    "n_plus_i": _n_plus_i,
    "integers": _integers,
    "signed_squares": _signed_squares,
}


def generate(name: str, N: int) -> DiscreteSequence:
    try:
        gen = GENERATORS[name]
    except KeyError:
        raise KeyError(f"unknown generator {name!r}; known: {sorted(GENERATORS)}") from None
    return DiscreteSequence(gen(int(N)))


# -- counting -----------------------------------------------------------------

def counting_function(seq: DiscreteSequence, x):
    """Signed count: ``#(L cap [0, x])`` for ``x >= 0``, ``-#(L cap [x, 0])`` for ``x < 0``."""
    pts = seq.real_points
    xs = np.asarray(x, dtype=float)
    n_le = np.searchsorted(pts, xs, side="right")
    n_lt0 = np.searchsorted(pts, 0.0, side="left")
    n_le0 = np.searchsorted(pts, 0.0, side="right")
    n_ltx = np.searchsorted(pts, xs, side="left")
    out = np.where(xs >= 0, n_le - n_lt0, -(n_le0 - n_ltx))
    return int(out) if out.ndim == 0 else out


def star_transform(seq: DiscreteSequence):
    """``lambda* = 1 / Re(1/lambda) = |lambda|^2 / Re(lambda)``; returns ``(sequence, n_dropped)``.

    Points with zero real part have no image and are dropped.
    """
    pts = seq.points
    keep = pts.real != 0
    p = pts[keep]
    star = (p.real * p.real + p.imag * p.imag) / p.real
    return DiscreteSequence(star.astype(complex)), int(np.count_nonzero(~keep))


# -- regularity integrals -------------------------------------------------------

def _atan_diff(u, v):
    # arctan(v) - arctan(u) for 0 <= u <= v
    return np.arctan2(v - u, 1.0 + u * v)


def _log_diff(u, v):
    # log(1+v^2) - log(1+u^2)
    return np.log1p((v - u) * (v + u) / (1.0 + u * u))


def _signed_piece(m, a, u, v):
    """``int_u^v (m - a x)/(1+x^2) dx`` in closed form (0 <= u <= v)."""
    return m * _atan_diff(u, v) - 0.5 * a * _log_diff(u, v)


def _one_side(points_pos: np.ndarray, n0: int, a: float, W: float) -> float:
    """``int_0^W |N(x) - a x|/(1+x^2)`` with ``N(x) = n0 + #(points in (0, x])``."""
    pts = points_pos[points_pos <= W]
    edges = np.r_[0.0, pts, W]
    m = n0 + np.arange(edges.size - 1, dtype=float)
    u, v = edges[:-1], edges[1:]
    keep = v > u
    u, v, m = u[keep], v[keep], m[keep]
    if a == 0:
        return float(np.sum(np.abs(m) * _atan_diff(u, v)))
    r = m / a
    split = (r > u) & (r < v)
    whole = np.abs(_signed_piece(m, a, u, v))
    left = np.abs(_signed_piece(m, a, u, np.where(split, r, v)))
    right = np.abs(_signed_piece(m, a, np.where(split, r, v), v))
    return float(np.sum(np.where(split, left + right, whole)))


def _sides(pts: np.ndarray):
    n0 = int(np.count_nonzero(pts == 0))
    pos = pts[pts > 0]
    neg = np.sort(-pts[pts < 0])
    return pos, neg, n0


def window_integral(seq: DiscreteSequence, a: float, W: float, lower: float = 0.0) -> float:
    """``int_{lower <= |x| <= W} |n(x) - a x|/(1+x^2) dx`` by exact step integration."""
    pos, neg, n0 = _sides(seq.real_points)
    total = _one_side(pos, n0, a, W) + _one_side(neg, n0, a, W)
    if lower > 0:
        total -= _one_side(pos, n0, a, lower) + _one_side(neg, n0, a, lower)
    return total


def one_sided_integral(seq: DiscreteSequence, a: float, lo: float, hi: float) -> float:
    """``int_lo^hi |n(x) - a x|/(1+x^2) dx`` for ``0 <= lo <= hi``."""
    pos, _, n0 = _sides(seq.real_points)
    return _one_side(pos, n0, a, hi) - _one_side(pos, n0, a, lo)


def coverage_radius(seq: DiscreteSequence) -> float:
    """Largest ``R`` such that both sides of the data extend to ``R`` (one side if the other is empty)."""
    pts = seq.real_points
    if pts.size == 0:
        return 1e3
    ext = [abs(v) for v in (pts.max(), pts.min()) if v != 0]
    pos, neg = pts[pts > 0], pts[pts < 0]
    if pos.size and neg.size:
        return float(min(pos.max(), -neg.min()))
    return float(max(ext)) if ext else 1e3


def default_windows(seq: DiscreteSequence, start: float = 2.0, ratio: float = 2.0):
    R = coverage_radius(seq)
    ws = [start]
    while ws[-1] * ratio <= R:
        ws.append(ws[-1] * ratio)
    return tuple(ws)


@dataclass
class RegularityReport:
    a: float
    window_integrals: list
    converged: bool
    extrapolated_value: float
    fitted_exponent: float = float("nan")

    def to_dict(self):
        ev = self.extrapolated_value
        return {"a": self.a,
                "window_integrals": [[w, v] for w, v in self.window_integrals],
                "converged": self.converged,
                "extrapolated_value": ev if math.isfinite(ev) else None,
                "diverges": not math.isfinite(ev),
                "fitted_exponent": self.fitted_exponent if math.isfinite(self.fitted_exponent) else None}


@dataclass(frozen=True)
class RegularityConfig:
    tol: float = 1e-2
    min_exponent: float = 0.25
    fit_points: int = 6


def _fit_tail(ws, vals, cfg: RegularityConfig):
    ws = np.asarray(ws, dtype=float)
    inc = np.diff(np.asarray(vals, dtype=float))
    if inc.size < 3:
        return float("nan"), float("inf")
    k = min(cfg.fit_points, inc.size)
    x = np.log(ws[1:][-k:])
    y = np.log(np.maximum(inc[-k:], 1e-300))
    slope, _ = np.polyfit(x, y, 1)
    p = -slope
    if p <= 0:
        return float(p), float("inf")
    ratio = ws[-1] / ws[-2]
    q = ratio ** (-p)
    tail = inc[-1] * q / (1 - q)
    return float(p), float(tail)


def regularity_integral(seq: DiscreteSequence, a: float, windows: Sequence[float] = None,
                        cfg: RegularityConfig = RegularityConfig()) -> RegularityReport:
    """Window integrals of ``|n(x) - a x| / (1 + x^2)`` and a power-law tail test.

    Converged when the increments decay like ``W^-p`` with ``p >= min_exponent``
    and the extrapolated remainder is below ``tol``.
    """
    if a < 0:
        raise ValueError("a must be non-negative")
    if windows is None:
        windows = default_windows(seq)
    pos, neg, n0 = _sides(seq.real_points)
    vals = [_one_side(pos, n0, a, W) + _one_side(neg, n0, a, W) for W in windows]
    p, tail = _fit_tail(windows, vals, cfg)
    converged = bool(p >= cfg.min_exponent and tail <= cfg.tol)
    ext = vals[-1] + tail if converged else float("inf")
    return RegularityReport(a, list(zip(map(float, windows), vals)), converged, float(ext), p)


# -- density -----------------------------------------------------------------

@dataclass
class DensityBracket:
    lower: float
    upper: float
    exact: bool
    method: str  # FamilyClosedForm | SelfRegularity | Inconclusive
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("lower > upper")
        if self.exact and self.lower != self.upper:
            raise ValueError("exact bracket must have lower == upper")

    @property
    def value(self) -> float:
        if not self.exact:
            raise InexactBracket(f"bracket [{self.lower}, {self.upper}] is not exact")
        return self.lower

    def to_dict(self):
        return {"lower": self.lower,
                "upper": self.upper if math.isfinite(self.upper) else None,
                "upper_infinite": not math.isfinite(self.upper),
                "exact": self.exact, "method": self.method,
                "diagnostics": self.diagnostics}


def slope_estimate(seq: DiscreteSequence) -> float:
    pts = seq.real_points
    R = coverage_radius(seq)
    if pts.size == 0:
        return 0.0
    x = np.linspace(-R, R, 2001)
    n = counting_function(seq, x).astype(float)
    return float(max(0.0, np.dot(x, n) / np.dot(x, x)))


def candidate_slopes(a_hat: float, max_den: int = 12):
    cands = {0.0}
    for q in range(1, max_den + 1):
        cands.add(round(a_hat * q) / q)
    frac = Fraction(a_hat).limit_denominator(max_den)
    cands.add(float(frac))
    return sorted(c for c in cands if c >= 0)


def family_density(fam: ArithFamily) -> DensityBracket:
    d = 1.0 / fam.alpha
    if fam.bilateral:
        return DensityBracket(d, d, True, "FamilyClosedForm",
                              {"family": fam.to_dict(), "density": d})
    if fam.infinite:
        return DensityBracket(0.0, d, False, "FamilyClosedForm",
                              {"family": fam.to_dict(), "note": "one-sided family"})
    return DensityBracket(0.0, 0.0, True, "FamilyClosedForm",
                          {"family": fam.to_dict(), "note": "finite family"})


def estimate_density_bracket(seq: DiscreteSequence, a_grid: Sequence[float] = None,
                             windows: Sequence[float] = None,
                             cfg: RegularityConfig = RegularityConfig()) -> DensityBracket:
    """Exact for registered families and self-regular data, otherwise Inconclusive.

    Sequences with points off the real line go through :func:`star_transform`.
    """
    if seq.family is not None and len(seq) == 0:
        return family_density(seq.family)
    if seq.family is not None:
        return family_density(seq.family)
    dropped = 0
    real = seq
    if not seq.is_real:
        real, dropped = star_transform(seq)
    a_hat = slope_estimate(real)
    cands = list(a_grid) if a_grid is not None else candidate_slopes(a_hat)
    if windows is None:
        windows = default_windows(real)
    with ThreadPoolExecutor(max_workers=max_workers()) as ex:
        reports = list(ex.map(lambda a: regularity_integral(real, a, windows, cfg), cands))
    diag = {"star_dropped": dropped, "slope_estimate": a_hat,
            "candidates": [r.a for r in reports],
            "converged": [r.a for r in reports if r.converged],
            "coverage_radius": coverage_radius(real)}
    good = sorted({r.a for r in reports if r.converged})
    if len(good) > 1:
        raise InconsistentDensity(f"strongly regular for several slopes {good}")
    if good:
        a = good[0]
        return DensityBracket(a, a, True, "SelfRegularity", diag)
    return DensityBracket(0.0, math.inf, False, "Inconclusive", diag)


def density_to_kernel_threshold(bracket: DensityBracket):
    """``2 pi D`` and which Toeplitz kernels are trivial on either side of it."""
    D = bracket.value
    c = 2 * math.pi * D
    semantics = {
        "threshold": c,
        "analytic_mass_vs_conjugate_blaschke": {
            "symbol": "S^c * conj(B_L)",
            "kernel_trivial_for": f"c > {c!r}",
            "kernel_nontrivial_for": f"c < {c!r}",
            "density": "lower (interior) density",
        },
        "conjugate_mass_vs_blaschke": {
            "symbol": "conj(S^c) * B_L",
            "kernel_trivial_for": f"c < {c!r}",
            "kernel_nontrivial_for": f"c > {c!r}",
            "density": "upper (exterior) density",
        },
        "at_threshold": "undecided",
    }
    return c, semantics
