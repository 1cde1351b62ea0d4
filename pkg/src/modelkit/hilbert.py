"""Regularized Hilbert transform on L^1(dt/(1+t^2)) and outer functions.

The transform is the printed singular integral

    h~(x) = lim_{eps->0} (1/pi) int_{|x-t|>eps} [1/(x-t) + t/(1+t^2)] h(t) dt

with the bracket kept as one kernel ``(1 + x t)/((x - t)(1 + t^2))``.  Far from
``x`` the integral is taken in the variable ``theta = arctan t`` (where
``dt/(1+t^2) = d theta`` and the integrand stays bounded); near ``x`` the two
sides are folded so only a smooth integrand remains, then the excision radius
is extrapolated to zero.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import NotIntegrable, SingularitySwamp


@dataclass(frozen=True)
class PVSchedule:
    """Discretization policy for the principal value and the improper integral."""

    epsilons: tuple = (0.1, 0.05, 0.025, 0.0125, 0.00625)
    window: float = 1e6
    points_per_unit: int = 64
    near: float = 1.0
    quad_tol: float = 1e-11

    def __post_init__(self):
        eps = np.asarray(self.epsilons, dtype=float)
        if eps.size < 2 or np.any(np.diff(eps) >= 0) or np.any(eps <= 0):
            raise ValueError("epsilons must be positive and strictly decreasing")
        if not (0 < self.window < math.inf):
            raise ValueError("window must be finite and positive")
        if eps[0] >= self.near:
            raise ValueError("largest epsilon must be below the near-field radius")

    def to_dict(self):
        return {"epsilons": list(self.epsilons), "window": self.window,
                "points_per_unit": self.points_per_unit, "near": self.near,
                "quad_tol": self.quad_tol}


DEFAULT_PV = PVSchedule()


@dataclass
class PiFunction:
    """A real function on R together with a numerical L^1(Pi) witness."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    name: str = "anonymous"
    windows: tuple = (10.0, 1e2, 1e3, 1e4, 1e5, 1e6)
    tol: float = 1e-3
    witness: list = field(default_factory=list)

    def __post_init__(self):
        self.witness = [(w, _pi_mass(self.evaluator, w)) for w in self.windows]

    def __call__(self, t):
        return np.asarray(self.evaluator(np.asarray(t, dtype=float)), dtype=float)

    @property
    def certified(self) -> bool:
        vals = [v for _, v in self.witness]
        if not all(math.isfinite(v) for v in vals):
            return False
        return len(vals) < 2 or abs(vals[-1] - vals[-2]) <= self.tol * max(1.0, abs(vals[-1]))

    def tail_mass(self, w: float) -> float:
        """``int_{|t|>w} |h| dPi`` by quadrature in ``theta``."""
        th = math.atan(w)
        f = lambda s: abs(float(self.evaluator(np.array([math.tan(s)]))[0]))
        hi = math.pi / 2
        a, _ = integrate.quad(f, th, hi, limit=200)
        b, _ = integrate.quad(f, -hi, -th, limit=200)
        return a + b


def _pi_mass(h, w):
    th = math.atan(w)
    f = lambda s: abs(float(h(np.array([math.tan(s)]))[0]))
    val, _ = integrate.quad(f, -th, th, limit=400)
    return val


def linear_combination(a: float, h1: PiFunction, b: float, h2: PiFunction) -> PiFunction:
    return PiFunction(lambda t: a * h1(t) + b * h2(t), name=f"{a}*{h1.name}+{b}*{h2.name}",
                      windows=h1.windows, tol=h1.tol)


# -- registry ---------------------------------------------------------------

def _zero(t):
    return np.zeros_like(t)


def _poisson(t):
    return 1.0 / (1.0 + t * t)


def _one(t):
    return np.ones_like(t)


def _gauss(t):
    return np.exp(-t * t)


REGISTRY = {
    "zero": _zero,
    "poisson": _poisson,
    "constant": _one,
    "gauss": _gauss,
    # log|b_i| vanishes identically on R
    "log_abs_b_i": _zero,
}


def named(name: str, **kw) -> PiFunction:
    try:
        return PiFunction(REGISTRY[name], name=name, **kw)
    except KeyError:
        raise KeyError(f"unknown function {name!r}; known: {sorted(REGISTRY)}") from None


def from_table(t: Sequence[float], values: Sequence[float], decay: float = 2.0,
               name: str = "table") -> PiFunction:
    """Linear interpolation inside the table, ``v_end (t_end/t)^decay`` outside."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    order = np.argsort(t)
    t, v = t[order], v[order]

    def ev(s):
        s = np.asarray(s, dtype=float)
        out = np.interp(s, t, v)
        with np.errstate(divide="ignore"):
            hi = v[-1] * np.abs(t[-1] / s) ** decay if t[-1] != 0 else 0.0 * s
            lo = v[0] * np.abs(t[0] / s) ** decay if t[0] != 0 else 0.0 * s
        out = np.where(s > t[-1], hi, out)
        return np.where(s < t[0], lo, out)

    return PiFunction(ev, name=name)


def read_csv_table(path, decay: float = 2.0) -> PiFunction:
    ts, vs = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().lower() in ("t", "#"):
                continue
            ts.append(float(row[0]))
            vs.append(float(row[1]))
    return from_table(ts, vs, decay=decay, name=str(path))


# -- transform --------------------------------------------------------------

def _kernel(x, t):
    return (1.0 + x * t) / ((x - t) * (1.0 + t * t))


def _folded(h, x, s):
    """Sum of the kernel-weighted integrand at ``x - s`` and ``x + s``."""
    tm, tp = x - s, x + s
    hm, hp = h(tm), h(tp)
    sing = (hm - hp) / s
    reg = tm / (1 + tm * tm) * hm + tp / (1 + tp * tp) * hp
    return sing + reg


def _near_integral(h, x, eps, sched: PVSchedule):
    """``int_eps^near`` of the folded integrand, composite Gauss-Legendre."""
    n_panels = max(1, int(math.ceil((sched.near - eps) * sched.points_per_unit / 16)))
    gx, gw = np.polynomial.legendre.leggauss(16)
    edges = np.linspace(eps, sched.near, n_panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    s = (mid + half * gx).ravel()
    w = (half * gw).ravel()
    return float(np.dot(w, _folded(h, x, s)))


def _far_integral(h, x, sched: PVSchedule):
    """``int`` over ``|t - x| > near`` and ``|t| <= window`` in ``theta = arctan t``."""
    lo_t, hi_t = x - sched.near, x + sched.near
    th_w = math.atan(sched.window)

    def f(th):
        t = math.tan(th)
        return float((1 + x * t) / (x - t) * h(np.array([t]))[0])

    total, err = 0.0, 0.0
    pieces = []
    if lo_t > -sched.window:
        pieces.append((-th_w, math.atan(lo_t)))
    if hi_t < sched.window:
        pieces.append((math.atan(hi_t), th_w))
    for a, b in pieces:
        val, e = integrate.quad(f, a, b, limit=500, epsabs=sched.quad_tol, epsrel=sched.quad_tol)
        total += val
        err += e
    return total, err


def _richardson(eps, vals, powers=(1, 3, 5, 7)):
    """Eliminate ``eps^p`` terms level by level; returns (estimate, spread).

    Entry ``j`` of every level keeps the leading error ``~ eps_j^p``, so
    adjacent entries are combined with their own radii.
    """
    eps = np.asarray(eps, dtype=float)
    table = [np.asarray(vals, dtype=float)]
    for p in powers[: len(eps) - 1]:
        prev = table[-1]
        e0, e1 = eps[: prev.size - 1] ** p, eps[1: prev.size] ** p
        table.append((e0 * prev[1:] - e1 * prev[:-1]) / (e0 - e1))
    best = float(table[-1][-1])
    spread = abs(best - float(table[-2][-1]))
    return best, spread


def hilbert_transform(h: PiFunction, x: float, sched: PVSchedule = DEFAULT_PV):
    """Return ``(value, error)`` for the regularized transform at real ``x``.

    ``error`` adds the Richardson spread, the window tail majorant
    ``C(x) int_{|t|>W} |h| dPi`` and the adaptive-quadrature estimate.
    """
    if not h.certified:
        raise NotIntegrable(f"{h.name}: witness partial sums {h.witness} are not Cauchy")
    x = float(x)
    probe = h(np.array([x, x - 1e-9, x + 1e-9]))
    if not np.all(np.isfinite(probe)):
        raise SingularitySwamp(f"{h.name} is not finite near x={x}")
    far, far_err = _far_integral(h, x, sched)
    excised = [_near_integral(h, x, e, sched) + far for e in sched.epsilons]
    value, spread = _richardson(sched.epsilons, excised)
    W = sched.window
    c = (1 + abs(x) * W) / (W - abs(x)) if W > abs(x) else math.inf
    tail = c * h.tail_mass(W) if c < math.inf else math.inf
    return value / math.pi, (spread + tail + far_err) / math.pi


def excised_integral(h: PiFunction, x: float, eps: float, sched: PVSchedule = DEFAULT_PV):
    """The integral at a fixed excision radius (before extrapolation)."""
    far, _ = _far_integral(h, float(x), sched)
    return (_near_integral(h, float(x), eps, sched) + far) / math.pi


def outer_from_modulus(h: PiFunction, grid, sched: PVSchedule = DEFAULT_PV):
    """Samples of ``exp(h + i h~)`` and per-sample error bounds.

    The modulus ``exp(h)`` never passes through quadrature.
    """
    x = np.asarray(grid, dtype=float)
    hv = h(x)
    vals = np.empty(x.shape, dtype=complex)
    errs = np.empty(x.shape)
    for k, xk in enumerate(x):
        ht, e = hilbert_transform(h, xk, sched)
        mod = math.exp(hv[k])
        vals[k] = mod * complex(math.cos(ht), math.sin(ht))
        errs[k] = mod * e
    return vals, errs


def weak_l1_tail(h: PiFunction, A_grid, sched: PVSchedule = DEFAULT_PV, n_cells: int = 200):
    """Pairs ``(A, A * Pi{|h~| > A})`` on a grid uniform in ``arctan t``.

    Each of the ``n_cells`` cells carries Pi-mass ``pi / n_cells``; the result
    is a trend diagnostic only.
    """
    th = (np.arange(n_cells) + 0.5) * (np.pi / n_cells) - np.pi / 2
    xs = np.tan(th)
    ht = np.array([hilbert_transform(h, xk, sched)[0] for xk in xs])
    cell = np.pi / n_cells
    return [(float(A), float(A * cell * np.count_nonzero(np.abs(ht) > A))) for A in A_grid]
