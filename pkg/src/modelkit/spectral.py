"""Exponential-rational functions on the line and exact Hardy projections.

Every function handled by the Toeplitz probe is a finite sum

    f(x) = sum_k  A_k exp(i c_k x) (x - p_k)^(-m_k)

(inner functions built from a singular factor and finitely many Blaschke
factors, their conjugates on R, model-space kernels, and products of those).
With ``f(x) = int fhat(xi) e^{i x xi} d xi`` each term has the closed-form
transform

    Im p < 0:  fhat(xi) = (-i) (-i t)^(m-1)/(m-1)! e^{-i p t} 1[t > 0],  t = xi - c
    Im p > 0:  fhat(xi) = (+i) (-i t)^(m-1)/(m-1)! e^{-i p t} 1[t < 0]

so the Riesz projection onto H^2 is the restriction to ``xi >= 0``.  Norms
and inner products are then Gauss-Legendre quadratures of smooth pieces of
``|fhat|^2`` (Parseval: ``||f||^2 = 2 pi int |fhat|^2``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import NotSquareIntegrable
from .inner_core import (
    DEFAULT_SCHEDULE,
    InnerFunctionSpec,
    TruncationSchedule,
    _n_terms,
    _phases,
    eval_inner,
)

_KEY_DIGITS = 12


def _same(p: complex, q: complex) -> bool:
    return abs(p - q) <= 1e-12 * (1 + abs(p))


@lru_cache(maxsize=None)
def _binom(n: int, k: int) -> int:
    return math.comb(n, k)


def _pf_pair(p: complex, j: int, q: complex, k: int):
    """Partial fractions of ``(x-p)^-j (x-q)^-k`` for ``p != q``.

    Returns lists of ``(coef, order)`` for the ``p`` and ``q`` parts.
    """
    d = p - q
    at_p = [((-1) ** (j - r) * _binom(k + j - r - 1, j - r) * d ** (-(k + j - r)), r)
            for r in range(1, j + 1)]
    at_q = [((-1) ** (k - r) * _binom(j + k - r - 1, k - r) * (-d) ** (-(j + k - r)), r)
            for r in range(1, k + 1)]
    return at_p, at_q


class ExpRational:
    """Finite sum of ``coef * exp(i freq x) * (x - pole)^(-order)``.

    ``order == 0`` terms are bounded non-decaying pieces (e.g. the constant
    part of a Blaschke factor); they must cancel before a transform is taken.
    """

    __slots__ = ("coef", "freq", "pole", "order")

    def __init__(self, coef=(), freq=(), pole=(), order=()):
        self.coef = np.asarray(coef, dtype=complex).ravel()
        self.freq = np.asarray(freq, dtype=float).ravel()
        self.pole = np.asarray(pole, dtype=complex).ravel()
        self.order = np.asarray(order, dtype=int).ravel()
        n = self.coef.size
        if not (self.freq.size == self.pole.size == self.order.size == n):
            raise ValueError("term arrays must have equal length")
        # order-0 terms carry no pole
        self.pole = np.where(self.order == 0, 0.0, self.pole)

    # -- constructors -----------------------------------------------------
    @classmethod
    def constant(cls, value: complex = 1.0, freq: float = 0.0):
        return cls([value], [freq], [0.0], [0])

    @classmethod
    def simple_pole(cls, pole: complex, coef: complex = 1.0, freq: float = 0.0, order: int = 1):
        return cls([coef], [freq], [pole], [order])

    @classmethod
    def from_terms(cls, terms: Iterable):
        terms = list(terms)
        if not terms:
            return cls()
        c, f, p, m = zip(*terms)
        return cls(c, f, p, m)

    def terms(self):
        return list(zip(self.coef, self.freq, self.pole, self.order))

    def __len__(self):
        return self.coef.size

    def __repr__(self):
        return f"ExpRational({len(self)} terms)"

    # -- evaluation -------------------------------------------------------
    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        zz = z[..., None]
        with np.errstate(divide="ignore", invalid="ignore"):
            base = np.where(self.order == 0, 1.0, (zz - self.pole) ** (-self.order.astype(float)))
        vals = self.coef * np.exp(1j * self.freq * zz) * base
        return vals.sum(axis=-1)

    # -- algebra ----------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, ExpRational):
            other = ExpRational.constant(other)
        return ExpRational(np.r_[self.coef, other.coef], np.r_[self.freq, other.freq],
                           np.r_[self.pole, other.pole], np.r_[self.order, other.order]).simplify()

    __radd__ = __add__

    def __neg__(self):
        return ExpRational(-self.coef, self.freq, self.pole, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, s: complex):
        return ExpRational(self.coef * s, self.freq, self.pole, self.order)

    def __mul__(self, other):
        if not isinstance(other, ExpRational):
            return self.scale(complex(other))
        out = []
        for a, c, p, j in self.terms():
            for b, d, q, k in other.terms():
                ab, f = a * b, c + d
                if j == 0 or k == 0:
                    pole, order = (q, k) if j == 0 else (p, j)
                    out.append((ab, f, pole, order))
                elif _same(p, q):
                    out.append((ab, f, p, j + k))
                else:
                    at_p, at_q = _pf_pair(p, j, q, k)
                    out.extend((ab * co, f, p, r) for co, r in at_p)
                    out.extend((ab * co, f, q, r) for co, r in at_q)
        return ExpRational.from_terms(out).simplify()

    def __rmul__(self, other):
        return self.scale(complex(other))

    def conj_line(self):
        """Complex conjugate as a function on the real line."""
        return ExpRational(self.coef.conj(), -self.freq, self.pole.conj(), self.order)

    def derivative(self):
        """Exact derivative in ``z``."""
        out = []
        for a, c, p, m in self.terms():
            if c != 0:
                out.append((1j * c * a, c, p, m))
            if m > 0:
                out.append((-m * a, c, p, m + 1))
        return ExpRational.from_terms(out).simplify()

    def simplify(self):
        """Merge identical ``(freq, pole, order)`` terms; drop exact zeros."""
        acc = {}
        for a, c, p, m in self.terms():
            key = (round(c, _KEY_DIGITS), 0.0 if m == 0 else round(p.real, _KEY_DIGITS),
                   0.0 if m == 0 else round(p.imag, _KEY_DIGITS), m)
            if key in acc:
                acc[key][0] += a
            else:
                acc[key] = [a, c, p, m]
        terms = [tuple(v) for v in acc.values() if v[0] != 0]
        return ExpRational.from_terms(terms)

    # -- spectral side ----------------------------------------------------
    def bounded_part(self):
        """Sum of |coef| of order-0 terms grouped by frequency (should be 0 for L^2)."""
        mask = self.order == 0
        return float(np.abs(self.coef[mask]).sum()) if mask.any() else 0.0

    def check_l2(self, rel_tol: float = 1e-10):
        scale = float(np.abs(self.coef).sum()) or 1.0
        if self.bounded_part() > rel_tol * scale:
            raise NotSquareIntegrable("function has a non-decaying (order 0) component")
        if np.any((self.order > 0) & (self.pole.imag == 0)):
            raise NotSquareIntegrable("pole on the real line")

    def fourier(self, xi):
        """Transform ``fhat(xi)`` (order-0 terms are ignored; see :meth:`check_l2`)."""
        xi = np.asarray(xi, dtype=float)
        mask = self.order > 0
        E = _term_transforms(xi.ravel(), self.freq[mask], self.pole[mask], self.order[mask])
        return (E @ self.coef[mask]).reshape(xi.shape)


def _term_transforms(xi, freq, pole, order):
    """``E[q, k]``: transform of ``exp(i c_k x)(x - p_k)^(-m_k)`` at ``xi_q``."""
    t = xi[:, None] - freq[None, :]
    upper = pole.imag > 0
    support = np.where(upper, t < 0, t > 0)
    ts = np.where(support, t, 0.0)
    # -i p t = Im(p) t - i Re(p) t; Im(p) t <= 0 on the support
    out = np.exp(pole.imag * ts - 1j * (pole.real * ts))
    out *= np.where(upper, 1j, -1j)
    if np.any(order > 1):
        fact = np.array([math.factorial(m - 1) for m in order], dtype=float)
        out *= (-1j * ts) ** (order - 1) / fact
    out[~support] = 0.0
    return out


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

@lru_cache(maxsize=256)
def from_inner(spec: InnerFunctionSpec, schedule: TruncationSchedule = DEFAULT_SCHEDULE,
               max_zeros: int = 400) -> ExpRational:
    """Partial-fraction form of ``spec`` on the line (zeros cut at the schedule).

    Infinite zero sets are cut to at most ``max_zeros`` zeros; the caller is
    responsible for treating the result as a truncation.  Results are cached,
    so callers must not modify the returned arrays in place.
    """
    n = min(_n_terms(spec, schedule), max_zeros)
    zs = spec.zero_array(n) if (spec.family is not None or spec.zeros) else np.zeros(0, complex)
    if zs.size and np.unique(np.round(zs, _KEY_DIGITS)).size == zs.size:
        return _distinct_zeros(spec, zs)
    alpha = _phases(zs) if zs.size else np.zeros(0)
    out = ExpRational.constant(spec.constant, spec.mass)
    for w, al in zip(zs, alpha):
        # e^{i alpha} (x - w)/(x - conj w) = e^{i alpha} (1 + (conj w - w)/(x - conj w))
        e = np.exp(1j * al)
        factor = ExpRational([e, e * (w.conjugate() - w)], [0.0, 0.0], [0.0, w.conjugate()], [0, 1])
        out = out * factor
    return out


def _distinct_zeros(spec: InnerFunctionSpec, zs: np.ndarray) -> ExpRational:
    """Residue form ``C E (1 + sum r_n/(x - conj w_n))`` for simple zeros.

    ``r_n = prod_m (conj w_n - w_m) / prod_{m != n} (conj w_n - conj w_m)``,
    accumulated in logarithms.
    """
    lead = spec.constant * np.exp(1j * _phases(zs).sum())
    wb = zs.conj()
    num = np.log(wb[:, None] - zs[None, :]).sum(axis=1)
    diff = wb[:, None] - wb[None, :]
    np.fill_diagonal(diff, 1.0)
    den = np.log(diff).sum(axis=1)
    r = np.exp(num - den)
    n = zs.size
    coef = np.r_[1.0, r] * lead
    return ExpRational(coef, np.full(n + 1, spec.mass), np.r_[0.0, wb], np.r_[0, np.ones(n, int)])


def hardy_kernel_function(lam: complex) -> ExpRational:
    """H^2 reproducing kernel ``(i/2pi)/(x - conj lam)``."""
    return ExpRational.simple_pole(np.conj(lam), 1j / (2 * np.pi))


def kernel_function(spec, lam: complex, schedule: TruncationSchedule = DEFAULT_SCHEDULE,
                    max_zeros: int = 400) -> ExpRational:
    """Model-space kernel ``(i/2pi)(1 - conj(U(lam)) U(x))/(x - conj lam)``.

    ``spec=None`` gives the H^2 kernel.  ``U`` is the same truncation used by
    :func:`from_inner` so that the result lies exactly in the truncated model space.
    """
    base = hardy_kernel_function(lam)
    if spec is None:
        return base
    u = from_inner(spec, schedule, max_zeros)
    u_lam = complex(u(lam))
    return base * (ExpRational.constant(1.0) - u.scale(np.conj(u_lam)))


# ---------------------------------------------------------------------------
# Quadrature on the frequency side
# ---------------------------------------------------------------------------

@dataclass
class SpectralQuadrature:
    """Gauss-Legendre nodes covering the supports of a family of transforms.

    Breakpoints sit at every term frequency and at 0, so each panel integrates
    a smooth function.  Semi-infinite ends are cut where ``|fhat|^2`` has
    decayed by ``exp(-2 * decay_lengths)``.
    """

    nodes: np.ndarray
    weights: np.ndarray

    @classmethod
    def for_functions(cls, funcs: Sequence[ExpRational], n_gl: int = 24,
                      decay_lengths: float = 40.0, max_panel: float = 1.0,
                      phase_per_panel: float = 6.0):
        terms = [f for f in funcs if len(f)]
        if not terms:
            return cls(np.zeros(0), np.zeros(0))
        freq = np.concatenate([f.freq[f.order > 0] for f in terms] + [np.zeros(1)])
        pole = np.concatenate([f.pole[f.order > 0] for f in terms])
        order = np.concatenate([f.order[f.order > 0] for f in terms])
        if pole.size == 0:
            return cls(np.zeros(0), np.zeros(0))
        breaks = np.unique(np.round(freq, _KEY_DIGITS))
        rate = max(1.0, float(np.abs(pole.real).max()))
        panel = min(max_panel, phase_per_panel / rate)
        extra = 2.0 * (order.max() - 1)
        lower = pole.imag > 0
        left = breaks[0]
        right = breaks[-1]
        if lower.any():
            d = float(pole.imag[lower].min())
            left = min(left, float(freq[:-1][lower].min()) - (decay_lengths + extra) / d)
        if (~lower).any():
            d = float(-pole.imag[~lower].max())
            right = max(right, float(freq[:-1][~lower].max()) + (decay_lengths + extra) / d)
        edges = np.unique(np.r_[left, breaks, right])
        x, w = np.polynomial.legendre.leggauss(n_gl)
        nodes, weights = [], []
        for a, b in zip(edges[:-1], edges[1:]):
            k = max(1, int(math.ceil((b - a) / panel)))
            sub = np.linspace(a, b, k + 1)
            mid = 0.5 * (sub[1:] + sub[:-1])[:, None]
            half = 0.5 * (sub[1:] - sub[:-1])[:, None]
            nodes.append((mid + half * x).ravel())
            weights.append((half * w).ravel())
        return cls(np.concatenate(nodes), np.concatenate(weights))

    def transforms(self, funcs: Sequence[ExpRational]) -> np.ndarray:
        """Matrix ``F[q, j] = fhat_j(xi_q)``.

        Terms shared between functions (same frequency, pole and order) are
        evaluated once.
        """
        keys, cols = {}, []
        rows, fidx, vals = [], [], []
        for j, f in enumerate(funcs):
            for a, c, p, m in f.terms():
                if m == 0:
                    continue
                key = (round(c, _KEY_DIGITS), round(p.real, _KEY_DIGITS), round(p.imag, _KEY_DIGITS), m)
                if key not in keys:
                    keys[key] = len(cols)
                    cols.append((c, p, m))
                rows.append(keys[key])
                fidx.append(j)
                vals.append(a)
        C = np.zeros((len(cols), len(funcs)), dtype=complex)
        np.add.at(C, (np.asarray(rows, int), np.asarray(fidx, int)), np.asarray(vals, complex))
        if not cols:
            return np.zeros((self.nodes.size, len(funcs)), dtype=complex)
        c, p, m = (np.array(v) for v in zip(*cols))
        return _term_transforms(self.nodes, c.astype(float), p.astype(complex), m.astype(int)) @ C

    def gram_from(self, fa: np.ndarray, fb: np.ndarray = None, part: str = "all") -> np.ndarray:
        """:meth:`gram` for precomputed transform matrices."""
        fb = fa if fb is None else fb
        w = self.weights
        if part == "plus":
            w = np.where(self.nodes >= 0, w, 0.0)
        elif part == "minus":
            w = np.where(self.nodes < 0, w, 0.0)
        return 2 * np.pi * (fb.conj().T * w) @ fa

    def gram(self, funcs_a, funcs_b=None, part: str = "all") -> np.ndarray:
        """``G[j, l] = <a_l, b_j>`` restricted to the H^2 part (``"plus"``), the
        conjugate-H^2 part (``"minus"``) or everything."""
        fa = self.transforms(funcs_a)
        fb = fa if funcs_b is None else self.transforms(funcs_b)
        return self.gram_from(fa, fb, part)


def inner_product(f: ExpRational, g: ExpRational, part: str = "all", **quad) -> complex:
    """``<f, g> = int f conj(g) dx`` (optionally of the projections)."""
    f.check_l2()
    g.check_l2()
    q = SpectralQuadrature.for_functions([f, g], **quad)
    return complex(q.gram([f], [g], part)[0, 0])


def norm(f: ExpRational, part: str = "all", **quad) -> float:
    f.check_l2()
    q = SpectralQuadrature.for_functions([f], **quad)
    return float(math.sqrt(max(q.gram([f], part=part)[0, 0].real, 0.0)))


def hardy_residual(f: ExpRational, **quad) -> float:
    """``||P_- f|| / ||f||``: relative distance of ``f`` from H^2."""
    f.check_l2()
    q = SpectralQuadrature.for_functions([f], **quad)
    g = q.gram([f])[0, 0].real
    minus = q.gram([f], part="minus")[0, 0].real
    return float(math.sqrt(max(minus, 0.0) / g)) if g > 0 else 0.0
