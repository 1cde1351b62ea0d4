"""Meromorphic inner functions on the upper half-plane.

An inner function is stored parametrically as

    U(z) = C * exp(i a z) * prod_n e^{i alpha_n} (z - w_n) / (z - conj(w_n))

with ``a >= 0``, ``|C| = 1`` and zeros ``w_n`` in the upper half-plane.  The
phases ``alpha_n`` are fixed so that every factor is positive-ish at ``z = i``
which makes infinite products converge whenever the Blaschke sum does.

Points are plain Python/numpy complex numbers.  Infinite zero sets are only
representable through :class:`ArithFamily` (``alpha*n + i*beta``), for which
the truncation tail is bounded in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    GridTooCoarse,
    NonUpperHalfPoint,
    NonUpperHalfZero,
    PoleHit,
    TailNotBounded,
)

EPS = np.finfo(float).eps
# Rounding allowance per factor folded into every reported error bound.
ROUNDING_PER_TERM = 8 * EPS


@dataclass(frozen=True)
class ArithFamily:
    """Zeros ``alpha*n + i*beta`` for ``nmin <= n <= nmax`` (``None`` = unbounded)."""

    alpha: float
    beta: float
    nmin: Optional[int] = None
    nmax: Optional[int] = None

    def __post_init__(self):
        if not (self.alpha > 0):
            raise ValueError("alpha must be positive")
        if not (self.beta > 0):
            raise NonUpperHalfZero(f"beta={self.beta} puts the zeros off the upper half-plane")
        if self.nmin is not None and self.nmax is not None and self.nmin > self.nmax:
            raise ValueError("nmin > nmax")

    @property
    def infinite(self) -> bool:
        return self.nmin is None or self.nmax is None

    @property
    def bilateral(self) -> bool:
        return self.nmin is None and self.nmax is None

    def indices(self, n_terms: int) -> np.ndarray:
        """Indices with ``|n| <= n_terms`` inside the family range, ordered 0, 1, -1, 2, -2, ..."""
        lo = -n_terms if self.nmin is None else max(self.nmin, -n_terms)
        hi = n_terms if self.nmax is None else min(self.nmax, n_terms)
        if lo > hi:
            return np.zeros(0, dtype=int)
        n = np.arange(lo, hi + 1)
        order = np.lexsort((-n, np.abs(n)))
        return n[order]

    def dropped_sides(self, n_terms: int) -> int:
        """Number of sides (0, 1 or 2) with indices beyond ``|n| > n_terms``."""
        sides = 0
        if self.nmax is None or self.nmax > n_terms:
            sides += 1
        if self.nmin is None or self.nmin < -n_terms:
            sides += 1
        return sides

    def count(self) -> Optional[int]:
        if self.infinite:
            return None
        return self.nmax - self.nmin + 1

    def to_dict(self):
        return {"family": "arith", "alpha": self.alpha, "beta": self.beta,
                "nmin": self.nmin, "nmax": self.nmax}


@dataclass(frozen=True)
class TruncationSchedule:
    """How infinite (or very long) products are cut.

    ``n_terms`` is the symmetric cut ``|n| <= n_terms`` for families and the
    number of leading zeros kept for explicit lists.  ``levels`` and ``tol``
    drive :func:`blaschke_condition_sum`.
    """

    n_terms: int = 4000
    levels: tuple = (250, 500, 1000, 2000, 4000)
    tol: float = 1e-3

    def to_dict(self):
        return {"n_terms": self.n_terms, "levels": list(self.levels), "tol": self.tol}


DEFAULT_SCHEDULE = TruncationSchedule()


@dataclass(frozen=True)
class EvalResult:
    value: complex
    truncation_error_bound: float
    terms_used: int


@dataclass(frozen=True)
class BlaschkeData:
    zeros: tuple = ()
    phases: tuple = field(default=(), compare=False)

    def __post_init__(self):
        zs = tuple(complex(w) for w in self.zeros)
        for w in zs:
            if not w.imag > 0 or not math.isfinite(w.real) or not math.isfinite(w.imag):
                raise NonUpperHalfZero(f"zero {w} is not in the open upper half-plane")
        object.__setattr__(self, "zeros", zs)
        object.__setattr__(self, "phases", tuple(float(phase_alpha(w)) for w in zs))


@dataclass(frozen=True)
class InnerFunctionSpec:
    """``C e^{iaz} B(z)`` with explicit zeros or an arithmetic family of zeros."""

    mass: float = 0.0
    zeros: tuple = ()
    constant: complex = 1.0
    family: Optional[ArithFamily] = None

    def __post_init__(self):
        if not (self.mass >= 0) or not math.isfinite(self.mass):
            raise ValueError(f"mass must be a finite non-negative number, got {self.mass}")
        c = complex(self.constant)
        if abs(abs(c) - 1.0) > 1e-12:
            raise ValueError(f"|C| must be 1, got {abs(c)}")
        object.__setattr__(self, "constant", c)
        object.__setattr__(self, "mass", float(self.mass))
        if self.zeros and self.family is not None:
            raise ValueError("give either explicit zeros or a family, not both")
        object.__setattr__(self, "zeros", BlaschkeData(tuple(self.zeros)).zeros)

    # -- shape predicates -------------------------------------------------
    @property
    def has_zeros(self) -> bool:
        return bool(self.zeros) or (self.family is not None and self.family.count() != 0)

    @property
    def finite_zeros(self) -> bool:
        return self.family is None or not self.family.infinite

    @property
    def is_finite_blaschke(self) -> bool:
        return self.mass == 0 and self.finite_zeros

    def zero_array(self, n_terms: Optional[int] = None) -> np.ndarray:
        """Zeros kept by a cut at ``n_terms`` (all of them for finite data when ``None``)."""
        if self.family is not None:
            if n_terms is None:
                if self.family.infinite:
                    raise TailNotBounded("infinite family needs a truncation level")
                n_terms = max(abs(self.family.nmin), abs(self.family.nmax))
            n = self.family.indices(n_terms)
            return self.family.alpha * n + 1j * self.family.beta
        zs = np.asarray(self.zeros, dtype=complex)
        return zs if n_terms is None else zs[:n_terms]

    def dropped_zeros(self, n_terms: int) -> np.ndarray:
        if self.family is not None:
            return np.zeros(0, dtype=complex)
        return np.asarray(self.zeros[n_terms:], dtype=complex)

    def times(self, other: "InnerFunctionSpec") -> "InnerFunctionSpec":
        """Product of two specs with explicit (finite) zero lists."""
        if self.family is not None or other.family is not None:
            raise ValueError("products are only formed for explicit zero lists")
        return InnerFunctionSpec(self.mass + other.mass, self.zeros + other.zeros,
                                 self.constant * other.constant)

    def to_dict(self):
        zeros = (self.family.to_dict() if self.family is not None
                 else [{"re": w.real, "im": w.imag} for w in self.zeros])
        return {"mass": self.mass,
                "constant": {"re": self.constant.real, "im": self.constant.imag},
                "zeros": zeros}

    @classmethod
    def from_dict(cls, d):
        from .io import spec_from_dict
        return spec_from_dict(d)


def singular(a: float) -> InnerFunctionSpec:
    """``S^a = exp(i a z)``."""
    return InnerFunctionSpec(mass=a)


def blaschke(zeros: Sequence[complex], mass: float = 0.0) -> InnerFunctionSpec:
    return InnerFunctionSpec(mass=mass, zeros=tuple(zeros))



def arith(alpha: float = 1.0, beta: float = 1.0, nmin=None, nmax=None, mass: float = 0.0):
    return InnerFunctionSpec(mass=mass, family=ArithFamily(alpha, beta, nmin, nmax))


# ---------------------------------------------------------------------------
# Blaschke-sum and phases
# ---------------------------------------------------------------------------

def blaschke_condition_sum(zeros, levels: Sequence[int] = None, tol: float = 1e-6):
    """Partial sums of ``Im w / (1 + |w|^2)`` at the given cut levels.

    Returns ``(partial_sums, converged)``; ``converged`` compares the last two
    partial sums against ``tol``.
    """
    zs = np.asarray(zeros, dtype=complex).ravel()
    if zs.size == 0:
        return [0.0], True
    if np.any(zs.imag <= 0):
        raise NonUpperHalfZero("all zeros must lie in the upper half-plane")
    if levels is None:
        levels = [zs.size]
    levels = sorted({min(int(n), zs.size) for n in levels})
    terms = zs.imag / (1.0 + np.abs(zs) ** 2)
    sums = [float(math.fsum(terms[:n])) for n in levels]
    converged = len(sums) < 2 or abs(sums[-1] - sums[-2]) < tol
    return sums, bool(converged)


def phase_alpha(w: complex) -> float:
    """Real ``alpha`` with ``e^{i alpha} = |r| / r``, ``r = (i - w)/(i - conj w)``.

    At ``w = i`` the ratio vanishes and ``0`` is returned (continuity limit).
    """
    w = complex(w)
    if not w.imag > 0:
        raise NonUpperHalfZero(f"zero {w} is not in the open upper half-plane")
    r = (1j - w) / (1j - w.conjugate())
    if r == 0:
        return 0.0
    alpha = -math.atan2(r.imag, r.real)
    # principal value in (-pi, pi]
    if alpha <= -math.pi:
        alpha += 2 * math.pi
    return alpha


def _phases(zs: np.ndarray) -> np.ndarray:
    r = (1j - zs) / (1j - zs.conj())
    alpha = -np.angle(r)
    alpha = np.where(r == 0, 0.0, alpha)
    return np.where(alpha <= -np.pi, alpha + 2 * np.pi, alpha)


# ---------------------------------------------------------------------------
# Tail bounds
# ---------------------------------------------------------------------------

def _factor_deviation(zs: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Per-factor bound on ``|factor(z) - 1|`` (shape ``z.shape + (len(zs),)``).

    Uses the exact identity ``factor = |b_w(i)| (1 + delta)`` with
    ``delta = 2i Im(w) (z - i) / ((z - conj w)(i - w))``.
    """
    z = z[..., None]
    y = zs.imag
    rho = 4 * y / np.abs(1j - zs.conj()) ** 2
    delta = 2 * y * np.abs(z - 1j) / (np.abs(z - zs.conj()) * np.abs(1j - zs))
    return rho + delta


def _family_tail_sum(fam: ArithFamily, n_terms: int, z: np.ndarray) -> np.ndarray:
    """Closed-form majorant of ``sum |factor_n(z) - 1|`` over ``|n| > n_terms``."""
    sides = fam.dropped_sides(n_terms)
    if sides == 0:
        return np.zeros(z.shape)
    c = np.abs(z.real) / fam.alpha
    if np.any(n_terms <= c):
        raise TailNotBounded(
            f"truncation n_terms={n_terms} does not cover |Re z|/alpha={c.max():.3g}; raise n_terms")
    a2 = fam.alpha ** 2
    one_side = 4 * fam.beta / (a2 * n_terms) + 2 * fam.beta * np.abs(z - 1j) / (a2 * (n_terms - c))
    return sides * one_side


def _tail_sum(spec: InnerFunctionSpec, n_terms: int, z: np.ndarray) -> np.ndarray:
    if spec.family is not None:
        return _family_tail_sum(spec.family, n_terms, z)
    dropped = spec.dropped_zeros(n_terms)
    if dropped.size == 0:
        return np.zeros(z.shape)
    out = np.zeros(z.shape)
    for chunk in _chunks(dropped):
        out += _factor_deviation(chunk, z).sum(axis=-1)
    return out


def _chunks(arr: np.ndarray, size: int = 512):
    for k in range(0, arr.size, size):
        yield arr[k:k + size]


def _product_bound(tail: np.ndarray) -> np.ndarray:
    # |prod(1 + e_n) - 1| <= exp(sum |e_n|) - 1
    with np.errstate(over="ignore"):
        return np.expm1(tail)


def _n_terms(spec: InnerFunctionSpec, schedule: TruncationSchedule) -> int:
    if spec.family is None:
        return min(len(spec.zeros), schedule.n_terms)
    if spec.family.infinite:
        return schedule.n_terms
    fam = spec.family
    return min(schedule.n_terms, max(abs(fam.nmin), abs(fam.nmax)))


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _log_blaschke(zs: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Sum over zeros of principal ``log`` of each normalized factor."""
    out = np.zeros(z.shape, dtype=complex)
    for chunk in _chunks(zs):
        alpha = _phases(chunk)
        zz = z[..., None]
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.log(zz - chunk) - np.log(zz - chunk.conj()) + 1j * alpha
        out += terms.sum(axis=-1)
    return out


def eval_inner(spec: InnerFunctionSpec, z, schedule: TruncationSchedule = DEFAULT_SCHEDULE):
    """Evaluate ``spec`` at ``z`` (scalar or array) with a certified truncation bound.

    On the closed upper half-plane the truncated product is itself inner, so
    ``|value| <= 1`` up to rounding and ``|U - value| <= truncation_error_bound``.
    Points in the lower half-plane are allowed (meromorphic continuation); a
    point on a pole ``conj(w_n)`` raises :class:`PoleHit`.
    """
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=complex)
    n_terms = _n_terms(spec, schedule)
    zs = spec.zero_array(n_terms)
    if zs.size and np.any(np.isclose(z[..., None], zs.conj(), rtol=0, atol=1e-300)):
        raise PoleHit(f"z hits a pole of the inner function")
    tail = _tail_sum(spec, n_terms, z)
    logp = 1j * spec.mass * z + _log_blaschke(zs, z)
    with np.errstate(over="ignore", invalid="ignore"):
        value = spec.constant * np.exp(logp)
    value = np.where(np.isnan(value), 0.0, value)
    bound = np.abs(value) * _product_bound(tail) + ROUNDING_PER_TERM * (zs.size + 1)
    if scalar:
        return EvalResult(complex(value), float(bound), int(zs.size))
    return EvalResult(value, bound, int(zs.size))


def _continuous_arg(spec: InnerFunctionSpec, x: np.ndarray, zs: np.ndarray) -> np.ndarray:
    # each factor's argument is continuous in real x; fix its branch at x = 0
    theta = np.angle(spec.constant) + spec.mass * x
    for chunk in _chunks(zs):
        alpha = _phases(chunk)
        xx = x[..., None]
        raw = np.angle(xx - chunk) - np.angle(xx - chunk.conj()) + alpha
        raw0 = np.angle(0 - chunk) - np.angle(0 - chunk.conj()) + alpha
        shift = -2 * np.pi * np.round(raw0 / (2 * np.pi))
        theta = theta + (raw + shift).sum(axis=-1)
    return theta


def arg_on_line(spec: InnerFunctionSpec, grid, schedule: TruncationSchedule = DEFAULT_SCHEDULE,
                return_bound: bool = False):
    """Continuous argument of ``spec`` sampled on an increasing real grid.

    The value at the grid point nearest 0 is normalized into ``(-pi, pi]``.
    """
    x = np.asarray(grid, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("grid must be a non-empty 1-d array")
    if np.any(np.diff(x) <= 0):
        raise ValueError("grid must be strictly increasing")
    n_terms = _n_terms(spec, schedule)
    zs = spec.zero_array(n_terms)
    theta = _continuous_arg(spec, x, zs)
    if x.size > 1 and np.any(np.abs(np.diff(theta)) >= np.pi):
        k = int(np.argmax(np.abs(np.diff(theta))))
        raise GridTooCoarse(f"phase jump >= pi between x={x[k]:.6g} and x={x[k + 1]:.6g}")
    k0 = int(np.argmin(np.abs(x)))
    shift = -2 * np.pi * np.floor((theta[k0] + np.pi) / (2 * np.pi))
    if theta[k0] + shift <= -np.pi:
        shift += 2 * np.pi
    theta = theta + shift
    if not return_bound:
        return theta
    tail = _tail_sum(spec, n_terms, x.astype(complex))
    # |Im log(1+e)| <= 2|e| for |e| <= 1/2
    bound = np.where(tail <= 0.5, 2 * tail, np.pi) + ROUNDING_PER_TERM * (zs.size + 1)
    return theta, bound


def derivative_modulus_on_line(spec: InnerFunctionSpec, grid,
                               schedule: TruncationSchedule = DEFAULT_SCHEDULE,
                               return_bound: bool = False):
    """``|U'(x)| = a + sum 2 Im(w_n) / |x - w_n|^2`` on a real grid."""
    x = np.asarray(grid, dtype=float)
    n_terms = _n_terms(spec, schedule)
    zs = spec.zero_array(n_terms)
    out = np.full(x.shape, spec.mass, dtype=float)
    for chunk in _chunks(zs):
        out = out + (2 * chunk.imag / np.abs(x[..., None] - chunk) ** 2).sum(axis=-1)
    if not return_bound:
        return out
    bound = np.zeros(x.shape)
    if spec.family is not None:
        fam = spec.family
        sides = fam.dropped_sides(n_terms)
        if sides:
            c = np.abs(x) / fam.alpha
            if np.any(n_terms <= c):
                raise TailNotBounded("truncation does not cover the grid")
            bound = sides * 2 * fam.beta / (fam.alpha ** 2 * (n_terms - c))
    else:
        dropped = spec.dropped_zeros(n_terms)
        for chunk in _chunks(dropped):
            bound = bound + (2 * chunk.imag / np.abs(x[..., None] - chunk) ** 2).sum(axis=-1)
    return out, bound


# ---------------------------------------------------------------------------
# Reproducing kernels
# ---------------------------------------------------------------------------

def hardy_kernel(lam: complex, z):
    """Reproducing kernel of H^2 for ``<f, g> = int f conj(g) dx``: ``(i/2pi)/(z - conj lam)``."""
    lam = complex(lam)
    if not lam.imag > 0:
        raise NonUpperHalfPoint(f"{lam} is not in the upper half-plane")
    return (1j / (2 * np.pi)) / (np.asarray(z, dtype=complex) - lam.conjugate())


def reproducing_kernel(spec: Optional[InnerFunctionSpec], lam: complex, z,
                       schedule: TruncationSchedule = DEFAULT_SCHEDULE):
    """Kernel at ``lam`` evaluated at ``z``.

    ``spec=None`` selects H^2 with the conventional normalization
    ``(1/pi) / (z - conj lam)``, which at ``lam = i`` is ``1/(pi (z + i))``;
    this equals ``-2i`` times the reproducing kernel.  For an inner ``spec``
    the genuine reproducing kernel of the model space is returned:

        k(z) = (i/2pi) (1 - conj(U(lam)) U(z)) / (z - conj lam)

    so ``<f, k> = f(lam)`` for ``f`` in the model space.
    """
    lam = complex(lam)
    if not lam.imag > 0:
        raise NonUpperHalfPoint(f"{lam} is not in the upper half-plane")
    z = np.asarray(z, dtype=complex)
    if spec is None:
        out = (1 / np.pi) / (z - lam.conjugate())
    else:
        u_lam = eval_inner(spec, lam, schedule).value
        u_z = eval_inner(spec, z, schedule).value
        out = (1j / (2 * np.pi)) * (1 - np.conj(u_lam) * u_z) / (z - lam.conjugate())
    return complex(out) if out.ndim == 0 else out


# elementary factor (z - i)/(z + i)
B_I = blaschke([1j])
