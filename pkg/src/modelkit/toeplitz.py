"""Toeplitz operators with inner/co-inner symbols: discretization and kernel probes.

All functions on the line are :class:`~modelkit.spectral.ExpRational` sums, so
``P+`` and ``P-`` are exact restrictions on the frequency side and only the
final Gauss-Legendre quadrature contributes rounding.

A symbol ``phi = prod U_k^{+-1}`` is first reduced to ``phi = I conj(J)`` with
inner ``I = c S^p B_I`` and ``J = S^q B_J`` (net mass, common zeros
cancelled).  Since ``ker T_{I conj J} = conj(I) (K_J cap I H^2)``, the default
trial functions are ``k^J_lam conj(B_I)``; the ``H^2`` defect of a combination
is penalized together with ``||P+(phi f)||``.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateSystem, FiniteBlaschkeTheta, GridTooCoarse, IllConditionedBasis, ToleranceNotMet
from .inner_core import (
    DEFAULT_SCHEDULE,
    EvalResult,
    InnerFunctionSpec,
    TruncationSchedule,
    eval_inner,
)
from .spectral import ExpRational, SpectralQuadrature, from_inner, hardy_residual, kernel_function, norm
from .util import max_workers

DISCLAIMER = ("Numerical evidence from finite sections; singular-value trends do not "
              "prove triviality or non-triviality of the kernel.")


# ---------------------------------------------------------------------------
# Symbols
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ToeplitzSymbol:
    """Ordered product of inner factors; exponent ``-1`` conjugates on the line."""

    factors: tuple = ()

    def __post_init__(self):
        fs = tuple((spec, int(e)) for spec, e in self.factors)
        for _, e in fs:
            if e not in (1, -1):
                raise ValueError("exponents must be +1 or -1")
        object.__setattr__(self, "factors", fs)

    def __mul__(self, other: "ToeplitzSymbol") -> "ToeplitzSymbol":
        return ToeplitzSymbol(self.factors + other.factors)

    def conj(self) -> "ToeplitzSymbol":
        return ToeplitzSymbol(tuple((s, -e) for s, e in self.factors))

    @property
    def decomposition(self) -> dict:
        """Linear growth of the argument and what the bounded remainder is made of."""
        kinds = set()
        for s, _ in self.factors:
            if s.has_zeros:
                kinds.add("finite-blaschke" if s.finite_zeros else "infinite-blaschke")
        return {"linear_coefficient": symbol_linear_coefficient(self),
                "remainder": sorted(kinds) or ["none"]}

    def split(self, max_terms: int = 60):
        """``(I, J, truncated)`` with ``phi = I conj(J)`` and explicit zero lists.

        Infinite families are cut at ``|n| <= max_terms`` after identical
        families on both sides have cancelled.
        """
        net = symbol_linear_coefficient(self)
        const = complex(1.0)
        fams = Counter()
        zeros = Counter()
        for s, e in self.factors:
            const *= s.constant if e > 0 else s.constant.conjugate()
            if s.family is not None:
                fams[s.family] += e
            for w in s.zeros:
                zeros[_zkey(w)] += e
        truncated = False
        for fam, e in fams.items():
            if e == 0:
                continue
            spec = InnerFunctionSpec(family=fam)
            zs = spec.zero_array(max_terms if fam.infinite else None)
            truncated |= fam.infinite
            for w in zs:
                zeros[_zkey(w)] += e
        pos = tuple(complex(*k) for k, e in sorted(zeros.items()) for _ in range(max(e, 0)))
        neg = tuple(complex(*k) for k, e in sorted(zeros.items()) for _ in range(max(-e, 0)))
        I = InnerFunctionSpec(mass=max(net, 0.0), zeros=pos, constant=const)
        J = InnerFunctionSpec(mass=max(-net, 0.0), zeros=neg)
        return I, J, truncated

    def to_dict(self):
        return {"factors": [{"spec": s.to_dict(), "exponent": e} for s, e in self.factors]}


def _zkey(w: complex):
    return (round(w.real, 12), round(w.imag, 12))


def symbol(*factors) -> ToeplitzSymbol:
    """``symbol((U, 1), (V, -1))`` is ``U conj(V)``."""
    return ToeplitzSymbol(tuple(factors))


def symbol_eval(sym: ToeplitzSymbol, x: float,
                schedule: TruncationSchedule = DEFAULT_SCHEDULE) -> EvalResult:
    x = float(x)
    value, bound, terms = complex(1.0), 0.0, 0
    for spec, e in sym.factors:
        r = eval_inner(spec, x, schedule)
        v = complex(r.value)
        value *= v if e > 0 else v.conjugate()
        bound += float(r.truncation_error_bound)
        terms += int(r.terms_used)
    return EvalResult(value, bound, terms)


def symbol_linear_coefficient(sym: ToeplitzSymbol) -> float:
    return float(sum(e * s.mass for s, e in sym.factors))


# ---------------------------------------------------------------------------
# Discretization
# ---------------------------------------------------------------------------

def basis_points(n: int, spacing: float = 0.5, height: float = 1.0) -> np.ndarray:
    """``n`` points ``j*spacing + i*height`` centred on the imaginary axis."""
    j = np.arange(n) - (n - 1) / 2
    return j * spacing + 1j * height


@dataclass
class ToeplitzMatrices:
    """``M[j,l] = <T_phi f_j, f_l>``, source Gram ``G[j,l] = <f_j, f_l>`` and defect Gram ``A``.

    ``A`` is the Gram matrix of ``f -> ||P+(phi f)||^2 + ||P- f||^2`` so that the
    generalized singular values of ``(A, G)`` measure ``T_phi`` on the span.
    """

    M: np.ndarray
    G: np.ndarray
    A: np.ndarray
    condition: float
    basis: np.ndarray
    source: str
    truncated: bool


def _is_trivial(spec: InnerFunctionSpec) -> bool:
    return spec.mass == 0 and not spec.has_zeros


def _trial_functions(sym: ToeplitzSymbol, basis, source, schedule, max_terms):
    """Pairs ``(f_j, phi f_j)`` and a label for the trial space."""
    I, J, truncated = sym.split(max_terms)
    if source is not None:
        phi = (from_inner(I, schedule, max_zeros=10**6)
               * from_inner(J, schedule, max_zeros=10**6).conj_line())

        def build(lam):
            f = kernel_function(source, lam, schedule, max_zeros=max_terms)
            return f, phi * f
        label = "source"
    else:
        S = ExpRational.constant(I.constant, I.mass)
        bI = InnerFunctionSpec(zeros=I.zeros)
        conj_bI = from_inner(bI, schedule, max_zeros=10**6).conj_line() if I.zeros else None
        if _is_trivial(J):
            def build(lam):
                k = kernel_function(None, lam)
                f = k if conj_bI is None else k * conj_bI
                return f, S * k
            label = "H2-kernels"
        else:
            jx = from_inner(J, schedule, max_zeros=10**6)
            jsharp = jx.conj_line()

            def build(lam):
                k = kernel_function(J, lam, schedule, max_zeros=10**6)
                f = k if conj_bI is None else k * conj_bI
                # conj(J) k^J = (i/2pi)(conj J - conj J(lam))/(x - conj lam)
                jl = complex(jx(lam)).conjugate()
                image = (jsharp - jl) * ExpRational.simple_pole(np.conj(lam), 1j / (2 * np.pi))
                return f, S * image
            label = "model-kernels-over-B_I"
    with ThreadPoolExecutor(max_workers=max_workers()) as ex:
        pairs = list(ex.map(build, list(basis)))
    return [p[0] for p in pairs], [p[1] for p in pairs], label, truncated


def discretize_toeplitz(sym: ToeplitzSymbol, basis: Sequence[complex],
                        source: Optional[InnerFunctionSpec] = None,
                        schedule: TruncationSchedule = DEFAULT_SCHEDULE,
                        max_terms: int = 60, cond_max: Optional[float] = None,
                        n_gl: int = 24) -> ToeplitzMatrices:
    """Matrices of ``T_phi`` on kernels at ``basis``.

    ``source=None`` selects the trial space adapted to the symbol (see module
    docstring); otherwise plain kernels of ``K_source`` are used.
    """
    basis = np.asarray(basis, dtype=complex)
    if np.any(basis.imag <= 0):
        raise ValueError("basis points must lie in the upper half-plane")
    if np.unique(np.round(basis, 12)).size != basis.size:
        raise ValueError("basis points must be distinct")
    fs, images, label, truncated = _trial_functions(sym, basis, source, schedule, max_terms)
    q = SpectralQuadrature.for_functions(fs + images, n_gl=n_gl)
    Ff, Fi = q.transforms(fs), q.transforms(images)
    # gram_from gives [j, l] = <a_l, b_j>; transpose to [j, l] = <f_j, f_l>
    G = q.gram_from(Ff).T
    G = 0.5 * (G + G.conj().T)
    A = (q.gram_from(Fi, part="plus") + q.gram_from(Ff, part="minus")).T
    A = 0.5 * (A + A.conj().T)
    M = q.gram_from(Fi, Ff, part="plus").T
    ev = np.linalg.eigvalsh(G)
    cond = float(ev[-1] / ev[0]) if ev[0] > 0 else math.inf
    if cond_max is not None and cond > cond_max:
        raise IllConditionedBasis(
            f"Gram condition number {cond:.3e} exceeds {cond_max:.3e}; spread the basis points")
    return ToeplitzMatrices(M, G, A, cond, basis, label, truncated)


def generalized_sigma_min(A: np.ndarray, G: np.ndarray, cut: float = 1e-10):
    """Smallest ``sqrt(lambda)`` with ``A c = lambda G c`` on the numerically non-null part of ``G``.

    Returns ``(sigma, effective_rank)``.
    """
    w, V = np.linalg.eigh(G)
    keep = w > cut * w.max()
    W = V[:, keep] / np.sqrt(w[keep])
    H = W.conj().T @ A @ W
    e = np.linalg.eigvalsh(0.5 * (H + H.conj().T))
    return float(math.sqrt(max(e[0], 0.0))), int(keep.sum())


# ---------------------------------------------------------------------------
# Probe
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProbeConfig:
    sizes: tuple = (8, 16, 32, 64)
    spacing: float = 0.5
    height: float = 1.0
    floor: float = 1e-6
    factor: float = 0.5
    drift: float = 0.2
    max_terms: int = 60
    gram_cut: float = 1e-10

    def __post_init__(self):
        s = list(self.sizes)
        if len(s) < 3:
            raise ValueError("need at least three refinement levels")
        if any(b <= a for a, b in zip(s, s[1:])):
            raise ValueError("basis sizes must be strictly increasing")

    def to_dict(self):
        d = asdict(self)
        d["sizes"] = list(self.sizes)
        return d


@dataclass
class ProbeReport:
    basis_sizes: list
    sigma_min: list
    verdict: str  # LikelyNontrivial | LikelyTrivial | Inconclusive
    thresholds: dict
    effective_ranks: list = field(default_factory=list)
    conditions: list = field(default_factory=list)
    trial_space: str = ""
    truncated: bool = False
    flags: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    disclaimer: str = DISCLAIMER

    @property
    def lower_bound(self) -> float:
        return float(min(self.sigma_min))

    def to_dict(self):
        return {"basis_sizes": list(self.basis_sizes),
                "sigma_min": [float(s) for s in self.sigma_min],
                "sigma_min_lower_bound": self.lower_bound,
                "verdict": self.verdict, "thresholds": self.thresholds,
                "effective_ranks": self.effective_ranks,
                "gram_conditions": [c if math.isfinite(c) else None for c in self.conditions],
                "trial_space": self.trial_space, "truncated": self.truncated,
                "flags": self.flags, "config": self.config, "disclaimer": self.disclaimer}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["basis_size", "sigma_min"])
        for n, s in zip(self.basis_sizes, self.sigma_min):
            w.writerow([n, repr(float(s))])
        return buf.getvalue()


def classify_trend(sigmas: Sequence[float], floor: float, factor: float, drift: float) -> str:
    """Verdict rules.

    Nontrivial: ends below ``floor`` and every step shrinks by ``factor`` (a
    step that is already below ``floor`` counts as shrinking).  Trivial: stays
    above ``floor`` and consecutive relative changes stay within ``drift``.
    """
    s = [float(v) for v in sigmas]
    steps = list(zip(s, s[1:]))
    if s[-1] < floor and all(b <= factor * a or b < floor for a, b in steps):
        return "LikelyNontrivial"
    if min(s) >= floor and all(abs(b - a) <= drift * a for a, b in steps):
        return "LikelyTrivial"
    return "Inconclusive"


def kernel_triviality_probe(sym: ToeplitzSymbol, cfg: ProbeConfig = ProbeConfig(),
                            schedule: TruncationSchedule = DEFAULT_SCHEDULE,
                            source: Optional[InnerFunctionSpec] = None,
                            expected: Optional[str] = None) -> ProbeReport:
    """Track the smallest generalized singular value as the basis grows.

    ``expected`` (e.g. from a density threshold) is compared with the verdict;
    a mismatch is recorded in ``flags`` and raised as a warning.
    """
    sigmas, ranks, conds = [], [], []
    label, truncated = "", False
    for n in cfg.sizes:
        pts = basis_points(n, cfg.spacing, cfg.height)
        mats = discretize_toeplitz(sym, pts, source, schedule, cfg.max_terms)
        s, r = generalized_sigma_min(mats.A, mats.G, cfg.gram_cut)
        sigmas.append(s)
        ranks.append(r)
        conds.append(mats.condition)
        label, truncated = mats.source, mats.truncated
    verdict = classify_trend(sigmas, cfg.floor, cfg.factor, cfg.drift)
    flags = []
    if truncated:
        flags.append(f"infinite zero set cut at |n| <= {cfg.max_terms}")
    if expected is not None and expected != verdict:
        msg = f"DISAGREEMENT: probe says {verdict}, theory predicts {expected}"
        flags.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    thresholds = {"floor": cfg.floor, "factor": cfg.factor, "drift": cfg.drift}
    return ProbeReport(list(cfg.sizes), sigmas, verdict, thresholds, ranks, conds,
                       label, truncated, flags, cfg.to_dict())


# ---------------------------------------------------------------------------
# Constructive interpolation in a model space
# ---------------------------------------------------------------------------

@dataclass
class KernelElement:
    """``f = sum c_l k^Theta_{lam_l}`` with ``||f|| = 1`` vanishing on ``B``'s zeros."""

    coefficients: np.ndarray
    points: np.ndarray
    residuals: list
    norm: float
    f: ExpRational
    g: ExpRational
    hardy_residual: float

    def __call__(self, z):
        return self.f(z)

    def to_dict(self):
        return {"coefficients": [{"re": float(c.real), "im": float(c.imag)} for c in self.coefficients],
                "points": [{"re": float(p.real), "im": float(p.imag)} for p in self.points],
                "residuals": [float(r) for r in self.residuals],
                "norm": self.norm, "hardy_residual": self.hardy_residual}


def _generic_points(n: int, avoid: Sequence[complex]):
    """Deterministic, irregular points staying away from ``avoid``."""
    golden = (math.sqrt(5) - 1) / 2
    pts, k = [], 0
    while len(pts) < n:
        k += 1
        p = complex(((k * golden) % 1.0) * 4 - 2, 0.6 + 0.9 * ((k * golden * golden) % 1.0))
        if all(abs(p - a) > 0.05 for a in avoid) and all(abs(p - q) > 0.05 for q in pts):
            pts.append(p)
    return np.array(pts)


def lemma1_construct(theta: InnerFunctionSpec, zeros: Sequence[complex] = (),
                     multiplicities: Optional[Sequence[int]] = None, tol: float = 1e-8,
                     schedule: TruncationSchedule = DEFAULT_SCHEDULE, max_terms: int = 60,
                     points: Optional[Sequence[complex]] = None) -> KernelElement:
    """A unit ``f`` in ``K_Theta`` with ``f^(s)(w_j) = 0`` for ``0 <= s < m_j``.

    ``N + 1`` kernels give an underdetermined homogeneous system with ``N``
    rows; its null vector is the combination.  ``g = f conj(B)`` then lies in
    ``H^2`` (checked through ``hardy_residual``).
    """
    if theta.is_finite_blaschke:
        raise FiniteBlaschkeTheta("Theta must carry singular mass or infinitely many zeros")
    ws = [complex(w) for w in zeros]
    ms = [1] * len(ws) if multiplicities is None else [int(m) for m in multiplicities]
    if len(ms) != len(ws) or any(m < 1 for m in ms):
        raise ValueError("one positive multiplicity per zero")
    N = sum(ms)
    pts = _generic_points(N + 1, ws) if points is None else np.asarray(points, dtype=complex)
    if pts.size != N + 1:
        raise ValueError(f"need {N + 1} kernel points")
    if any(abs(p - w) < 1e-8 for p in pts for w in ws):
        raise DegenerateSystem("kernel point coincides with an interpolation node")
    ks = [kernel_function(theta, lam, schedule, max_zeros=max_terms) for lam in pts]
    G = np.array([[complex(kl(lj)) for kl in ks] for lj in pts])
    G = 0.5 * (G + G.conj().T)
    if np.linalg.eigvalsh(G)[0] <= 1e-14 * np.abs(G).max():
        raise DegenerateSystem("kernels at the chosen points are linearly dependent")
    derivs = []
    for k in ks:
        row, d = [], k
        for _ in range(max(ms, default=0)):
            row.append(d)
            d = d.derivative()
        derivs.append(row)
    if N == 0:
        c = np.array([1.0 + 0j])
    else:
        C = np.array([[complex(derivs[l][s](w)) for l in range(N + 1)]
                      for w, m in zip(ws, ms) for s in range(m)])
        _, sv, Vh = np.linalg.svd(C)
        if sv.size == N and sv[-1] <= 1e-14 * sv[0]:
            raise DegenerateSystem("constraint rows are dependent; null space is not one-dimensional")
        c = Vh[-1].conj()
    nrm = math.sqrt(max((c.conj() @ G @ c).real, 0.0))
    if nrm == 0:
        raise DegenerateSystem("null combination vanishes")
    c = c / nrm
    f = ExpRational()
    for cl, k in zip(c, ks):
        f = f + k.scale(cl)
    residuals = [abs(sum(c[l] * complex(derivs[l][s](w)) for l in range(N + 1)))
                 for w, m in zip(ws, ms) for s in range(m)]
    if ws:
        bspec = InnerFunctionSpec(zeros=tuple(w for w, m in zip(ws, ms) for _ in range(m)))
        g = f * from_inner(bspec, schedule, max_zeros=10**6).conj_line()
    else:
        g = f
    hr = hardy_residual(g)
    fnorm = norm(f)
    if any(r > tol for r in residuals):
        raise ToleranceNotMet(f"interpolation residuals {residuals} exceed {tol}")
    return KernelElement(c, pts, residuals, fnorm, f, g, hr)


# ---------------------------------------------------------------------------
# Carleson windows and multipliers
# ---------------------------------------------------------------------------

@dataclass
class CarlesonWindow:
    sup: float
    argmax: float
    trend: str  # bounded | unbounded-trend
    tail_exponent: float

    def to_dict(self):
        return asdict(self)


def carleson_window_sup(values, grid, window: float = 1.0, min_per_window: int = 8) -> CarlesonWindow:
    """``sup_x int_x^{x+window} |Phi|^2`` from samples on a uniform grid.

    The trend flag comes from a log-log fit of the window integrals against
    ``|x|`` over the outermost decade of the grid.
    """
    x = np.asarray(grid, dtype=float)
    v = np.abs(np.asarray(values)) ** 2
    if x.size < 2:
        raise GridTooCoarse("need at least two samples")
    h = np.diff(x)
    if not np.allclose(h, h[0], rtol=1e-6, atol=0):
        raise ValueError("grid must be uniform")
    h = float(h[0])
    X = min(-x[0], x[-1])
    if X < 10:
        raise GridTooCoarse(f"grid must cover [-10, 10], covers [{x[0]}, {x[-1]}]")
    steps = int(round(window / h))
    if steps < min_per_window or abs(steps * h - window) > 1e-9 * window:
        raise GridTooCoarse(f"spacing {h} gives {window / h:.3g} samples per window")
    cum = np.r_[0.0, np.cumsum(0.5 * h * (v[1:] + v[:-1]))]
    wins = cum[steps:] - cum[:-steps]
    starts = x[: wins.size]
    k = int(np.argmax(wins))
    mids = np.abs(starts + 0.5 * window)
    outer = mids >= X / 10
    p = float("nan")
    if np.count_nonzero(outer) > 4 and np.all(wins[outer] > 0):
        p = float(np.polyfit(np.log(mids[outer]), np.log(wins[outer]), 1)[0])
    trend = "unbounded-trend" if (math.isfinite(p) and p > 0.5) else "bounded"
    return CarlesonWindow(float(wins[k]), float(starts[k]), trend, p)


def _as_function(phi) -> ExpRational:
    if isinstance(phi, ExpRational):
        return phi
    return ExpRational.constant(complex(phi))


def multiplier_residual(U: InnerFunctionSpec, V: InnerFunctionSpec, phi, test_points,
                        schedule: TruncationSchedule = DEFAULT_SCHEDULE, max_terms: int = 60):
    """Relative distance of ``phi k^U_mu`` from ``K_V = H^2 cap V conj(H^2)``.

    For each ``mu`` with ``w = phi k^U_mu`` the value is
    ``(||P- w|| + ||P+(conj(V) w)||) / ||w||``.
    """
    Phi = _as_function(phi)
    vbar = from_inner(V, schedule, max_zeros=max_terms).conj_line()

    def one(mu):
        w = Phi * kernel_function(U, complex(mu), schedule, max_zeros=max_terms)
        w.check_l2()
        vw = vbar * w
        q = SpectralQuadrature.for_functions([w, vw])
        total = q.gram([w])[0, 0].real
        minus = q.gram([w], part="minus")[0, 0].real
        plus = q.gram([vw], part="plus")[0, 0].real
        if total <= 0:
            return 0.0
        return float((math.sqrt(max(minus, 0)) + math.sqrt(max(plus, 0))) / math.sqrt(total))

    with ThreadPoolExecutor(max_workers=max_workers()) as ex:
        return list(ex.map(one, list(test_points)))
