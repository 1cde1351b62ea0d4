"""Decision table for nonzero multipliers between model spaces of structured inner functions.

Pairs ``U = C1 S^a B1`` and ``V = C2 S^b B2`` are sorted into shapes; each
shape has one closed-form criterion in the masses ``a, b`` and, when an
infinite zero family is present, its Beurling-Malliavin density ``D``.
Anything else is reported as ``OutOfScope``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .density import DensityBracket, DiscreteSequence, estimate_density_bracket
from .errors import InexactBracket
from .inner_core import DEFAULT_SCHEDULE, InnerFunctionSpec, TruncationSchedule, derivative_modulus_on_line
from .toeplitz import ProbeConfig, kernel_triviality_probe, symbol

TAU = 1e-12

SHAPES = ("PureSingular×PureSingular", "FiniteBlaschkeBoth", "InfiniteBlaschkeVsSingular",
          "SingularVsInfiniteBlaschke", "Other")

# Short statements of the published criteria, one per rule.
CITATIONS = {
    "Example2": "U = S^a, V = S^b: a nonzero multiplier exists iff b >= a; for b = a the constants work.",
    "Example3": "U = S^a B1, V = S^b B2 with finite Blaschke B1, B2 and a != b: a nonzero multiplier exists iff b > a.",
    "Example4": "U = S^a B_L with |U'| bounded above and below, V = S^b, a >= 0, b > 0: a nonzero multiplier "
                "exists iff b - a > 2 pi D, where D is the upper density of L and b - a != 2 pi D.",
    "Example5": "U = S^a, V = S^b B_L, a > 0: a nonzero multiplier exists iff a - b < 2 pi D, where D is the "
                "lower density of L and a - b != 2 pi D.",
    "Corollary": "U = S^a, V = the Blaschke product over n + i (n in Z): a nonzero multiplier exists iff a < 2 pi.",
    "Equivalence": "A nonzero multiplier from K_U to K_V exists iff the Toeplitz operator with symbol "
                   "U conj(V b_i) has a kernel of dimension at least two iff T with symbol U conj(V) "
                   "has a nontrivial kernel, under the growth hypothesis on m = arg U - arg(V b_i).",
}


@dataclass(frozen=True)
class MifPair:
    U: InnerFunctionSpec
    V: InnerFunctionSpec

    @property
    def shape(self) -> str:
        return classify(self.U, self.V)

    def to_dict(self):
        return {"U": self.U.to_dict(), "V": self.V.to_dict(), "shape": self.shape}


def _kind(spec: InnerFunctionSpec) -> str:
    if not spec.has_zeros:
        return "singular"
    return "finite" if spec.finite_zeros else "infinite"


def classify(U: InnerFunctionSpec, V: InnerFunctionSpec) -> str:
    ku, kv = _kind(U), _kind(V)
    if ku == kv == "singular":
        return SHAPES[0]
    if ku != "infinite" and kv != "infinite":
        return SHAPES[1]
    if ku == "infinite" and kv == "singular":
        return SHAPES[2]
    if ku == "singular" and kv == "infinite":
        return SHAPES[3]
    return SHAPES[4]


# ---------------------------------------------------------------------------
# Hypothesis checks
# ---------------------------------------------------------------------------

@dataclass
class DerivativeCheck:
    passed: bool
    observed: tuple
    band: tuple
    certificate: Optional[dict] = None
    caveat: Optional[str] = None

    def to_dict(self):
        d = asdict(self)
        d["observed"] = list(self.observed)
        d["band"] = list(self.band)
        return d


def _derivative_certificate(U: InnerFunctionSpec) -> Optional[dict]:
    """Bounds of ``|U'|`` on all of R when they follow from the shape."""
    a = U.mass
    if U.family is not None and U.family.bilateral:
        al, be = U.family.alpha, U.family.beta
        s = 2 * math.pi * be / al
        # sum_n 2 be/((x - al n)^2 + be^2) = (2 pi/al) sinh s / (cosh s - cos(2 pi x/al))
        return {"kind": "periodic-closed-form", "inf": a + 2 * math.pi / al * math.tanh(s / 2),
                "sup": a + 2 * math.pi / al / math.tanh(s / 2), "exact": True}
    if U.finite_zeros:
        zs = U.zero_array()
        sup = a + float(np.sum(2.0 / zs.imag)) if zs.size else a
        return {"kind": "finite-zeros", "inf": a, "sup": sup, "exact": zs.size == 0}
    return None


def check_derivative_hypothesis(U: InnerFunctionSpec, grid=None, band=(1e-3, 1e3),
                                schedule: TruncationSchedule = DEFAULT_SCHEDULE) -> DerivativeCheck:
    """Test ``c1 <= |U'(x)| <= c2`` on a grid and, when available, on all of R."""
    if grid is None:
        grid = np.linspace(-50.0, 50.0, 2001)
    grid = np.asarray(grid, dtype=float)
    if min(-grid.min(), grid.max()) < 50:
        raise ValueError("grid must cover [-50, 50]")
    vals = np.asarray(derivative_modulus_on_line(U, grid, schedule))
    lo, hi = float(vals.min()), float(vals.max())
    c1, c2 = band
    grid_ok = c1 <= lo and hi <= c2
    cert = _derivative_certificate(U)
    caveat = None
    if cert is None:
        caveat = "grid evidence only"
        passed = grid_ok
    else:
        passed = grid_ok and cert["inf"] >= c1 and (cert["sup"] <= c2 or not cert["exact"])
        if not cert["exact"] and cert["sup"] > c2:
            caveat = "upper bound from the grid only"
        if cert["inf"] < c1:
            passed = False
    return DerivativeCheck(bool(passed), (lo, hi), tuple(band), cert, caveat)


@dataclass
class MClassification:
    linear_coefficient: float
    bounded_remainder: bool
    verdict: str  # NotInTildeL1 | Unknown

    def to_dict(self):
        return asdict(self)


def classify_m(pair: MifPair, tau: float = TAU) -> MClassification:
    """Growth of ``m = arg U - arg(V b_i)``: linear part plus bounded remainder."""
    c = pair.U.mass - pair.V.mass
    bounded = pair.U.finite_zeros and pair.V.finite_zeros
    verdict = "NotInTildeL1" if (abs(c) > tau and bounded) else "Unknown"
    return MClassification(float(c), bool(bounded), verdict)


# ---------------------------------------------------------------------------
# Decision
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DeciderConfig:
    tau: float = TAU
    band: tuple = (1e-3, 1e3)
    grid_half_width: float = 50.0
    grid_points: int = 2001

    def to_dict(self):
        d = asdict(self)
        d["band"] = list(self.band)
        return d


@dataclass
class DecisionCertificate:
    verdict: str  # Nontrivial | Trivial | UndecidedBoundary | OutOfScope
    rule: str  # Example2..5 | Corollary | None
    shape: str
    inputs: dict
    hypothesis_checks: dict
    narrative: str
    assumed: list = field(default_factory=list)
    citations: list = field(default_factory=list)

    def __post_init__(self):
        if self.verdict != "OutOfScope" and self.rule == "None":
            raise ValueError("a definite verdict needs a rule")

    def to_dict(self):
        checks = {}
        for k, v in self.hypothesis_checks.items():
            if isinstance(v, list):
                checks[k] = [x.to_dict() if hasattr(x, "to_dict") else x for x in v]
            else:
                checks[k] = v.to_dict() if hasattr(v, "to_dict") else v
        return {"verdict": self.verdict, "rule": self.rule, "shape": self.shape,
                "inputs": self.inputs, "hypothesis_checks": checks,
                "narrative": self.narrative, "assumed": self.assumed,
                "citations": self.citations}


def _compare(x: float, tau: float) -> int:
    return 0 if abs(x) <= tau else (1 if x > 0 else -1)


def _is_unit_arith(spec: InnerFunctionSpec) -> bool:
    f = spec.family
    return (f is not None and f.bilateral and f.alpha == 1.0 and f.beta == 1.0)


def _density(spec: InnerFunctionSpec) -> DensityBracket:
    return estimate_density_bracket(DiscreteSequence.from_family(spec.family))


def decide_multipliers(pair: MifPair, cfg: DeciderConfig = DeciderConfig(),
                       schedule: TruncationSchedule = DEFAULT_SCHEDULE) -> DecisionCertificate:
    """Apply the single matching row of the case table."""
    U, V = pair.U, pair.V
    a, b = U.mass, V.mass
    shape = pair.shape
    tau = cfg.tau
    grid = np.linspace(-cfg.grid_half_width, cfg.grid_half_width, cfg.grid_points)
    checks = {"m_classification": classify_m(pair, tau), "densities": []}
    inputs = {"a": a, "b": b}

    def cert(verdict, rule, narrative, assumed=()):
        cites = [CITATIONS[rule]] if rule in CITATIONS else []
        return DecisionCertificate(verdict, rule, shape, inputs, checks, narrative,
                                   list(assumed), cites)

    if shape == SHAPES[0]:
        checks["derivative_band"] = check_derivative_hypothesis(U, grid, cfg.band, schedule)
        ok = b >= a - tau
        return cert("Nontrivial" if ok else "Trivial", "Example2",
                    f"pure singular pair: b - a = {b - a!r} {'>=' if ok else '<'} 0")

    if shape == SHAPES[1]:
        checks["derivative_band"] = check_derivative_hypothesis(U, grid, cfg.band, schedule)
        s = _compare(b - a, tau)
        if s == 0:
            return cert("OutOfScope", "None",
                        "finite Blaschke parts with equal masses are not covered by the table")
        return cert("Nontrivial" if s > 0 else "Trivial", "Example3",
                    f"finite Blaschke parts: b - a = {b - a!r} {'>' if s > 0 else '<'} 0")

    if shape == SHAPES[2]:
        if not b > 0:
            return cert("OutOfScope", "None", "the criterion needs b > 0")
        try:
            br = _density(U)
            D = br.value
        except InexactBracket as exc:
            checks["densities"] = [br]
            return cert("OutOfScope", "None", f"InexactDensity: {exc}")
        checks["densities"] = [br]
        dchk = check_derivative_hypothesis(U, grid, cfg.band, schedule)
        checks["derivative_band"] = dchk
        inputs.update({"D": D, "two_pi_D": 2 * math.pi * D})
        if not dchk.passed:
            return cert("OutOfScope", "None", f"|U'| outside the band {cfg.band}: observed {dchk.observed}")
        s = _compare((b - a) - 2 * math.pi * D, tau)
        if s == 0:
            return cert("UndecidedBoundary", "Example4",
                        f"b - a = {b - a!r} equals 2 pi D = {2 * math.pi * D!r} within {tau}")
        return cert("Nontrivial" if s > 0 else "Trivial", "Example4",
                    f"b - a = {b - a!r} {'>' if s > 0 else '<'} 2 pi D = {2 * math.pi * D!r}",
                    assumed=["growth hypothesis on m discharged by the published argument"])

    if shape == SHAPES[3]:
        if not a > 0:
            return cert("OutOfScope", "None", "the criterion needs a > 0")
        try:
            br = _density(V)
            D = br.value
        except InexactBracket as exc:
            checks["densities"] = [br]
            return cert("OutOfScope", "None", f"InexactDensity: {exc}")
        checks["densities"] = [br]
        checks["derivative_band"] = check_derivative_hypothesis(U, grid, cfg.band, schedule)
        inputs.update({"D": D, "two_pi_D": 2 * math.pi * D})
        rule = "Corollary" if (b == 0 and _is_unit_arith(V)) else "Example5"
        s = _compare(2 * math.pi * D - (a - b), tau)
        if s == 0:
            return cert("UndecidedBoundary", rule,
                        f"a - b = {a - b!r} equals 2 pi D = {2 * math.pi * D!r} within {tau}")
        return cert("Nontrivial" if s > 0 else "Trivial", rule,
                    f"a - b = {a - b!r} {'<' if s > 0 else '>'} 2 pi D = {2 * math.pi * D!r}",
                    assumed=["growth hypothesis on m discharged by the published argument"])

    return cert("OutOfScope", "None",
                "pair shape not covered; kernel_triviality_probe on U conj(V) gives numerical evidence")


@dataclass
class CrossValidation:
    certificate_verdict: str
    probe_verdict: str
    status: str  # agreement | disagreement | inconclusive | advisory-only
    probe: dict

    def to_dict(self):
        return asdict(self)


def cross_validate(pair: MifPair, cert: DecisionCertificate, cfg: ProbeConfig = ProbeConfig(),
                   schedule: TruncationSchedule = DEFAULT_SCHEDULE) -> CrossValidation:
    """Probe ``ker T_{U conj V}`` and compare with the certificate (never overrides it)."""
    report = kernel_triviality_probe(symbol((pair.U, 1), (pair.V, -1)), cfg, schedule)
    expected = {"Nontrivial": "LikelyNontrivial", "Trivial": "LikelyTrivial"}.get(cert.verdict)
    if expected is None:
        status = "advisory-only"
    elif report.verdict == "Inconclusive":
        status = "inconclusive"
    else:
        status = "agreement" if report.verdict == expected else "disagreement"
    return CrossValidation(cert.verdict, report.verdict, status, report.to_dict())
