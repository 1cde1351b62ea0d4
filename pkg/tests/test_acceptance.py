"""End-to-end acceptance checks; each test prints one PASS/FAIL line."""

import math
import time

import numpy as np
import pytest
from scipy import integrate

from modelkit.decider import MifPair, decide_multipliers
from modelkit.density import (
    DiscreteSequence,
    counting_function,
    estimate_density_bracket,
    generate,
    one_sided_integral,
    regularity_integral,
    star_transform,
)
from modelkit.errors import FiniteBlaschkeTheta
from modelkit.hilbert import hilbert_transform, linear_combination, named
from modelkit.inner_core import (
    InnerFunctionSpec,
    arg_on_line,
    arith,
    blaschke,
    derivative_modulus_on_line,
    eval_inner,
    singular,
)
from modelkit.spectral import kernel_function
from modelkit.toeplitz import (
    ProbeConfig,
    basis_points,
    carleson_window_sup,
    discretize_toeplitz,
    kernel_triviality_probe,
    lemma1_construct,
    multiplier_residual,
    symbol,
)


@pytest.fixture
def report(capsys):
    def _report(label, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        assert ok, detail
    return _report


def _majorant(n):
    return 1.5 * (1 + 1 / (n + 1) - 1 / n) / (n * n + 1)


def test_criterion_1_density_of_n_plus_i(report):
    t0 = time.perf_counter()
    seq = generate("n_plus_i", 10_000)
    br = estimate_density_bracket(seq)
    star, _ = star_transform(seq)
    rep = regularity_integral(star, 1.0)
    failures = []
    # one-sided integral over [2, W] against partial sums of the majorant
    for W, _ in rep.window_integrals:
        if W <= 2:
            continue
        lhs = one_sided_integral(star, 1.0, 2.0, W)
        n_w = int(np.count_nonzero(np.arange(1, 10_001) + 1 / np.arange(1, 10_001) < W))
        rhs = math.fsum(_majorant(n) for n in range(1, n_w + 1))
        if lhs > rhs + 1e-9:
            failures.append((W, lhs, rhs))
    # closed-form steps against adaptive quadrature on [2, 40]
    f = lambda x: abs(counting_function(star, x) - x) / (1 + x * x)
    pts = star.real_points
    brk = np.r_[2.0, pts[(pts > 2) & (pts < 40)], 40.0]
    quad = math.fsum(integrate.quad(f, u, v, epsabs=1e-15, epsrel=1e-13)[0] for u, v in zip(brk[:-1], brk[1:]))
    closed = one_sided_integral(star, 1.0, 2.0, 40.0)
    off = [regularity_integral(star, a).converged for a in (0.9, 1.1)]
    dt = time.perf_counter() - t0
    ok = ((br.lower, br.upper, br.exact, br.method) == (1.0, 1.0, True, "SelfRegularity")
          and not failures and abs(quad - closed) < 1e-9 and not any(off) and dt < 10)
    report("criterion 1 (density of {n+i})", ok,
           f"bracket=({br.lower}, {br.upper}) via {br.method}; majorant violations={failures}; "
           f"|closed-quad|={abs(quad - closed):.2e}; a=0.9/1.1 converged={off}; {dt:.2f}s")


def test_criterion_2_decision_table(report):
    t0 = time.perf_counter()
    wrong = []
    grid = [0, 0.5, 1, 2, math.pi]
    for a in grid:
        for b in grid:
            v = decide_multipliers(MifPair(singular(a), singular(b))).verdict
            if v != ("Nontrivial" if b >= a else "Trivial"):
                wrong.append(("ex2", a, b, v))
    pairs = [(blaschke([1j], 1), blaschke([2 + 1j], 2)),
             (blaschke([1j, 3j], 2), singular(0.5)),
             (blaschke([1j]), blaschke([1j, 1 + 1j, -1 + 2j], 1))]
    for U, V in pairs:
        v = decide_multipliers(MifPair(U, V)).verdict
        if v != ("Nontrivial" if V.mass > U.mass else "Trivial"):
            wrong.append(("ex3", U.mass, V.mass, v))
        if v == "Nontrivial" and decide_multipliers(MifPair(V, U)).verdict != "Trivial":
            wrong.append(("ex3-symmetry", U.mass, V.mass))
    L = arith()
    a = 1.0
    for b, want in ((a + 2 * math.pi - 0.01, "Trivial"), (a + 2 * math.pi, "UndecidedBoundary"),
                    (a + 2 * math.pi + 0.01, "Nontrivial")):
        v = decide_multipliers(MifPair(arith(mass=a), singular(b))).verdict
        if v != want:
            wrong.append(("ex4", a, b, v))
    b = 0.5
    for a5, want in ((b + 2 * math.pi - 0.01, "Nontrivial"), (b + 2 * math.pi, "UndecidedBoundary"),
                     (b + 2 * math.pi + 0.01, "Trivial")):
        v = decide_multipliers(MifPair(singular(a5), arith(mass=b))).verdict
        if v != want:
            wrong.append(("ex5", a5, b, v))
    for ac, want in ((math.pi, "Nontrivial"), (7.0, "Trivial")):
        c = decide_multipliers(MifPair(singular(ac), L))
        if (c.verdict, c.rule) != (want, "Corollary"):
            wrong.append(("corollary", ac, c.verdict, c.rule))
    dt = time.perf_counter() - t0
    report("criterion 2 (decision table)", not wrong and dt < 5, f"mismatches={wrong}; {dt:.2f}s")


def _brute_pv_poisson(x, eps=1e-6, W=1e6):
    """Direct excised integral: far part in theta = arctan t, near part in log(x - t)."""
    h = lambda t: 1 / (1 + t * t)
    g = lambda th: (1 + x * math.tan(th)) / (x - math.tan(th)) * h(math.tan(th))
    tw = math.atan(W)
    far = integrate.quad(g, -tw, math.atan(x - 1), limit=500, epsabs=1e-13)[0]
    far += integrate.quad(g, math.atan(x + 1), tw, limit=500, epsabs=1e-13)[0]
    k = lambda t: (1 / (x - t) + t / (1 + t * t)) * h(t)
    near = 0.0
    for sgn in (-1, 1):  # t = x + sgn * s, s = e^u in [eps, 1]
        near += integrate.quad(lambda u: k(x + sgn * math.exp(u)) * math.exp(u),
                               math.log(eps), 0.0, limit=500, epsabs=1e-13)[0]
    return (far + near) / math.pi


def test_criterion_3_hilbert_oracle(report):
    t0 = time.perf_counter()
    xs = [-10, -3, -1, 0, 1, 3, 10]
    brute = max(abs(_brute_pv_poisson(x) - x / (1 + x * x)) for x in xs)
    h = named("poisson")
    err = max(abs(hilbert_transform(h, x)[0] - x / (1 + x * x)) for x in xs)
    rng = np.random.default_rng(20)
    g = named("gauss")
    lin = 0.0
    for _ in range(20):
        a, b = rng.uniform(-3, 3, 2)
        x = float(rng.uniform(-5, 5))
        lhs = hilbert_transform(linear_combination(a, h, b, g), x)[0]
        lin = max(lin, abs(lhs - (a * hilbert_transform(h, x)[0] + b * hilbert_transform(g, x)[0])))
    dt = time.perf_counter() - t0
    ok = brute < 1e-4 and err < 1e-3 and lin < 1e-8 and dt < 30
    report("criterion 3 (Hilbert transform of 1/(1+t^2))", ok,
           f"brute-force pair check {brute:.2e}; max error {err:.2e}; linearity defect {lin:.2e}; {dt:.2f}s")


def test_criterion_4_lemma1(report):
    t0 = time.perf_counter()
    S = singular(1)
    el = lemma1_construct(S, [1j])
    pure = lemma1_construct(S, [])
    k = kernel_function(S, pure.points[0])
    z = 0.25 + 0.75j
    is_kernel = len(pure.coefficients) == 1 and abs(complex(pure.f(z)) - pure.coefficients[0] * complex(k(z))) < 1e-14
    try:
        lemma1_construct(blaschke([1j, 2 + 1j]), [1j])
        rejected = False
    except FiniteBlaschkeTheta:
        rejected = True
    dt = time.perf_counter() - t0
    fi = abs(complex(el(1j)))
    ok = abs(el.norm - 1) < 1e-12 and fi < 1e-8 and el.hardy_residual < 1e-6 and is_kernel and rejected and dt < 10
    report("criterion 4 (constructive interpolation)", ok,
           f"||f||={el.norm:.15f}; |f(i)|={fi:.2e}; Hardy residual of f/b_i={el.hardy_residual:.2e}; "
           f"pure kernel={is_kernel}; finite Theta rejected={rejected}; {dt:.2f}s")


def test_criterion_5_probe_calibration(report):
    t0 = time.perf_counter()
    cfg = ProbeConfig(sizes=(8, 16, 32, 64))
    nontriv = kernel_triviality_probe(symbol((singular(1), -1)), cfg)
    triv = kernel_triviality_probe(symbol((singular(1), 1)), cfg)
    B = blaschke([1j, 1 + 2j, -0.5 + 0.7j])
    small = kernel_triviality_probe(symbol((singular(1), -1), (B, 1)), cfg)
    large = kernel_triviality_probe(symbol((singular(2), -1), (B, 1)), cfg)
    mono = not (small.verdict == "LikelyNontrivial" and large.verdict == "LikelyTrivial")
    dt = time.perf_counter() - t0
    ok = (nontriv.verdict == "LikelyNontrivial" and nontriv.sigma_min[-1] < 1e-6
          and triv.verdict == "LikelyTrivial" and mono and dt < 60)
    report("criterion 5 (probe calibration)", ok,
           f"conj(S): {nontriv.verdict}, sigma_min@64={nontriv.sigma_min[-1]:.2e}; "
           f"S: {triv.verdict}, lower bound={triv.lower_bound:.6f}; "
           f"monotonicity ({small.verdict}, {large.verdict}) ok={mono}; {dt:.2f}s")


def test_criterion_6_multiplier_residuals(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    pts = rng.uniform(-3, 3, 10) + 1j * rng.uniform(0.5, 2.0, 10)
    phi = kernel_function(singular(1), 1j)
    good = multiplier_residual(singular(1), singular(2), phi, pts)
    bad = multiplier_residual(singular(2), singular(1), phi, pts)
    sups = []
    for X in (10, 50, 100):
        x = np.linspace(-X, X, 2 * X * 64 + 1)
        sups.append(carleson_window_sup(phi(x), x).sup)
    drift = (max(sups) - min(sups)) / max(sups)
    dt = time.perf_counter() - t0
    ok = max(good) < 1e-4 and min(bad) > 1e-2 and math.isfinite(sups[-1]) and drift < 0.05 and dt < 60
    report("criterion 6 (multiplier residuals)", ok,
           f"max residual S->S^2={max(good):.2e}; min residual S^2->S={min(bad):.3f}; "
           f"Carleson sups={[round(s, 8) for s in sups]}, drift={drift:.1e}; {dt:.2f}s")


def test_criterion_7_core_invariants(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst_line, worst_inside = 0.0, 0.0
    for _ in range(1000):
        k = int(rng.integers(0, 5))
        zeros = tuple(rng.uniform(-10, 10, k) + 1j * rng.uniform(0.05, 5, k))
        spec = InnerFunctionSpec(mass=float(rng.uniform(0, 5)), zeros=zeros,
                                 constant=complex(np.exp(1j * rng.uniform(0, 2 * np.pi))))
        x = float(rng.uniform(-50, 50))
        r = eval_inner(spec, x)
        worst_line = max(worst_line, abs(abs(r.value) - 1) - r.truncation_error_bound)
        worst_inside = max(worst_inside, abs(eval_inner(spec, complex(x, rng.uniform(0.01, 5))).value))
    unimodular = worst_line <= 1e-12 and worst_inside <= 1 + 1e-12
    # finite differences of the continuous argument against |U'|
    rel = 0.0
    for spec in (singular(1.5), blaschke([1j, 2 + 0.5j], 0.3), arith()):
        x = np.linspace(-5, 5, 10001)
        th = arg_on_line(spec, x)
        fd = np.gradient(th, x, edge_order=2)
        exact = derivative_modulus_on_line(spec, x)
        rel = max(rel, float(np.max(np.abs(fd - exact) / exact)))
    # Gram positivity
    min_eig = min(float(np.linalg.eigvalsh(discretize_toeplitz(sym, basis_points(12)).G)[0])
                  for sym in (symbol((singular(1), -1)), symbol((singular(1), 1)),
                              symbol((blaschke([1j, 2j]), -1), (singular(0.5), 1))))
    s = DiscreteSequence(np.array([-2, -1, 0, 0, 1, 3], dtype=complex))
    counting = [counting_function(s, v) for v in (0.0, 1.0, 3.0, -1.0, -5.0)] == [2, 3, 4, -3, -4]
    star, dropped = star_transform(generate("n_plus_i", 100))
    n = np.r_[np.arange(-100, 0), np.arange(1, 101)].astype(float)
    star_ok = dropped == 1 and np.array_equal(np.sort(star.real_points), np.sort((n * n + 1) / n))
    dt = time.perf_counter() - t0
    ok = unimodular and rel < 1e-3 and min_eig > -1e-14 and counting and star_ok and dt < 60
    report("criterion 7 (core invariants)", ok,
           f"unimodularity excess={worst_line:.1e}, max |U| inside={worst_inside:.6f}; "
           f"arg' rel err={rel:.1e}; min Gram eig={min_eig:.1e}; counting={counting}; star={star_ok}; {dt:.2f}s")
