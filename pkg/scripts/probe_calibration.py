"""Smallest generalized singular values of the probe on symbols with known kernels.

Usage: python3 scripts/probe_calibration.py
"""

import math

from modelkit.inner_core import arith, blaschke, singular
from modelkit.toeplitz import ProbeConfig, kernel_triviality_probe, symbol

B3 = blaschke([1j, 1 + 2j, -0.5 + 0.7j])

CASES = [
    ("conj(S)", symbol((singular(1), -1)), "LikelyNontrivial"),
    ("S", symbol((singular(1), 1)), "LikelyTrivial"),
    ("conj(S) B3", symbol((singular(1), -1), (B3, 1)), "LikelyNontrivial"),
    ("conj(S^2) B3", symbol((singular(2), -1), (B3, 1)), "LikelyNontrivial"),
    ("S^pi conj(B_{n+i})", symbol((singular(math.pi), 1), (arith(), -1)), "LikelyNontrivial"),
    ("S^3pi conj(B_{n+i})", symbol((singular(3 * math.pi), 1), (arith(), -1)), "LikelyTrivial"),
]


def main():
    cfg = ProbeConfig()
    for label, sym, expected in CASES:
        rep = kernel_triviality_probe(sym, cfg)
        sig = " ".join(f"{s:.2e}" for s in rep.sigma_min)
        mark = "ok" if rep.verdict == expected else "MISMATCH"
        print(f"{label:22s} {rep.verdict:17s} [{mark}] sigma_min: {sig}")


if __name__ == "__main__":
    main()
