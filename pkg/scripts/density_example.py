"""Density bracket and regularity windows for the built-in generators.

Usage: python3 scripts/density_example.py [N]
"""

import sys

from modelkit.density import estimate_density_bracket, generate, regularity_integral, star_transform


def main(n=10_000):
    for name in ("n_plus_i", "integers", "signed_squares"):
        seq = generate(name, n)
        real = seq if seq.is_real else star_transform(seq)[0]
        br = estimate_density_bracket(seq)
        print(f"{name:15s} bracket=({br.lower:.4f}, {br.upper:.4f}) exact={br.exact} method={br.method}")
        for a in (0.9, 1.0, 1.1):
            rep = regularity_integral(real, a)
            last = rep.window_integrals[-1]
            print(f"    a={a:<4} converged={rep.converged!s:5s} W={last[0]:.0f} integral={last[1]:.6f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 10_000)
