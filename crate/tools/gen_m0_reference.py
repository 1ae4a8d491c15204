#!/usr/bin/env python3
"""Generate extended-precision reference values for the half-space corrector
kernel m0 and its vertical derivative.

    m0(s, x; lam) = (exp(-sqrt(lam + s^2) x) - exp(-s x)) / (sqrt(lam + s^2) - s)
    dm0 = d/dx m0

Evaluated at 50+ significant digits with mpmath directly from the defining
quotient (mpmath has enough precision that the cancellation at large s is
harmless), then rounded to f64 and emitted as a Rust table. The output is
frozen into crates/core/tests/acceptance.rs; rerun only to regenerate.
"""

import mpmath as mp

mp.mp.dps = 60

THETA = mp.pi / 4
S_VALUES = [mp.mpf(0), mp.mpf(1), mp.mpf(10), mp.mpf(10) ** 3, mp.mpf(10) ** 6]
X_VALUES = [mp.mpf(0), mp.mpf("0.1"), mp.mpf(1), mp.mpf(5)]
ANGLE = (mp.pi - THETA) * mp.mpf("0.9")
LAMBDAS = [
    ("1", mp.mpc(1, 0)),
    ("exp(+i*0.9*(pi-theta))", mp.exp(1j * ANGLE)),
    ("exp(-i*0.9*(pi-theta))", mp.exp(-1j * ANGLE)),
]


def m0_pair(s, x, lam):
    b = mp.sqrt(lam + s * s)
    num = mp.exp(-b * x) - mp.exp(-s * x)
    den = b - s
    m0 = num / den
    dm0 = (-b * mp.exp(-b * x) + s * mp.exp(-s * x)) / den
    return m0, dm0


def f64(v):
    return float(mp.nstr(v, 17, strip_zeros=False))


def fmt(z):
    return f"Complex64::new({float(z.real)!r}, {float(z.imag)!r})"


rows = []
for li, (lname, lam) in enumerate(LAMBDAS):
    for s in S_VALUES:
        for x in X_VALUES:
            m0, dm0 = m0_pair(s, x, lam)
            rows.append((li, float(s), float(x), m0, dm0))

print("// Generated by tools/gen_m0_reference.py (mpmath, 60 digits).")
print("// Columns: lambda index (see LAMBDA_TABLE), s, x_d, m0, dm0.")
print(f"const M0_REFERENCE: [(usize, f64, f64, Complex64, Complex64); {len(rows)}] = [")
for li, s, x, m0, dm0 in rows:
    print(f"    ({li}, {s!r}, {x!r}, {fmt(m0)}, {fmt(dm0)}),")
print("];")
