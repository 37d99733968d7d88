"""Generate Taylor coefficients of the Riemann-Siegel remainder terms C0..C4.

Each C_k(p) is expanded in powers of x = p - 1/2, where p is the fractional
part of sqrt(t / 2pi). Output is a Rust source fragment.

    python3 tools/rs_coefficients.py > crates/core/src/zeta/rs_coeffs.rs
"""
from mpmath import mp, mpf, pi, cos, sin, factorial

mp.dps = 160
DEG = 90


def series_cos_sin(scale, deg):
    """cos(scale*w), sin(scale*w) as power series in w."""
    c = [mpf(0)] * (deg + 1)
    s = [mpf(0)] * (deg + 1)
    for k in range(deg + 1):
        term = scale ** k / factorial(k)
        r = k % 4
        if r == 0:
            c[k] = term
        elif r == 1:
            s[k] = term
        elif r == 2:
            c[k] = -term
        else:
            s[k] = -term
    return c, s


def psi_series(deg):
    # numerator: cos(2 pi (x^2 - 5/16)) = cos(a)cos(2 pi w) + sin(a) sin(2 pi w), a = -5pi/8, w = x^2
    a = -5 * pi / 8
    cw, sw = series_cos_sin(2 * pi, deg)
    num = [mpf(0)] * (deg + 1)
    for k in range(deg // 2 + 1):
        num[2 * k] = cos(a) * cw[k] - sin(a) * sw[k]
    # denominator: cos(2 pi (x + 1/2)) = -cos(2 pi x)
    cx, _ = series_cos_sin(2 * pi, deg)
    den = [-v for v in cx]
    q = [mpf(0)] * (deg + 1)
    for n in range(deg + 1):
        acc = num[n]
        for k in range(1, n + 1):
            acc -= den[k] * q[n - k]
        q[n] = acc / den[0]
    return q


def deriv(series, order):
    out = list(series)
    for _ in range(order):
        out = [out[k] * k for k in range(1, len(out))] + [mpf(0)]
    return out


def combo(terms, deg):
    out = [mpf(0)] * (deg + 1)
    for coef, order in terms:
        d = deriv(PSI, order)
        for k in range(deg + 1):
            out[k] += coef * d[k]
    return out


PSI = psi_series(DEG)
p2 = pi ** 2
C = [
    combo([(mpf(1), 0)], DEG),
    combo([(-1 / (96 * p2), 3)], DEG),
    combo([(1 / (64 * p2), 2), (1 / (18432 * p2 ** 2), 6)], DEG),
    combo([(-1 / (64 * p2), 1), (-1 / (3840 * p2 ** 2), 5), (-1 / (5308416 * p2 ** 3), 9)], DEG),
    combo([(1 / (128 * p2), 0), (mpf(19) / (24576 * p2 ** 2), 4),
           (mpf(11) / (5898240 * p2 ** 3), 8), (1 / (2038431744 * p2 ** 4), 12)], DEG),
]

print("// Generated by tools/rs_coefficients.py; do not edit by hand.")
print("// Taylor coefficients of C_k(p) in powers of (p - 1/2).")
print()
for i, ck in enumerate(C):
    # keep terms until they can no longer matter for |x| <= 1/2
    last = 0
    for k, v in enumerate(ck):
        if abs(v) * mpf(2) ** (-k) > mpf(10) ** -20:
            last = k
    vals = ck[: last + 1]
    print(f"pub(crate) const C{i}: [f64; {len(vals)}] = [")
    for v in vals:
        print(f"    {mp.nstr(v, 20, min_fixed=0, max_fixed=0)},")
    print("];")
    print()
