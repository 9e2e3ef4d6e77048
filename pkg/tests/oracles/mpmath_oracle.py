"""Regenerate the high-precision constants frozen in the solver tests.

Independent route: mpmath's Taylor-series ODE integrator (odefun) at 30
digits, with mpmath.findroot for both the smooth-pasting point and c.  The
value uses the same superposition idea but is integrated separately in
mpmath.  Run with ``python3 tests/oracles/mpmath_oracle.py`` (takes minutes).
"""

import mpmath as mp

mp.mp.dps = 30
MU, SIGMA, DELTA = mp.mpf("0.08"), mp.mpf("0.4"), mp.mpf("0.1")
S2 = SIGMA**2
THETA, RHO = MU / S2, DELTA / S2


def system(c):
    def f(s, z):
        g, gp, wp, dwp, wh, dwh = z
        gpp = 2 * gp**2 / (c + g) - 2 * THETA * gp / s + 2 * RHO * (1 + g / c) * (g / s**2 - gp / s)
        k = 2 / (S2 * s**2)
        drift = (MU + DELTA * (1 + g / c)) * s
        q = S2 * gp**2 * s**2 / (2 * DELTA * (c + g) ** 2)
        return [gp, gpp, dwp, k * (DELTA * wp - drift * dwp - q), dwh, k * (DELTA * wh - drift * dwh)]

    base = MU**2 / (2 * DELTA**2 * S2)
    return mp.odefun(f, 1, [1, 1, base, 0, 1, 0])


def sbar_of(c, guess):
    F = system(c)
    sb = mp.findroot(lambda s: F(s)[0] - s * F(s)[1], guess)
    return sb, F


def solve(lam, c_guess, s_guess):
    state = {"s": s_guess}

    def gap(c):
        sb, F = sbar_of(c, state["s"])
        state["s"] = sb
        return lam * sb - (sb - F(sb)[0])

    c = mp.findroot(gap, (c_guess, c_guess * (1 + mp.mpf("1e-4"))), solver="secant", tol=mp.mpf(10) ** -26)
    sb, F = sbar_of(c, state["s"])
    return c, sb, F


if __name__ == "__main__":
    lam = mp.mpf("0.01")
    c, sb, F = solve(lam, mp.mpf("1.4798046649"), mp.mpf("1.8877877"))
    print("c     =", mp.nstr(c, 22))
    print("s_bar =", mp.nstr(sb, 22))
    # value on the Merton line with unit wealth at the ask
    z = F(sb)
    xi = -z[3] / z[5]
    y0 = c * THETA / (1 - THETA)
    z0 = F(y0)
    w = z0[2] + xi * z0[4] + (mp.log(DELTA) - 1) / DELTA
    wealth = (1 - THETA) + THETA * z0[0] / y0
    print("y0    =", mp.nstr(y0, 22))
    print("value =", mp.nstr(mp.log(wealth) / DELTA + w, 22))
    print("w(1)  =", mp.nstr(F(1)[2] + xi * F(1)[4] + (mp.log(DELTA) - 1) / DELTA, 22))
