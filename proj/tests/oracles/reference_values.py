"""Extended-precision reference values frozen into the C++ unit tests.

Run with `python3 reference_values.py`; requires mpmath. Every function here
works from definitions (closed forms, hypergeometric series, quadrature), never
from the library under test.
"""
from mpmath import mp, mpf, sqrt, pi, besselj, bessely, besseli, e1, exp, quad, sin, cos

mp.dps = 40


def sph_j(n, x):
    return sqrt(pi / (2 * x)) * besselj(n + mpf(1) / 2, x)


def sph_y(n, x):
    return sqrt(pi / (2 * x)) * bessely(n + mpf(1) / 2, x)


def scaled_i(n, x):
    return exp(-x) * besseli(n + mpf(1) / 2, x)


def lam_quadrature(kind, n, sigma, N):
    """4*pi*int r^2 n(r) j_n(r)^2 dr from the density definition."""
    s = mpf(sigma)
    if kind == "uniform":
        rho = lambda r: 3 * N / (4 * pi * s**3)
        top = s
    elif kind == "parabolic":
        rho = lambda r: 15 * N / (8 * pi * s**3) * (1 - r**2 / s**2)
        top = s
    else:
        rho = lambda r: N / ((2 * pi) ** 1.5 * s**3) * exp(-r**2 / (2 * s**2))
        top = 14 * s
    pts = [0] + [top * k / 40 for k in range(1, 41)]
    return 4 * pi * quad(lambda r: r**2 * rho(r) * sph_j(n, r) ** 2, pts)


def show(label, value):
    print(f"{label} = {mp.nstr(value, 17)}")


if __name__ == "__main__":
    show("j0(20)", sph_j(0, 20))
    show("y0(20)", sph_y(0, 20))
    show("y1(1)", sph_y(1, 1))
    show("e^-1 I_3/2(1)", scaled_i(1, 1))
    show("e^-400 I_1/2(400)", scaled_i(0, 400))
    show("E1(1)", e1(1))
    show("E1(10)", e1(10))
    for x in (mpf("0.1"), mpf(1), mpf(20), mpf(100)):
        for n in (0, 1, 5, 10, 30, 60, 100):
            show(f"j_{n}({x})", sph_j(n, x))
    for x in (mpf("0.1"), mpf(1), mpf(20), mpf(100)):
        for n in (0, 1, 5, 10, 30):
            show(f"y_{n}({x})", sph_y(n, x))
    for x in (mpf("0.25"), mpf(1), mpf(25), mpf(400), mpf(10000)):
        for n in (0, 1, 5, 20, 60, 150):
            show(f"eI_{n}({x})", scaled_i(n, x))
    for kind in ("uniform", "parabolic", "gaussian"):
        for n in (0, 5, 19, 30):
            show(f"lambda_{kind}_{n}(sigma=20,N=1000)", lam_quadrature(kind, n, 20, 1000))
    show("lambda_gaussian_3(sigma=5,N=1000)", lam_quadrature("gaussian", 3, 5, 1000))
    # closed-form Lamb shifts for the uniform sphere
    for n in range(5):
        lam = lam_quadrature("uniform", n, 20, 1000)
        show(f"omega_uniform_{n}(sigma=20,N=1000)", lam / 2 * sph_y(n, 20) / sph_j(n, 20))
    # steady mean excitation, uniform sigma=20 N=1000 delta=10, shifts neglected / included
    N, s, d = 1000, mpf(20), 10
    lam = [mpf(3) * N / 2 * (sph_j(n, s) ** 2 - (cos(s) / s if n == 0 else sph_j(n - 1, s)) * sph_j(n + 1, s))
           for n in range(100)]
    om = [lam[n] / 2 * sph_y(n, s) / sph_j(n, s) for n in range(100)]
    ss0 = sum((2 * n + 1) * lam[n] / (4 * d**2 + (1 + lam[n]) ** 2) for n in range(100)) / N
    ss1 = sum((2 * n + 1) * lam[n] / (4 * (d - om[n]) ** 2 + (1 + lam[n]) ** 2) for n in range(100)) / N
    show("mf_steady_uniform_noshift", ss0)
    show("mf_steady_uniform_shift", ss1)
    f = lambda t: sum((2 * n + 1) * lam[n] * exp(-(1 + lam[n]) * t) / (4 * d**2 + (1 + lam[n]) ** 2) for n in range(100))
    show("mf_uniform_early_slope_beta", (mp.log(f(0)) - mp.log(f(mpf("0.2")))) / mpf("0.2"))
    # gaussian continuum, sigma=20, N=1000
    L = mpf(N) / (2 * s**2)
    for dd in (0, 10):
        for t in (mpf("0.5"), mpf(2), mpf(5)):
            v = (2 * s**2 / N) * quad(lambda x: exp(-(1 + x) * t) / (4 * dd**2 + (1 + x) ** 2), [0, L])
            show(f"gauss_integral(delta={dd},t={t})", v)
    # gaussian early free decay, sigma=20 N=1000 delta=10; lambda_n from the density quadrature
    lam_g = [lam_quadrature("gaussian", n, 20, 1000) for n in range(140)]
    mean = lambda t: sum((2 * n + 1) * lam_g[n] * exp(-(1 + lam_g[n]) * t) / (4 * d**2 + (1 + lam_g[n]) ** 2)
                         for n in range(140))
    power = lambda t: sum((2 * n + 1) * lam_g[n] * (1 + lam_g[n]) * exp(-(1 + lam_g[n]) * t)
                          / (4 * d**2 + (1 + lam_g[n]) ** 2) for n in range(140))
    h = mpf("0.2")
    show("mf_gaussian_early_slope_beta", (mp.log(mean(0)) - mp.log(mean(h))) / h)
    show("mf_gaussian_early_slope_power", (mp.log(power(0)) - mp.log(power(h))) / h)
