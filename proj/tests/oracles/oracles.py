"""Independent reference values for the unit tests (mpmath / scipy).

Run: python3 tests/oracles/oracles.py
The printed values are frozen in tests/unit/oracle_values.hpp.
"""
import mpmath as mp
from scipy import stats

mp.mp.dps = 30


def density(alpha, d, r):
    # inverse Fourier transform of exp(-|xi|^alpha), radial form per dimension
    f = lambda s: mp.exp(-s**alpha)
    if r == 0:
        area = 2 * mp.pi**(mp.mpf(d) / 2) / mp.gamma(mp.mpf(d) / 2)
        return area * mp.gamma(mp.mpf(d) / alpha) / alpha / (2 * mp.pi)**d
    if d == 1:
        return mp.quadosc(lambda s: f(s) * mp.cos(r * s), [0, mp.inf], omega=r) / mp.pi
    if d == 2:
        return mp.quadosc(lambda s: f(s) * s * mp.besselj(0, r * s), [0, mp.inf], omega=r) / (2 * mp.pi)
    if d == 3:
        return mp.quadosc(lambda s: f(s) * s * mp.sin(r * s), [0, mp.inf], omega=r) / (2 * mp.pi**2 * r)
    raise ValueError(d)


def cdf_1d(alpha, x):
    # P(Z_1 <= x) for the marginal with cf exp(-|t|^alpha)
    g = mp.quadosc(lambda s: mp.exp(-s**alpha) * mp.sin(x * s) / s, [0, mp.inf], omega=abs(x))
    return mp.mpf(1) / 2 + g / mp.pi


def green_halfline_direct(alpha, x, y):
    a = mp.mpf(alpha) / 2
    z = min(x, y) / abs(x - y)
    integral = mp.quad(lambda t: (t * (t + 1))**(a - 1), [0, z])
    return abs(x - y)**(alpha - 1) * integral / mp.gamma(a)**2


def green_halfspace_direct(alpha, d, x, y):
    r2 = sum((xi - yi)**2 for xi, yi in zip(x, y))
    zeta = 4 * x[-1] * y[-1] / r2
    kappa = mp.gamma(mp.mpf(d) / 2) / (2**alpha * mp.pi**(mp.mpf(d) / 2) * mp.gamma(mp.mpf(alpha) / 2)**2)
    integral = mp.quad(lambda s: s**(mp.mpf(alpha) / 2 - 1) * (1 + s)**(-mp.mpf(d) / 2), [0, zeta])
    return kappa * mp.sqrt(r2)**(alpha - d) * integral


def main():
    print("density")
    for alpha, d, r in [(1.5, 1, 0), (1.5, 1, 0.5), (1.5, 1, 3.0), (0.7, 1, 2.0), (1.5, 2, 0),
                        (1.5, 2, 1.0), (0.7, 2, 1.0), (1.5, 3, 2.0), (0.7, 3, 0.5)]:
        print(f"  {{{alpha}, {d}, {r}, {mp.nstr(density(alpha, d, r), 17)}}},")
    print("one-step survival from e_d, alpha 1.5:", mp.nstr(1 - cdf_1d(1.5, -1.0), 17))
    print("one-step survival from e_d, alpha 0.7:", mp.nstr(1 - cdf_1d(0.7, -1.0), 17))
    print("green halfline")
    for alpha, x, y in [(1.5, 1.0, 2.0), (0.7, 1.0, 3.0), (1.5, 0.3, 5.0)]:
        print(f"  {{{alpha}, {x}, {y}, {mp.nstr(green_halfline_direct(alpha, x, y), 17)}}},")
    print("green halfspace")
    for alpha, d, x, y in [(1.5, 2, (0.0, 1.0), (0.5, 2.0)), (0.7, 3, (0.0, 0.0, 1.0), (1.0, -1.0, 0.5))]:
        print(f"  {alpha} {d} {x} {y} {mp.nstr(green_halfspace_direct(alpha, d, x, y), 17)}")
    print("ball exit radius cdf (r=1, rho=1.5), Beta(a/2, 1-a/2) tail of 1/rho^2")
    for alpha in (0.7, 1.5):
        print(f"  {alpha} {1 - stats.beta(alpha / 2, 1 - alpha / 2).cdf(1 / 1.5**2):.17g}")
    print("kolmogorov Q(1.0), Q(1.36):", stats.kstwobign.sf(1.0), stats.kstwobign.sf(1.36))
    print("chi2 sf(3.84, 1), sf(10, 4):", stats.chi2.sf(3.84, 1), stats.chi2.sf(10, 4))
    # Wilson 95% interval for 30 / 100
    z = 1.959963984540054
    n, k = 100, 30
    p = k / n
    c = (p + z * z / (2 * n)) / (1 + z * z / n)
    h = z * mp.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / (1 + z * z / n)
    print("wilson 30/100:", mp.nstr(c - h, 17), mp.nstr(c + h, 17))


if __name__ == "__main__":
    main()
