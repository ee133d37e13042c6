"""Independent oracles for the fixed-point and two-time solvers (mpmath)."""
import mpmath as mp

mp.mp.dps = 40
Phi = lambda x: mp.ncdf(x)
phi = lambda x: mp.npdf(x)


def two_point(eps):
    eps = mp.mpf(eps)
    return [(mp.mpf(0), 1 - eps), (1 / mp.sqrt(eps), eps)] if eps < 1 else [(mp.mpf(1), mp.mpf(1))]


def K(x):
    return (1 + x * x) * Phi(x) + x * phi(x)


def resp(m, x):
    d = sum(w * K(x * v) for v, w in m)
    f = sum(w * v * (x * v * Phi(x * v) + phi(x * v)) for v, w in m)
    return f / mp.sqrt(d)


def fp_t(m, beta, steps=10000):
    tau = beta * sum(w * v for v, w in m)
    for _ in range(steps):
        tau = beta * resp(m, tau)
    return tau


def fp_s(m, beta, alpha, steps=10000):
    sb, sa = mp.sqrt(beta), mp.sqrt(alpha)
    mu = sb * sum(w * v for v, w in m)
    for _ in range(steps):
        th = sb * mu / mp.sqrt(1 + mu * mu)
        mu = sb * resp(m, th / sa)
    return th


def h_direct(m, q, t1, t2):
    """2-D integral of the defining expectation."""
    q = mp.mpf(q)
    s = mp.sqrt(1 - q)

    def inner(c):
        u = c / s
        return s * (u * Phi(u) + phi(u))

    num = 0
    for v, w in m:
        f = lambda z: inner(t1 * v + mp.sqrt(q) * z) * inner(t2 * v + mp.sqrt(q) * z) * phi(z)
        num += w * mp.quad(f, [-mp.inf, -5, 0, 5, mp.inf])
    d1 = sum(w * K(t1 * v) for v, w in m)
    d2 = sum(w * K(t2 * v) for v, w in m)
    return num / mp.sqrt(d1 * d2)


if __name__ == "__main__":
    m = two_point(0.3)
    print("solve_t(0.3, 1/sqrt2)", mp.nstr(fp_t(m, 1 / mp.sqrt(2)), 20))
    print("solve_s(0.1, 1, 0.5)", mp.nstr(fp_s(two_point(0.1), 1, mp.mpf("0.5")), 20))
    for q in ["0.25", "0.5", "0.9"]:
        print("H(0.1, q=%s, 1, 1.3)" % q, mp.nstr(h_direct(two_point(0.1), q, 1, mp.mpf("1.3")), 20))
