"""Independent reference values for the deterministic binomial cascade (1/4, 3/4).

Brute-force enumeration in plain float64 / numpy, deliberately unrelated to
the C++ code paths it checks. Run it to regenerate the constants frozen in
tests/unit/*.cpp.
"""
from math import log, log2, exp, sqrt

import numpy as np
from scipy.optimize import brentq

W = (0.25, 0.75)
B = 2


def tau(q):
    return -log2(sum(w ** q for w in W))


def tau_prime(q):
    s = sum(w ** q for w in W)
    return -sum(w ** q * log(w) for w in W) / (s * log(2))


def masses(n, weights=W):
    row = np.array([1.0])
    for _ in range(n):
        row = np.outer(row, np.array(weights)).ravel()
    return row


def eps_assump(n, eta):
    n = max(n, 2)
    return n ** -0.5 * log(n) ** (0.5 + eta)


def in_band(m, n, alpha, eps):
    lm = np.log2(m)
    return (-n * (alpha + eps) <= lm) & (lm <= -n * (alpha - eps))


def box_count(n, alpha, eps):
    return int(in_band(masses(n), n, alpha, eps).sum())


def mask(rows, alpha, p, N, eta, nmax):
    ok = np.ones(B ** nmax, dtype=bool)
    leaves = np.arange(B ** nmax)
    for n in range(p, nmax + 1):
        good = in_band(rows[n], n, alpha, eps_assump(n, eta))
        anc = leaves >> (nmax - n)
        for leaf in range(B ** nmax):
            a = anc[leaf]
            lo, hi = max(0, a - N), min(B ** n - 1, a + N)
            if not good[lo:hi + 1].all():
                ok[leaf] = False
    return ok


def growth_speed(m_leaf, rows, alpha, N, eta, f, nmax):
    total = m_leaf.sum()
    for p in range(1, nmax + 1):
        if m_leaf[mask(rows, alpha, p, N, eta, nmax)].sum() >= f * total:
            return p
    return None


def legendre(alpha):
    qs = brentq(lambda q: tau_prime(q) - alpha, -60, 60)
    return qs * alpha - tau(qs)


def gs_prime(alpha, eta, p_min, nmax):
    ts = legendre(alpha)
    for p in range(p_min, nmax + 1):
        good = True
        for n in range(p, nmax + 1):
            e = eps_assump(n, eta)
            cnt = box_count(n, alpha, e)
            if not (2 ** (n * (ts - e)) <= cnt <= 2 ** (n * (ts + e))):
                good = False
                break
        if good:
            return p
    return None


if __name__ == "__main__":
    print("tau(2)", repr(tau(2)))
    print("tau'(0)", repr(tau_prime(0)))
    print("tau'(1)", repr(tau_prime(1)))
    print("tau'(2)", repr(tau_prime(2)), "tau'(-2)", repr(tau_prime(-2)))
    print("box_count n=8 a=1 e=0.2", box_count(8, 1, 0.2))
    a1 = tau_prime(1)
    print("gs_prime alpha=tau'(1) nmax=14 eta=0.5", gs_prime(a1, 0.5, 1, 14))
    rows = {n: masses(n) for n in range(0, 13)}
    mk = mask(rows, a1, 4, 1, 0.5, 12)
    print("mask true leaves (a=tau'(1),p=4,N=1,eta=.5,nmax=12)", int(mk.sum()))
    q = 2
    wq = tuple(2 ** tau(q) * w ** q for w in W)
    print("growth_speed mu_q q=2 nmax=12 f=1/2",
          growth_speed(masses(12, wq), rows, tau_prime(q), 1, 0.5, 0.5, 12))
    for e in (0.06, 0.08, 0.1, 0.15):
        worst = 0.0
        for i in range(101):
            al = tau_prime(2) + (tau_prime(-2) - tau_prime(2)) * i / 100
            cnt = box_count(14, al, e)
            ld = log2(cnt) / 14 if cnt else float("-inf")
            worst = max(worst, abs(ld - legendre(al)))
        print("ld n=14 eps", e, "max dev", worst)
