#!/usr/bin/env python3
"""Symbolic oracle for the curvature identity machinery.

Runs before (and independently of) the C++ implementation. In axisymmetric
polar coordinates (r, theta) for d = 3 it builds every ingredient of the
divergence identity behind the integral identity chain symbolically, then

  1. decides which curvature-term convention makes the differential identity
     exact (four candidate readings of the ric / h_weight terms),
  2. confirms the winning k vanishes identically on the quadratic profile
     v = c + r^2/(alpha^2 lambda) and is bounded below by the pointwise
     deficit estimate,
  3. tests the integral decomposition inequality variants on random smooth
     axisymmetric fields (first-term coefficient alpha^2 vs alpha^4, middle
     term with/without the r^{n-d} v^{1-n} weight, two third-term
     coefficients),
  4. prints frozen probe values (v, |grad v|_g^2, Lv, |Hess v|_g^2, ric,
     h_weight, k) for a fixed test field at fixed points, for embedding in
     the C++ unit tests.

Everything is evaluated with mpmath at 50 digits on random points, which is
immune to simplification failures and fast enough to run in CI.
"""

import mpmath as mp
import random
import sympy as sp


mp.mp.dps = 50


def derive(d, a, b):
    """Parameter algebra: returns (q, n, alpha, alpha_fs, sqrt_lambda)."""
    d, a, b = map(sp.Rational, (str(d), str(a), str(b)))
    ac = sp.Rational(d, 2) - 1
    q = 2 * d / (d - 2 * (1 + a - b))
    n = d / (1 + a - b)
    alpha = (1 + a - b) * (ac - a) / (ac - a + b)
    alpha_fs = sp.sqrt((d - 1) / (n - 1))
    return q, n, alpha, alpha_fs, sp.sqrt((a - ac) ** 2)


class Machinery:
    """All symbolic derived quantities for a given axisymmetric field v(r, theta)."""

    def __init__(self, v, n, alpha, d=3):
        r, th = sp.symbols("r theta", positive=True)
        self.r, self.th = r, th
        self.v = v
        self.n, self.alpha, self.d = n, alpha, d
        a2 = alpha ** 2
        vr, vth = sp.diff(v, r), sp.diff(v, th)
        vrr, vrth, vthth = sp.diff(v, r, 2), sp.diff(vr, th), sp.diff(v, th, 2)

        self.P = a2 * vr ** 2 + vth ** 2 / r ** 2          # |grad_g v|_g^2
        self.lap_ang = vthth + sp.cot(th) * vth             # sphere Laplacian (axisym)
        self.Lv = a2 * (vrr + (n - 1) * vr / r) + self.lap_ang / r ** 2

        # Hessian in the g-orthonormal frame (radial, theta, phi directions)
        self.Hrr = a2 * vrr
        self.Hrt = (alpha / r) * (vrth - vth / r)
        self.Htt = (vthth + a2 * r * vr) / r ** 2
        self.Hpp = (a2 * r * vr + sp.cot(th) * vth) / r ** 2
        self.H2 = self.Hrr ** 2 + 2 * self.Hrt ** 2 + self.Htt ** 2 + self.Hpp ** 2

        # Tangential deficit and the g-gradient / position pairing
        self.deficit = vth ** 2 / r ** 2                    # |grad v|_E^2 - (grad v . x)^2/|x|^2, both for the g-gradient
        self.pair = a2 * r * vr                             # (grad_g v) . x, Euclidean pairing
        self.vr, self.vth, self.vrr, self.vrth, self.vthth = vr, vth, vrr, vrth, vthth

    def k_candidates(self):
        """Candidate conventions for ric + h_weight entering k[v]."""
        n, d, r, a2 = self.n, self.d, self.r, self.alpha ** 2
        # (B) identity-consistent: Euclidean-norm deficit, Bakry-Emery sign
        ricB = (1 - a2) * (d - 2) / r ** 2 * self.deficit
        hB = (n - d) * self.pair ** 2 / r ** 4 - a2 * (n - d) / r ** 2 * self.deficit
        # (A) same deficit, opposite h sign (literal display)
        hA = -hB
        # (C) g-norm deficit everywhere, literal signs
        defC = self.P - self.pair ** 2 / r ** 2
        ricC = (1 - a2) * (d - 2) / r ** 2 * defC
        hC = a2 * (n - d) / r ** 2 * defC - (n - d) * self.pair ** 2 / r ** 4
        # (D) Euclidean gradient for the pairing as well
        pairD = r * self.vr
        hD = a2 * (n - d) / r ** 2 * self.deficit - (n - d) * pairD ** 2 / r ** 4
        base = self.H2 - self.Lv ** 2 / n
        return {
            "B  (euclid deficit, +pair^2 - a^2 deficit)": base + ricB + hB,
            "A  (euclid deficit, sign-flipped h)": base + ricB + hA,
            "C  (g-norm deficit, literal)": base + ricC + hC,
            "D  (euclid gradient pairing)": base + ricB + hD,
        }, base + ricB + hB, ricB, hB

    def flux_divergence_lhs(self):
        """r^{d-n} div_g( r^{n-d} * flux ), the left side of the identity."""
        n, d, r, th = self.n, self.d, self.r, self.th
        a2 = self.alpha ** 2
        v, P, Lv = self.v, self.P, self.Lv
        S = v ** (1 - n) * Lv + (1 - n) / 2 * v ** (-n) * P \
            + 2 * (1 - n) / (n * (n - 2)) * v ** (-n)
        Pr, Pth = sp.diff(P, r), sp.diff(P, th)
        Frad = r ** (n - d) * (S * a2 * self.vr - v ** (1 - n) / 2 * a2 * Pr)
        Ftan = r ** (n - d) * (S * self.vth / r - v ** (1 - n) / 2 * Pth / r)
        div = sp.diff(r ** 2 * Frad, r) / r ** 2 \
            + sp.diff(sp.sin(th) * Ftan, th) / (r * sp.sin(th))
        return r ** (d - n) * div

    def rhs(self, k):
        """Right side: -(v/n)(Lv - (n/2)|grad v|^2/v - 2/((n-2)v)) L(v^{1-n}) - v^{1-n} k."""
        n, r = self.n, self.r
        v, P, Lv = self.v, self.P, self.Lv
        a2 = self.alpha ** 2
        w = v ** (1 - n)
        wr, wth = sp.diff(w, r), sp.diff(w, th := self.th)
        Lw = a2 * (sp.diff(w, r, 2) + (n - 1) * wr / r) \
            + (sp.diff(w, th, 2) + sp.cot(th) * wth) / r ** 2
        pref = -(v / n) * (Lv - (n / 2) * P / v - 2 / ((n - 2) * v))
        return pref * Lw - w * k


def eval_at(expr, subs, r_, th_):
    f = sp.lambdify((subs["r"], subs["theta"]), expr, modules="mpmath")
    return f(r_, th_)


def check_identity(d, a, b, label):
    q, n, alpha, afs, sl = derive(d, a, b)
    r, th = sp.symbols("r theta", positive=True)
    v = 2 + sp.Rational(3, 10) * sp.sin(sp.Rational(13, 10) * r) * sp.cos(th) \
        + sp.Rational(1, 5) * sp.cos(sp.Rational(7, 10) * r) * sp.cos(th) ** 2
    m = Machinery(v, n, alpha)
    cands, _, _, _ = m.k_candidates()
    lhs = m.flux_divergence_lhs()

    print(f"\n== identity residuals, (d,a,b) = ({d},{a},{b})  n={sp.nsimplify(n)}  alpha={sp.nsimplify(alpha)}  [{label}]")
    pts = [(mp.mpf("1.07"), mp.mpf("0.83")), (mp.mpf("1.52"), mp.mpf("2.11")),
           (mp.mpf("0.74"), mp.mpf("1.37"))]
    subs = {"r": r, "theta": th}
    winner = None
    for name, k in cands.items():
        res = m.rhs(k) - lhs
        worst = max(abs(eval_at(res, subs, *p)) for p in pts)
        ok = worst < mp.mpf("1e-38")
        print(f"   {name:48s} max|residual| = {mp.nstr(worst, 3):>12s}   {'EXACT' if ok else 'fails'}")
        if ok:
            winner = name
    return winner


def check_quadratic_and_bound(d, a, b):
    q, n, alpha, afs, sl = derive(d, a, b)
    r, th = sp.symbols("r theta", positive=True)
    lam, c = sp.Rational(7, 5), sp.Rational(1, 2)
    vq = c + r ** 2 / (alpha ** 2 * lam)
    mq = Machinery(vq, n, alpha)
    _, kq, _, _ = mq.k_candidates()
    kq_val = sp.simplify(kq)
    print(f"   quadratic profile: k[v] simplifies to {kq_val}")

    # pointwise bound with the winning convention on a random field
    v = 2 + sp.Rational(1, 4) * sp.sin(r) * sp.cos(th) + sp.Rational(1, 8) * sp.cos(2 * r) * sp.sin(th) ** 2
    m = Machinery(v, n, alpha)
    _, k, _, _ = m.k_candidates()
    bound = (d - 2 - alpha ** 2 * (n - 2)) / r ** 2 * m.deficit
    slack = k - bound
    worst = mp.mpf("inf")
    rng = random.Random(7)
    for _ in range(200):
        r_, th_ = mp.mpf(rng.uniform(0.5, 2.0)), mp.mpf(rng.uniform(0.2, 2.9))
        worst = min(worst, eval_at(slack, {"r": r, "theta": th}, r_, th_))
    print(f"   pointwise bound min slack over 200 random points: {mp.nstr(worst, 6)}  (needs >= 0)")


def decomposition_variants(d, a, b):
    """Quadrature test of the integral decomposition on random smooth fields."""
    import numpy as np
    q, n, alpha, afs, sl = derive(d, a, b)
    nf, af = float(n), float(alpha)
    rng = np.random.default_rng(11)
    rr = np.linspace(1e-3, 1.0, 801)
    tt = np.linspace(1e-4, np.pi - 1e-4, 257)
    R, T = np.meshgrid(rr, tt, indexing="ij")

    def quad(F):
        return np.trapz(np.trapz(F * R ** 2 * np.sin(T), tt, axis=1), rr)

    print(f"\n== decomposition variants, (d,a,b)=({d},{a},{b})  n={nf:.6f} alpha={af:.6f}")
    worst = {"printed-a2": np.inf, "a4-weighted-printed3rd": np.inf,
             "a4-weighted-pointwise3rd": np.inf, "a4-unweighted-printed3rd": np.inf}
    for trial in range(30):
        c = rng.uniform(-0.25, 0.25, size=6)
        h = 1e-5
        def vf(r, t):
            return (2.0 + c[0] * np.sin(1.1 * r) * np.cos(t) + c[1] * np.cos(0.8 * r) * np.cos(t) ** 2
                    + c[2] * r ** 2 * np.cos(t) + c[3] * np.sin(r) ** 2 * np.cos(t) ** 3
                    + c[4] * r ** 3 + c[5] * np.cos(2 * r) * np.cos(t) ** 4)
        V = vf(R, T)
        Vr = (vf(R + h, T) - vf(R - h, T)) / (2 * h)
        Vt = (vf(R, T + h) - vf(R, T - h)) / (2 * h)
        Vrr = (vf(R + h, T) - 2 * V + vf(R - h, T)) / h ** 2
        Vtt = (vf(R, T + h) - 2 * V + vf(R, T - h)) / h ** 2
        Vrt = (vf(R + h, T + h) - vf(R + h, T - h) - vf(R - h, T + h) + vf(R - h, T - h)) / (4 * h * h)
        a2 = af ** 2
        lap_ang = Vtt + Vt / np.tan(T)
        Lv = a2 * (Vrr + (nf - 1) * Vr / R) + lap_ang / R ** 2
        Hrr = a2 * Vrr
        Hrt = af / R * (Vrt - Vt / R)
        Htt = (Vtt + a2 * R * Vr) / R ** 2
        Hpp = (a2 * R * Vr + Vt / np.tan(T)) / R ** 2
        H2 = Hrr ** 2 + 2 * Hrt ** 2 + Htt ** 2 + Hpp ** 2
        deficit = Vt ** 2 / R ** 2
        pair = a2 * R * Vr
        ric = (1 - a2) * (3 - 2) / R ** 2 * deficit
        hw = (nf - 3) * pair ** 2 / R ** 4 - a2 * (nf - 3) / R ** 2 * deficit
        K = H2 + ric + hw - Lv ** 2 / nf
        Wgt = R ** (nf - 3) * V ** (1 - nf)
        lhs = quad(Wgt * K)
        br1 = (Vrr - Vr / R - lap_ang / (a2 * (nf - 1) * R ** 2)) ** 2
        t2core = (Vrt - Vt / R) ** 2 / R ** 2
        t3core = Vt ** 2 / R ** 4
        T1a2 = a2 * (1 - 1 / nf) * quad(Wgt * br1)
        T1a4 = a2 ** 2 * (1 - 1 / nf) * quad(Wgt * br1)
        T2w = 2 * a2 * quad(Wgt * t2core)
        T2u = 2 * a2 * quad(t2core)
        c3_printed = (nf - 2) * ((3 - 1) / (nf - 1) - a2)
        c3_pw = (3 - 2) - a2 * (nf - 2)
        T3p = c3_printed * quad(Wgt * t3core)
        T3pw = c3_pw * quad(Wgt * t3core)
        worst["printed-a2"] = min(worst["printed-a2"], lhs - (T1a2 + T2w + T3p))
        worst["a4-weighted-printed3rd"] = min(worst["a4-weighted-printed3rd"], lhs - (T1a4 + T2w + T3p))
        worst["a4-weighted-pointwise3rd"] = min(worst["a4-weighted-pointwise3rd"], lhs - (T1a4 + T2w + T3pw))
        worst["a4-unweighted-printed3rd"] = min(worst["a4-unweighted-printed3rd"], lhs - (T1a4 + T2u + T3p))
    for k_, v_ in worst.items():
        print(f"   variant {k_:28s} min slack over 30 random fields: {v_: .6e}")


def freeze_probe_values(d, a, b):
    q, n, alpha, afs, sl = derive(d, a, b)
    r, th = sp.symbols("r theta", positive=True)
    v = 2 + sp.Rational(3, 10) * sp.sin(sp.Rational(13, 10) * r) * sp.cos(th) \
        + sp.Rational(1, 5) * sp.cos(sp.Rational(7, 10) * r) * sp.cos(th) ** 2
    m = Machinery(v, n, alpha)
    _, k, ric, hw = m.k_candidates()
    print(f"\n== frozen probe values, (d,a,b)=({d},{a},{b}), field v = 2 + 0.3 sin(1.3 r) cos(th) + 0.2 cos(0.7 r) cos^2(th)")
    print(f"   q = {sp.nsimplify(q)} = {mp.nstr(mp.mpf(str(sp.N(q, 30))), 20)}")
    print(f"   n = {sp.nsimplify(n)} = {mp.nstr(mp.mpf(str(sp.N(n, 30))), 20)}")
    print(f"   alpha = {sp.nsimplify(alpha)} = {mp.nstr(mp.mpf(str(sp.N(alpha, 30))), 20)}")
    print(f"   alpha_FS = {mp.nstr(mp.mpf(str(sp.N(afs, 30))), 20)}")
    subs = {"r": r, "theta": th}
    for (r_, th_) in [("1.1", "0.9"), ("1.4", "1.7"), ("1.7", "0.5")]:
        rp, tp = mp.mpf(r_), mp.mpf(th_)
        row = {
            "v": eval_at(m.v, subs, rp, tp),
            "normsq": eval_at(m.P, subs, rp, tp),
            "Lv": eval_at(m.Lv, subs, rp, tp),
            "hess2": eval_at(m.H2, subs, rp, tp),
            "ric": eval_at(ric, subs, rp, tp),
            "h_weight": eval_at(hw, subs, rp, tp),
            "k": eval_at(k, subs, rp, tp),
        }
        print(f"   probe r={r_} theta={th_}")
        for key, val in row.items():
            print(f"      {key:8s} = {mp.nstr(val, 18)}")


if __name__ == "__main__":
    w1 = check_identity(3, 0.25, 0.3, "acceptance parameters")
    w2 = check_identity(3, -0.5, 0.1, "second admissible point, n=7.5")
    print(f"\nwinning convention: {w1!r} / {w2!r}")
    check_quadratic_and_bound(3, 0.25, 0.3)
    decomposition_variants(3, 0.25, 0.3)
    decomposition_variants(3, 0.2, 0.2)
    freeze_probe_values(3, 0.25, 0.3)
