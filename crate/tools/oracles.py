"""Independent scalar evaluations used to freeze expected values in the Rust tests.

Run with: python3 tools/oracles.py
"""
from mpmath import mp, mpf, sqrt, exp, log, pi, erfc, quad, cos, sin, mpc, ncdf
import numpy as np
from scipy import stats

mp.dps = 50


def coeffs(eta, eps, xi):
    e1, e2, e3, e4 = [mpf(v) for v in eta]
    p1, p2, p3, p4 = [mpf(v) for v in eps]
    x1, x2, x3, x4 = [mpf(v) for v in xi]
    k = {}
    k[11] = e1 * (e3 * p1 * x1**2 + (1 - e3) * p3 * x3**2)
    k[21] = (1 - e1) * (e4 * p2 * x2**2 + (1 - e4) * p4 * x4**2)
    k[12] = e2 * ((1 - e3) * p1 * x1**2 + e3 * p3 * x3**2)
    k[22] = (1 - e2) * ((1 - e4) * p2 * x2**2 + e4 * p4 * x4**2)
    k[13] = sqrt(e1 * e2 * e3 * (1 - e3)) * (p1 * x1 + p3 * x3)
    k[23] = sqrt((1 - e1) * (1 - e2) * e4 * (1 - e4)) * (p2 * x2 + p4 * x4)
    d = {}
    d[11] = e1 * (e3 * p1 * x1 - (1 - e3) * p3 * x3)
    d[21] = (1 - e1) * (e4 * p2 * x2 - (1 - e4) * p4 * x4)
    d[12] = e2 * ((1 - e3) * p1 * x1 - e3 * p3 * x3)
    d[22] = (1 - e2) * ((1 - e4) * p2 * x2 - e4 * p4 * x4)
    d[13] = sqrt(e1 * e2 * e3 * (1 - e3)) * (p1 * x1**2 - p3 * x3**2)
    d[23] = sqrt((1 - e1) * (1 - e2) * e4 * (1 - e4)) * (p2 * x2**2 - p4 * x4**2)
    return k, d


def single(e3, p1, p3, x1, x3):
    e3, p1, p3, x1, x3 = map(mpf, (e3, p1, p3, x1, x3))
    r = sqrt(e3 * (1 - e3))
    return {
        "k11": e3 * p1 * x1**2 + (1 - e3) * p3 * x3**2,
        "k12": (1 - e3) * p1 * x1**2 + e3 * p3 * x3**2,
        "k13": r * (p1 * x1 + p3 * x3),
        "d11": e3 * p1 * x1 - (1 - e3) * p3 * x3,
        "d12": (1 - e3) * p1 * x1 - e3 * p3 * x3,
        "d13": r * (p1 * x1**2 - p3 * x3**2),
    }


def show(title, pairs):
    print(f"## {title}")
    for name, v in pairs:
        print(f"{name} = {mp.nstr(v, 17)}")


k, d = coeffs((0.5, 0.5, 0.45, 0.5), (0.9, 0.85, 0.8, 0.85), (1.1, 1.0, 1.0, 1.0))
show("circuit random params", [(f"kappa{i}", k[i]) for i in sorted(k)] + [(f"delta{i}", d[i]) for i in sorted(d)])

s = single(0.48, 0.95, 0.9, 1, 1)
show("single homodyne eta3=0.48", sorted(s.items()))

# E[conj f(s) f(t)], t=1, s=0, |lambda|^2=1, omega0=1, gamma0=0.1, w2=0.5, gamma1=2
w2, v0 = mpf("0.5"), mpf("0.5")
val = exp(mpc(0, -1)) * exp(mpf("-0.1")) * (w2 + v0 * exp(-2))
show("laser moment", [("re", val.real), ("im", val.imag)])

# C0 by double quadrature of the RIN covariance against h, kappa=1, gamma1=1, w2=0.5
kap, g1 = mpf(1), mpf(1)
v = lambda t: v0 * exp(-g1 * abs(t))
rin = lambda t: 2 * v(t) ** 2 + 4 * w2 * v(t)
h = lambda t: kap * exp(-kap * t)
mp.dps = 20
c0q = 2 * quad(lambda s1: quad(lambda s2: h(s1) * h(s2) * rin(s1 - s2), [0, s1]), [0, 40])
mp.dps = 50
show("C0 quadrature", [("c0", c0q)])

# Bivariate normal rectangle, rho = 0.3, x = 2.5 on both axes (unit variances)
rho = 0.3
mvn = stats.multivariate_normal(mean=[0, 0], cov=[[1, rho], [rho, 1]])
a = 2.5
rect = mvn.cdf([a, a]) - mvn.cdf([-a, a]) - mvn.cdf([a, -a]) + mvn.cdf([-a, -a])
print("## bivariate rectangle rho=0.3 a=2.5 (scipy)")
print(f"mass = {rect:.15e}")
# high-precision 1-D conditional integral
mp.dps = 30
r = mpf("0.3")
m = quad(lambda y: exp(-y * y / 2) / sqrt(2 * pi) * (ncdf((a - r * y) / sqrt(1 - r * r)) - ncdf((-a - r * y) / sqrt(1 - r * r))), [-a, 0, a])
print(f"mass_mp = {mp.nstr(m, 20)}")
print(f"sat_mp = {mp.nstr(1 - m, 20)}")

# coarse bins n=4, x=4, correlated covariance: best centred bin mass
cov = np.array([[1.0, 0.4], [0.4, 2.0]])
sd = np.sqrt(np.diag(cov))
dl = 2 * 4 * sd / 16
mvn2 = stats.multivariate_normal(mean=[0, 0], cov=cov)
lo, hi = -dl / 2, dl / 2
pb = mvn2.cdf(hi) - mvn2.cdf([lo[0], hi[1]]) - mvn2.cdf([hi[0], lo[1]]) + mvn2.cdf(lo)
print("## centred bin mass n=4 x=4 cov [[1,.4],[.4,2]]")
print(f"pbin = {pb:.12e}")
print(f"approx = {dl[0]*dl[1]/(2*np.pi*np.sqrt(np.linalg.det(cov))):.12e}")

# Fig loss oracle spot values, symmetric case
mp.dps = 30
Ups0 = mpf(5000)
Th = mpf("0.12")
def hdinam(e, eta):
    U = (1 - 2 * eta) ** 2 * Ups0
    if U == 0:
        return mpf(0)
    return -log(1 - (1 + 1 / (e * U) + Th / (e * e * U)) ** -2, 2) / 2
def diffxx(e, eta):
    U = (1 - 2 * eta) ** 2 * Ups0
    return log(1 + e * U + Th / e, 2)
def hsing(e, eta):
    return log(1 + mpf(10) ** 4 * e * (1 - 2 * eta) ** 2 + Th / (2 * e), 2) / 2
print("## loss spot values")
for e, eta in [("0.9", "0.504"), ("0.8", "0.46"), ("1.0", "0.5"), ("0.75", "0.503")]:
    e, eta = mpf(e), mpf(eta)
    print(f"eps={e} eta={eta} hdinam={mp.nstr(hdinam(e, eta), 17)} diffxx={mp.nstr(diffxx(e, eta), 17)} hsing={mp.nstr(hsing(e, eta), 17)}")

# intensity spectrum peak: |lambda|^2=2, gamma0=0.5, gamma1=3, w2=0.25
L2, G0, G1, W2 = mpf(2), mpf("0.5"), mpf(3), mpf("0.25")
show("intensity spectrum peak", [("pi_peak", 2 * L2 * (W2 / G0 + (1 - W2) / (G0 + G1)))])

# Pguess-oracle for single-channel numeric: n=4, x=3, centred bin of N(0,1)
x = 3
dl1 = 2 * x / 16
print("## single centred bin n=4 x=3")
print(f"p = {stats.norm.cdf(dl1/2) - stats.norm.cdf(-dl1/2):.15e}")

# coherent mean photocurrents by direct quadrature of the response convolution
k, d = coeffs((0.5, 0.5, 0.45, 0.5), (0.9, 0.85, 0.8, 0.85), (1.1, 1.0, 1.0, 1.0))
psi = (mpf("0.3"), mpf("1.9"))
lam = 2 * exp(mpc(0, "0.5"))
w, om0, g0 = mpf("0.8"), mpf(2), mpf("0.3")
alpha, om = mpc("0.7", "-0.2"), mpf("1.5")
kap, t = mpf(3), mpf("2.5")
for j, (k3, d1, d2) in enumerate(((k[13], d[11], d[12]), (k[23], d[21], d[22]))):
    def g(r):
        ef = lam * w * exp(-(mpc(0, 1) * om0 + g0) * r)
        fs = alpha * exp(mpc(0, -1) * om * r)
        inter = 2 * k3 * (mpc(0, 1) * exp(mpc(0, 1) * psi[j]) * ef * fs.conjugate()).real
        return kap * exp(-kap * (t - r)) * (inter + d1 * abs(fs) ** 2 + d2 * 4)
    show(f"coherent mean channel {j + 1}", [("mean", quad(g, [0, t]))])
