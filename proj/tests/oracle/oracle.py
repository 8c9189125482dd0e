#!/usr/bin/env python3
"""Independent reference values for the C++ tests.

Everything here is computed with mpmath at 50 digits, straight from the
closed-form definitions. Run

    python3 tests/oracle/oracle.py > tests/oracle_values.hpp

to regenerate the frozen header.
"""

import mpmath as mp

mp.mp.dps = 50

X = [[0.3, -0.2], [-0.5, 0.4], [0.1, 0.7], [0.6, 0.6], [-0.4, -0.6], [0.0, 0.1], [0.8, -0.3]]
Y = [0.5, -1.2, 0.8, 0.3, -0.7, 1.1, -0.2]
XQ = [0.2, -0.1]
LAMBDA0 = mp.mpf("0.1")
V = mp.mpf(1)


def kern(a, b, v=V):
    s = sum((mp.mpf(p) - mp.mpf(q)) ** 2 for p, q in zip(a, b))
    return mp.e ** (-s / (2 * v * v))


def system(xs, ys, lam0):
    n = len(xs)
    K = mp.matrix(n, n)
    for i in range(n):
        for j in range(n):
            K[i, j] = kern(xs[i], xs[j])
    D = [sum(K[i, j] for j in range(n)) for i in range(n)]
    lam = lam0 * n
    A = K + lam * mp.eye(n)
    y = mp.matrix([mp.mpf(v) for v in ys])
    return K, D, lam, A, y


def sym_eigs(M):
    E, _ = mp.eigsy(M)
    return [E[i] for i in range(M.rows)]


def scaled(A, D):
    n = A.rows
    S = mp.matrix(n, n)
    for i in range(n):
        for j in range(n):
            S[i, j] = A[i, j] / mp.sqrt(D[i] * D[j])
    return S


def vec(v):
    return [v[i] for i in range(v.rows)]


K, D, LAM, A, YV = system(X, Y, LAMBDA0)
N = len(X)
W_STAR = mp.lu_solve(A, YV)
KQ = mp.matrix([kern(x, XQ) for x in X])
PRED_STAR = sum(W_STAR[i] * KQ[i] for i in range(N))

S = scaled(A, D)
eS = sym_eigs(S)
ETA_PR = 1 / max(eS)
KAPPA_D = max(eS) / min(eS)


def richardson(eta, T):
    w = mp.matrix(N, 1)
    out = [w]
    for _ in range(T):
        r = YV - A * w
        w = w + mp.matrix([eta * r[i] / D[i] for i in range(N)])
        out.append(w)
    return out


PR = richardson(ETA_PR, 10)


def cg(T):
    w = mp.matrix(N, 1)
    r = YV.copy()
    p = r.copy()
    for _ in range(T):
        Ap = A * p
        rr = (r.T * r)[0]
        a = rr / (p.T * Ap)[0]
        w = w + a * p
        r = r - a * Ap
        p = r + ((r.T * r)[0] / rr) * p
    return w


CG3 = cg(3)

eK = sym_eigs(K)
eA = [m * (m + LAM) for m in eK]
ETA_GD = 1 / max(eA)
root = mp.sqrt(max(eA) / min(eA))
BETA_NES = (root - 1) / (root + 1)


def gd(eta, T):
    w = mp.matrix(N, 1)
    for _ in range(T):
        w = w - eta * (K * (A * w - YV))
    return w


def nesterov(eta, beta, T):
    w = mp.matrix(N, 1)
    z = mp.matrix(N, 1)
    for _ in range(T):
        zn = w - eta * (K * (A * w - YV))
        w = zn + beta * (zn - z)
        z = zn
    return w


GD5 = gd(ETA_GD, 5)
NES5 = nesterov(ETA_GD, BETA_NES, 5)

R_VEC = [mp.mpf(v) for v in ["0.01", "-0.02", "0.005", "0", "0.01", "-0.01", "0.02"]]
ETA_C = mp.mpf("0.5")
Amat = mp.eye(N) - ETA_C * (S + LAM * mp.diag(R_VEC))
CONTRACTION = max(abs(e) for e in sym_eigs(Amat))


def sgn(x):
    return mp.mpf(1) if x > 0 else (mp.mpf(-1) if x < 0 else mp.mpf(0))


def inexact(eta, T, ef, es, et):
    """Adversarial-sign perturbations at their caps."""
    cr, cs, ct = ef / N, es / N, et / (N * N)
    kw = K * W_STAR
    r = [cr * sgn(-W_STAR[i]) * sgn(kw[i]) for i in range(N)]
    tp = [cs * sgn(-W_STAR[i]) for i in range(N)]
    tm = [-cs * sgn(-W_STAR[i]) for i in range(N)]
    w = mp.matrix(N, 1)
    for _ in range(T):
        s = [sgn(w[i] - W_STAR[i]) for i in range(N)]
        ttp = [-ct * s[i] for i in range(N)]
        ttm = [ct * s[i] for i in range(N)]
        res = YV - A * w
        upd = []
        for i in range(N):
            exact = res[i] / D[i]
            extra = (YV[i] - LAM * w[i]) * r[i] + (tp[i] - tm[i] - LAM * ttp[i] + LAM * ttm[i]) / 4
            upd.append(eta * (exact + extra))
        w = w + mp.matrix(upd)
    return w


INEXACT3 = inexact(ETA_C, 3, mp.mpf("0.1"), mp.mpf("0.1"), mp.mpf("0.1"))

# Per-prefix direct predictions: first n pairs predict x_{n+1}.
PREFIX = []
for n in range(1, N):
    _, _, _, An, yn = system(X[:n], Y[:n], LAMBDA0)
    wn = mp.lu_solve(An, yn)
    PREFIX.append(sum(wn[i] * kern(X[i], X[n]) for i in range(n)))

# Read-in cache values k_i = 1 / (1 + sum_j K(x_i, x_j)) over context tokens.
K_CACHE = [1 / (1 + D[i]) for i in range(N)]
KQ_SUM = sum(KQ[i] for i in range(N))
K_QUERY = 1 / (1 + KQ_SUM)


# Construction constants.
def constants(lam0, by, kappa, c, n):
    lam0, by, kappa, c = map(mp.mpf, (lam0, by, kappa, c))
    c0 = (1 / mp.sqrt(lam0) + 1) * by / lam0
    rf = (by / mp.sqrt(lam0) + 2 * (1 + lam0)) / (lam0 * (1 - c) * mp.sqrt(kappa))
    bw = (c0 / mp.sqrt(kappa) + rf) / mp.sqrt(n) + c0 / n
    bwt = c0 / mp.sqrt(kappa) + rf + c0
    csys = c0 * (2 / mp.sqrt(kappa) + 1) + 2 * rf + mp.mpf(1) / 2
    balpha = 1 / (n * kappa) + mp.mpf(1) / n
    return dict(c0=c0, rf=rf, bw=bw, bwt=bwt, csys=csys, balpha=balpha)


KAPPA = mp.e ** -2
CONST = constants("0.1", "2", KAPPA, "0.5", 10)


def envelope(lam0, by, kappa, step, norm_a, eta, ef, es, et):
    lam0, by, kappa, norm_a, eta = map(mp.mpf, (lam0, by, kappa, norm_a, eta))
    c0 = (1 / mp.sqrt(lam0) + 1) * by / lam0
    head = norm_a ** step * c0 / mp.sqrt(kappa)
    drive = by / mp.sqrt(lam0) * ef + (1 + lam0) * (es + et)
    return head + eta * drive / ((1 - norm_a) * mp.sqrt(kappa))


ENVELOPE = envelope("0.1", "2", KAPPA, 5, "0.9", "0.5", mp.mpf("0.05"), mp.mpf("0.05"), mp.mpf("0.05"))


def ceil_of(x):
    return int(mp.ceil(x))


# Plan for lambda0 = 0.1, N = 10, d = 2, v = 1, B_x = 1, B_y = 2, c = 0.5, eps = 0.05.
def plan(lam0, n, bx, v, by, c, eps):
    lam0, bx, v, by, c, eps = map(mp.mpf, (lam0, bx, v, by, c, eps))
    kappa = mp.e ** (-2 * bx ** 2 / v ** 2)
    eta = mp.mpf("0.99") / (lam0 * eps + 1 + lam0 / kappa)
    cs = constants(lam0, by, kappa, c, n)
    L = ceil_of(mp.log(1 / eps) / mp.log(1 / (1 - eta * lam0 * (1 - c))))
    dflip = 1 / (1 + n * kappa)
    g = (1 - dflip) ** mp.mpf(-0.5) - 1
    n_flip = max(ceil_of(2 * g / mp.sqrt(eps / n)), ceil_of(g))
    n_sq = ceil_of((by + cs["balpha"]) / mp.sqrt(eps / n))
    n_sqt = ceil_of((cs["bw"] + cs["balpha"]) / mp.sqrt(eps / n ** 2))
    n_inv = ceil_of(3 * mp.sqrt((n + 1) / eps))
    n_sqh = ceil_of((cs["bw"] + 3) / mp.sqrt(eps / n))
    return dict(eta=eta, L=L, n_flip=n_flip, n_sq=n_sq, n_sqt=n_sqt, n_inv=n_inv, n_sqh=n_sqh,
                csys=cs["csys"], bw=cs["bw"], balpha=cs["balpha"], kappa=kappa)


PLAN = plan("0.1", 10, "1", "1", "2", "0.5", "0.05")


# Piecewise-linear interpolants and their exact sup errors.
def flip_nodes(delta, n):
    top = (1 - delta) ** mp.mpf(-0.5)
    return [1 - (1 + mp.mpf(k) / n * (top - 1)) ** -2 for k in range(n + 1)]


def inv_nodes(delta, n):
    top = delta ** mp.mpf(-0.5)
    return [(top - mp.mpf(k) / n * (top - 1)) ** -2 for k in range(n + 1)]


def sq_nodes(delta, n):
    return [-delta + 2 * delta * mp.mpf(k) / n for k in range(n + 1)]


def chord(f, nodes, x):
    for a, b in zip(nodes, nodes[1:]):
        if a <= x <= b:
            return f(a) + (f(b) - f(a)) * (x - a) / (b - a)
    raise ValueError("outside")


def sup_error(f, fp, nodes):
    worst = mp.mpf(0)
    for a, b in zip(nodes, nodes[1:]):
        slope = (f(b) - f(a)) / (b - a)
        x = mp.findroot(lambda t: fp(t) - slope, (a + b) / 2)
        worst = max(worst, abs(f(x) - (f(a) + slope * (x - a))))
    return worst


f_flip = lambda x: x / (1 - x)
fp_flip = lambda x: 1 / (1 - x) ** 2
f_inv = lambda x: 1 / x
fp_inv = lambda x: -1 / x ** 2
f_sq = lambda x: x * x
fp_sq = lambda x: 2 * x

FLIP_NODES = flip_nodes(mp.mpf("0.5"), 9)
INV_NODES = inv_nodes(mp.mpf("0.25"), 60)
SQ_NODES = sq_nodes(mp.mpf(2), 20)
SPLINE = dict(
    flip_at=chord(f_flip, FLIP_NODES, mp.mpf("0.3")),
    flip_sup=sup_error(f_flip, fp_flip, FLIP_NODES),
    inv_at=chord(f_inv, INV_NODES, mp.mpf("0.4")),
    inv_sup=sup_error(f_inv, fp_inv, INV_NODES),
    sq_at=chord(f_sq, SQ_NODES, mp.mpf("0.33")),
    sq_sup=sup_error(f_sq, fp_sq, SQ_NODES),
)


def fmt(x):
    return repr(float(x))


def arr(name, values):
    body = ", ".join(fmt(v) for v in values)
    return f"inline constexpr double {name}[] = {{{body}}};"


def scalar(name, value):
    return f"inline constexpr double {name} = {fmt(value)};"


def integer(name, value):
    return f"inline constexpr int {name} = {int(value)};"


lines = [
    "// Generated by tests/oracle/oracle.py; do not edit.",
    "#pragma once",
    "",
    "namespace oracle {",
    "",
    "// Fixed instance: 7 points in R^2, lambda0 = 0.1, v = 1.",
    arr("kX", [c for row in X for c in row]),
    arr("kY", Y),
    arr("kQuery", XQ),
    scalar("kLambda0", LAMBDA0),
    arr("kK", [K[i, j] for i in range(N) for j in range(N)]),
    arr("kD", D),
    arr("kWStar", vec(W_STAR)),
    scalar("kPredStar", PRED_STAR),
    scalar("kEtaRichardson", ETA_PR),
    scalar("kKappaD", KAPPA_D),
    arr("kRichardson1", vec(PR[1])),
    arr("kRichardson10", vec(PR[10])),
    arr("kCg3", vec(CG3)),
    scalar("kEtaGd", ETA_GD),
    scalar("kBetaNesterov", BETA_NES),
    arr("kGd5", vec(GD5)),
    arr("kNesterov5", vec(NES5)),
    arr("kContractionR", R_VEC),
    scalar("kContractionEta", ETA_C),
    scalar("kContractionNorm", CONTRACTION),
    arr("kInexact3", vec(INEXACT3)),
    arr("kPrefixDirect", PREFIX),
    arr("kReadinK", K_CACHE),
    scalar("kReadinKQuery", K_QUERY),
    "",
    "// Constants for lambda0 = 0.1, B_y = 2, kappa_min = e^-2, c = 0.5, N = 10.",
    scalar("kC0", CONST["c0"]),
    scalar("kResidualFactor", CONST["rf"]),
    scalar("kBw", CONST["bw"]),
    scalar("kBwTilde", CONST["bwt"]),
    scalar("kCsys", CONST["csys"]),
    scalar("kBalpha", CONST["balpha"]),
    "// Step 5, ||A|| = 0.9, eta = 0.5, all levels 0.05.",
    scalar("kEnvelope", ENVELOPE),
    "",
    "// Plan for lambda0 = 0.1, N = 10, B_x = 1, v = 1, B_y = 2, c = 0.5, eps = 0.05.",
    scalar("kPlanEta", PLAN["eta"]),
    integer("kPlanL", PLAN["L"]),
    integer("kPlanFlip", PLAN["n_flip"]),
    integer("kPlanSq", PLAN["n_sq"]),
    integer("kPlanSqTilde", PLAN["n_sqt"]),
    integer("kPlanInv", PLAN["n_inv"]),
    integer("kPlanSqHat", PLAN["n_sqh"]),
    scalar("kPlanCsys", PLAN["csys"]),
    scalar("kPlanBw", PLAN["bw"]),
    scalar("kPlanBalpha", PLAN["balpha"]),
    "",
    "// Interpolants: flip(0.5, 0.01) at 0.3, inv(0.25, 0.01) at 0.4, square(2, 0.01) at 0.33.",
    scalar("kFlipAt", SPLINE["flip_at"]),
    scalar("kFlipSup", SPLINE["flip_sup"]),
    scalar("kInvAt", SPLINE["inv_at"]),
    scalar("kInvSup", SPLINE["inv_sup"]),
    scalar("kSqAt", SPLINE["sq_at"]),
    scalar("kSqSup", SPLINE["sq_sup"]),
    "",
    "}  // namespace oracle",
]
print("\n".join(lines))
