"""Straightforward numpy/scipy implementation of the fifteen SP 800-22 tests.

Used only to produce frozen reference values for the Rust tests. Written from
the published formulas, independently of the Rust code.

    python3 nist_oracle.py examples      # small hand examples
    python3 nist_oracle.py e             # first 10^6 bits of e, default parameters
"""
import json
import math
import sys

import numpy as np
from scipy.special import erfc, gammaincc, gammaln
from scipy.stats import norm


def bits_of(s):
    return np.array([int(c) for c in s], dtype=np.int64)


def frequency(x):
    s = np.sum(2 * x - 1)
    return [float(erfc(abs(s) / math.sqrt(len(x)) / math.sqrt(2)))]


def block_frequency(x, M):
    N = len(x) // M
    pis = x[: N * M].reshape(N, M).mean(axis=1)
    chi = 4 * M * np.sum((pis - 0.5) ** 2)
    return [float(gammaincc(N / 2, chi / 2))]


def runs(x):
    n = len(x)
    pi = x.mean()
    if abs(pi - 0.5) >= 2 / math.sqrt(n):
        return [0.0]
    v = 1 + int(np.sum(x[1:] != x[:-1]))
    return [float(erfc(abs(v - 2 * n * pi * (1 - pi)) / (2 * math.sqrt(2 * n) * pi * (1 - pi))))]


def longest_run(x):
    n = len(x)
    if n < 6272:
        M, lo, pi = 8, 1, [0.2148, 0.3672, 0.2305, 0.1875]
    elif n < 750000:
        M, lo, pi = 128, 4, [0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124]
    else:
        M, lo, pi = 10000, 10, [0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727]
    K = len(pi) - 1
    N = n // M
    nu = [0] * (K + 1)
    for b in range(N):
        s = "".join(map(str, x[b * M:(b + 1) * M]))
        longest = max(len(r) for r in s.split("0"))
        nu[min(max(longest, lo), lo + K) - lo] += 1
    chi = sum((nu[i] - N * pi[i]) ** 2 / (N * pi[i]) for i in range(K + 1))
    return [float(gammaincc(K / 2, chi / 2))]


def gf2_rank(mat):
    m = mat.copy() % 2
    rows, cols = m.shape
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if m[i, c]:
                piv = i
                break
        if piv is None:
            continue
        m[[r, piv]] = m[[piv, r]]
        for i in range(rows):
            if i != r and m[i, c]:
                m[i] ^= m[r]
        r += 1
        if r == rows:
            break
    return r


def rank_prob(r, M, Q):
    p = 2.0 ** (r * (Q + M - r) - M * Q)
    for i in range(r):
        p *= (1 - 2.0 ** (i - Q)) * (1 - 2.0 ** (i - M)) / (1 - 2.0 ** (i - r))
    return p


def rank(x, M=32):
    N = len(x) // (M * M)
    counts = [0, 0, 0]
    for k in range(N):
        r = gf2_rank(x[k * M * M:(k + 1) * M * M].reshape(M, M))
        counts[0 if r == M else 1 if r == M - 1 else 2] += 1
    p0, p1 = rank_prob(M, M, M), rank_prob(M - 1, M, M)
    probs = [p0, p1, 1 - p0 - p1]
    chi = sum((counts[i] - N * probs[i]) ** 2 / (N * probs[i]) for i in range(3))
    return [float(math.exp(-chi / 2))]


def dft(x):
    n = len(x)
    S = np.abs(np.fft.fft(2 * x - 1))[: n // 2]
    T = math.sqrt(math.log(1 / 0.05) * n)
    N0 = 0.95 * n / 2
    N1 = int(np.sum(S < T))
    d = (N1 - N0) / math.sqrt(n * 0.95 * 0.05 / 4)
    return [float(erfc(abs(d) / math.sqrt(2)))]


def window_values(x, m):
    n = len(x)
    v = np.zeros(n - m + 1, dtype=np.int64)
    for i in range(m):
        v = (v << 1) | x[i:n - m + 1 + i]
    return v


def aperiodic(m):
    out = []
    for v in range(1 << m):
        s = format(v, "0%db" % m)
        if all(s[k:] != s[:m - k] for k in range(1, m)):
            out.append(v)
    return out


def non_overlapping(x, m, N, templates):
    M = len(x) // N
    mu = (M - m + 1) / 2 ** m
    var = M * (1 / 2 ** m - (2 * m - 1) / 2 ** (2 * m))
    wv = [window_values(x[j * M:(j + 1) * M], m) for j in range(N)]
    out = []
    for t in templates:
        W = []
        for j in range(N):
            pos = np.nonzero(wv[j] == t)[0]
            count, nxt = 0, -1
            for p in pos:
                if p >= nxt:
                    count += 1
                    nxt = p + m
            W.append(count)
        chi = sum((w - mu) ** 2 / var for w in W)
        out.append(float(gammaincc(N / 2, chi / 2)))
    return out


def overlapping_pi(m, M, K):
    lam = (M - m + 1) / 2 ** m
    eta = lam / 2
    pi = []
    for u in range(K):
        if u == 0:
            pi.append(math.exp(-eta))
        else:
            pi.append(sum(math.exp(-eta - u * math.log(2) + l * math.log(eta) - gammaln(l + 1)
                                   + gammaln(u) - gammaln(l) - gammaln(u - l + 1)) for l in range(1, u + 1)))
    pi.append(1 - sum(pi))
    return pi


def overlapping(x, m, M, K):
    if (m, M, K) == (9, 1032, 5):
        pi = [0.364091, 0.185659, 0.139381, 0.100571, 0.0704323, 0.139865]
    else:
        pi = overlapping_pi(m, M, K)
    N = len(x) // M
    nu = [0] * (K + 1)
    target = (1 << m) - 1
    for j in range(N):
        c = int(np.sum(window_values(x[j * M:(j + 1) * M], m) == target))
        nu[min(c, K)] += 1
    chi = sum((nu[i] - N * pi[i]) ** 2 / (N * pi[i]) for i in range(K + 1))
    return [float(gammaincc(K / 2, chi / 2))]


EXPECTED = [0, 0.73264948, 1.5374383, 2.40160681, 3.31122472, 4.25342659, 5.2177052, 6.1962507,
            7.1836656, 8.1764248, 9.1723243, 10.170032, 11.168765, 12.168070, 13.167693, 14.167488, 15.167379]
VARIANCE = [0, 0.690, 1.338, 1.901, 2.358, 2.705, 2.954, 3.125, 3.238, 3.311, 3.356, 3.384, 3.401,
            3.410, 3.416, 3.419, 3.421]


def universal(x, L, Q):
    nblocks = len(x) // L
    K = nblocks - Q
    vals = window_values(x[: nblocks * L], L)[::L]
    T = {}
    s = 0.0
    for i, v in enumerate(vals, start=1):
        if i > Q:
            s += math.log2(i - T.get(int(v), 0))
        T[int(v)] = i
    fn = s / K
    c = 0.7 - 0.8 / L + (4 + 32 / L) * K ** (-3 / L) / 15
    sigma = c * math.sqrt(VARIANCE[L] / K)
    return [float(erfc(abs(fn - EXPECTED[L]) / (math.sqrt(2) * sigma)))]


def bm(s):
    n = len(s)
    C = np.zeros(n + 1, dtype=np.int64)
    B = np.zeros(n + 1, dtype=np.int64)
    C[0] = B[0] = 1
    L, m = 0, -1
    for N in range(n):
        d = (s[N] + int(np.dot(C[1:L + 1], s[N - L:N][::-1]))) % 2
        if d:
            T = C.copy()
            sh = N - m
            C[sh:] ^= B[: n + 1 - sh]
            if 2 * L <= N:
                L, m, B = N + 1 - L, N, T
    return L


def linear_complexity(x, M):
    N = len(x) // M
    mu = M / 2 + (9 + (-1) ** (M + 1)) / 36 - (M / 3 + 2 / 9) / 2 ** M
    pi = [0.010417, 0.03125, 0.125, 0.5, 0.25, 0.0625, 0.020833]
    edges = [-2.5, -1.5, -0.5, 0.5, 1.5, 2.5]
    nu = [0] * 7
    for j in range(N):
        L = bm(x[j * M:(j + 1) * M])
        T = (-1) ** M * (L - mu) + 2 / 9
        k = 0
        while k < 6 and T > edges[k]:
            k += 1
        nu[k] += 1
    chi = sum((nu[i] - N * pi[i]) ** 2 / (N * pi[i]) for i in range(7))
    return [float(gammaincc(3, chi / 2))]


def cyc_counts(x, m):
    if m == 0:
        return np.array([len(x)])
    ext = np.concatenate([x, x[: m - 1]])
    return np.bincount(window_values(ext, m), minlength=2 ** m)


def psi2(x, m):
    if m <= 0:
        return 0.0
    n = len(x)
    return 2 ** m / n * float(np.sum(cyc_counts(x, m).astype(float) ** 2)) - n


def serial(x, m):
    a, b, c = psi2(x, m), psi2(x, m - 1), psi2(x, m - 2)
    return [float(gammaincc(2 ** (m - 2), (a - b) / 2)), float(gammaincc(2 ** (m - 3), (a - 2 * b + c) / 2))]


def approximate_entropy(x, m):
    n = len(x)

    def phi(mm):
        c = cyc_counts(x, mm).astype(float) / n
        c = c[c > 0]
        return float(np.sum(c * np.log(c)))

    ap = phi(m) - phi(m + 1)
    chi = 2 * n * (math.log(2) - ap)
    return [float(gammaincc(2 ** (m - 1), chi / 2))]


def cusum(x):
    n = len(x)
    out = []
    for seq in (x, x[::-1]):
        z = int(np.max(np.abs(np.cumsum(2 * seq - 1))))
        s1 = 0.0
        for k in range(int((-n / z + 1) / 4), int((n / z - 1) / 4) + 1):
            s1 += norm.cdf((4 * k + 1) * z / math.sqrt(n)) - norm.cdf((4 * k - 1) * z / math.sqrt(n))
        s2 = 0.0
        for k in range(int((-n / z - 3) / 4), int((n / z - 1) / 4) + 1):
            s2 += norm.cdf((4 * k + 3) * z / math.sqrt(n)) - norm.cdf((4 * k + 1) * z / math.sqrt(n))
        out.append(float(1 - s1 + s2))
    return out


def cycles(x):
    S = np.cumsum(2 * x - 1)
    zeros = np.nonzero(S == 0)[0]
    bounds = [-1] + list(zeros)
    if S[-1] != 0:
        bounds.append(len(S) - 1)
    return S, [(bounds[i] + 1, bounds[i + 1] + 1) for i in range(len(bounds) - 1)]


def excursions(x, enforce=True):
    S, cyc = cycles(x)
    J = len(cyc)
    if enforce and J < max(0.005 * math.sqrt(len(x)), 500):
        return None
    out = []
    for st in [-4, -3, -2, -1, 1, 2, 3, 4]:
        a = abs(st)
        pi = [1 - 1 / (2 * a)] + [1 / (4 * a * a) * (1 - 1 / (2 * a)) ** (k - 1) for k in range(1, 5)]
        pi.append(1 / (2 * a) * (1 - 1 / (2 * a)) ** 4)
        nu = [0] * 6
        for lo, hi in cyc:
            nu[min(int(np.sum(S[lo:hi] == st)), 5)] += 1
        chi = sum((nu[k] - J * pi[k]) ** 2 / (J * pi[k]) for k in range(6))
        out.append(float(gammaincc(2.5, chi / 2)))
    return out


def excursions_variant(x, enforce=True):
    S, cyc = cycles(x)
    J = len(cyc)
    if enforce and J < max(0.005 * math.sqrt(len(x)), 500):
        return None
    out = []
    for st in list(range(-9, 0)) + list(range(1, 10)):
        xi = int(np.sum(S == st))
        out.append(float(erfc(abs(xi - J) / math.sqrt(2 * J * (4 * abs(st) - 2)))))
    return out


E100 = "1100100100001111110110101010001000100001011010001100001000110100110001001100011001100010100010111000"
LR128 = ("11001100000101010110110001001100111000000000001001001101010100010001001111010110100000001101011111001100"
         "111001101101100010110010")


def examples():
    b = bits_of
    return {
        "frequency_10": frequency(b("1011010101")),
        "frequency_100": frequency(b(E100)),
        "block_frequency_10_3": block_frequency(b("0110011010"), 3),
        "block_frequency_100_10": block_frequency(b(E100), 10),
        "runs_10": runs(b("1001101011")),
        "runs_100": runs(b(E100)),
        "longest_run_128": longest_run(b(LR128)),
        "dft_10": dft(b("1001010011")),
        "dft_100": dft(b(E100)),
        "non_overlapping_20": non_overlapping(b("10100100101110010110"), 3, 2, [1]),
        "overlapping_50": overlapping(b("10111011110010110100011100101110111110000101101001"), 2, 10, 2),
        "serial_10": serial(b("0011011101"), 3),
        "apen_10": approximate_entropy(b("0100110101"), 3),
        "apen_100": approximate_entropy(b(E100), 2),
        "cusum_10": cusum(b("1011010111")),
        "cusum_100": cusum(b(E100)),
        "excursions_10": excursions(b("0110110101"), enforce=False),
        "excursions_variant_10": excursions_variant(b("0110110101"), enforce=False),
        "bm_13": bm(b("1101011110001")),
    }


def e_bits(n):
    import mpmath as mp
    mp.mp.prec = n + 64
    v = int(mp.floor(mp.e * mp.mpf(2) ** (n - 2)))
    s = format(v, "b")
    assert len(s) == n
    return s


def full(x):
    return {
        "frequency": frequency(x),
        "block-frequency": block_frequency(x, 128),
        "runs": runs(x),
        "longest-run": longest_run(x),
        "rank": rank(x),
        "fft": dft(x),
        "non-overlapping-template": non_overlapping(x, 9, 8, aperiodic(9)),
        "overlapping-template": overlapping(x, 9, 1032, 5),
        "universal": universal(x, 7, 1280),
        "linear-complexity": linear_complexity(x, 500),
        "serial": serial(x, 16),
        "approximate-entropy": approximate_entropy(x, 10),
        "cumulative-sums": cusum(x),
        "random-excursions": excursions(x),
        "random-excursions-variant": excursions_variant(x),
    }


if __name__ == "__main__":
    what = sys.argv[1] if len(sys.argv) > 1 else "examples"
    if what == "examples":
        print(json.dumps(examples(), indent=1))
    elif what == "e":
        s = e_bits(1_000_000)
        if len(sys.argv) > 2:
            open(sys.argv[2], "w").write(s)
        print(json.dumps(full(bits_of(s)), indent=1))
