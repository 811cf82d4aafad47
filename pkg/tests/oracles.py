"""Independent reference implementations used only by the tests.

None of these share code with the package. They trade speed for being
obviously correct: DTW by enumerating every alignment, signatures by exact
rational summation straight from the defining sums.
"""

from fractions import Fraction
import itertools
import math

import numpy as np


def euclid(p, q):
    # same operation order as a plain sqrt(dx*dx + dy*dy + dz*dz)
    dx = p[0] - q[0]
    dy = p[1] - q[1]
    dz = p[2] - q[2]
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def brute_dtw(a, b):
    """Minimum over all monotone, endpoint-aligned alignments.

    Each alignment's cost is a left fold over its pairs in path order, which
    is the summation order a forward dynamic programme produces.
    """
    a = [tuple(map(float, p)) for p in a]
    b = [tuple(map(float, p)) for p in b]
    P, Q = len(a), len(b)
    d = [[euclid(a[i], b[j]) for j in range(Q)] for i in range(P)]
    best = math.inf
    stack = [(0, 0, d[0][0])]
    while stack:
        i, j, s = stack.pop()
        if i == P - 1 and j == Q - 1:
            best = min(best, s)
            continue
        for di, dj in ((1, 0), (0, 1), (1, 1)):
            ni, nj = i + di, j + dj
            if ni < P and nj < Q:
                stack.append((ni, nj, s + d[ni][nj]))
    return best


def count_alignments(P, Q):
    """Delannoy number D(P-1, Q-1): how many alignments brute_dtw visits."""
    m, n = P - 1, Q - 1
    return sum(math.comb(m, k) * math.comb(n, k) * 2 ** k for k in range(min(m, n) + 1))


def direct_signature(points, level):
    """Discrete signature evaluated term by term in exact arithmetic.

    Level 1 is x[N] - x[0]. Level m for word (i_1, ..., i_m) is
    sum_k S_{m-1}(i_1..i_{m-1})[k+1] * (x_{i_m}[k+1] - x_{i_m}[k]), where
    S_{m-1}[k+1] is the level below over the prefix ending at k+1. Returns
    float terms ordered (1, level 1, level 2, ...) with words in
    lexicographic order, plus the exact values.
    """
    pts = [[Fraction(float(v)) for v in p] for p in points]
    n = len(pts)

    def term(word, upto):
        # value of the word over points[0..upto]
        if len(word) == 1:
            return pts[upto][word[0]] - pts[0][word[0]]
        head, last = word[:-1], word[-1]
        return sum(
            (term(head, k + 1) * (pts[k + 1][last] - pts[k][last]) for k in range(upto)),
            Fraction(0),
        )

    exact = [Fraction(1)]
    for m in range(1, level + 1):
        for word in itertools.product(range(3), repeat=m):
            exact.append(term(word, n - 1))
    return np.array([float(v) for v in exact]), exact


def brute_closest(points, q, start=0):
    best, best_d = start, None
    for i in range(start, len(points)):
        d = sum((float(points[i][k]) - float(q[k])) ** 2 for k in range(3))
        if best_d is None or d < best_d:
            best, best_d = i, d
    return best


def reference_dtw_reward(window, demo):
    """Window-vs-segment reward built from brute_dtw."""
    i0 = brute_closest(demo, window[0])
    i1 = max(i0, brute_closest(demo, window[-1], i0))
    # 1 - tanh(c) rewritten as 2 / (exp(2c) + 1) so large costs keep precision
    c = brute_dtw(window, demo[i0: i1 + 1])
    return 2.0 / (math.exp(2.0 * c) + 1.0)
