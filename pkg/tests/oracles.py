"""Independent brute-force references, written with plain Python loops.

These never call into emgpr's feature kernels; they restate each definition
literally so that the vectorised code can be checked against them.
"""
import bisect
import math
from fractions import Fraction


def mav(x):
    return sum(abs(v) for v in x) / len(x)


def mavs(x):
    h = len(x) // 2
    first, second = x[:h], x[h:]
    return sum(abs(v) for v in second) / len(second) - sum(abs(v) for v in first) / len(first)


def wl(x):
    return sum(abs(x[i] - x[i - 1]) for i in range(1, len(x)))


def zc(x, thr=0.0):
    n = 0
    for i in range(1, len(x)):
        if x[i - 1] * x[i] < 0 and abs(x[i - 1] - x[i]) >= thr:
            n += 1
    return n


def ssc(x, thr=0.0):
    n = 0
    for i in range(1, len(x) - 1):
        a = x[i] - x[i - 1]
        b = x[i] - x[i + 1]
        if ((a > 0 and b > 0) or (a < 0 and b < 0)) and a * b >= thr:
            n += 1
    return n


def rms(x):
    return math.sqrt(sum(v * v for v in x) / len(x))


def hist(x, bins=20, span=3.0):
    """Counts per bin, deciding membership with exact rational edges.

    sigma is the correctly rounded population standard deviation; the edges
    (2i/bins - 1) * span * sigma are then compared without rounding.
    """
    m = len(x)
    counts = [0] * bins
    if max(x) == min(x):  # sigma is exactly zero
        counts[bins // 2] = m
        return counts
    fx = [Fraction(v) for v in x]
    mu = sum(fx) / m
    var = sum((v - mu) ** 2 for v in fx) / m
    sigma = Fraction(math.sqrt(float(var)))
    scale = Fraction(span) * sigma
    edges = [scale * Fraction(2 * i - bins, bins) for i in range(1, bins)]
    for v in fx:
        # v equal to an inner edge belongs to the bin starting there
        b = bisect.bisect_right(edges, v)
        counts[b] += 1
    return counts


def window_starts(L, W, I):
    starts = []
    s = 0
    while s + W <= L:
        starts.append(s)
        s += I
    return starts


def best_gini_split(xs, ys):
    """Exhaustive single-feature split search; returns (threshold, weighted gini)."""
    def gini(labels):
        n = len(labels)
        if n == 0:
            return 0.0
        return 1.0 - sum((labels.count(c) / n) ** 2 for c in set(labels))

    values = sorted(set(xs))
    best = None
    for a, b in zip(values, values[1:]):
        thr = (a + b) / 2
        left = [y for x, y in zip(xs, ys) if x <= thr]
        right = [y for x, y in zip(xs, ys) if x > thr]
        score = (len(left) * gini(left) + len(right) * gini(right)) / len(xs)
        if best is None or score < best[1]:
            best = (thr, score)
    return best
