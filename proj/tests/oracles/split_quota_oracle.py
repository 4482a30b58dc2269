#!/usr/bin/env python3
"""Independent oracle for the per-cell train quota of the stratified split.

Enumerates every way of handing out the leftover train slots (one per cell at
most) and keeps the assignment with the largest total fractional part; among
equals, the lexicographically earliest cells win. Exact rational arithmetic.
"""
from fractions import Fraction
from itertools import combinations
import math


def quota(sizes, ratio):
    r = Fraction(ratio)
    exact = [r * s for s in sizes]
    base = [math.floor(e) for e in exact]
    frac = [e - b for e, b in zip(exact, base)]
    total = sum(sizes)
    target = math.floor(r * total + Fraction(1, 2))
    k = target - sum(base)
    best = None
    for chosen in combinations(range(len(sizes)), k):
        if any(frac[c] == 0 and base[c] == sizes[c] for c in chosen):
            continue
        key = (sum(frac[c] for c in chosen), [-c for c in chosen])
        if best is None or key > best[0]:
            best = (key, chosen)
    out = list(base)
    for c in best[1]:
        out[c] += 1
    return out


CASES = [
    ([154, 154, 168, 168, 108, 108], "0.8"),
    ([10, 7, 3, 6], "0.7"),
    ([13, 11, 9], "0.5"),
    ([5, 5, 5, 5, 5], "0.3"),
    ([2, 3, 4, 5, 6, 7], "0.55"),
]

if __name__ == "__main__":
    for sizes, ratio in CASES:
        print(sizes, ratio, quota(sizes, ratio))
