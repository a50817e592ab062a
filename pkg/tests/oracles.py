"""Brute-force homology oracles written straight from structure constants.

These share nothing with the cyclic-object code: chains are plain tensor
powers A^(x)(n+1) indexed by tuples, boundaries are assembled entry by entry.
"""

from itertools import product

from ncaffine.exactlin import rank


def _mult(a, i, j):
    return a.table[i][j]


def _index(t, d):
    k = 0
    for i in t:
        k = k * d + i
    return k


def hochschild_b(a, n):
    """b: A^(x)(n+1) -> A^(x)n with the usual alternating sum."""
    f = a.field
    d = a.dim
    rows, cols = d ** n, d ** (n + 1)
    m = f.zeros(rows, cols)
    for t in product(range(d), repeat=n + 1):
        c = _index(t, d)
        for i in range(n):
            sign = f.one if i % 2 == 0 else -f.one
            for k, v in _mult(a, t[i], t[i + 1]):
                r = _index(t[:i] + (k,) + t[i + 2:], d)
                m.m[r, c] += sign * v
        sign = f.one if n % 2 == 0 else -f.one
        for k, v in _mult(a, t[n], t[0]):
            r = _index((k,) + t[1:n], d)
            m.m[r, c] += sign * v
    return m


def hh_dims(a, top):
    """dim HH_n for n = 0..top from the bar (Hochschild) complex."""
    d = a.dim
    ranks = [0] + [rank(hochschild_b(a, n)) for n in range(1, top + 2)]
    return [d ** (n + 1) - ranks[n] - ranks[n + 1] for n in range(top + 1)]


def _cyclic_quotient(a, n):
    """Projection A^(x)(n+1) -> coinvariants of the signed rotation, as a matrix."""
    f = a.field
    d = a.dim
    seen = {}
    orbits = []
    for t in product(range(d), repeat=n + 1):
        if t in seen:
            continue
        orbit = []
        cur, sign = t, 1
        zero = False
        for _ in range(n + 1):
            if cur in seen and seen[cur][0] == len(orbits):
                if seen[cur][1] != sign:
                    zero = True
                break
            seen[cur] = (len(orbits), sign)
            orbit.append(cur)
            cur = (cur[-1],) + cur[:-1]
            if n % 2 == 1:
                sign = -sign
        orbits.append((orbit, zero))
    live = [k for k, (_, z) in enumerate(orbits) if not z]
    pos = {k: i for i, k in enumerate(live)}
    proj = f.zeros(len(live), d ** (n + 1))
    for t, (k, sign) in seen.items():
        if k in pos:
            proj.m[pos[k], _index(t, d)] = f.one if sign == 1 else -f.one
    return proj


def hc_dims(a, top):
    """dim HC_n over a field of characteristic 0 from Connes' complex."""
    quots = [_cyclic_quotient(a, n) for n in range(top + 2)]
    ranks = [0]
    for n in range(1, top + 2):
        # b descends to coinvariants; compute it on representatives
        full = quots[n - 1] @ hochschild_b(a, n)
        ranks.append(rank(full))
    return [quots[n].rows - ranks[n] - ranks[n + 1] for n in range(top + 1)]
