"""Difference-bound matrices with integer bounds and a strictness bit.

A bound ``(c, <=)`` is encoded as the integer ``2c + 1`` and ``(c, <)`` as
``2c``, so that the usual order on bounds is the integer order. ``INF``
stands for "no bound". A DBM of dimension ``d`` is a flat tuple of ``d*d``
encoded bounds, entry ``i*d + j`` bounding ``x_i - x_j``; index 0 is the
reference clock (always 0).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

INF = 1 << 60
LE_ZERO = 1
LT_ZERO = 0


def bound(c: int, strict: bool = False) -> int:
    return 2 * c + (0 if strict else 1)


def decode(b: int):
    """``(value, strict)`` or None for INF."""
    if b >= INF:
        return None
    return b >> 1, not (b & 1)


def add(a: int, b: int) -> int:
    if a >= INF or b >= INF:
        return INF
    return (((a >> 1) + (b >> 1)) << 1) | (a & b & 1)


@dataclass(frozen=True)
class Dbm:
    dim: int
    m: tuple

    def __str__(self) -> str:
        rows = []
        for i in range(self.dim):
            cells = []
            for j in range(self.dim):
                b = decode(self.m[i * self.dim + j])
                cells.append("inf" if b is None else f"{'<' if b[1] else '<='}{b[0]}")
            rows.append(" ".join(f"{c:>6}" for c in cells))
        return "\n".join(rows)


def zero(dim: int) -> Dbm:
    """All clocks equal to 0."""
    return Dbm(dim, (LE_ZERO,) * (dim * dim))


def universe(dim: int) -> Dbm:
    m = [INF] * (dim * dim)
    for i in range(dim):
        m[i * dim + i] = LE_ZERO
        m[i] = LE_ZERO  # 0 - x_i <= 0
    return Dbm(dim, tuple(m))


def _close(m: list, d: int) -> bool:
    """Floyd-Warshall in place; returns False if a negative cycle shows up."""
    for k in range(d):
        rk = k * d
        for i in range(d):
            ri = i * d
            mik = m[ri + k]
            if mik >= INF:
                continue
            for j in range(d):
                mkj = m[rk + j]
                if mkj >= INF:
                    continue
                s = (((mik >> 1) + (mkj >> 1)) << 1) | (mik & mkj & 1)
                if s < m[ri + j]:
                    m[ri + j] = s
        if m[rk + k] < LE_ZERO:
            return False
    return all(m[i * d + i] >= LE_ZERO for i in range(d))


def canonicalize(z: Dbm) -> Dbm | None:
    """Tightest equivalent DBM, or None if the zone is empty."""
    m = list(z.m)
    if not _close(m, z.dim):
        return None
    return Dbm(z.dim, tuple(m))


def is_empty(z: Dbm | None) -> bool:
    if z is None:
        return True
    m = list(z.m)
    return not _close(m, z.dim)


def up(z: Dbm) -> Dbm:
    d = z.dim
    m = list(z.m)
    for i in range(1, d):
        m[i * d] = INF
    return Dbm(d, tuple(m))


def _tighten(m: list, d: int, i: int, j: int, b: int) -> bool:
    """Add ``x_i - x_j <= b`` to a closed matrix and re-close in O(d^2)."""
    if b >= m[i * d + j]:
        return True
    if add(m[j * d + i], b) < LE_ZERO:
        return False
    m[i * d + j] = b
    for k in range(d):
        mki = m[k * d + i]
        if mki >= INF:
            continue
        via = add(mki, b)
        rk = k * d
        for l in range(d):
            cand = add(via, m[j * d + l])
            if cand < m[rk + l]:
                m[rk + l] = cand
    return True


def constrain(z: Dbm, i: int, j: int, b: int) -> Dbm | None:
    """Intersect a canonical DBM with ``x_i - x_j (b)``; None if that empties it."""
    if not (0 <= i < z.dim and 0 <= j < z.dim):
        raise ValueError(f"clock index out of range for dimension {z.dim}")
    m = list(z.m)
    if not _tighten(m, z.dim, i, j, b):
        return None
    return Dbm(z.dim, tuple(m))


def constrain_clock(z: Dbm, clock: int, rel: str, c: int) -> Dbm | None:
    """Intersect with ``x_clock rel c`` (a valuated single-clock inequality)."""
    if z is None:
        return None
    if rel in ("<", "<=", "="):
        z = constrain(z, clock, 0, bound(c, rel == "<"))
        if z is None:
            return None
    if rel in (">", ">=", "="):
        z = constrain(z, 0, clock, bound(-c, rel == ">"))
    return z


def reset_clocks(z: Dbm, clocks) -> Dbm:
    """Set the given clock indices to 0 (keeps canonical form)."""
    d = z.dim
    m = list(z.m)
    for x in clocks:
        if not 0 < x < d:
            raise ValueError(f"clock index {x} out of range for dimension {d}")
        for j in range(d):
            m[x * d + j] = m[j]          # x - y <= 0 - y
            m[j * d + x] = m[j * d]      # y - x <= y - 0
        m[x * d + x] = LE_ZERO
    return Dbm(d, tuple(m))


def includes(big: Dbm, small: Dbm) -> bool:
    """True iff zone ``small`` is a subset of ``big`` (both canonical)."""
    if big.dim != small.dim:
        raise ValueError("dimension mismatch")
    return all(s <= b for s, b in zip(small.m, big.m))


def extrapolate(z: Dbm, k, diagonal: bool = True) -> Dbm:
    """Max-constant normalization.

    ``k`` is either one bound shared by all clocks or a sequence of per-clock
    bounds indexed like the matrix (entry 0 ignored). Plain mode drops bounds
    above ``k`` and relaxes those below ``-k``; the diagonal mode also forgets
    every difference involving a clock already known to exceed its bound.
    Both stay within the region closure, so every discrete path of the
    abstract graph is realizable.
    """
    d = z.dim
    if isinstance(k, int):
        ks = [k] * d
    else:
        ks = list(k)
        if len(ks) != d:
            raise ValueError("dimension mismatch")
    his = [2 * c + 1 for c in ks]
    los = [-2 * c for c in ks]
    m = list(z.m)
    old = z.m
    big = [False] * d
    if diagonal:
        for i in range(1, d):
            big[i] = old[i] < los[i]  # 0 - x_i < -k_i, i.e. x_i > k_i
    changed = False
    for i in range(d):
        ri = i * d
        for j in range(d):
            if i == j:
                continue
            b = old[ri + j]
            if b >= INF:
                continue
            if i and (b > his[i] or big[i] or big[j]):
                nb = INF
            elif b < los[j]:
                nb = los[j]
            else:
                continue
            m[ri + j] = nb
            changed = True
    if not changed:
        return z
    _close(m, d)
    return Dbm(d, tuple(m))


def permute(z: Dbm, order) -> Dbm:
    """Reorder clocks: new clock ``r`` is old clock ``order[r]`` (order[0] == 0)."""
    d = z.dim
    m = z.m
    return Dbm(d, tuple(m[order[i] * d + order[j]] for i in range(d) for j in range(d)))


def contains_point(z: Dbm, values) -> bool:
    """Membership test for a concrete valuation (``values[0]`` is ignored)."""
    d = z.dim
    vals = [Fraction(0)] + [Fraction(v) for v in values[1:]]
    for i in range(d):
        for j in range(d):
            b = decode(z.m[i * d + j])
            if b is None:
                continue
            diff = vals[i] - vals[j]
            if diff > b[0] or (b[1] and diff == b[0]):
                return False
    return True
