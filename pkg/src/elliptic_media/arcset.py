"""Finite unions of arcs on the unit circle.

Sets of ellipticity directions are stored as circle arcs with no seam; the
split into intervals of [-pi, pi] happens only when the set is serialized.

Boolean operations use a breakpoint sweep: every arc endpoint of the inputs
becomes a breakpoint, the circle is cut into alternating points and open
segments, and membership of each piece is decided symbolically from
breakpoint indices. Openness flags are therefore handled exactly, and the
only tolerance is the one used to identify nearby endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi
ANGLE_TOL = 1e-9


def canonicalize(v: float) -> float:
    """Map an angle to [-pi, pi]; values congruent to pi map to +pi."""
    v = float(v)
    if not math.isfinite(v):
        raise ValueError(f"angle must be finite, got {v!r}")
    r = math.fmod(v + math.pi, TWO_PI)
    if r <= 0.0:
        r += TWO_PI
    out = r - math.pi
    if out <= -math.pi:
        out = math.pi
    return out


def _mod2pi(v: float) -> float:
    r = math.fmod(v, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    if r >= TWO_PI:
        r = 0.0
    return r


@dataclass(frozen=True)
class Arc:
    """Counterclockwise arc from ``start`` spanning ``width`` radians.

    ``width`` is 0 only for a single closed point and 2*pi only for the
    circle minus the point ``start`` (both ends open).
    """

    start: float
    width: float
    start_closed: bool = False
    end_closed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "start", canonicalize(self.start))
        w = float(self.width)
        if not (0.0 <= w <= TWO_PI) or not math.isfinite(w):
            raise ValueError(f"arc width must lie in [0, 2pi], got {w!r}")
        object.__setattr__(self, "width", w)

    @property
    def end(self) -> float:
        return canonicalize(self.start + self.width)

    def contains(self, theta: float, tol: float = ANGLE_TOL) -> bool:
        d = _mod2pi(canonicalize(theta) - self.start)
        at_start = d < tol or TWO_PI - d < tol
        at_end = abs(d - self.width) < tol or (self.width > TWO_PI - tol and at_start)
        if at_start and at_end:
            return self.start_closed or self.end_closed
        if at_start:
            return self.start_closed
        if at_end:
            return self.end_closed
        return d < self.width


@dataclass(frozen=True)
class ArcSet:
    """Normalized finite union of disjoint, non-adjacent arcs.

    Build instances with :meth:`from_arcs`, :meth:`interval` or the algebra
    below; the constructor itself trusts its input.
    """

    arcs: tuple[Arc, ...] = ()
    full: bool = False

    # -- construction -----------------------------------------------------

    @classmethod
    def empty(cls) -> ArcSet:
        return cls()

    @classmethod
    def full_circle(cls) -> ArcSet:
        return cls((), True)

    @classmethod
    def from_arcs(cls, arcs: Iterable[Arc]) -> ArcSet:
        return _combine([list(arcs)], [False], lambda m: m[0])

    @classmethod
    def interval(cls, lo: float, hi: float, lo_closed: bool = False, hi_closed: bool = False) -> ArcSet:
        """Set swept counterclockwise from ``lo`` to ``hi`` on the real line.

        ``hi - lo`` must lie in [0, 2pi]; an empty open interval gives the
        empty set and a width of 2pi with both ends closed the full circle.
        """
        w = hi - lo
        if w < -ANGLE_TOL or w > TWO_PI + ANGLE_TOL:
            raise ValueError(f"interval width {w!r} outside [0, 2pi]")
        w = min(max(w, 0.0), TWO_PI)
        if w < ANGLE_TOL and not (lo_closed and hi_closed):
            return cls.empty()
        if w > TWO_PI - ANGLE_TOL:
            if lo_closed or hi_closed:
                return cls.full_circle()
            return cls.from_arcs([Arc(lo, TWO_PI)])
        return cls.from_arcs([Arc(lo, w, lo_closed, hi_closed)])

    @classmethod
    def open_interval(cls, lo: float, hi: float) -> ArcSet:
        return cls.interval(lo, hi)

    # -- queries ----------------------------------------------------------

    @property
    def is_empty(self) -> bool:
        return not self.full and not self.arcs

    def __bool__(self) -> bool:
        return not self.is_empty

    def __len__(self) -> int:
        return len(self.arcs)

    def contains(self, theta: float) -> bool:
        if self.full:
            return True
        return any(a.contains(theta) for a in self.arcs)

    __contains__ = contains

    def contains_many(self, thetas) -> np.ndarray:
        """Vectorized :meth:`contains` over an array of angles."""
        t = np.asarray(thetas, dtype=float)
        if self.full:
            return np.ones(t.shape, dtype=bool)
        out = np.zeros(t.shape, dtype=bool)
        for a in self.arcs:
            d = np.mod(t - a.start, TWO_PI)
            at_start = (d < ANGLE_TOL) | (TWO_PI - d < ANGLE_TOL)
            at_end = np.abs(d - a.width) < ANGLE_TOL
            if a.width > TWO_PI - ANGLE_TOL:
                at_end |= at_start
            inner = ~at_start & ~at_end & (d < a.width)
            hit = inner | (at_start & a.start_closed) | (at_end & a.end_closed)
            out |= hit
        return out

    def measure(self) -> float:
        if self.full:
            return TWO_PI
        return sum(a.width for a in self.arcs)

    # -- algebra ----------------------------------------------------------

    def union(self, other: ArcSet) -> ArcSet:
        return _combine([self._as_list(), other._as_list()], [self.full, other.full], any)

    def intersect(self, other: ArcSet) -> ArcSet:
        return _combine([self._as_list(), other._as_list()], [self.full, other.full], all)

    def complement(self) -> ArcSet:
        return _combine([self._as_list()], [self.full], lambda m: not m[0])

    def difference(self, other: ArcSet) -> ArcSet:
        return _combine(
            [self._as_list(), other._as_list()], [self.full, other.full], lambda m: m[0] and not m[1]
        )

    def negate(self) -> ArcSet:
        if self.full:
            return self
        return ArcSet.from_arcs(
            Arc(-(a.start + a.width), a.width, a.end_closed, a.start_closed) for a in self.arcs
        )

    def shift(self, beta: float) -> ArcSet:
        """Set of ``theta`` such that ``theta + beta`` is in ``self``."""
        if not math.isfinite(beta):
            raise ValueError("shift must be finite")
        if self.full:
            return self
        return ArcSet.from_arcs(
            Arc(a.start - beta, a.width, a.start_closed, a.end_closed) for a in self.arcs
        )

    __or__ = union
    __and__ = intersect
    __invert__ = complement
    __neg__ = negate

    def _as_list(self) -> list[Arc]:
        return list(self.arcs)

    # -- comparison -------------------------------------------------------

    def isclose(self, other: ArcSet, tol: float = ANGLE_TOL) -> bool:
        return self.endpoint_distance(other, flags=True) <= tol

    def endpoint_distance(self, other: ArcSet, flags: bool = False) -> float:
        """Largest endpoint displacement between two sets with matching arcs.

        Returns ``inf`` if the arc counts differ (or flags differ, when
        ``flags`` is set). Arcs are paired by nearest start.
        """
        if self.full or other.full:
            return 0.0 if self.full and other.full else math.inf
        if len(self.arcs) != len(other.arcs):
            return math.inf
        if not self.arcs:
            return 0.0
        remaining = list(other.arcs)
        worst = 0.0
        for a in self.arcs:
            j = min(range(len(remaining)), key=lambda k: _circ_dist(a.start, remaining[k].start))
            b = remaining.pop(j)
            if flags and (a.start_closed != b.start_closed or a.end_closed != b.end_closed):
                return math.inf
            if abs(a.width - b.width) > math.pi:
                return math.inf
            worst = max(
                worst,
                _circ_dist(a.start, b.start),
                _circ_dist(a.start + a.width, b.start + b.width),
            )
        return worst

    # -- presentation -----------------------------------------------------

    def intervals(self) -> list[tuple[float, float, bool, bool]]:
        """Presentation as intervals of [-pi, pi], split at the seam, sorted."""
        if self.full:
            return [(-math.pi, math.pi, True, True)]
        out = []
        for a in self.arcs:
            lo = a.start
            if lo == math.pi and a.width > 0.0:
                # starts on the seam: present from the -pi side
                lo = -math.pi
            hi = lo + a.width
            if hi <= math.pi:
                out.append((lo, hi, a.start_closed, a.end_closed))
            else:
                out.append((lo, math.pi, a.start_closed, True))
                out.append((-math.pi, hi - TWO_PI, True, a.end_closed))
        return sorted(out, key=lambda t: (t[0], t[1]))

    def to_json(self) -> list[dict]:
        return [
            {"start": lo, "end": hi, "start_closed": lc, "end_closed": hc}
            for lo, hi, lc, hc in self.intervals()
        ]

    @classmethod
    def from_json(cls, data: Sequence[dict]) -> ArcSet:
        out = cls.empty()
        for item in data:
            out = out.union(
                cls.interval(
                    float(item["start"]),
                    float(item["end"]),
                    bool(item.get("start_closed", False)),
                    bool(item.get("end_closed", False)),
                )
            )
        return out

    def __str__(self) -> str:
        if self.is_empty:
            return "{}"
        parts = []
        for lo, hi, lc, hc in self.intervals():
            parts.append(f"{'[' if lc else ']'}{lo:.6g}, {hi:.6g}{']' if hc else '['}")
        return " U ".join(parts)


def _circ_dist(a: float, b: float) -> float:
    d = _mod2pi(a - b)
    return min(d, TWO_PI - d)


def _cluster(values: list[float], tol: float) -> tuple[list[float], Callable[[float], int]]:
    """Merge breakpoints closer than ``tol`` (circularly); return reps and a lookup."""
    vals = sorted(set(values))
    groups: list[list[float]] = []
    for v in vals:
        if groups and v - groups[-1][-1] < tol:
            groups[-1].append(v)
        else:
            groups.append([v])
    if len(groups) > 1 and (groups[0][0] + TWO_PI) - groups[-1][-1] < tol:
        # wrap-around cluster near the seam; keep +pi as representative when present
        last = groups.pop()
        groups[0] = last + groups[0]
    reps = []
    index: dict[float, int] = {}
    for k, g in enumerate(groups):
        rep = math.pi if any(abs(x - math.pi) < tol for x in g) and g[0] > 0 else g[0]
        rep = canonicalize(rep)
        reps.append(rep)
        for x in g:
            index[x] = k
    # keep reps ordered counterclockwise from the smallest
    order = sorted(range(len(reps)), key=lambda k: _mod2pi(reps[k] + math.pi))
    remap = {old: new for new, old in enumerate(order)}
    reps = [reps[k] for k in order]
    return reps, (lambda x: remap[index[x]])


def _combine(
    inputs: list[list[Arc]], fulls: list[bool], op: Callable[[list[bool]], bool]
) -> ArcSet:
    """Evaluate a pointwise boolean ``op`` over several arc lists."""
    raw: list[float] = []
    for arcs in inputs:
        for a in arcs:
            raw.append(a.start)
            raw.append(canonicalize(a.start + a.width))
    if not raw:
        m = op(list(fulls))
        return ArcSet.full_circle() if m else ArcSet.empty()

    reps, idx = _cluster(raw, ANGLE_TOL)
    m = len(reps)
    n_pieces = 2 * m  # piece 2k: point k; piece 2k+1: open segment (k, k+1)

    masks = []
    for arcs, full in zip(inputs, fulls):
        mask = [full] * n_pieces
        for a in arcs:
            i = idx(a.start)
            j = idx(canonicalize(a.start + a.width))
            if i == j:
                if a.width < math.pi:
                    # collapsed to a point
                    if a.start_closed and a.end_closed:
                        mask[2 * i] = True
                    continue
                span = m  # wraps the whole circle
            else:
                span = (j - i) % m
            if a.start_closed:
                mask[2 * i] = True
            for s in range(span):
                k = (i + s) % m
                mask[2 * k + 1] = True
                if s > 0:
                    mask[2 * k] = True
            if a.end_closed:
                mask[2 * j] = True
        masks.append(mask)

    result = [op([mk[p] for mk in masks]) for p in range(n_pieces)]
    if all(result):
        return ArcSet.full_circle()
    if not any(result):
        return ArcSet.empty()

    # walk runs of True pieces starting just after a False piece
    first_false = result.index(False)
    arcs: list[Arc] = []
    p = first_false + 1
    count = 0
    while count < n_pieces:
        q = p % n_pieces
        if not result[q]:
            p += 1
            count += 1
            continue
        run_start = p
        while result[p % n_pieces] and count < n_pieces:
            p += 1
            count += 1
        run_end = p - 1
        s_piece = run_start % n_pieces
        e_piece = run_end % n_pieces
        s_pt = s_piece // 2
        start_closed = s_piece % 2 == 0
        if e_piece % 2 == 0:
            e_pt = e_piece // 2
            end_closed = True
        else:
            e_pt = (e_piece // 2 + 1) % m
            end_closed = False
        start = reps[s_pt]
        width = _mod2pi(reps[e_pt] - start)
        if width < ANGLE_TOL and not (run_end == run_start and start_closed):
            # run covers every piece but one point
            width = TWO_PI
        arcs.append(Arc(start, width, start_closed, end_closed))
    arcs.sort(key=lambda a: _mod2pi(a.start + math.pi))
    return ArcSet(tuple(arcs))


def union_all(sets: Iterable[ArcSet]) -> ArcSet:
    out = ArcSet.empty()
    for s in sets:
        out = out.union(s)
    return out


def intersect_all(sets: Iterable[ArcSet]) -> ArcSet:
    out = ArcSet.full_circle()
    for s in sets:
        out = out.intersect(s)
    return out
