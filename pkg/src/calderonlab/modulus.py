"""Integral moduli of continuity and the operators' interaction with them.

The modulus of exponent p of a field f at scale t is the supremum of
||f - tau_y f||_p over shifts |y| <= t.  On the grid the supremum runs over
a canonical nested family of lattice shifts: every lattice point up to a
small radius, then angularly subsampled rings.  Nestedness makes the
computed modulus exactly nondecreasing in t; angular subsampling keeps the
sweep affordable and underestimates the true supremum by at most the ring
discretization, which the stated tolerances absorb.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import TooFine
from .grid import Grid, GridField, fft

#: shifts with max(|a|,|b|) <= this many cells are enumerated exhaustively
_EXACT_CELLS = 10

#: angular samples per ring beyond the exhaustive regime
_RING_ANGLES = 64

#: rings per octave of radius
_RINGS_PER_OCTAVE = 4


@lru_cache(maxsize=16)
def _canonical_shifts(n: int, L: float, t_max: float) -> tuple[np.ndarray, np.ndarray]:
    """Ordered lattice shifts (k x 2 ints) and their lengths |y|, sorted by length."""
    h = 2.0 * L / n
    seen = set()
    shifts = []
    m = _EXACT_CELLS
    for a in range(-m, m + 1):
        for b in range(-m, m + 1):
            if (a, b) != (0, 0):
                seen.add((a, b))
                shifts.append((a, b))
    r = m * h
    while r < t_max:
        r *= 2.0 ** (1.0 / _RINGS_PER_OCTAVE)
        for ang in range(_RING_ANGLES):
            th = 2.0 * np.pi * ang / _RING_ANGLES
            a = int(round(r * np.cos(th) / h))
            b = int(round(r * np.sin(th) / h))
            if (a, b) != (0, 0) and (a, b) not in seen:
                seen.add((a, b))
                shifts.append((a, b))
    arr = np.array(shifts, dtype=int)
    lengths = h * np.hypot(arr[:, 0], arr[:, 1])
    keep = lengths <= t_max + 1e-12
    arr, lengths = arr[keep], lengths[keep]
    order = np.lexsort((arr[:, 1], arr[:, 0], lengths))
    return arr[order], lengths[order]


def _shift_norm(values: np.ndarray, shift: tuple[int, int], p: float, cell: float) -> float:
    diff = values - np.roll(values, shift, axis=(0, 1))
    a = np.abs(diff)
    if np.isinf(p):
        return float(a.max())
    return float((np.sum(a**p) * cell) ** (1.0 / p))


def omega_p(f: GridField, p: float, t: float) -> float:
    """sup over lattice shifts |y| <= t of ||f - tau_y f||_p (periodic shifts)."""
    h = f.grid.h
    if t < h:
        raise TooFine(f"t={t} is below the grid spacing h={h}")
    shifts, lengths = _canonical_shifts(f.grid.n, f.grid.half_width, max(t, h))
    best = 0.0
    for (a, b), ln in zip(shifts, lengths):
        if ln > t:
            break
        best = max(best, _shift_norm(f.values, (a, b), p, f.grid.cell_area))
    return best


@dataclass(frozen=True)
class ModulusCurve:
    """Sampled t -> omega_p f(t) on an increasing ladder."""

    exponent: float
    samples: tuple[tuple[float, float], ...]

    def ts(self) -> np.ndarray:
        return np.array([t for t, _ in self.samples])

    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.samples])

    def value_at(self, t: float) -> float:
        """Piecewise-linear readout in log t, clamped at the ladder ends."""
        ts, vs = self.ts(), self.values()
        if t <= ts[0]:
            return float(vs[0])
        if t >= ts[-1]:
            return float(vs[-1])
        return float(np.interp(np.log(t), np.log(ts), vs))

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("t,value\n")
            for t, v in self.samples:
                fh.write(f"{t!r},{v!r}\n")

    def fitted_slope(self, t_lo: float | None = None, t_hi: float | None = None) -> float:
        """Least-squares slope of log value against log t over the given window."""
        ts, vs = self.ts(), self.values()
        mask = vs > 0
        if t_lo is not None:
            mask &= ts >= t_lo
        if t_hi is not None:
            mask &= ts <= t_hi
        if mask.sum() < 2:
            return float("nan")
        return float(np.polyfit(np.log(ts[mask]), np.log(vs[mask]), 1)[0])


def dyadic_ladder(grid: Grid, t_min: float | None = None, t_max: float = 2.0) -> np.ndarray:
    """Dyadic t ladder from max(t_min, 2h) up to t_max."""
    lo = max(2.0 * grid.h if t_min is None else t_min, 2.0 * grid.h)
    ts = [t_max]
    while ts[-1] / 2.0 >= lo:
        ts.append(ts[-1] / 2.0)
    return np.array(sorted(ts))


def modulus_curve(
    f: GridField, p: float, t_min: float | None = None, t_max: float = 2.0
) -> ModulusCurve:
    """Sweep of omega_p over the dyadic ladder in a single pass over shifts."""
    ladder = dyadic_ladder(f.grid, t_min, t_max)
    shifts, lengths = _canonical_shifts(f.grid.n, f.grid.half_width, float(ladder[-1]))
    rung = np.searchsorted(ladder, lengths - 1e-12)
    best = np.zeros(len(ladder))
    for (a, b), r in zip(shifts, rung):
        if r >= len(ladder):
            continue
        v = _shift_norm(f.values, (a, b), p, f.grid.cell_area)
        if v > best[r]:
            best[r] = v
    running = np.maximum.accumulate(best)
    return ModulusCurve(p, tuple((float(t), float(v)) for t, v in zip(ladder, running)))


@dataclass(frozen=True)
class ModulusSpec:
    """A modulus of continuity: power t^s, log-power |log t|^(-a), or tabulated."""

    kind: str
    params: tuple[float, ...] = ()
    table: tuple[tuple[float, float], ...] = ()

    @staticmethod
    def power(s: float, scale: float = 1.0) -> "ModulusSpec":
        return ModulusSpec("power", (s, scale))

    @staticmethod
    def log_power(alpha: float, scale: float = 1.0) -> "ModulusSpec":
        return ModulusSpec("log_power", (alpha, scale))

    @staticmethod
    def tabulated(pairs) -> "ModulusSpec":
        pairs = tuple(sorted((float(t), float(v)) for t, v in pairs))
        return ModulusSpec("tabulated", (), pairs)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "power":
            s, c = self.params
            out = c * t**s
        elif self.kind == "log_power":
            a, c = self.params
            tt = np.minimum(t, 0.5)
            out = c * np.abs(np.log(tt)) ** (-a)
        elif self.kind == "tabulated":
            ts = np.array([p[0] for p in self.table])
            vs = np.array([p[1] for p in self.table])
            out = np.interp(t, ts, vs, left=vs[0] * t / ts[0] if ts[0] > 0 else vs[0])
        else:
            raise ValueError(f"unknown modulus kind {self.kind}")
        return float(out) if out.ndim == 0 else out

    def to_json(self) -> str:
        return json.dumps(
            {"kind": self.kind, "params": list(self.params), "table": [list(p) for p in self.table]},
            sort_keys=True,
        )

    @staticmethod
    def from_json(text: str) -> "ModulusSpec":
        obj = json.loads(text)
        return ModulusSpec(obj["kind"], tuple(obj["params"]), tuple(tuple(p) for p in obj["table"]))


def besov_seminorm(
    f: GridField,
    p: float,
    omega: ModulusSpec,
    t_max: float = 2.0,
    t_min: float | None = None,
) -> float:
    """sup over the dyadic ladder of omega_p f(t) / omega(t).

    Pass a fixed ``t_min`` when comparing across grid refinements, so the
    supremum runs over a common ladder.
    """
    curve = modulus_curve(f, p, t_min=t_min, t_max=t_max)
    ts = curve.ts()
    denom = np.asarray(omega(ts))
    if np.any(denom <= 0):
        raise ValueError("omega must be strictly positive on the ladder")
    return float(np.max(curve.values() / denom))


@dataclass(frozen=True)
class MembershipReport:
    ok: bool
    ellipticity_ok: bool
    support_ok: bool
    modulus_ok: bool
    first_violation_t: float | None
    max_modulus_ratio: float


def check_membership(
    field: GridField,
    p: float,
    omega: ModulusSpec,
    *,
    K: float | None = None,
    kappa: float | None = None,
    support_radius: float = 1.0,
    t_max: float = 2.0,
) -> MembershipReport:
    """Verify ellipticity, support and the pointwise modulus bound omega_p <= omega.

    Pass ``K`` for a conductivity gamma (checks gamma, 1/gamma <= K and
    gamma = 1 outside the support disk; the modulus is computed on gamma - 1,
    which shares it) or ``kappa`` for a Beltrami coefficient.
    """
    if (K is None) == (kappa is None):
        raise ValueError("pass exactly one of K or kappa")
    Z = field.grid.nodes()
    vals = field.values
    outside = np.abs(Z) > support_radius
    if K is not None:
        re = vals.real
        elliptic = bool(
            np.all(np.abs(vals.imag) < 1e-12) and np.all(re > 0)
            and re.max() <= K + 1e-12 and (1.0 / re).max() <= K + 1e-12
        )
        support = bool(np.max(np.abs(vals[outside] - 1.0), initial=0.0) <= 1e-12)
        probe = GridField(field.grid, vals - 1.0, check_finite=False)
    else:
        elliptic = bool(np.max(np.abs(vals)) <= kappa + 1e-12)
        support = bool(np.max(np.abs(vals[outside]), initial=0.0) <= 1e-12)
        probe = field
    curve = modulus_curve(probe, p, t_max=t_max)
    ts, vs = curve.ts(), curve.values()
    bound = np.asarray(omega(ts))
    bad = vs > bound + 1e-12
    first_t = float(ts[bad][0]) if np.any(bad) else None
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(bound > 0, vs / bound, np.inf)
    report = MembershipReport(
        ok=elliptic and support and not np.any(bad),
        ellipticity_ok=elliptic,
        support_ok=support,
        modulus_ok=not np.any(bad),
        first_violation_t=first_t,
        max_modulus_ratio=float(np.max(ratios)),
    )
    return report


def fourier_tail_check(f: GridField, p: float, R: float) -> tuple[float, float]:
    """Both sides of the tail bound ||fhat chi_{|xi|>R}||_{p'} <= C(p) omega_p f(1/R)."""
    if not (1.0 < p <= 2.0):
        raise ValueError("p must lie in (1, 2]")
    if R > f.grid.max_frequency:
        raise ValueError(f"R={R} beyond the resolvable frequency {f.grid.max_frequency}")
    pprime = p / (p - 1.0)
    F = fft(f)
    Xi = F.xi()
    tail = np.abs(F.values[np.abs(Xi) > R])
    dxi = np.pi / (2.0 * f.grid.half_width)
    if np.isinf(pprime):
        lhs = float(tail.max(initial=0.0))
    else:
        lhs = float((np.sum(tail**pprime) * dxi * dxi) ** (1.0 / pprime))
    rhs = omega_p(f, p, 1.0 / R)
    return lhs, rhs


def averaged_modulus_equiv(f: GridField, p: float, t: float) -> tuple[float, float]:
    """Supremum form versus disk-averaged form of the modulus at scale t.

    The averaged form is the double integral mean of |f(x) - f(y)|^p over
    |x - y| <= t, computed by weighting each sampled ring of shifts with its
    annulus area share.
    """
    h = f.grid.h
    if t < 2.0 * h:
        raise TooFine(f"t={t} is below 2h={2 * h}")
    shifts, lengths = _canonical_shifts(f.grid.n, f.grid.half_width, t)
    keep = lengths <= t
    shifts, lengths = shifts[keep], lengths[keep]
    sup_form = 0.0
    powers = np.empty(len(shifts))
    for i, (a, b) in enumerate(shifts):
        v = _shift_norm(f.values, (a, b), p, f.grid.cell_area)
        sup_form = max(sup_form, v)
        powers[i] = v**p
    # ring weights: each shift represents the annulus slice around its radius
    edges = np.concatenate([[0.0], np.sort(np.unique(lengths)), [t]])
    weights = np.empty(len(shifts))
    for i, ln in enumerate(lengths):
        j = np.searchsorted(edges, ln)
        lo = 0.5 * (edges[j - 1] + ln)
        hi = 0.5 * (ln + edges[j + 1]) if j + 1 < len(edges) else t
        ring_area = np.pi * (hi**2 - lo**2)
        weights[i] = ring_area / np.sum(lengths == ln)
    # the y = 0 center contributes zero difference over a cell-sized disk
    total_area = np.pi * t**2
    avg_p = np.sum(weights * powers) / total_area
    return sup_form, float(avg_p ** (1.0 / p))


def cauchy_kernel_field(grid: Grid) -> GridField:
    """The truncated Cauchy kernel Phi sampled on the grid (p.v. value 0 at z=0)."""
    Z = grid.nodes()
    vals = np.zeros(grid.shape, dtype=np.complex128)
    mask = (np.abs(Z) < 4.0) & (np.abs(Z) > 0)
    vals[mask] = 1.0 / (np.pi * Z[mask])
    return GridField(grid, vals)
