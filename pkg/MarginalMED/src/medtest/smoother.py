#!/usr/bin/env python3
"""
Bivariate local-linear smoothing of subject-pair responses, evaluated on
the diagonal t1 = t2 = t.

For a grid point the smoother solves the 3-parameter weighted least
squares problem

    min  sum_pairs  w_a K((T_a - t1)/h1) w_b K((T_b - t2)/h2)
                    [r(z_a, z_b) - b0 - b1 (T_a - t1)/h1 - b2 (T_b - t2)/h2]^2

and keeps the intercept b0. Slopes are fitted on the scaled offsets, which
leaves b0 unchanged and keeps the normal equations well scaled. Point
weights w are 1/N_i of the owning subject.

Moments that do not involve the response factorize over the two windows.
For the absolute-difference response the double sums are evaluated with
sorted prefix sums in O(W log W); same-subject pairs of a within-sample
surface are subtracted with the same routine grouped by subject.
"""

import logging
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

from .errors import DataError, DegenerateWindowError
from .models.dataset import SubjectRecord, TwoSampleDataset
from .models.results import DiagonalCurve

logger = logging.getLogger(__name__)

Response = Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]

MOMENT_KEYS_U = ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))


class KernelFamily(str, Enum):
    EPANECHNIKOV = "epanechnikov"
    QUARTIC = "quartic"
    TRIWEIGHT = "triweight"


# (constant, power) of c * (1 - u^2)^power on [-1, 1]
_KERNEL_FORMS = {
    KernelFamily.EPANECHNIKOV: (0.75, 1),
    KernelFamily.QUARTIC: (15.0 / 16.0, 2),
    KernelFamily.TRIWEIGHT: (35.0 / 32.0, 3),
}


@dataclass(frozen=True)
class KernelSpec:
    """Symmetric polynomial kernel supported on [-1, 1]."""
    family: KernelFamily = KernelFamily.EPANECHNIKOV

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily(self.family))

    def __call__(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        const, power = _KERNEL_FORMS[self.family]
        inside = np.abs(u) < 1.0
        return np.where(inside, const * np.clip(1.0 - u * u, 0.0, None) ** power, 0.0)


def kernel_eval(kernel: KernelSpec, u: float) -> float:
    """K(u) for a single argument."""
    return float(kernel(u))


@dataclass(frozen=True)
class SmootherConfig:
    """Kernel, bandwidths (on the [0, 1] time scale), grid and degeneracy policy."""
    kernel: KernelSpec = field(default_factory=KernelSpec)
    h_x: float = 0.2
    h_y: float = 0.2
    grid_size: int = 101
    cond_tol: float = 1e-6
    expand_factor: float = 1.5
    max_expansions: int = 3
    h_noise: float = 0.1

    def __post_init__(self):
        if not isinstance(self.kernel, KernelSpec):
            object.__setattr__(self, "kernel", KernelSpec(self.kernel))
        for name in ("h_x", "h_y", "h_noise"):
            h = getattr(self, name)
            if not 0.0 < h <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1], got {h}")
        if self.grid_size < 2:
            raise ValueError(f"grid_size must be at least 2, got {self.grid_size}")
        if self.cond_tol <= 0:
            raise ValueError("cond_tol must be positive")
        if self.expand_factor <= 1.0:
            raise ValueError("expand_factor must exceed 1")
        if self.max_expansions < 0:
            raise ValueError("max_expansions must be non-negative")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.grid_size)

    def with_rate_rule(self, n: int, base: float = 0.2) -> "SmootherConfig":
        """Bandwidths base * (n / 100)^(-1/5), the n^(-1/5) rate."""
        h = min(1.0, base * (n / 100.0) ** (-0.2))
        return replace(self, h_x=h, h_y=h)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["kernel"] = self.kernel.family.value
        return out

    @classmethod
    def from_settings(cls, settings: dict, **overrides) -> "SmootherConfig":
        section = dict(settings.get("smoother", {}))
        section.update({k: v for k, v in overrides.items() if v is not None})
        known = {f for f in cls.__dataclass_fields__}
        kwargs = {k: v for k, v in section.items() if k in known}
        if "kernel" in kwargs:
            kwargs["kernel"] = KernelSpec(kwargs["kernel"])
        return cls(**kwargs)


class Surface(str, Enum):
    G1 = "G1"  # cross pairs, X against Y
    G2 = "G2"  # distinct X subjects
    G3 = "G3"  # distinct Y subjects


@dataclass(eq=False)
class PointSet:
    """Pooled observations of a group of subjects, sorted by time."""
    times: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    subjects: np.ndarray
    n_subjects: int

    @classmethod
    def from_subjects(cls, subjects: Sequence[SubjectRecord]) -> "PointSet":
        used = [s for s in subjects if s.n_points > 0]
        if not used:
            empty = np.empty(0)
            return cls(empty, empty, empty, np.empty(0, dtype=np.intp), 0)
        times = np.concatenate([s.times for s in used])
        values = np.concatenate([s.values for s in used])
        weights = np.concatenate([np.full(s.n_points, 1.0 / s.n_points) for s in used])
        owner = np.concatenate([np.full(s.n_points, i, dtype=np.intp) for i, s in enumerate(used)])
        order = np.lexsort((weights, values, times))
        owner = owner[order]
        # Subjects are numbered by their first sorted point, so every
        # per-subject reduction runs in an order fixed by the data alone
        first = np.unique(owner, return_index=True)[1]
        relabel = np.empty(len(used), dtype=np.intp)
        relabel[np.argsort(first, kind="stable")] = np.arange(len(used))
        return cls(times[order], values[order], weights[order], relabel[owner], len(used))

    def __len__(self) -> int:
        return self.times.size

    def content_key(self) -> Tuple[int, bytes, bytes, bytes]:
        return (self.times.size, self.times.tobytes(), self.values.tobytes(), self.weights.tobytes())

    def window(self, t: float, h: float) -> slice:
        """Indices with |T - t| < h."""
        lo = int(np.searchsorted(self.times, t - h, side="right"))
        hi = int(np.searchsorted(self.times, t + h, side="left"))
        return slice(lo, max(lo, hi))


@dataclass
class MomentAccumulator:
    """Kernel moments U^{p1 p2} (design) and V^{p1 p2} (response) at one point."""
    U: Dict[Tuple[int, int], float]
    V: Dict[Tuple[int, int], float]
    pair_count: int = 0

    def cofactors(self) -> Tuple[float, float, float]:
        U = self.U
        w1 = U[2, 0] * U[0, 2] - U[1, 1] ** 2
        w2 = U[1, 0] * U[0, 2] - U[0, 1] * U[1, 1]
        w3 = U[1, 0] * U[1, 1] - U[0, 1] * U[2, 0]
        return w1, w2, w3

    def solve(self, cond_tol: float) -> Tuple[float, bool]:
        """Intercept of the local-linear fit; second item flags the local-constant fallback."""
        U, V = self.U, self.V
        u00 = U[0, 0]
        w1, w2, w3 = self.cofactors()
        denom = w1 * u00 - w2 * U[1, 0] + w3 * U[0, 1]
        if abs(denom) <= cond_tol * u00 ** 3:
            return V[0, 0] / u00, True
        return (w1 * V[0, 0] - w2 * V[1, 0] + w3 * V[0, 1]) / denom, False


def _grouped_abs_moments(z: np.ndarray, groups: np.ndarray,
                         c_rows: np.ndarray, e_rows: np.ndarray) -> np.ndarray:
    """
    out[r, s] = sum over (a, b) in the same group of c_rows[r, a] e_rows[s, b] |z_a - z_b|.

    Within a group sorted by z, each b splits the others into those before
    and after it, so the double sum reduces to prefix sums of c and c*z.
    """
    if z.size == 0:
        return np.zeros((c_rows.shape[0], e_rows.shape[0]))
    order = np.lexsort((z, groups))
    zs = z[order]
    zs = zs - zs[0]
    gs = groups[order]
    cs = c_rows[:, order]
    es = e_rows[:, order]

    first = np.empty(zs.size, dtype=bool)
    first[0] = True
    first[1:] = gs[1:] != gs[:-1]
    starts = np.flatnonzero(first)
    seg = np.cumsum(first) - 1
    ends = np.append(starts[1:], zs.size) - 1

    cz = cs * zs
    c_incl = np.cumsum(cs, axis=1)
    cz_incl = np.cumsum(cz, axis=1)
    c_excl = c_incl - cs
    cz_excl = cz_incl - cz

    c_base = c_excl[:, starts][:, seg]
    cz_base = cz_excl[:, starts][:, seg]
    below_c = c_excl - c_base
    below_cz = cz_excl - cz_base
    total_c = (c_incl[:, ends] - c_excl[:, starts])[:, seg]
    total_cz = (cz_incl[:, ends] - cz_excl[:, starts])[:, seg]
    above_c = total_c - below_c - cs
    above_cz = total_cz - below_cz - cz

    per_b = zs * (below_c - above_c) - below_cz + above_cz
    return per_b @ es.T


def _moments_at(a: PointSet, b: PointSet, t1: float, t2: float, h1: float, h2: float,
                kernel: KernelSpec, same_sample: bool, response: Optional[Response],
                norm: float) -> Optional[MomentAccumulator]:
    sl_a, sl_b = a.window(t1, h1), b.window(t2, h2)
    ta, za, sa = a.times[sl_a], a.values[sl_a], a.subjects[sl_a]
    tb, zb, sb = b.times[sl_b], b.values[sl_b], b.subjects[sl_b]

    da = (ta - t1) / h1
    db = (tb - t2) / h2
    ka = a.weights[sl_a] * kernel(da)
    kb = b.weights[sl_b] * kernel(db)

    # Count pairs of positive weight: a point on the window edge can pass
    # the index search and still round to |u| = 1
    live_a, live_b = ka > 0.0, kb > 0.0
    pair_count = int(np.count_nonzero(live_a)) * int(np.count_nonzero(live_b))
    if same_sample and pair_count:
        n_sub = max(a.n_subjects, b.n_subjects)
        pair_count -= int(np.dot(np.bincount(sa[live_a], minlength=n_sub),
                                 np.bincount(sb[live_b], minlength=n_sub)))
    if pair_count == 0:
        return None

    ka_pow = np.vstack([ka, ka * da, ka * da * da])
    kb_pow = np.vstack([kb, kb * db, kb * db * db])

    sums_a = ka_pow.sum(axis=1)
    sums_b = kb_pow.sum(axis=1)
    U = {(p1, p2): sums_a[p1] * sums_b[p2] for p1, p2 in MOMENT_KEYS_U}
    if same_sample:
        n_sub = max(a.n_subjects, b.n_subjects)
        by_subject_a = np.vstack([np.bincount(sa, weights=row, minlength=n_sub) for row in ka_pow])
        by_subject_b = np.vstack([np.bincount(sb, weights=row, minlength=n_sub) for row in kb_pow])
        for p1, p2 in MOMENT_KEYS_U:
            U[p1, p2] -= float(np.dot(by_subject_a[p1], by_subject_b[p2]))
    if U[0, 0] <= 0.0:
        return None

    if response is None:
        z = np.concatenate([za, zb])
        zeros_a, zeros_b = np.zeros(ta.size), np.zeros(tb.size)
        c_rows = np.vstack([np.concatenate([ka_pow[0], zeros_b]), np.concatenate([ka_pow[1], zeros_b])])
        e_rows = np.vstack([np.concatenate([zeros_a, kb_pow[0]]), np.concatenate([zeros_a, kb_pow[1]])])
        moments = _grouped_abs_moments(z, np.zeros(z.size, dtype=np.intp), c_rows, e_rows)
        if same_sample:
            moments = moments - _grouped_abs_moments(z, np.concatenate([sa, sb]), c_rows, e_rows)
        V = {(0, 0): moments[0, 0], (1, 0): moments[1, 0], (0, 1): moments[0, 1]}
    else:
        R = np.broadcast_to(
            response(za[:, None], zb[None, :], ta[:, None], tb[None, :]), (ta.size, tb.size)
        ).astype(float)
        if same_sample:
            R = np.where(sa[:, None] != sb[None, :], R, 0.0)
        V = {
            (0, 0): float(ka_pow[0] @ R @ kb_pow[0]),
            (1, 0): float(ka_pow[1] @ R @ kb_pow[0]),
            (0, 1): float(ka_pow[0] @ R @ kb_pow[1]),
        }

    U = {k: float(v) * norm for k, v in U.items()}
    V = {k: float(v) * norm for k, v in V.items()}
    return MomentAccumulator(U=U, V=V, pair_count=pair_count)


def pair_surface_at(points_a: PointSet, points_b: PointSet, t1: float, t2: float,
                    h1: float, h2: float, config: SmootherConfig,
                    same_sample: bool = False, response: Optional[Response] = None,
                    norm: float = 1.0) -> float:
    """
    Local-linear estimate of the pair-response surface at (t1, t2).

    With same_sample, points_a and points_b hold one group and pairs of
    observations from the same subject are excluded. The default response
    is |z_a - z_b|; a custom response receives (z_a, z_b, T_a, T_b) as
    broadcastable arrays.
    """
    for attempt in range(config.max_expansions + 1):
        scale = config.expand_factor ** attempt
        acc = _moments_at(points_a, points_b, t1, t2, h1 * scale, h2 * scale,
                          config.kernel, same_sample, response, norm)
        if acc is None:
            continue
        if attempt:
            logger.debug("window at (%.4f, %.4f) widened %d time(s)", t1, t2, attempt)
        value, fallback = acc.solve(config.cond_tol)
        if fallback:
            logger.debug("ill-conditioned fit at (%.4f, %.4f); local-constant estimate used", t1, t2)
        return value
    raise DegenerateWindowError(t1)


def _surface_inputs(dataset: TwoSampleDataset, surface: Surface, config: SmootherConfig,
                    point_sets: Optional[Tuple[PointSet, PointSet]] = None):
    px, py = point_sets or (PointSet.from_subjects(dataset.x_subjects), PointSet.from_subjects(dataset.y_subjects))
    n, m = dataset.n, dataset.m
    if surface is Surface.G1:
        # On the diagonal G1 is symmetric in the groups; fix the operand
        # order by content so swapping X and Y reproduces it bit for bit
        if py.content_key() < px.content_key():
            return py, px, config.h_y, config.h_x, False, 1.0 / (n * m)
        return px, py, config.h_x, config.h_y, False, 1.0 / (n * m)
    if surface is Surface.G2:
        if n < 2:
            raise DataError("within-X surface needs n ≥ 2")
        return px, px, config.h_x, config.h_x, True, 1.0 / (n * (n - 1))
    if m < 2:
        raise DataError("within-Y surface needs m ≥ 2")
    return py, py, config.h_y, config.h_y, True, 1.0 / (m * (m - 1))


def diagonal_curve(dataset: TwoSampleDataset, surface, config: SmootherConfig,
                   response: Optional[Response] = None,
                   point_sets: Optional[Tuple[PointSet, PointSet]] = None) -> DiagonalCurve:
    """Evaluate G1 (cross), G2 (within X) or G3 (within Y) at every grid point (t, t)."""
    surface = Surface(surface)
    a, b, h1, h2, same, norm = _surface_inputs(dataset, surface, config, point_sets)
    grid = config.grid
    values = np.empty(grid.size)
    for i, t in enumerate(grid):
        try:
            values[i] = pair_surface_at(a, b, t, t, h1, h2, config, same, response, norm)
        except DegenerateWindowError as e:
            raise DegenerateWindowError(e.t, grid_index=i, surface=surface.value) from e
    return DiagonalCurve(grid, values)


def trapezoid_integral(curve: DiagonalCurve) -> float:
    """Composite trapezoid rule over the curve's grid."""
    if len(curve) < 2:
        raise ValueError("trapezoid rule needs at least two grid points")
    return float(trapezoid(curve.values, curve.grid))


def local_linear_1d(times: np.ndarray, values: np.ndarray, weights: np.ndarray,
                    grid: np.ndarray, h: float, config: SmootherConfig) -> np.ndarray:
    """Weighted local-linear regression of values on times, evaluated on grid."""
    order = np.lexsort((values, times))
    times, values, weights = times[order], values[order], weights[order]
    out = np.empty(len(grid))
    for i, t in enumerate(grid):
        for attempt in range(config.max_expansions + 1):
            width = h * config.expand_factor ** attempt
            lo = int(np.searchsorted(times, t - width, side="right"))
            hi = int(np.searchsorted(times, t + width, side="left"))
            d = (times[lo:hi] - t) / width
            k = weights[lo:hi] * config.kernel(d)
            s0 = k.sum()
            if s0 > 0.0:
                break
        else:
            raise DegenerateWindowError(t, grid_index=i)
        z = values[lo:hi]
        s1, s2 = (k * d).sum(), (k * d * d).sum()
        r0, r1 = (k * z).sum(), (k * d * z).sum()
        denom = s0 * s2 - s1 * s1
        if abs(denom) <= config.cond_tol * s0 * s0:
            out[i] = r0 / s0
        else:
            out[i] = (s2 * r0 - s1 * r1) / denom
    return out
