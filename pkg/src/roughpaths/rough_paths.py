"""Level-2 rough paths on a time grid.

A rough path is stored as absolute group values x_t = (1, u_t, b_t) at
grid times, with x_0 the identity.  Increments between any two times are
recovered as x_s^-1 (x) x_t, which makes the multiplicative (Chen)
relation hold by construction; the closed forms are

    u(s,t) = u_t - u_s
    b(s,t) = b_t - b_s - u_s (x) (u_t - u_s).

Between grid points, values are interpolated along the group geodesic of
the enclosing interval's increment (the path that traverses the chord at
constant speed).  For polyline lifts this interpolation is exact at
every time, so a solver may evaluate driver increments on any mesh.

The module also measures paths (p-variation norm against a control,
Chen defect, geometricity defect), splits a non-geometric path into a
geometric part plus a symmetric area-drift path, and generates the stock
drivers used by the experiments (polyline lifts, left-point and
trapezoidal Brownian lifts, pure-area paths).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .tensor_algebra import GroupElement2, identity, mul

__all__ = [
    "Control",
    "HolderControl",
    "RoughPath",
    "AreaDrift",
    "lift_piecewise_linear",
    "chen_defect",
    "two_param_chen_defect",
    "pvar_norm",
    "geometricity_defect",
    "beta_path",
    "decompose",
    "recompose",
    "brownian_lift",
    "pure_area_path",
    "dilate",
    "area_pvar_bound",
    "read_polyline_csv",
    "write_roughpath_csv",
    "read_roughpath_csv",
]

# Exhaustive O(N^2)/O(N^3) scans are used up to this many grid points;
# beyond it the defect routines fall back to documented envelopes/samples.
_EXACT_SCAN_LIMIT = 4200


class Control:
    """Superadditive two-parameter function omega(s, t) >= 0.

    Wraps a vectorized callable; omega(t, t) must be 0 and
    omega(s, u) + omega(u, t) <= omega(s, t) for s <= u <= t.
    """

    def __init__(self, fn):
        self._fn = fn

    def __call__(self, s, t):
        return self._fn(s, t)

    def check_superadditive(self, t0: float, t1: float, samples: int = 200,
                            seed: int = 0, tol: float = 1e-10) -> float:
        """Max violation of superadditivity over sampled triples (<= tol passes)."""
        rng = np.random.default_rng(seed)
        pts = np.sort(rng.uniform(t0, t1, size=(samples, 3)), axis=1)
        s, u, t = pts[:, 0], pts[:, 1], pts[:, 2]
        viol = np.asarray(self(s, u) + self(u, t) - self(s, t), dtype=float)
        return float(np.max(viol, initial=0.0))


class HolderControl(Control):
    """The default control omega(s, t) = t - s."""

    def __init__(self):
        super().__init__(lambda s, t: np.asarray(t, dtype=float) - np.asarray(s, dtype=float))

    def __repr__(self):
        return "HolderControl()"


def _default_control() -> Control:
    return HolderControl()


@dataclass(frozen=True)
class RoughPath:
    """Sampled level-2 rough path: absolute group values per grid time."""

    times: np.ndarray            # (N+1,) strictly increasing, times[0] = 0
    level1: np.ndarray           # (N+1, m), level1[0] = 0
    level2: np.ndarray           # (N+1, m, m), level2[0] = 0
    control: Control = field(default_factory=_default_control)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        u = np.asarray(self.level1, dtype=float)
        b = np.asarray(self.level2, dtype=float)
        if t.ndim != 1 or len(t) < 1:
            raise ValueError("times must be a 1-d array")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        n, m = u.shape
        if n != len(t) or b.shape != (n, m, m):
            raise ValueError("level1/level2 shapes do not match times")
        if np.any(u[0] != 0.0) or np.any(b[0] != 0.0):
            raise ValueError("value at the initial time must be the identity")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "level1", u)
        object.__setattr__(self, "level2", b)

    @property
    def m(self) -> int:
        return self.level1.shape[1]

    @property
    def n_points(self) -> int:
        return len(self.times)

    @property
    def T(self) -> float:
        return float(self.times[-1])

    def value(self, i: int) -> GroupElement2:
        return GroupElement2(self.level1[i], self.level2[i])

    def increment(self, i: int, j: int) -> GroupElement2:
        """Increment between grid indices i <= j."""
        du = self.level1[j] - self.level1[i]
        db = self.level2[j] - self.level2[i] - np.outer(self.level1[i], du)
        return GroupElement2(du, db)

    def interval_increments(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-interval increments (u_inc (N,m), b_inc (N,m,m))."""
        du = np.diff(self.level1, axis=0)
        db = (np.diff(self.level2, axis=0)
              - np.einsum("ki,kj->kij", self.level1[:-1], du))
        return du, db

    def at(self, t) -> tuple[np.ndarray, np.ndarray]:
        """Absolute value at arbitrary times via geodesic interpolation.

        Accepts a scalar or an array of times inside [times[0], times[-1]];
        returns (level1, level2) with a leading axis matching t's shape.
        """
        tq = np.atleast_1d(np.asarray(t, dtype=float))
        if tq.min() < self.times[0] - 1e-12 or tq.max() > self.times[-1] + 1e-12:
            raise ValueError("query time outside the path's time range")
        k = np.clip(np.searchsorted(self.times, tq, side="right") - 1,
                    0, self.n_points - 2)
        dt = self.times[k + 1] - self.times[k]
        alpha = np.clip((tq - self.times[k]) / dt, 0.0, 1.0)
        du = self.level1[k + 1] - self.level1[k]
        db = (self.level2[k + 1] - self.level2[k]
              - np.einsum("ki,kj->kij", self.level1[k], du))
        a = alpha[:, None]
        ua = a * du
        # geodesic power: b(alpha) = alpha*b + 0.5*alpha*(alpha-1) u (x) u
        ba = (alpha[:, None, None] * db
              + 0.5 * (alpha * (alpha - 1.0))[:, None, None]
              * np.einsum("ki,kj->kij", du, du))
        u_abs = self.level1[k] + ua
        b_abs = self.level2[k] + ba + np.einsum("ki,kj->kij", self.level1[k], ua)
        if np.isscalar(t) or np.ndim(t) == 0:
            return u_abs[0], b_abs[0]
        return u_abs, b_abs

    def increments_on_mesh(self, mesh: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Increments over consecutive intervals of an arbitrary mesh."""
        u_abs, b_abs = self.at(mesh)
        du = np.diff(u_abs, axis=0)
        db = np.diff(b_abs, axis=0) - np.einsum("ki,kj->kij", u_abs[:-1], du)
        return du, db

    def increment_between(self, s: float, t: float) -> GroupElement2:
        us, bs = self.at(s)
        ut, bt = self.at(t)
        du = ut - us
        return GroupElement2(du, bt - bs - np.outer(us, du))


@dataclass(frozen=True)
class AreaDrift:
    """Symmetric area-drift path beta(t), beta(0) = 0 (matrix per time)."""

    times: np.ndarray            # (N+1,)
    beta: np.ndarray             # (N+1, m, m), each symmetric

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        b = np.asarray(self.beta, dtype=float)
        if b.ndim != 3 or b.shape[0] != len(t) or b.shape[1] != b.shape[2]:
            raise ValueError("beta must be (len(times), m, m)")
        asym = np.max(np.abs(b - np.swapaxes(b, 1, 2)), initial=0.0)
        if asym > 1e-12:
            raise ValueError(f"beta matrices not symmetric (max asymmetry {asym:.2e})")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "beta", b)

    @property
    def m(self) -> int:
        return self.beta.shape[1]

    def at(self, t) -> np.ndarray:
        """Linear interpolation of beta at arbitrary times."""
        tq = np.atleast_1d(np.asarray(t, dtype=float))
        k = np.clip(np.searchsorted(self.times, tq, side="right") - 1,
                    0, len(self.times) - 2)
        w = (tq - self.times[k]) / (self.times[k + 1] - self.times[k])
        out = (1 - w)[:, None, None] * self.beta[k] + w[:, None, None] * self.beta[k + 1]
        if np.isscalar(t) or np.ndim(t) == 0:
            return out[0]
        return out

    def increments_on_mesh(self, mesh: np.ndarray) -> np.ndarray:
        return np.diff(self.at(mesh), axis=0)


# ---------------------------------------------------------------------------
# construction


def lift_piecewise_linear(points, times, control: Control | None = None) -> RoughPath:
    """Canonical level-2 lift of a polyline.

    Over a linear segment with increment delta the level-2 increment is
    0.5 * delta (x) delta; segments are chained by the group product.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 1 and pts.shape[1] > 1 and np.ndim(points) == 1:
        pts = pts.T
    t = np.asarray(times, dtype=float)
    if np.any(np.diff(t) <= 0):
        raise ValueError("times must be strictly increasing")
    if pts.shape[0] != len(t):
        raise ValueError("points and times must have equal length")
    n, m = pts.shape
    u = pts - pts[0]
    delta = np.diff(pts, axis=0)
    b_inc = 0.5 * np.einsum("ki,kj->kij", delta, delta)
    cross = np.einsum("ki,kj->kij", u[:-1], delta)
    b = np.zeros((n, m, m))
    np.cumsum(b_inc + cross, axis=0, out=b[1:])
    return RoughPath(t, u, b, control or HolderControl())


def pure_area_path(T: float, m: int = 1, area: np.ndarray | None = None,
                   n_points: int = 2, control: Control | None = None) -> RoughPath:
    """Path fixed at the origin whose level-2 part grows linearly in t.

    With the default area matrix [[1]] this is the non-geometric driver
    (1, 0, t) whose decomposition gives beta(t) = t.
    """
    a = np.eye(m) if area is None else np.asarray(area, dtype=float)
    t = np.linspace(0.0, T, max(2, n_points))
    u = np.zeros((len(t), m))
    b = t[:, None, None] * a[None, :, :]
    return RoughPath(t, u, b, control or HolderControl())


def brownian_lift(seed: int, steps: int, T: float, m: int,
                  convention: str = "stratonovich",
                  control: Control | None = None) -> RoughPath:
    """Level-2 lift of a sampled Brownian path.

    Per sampling interval the level-2 increment is 0 (left-point rule,
    ``"ito"``) or 0.5 * dW (x) dW (trapezoidal rule, ``"stratonovich"``).
    The trapezoidal lift is grid-geometric; the left-point lift carries
    an area drift converging to -0.5 * t * I.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if convention not in ("ito", "stratonovich"):
        raise ValueError(f"unknown convention {convention!r}")
    rng = np.random.default_rng(seed)
    h = T / steps
    dW = rng.normal(0.0, math.sqrt(h), size=(steps, m))
    t = np.linspace(0.0, T, steps + 1)
    u = np.zeros((steps + 1, m))
    np.cumsum(dW, axis=0, out=u[1:])
    if convention == "stratonovich":
        b_inc = 0.5 * np.einsum("ki,kj->kij", dW, dW)
    else:
        b_inc = np.zeros((steps, m, m))
    cross = np.einsum("ki,kj->kij", u[:-1], dW)
    b = np.zeros((steps + 1, m, m))
    np.cumsum(b_inc + cross, axis=0, out=b[1:])
    return RoughPath(t, u, b, control or HolderControl())


def dilate(rp: RoughPath, lam: float) -> RoughPath:
    """Dilation by lam: level1 scales by lam, level2 by lam^2."""
    return RoughPath(rp.times, lam * rp.level1, lam * lam * rp.level2, rp.control)


# ---------------------------------------------------------------------------
# measurement


def two_param_chen_defect(inc_fn, times) -> float:
    """Max multiplicativity defect of a two-parameter increment map.

    For every grid triple s < u < t compares inc(s, t) against
    inc(s, u) (x) inc(u, t), entrywise across both levels.  inc_fn takes
    two times and returns a GroupElement2.
    """
    t = np.asarray(times, dtype=float)
    n = len(t)
    if n < 3:
        raise ValueError("need at least 3 grid points")
    worst = 0.0
    if n <= 120:
        triples = [(i, j, k) for i in range(n) for j in range(i + 1, n)
                   for k in range(j + 1, n)]
    else:
        rng = np.random.default_rng(0)
        idx = np.sort(rng.integers(0, n, size=(20000, 3)), axis=1)
        triples = [tuple(row) for row in idx if row[0] < row[1] < row[2]]
    for i, j, k in triples:
        whole = inc_fn(t[i], t[k])
        left = inc_fn(t[i], t[j])
        right = inc_fn(t[j], t[k])
        prod = mul(left, right)
        d1 = np.max(np.abs(whole.level1 - prod.level1), initial=0.0)
        d2 = np.max(np.abs(whole.level2 - prod.level2), initial=0.0)
        worst = max(worst, d1, d2)
    return worst


def chen_defect(rp: RoughPath, increment_fn=None) -> float:
    """Chen defect of a rough path (see two_param_chen_defect).

    For a stored path this is pure float roundoff, since increments come
    from point values; pass increment_fn to audit externally supplied
    two-parameter data instead.
    """
    fn = increment_fn if increment_fn is not None else rp.increment_between
    return two_param_chen_defect(fn, rp.times)


def pvar_norm(rp: RoughPath, p: float) -> float:
    """Grid p-variation norm against the path's control.

    Smallest C with |u(s,t)| <= C w(s,t)^(1/p) and
    ||b(s,t)||_F <= C^2 w(s,t)^(2/p) over all grid pairs s < t.
    Returns inf when some pair has zero control but a nonzero increment.
    """
    if not (2.0 <= p < 3.0):
        raise ValueError("p must lie in [2, 3)")
    t, u, b = rp.times, rp.level1, rp.level2
    n = rp.n_points
    c1 = 0.0
    c2sq = 0.0
    infinite = False
    for i in range(n - 1):
        du = u[i + 1:] - u[i]
        db = b[i + 1:] - b[i] - np.einsum("i,kj->kij", u[i], du)
        w = np.asarray(rp.control(t[i], t[i + 1:]), dtype=float)
        n1 = np.linalg.norm(du, axis=1)
        n2 = np.linalg.norm(db.reshape(len(db), -1), axis=1)
        zero = w <= 0.0
        if np.any(zero & ((n1 > 0) | (n2 > 0))):
            infinite = True
        wz = np.where(zero, np.inf, w)
        c1 = max(c1, float(np.max(n1 / wz ** (1.0 / p), initial=0.0)))
        c2sq = max(c2sq, float(np.max(n2 / wz ** (2.0 / p), initial=0.0)))
    if infinite:
        return math.inf
    return max(c1, math.sqrt(c2sq))


def beta_path(rp: RoughPath) -> np.ndarray:
    """Area-drift values beta(t) = sym(b_t) - 0.5 u_t (x) u_t per grid time.

    The two-parameter geometricity excess sym(b(s,t)) - 0.5 u(s,t)(x)u(s,t)
    telescopes exactly to beta(t) - beta(s).
    """
    u, b = rp.level1, rp.level2
    return 0.5 * (b + np.swapaxes(b, 1, 2)) - 0.5 * np.einsum("ki,kj->kij", u, u)


def geometricity_defect(rp: RoughPath) -> float:
    """Sup over grid pairs of ||sym(b(s,t)) - 0.5 u(s,t) (x) u(s,t)||_F.

    Zero iff the path is grid-geometric.  Computed as the Frobenius
    diameter of the beta path; exact up to _EXACT_SCAN_LIMIT points, and
    bounded by the entrywise-range envelope (exact for m = 1, at most a
    factor m high) beyond that.
    """
    beta = beta_path(rp)
    n = len(beta)
    flat = beta.reshape(n, -1)
    if n <= _EXACT_SCAN_LIMIT:
        worst = 0.0
        for i in range(n - 1):
            d = flat[i + 1:] - flat[i]
            worst = max(worst, float(np.max(np.linalg.norm(d, axis=1), initial=0.0)))
        return worst
    ranges = flat.max(axis=0) - flat.min(axis=0)
    return float(np.linalg.norm(ranges))


def decompose(rp: RoughPath) -> tuple[RoughPath, AreaDrift]:
    """Split into a geometric rough path and a symmetric area drift.

    beta(t) - beta(s) equals the geometricity excess of (s, t); the
    geometric part keeps level1 and subtracts beta from level2, so
    recompose(decompose(rp)) reproduces rp up to float roundoff.
    """
    beta = beta_path(rp)
    geo = RoughPath(rp.times, rp.level1, rp.level2 - beta, rp.control)
    return geo, AreaDrift(rp.times, beta)


def recompose(geometric: RoughPath, drift: AreaDrift) -> RoughPath:
    """Inverse of decompose: add the drift back onto level2."""
    if len(geometric.times) != len(drift.times) or not np.allclose(
            geometric.times, drift.times):
        raise ValueError("geometric part and drift must share a grid")
    return RoughPath(geometric.times, geometric.level1,
                     geometric.level2 + drift.beta, geometric.control)


def area_pvar_bound(drift: AreaDrift, control: Control, p: float) -> float:
    """Smallest L with ||beta(t) - beta(s)|| <= L w(s,t)^(2/p) on grid pairs."""
    t = drift.times
    flat = drift.beta.reshape(len(t), -1)
    best = 0.0
    for i in range(len(t) - 1):
        d = np.linalg.norm(flat[i + 1:] - flat[i], axis=1)
        w = np.asarray(control(t[i], t[i + 1:]), dtype=float)
        w = np.where(w <= 0, np.inf, w)
        best = max(best, float(np.max(d / w ** (2.0 / p), initial=0.0)))
    return best


# ---------------------------------------------------------------------------
# CSV interchange

_FMT = "%.17g"


def read_polyline_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read `t,x1,...,xm` rows (sorted by t); returns (times, points)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[0].strip() != "t":
            raise ValueError(f"{path}: expected header starting with 't'")
        rows = [[float(v) for v in row] for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=float)
    order = np.argsort(data[:, 0], kind="stable")
    data = data[order]
    return data[:, 0], data[:, 1:]


def write_roughpath_csv(rp: RoughPath, path) -> None:
    """Write consecutive-interval increments: `s,t,level1...,level2...`."""
    m = rp.m
    du, db = rp.interval_increments()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = (["s", "t"]
                  + [f"x{i+1}" for i in range(m)]
                  + [f"x2_{i+1}{j+1}" for i in range(m) for j in range(m)])
        writer.writerow(header)
        for k in range(rp.n_points - 1):
            row = [_FMT % rp.times[k], _FMT % rp.times[k + 1]]
            row += [_FMT % v for v in du[k]]
            row += [_FMT % v for v in db[k].ravel()]
            writer.writerow(row)


def read_roughpath_csv(path, control: Control | None = None) -> RoughPath:
    """Rebuild a rough path from its interval-increment CSV."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        m = sum(1 for h in header if h.startswith("x") and "_" not in h)
        rows = [[float(v) for v in row] for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=float)
    times = np.concatenate([[data[0, 0]], data[:, 1]])
    du = data[:, 2:2 + m]
    db = data[:, 2 + m:2 + m + m * m].reshape(-1, m, m)
    n = len(times)
    u = np.zeros((n, m))
    b = np.zeros((n, m, m))
    np.cumsum(du, axis=0, out=u[1:])
    np.cumsum(db + np.einsum("ki,kj->kij", u[:-1], du), axis=0, out=b[1:])
    return RoughPath(times, u, b, control or HolderControl())
