"""Convex geometry engines for lp spaces.

All minimax objectives here are maxima of norms of affine expressions
max_i ||A_i y + b_i||; they are minimized by softmax temperature
continuation (smooth surrogate, warm-started over a decreasing temperature
schedule) and polished on the exact epigraph formulation with an SQP step.
Nearest-point problems are smooth convex minimizations for p > 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .cocycle import AffineAction, OrbitCapExceeded, orbit_ball
from .groups import TableGroup
from .spaces import LpSpace, as_vector, duality_map

__all__ = [
    "AffineSubspace",
    "ConvexHull",
    "Ball",
    "circumcenter",
    "nearest_point",
    "set_distance",
    "optimality_residual",
    "lipschitz_probe",
    "FixedPointResult",
    "fixed_point_circumcenter",
    "FisherMargulisStep",
    "FisherMargulisResult",
    "fisher_margulis_iterate",
    "KleeResult",
    "klee_search",
]


@dataclass(frozen=True, eq=False)
class AffineSubspace:
    base: np.ndarray
    basis: np.ndarray  # dim x k, independent columns

    def __post_init__(self):
        base = np.asarray(self.base, dtype=float)
        basis = np.asarray(self.basis, dtype=float)
        if basis.ndim == 1:
            basis = basis[:, None]
        if basis.size and np.linalg.matrix_rank(basis, tol=1e-10) < basis.shape[1]:
            raise ValueError("affine subspace basis is linearly dependent")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "basis", basis)


@dataclass(frozen=True, eq=False)
class ConvexHull:
    points: np.ndarray  # (m, dim)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.shape[0] == 0:
            raise ValueError("hull needs at least one point")
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be >= 0")
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))


def _norm_grad_raw(space: LpSpace, r: np.ndarray) -> np.ndarray:
    """Gradient of ||r|| wrt r away from 0 (zero vector returned at 0)."""
    n = space.norm(r)
    if n < 1e-300:
        return np.zeros_like(r)
    return space.weights * np.sign(r) * np.abs(r) ** (space.p - 1.0) / n ** (space.p - 1.0)


def _minimax_value(space: LpSpace, terms, y: np.ndarray) -> float:
    return max(space.norm(a @ y + b) if a is not None else space.norm(y + b) for a, b in terms)


def _minimize_minimax(space: LpSpace, terms, y0: np.ndarray, ball=None, gtol: float = 1e-12):
    """Minimize max_i ||A_i y + b_i|| (A_i = None means identity).

    ``ball`` is an optional (center, radius) trust constraint.  Softmax
    continuation with warm starts, then an epigraph SQP polish; returns the
    best point found by true objective value.
    """
    w, p = space.weights, space.p
    mats = [(np.eye(space.dim) if a is None else a, b) for a, b in terms]

    def dists(y):
        return np.array([space.norm(a @ y + b) for a, b in mats])

    def value(y):
        return float(np.max(dists(y)))

    y = np.asarray(y0, dtype=float).copy()
    scale = max(value(y), 1e-9)
    if ball is not None:
        center, radius = ball
        radius = max(radius, 1e-300)

    for temp in (1.0, 0.1, 0.01, 0.001):
        t_eff = temp * scale

        def f_grad(yv):
            ds = np.array([space.norm(a @ yv + b) for a, b in mats])
            mx = ds.max()
            soft = np.exp((ds - mx) / t_eff)
            total = soft.sum()
            val = mx + t_eff * np.log(total)
            grad = np.zeros_like(yv)
            for (a, b), s in zip(mats, soft):
                if s > 1e-300:
                    grad += (s / total) * (a.T @ _norm_grad_raw(space, a @ yv + b))
            if ball is not None:
                excess = space.norm(yv - center) - radius
                if excess > 0:
                    beta = 100.0 * scale / radius
                    val += beta * excess**2
                    grad += 2.0 * beta * excess * _norm_grad_raw(space, yv - center)
            return val, grad

        res = optimize.minimize(f_grad, y, jac=True, method="L-BFGS-B",
                                options={"ftol": 1e-16, "gtol": gtol, "maxiter": 500})
        y = res.x

    if ball is not None:
        off = space.norm(y - center)
        if off > radius:
            y = center + (y - center) * (radius / off)
    best_y, best_val = y, value(y)

    # epigraph polish: min t  s.t.  t**p >= ||A_i y + b_i||**p  (+ ball)
    def pack_constraints():
        cons = []
        for a, b in mats:
            def cfun(z, a=a, b=b):
                yv, t = z[:-1], z[-1]
                return t**p - np.sum(w * np.abs(a @ yv + b) ** p)

            def cjac(z, a=a, b=b):
                yv, t = z[:-1], z[-1]
                r = a @ yv + b
                gy = -p * (a.T @ (w * np.sign(r) * np.abs(r) ** (p - 1.0)))
                return np.concatenate([gy, [p * max(t, 1e-300) ** (p - 1.0)]])

            cons.append({"type": "ineq", "fun": cfun, "jac": cjac})
        if ball is not None:
            def bfun(z):
                return radius**p - np.sum(w * np.abs(z[:-1] - center) ** p)

            def bjac(z):
                r = z[:-1] - center
                return np.concatenate([-p * (w * np.sign(r) * np.abs(r) ** (p - 1.0)), [0.0]])

            cons.append({"type": "ineq", "fun": bfun, "jac": bjac})
        return cons

    z0 = np.concatenate([best_y, [best_val * (1.0 + 1e-10) + 1e-14]])
    try:
        res = optimize.minimize(
            lambda z: z[-1],
            z0,
            jac=lambda z: np.concatenate([np.zeros(space.dim), [1.0]]),
            constraints=pack_constraints(),
            method="SLSQP",
            options={"ftol": 1e-14, "maxiter": 400},
        )
        if res.x is not None:
            cand = res.x[:-1]
            if ball is not None:
                off = space.norm(cand - center)
                if off > radius:
                    cand = center + (cand - center) * (radius / off)
            cand_val = value(cand)
            if cand_val < best_val:
                best_y, best_val = cand, cand_val
    except (ValueError, OverflowError):  # pragma: no cover - SLSQP edge failures
        pass
    return best_y, best_val


def circumcenter(points, space: LpSpace, tol: float = 1e-9):
    """Chebyshev center: the unique minimizer of max_i ||x - p_i|| (p > 1).

    One point returns itself; two points return the metric midpoint, which
    is exact in any strictly convex norm.  Larger sets go through the
    minimax solver started at the barycenter.
    """
    space.require_smooth()
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 0:
        raise ValueError("circumcenter of an empty set")
    if pts.shape[1] != space.dim:
        raise ValueError("points do not live in the space")
    if pts.shape[0] == 1:
        return pts[0].copy(), 0.0
    if pts.shape[0] == 2:
        mid = (pts[0] + pts[1]) / 2.0
        return mid, space.norm(pts[0] - pts[1]) / 2.0
    terms = [(None, -pt) for pt in pts]
    y0 = pts.mean(axis=0)
    center, radius = _minimize_minimax(space, terms, y0, gtol=tol * 1e-2)
    return center, radius


def nearest_point(cset, x, space: LpSpace, tol: float = 1e-10) -> np.ndarray:
    """The unique nearest point of a closed convex set (p > 1)."""
    space.require_smooth()
    x = as_vector(x, space.dim)
    if isinstance(cset, Ball):
        off = x - cset.center
        n = space.norm(off)
        if n <= cset.radius:
            return x.copy()
        return cset.center + off * (cset.radius / n)
    if isinstance(cset, AffineSubspace):
        return _project_affine(cset, x, space, tol)
    if isinstance(cset, ConvexHull):
        return _project_hull(cset, x, space, tol)
    raise TypeError(f"unsupported convex set {type(cset).__name__}")


def _weighted_lstsq(space: LpSpace, basis: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    sq = np.sqrt(space.weights)
    sol, *_ = np.linalg.lstsq(basis * sq[:, None], rhs * sq, rcond=None)
    return sol

def _project_affine(cset: AffineSubspace, x, space, tol) -> np.ndarray:
    basis = cset.basis
    if basis.size == 0:
        return cset.base.copy()
    resid0 = x - cset.base
    c2 = _weighted_lstsq(space, basis, resid0)
    if space.p == 2.0:
        return cset.base + basis @ c2
    w, p = space.weights, space.p

    def f_grad(c):
        r = resid0 - basis @ c
        val = np.sum(w * np.abs(r) ** p)
        grad = -p * (basis.T @ (w * np.sign(r) * np.abs(r) ** (p - 1.0)))
        return val, grad

    res = optimize.minimize(f_grad, c2, jac=True, method="L-BFGS-B",
                            options={"ftol": 1e-18, "gtol": tol * 1e-2, "maxiter": 2000})
    return cset.base + basis @ res.x


def _hull_contains(pts: np.ndarray, x: np.ndarray, tol: float = 1e-9) -> bool:
    m, dim = pts.shape
    a_eq = np.vstack([pts.T, np.ones((1, m))])
    b_eq = np.concatenate([x, [1.0]])
    res = optimize.linprog(np.zeros(m), A_eq=a_eq, b_eq=b_eq, bounds=[(0.0, None)] * m)
    return bool(res.success) and float(np.max(np.abs(a_eq @ res.x - b_eq))) <= tol


def _project_hull(cset: ConvexHull, x, space, tol) -> np.ndarray:
    pts = cset.points
    m = pts.shape[0]
    if m == 1:
        return pts[0].copy()
    if _hull_contains(pts, x):
        return x.copy()
    w, p = space.weights, space.p

    def f_grad(lam):
        r = x - pts.T @ lam
        val = np.sum(w * np.abs(r) ** p)
        grad = -p * (pts @ (w * np.sign(r) * np.abs(r) ** (p - 1.0)))
        return val, grad

    cons = [{"type": "eq", "fun": lambda lam: np.sum(lam) - 1.0, "jac": lambda lam: np.ones(m)}]
    res = optimize.minimize(
        f_grad, np.full(m, 1.0 / m), jac=True, method="SLSQP",
        bounds=[(0.0, 1.0)] * m, constraints=cons,
        options={"ftol": 1e-16, "maxiter": 500},
    )
    lam = np.clip(res.x, 0.0, None)
    lam /= lam.sum()
    return pts.T @ lam


def set_distance(cset, x, space: LpSpace, tol: float = 1e-10) -> float:
    return space.norm(as_vector(x, space.dim) - nearest_point(cset, x, space, tol))


def optimality_residual(cset, x, y, space: LpSpace) -> float:
    """First-order optimality of y as the projection of x: duality-map alignment.

    Directional derivative of ||x - .|| at y along any admissible direction
    d into the set is -<d, J(x-y)>; the residual is the worst positive such
    pairing over unit directions.  Zero residual is the normal-cone
    condition.
    """
    x = as_vector(x, space.dim)
    y = as_vector(y, space.dim)
    r = x - y
    if space.norm(r) < 1e-12:
        return 0.0
    j = duality_map(space, r)
    worst = 0.0
    if isinstance(cset, AffineSubspace):
        for col in cset.basis.T:
            worst = max(worst, abs(space.pairing(col / space.norm(col), j)))
    elif isinstance(cset, ConvexHull):
        for pt in cset.points:
            d = pt - y
            n = space.norm(d)
            if n > 1e-12:
                worst = max(worst, space.pairing(d / n, j))
    elif isinstance(cset, Ball):
        d = cset.center - y
        n = space.norm(d)
        if n > 1e-12:
            worst = max(worst, space.pairing(d / n, j))
    else:
        raise TypeError(f"unsupported convex set {type(cset).__name__}")
    return worst


def lipschitz_probe(cset, space: LpSpace, pairs) -> float:
    """max |d(x,C) - d(y,C)| / ||x - y|| over sample pairs (1-Lipschitz check)."""
    worst = 0.0
    for x, y in pairs:
        x = as_vector(x, space.dim)
        y = as_vector(y, space.dim)
        sep = space.norm(x - y)
        if sep < 1e-12:
            continue
        dx = set_distance(cset, x, space)
        dy = set_distance(cset, y, space)
        worst = max(worst, abs(dx - dy) / sep)
    return worst


@dataclass(frozen=True, eq=False)
class FixedPointResult:
    status: str  # "fixed" | "not-fixed" | "unbounded"
    point: np.ndarray | None
    displacement: float
    orbit_size: int
    orbit_diameter: float


def fixed_point_circumcenter(
    action: AffineAction,
    x0,
    fix_tol: float = 1e-6,
    max_radius: int = 12,
    cap: int = 100_000,
) -> FixedPointResult:
    """Fixed point as the circumcenter of a bounded orbit.

    Table-backed groups enumerate the full orbit; presented groups grow
    word balls until the diameter stalls for three consecutive radii
    (stabilization heuristic) and report "unbounded" otherwise.
    """
    space = action.space
    x0 = as_vector(x0, space.dim)
    group = action.rep.group
    if isinstance(group, TableGroup):
        pts = []
        for _, word in sorted(group.element_words().items()):
            y = action.apply(word, x0)
            if all(np.max(np.abs(y - q)) > 1e-12 for q in pts):
                pts.append(y)
        orbit = np.array(pts)
    else:
        try:
            ball = None
            for radius in range(1, max_radius + 1):
                ball = orbit_ball(action, x0, radius, cap=cap)
                ds = ball.diameters_by_radius
                if len(ds) >= 3 and abs(ds[-1] - ds[-2]) < 1e-12 and abs(ds[-2] - ds[-3]) < 1e-12:
                    break
            else:
                return FixedPointResult("unbounded", None, np.nan, len(ball.points), ball.diameter)
        except OrbitCapExceeded:
            return FixedPointResult("unbounded", None, np.nan, cap, np.nan)
        orbit = ball.points
    center, _ = circumcenter(orbit, space)
    diam = 0.0
    for i in range(len(orbit)):
        for j in range(i + 1, len(orbit)):
            diam = max(diam, space.norm(orbit[i] - orbit[j]))
    disp = action.max_displacement(center)
    status = "fixed" if disp <= fix_tol else "not-fixed"
    return FixedPointResult(status, center, disp, len(orbit), diam)


@dataclass(frozen=True, eq=False)
class FisherMargulisStep:
    point: np.ndarray
    diameter: float


@dataclass(frozen=True, eq=False)
class FisherMargulisResult:
    status: str  # "fixed" | "non-contracting" | "max-iter"
    trace: tuple
    terminal: np.ndarray
    displacement: float

    @property
    def radii(self):
        return [step.diameter for step in self.trace]

    def trace_csv(self, space=None) -> str:
        """Solver trace as CSV: iteration, radius, step norm, objective."""
        rows = ["iteration,radius,step_norm,objective"]
        prev = None
        for i, step in enumerate(self.trace):
            if prev is None:
                step_norm = 0.0
            elif space is not None:
                step_norm = space.norm(step.point - prev.point)
            else:
                step_norm = float(np.linalg.norm(step.point - prev.point))
            rows.append(f"{i},{step.diameter:.17g},{step_norm:.17g},{step.diameter:.17g}")
            prev = step
        return "\n".join(rows) + "\n"


def fisher_margulis_iterate(
    action: AffineAction,
    k_words=None,
    x0=None,
    c_mult: float = 1.0,
    max_iter: int = 60,
    tol: float = 1e-6,
    restarts: int = 6,
    seed: int = 0,
) -> FisherMargulisResult:
    """Diameter-halving iteration toward a fixed point.

    Each step minimizes y -> diam({y} u K.y) over the ball of radius
    c_mult * R_n around the current point and accepts only strict halving;
    a failed halving step stops the run with status "non-contracting".
    The K-orbit diameter includes the point itself so that it always bounds
    the generator displacement.
    """
    rep = action.rep
    space = action.space
    words = list(k_words) if k_words is not None else list(rep.group.k_set)
    if not words:
        raise ValueError("K must be nonempty")
    if c_mult <= 0:
        raise ValueError("C must be positive")
    x = space.random_vector(np.random.default_rng(seed)) if x0 is None else as_vector(x0, space.dim)

    affine_maps = [(np.eye(space.dim), np.zeros(space.dim))]
    for word in words:
        affine_maps.append((rep.operator(word), action.cocycle.value(word)))
    pair_terms = []
    for i in range(len(affine_maps)):
        for j in range(i + 1, len(affine_maps)):
            mi, ti = affine_maps[i]
            mj, tj = affine_maps[j]
            pair_terms.append((mi - mj, ti - tj))

    def diam(y):
        return _minimax_value(space, pair_terms, y)

    rng = np.random.default_rng(seed)
    trace = [FisherMargulisStep(point=x.copy(), diameter=diam(x))]
    status = "max-iter"
    for _ in range(max_iter):
        r_n = trace[-1].diameter
        if action.max_displacement(x, words) <= tol:
            status = "fixed"
            break
        ball = (x, c_mult * r_n)
        best_y, best_val = _minimize_minimax(space, pair_terms, x, ball=ball)
        for _ in range(restarts - 1):
            start = x + (c_mult * r_n) * rng.uniform(-1, 1, space.dim) * 0.7
            off = space.norm(start - x)
            if off > c_mult * r_n:
                start = x + (start - x) * (c_mult * r_n / off)
            cand_y, cand_val = _minimize_minimax(space, pair_terms, start, ball=ball)
            if cand_val < best_val:
                best_y, best_val = cand_y, cand_val
        if best_val < r_n / 2.0:
            x = best_y
            trace.append(FisherMargulisStep(point=x.copy(), diameter=best_val))
        else:
            status = "non-contracting"
            break
    else:  # pragma: no cover - max_iter exhausted
        status = "max-iter"
    if status == "max-iter" and action.max_displacement(x, words) <= tol:
        status = "fixed"
    return FisherMargulisResult(
        status=status,
        trace=tuple(trace),
        terminal=x,
        displacement=action.max_displacement(x, words),
    )


@dataclass(frozen=True, eq=False)
class KleeResult:
    found: bool
    points: np.ndarray | None
    center: np.ndarray | None
    hull_distance: float       # certified lower bound on the distance
    trials_used: int


def hull_separation_certificate(pts: np.ndarray, x: np.ndarray, space: LpSpace) -> float:
    """Certified lower bound for d(x, hull(pts)) via a separating functional.

    Uses the duality map of x minus its (approximate) hull projection; any
    unit functional J gives d(x, hull) >= min_i <x - p_i, J>, so projection
    inaccuracy can only weaken the bound, never fake a separation.
    """
    proj = nearest_point(ConvexHull(pts), x, space)
    gap_vec = x - proj
    if space.norm(gap_vec) < 1e-12:
        return 0.0
    j = duality_map(space, gap_vec)
    return float(min(space.pairing(x - q, j) for q in pts))


def klee_search(
    space: LpSpace,
    trials: int = 500,
    seed: int = 0,
    margin: float = 1e-6,
    max_points: int = 6,
) -> KleeResult:
    """Random hunt for a point set whose circumcenter escapes its convex hull.

    Needs dim >= 3 and p != 2 (in Hilbert space the center always lies in
    the closed hull).  A configuration counts as a witness only when the
    separating-functional certificate puts the center at least ``margin``
    outside the hull.  Not finding one is a legitimate outcome.
    """
    if space.p == 2.0:
        raise ValueError("p = 2 refused: Hilbert circumcenters stay in the closed convex hull")
    if space.dim < 3:
        raise ValueError("Klee configurations require dim >= 3")
    space.require_smooth()
    rng = np.random.default_rng(seed)
    for trial in range(1, trials + 1):
        m = int(rng.integers(4, max_points + 1))
        pts = rng.standard_normal((m, space.dim))
        center, _ = circumcenter(pts, space)
        certified = hull_separation_certificate(pts, center, space)
        if certified > margin:
            return KleeResult(True, pts, center, certified, trial)
    return KleeResult(False, None, None, 0.0, trials)
