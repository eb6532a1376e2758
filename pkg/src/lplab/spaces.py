"""Finite-dimensional weighted lp spaces.

An ``LpSpace`` is R^dim equipped with the norm

    ||v|| = (sum_i w_i |v_i|**p) ** (1/p)

for an exponent 1 <= p < infinity and strictly positive atom weights w.
Vectors are plain numpy arrays; a vector is "dual" simply by being measured
in ``space.dual()``, the lq space with the same weights (q = p/(p-1)).
The primal/dual pairing is the weighted bilinear form

    <x, lam> = sum_i w_i x_i lam_i

so that primal and dual vectors share coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LpSpace",
    "as_vector",
    "duality_map",
    "mazur_map",
]


def as_vector(v, dim: int | None = None) -> np.ndarray:
    """Coerce input to a 1-d float array, optionally checking its length."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"dimension mismatch: vector has length {arr.shape[0]}, space has dim {dim}")
    return arr


@dataclass(frozen=True, eq=False)
class LpSpace:
    """A finite-dimensional weighted lp space.

    Parameters
    ----------
    dim : int
        Number of atoms, at least 1.
    p : float
        Exponent in [1, infinity).  Operations that need uniform convexity
        or smoothness (duality map, convexity modulus, projections) reject
        p = 1 themselves.
    weights : array_like, optional
        Strictly positive atom weights; defaults to all ones.
    """

    dim: int
    p: float
    weights: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if not (1.0 <= self.p < np.inf):
            raise ValueError(f"exponent p must lie in [1, inf), got {self.p}")
        w = np.ones(self.dim) if self.weights is None else np.asarray(self.weights, dtype=float)
        if w.shape != (self.dim,):
            raise ValueError("weights must have length dim")
        if not np.all(w > 0):
            raise ValueError("all weights must be strictly positive")
        object.__setattr__(self, "weights", w)

    # -- basic norm and pairing -------------------------------------------

    def norm_pow(self, v) -> float:
        """sum_i w_i |v_i|**p  (the p-th power of the norm)."""
        v = as_vector(v, self.dim)
        return float(np.sum(self.weights * np.abs(v) ** self.p))

    def norm(self, v) -> float:
        """Weighted p-norm of ``v``."""
        return self.norm_pow(v) ** (1.0 / self.p)

    def distance(self, x, y) -> float:
        return self.norm(as_vector(x, self.dim) - as_vector(y, self.dim))

    def pairing(self, x, lam) -> float:
        """Weighted bilinear pairing <x, lam> = sum_i w_i x_i lam_i."""
        x = as_vector(x, self.dim)
        lam = as_vector(lam, self.dim)
        return float(np.sum(self.weights * x * lam))

    def norm_gradient(self, v) -> np.ndarray:
        """Gradient of v -> ||v|| at a nonzero point (p > 1)."""
        self.require_smooth()
        v = as_vector(v, self.dim)
        n = self.norm(v)
        if n == 0.0:
            raise ValueError("norm gradient undefined at 0")
        return self.weights * np.sign(v) * np.abs(v) ** (self.p - 1.0) / n ** (self.p - 1.0)

    # -- structure ---------------------------------------------------------

    @property
    def q(self) -> float:
        """Dual exponent p/(p-1); infinity when p = 1."""
        if self.p == 1.0:
            return np.inf
        return self.p / (self.p - 1.0)

    def dual(self) -> "LpSpace":
        """The dual space: same weights, conjugate exponent (p > 1 only)."""
        self.require_smooth()
        return LpSpace(self.dim, self.q, self.weights)

    def with_exponent(self, p: float) -> "LpSpace":
        return LpSpace(self.dim, p, self.weights)

    def require_smooth(self):
        if self.p == 1.0:
            raise ValueError("operation requires p > 1 (l1 is not strictly convex/smooth)")

    # -- sampling ----------------------------------------------------------

    def random_vector(self, rng: np.random.Generator) -> np.ndarray:
        return rng.standard_normal(self.dim)

    def random_unit(self, rng: np.random.Generator) -> np.ndarray:
        v = rng.standard_normal(self.dim)
        n = self.norm(v)
        while n < 1e-12:  # pragma: no cover - essentially impossible
            v = rng.standard_normal(self.dim)
            n = self.norm(v)
        return v / n


def duality_map(space: LpSpace, v) -> np.ndarray:
    """Supporting functional of ``v``: the unique norming unit dual vector.

    Coordinates are sign(v_i) |v_i|**(p-1) / ||v||**(p-1).  The output
    satisfies <v/||v||, v*> = 1 and has unit norm in ``space.dual()``.
    Rejects the zero vector and p = 1.
    """
    space.require_smooth()
    v = as_vector(v, space.dim)
    n = space.norm(v)
    if n == 0.0:
        raise ValueError("duality map undefined at the zero vector")
    return np.sign(v) * np.abs(v) ** (space.p - 1.0) / n ** (space.p - 1.0)


def mazur_map(space: LpSpace, v, q: float) -> np.ndarray:
    """Coordinatewise sign-preserving power map from lp to lq, sign(v)|v|^(p/q).

    Maps the unit sphere of ``space`` onto the unit sphere of the lq space
    with the same weights and inverts exactly: composing with the map back
    (exponent q -> p) is the identity.
    """
    if not (1.0 <= q < np.inf):
        raise ValueError(f"target exponent q must lie in [1, inf), got {q}")
    v = as_vector(v, space.dim)
    return np.sign(v) * np.abs(v) ** (space.p / q)
