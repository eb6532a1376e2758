"""Signed weighted permutations: the linear isometries of finite lp spaces.

Every linear isometry of a purely atomic lp space (p != 2) is a signed
rearrangement of atoms corrected by the p-th root of the weight ratio:

    (U v)_i = signs_i * (w_src[perm[i]] / w_tgt[i]) ** (1/p) * v[perm[i]]

This module implements that algebra (apply/compose/invert), the nonlinear
Mazur conjugation onto l2, and the invariant-norm construction for finite
uniformly bounded matrix groups.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spaces import LpSpace, as_vector, mazur_map

__all__ = [
    "LampertiIsometry",
    "identity_isometry",
    "random_lamperti",
    "mazur_conjugate",
    "mazur_conjugation_residual",
    "InvariantNorm",
    "invariant_norm",
]


@dataclass(frozen=True, eq=False)
class LampertiIsometry:
    """A linear isometry ``source -> target`` in signed-weighted-permutation form.

    ``perm`` and ``signs`` have length dim; ``perm`` is read as
    "coordinate i of the output pulls from coordinate perm[i] of the input".
    Source and target must share dim and exponent; weights may differ.
    """

    perm: np.ndarray
    signs: np.ndarray
    source: LpSpace
    target: LpSpace

    def __post_init__(self):
        perm = np.asarray(self.perm, dtype=int)
        signs = np.asarray(self.signs, dtype=float)
        n = self.source.dim
        if self.target.dim != n:
            raise ValueError("source and target dimensions differ")
        if self.target.p != self.source.p:
            raise ValueError("source and target exponents differ")
        if sorted(perm.tolist()) != list(range(n)):
            raise ValueError("perm is not a permutation of 0..dim-1")
        if signs.shape != (n,) or not np.all(np.abs(signs) == 1.0):
            raise ValueError("signs must be a vector of +-1 of length dim")
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "signs", signs)

    @property
    def density(self) -> np.ndarray:
        """(w_src[perm] / w_tgt) ** (1/p), the Radon-Nikodym correction."""
        return (self.source.weights[self.perm] / self.target.weights) ** (1.0 / self.source.p)

    def apply(self, v) -> np.ndarray:
        v = as_vector(v, self.source.dim)
        return self.signs * self.density * v[self.perm]

    def __call__(self, v) -> np.ndarray:
        return self.apply(v)

    def matrix(self) -> np.ndarray:
        n = self.source.dim
        m = np.zeros((n, n))
        m[np.arange(n), self.perm] = self.signs * self.density
        return m

    def compose(self, other: "LampertiIsometry") -> "LampertiIsometry":
        """self after other: (self.compose(other))(v) == self(other(v))."""
        if other.target.dim != self.source.dim or other.target.p != self.source.p:
            raise ValueError("incompatible spaces for composition")
        if not np.allclose(other.target.weights, self.source.weights, rtol=0, atol=1e-14):
            raise ValueError("incompatible spaces for composition (weights differ)")
        perm = other.perm[self.perm]
        signs = self.signs * other.signs[self.perm]
        return LampertiIsometry(perm, signs, other.source, self.target)

    def inverse(self) -> "LampertiIsometry":
        inv = np.argsort(self.perm)
        return LampertiIsometry(inv, self.signs[inv], self.target, self.source)

    def __matmul__(self, other: "LampertiIsometry") -> "LampertiIsometry":
        return self.compose(other)

    def same_permutation(self, other: "LampertiIsometry") -> bool:
        return bool(np.array_equal(self.perm, other.perm) and np.array_equal(self.signs, other.signs))


def identity_isometry(space: LpSpace) -> LampertiIsometry:
    return LampertiIsometry(np.arange(space.dim), np.ones(space.dim), space, space)


def random_lamperti(space: LpSpace, rng: np.random.Generator, target: LpSpace | None = None) -> LampertiIsometry:
    """Random signed weighted permutation between the given spaces."""
    tgt = space if target is None else target
    perm = rng.permutation(space.dim)
    signs = rng.choice([-1.0, 1.0], size=space.dim)
    return LampertiIsometry(perm, signs, space, tgt)


def mazur_conjugate(iso: LampertiIsometry) -> LampertiIsometry:
    """Conjugate a lp isometry by the Mazur map into an l2 isometry.

    The nonlinear composition (sphere map to lp) -> U -> (sphere map to l2)
    collapses to the *linear* isometry with the same permutation and signs
    and density power 1/2; this closed form is returned.  Use
    :func:`mazur_conjugation_residual` to validate it against the actual
    nonlinear composition.
    """
    src2 = iso.source.with_exponent(2.0)
    tgt2 = iso.target.with_exponent(2.0)
    return LampertiIsometry(iso.perm, iso.signs, src2, tgt2)


def mazur_conjugation_residual(iso: LampertiIsometry, n_samples: int = 50, seed: int = 0) -> float:
    """Max deviation between the predicted l2 isometry and the nonlinear conjugation.

    Samples unit vectors v in l2 and compares the closed form against
    M_{p,2}(U(M_{2,p}(v))) coordinatewise.
    """
    rng = np.random.default_rng(seed)
    predicted = mazur_conjugate(iso)
    src2 = predicted.source
    worst = 0.0
    for _ in range(n_samples):
        v = src2.random_unit(rng)
        via_mazur = mazur_map(iso.target, iso.apply(mazur_map(src2, v, iso.source.p)), 2.0)
        worst = max(worst, float(np.max(np.abs(via_mazur - predicted.apply(v)))))
    return worst


class InvariantNorm:
    """Group-invariant norm ||x||' = max_g ||g x|| for a finite matrix group.

    The constructor checks that the map list is closed under composition and
    consists of invertible matrices; the resulting norm satisfies
    ||x|| <= ||x||' <= C ||x|| with C the largest operator norm in the group.
    """

    def __init__(self, maps, space: LpSpace, tol: float = 1e-9):
        self.space = space
        mats = [np.asarray(m, dtype=float) for m in maps]
        n = space.dim
        for m in mats:
            if m.shape != (n, n):
                raise ValueError("all maps must be dim x dim matrices")
            if abs(np.linalg.det(m)) < 1e-12:
                raise ValueError("maps must be invertible")
        for a in mats:
            for b in mats:
                prod = a @ b
                if not any(np.max(np.abs(prod - c)) <= tol for c in mats):
                    raise ValueError("map list is not closed under composition")
        if not any(np.max(np.abs(m - np.eye(n))) <= tol for m in mats):
            raise ValueError("map list does not contain the identity")
        self.maps = mats

    def norm(self, v) -> float:
        v = as_vector(v, self.space.dim)
        return max(self.space.norm(m @ v) for m in self.maps)

    def __call__(self, v) -> float:
        return self.norm(v)

    def bound(self, n_samples: int = 200, seed: int = 0) -> float:
        """Sampled estimate of the equivalence constant C = sup ||x||'/||x||."""
        rng = np.random.default_rng(seed)
        worst = 1.0
        for _ in range(n_samples):
            v = self.space.random_unit(rng)
            worst = max(worst, self.norm(v))
        return worst


def invariant_norm(maps, space: LpSpace, tol: float = 1e-9) -> InvariantNorm:
    """Build the invariant norm for a finite group of invertible matrices."""
    return InvariantNorm(maps, space, tol=tol)
