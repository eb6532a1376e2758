"""Linear isometric representations on lp spaces and their canonical splittings.

A representation assigns to each generator a linear isometry (a
:class:`~lplab.lamperti.LampertiIsometry` or a plain matrix).  Central here
is the canonical complement construction: the fixed subspace always splits
off via the annihilator of the dual-representation fixed vectors,

    B = Fix(G) + B',   B' = { v : <v, lam> = 0 for all dual-fixed lam },

with projections that commute with the whole representation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .groups import PresentedGroup, TableGroup, group_from_permutations, word_letters
from .lamperti import LampertiIsometry
from .spaces import LpSpace, as_vector

__all__ = [
    "Representation",
    "fixed_subspace",
    "dual_rep",
    "ComplementResult",
    "canonical_complement",
    "functoriality_check",
    "ProductDecomposition",
    "product_decomposition",
    "zero_mean_rep",
    "indicator_vector",
    "indicator_displacement",
]

_RELATION_TOL = 1e-9
_ISOMETRY_TOL = 1e-10


def _operator_matrix(op, dim: int) -> np.ndarray:
    if isinstance(op, LampertiIsometry):
        return op.matrix()
    mat = np.asarray(op, dtype=float)
    if mat.shape != (dim, dim):
        raise ValueError(f"generator image must be {dim}x{dim}")
    return mat


class Representation:
    """Generator-indexed linear representation on an :class:`LpSpace`.

    Parameters
    ----------
    group : TableGroup or PresentedGroup
    space : LpSpace
    images : dict
        Generator name -> LampertiIsometry or dim x dim array.
    require_isometric : bool
        Check each image preserves the space norm on samples (default).
        Matrix-group scenarios (e.g. Mautner probes) disable this.
    validate : bool
        Verify the group relations hold; on failure raise ValueError.
    """

    def __init__(self, group, space: LpSpace, images: dict, require_isometric: bool = True, validate: bool = True):
        self.group = group
        self.space = space
        names = set(self._generator_names())
        if set(images) != names:
            raise ValueError(f"images must be given exactly for generators {sorted(names)}")
        self.images = dict(images)
        self._mats = {name: _operator_matrix(op, space.dim) for name, op in images.items()}
        self._inv_mats = {}
        for name, op in images.items():
            if isinstance(op, LampertiIsometry):
                self._inv_mats[name] = op.inverse().matrix()
            else:
                self._inv_mats[name] = np.linalg.inv(self._mats[name])
        self.require_isometric = require_isometric
        if require_isometric:
            self._check_isometric()
        self.relation_residual = self._relation_residual()
        if validate and self.relation_residual > _RELATION_TOL:
            raise ValueError(
                f"group relations violated: residual {self.relation_residual:.3e} > {_RELATION_TOL:.0e}"
            )

    # -- structure ----------------------------------------------------------

    def _generator_names(self):
        if isinstance(self.group, TableGroup):
            return self.group.generator_names
        return list(self.group.generators)

    @property
    def generator_names(self):
        return self._generator_names()

    def generator_matrix(self, name: str) -> np.ndarray:
        return self._mats[name]

    def operator(self, word: str) -> np.ndarray:
        """Matrix of the image of a word over generators (uppercase = inverse)."""
        mat = np.eye(self.space.dim)
        for name, is_inv in word_letters(word):
            if name not in self._mats:
                raise ValueError(f"unknown generator symbol {name!r}")
            mat = mat @ (self._inv_mats[name] if is_inv else self._mats[name])
        return mat

    def apply(self, word: str, v) -> np.ndarray:
        return self.operator(word) @ as_vector(v, self.space.dim)

    def element_matrices(self) -> dict:
        """Matrix for every element of a table-backed group (via BFS words)."""
        if not isinstance(self.group, TableGroup):
            raise ValueError("element enumeration needs a table-backed group")
        return {g: self.operator(w) for g, w in self.group.element_words().items()}

    # -- validation ---------------------------------------------------------

    def _check_isometric(self, n_samples: int = 20, seed: int = 7):
        rng = np.random.default_rng(seed)
        for name, mat in self._mats.items():
            for _ in range(n_samples):
                v = self.space.random_unit(rng)
                if abs(self.space.norm(mat @ v) - 1.0) > _ISOMETRY_TOL:
                    raise ValueError(f"image of generator {name!r} is not isometric")

    def _relation_residual(self) -> float:
        if isinstance(self.group, TableGroup):
            mats = self.element_matrices()
            worst = 0.0
            m = self.group.order
            for i in range(m):
                for j in range(m):
                    dev = mats[i] @ mats[j] - mats[self.group.mult(i, j)]
                    worst = max(worst, float(np.linalg.norm(dev, 2)))
            return worst
        worst = 0.0
        eye = np.eye(self.space.dim)
        for rel in self.group.relators:
            worst = max(worst, float(np.linalg.norm(self.operator(rel) - eye, 2)))
        return worst

    # -- derived representations ---------------------------------------------

    def restriction_matrices(self, generator_names=None) -> list:
        """(matrix, inverse matrix) pairs for the named generators (all by default)."""
        names = self.generator_names if generator_names is None else list(generator_names)
        return [(self._mats[n], self._inv_mats[n]) for n in names]


def _stack_fixed_system(pairs, dim: int) -> np.ndarray:
    eye = np.eye(dim)
    blocks = [mat - eye for mat, _ in pairs]
    return np.vstack(blocks) if blocks else np.zeros((0, dim))


def _fixed_basis(pairs, dim: int) -> np.ndarray:
    system = _stack_fixed_system(pairs, dim)
    if system.shape[0] == 0:
        return np.eye(dim)
    return linalg.null_space(system, rcond=1e-9)


def fixed_subspace(rep: Representation, generator_names=None) -> np.ndarray:
    """Orthonormal (Euclidean) basis, as columns, of the common fixed subspace."""
    return _fixed_basis(rep.restriction_matrices(generator_names), rep.space.dim)


def _dual_image(op, mat, inv_mat, space: LpSpace):
    """Image of g under the dual representation: the pairing-adjoint of rho(g^-1)."""
    if isinstance(op, LampertiIsometry):
        # closed form: same permutation and signs, density power 1/q
        return LampertiIsometry(op.perm, op.signs, op.source.dual(), op.target.dual())
    w = space.weights
    return (inv_mat.T * w[None, :]) / w[:, None]


def dual_rep(rep: Representation) -> Representation:
    """Dual representation on the lq space, <x, rho*(g) y> = <rho(g^-1) x, y>."""
    dual_space = rep.space.dual()
    images = {
        name: _dual_image(rep.images[name], rep._mats[name], rep._inv_mats[name], rep.space)
        for name in rep.generator_names
    }
    return Representation(rep.group, dual_space, images, require_isometric=rep.require_isometric)


@dataclass(frozen=True, eq=False)
class ComplementResult:
    fixed_basis: np.ndarray        # dim x k, columns span Fix
    complement_basis: np.ndarray   # dim x (dim - k), columns span B'
    proj_fixed: np.ndarray         # projection onto Fix along B'
    proj_complement: np.ndarray

    @property
    def fixed_dim(self) -> int:
        return self.fixed_basis.shape[1]

    @property
    def complement_dim(self) -> int:
        return self.complement_basis.shape[1]


def _complement_core(rep: Representation, generator_names=None) -> ComplementResult:
    space = rep.space
    space.require_smooth()
    dim = space.dim
    pairs = rep.restriction_matrices(generator_names)
    fixed = _fixed_basis(pairs, dim)
    dual_pairs = [
        (_operator_matrix(_dual_image_from_pair(mat, inv, space), dim), None) for mat, inv in pairs
    ]
    dual_fixed = _fixed_basis([(m, None) for m, _ in dual_pairs], dim)
    if dual_fixed.shape[1] != fixed.shape[1]:
        raise RuntimeError(
            f"fixed-space dimensions disagree between primal ({fixed.shape[1]}) and dual ({dual_fixed.shape[1]})"
        )
    if dual_fixed.shape[1] == 0:
        comp = np.eye(dim)
    else:
        comp = linalg.null_space(dual_fixed.T * space.weights[None, :], rcond=1e-9)
    if fixed.shape[1] + comp.shape[1] != dim:
        raise RuntimeError("canonical complement dimension mismatch")
    basis = np.hstack([fixed, comp])
    sel = np.zeros((dim, dim))
    sel[: fixed.shape[1], : fixed.shape[1]] = np.eye(fixed.shape[1])
    proj_fixed = basis @ sel @ np.linalg.inv(basis)
    return ComplementResult(fixed, comp, proj_fixed, np.eye(dim) - proj_fixed)


def _dual_image_from_pair(mat, inv_mat, space: LpSpace) -> np.ndarray:
    w = space.weights
    return (inv_mat.T * w[None, :]) / w[:, None]


def canonical_complement(rep: Representation, generator_names=None) -> ComplementResult:
    """Canonical splitting B = Fix + B' for the (sub)family of generators.

    B' is the annihilator of the dual-fixed vectors under the weighted
    pairing; the projections commute with every generator image.  Requires
    p > 1.
    """
    return _complement_core(rep, generator_names)


def functoriality_check(phi, rep1: Representation, rep2: Representation, tol: float = 1e-9):
    """Residuals of the two commuting squares of the canonical projections.

    ``phi`` must intertwine the representations on generators (checked to
    ``tol``); returns (fixed-square residual, complement-square residual)
    in the matrix 2-norm.
    """
    phi = np.asarray(phi, dtype=float)
    if sorted(rep1.generator_names) != sorted(rep2.generator_names):
        raise ValueError("representations must share generator names")
    for name in rep1.generator_names:
        dev = phi @ rep1.generator_matrix(name) - rep2.generator_matrix(name) @ phi
        if np.linalg.norm(dev, 2) > tol:
            raise ValueError(f"phi is not an intertwiner on generator {name!r}")
    c1 = canonical_complement(rep1)
    c2 = canonical_complement(rep2)
    res_fixed = float(np.linalg.norm(phi @ c1.proj_fixed - c2.proj_fixed @ phi, 2))
    res_comp = float(np.linalg.norm(phi @ c1.proj_complement - c2.proj_complement @ phi, 2))
    return res_fixed, res_comp


@dataclass(frozen=True, eq=False)
class ProductDecomposition:
    """Canonical four-way splitting for a product action G1 x G2."""

    fixed: np.ndarray    # Fix(G)
    b0: np.ndarray       # complement piece where neither factor has fixed vectors
    b1: np.ndarray       # Fix(G1) modulo Fix(G): the G1-fixed complement piece
    b2: np.ndarray

    def dims(self):
        return (self.fixed.shape[1], self.b0.shape[1], self.b1.shape[1], self.b2.shape[1])


def _range_basis(mat: np.ndarray, expected_rank: int) -> np.ndarray:
    if expected_rank == 0:
        return np.zeros((mat.shape[0], 0))
    u, s, _ = np.linalg.svd(mat)
    if expected_rank < s.size and s[expected_rank] > 1e-8:
        raise RuntimeError("projection range rank exceeds the expected dimension")
    if s[expected_rank - 1] < 1e-8:
        raise RuntimeError("projection range rank below the expected dimension")
    return u[:, :expected_rank]


def product_decomposition(rep: Representation, gens1, gens2, tol: float = 1e-10) -> ProductDecomposition:
    """Split B into Fix(G) + B0 + B1 + B2 for two commuting generator families.

    Fix(G_i) = Fix(G) + B_i holds by construction: the canonical projections
    of the two factors commute, and the four pieces are the ranges of their
    products.  Raises if the families fail to commute to ``tol``.
    """
    for a in gens1:
        for b in gens2:
            ma, mb = rep.generator_matrix(a), rep.generator_matrix(b)
            if np.max(np.abs(ma @ mb - mb @ ma)) > tol:
                raise ValueError(f"generator families do not commute: [{a!r}, {b!r}]")
    dim = rep.space.dim
    c1 = canonical_complement(rep, gens1)
    c2 = canonical_complement(rep, gens2)
    c_full = canonical_complement(rep, list(gens1) + list(gens2))
    p1, p2 = c1.proj_fixed, c2.proj_fixed
    dim_f = c_full.fixed_dim
    dim_f1 = c1.fixed_dim
    dim_f2 = c2.fixed_dim
    eye = np.eye(dim)
    fixed = _range_basis(p1 @ p2, dim_f)
    b1 = _range_basis(p1 @ (eye - p2), dim_f1 - dim_f)
    b2 = _range_basis(p2 @ (eye - p1), dim_f2 - dim_f)
    b0 = _range_basis((eye - p1) @ (eye - p2), dim - dim_f1 - dim_f2 + dim_f)
    return ProductDecomposition(fixed=fixed, b0=b0, b1=b1, b2=b2)


def indicator_vector(subset, dim: int) -> np.ndarray:
    """The probe f_E = 2 * 1_E - 1 for a proper nonempty subset of atoms."""
    subset = sorted(set(int(i) for i in subset))
    if not subset:
        raise ValueError("subset must be nonempty")
    if any(i < 0 or i >= dim for i in subset):
        raise ValueError("subset indices out of range")
    if len(subset) == dim:
        raise ValueError("subset must be proper (f_E would be constant)")
    f = -np.ones(dim)
    f[subset] = 1.0
    return f


def zero_mean_rep(perms: dict, weights, p: float, k_set=None):
    """Quasi-regular representation of a permutation action, with its zero-mean complement.

    ``perms`` maps generator names to permutations of the atoms (the action
    maps); the representation acts by (rho(g) f)(x) = f(g^-1 x) twisted by
    the p-th root of the weight ratio, which is exactly the Lamperti form.
    Returns (rep, zero_mean_basis) where the basis columns span
    { f : sum_i w_i f_i = 0 }.
    """
    arrays = {name: np.asarray(perm, dtype=int) for name, perm in perms.items()}
    dims = {arr.shape[0] for arr in arrays.values()}
    if len(dims) != 1:
        raise ValueError("all permutations must act on the same atom set")
    n = dims.pop()
    for name, arr in arrays.items():
        if sorted(arr.tolist()) != list(range(n)):
            raise ValueError(f"action map for {name!r} is not invertible")
    weights = np.asarray(weights, dtype=float)
    space = LpSpace(n, p, weights)
    group, _ = group_from_permutations(arrays, k_set=k_set)
    images = {}
    for name in group.generator_names:
        sigma = np.argsort(arrays[name])  # coordinates pull back along g^-1
        images[name] = LampertiIsometry(sigma, np.ones(n), space, space)
    rep = Representation(group, space, images)
    zero_mean_basis = linalg.null_space(weights[None, :], rcond=1e-12)
    return rep, zero_mean_basis


def indicator_displacement(rep: Representation, subset, k_words=None) -> float:
    """max_g ||rho(g) f_E - f_E|| / ||f_E|| over the designated generating set."""
    f = indicator_vector(subset, rep.space.dim)
    words = list(k_words) if k_words is not None else list(rep.group.k_set)
    norm_f = rep.space.norm(f)
    return max(rep.space.norm(rep.apply(w, f) - f) for w in words) / norm_f
