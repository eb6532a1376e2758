"""Induction across finite-index subgroups, product splitting, superrigidity.

For a subgroup S of a finite group G with fundamental domain D (one
representative per left coset gS) and return map chi: G -> S determined by
chi^-1(e) = D and chi(g s^-1) = s chi(g), the induced space is the lp sum
of one copy of the base space per coset, and

    (h f)(block of d) = rho(chi(h^-1 d)) f(block of d'),
    b_ind(h)(block of d) = b(chi(h^-1 d)),

with d' = h^-1 d chi(h^-1 d) back in D.  Splitting decomposes a cocycle of
a product group along the canonical four-way invariant decomposition and
solves the mixing part as a coboundary; the superrigidity pipeline chains
induction, splitting, and the base-block pullback.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cocycle import AffineAction, Cocycle, coboundary_solve
from .errors import Refusal
from .gap import kazhdan_gap
from .groups import TableGroup
from .representation import Representation, fixed_subspace, product_decomposition
from .spaces import LpSpace

__all__ = [
    "CosetStructure",
    "InducedSpace",
    "induce_rep",
    "induce_cocycle",
    "TransferReport",
    "fixed_point_transfer",
    "SplitReport",
    "split_action",
    "PipelineReport",
    "superrigidity_pipeline",
]


@dataclass(frozen=True, eq=False)
class CosetStructure:
    """Left-coset bookkeeping for a subgroup of a table-backed group.

    The fundamental domain takes the smallest-index representative of each
    coset (which is the identity for the identity coset, since the identity
    has index 0 in all constructors here and membership of e in D keeps the
    base-block pullback untwisted).
    """

    group: TableGroup
    subgroup_elements: tuple
    subgroup_generators: dict          # name -> element index in G
    domain: tuple = field(init=False)  # coset representatives, G indices
    chi: np.ndarray = field(init=False)
    coset_of: np.ndarray = field(init=False)
    subgroup: TableGroup = field(init=False)
    sub_index_of: dict = field(init=False)

    def __init__(self, group: TableGroup, subgroup_elements, subgroup_generators: dict):
        object.__setattr__(self, "group", group)
        elems = tuple(sorted(set(int(i) for i in subgroup_elements)))
        if not group.is_subgroup(elems):
            raise ValueError("subgroup_elements is not closed under the table")
        object.__setattr__(self, "subgroup_elements", elems)
        object.__setattr__(self, "subgroup_generators", dict(subgroup_generators))
        m = group.order
        k = len(elems)
        if m % k != 0:
            raise AssertionError("Lagrange violated; table corrupt")

        # left cosets gS; representative = smallest index
        coset_of = -np.ones(m, dtype=int)
        domain = []
        for g in range(m):
            if coset_of[g] >= 0:
                continue
            members = sorted(group.mult(g, s) for s in elems)
            rep = members[0]
            idx = len(domain)
            domain.append(rep)
            for h in members:
                if coset_of[h] >= 0:
                    raise ValueError("cosets do not partition the group")
                coset_of[h] = idx
        if group.identity not in domain:
            raise AssertionError("identity coset representative is not the identity")

        # chi(g): the unique s in S with g s in D
        chi = -np.ones(m, dtype=int)
        dset = set(domain)
        for g in range(m):
            hits = [s for s in elems if group.mult(g, s) in dset]
            if len(hits) != 1:
                raise ValueError("return map chi is not well defined; cosets broken")
            chi[g] = hits[0]
        # equivariance chi(g s^-1) = s chi(g), exhaustive
        for g in range(m):
            for s in elems:
                lhs = chi[group.mult(g, group.inv(s))]
                rhs = group.mult(s, chi[g])
                if lhs != rhs:
                    raise ValueError("chi equivariance fails; invalid coset structure")

        sub_index_of = {g: i for i, g in enumerate(elems)}
        table = np.array([[sub_index_of[group.mult(a, b)] for b in elems] for a in elems])
        gens = {}
        for name, g in self.subgroup_generators.items():
            if g not in sub_index_of:
                raise ValueError(f"subgroup generator {name!r} is not in the subgroup")
            gens[name] = sub_index_of[g]
        subgroup = TableGroup(table, sub_index_of[group.identity], gens)
        object.__setattr__(self, "domain", tuple(domain))
        object.__setattr__(self, "chi", chi)
        object.__setattr__(self, "coset_of", coset_of)
        object.__setattr__(self, "subgroup", subgroup)
        object.__setattr__(self, "sub_index_of", sub_index_of)

    @property
    def index(self) -> int:
        return len(self.domain)


@dataclass(frozen=True, eq=False)
class InducedSpace:
    """lp sum of [G:S] copies of the base space (counting measure on cosets)."""

    base: LpSpace
    index: int
    ambient: LpSpace = field(init=False)

    def __init__(self, base: LpSpace, index: int):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "index", index)
        weights = np.tile(base.weights, index)
        object.__setattr__(self, "ambient", LpSpace(base.dim * index, base.p, weights))

    def block(self, section: np.ndarray, i: int) -> np.ndarray:
        d = self.base.dim
        return np.asarray(section)[i * d : (i + 1) * d]

    def blocks(self, section: np.ndarray):
        return [self.block(section, i) for i in range(self.index)]

    def norm_pow_by_blocks(self, section) -> float:
        return float(sum(self.base.norm_pow(b) for b in self.blocks(np.asarray(section, dtype=float))))


def _induction_routing(cs: CosetStructure, h: int):
    """For each target block (rep d), the acting subgroup element and source block."""
    group = cs.group
    h_inv = group.inv(h)
    routing = []
    for d in cs.domain:
        g = group.mult(h_inv, d)
        s = int(cs.chi[g])
        src = int(cs.coset_of[group.mult(g, s)])
        routing.append((cs.sub_index_of[s], src))
    return routing


def induce_rep(cs: CosetStructure, rep_sub: Representation) -> tuple:
    """Induce a subgroup representation to the whole group.

    Returns (induced_space, induced_representation); generator images are
    block signed-permutations of blocks, isometric, and satisfy the full
    multiplication table of G (validated on construction).
    """
    same = rep_sub.group is cs.subgroup or (
        isinstance(rep_sub.group, TableGroup)
        and np.array_equal(rep_sub.group.table, cs.subgroup.table)
        and rep_sub.group.generators == cs.subgroup.generators
    )
    if not same:
        raise ValueError("representation is not over the coset structure's subgroup")
    ind = InducedSpace(rep_sub.space, cs.index)
    d = rep_sub.space.dim
    sub_mats = rep_sub.element_matrices()
    images = {}
    for name in cs.group.generator_names:
        h = cs.group.generators[name]
        big = np.zeros((ind.ambient.dim, ind.ambient.dim))
        for tgt, (s_idx, src) in enumerate(_induction_routing(cs, h)):
            big[tgt * d : (tgt + 1) * d, src * d : (src + 1) * d] = sub_mats[s_idx]
        images[name] = big
    rep = Representation(cs.group, ind.ambient, images, require_isometric=rep_sub.require_isometric)
    return ind, rep


def induce_cocycle(cs: CosetStructure, cocycle_sub: Cocycle, induced_rep: Representation, validate: bool = True) -> Cocycle:
    """Induce a subgroup cocycle: block at d of b_ind(h) is b(chi(h^-1 d))."""
    sub_group = cs.subgroup
    d = cocycle_sub.space.dim
    sub_words = sub_group.element_words()
    sub_values = {i: cocycle_sub.value(w) for i, w in sub_words.items()}
    values = {}
    for name in cs.group.generator_names:
        h = cs.group.generators[name]
        vec = np.zeros(induced_rep.space.dim)
        for tgt, (s_idx, _src) in enumerate(_induction_routing(cs, h)):
            vec[tgt * d : (tgt + 1) * d] = sub_values[s_idx]
        values[name] = vec
    return Cocycle(induced_rep, values, validate=validate)


@dataclass(frozen=True, eq=False)
class TransferReport:
    status: str
    sub_residual: float
    induced_residual: float
    classification_agrees: bool
    block_constancy: float      # worst pairwise block deviation of the G-fixed section
    block_value_displacement: float  # affine S-displacement of the block value
    constant_section_displacement: float  # G-displacement of the lifted constant section


def fixed_point_transfer(cs: CosetStructure, cocycle_sub: Cocycle, tol: float = 1e-8, validate: bool = True) -> TransferReport:
    """Fixed points transfer both ways between a subgroup action and its induction.

    A G-fixed section must be block-constant with S-fixed value; an S-fixed
    point lifts to a G-fixed constant section.  When neither side has a
    fixed point the two coboundary residuals must agree in classification.
    """
    ind, rep_g = induce_rep(cs, cocycle_sub.rep)
    coc_g = induce_cocycle(cs, cocycle_sub, rep_g, validate=validate)
    sub_action = AffineAction(cocycle_sub)
    g_action = AffineAction(coc_g)

    sol_sub = coboundary_solve(cocycle_sub, tol)
    sol_g = coboundary_solve(coc_g, tol)
    agrees = sol_sub.is_coboundary == sol_g.is_coboundary

    block_constancy = np.nan
    block_disp = np.nan
    const_disp = np.nan
    if sol_g.is_coboundary:
        blocks = ind.blocks(sol_g.vector)
        block_constancy = max(
            (cocycle_sub.space.norm(a - b) for a in blocks for b in blocks), default=0.0
        )
        base_idx = cs.domain.index(cs.group.identity)
        block_disp = sub_action.max_displacement(blocks[base_idx])
    if sol_sub.is_coboundary:
        section = np.tile(sol_sub.vector, cs.index)
        const_disp = g_action.max_displacement(section)

    ok = agrees
    if sol_g.is_coboundary:
        ok = ok and block_constancy <= 10 * tol and block_disp <= 10 * tol
    if sol_sub.is_coboundary:
        ok = ok and const_disp <= 10 * tol
    return TransferReport(
        status="pass" if ok else "fail",
        sub_residual=sol_sub.residual,
        induced_residual=sol_g.residual,
        classification_agrees=agrees,
        block_constancy=block_constancy,
        block_value_displacement=block_disp,
        constant_section_displacement=const_disp,
    )


@dataclass(frozen=True, eq=False)
class SplitReport:
    status: str
    dims: dict                   # fixed, b0, carrier1, carrier2
    gap_b0: float
    fixed_cocycle_norm: float    # size of the dropped invariant-direction component
    component1: dict             # generator name -> vector (list) of the factor-1 cocycle
    component2: dict
    coboundary_vector: np.ndarray
    reconstruction_residual: float
    support_residual: float
    factor_validation: dict      # per factor: relator residual of the component cocycle
    cross_leak: float            # worst component value on the other factor's generators


def split_action(
    rep: Representation,
    cocycle: Cocycle,
    gens1,
    gens2,
    gap_threshold: float = 0.01,
    tol: float = 1e-8,
    gap_kwargs: dict | None = None,
) -> SplitReport:
    """Split a product-group cocycle as b = b1 + b2 + coboundary.

    Carrier of b_i is the part fixed by the *other* factor, where the
    action factors through G_i.  Hypotheses enforced: commuting factors,
    no invariant-direction translation part (finite desk groups force the
    dropped component to vanish), and a gap above ``gap_threshold`` for the
    full product on the mixing piece B0 (else the op refuses).
    """
    if not isinstance(rep.group, TableGroup):
        raise ValueError("split_action needs a table-backed product group")
    gens1, gens2 = list(gens1), list(gens2)
    pd = product_decomposition(rep, gens1, gens2)
    dim = rep.space.dim
    space = rep.space

    # invariant-vector reduction: drop the Fix(G) component of the cocycle
    fixed_norm = 0.0
    values = {}
    if pd.fixed.shape[1] > 0:
        basis = np.hstack([pd.fixed, pd.b1, pd.b2, pd.b0])
        coords = np.linalg.solve(basis, np.column_stack([cocycle.values[n] for n in rep.generator_names]))
        k = pd.fixed.shape[1]
        fixed_norm = max(
            space.norm(pd.fixed @ coords[:k, i]) for i in range(len(rep.generator_names))
        )
        if fixed_norm > 10 * tol:
            raise Refusal(
                f"cocycle has a translation part of size {fixed_norm:.3e} along invariant vectors"
            )
        for i, name in enumerate(rep.generator_names):
            values[name] = cocycle.values[name] - pd.fixed @ coords[:k, i]
    else:
        values = {name: cocycle.values[name].copy() for name in rep.generator_names}

    gap_opts = {"restarts": 16}
    gap_opts.update(gap_kwargs or {})
    gap = kazhdan_gap(
        rep,
        k_words=[*gens1, *gens2],
        basis=pd.b0 if pd.b0.shape[1] else None,
        **gap_opts,
    ) if pd.b0.shape[1] else None
    gap_value = np.inf if gap is None else gap.upper
    if gap_value <= gap_threshold:
        raise Refusal(
            f"gap {gap_value:.4f} on the mixing piece is not above threshold {gap_threshold}"
        )

    # commuting projections onto the three carriers
    carrier1 = pd.b2  # fixed by G2: the action there factors through G1
    carrier2 = pd.b1
    basis_all = np.hstack([pd.fixed, carrier1, carrier2, pd.b0])
    inv_all = np.linalg.inv(basis_all)
    kf, k1, k2, k0 = pd.fixed.shape[1], carrier1.shape[1], carrier2.shape[1], pd.b0.shape[1]

    def split_vec(v):
        coords = inv_all @ v
        return (
            carrier1 @ coords[kf : kf + k1],
            carrier2 @ coords[kf + k1 : kf + k1 + k2],
            pd.b0 @ coords[kf + k1 + k2 :],
        )

    comp1, comp2, comp0 = {}, {}, {}
    for name in rep.generator_names:
        c1, c2, c0 = split_vec(values[name])
        comp1[name], comp2[name], comp0[name] = c1, c2, c0

    # the mixing component must be a coboundary of a vector in B0
    if k0 > 0:
        blocks = []
        rhs = []
        for name in rep.generator_names:
            blocks.append((np.eye(dim) - rep.generator_matrix(name)) @ pd.b0)
            rhs.append(comp0[name])
        z, *_ = np.linalg.lstsq(np.vstack(blocks), np.concatenate(rhs), rcond=None)
        v0 = pd.b0 @ z
    else:
        v0 = np.zeros(dim)

    recon = 0.0
    support = 0.0
    for name in rep.generator_names:
        boundary = v0 - rep.generator_matrix(name) @ v0
        recon = max(
            recon,
            space.norm(values[name] - comp1[name] - comp2[name] - boundary),
        )
        # support: components stay in their carriers
        for comp, kdim, lo in ((comp1[name], k1, kf), (comp2[name], k2, kf + k1)):
            coords = inv_all @ comp
            mask = np.ones(dim, dtype=bool)
            mask[lo : lo + kdim] = False
            support = max(support, float(np.max(np.abs(coords[mask]), initial=0.0)))

    factor_validation = {}
    cross_leak = 0.0
    for label, gens, own_comp, other_comp in (
        ("factor1", gens1, comp1, comp2),
        ("factor2", gens2, comp2, comp1),
    ):
        sub_elems = rep.group.subgroup_closure([rep.group.generators[g] for g in gens])
        sub_idx = {g: i for i, g in enumerate(sub_elems)}
        table = np.array(
            [[sub_idx[rep.group.mult(a, b)] for b in sub_elems] for a in sub_elems]
        )
        sub_group = TableGroup(table, sub_idx[rep.group.identity], {g: sub_idx[rep.group.generators[g]] for g in gens})
        sub_rep = Representation(sub_group, space, {g: rep.images[g] for g in gens},
                                 require_isometric=rep.require_isometric, validate=False)
        sub_coc = Cocycle(sub_rep, {g: own_comp[g] for g in gens}, validate=False)
        factor_validation[label] = sub_coc.relator_residual
        for g in gens:
            cross_leak = max(cross_leak, space.norm(other_comp[g]))

    ok = recon <= tol and support <= tol and max(factor_validation.values()) <= 10 * tol
    return SplitReport(
        status="pass" if ok else "fail",
        dims={"fixed": kf, "b0": k0, "carrier1": k1, "carrier2": k2},
        gap_b0=gap_value,
        fixed_cocycle_norm=fixed_norm,
        component1={k: v.copy() for k, v in comp1.items()},
        component2={k: v.copy() for k, v in comp2.items()},
        coboundary_vector=v0,
        reconstruction_residual=recon,
        support_residual=support,
        factor_validation=factor_validation,
        cross_leak=cross_leak,
    )


@dataclass(frozen=True, eq=False)
class PipelineReport:
    status: str
    stage: str                   # last stage completed
    index: int
    projections_dense: bool
    split: SplitReport | None
    base_dims: dict              # dims of the pulled-back carriers and their overlap
    sub_reconstruction_residual: float
    component1: dict | None      # subgroup generator name -> pulled-back value
    component2: dict | None


def superrigidity_pipeline(
    product_info: dict,
    subgroup_elements,
    subgroup_generators: dict,
    cocycle_sub: Cocycle,
    gap_threshold: float = 0.01,
    tol: float = 1e-8,
    gap_kwargs: dict | None = None,
) -> PipelineReport:
    """Induce, split, and pull back a lattice cocycle over a finite product group.

    ``product_info`` is the record produced by :func:`lplab.groups.product_group`.
    Stages: dense-projection check, coset structure, induction of the
    representation and cocycle, product splitting on the induced space, and
    the base-block pullback of each component (evaluating sections at the
    identity coset, which inverts the orbit-map embedding of carrier
    vectors).  Errors carry their stage in the message.
    """
    group: TableGroup = product_info["group"]
    stage = "projections"
    try:
        proj = product_info["project"]
        f1 = product_info["factor1_generators"]
        f2 = product_info["factor2_generators"]
        order2 = len({proj(g)[1] for g in range(group.order)})
        order1 = group.order // order2
        m1 = {proj(g)[0] for g in subgroup_elements}
        m2 = {proj(g)[1] for g in subgroup_elements}
        if len(m1) != order1 or len(m2) != order2:
            raise Refusal("subgroup projections are not dense (do not surject onto the factors)")

        stage = "coset-structure"
        cs = CosetStructure(group, subgroup_elements, subgroup_generators)

        stage = "induction"
        ind, rep_g = induce_rep(cs, cocycle_sub.rep)
        coc_g = induce_cocycle(cs, cocycle_sub, rep_g)

        stage = "split"
        split = split_action(rep_g, coc_g, f1, f2, gap_threshold=gap_threshold, tol=tol, gap_kwargs=gap_kwargs)

        stage = "pullback"
        base_idx = cs.domain.index(group.identity)
        d = cocycle_sub.space.dim

        def base_block(vec):
            return vec[base_idx * d : (base_idx + 1) * d]

        comp_cocycles = [
            Cocycle(rep_g, split.component1, validate=False),
            Cocycle(rep_g, split.component2, validate=False),
        ]
        g_words = group.element_words()
        sub_names = sorted(cs.subgroup.generators)
        pulled = [{}, {}]
        boundary = {}
        for name in sub_names:
            g_idx = cs.subgroup_generators[name]
            word = g_words[g_idx]
            for out, coc in zip(pulled, comp_cocycles):
                out[name] = base_block(coc.value(word))
            v0 = split.coboundary_vector
            boundary[name] = base_block(v0 - rep_g.operator(word) @ v0)

        recon = 0.0
        for name in sub_names:
            recon = max(
                recon,
                cocycle_sub.space.norm(
                    cocycle_sub.values[name] - pulled[0][name] - pulled[1][name] - boundary[name]
                ),
            )

        # pulled-back carriers: base blocks of the sections fixed by the other factor
        e1 = fixed_subspace(rep_g, f2)  # carrier of the factor-1 component
        e2 = fixed_subspace(rep_g, f1)
        b1_base = e1[base_idx * d : (base_idx + 1) * d, :]
        b2_base = e2[base_idx * d : (base_idx + 1) * d, :]
        r1 = int(np.linalg.matrix_rank(b1_base, tol=1e-9)) if b1_base.size else 0
        r2 = int(np.linalg.matrix_rank(b2_base, tol=1e-9)) if b2_base.size else 0
        both = np.hstack([b1_base, b2_base])
        r_sum = int(np.linalg.matrix_rank(both, tol=1e-9)) if both.size else 0
        base_dims = {"b1": r1, "b2": r2, "overlap": r1 + r2 - r_sum}

        status = "pass" if (split.status == "pass" and recon <= 10 * tol) else "fail"
        return PipelineReport(
            status=status,
            stage="complete",
            index=cs.index,
            projections_dense=True,
            split=split,
            base_dims=base_dims,
            sub_reconstruction_residual=recon,
            component1=pulled[0],
            component2=pulled[1],
        )
    except Refusal as exc:
        raise Refusal(f"[stage {stage}] {exc}") from exc
