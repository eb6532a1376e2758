"""Task execution: one scenario in, one deterministic report out."""

from __future__ import annotations

import numpy as np

from .cocycle import AffineAction, coboundary_solve, displacement_bound_check, mautner_check
from .convex import fisher_margulis_iterate, fixed_point_circumcenter, klee_search
from .errors import Refusal
from .gap import kazhdan_gap
from .geometry import modulus_table, schoenberg_gram, schoenberg_violation_search
from .groups import TableGroup
from .induction import CosetStructure, fixed_point_transfer, induce_cocycle, induce_rep, split_action, superrigidity_pipeline
from .lamperti import LampertiIsometry, mazur_conjugate, mazur_conjugation_residual
from .reports import Report
from .representation import canonical_complement
from .scenario import Scenario, ScenarioError, _build_cocycle, _build_representation
from .spaces import mazur_map

__all__ = ["execute", "sweep"]


def execute(scenario: Scenario, seed: int | None = None, tol: float | None = None, budget: int | None = None) -> Report:
    """Run the scenario's task and return its report.

    ``seed``/``tol``/``budget`` override the scenario values (the CLI wires
    these to flags and the LPLAB_SEED variable).
    """
    command = scenario.task["command"]
    eff_seed = scenario.seed if seed is None else int(seed)
    tolerances = dict(scenario.tolerances)
    if tol is not None:
        tolerances["solver"] = float(tol)
    handler = _HANDLERS[command]
    status, payload = handler(scenario, eff_seed, tolerances, budget)
    return Report(
        scenario=scenario.name,
        task=command,
        status=status,
        payload=payload,
        seed=eff_seed,
        tolerances=tolerances,
    )


def sweep(scenario: Scenario, p_values, seed: int | None = None, tol: float | None = None, budget: int | None = None):
    """Re-run the scenario across exponents; per-cell errors are recorded, not raised."""
    import time

    cells = []
    for p in p_values:
        t0 = time.perf_counter()
        try:
            cell = execute(scenario.with_exponent(float(p)), seed=seed, tol=tol, budget=budget)
        except Refusal as exc:
            cell = Report(f"{scenario.name}@p={p:g}", scenario.task["command"], "refused",
                          {"error": str(exc)}, scenario.seed if seed is None else seed, scenario.tolerances)
        except (ScenarioError, ValueError) as exc:
            cell = Report(f"{scenario.name}@p={p:g}", scenario.task["command"], "refused",
                          {"error": str(exc)}, scenario.seed if seed is None else seed, scenario.tolerances)
        cells.append((float(p), cell, time.perf_counter() - t0))
    return cells


def _check(name: str, value, bound, kind: str = "le") -> dict:
    """Explicit inequality record: every pass/fail claim carries one."""
    value = float(value)
    bound = float(bound)
    if kind == "le":
        ok = value <= bound
    elif kind == "ge":
        ok = value >= bound
    elif kind == "gt":
        ok = value > bound
    elif kind == "eq":
        ok = value == bound
    else:  # pragma: no cover
        raise ValueError(f"unknown check kind {kind!r}")
    return {"name": name, "value": value, "bound": bound, "kind": kind, "ok": ok}


def _status(checks) -> str:
    return "pass" if all(c["ok"] for c in checks) else "fail"


def _require_rep(scenario: Scenario):
    if scenario.representation is None:
        raise ScenarioError("$.representation", "this task requires a representation")
    return scenario.representation


def _require_cocycle(scenario: Scenario):
    if scenario.cocycle is None:
        raise ScenarioError("$.cocycle", "this task requires a cocycle")
    return scenario.cocycle


def _task_decompose(scenario, seed, tolerances, budget):
    rep = _require_rep(scenario)
    if scenario.space.p == 1.0:
        raise Refusal("canonical complement requires p > 1")
    cc = canonical_complement(rep)
    idem = float(np.max(np.abs(cc.proj_fixed @ cc.proj_fixed - cc.proj_fixed)))
    comm = max(
        float(np.max(np.abs(rep.generator_matrix(n) @ cc.proj_fixed - cc.proj_fixed @ rep.generator_matrix(n))))
        for n in rep.generator_names
    )
    checks = [
        _check("projection_idempotency", idem, 1e-10),
        _check("projection_commutation", comm, 1e-10),
        _check("dimension_completeness", cc.fixed_dim + cc.complement_dim, rep.space.dim, "eq"),
    ]
    payload = {
        "fixed_dim": cc.fixed_dim,
        "complement_dim": cc.complement_dim,
        "projection_idempotency": idem,
        "projection_commutation": comm,
        "checks": checks,
    }
    return _status(checks), payload


def _task_gap(scenario, seed, tolerances, budget):
    rep = _require_rep(scenario)
    if scenario.space.p == 1.0:
        raise Refusal("gap estimation requires p > 1")
    params = scenario.task
    restarts = int(params.get("restarts", 16 if budget is None else max(4, budget // 25)))
    est = kazhdan_gap(rep, k_words=params.get("k"), restarts=restarts, seed=seed)
    if est.witness is None:
        checks = [_check("complement_dim", est.complement_dim, 0, "eq")]
    else:
        words = params.get("k") or list(rep.group.k_set)
        achieved = max(
            scenario.space.norm(rep.apply(w, est.witness) - est.witness) for w in words
        )
        checks = [_check("witness_achieves_upper", abs(achieved - est.upper), 1e-10)]
    payload = {
        "gap_upper": est.upper,
        "gap_lower_heuristic": est.heuristic_lower,
        "complement_dim": est.complement_dim,
        "witness": [] if est.witness is None else est.witness,
        "witness_norm": 0.0 if est.witness is None else scenario.space.norm(est.witness),
        "checks": checks,
    }
    return _status(checks), payload


def _task_fixpoint(scenario, seed, tolerances, budget):
    coc = _require_cocycle(scenario)
    if scenario.space.p == 1.0:
        raise Refusal("fixed-point solvers require p > 1")
    action = AffineAction(coc)
    params = scenario.task
    method = params.get("method", "circumcenter")
    x0 = np.asarray(params.get("x0", np.zeros(scenario.space.dim)), dtype=float)
    tol = float(params.get("tol", tolerances["solver"]))
    if method == "circumcenter":
        res = fixed_point_circumcenter(action, x0, fix_tol=tol)
        status = {"fixed": "pass", "not-fixed": "fail", "unbounded": "not-applicable"}[res.status]
        checks = [] if res.point is None else [_check("displacement", res.displacement, tol)]
        payload = {
            "outcome": res.status,
            "point": [] if res.point is None else res.point,
            "displacement": res.displacement,
            "orbit_size": res.orbit_size,
            "orbit_diameter": res.orbit_diameter,
            "checks": checks,
        }
        return status, payload
    if method == "fisher-margulis":
        res = fisher_margulis_iterate(
            action,
            k_words=params.get("k"),
            x0=x0,
            c_mult=float(params.get("c", 1.0)),
            max_iter=int(params.get("max_iter", 60)),
            tol=tol,
            seed=seed,
        )
        status = {"fixed": "pass", "non-contracting": "not-applicable", "max-iter": "fail"}[res.status]
        radii = list(res.radii)
        checks = [_check("halving_step_%d" % i, b, a / 2.0) for i, (a, b) in enumerate(zip(radii, radii[1:]))]
        if res.status == "fixed":
            checks.append(_check("displacement", res.displacement, tol))
        payload = {
            "outcome": res.status,
            "radii": radii,
            "steps": len(res.trace),
            "terminal": res.terminal,
            "displacement": res.displacement,
            "trace_csv": res.trace_csv(scenario.space),
            "checks": checks,
        }
        return status, payload
    raise ScenarioError("$.task.method", f"unknown fixpoint method {method!r}")


def _task_cobound(scenario, seed, tolerances, budget):
    coc = _require_cocycle(scenario)
    tol = float(scenario.task.get("tol", 1e-8))
    sol = coboundary_solve(coc, tol=tol)
    payload = {
        "vector": sol.vector,
        "residual": sol.residual,
        "is_coboundary": sol.is_coboundary,
        "checks": [_check("residual_classifies_coboundary", sol.residual, tol)],
    }
    return "pass", payload


def _coset_structure(scenario) -> CosetStructure:
    if not isinstance(scenario.group, TableGroup):
        raise Refusal("induction requires a table-backed ambient group")
    params = scenario.task
    subgroup = params.get("subgroup")
    sub_gens = params.get("subgroup_generators")
    if subgroup is None or sub_gens is None:
        raise ScenarioError("$.task", "induce/superrigid need 'subgroup' and 'subgroup_generators'")
    return CosetStructure(scenario.group, subgroup, {str(k): int(v) for k, v in sub_gens.items()})


def _sub_rep_and_cocycle(scenario, cs):
    rep_spec = scenario.raw.get("representation")
    if rep_spec is None:
        raise ScenarioError("$.representation", "this task requires a representation (over the subgroup)")
    rep = _build_representation(rep_spec, scenario.space, cs.subgroup)
    coc = None
    if "cocycle" in scenario.raw:
        coc = _build_cocycle(scenario.raw["cocycle"], rep)
    return rep, coc


def _task_induce(scenario, seed, tolerances, budget):
    cs = _coset_structure(scenario)
    rep_sub, coc_sub = _sub_rep_and_cocycle(scenario, cs)
    ind, rep_g = induce_rep(cs, rep_sub)
    rng = np.random.default_rng(seed)
    f = rng.standard_normal(ind.ambient.dim)
    norm_identity_dev = abs(ind.ambient.norm_pow(f) - ind.norm_pow_by_blocks(f))
    checks = [
        _check("relation_residual", rep_g.relation_residual, 1e-10),
        _check("norm_identity_deviation", norm_identity_dev, 1e-12 * max(1.0, ind.ambient.norm_pow(f))),
    ]
    payload = {
        "index": cs.index,
        "induced_dim": ind.ambient.dim,
        "relation_residual": rep_g.relation_residual,
        "norm_identity_deviation": norm_identity_dev,
    }
    if coc_sub is not None:
        coc_g = induce_cocycle(cs, coc_sub, rep_g)
        transfer = fixed_point_transfer(cs, coc_sub, tol=float(scenario.task.get("tol", 1e-8)))
        checks.append(_check("induced_cocycle_residual", coc_g.relator_residual, 1e-10))
        checks.append(_check("transfer_passes", 1.0 if transfer.status == "pass" else 0.0, 1.0, "eq"))
        payload.update(
            {
                "induced_cocycle_residual": coc_g.relator_residual,
                "transfer_status": transfer.status,
                "sub_residual": transfer.sub_residual,
                "induced_residual": transfer.induced_residual,
                "classification_agrees": transfer.classification_agrees,
            }
        )
    payload["checks"] = checks
    return _status(checks), payload


def _split_factors(scenario):
    params = scenario.task
    extras = scenario.group_extras.get("product")
    f1 = params.get("factor1", extras["factor1_generators"] if extras else None)
    f2 = params.get("factor2", extras["factor2_generators"] if extras else None)
    if f1 is None or f2 is None:
        raise ScenarioError("$.task", "split needs factor1/factor2 generator lists (or a product group)")
    return list(f1), list(f2)


def _task_split(scenario, seed, tolerances, budget):
    rep = _require_rep(scenario)
    coc = _require_cocycle(scenario)
    f1, f2 = _split_factors(scenario)
    report = split_action(
        rep,
        coc,
        f1,
        f2,
        gap_threshold=float(scenario.task.get("gap_threshold", 0.01)),
        tol=float(scenario.task.get("tol", 1e-8)),
        gap_kwargs={"seed": seed},
    )
    tol = float(scenario.task.get("tol", 1e-8))
    checks = [
        _check("gap_b0_above_threshold", report.gap_b0, float(scenario.task.get("gap_threshold", 0.01)), "gt"),
        _check("reconstruction_residual", report.reconstruction_residual, tol),
        _check("support_residual", report.support_residual, tol),
        _check("factor_relator_residual", max(report.factor_validation.values()), 10 * tol),
    ]
    payload = {
        "dims": report.dims,
        "gap_b0": report.gap_b0,
        "reconstruction_residual": report.reconstruction_residual,
        "support_residual": report.support_residual,
        "cross_leak": report.cross_leak,
        "factor_validation": report.factor_validation,
        "component1": {k: v for k, v in report.component1.items()},
        "component2": {k: v for k, v in report.component2.items()},
        "checks": checks,
    }
    return report.status, payload


def _task_superrigid(scenario, seed, tolerances, budget):
    extras = scenario.group_extras.get("product")
    if extras is None:
        raise Refusal("superrigid requires a product group")
    cs = _coset_structure(scenario)
    rep_sub, coc_sub = _sub_rep_and_cocycle(scenario, cs)
    if coc_sub is None:
        raise ScenarioError("$.cocycle", "superrigid requires a cocycle")
    report = superrigidity_pipeline(
        extras,
        list(scenario.task["subgroup"]),
        {str(k): int(v) for k, v in scenario.task["subgroup_generators"].items()},
        coc_sub,
        gap_threshold=float(scenario.task.get("gap_threshold", 0.01)),
        tol=float(scenario.task.get("tol", 1e-8)),
        gap_kwargs={"seed": seed},
    )
    tol = float(scenario.task.get("tol", 1e-8))
    checks = [
        _check("split_reconstruction_residual", report.split.reconstruction_residual, tol),
        _check("pullback_reconstruction_residual", report.sub_reconstruction_residual, 10 * tol),
    ]
    payload = {
        "index": report.index,
        "split_dims": report.split.dims,
        "gap_b0": report.split.gap_b0,
        "base_dims": report.base_dims,
        "overlap_dim": report.base_dims["overlap"],
        "reconstruction_residual": report.sub_reconstruction_residual,
        "component1": report.component1,
        "component2": report.component2,
        "checks": checks,
    }
    return report.status, payload


def _task_mazur(scenario, seed, tolerances, budget):
    rep = _require_rep(scenario)
    n_samples = int(scenario.task.get("n_samples", 50))
    worst_conj = 0.0
    worst_linear = 0.0
    rng = np.random.default_rng(seed)
    for name in rep.generator_names:
        op = rep.images[name]
        if not isinstance(op, LampertiIsometry):
            raise Refusal("mazur conjugation task needs Lamperti images")
        worst_conj = max(worst_conj, mazur_conjugation_residual(op, n_samples, seed))
        conj = mazur_conjugate(op)
        src2 = conj.source
        for _ in range(10):
            a, b = rng.standard_normal(2)
            x, y = src2.random_vector(rng), src2.random_vector(rng)
            def nonlinear(v):
                return mazur_map(op.target, op.apply(mazur_map(src2, v, op.source.p)), 2.0)
            dev = nonlinear(a * x + b * y) - a * nonlinear(x) - b * nonlinear(y)
            worst_linear = max(worst_linear, float(np.max(np.abs(dev))))
    checks = [
        _check("conjugation_residual", worst_conj, 1e-10),
        _check("linearity_residual", worst_linear, 1e-10),
    ]
    return _status(checks), {
        "conjugation_residual": worst_conj,
        "linearity_residual": worst_linear,
        "samples": n_samples,
        "checks": checks,
    }


def _task_schoenberg(scenario, seed, tolerances, budget):
    space = scenario.space
    params = scenario.task
    mode = params.get("mode", "random" if space.p <= 2.0 else "search")
    if mode == "random":
        n_configs = int(params.get("n_configs", 200 if budget is None else budget))
        n_points = int(params.get("n_points", 6))
        s_values = params.get("s", [0.1, 1.0, 10.0])
        rng = np.random.default_rng(seed)
        lam_min = np.inf
        for _ in range(n_configs):
            m = int(rng.integers(2, n_points + 1))
            pts = rng.standard_normal((m, space.dim))
            for s in s_values:
                _, lam = schoenberg_gram(pts, float(s), space)
                lam_min = min(lam_min, lam)
        checks = []
        if space.p <= 2.0:
            checks.append(_check("lambda_min", lam_min, -1e-9, "ge"))
        return _status(checks), {
            "lambda_min": lam_min,
            "configs": n_configs,
            "primary": lam_min,
            "checks": checks,
        }
    if mode == "search":
        trials = int(params.get("trials", 2000 if budget is None else budget))
        found = schoenberg_violation_search(space.p, trials=trials, seed=seed)
        payload = {"found": found is not None, "trials": trials}
        checks = []
        if found is not None:
            payload.update(found)
            payload["primary"] = found["lambda_min"]
            checks.append(_check("violation_eigenvalue", found["lambda_min"], -1e-6, "le"))
        payload["checks"] = checks
        return _status(checks), payload
    raise ScenarioError("$.task.mode", f"unknown schoenberg mode {mode!r}")


def _task_modulus(scenario, seed, tolerances, budget):
    if scenario.space.p == 1.0:
        raise Refusal("convexity modulus requires p > 1")
    eps_grid = scenario.task.get("eps_grid", [0.25, 0.5, 1.0, 1.5, 2.0])
    per_eps = int(scenario.task.get("budget", 300 if budget is None else budget))
    table = modulus_table(scenario.space, eps_grid, budget=per_eps, seed=seed)
    diffs = np.diff(table.delta)
    checks = [
        _check("envelope_monotone", float(diffs.min(initial=0.0)), -1e-15, "ge"),
        _check("inverse_at_max_is_domain_sup", table.inverse(float(np.max(table.delta))), 2.0, "eq"),
    ]
    payload = {
        "eps": table.eps,
        "delta": table.delta,
        "inverse_at_max": table.inverse(float(np.max(table.delta))),
        "primary": float(table.delta[-1]),
        "checks": checks,
    }
    return _status(checks), payload


def _task_klee(scenario, seed, tolerances, budget):
    space = scenario.space
    if space.p == 2.0:
        raise Refusal("p = 2 refused: Hilbert circumcenters stay in the closed convex hull")
    if space.dim < 3:
        raise Refusal("Klee configurations require dim >= 3")
    trials = int(scenario.task.get("trials", 200 if budget is None else budget))
    res = klee_search(space, trials=trials, seed=seed)
    payload = {"found": res.found, "trials_used": res.trials_used, "hull_distance": res.hull_distance}
    checks = []
    if res.found:
        payload["points"] = res.points
        payload["center"] = res.center
        checks.append(_check("certified_hull_distance", res.hull_distance, 1e-6, "gt"))
    payload["checks"] = checks
    return _status(checks), payload


def _task_displacement(scenario, seed, tolerances, budget):
    coc = _require_cocycle(scenario)
    action = AffineAction(coc)
    params = scenario.task
    extras = scenario.group_extras.get("product")
    gens_a = params.get("factor_a", extras["factor1_generators"] if extras else None)
    gens_h = params.get("factor_h", extras["factor2_generators"] if extras else None)
    if gens_a is None or gens_h is None:
        raise ScenarioError("$.task", "displacement needs factor_a/factor_h generator lists")
    report = displacement_bound_check(
        action,
        list(gens_a),
        list(gens_h),
        k_h=params.get("k_h"),
        tol=float(params.get("tol", 1e-6)),
        a_radius=int(params.get("radius", 6)),
        gap_kwargs={"seed": seed},
    )
    tol = float(params.get("tol", 1e-6))
    checks = []
    if report.status != "not-applicable":
        checks.append(_check("exchange_identity_residual", report.identity_residual, tol))
        checks.append(_check("a_norm_within_bound", report.worst_a_norm, report.bound + tol))
    payload = {
        "identity_residual": report.identity_residual,
        "gap": report.gap,
        "seminorm": report.seminorm,
        "bound": report.bound,
        "worst_a_norm": report.worst_a_norm,
        "worst_a_complement_norm": report.worst_a_complement_norm,
        "checked_words": report.checked_words,
        "checks": checks,
    }
    return report.status, payload


def _task_mautner(scenario, seed, tolerances, budget):
    coc = _require_cocycle(scenario)
    action = AffineAction(coc)
    params = scenario.task
    report = mautner_check(
        action,
        str(params.get("g", "g")),
        str(params.get("h", "h")),
        n_max=int(params.get("n_max", 12)),
        tol=float(params.get("tol", tolerances["solver"])),
    )
    checks = []
    if report.status != "not-applicable":
        checks.append(_check("h_displacement", report.h_displacement, float(params.get("tol", tolerances["solver"]))))
    payload = {
        "outcome": report.status,
        "contracting": report.contracting,
        "contraction": list(report.contraction),
        "fixed_residual": report.fixed_residual,
        "h_displacement": report.h_displacement,
        "checks": checks,
    }
    return report.status, payload


_HANDLERS = {
    "decompose": _task_decompose,
    "gap": _task_gap,
    "fixpoint": _task_fixpoint,
    "cobound": _task_cobound,
    "induce": _task_induce,
    "split": _task_split,
    "superrigid": _task_superrigid,
    "mazur": _task_mazur,
    "schoenberg": _task_schoenberg,
    "modulus": _task_modulus,
    "klee": _task_klee,
    "displacement": _task_displacement,
    "mautner": _task_mautner,
}
