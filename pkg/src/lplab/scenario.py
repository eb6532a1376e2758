"""Scenario files: the JSON schema and its translation into lab objects.

A scenario is a JSON object with the fields

    name            str
    space           {"dim": int, "p": float, "weights": [float, ...]?}
    group           {"kind": "table" | "presentation" | "permutations" | "product", ...}
    representation  {"images": {gen: image-spec, ...}, "require_isometric": bool?}
    cocycle         {"values": {gen: [float, ...]}, "validate": bool?}   (optional)
    task            {"command": str, ...task parameters}
    seed            int?
    tolerances      {"default": float?, "solver": float?}

Image specs: {"kind": "lamperti", "perm": [...], "signs": [...]?},
{"kind": "matrix", "entries": [[...]]}, or
{"kind": "permutation_action", "map": [...]} (the quasi-regular isometry of
an atom permutation, weight-twisted).  Group specs:

    table          {"table": [[int]], "identity": int, "generators": {name: int}, "k": [word]?}
    presentation   {"generators": [name], "relators": [word], "k": [word]?}
    permutations   {"generators": {name: [int]}, "k": [word]?}
    product        {"factor1": <table|permutations spec>, "factor2": ..., "rename2": {name: name}?}

Validation failures raise :class:`ScenarioError` carrying the offending
field path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .cocycle import Cocycle
from .groups import PresentedGroup, TableGroup, group_from_permutations, product_group
from .lamperti import LampertiIsometry
from .representation import Representation
from .spaces import LpSpace

__all__ = ["ScenarioError", "Scenario", "load_scenario", "parse_scenario"]

_COMMANDS = (
    "decompose",
    "gap",
    "fixpoint",
    "cobound",
    "induce",
    "split",
    "superrigid",
    "mazur",
    "schoenberg",
    "modulus",
    "klee",
    "displacement",
    "mautner",
)


class ScenarioError(ValueError):
    """Schema violation; ``path`` locates the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def _need(obj: dict, key: str, path: str):
    if key not in obj:
        raise ScenarioError(f"{path}.{key}", "missing required field")
    return obj[key]


@dataclass(eq=False)
class Scenario:
    name: str
    space: LpSpace
    group: object
    group_extras: dict
    representation: Representation | None
    cocycle: Cocycle | None
    task: dict
    seed: int
    tolerances: dict
    raw: dict

    def with_exponent(self, p: float) -> "Scenario":
        raw = json.loads(json.dumps(self.raw))
        raw["space"]["p"] = p
        raw["name"] = f"{self.name}@p={p:g}"
        return parse_scenario(raw)


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError("$", f"not valid JSON: {exc}") from exc
    return parse_scenario(raw)


def parse_scenario(raw: dict) -> Scenario:
    if not isinstance(raw, dict):
        raise ScenarioError("$", "scenario must be a JSON object")
    name = _need(raw, "name", "$")
    space = _build_space(_need(raw, "space", "$"))
    group, extras = _build_group(_need(raw, "group", "$"))
    task = _need(raw, "task", "$")
    command = _need(task, "command", "$.task")
    if command not in _COMMANDS:
        raise ScenarioError("$.task.command", f"unknown command {command!r}; expected one of {_COMMANDS}")
    seed = int(raw.get("seed", 0))
    tolerances = {"default": 1e-9, "solver": 1e-6}
    tolerances.update(raw.get("tolerances", {}))

    rep = None
    cocycle = None
    if command not in ("induce", "superrigid"):
        # induction tasks interpret the representation/cocycle over the
        # subgroup named in the task parameters; built in the task layer
        if "representation" in raw:
            rep = _build_representation(raw["representation"], space, group)
        if "cocycle" in raw:
            if rep is None:
                raise ScenarioError("$.cocycle", "cocycle requires a representation")
            cocycle = _build_cocycle(raw["cocycle"], rep)
    return Scenario(
        name=name,
        space=space,
        group=group,
        group_extras=extras,
        representation=rep,
        cocycle=cocycle,
        task=task,
        seed=seed,
        tolerances=tolerances,
        raw=raw,
    )


def _build_space(spec: dict) -> LpSpace:
    dim = _need(spec, "dim", "$.space")
    p = _need(spec, "p", "$.space")
    weights = spec.get("weights")
    try:
        return LpSpace(int(dim), float(p), weights)
    except ValueError as exc:
        field = "weights" if "weight" in str(exc) else "p" if "exponent" in str(exc) else "dim"
        raise ScenarioError(f"$.space.{field}", str(exc)) from exc


def _build_plain_group(spec: dict, path: str):
    kind = _need(spec, "kind", path)
    try:
        if kind == "table":
            return (
                TableGroup(
                    np.asarray(_need(spec, "table", path)),
                    int(_need(spec, "identity", path)),
                    {str(k): int(v) for k, v in _need(spec, "generators", path).items()},
                    k_set=spec.get("k"),
                ),
                {},
            )
        if kind == "permutations":
            group, action = group_from_permutations(
                {str(k): v for k, v in _need(spec, "generators", path).items()}, k_set=spec.get("k")
            )
            return group, {"action": action}
        if kind == "presentation":
            return (
                PresentedGroup(
                    _need(spec, "generators", path),
                    spec.get("relators", []),
                    k_set=spec.get("k"),
                ),
                {},
            )
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(path, str(exc)) from exc
    raise ScenarioError(f"{path}.kind", f"unknown group kind {kind!r}")


def _build_group(spec: dict):
    kind = _need(spec, "kind", "$.group")
    if kind == "product":
        g1, ex1 = _build_plain_group(_need(spec, "factor1", "$.group.factor1"), "$.group.factor1")
        g2, ex2 = _build_plain_group(_need(spec, "factor2", "$.group.factor2"), "$.group.factor2")
        if not isinstance(g1, TableGroup) or not isinstance(g2, TableGroup):
            raise ScenarioError("$.group", "product factors must be table-backed groups")
        try:
            info = product_group(g1, g2, rename2=spec.get("rename2"))
        except ValueError as exc:
            raise ScenarioError("$.group", str(exc)) from exc
        extras = {"product": info, "factor_extras": (ex1, ex2)}
        return info["group"], extras
    return _build_plain_group(spec, "$.group")


def _build_image(spec: dict, space: LpSpace, path: str):
    kind = _need(spec, "kind", path)
    try:
        if kind == "lamperti":
            perm = np.asarray(_need(spec, "perm", path), dtype=int)
            signs = np.asarray(spec.get("signs", np.ones(space.dim)), dtype=float)
            return LampertiIsometry(perm, signs, space, space)
        if kind == "matrix":
            return np.asarray(_need(spec, "entries", path), dtype=float)
        if kind == "permutation_action":
            action = np.asarray(_need(spec, "map", path), dtype=int)
            sigma = np.argsort(action)
            signs = np.asarray(spec.get("signs", np.ones(space.dim)), dtype=float)
            return LampertiIsometry(sigma, signs, space, space)
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(path, str(exc)) from exc
    raise ScenarioError(f"{path}.kind", f"unknown image kind {kind!r}")


def _build_representation(spec: dict, space: LpSpace, group) -> Representation:
    images_spec = _need(spec, "images", "$.representation")
    images = {
        name: _build_image(img, space, f"$.representation.images.{name}")
        for name, img in images_spec.items()
    }
    try:
        return Representation(
            group,
            space,
            images,
            require_isometric=bool(spec.get("require_isometric", True)),
            validate=bool(spec.get("validate", True)),
        )
    except ValueError as exc:
        raise ScenarioError("$.representation", str(exc)) from exc


def _build_cocycle(spec: dict, rep: Representation) -> Cocycle:
    values = _need(spec, "values", "$.cocycle")
    try:
        return Cocycle(rep, values, validate=bool(spec.get("validate", True)))
    except ValueError as exc:
        raise ScenarioError("$.cocycle", str(exc)) from exc
