from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Any, Dict, List, NoReturn, Optional, Tuple, Union

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field, NonNegativeInt

PROJECT_ROOT = Path(__file__).resolve().parent.parent
SCRIPTS_DIR = PROJECT_ROOT / "scripts"
if str(SCRIPTS_DIR) not in sys.path:
    sys.path.insert(0, str(SCRIPTS_DIR))

from config import load_settings  # noqa: E402
from constants import BUNDLED_GROUPS  # noqa: E402
from scottlab import __version__  # noqa: E402
from scottlab.complexity import classify  # noqa: E402
from scottlab.errors import BudgetExceededError, ConstructionHalted, ScottLabError  # noqa: E402
from scottlab.groups import (  # noqa: E402
    GroupOracle,
    ball_check,
    bounded_model_check,
    build_oracle,
    parse_tuple,
    tuple_assignment,
)
from scottlab.scott import verify_scott_sentence  # noqa: E402
from scottlab.sexpr import format_formula, parse_formula  # noqa: E402
from scottlab.structures import parse_structure  # noqa: E402
from scottlab.syntax import free_vars, negate  # noqa: E402
from scottlab.trees import build_tree  # noqa: E402

# Request bounds stay small; exhaustive sweeps belong on the command line.
MAX_VERIFY_SIZE = 4
MAX_RADIUS = 8
MAX_DEPTH = 16

settings = load_settings()

app = FastAPI(
    title="Scott Lab API",
    version=__version__,
    description="Formula classification, Scott sentence sweeps and bounded group checks over HTTP.",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


class FormulaPayload(BaseModel):
    text: str


class VerifyPayload(BaseModel):
    sentence: str
    structure: Dict[str, Any]
    max_size: int = Field(default=3, ge=1, le=MAX_VERIFY_SIZE)
    budget: int = Field(default=64, ge=1)


class GroupCheckPayload(BaseModel):
    group: Union[str, Dict[str, Any]] = Field(description="Bundled group name or a group description")
    formula: str
    radius: int = Field(default=2, ge=0, le=MAX_RADIUS)
    budget: int = Field(default=64, ge=1)
    values: Optional[List[Any]] = Field(default=None, description="Values for x1..xk (default: the generators)")


class TreePayload(BaseModel):
    trace: List[Tuple[NonNegativeInt, NonNegativeInt]] = Field(default_factory=list)
    depth: int = Field(default=5, ge=1, le=MAX_DEPTH)


def raise_http(exc: ScottLabError) -> NoReturn:
    if isinstance(exc, BudgetExceededError):
        status = 413
    elif isinstance(exc, ConstructionHalted):
        status = 422
    else:
        status = 400
    raise HTTPException(status_code=status, detail=str(exc)) from exc


def resolve_group(spec: Union[str, Dict[str, Any]]) -> GroupOracle:
    if isinstance(spec, str):
        if spec not in BUNDLED_GROUPS:
            raise HTTPException(status_code=404, detail=f"Unknown group {spec!r}")
        return build_oracle(BUNDLED_GROUPS[spec])
    return build_oracle(spec)


@app.get("/health")
def healthcheck():
    return {"status": "ok", "version": __version__}


@app.post("/formulas/classify")
def classify_formula(payload: FormulaPayload):
    try:
        formula = parse_formula(payload.text)
        classification = classify(formula)
    except ScottLabError as exc:
        raise_http(exc)
    return {
        "formula": format_formula(formula),
        "side": classification.side.value,
        "rank": str(classification.rank),
        "free_vars": sorted(free_vars(formula)),
    }


@app.post("/formulas/negate")
def negate_formula(payload: FormulaPayload):
    try:
        negation = negate(parse_formula(payload.text))
        classification = classify(negation)
    except ScottLabError as exc:
        raise_http(exc)
    return {"formula": format_formula(negation), "classification": str(classification)}


@app.post("/scott/verify")
def verify_sentence(payload: VerifyPayload):
    try:
        report = verify_scott_sentence(
            parse_formula(payload.sentence),
            parse_structure(json.dumps(payload.structure)),
            payload.max_size,
            budget=payload.budget,
            ceiling=settings.max_structures,
        )
    except ScottLabError as exc:
        raise_http(exc)
    flagged = report.frame[report.frame["status"] != "match"]
    return {
        "ok": report.ok,
        "bounds": {"max_size": payload.max_size, "budget": payload.budget},
        "summary": report.summary(),
        "target_class_satisfied": not report.missing_class,
        "flagged": flagged.to_dict(orient="records"),
    }


@app.post("/groups/check")
def check_group_formula(payload: GroupCheckPayload):
    try:
        oracle = resolve_group(payload.group)
        formula = parse_formula(payload.formula)
        tup = oracle.generators if payload.values is None else parse_tuple(oracle, payload.values)
        valuation = tuple_assignment(tup)
        sound = bounded_model_check(oracle, formula, payload.radius, payload.budget, valuation)
        relativized = ball_check(oracle, formula, payload.radius, payload.budget, valuation)
    except ScottLabError as exc:
        raise_http(exc)
    return {
        "group": oracle.describe(),
        "bounds": {"radius": payload.radius, "budget": payload.budget},
        "sound": str(sound),
        "determinate": sound.determinate,
        "ball": relativized.value,
    }


@app.post("/trees/build")
def build_staged_tree(payload: TreePayload):
    try:
        tree = build_tree([tuple(entry) for entry in payload.trace], payload.depth)
    except ScottLabError as exc:
        raise_http(exc)
    return {
        "depth": tree.depth,
        "special_branch": tree.special_branch,
        "nodes": tree.sorted_nodes(),
        "terminal_nodes": tree.terminal_nodes(),
    }
