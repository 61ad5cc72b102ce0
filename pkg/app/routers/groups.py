from fastapi import APIRouter, HTTPException

from app.models.group import GroupRequest
from app.routers.validation import closure_limit_or_raise, elements_or_raise, presentation_or_raise
from app.services.explorer import find_witness
from app.services.seifert import (
    FiniteFiberError,
    are_conjugate,
    equal,
    format_element,
    lambda_invariants,
)

router = APIRouter(prefix="/api/groups", tags=["groups"])


@router.post("/normalize")
def normalize(request: GroupRequest):
    p = presentation_or_raise(request.group)
    (g,) = elements_or_raise(p, request.words, 1)
    return {"success": True, "normal_form": format_element(p, g), "fiber_exponent": g.fiber_exponent}


@router.post("/equal")
def equal_words(request: GroupRequest):
    p = presentation_or_raise(request.group)
    g1, g2 = elements_or_raise(p, request.words, 2)
    return {"success": True, "equal": equal(p, g1, g2)}


@router.post("/conj")
def conjugacy(request: GroupRequest):
    p = presentation_or_raise(request.group)
    g1, g2 = elements_or_raise(p, request.words, 2)
    result = closure_limit_or_raise(are_conjugate, p, g1, g2)
    return {
        "success": True,
        "conjugate": result.conjugate,
        "witness": format_element(p, result.witness) if result.witness else None,
        "fiber_offset": result.fiber_offset,
        "stage": result.stage,
    }


@router.post("/lambda")
def lattice(request: GroupRequest):
    p = presentation_or_raise(request.group)
    (g,) = elements_or_raise(p, request.words, 1)
    try:
        pair = lambda_invariants(p, g)
    except FiniteFiberError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return {"success": True, **pair.model_dump(by_alias=True)}


@router.post("/witness")
def witness(request: GroupRequest):
    p = presentation_or_raise(request.group)
    g1, g2 = elements_or_raise(p, request.words, 2)
    outcome = closure_limit_or_raise(find_witness, p, g1, g2, request.budget)
    return {"success": True, **outcome.model_dump()}
