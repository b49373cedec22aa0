"""
Sequences router — GET /v1/sequences/qdd3, GET /v1/sequences/{group}/{order},
POST /v1/sequences/solve
"""
import logging

from fastapi import APIRouter, HTTPException, Query, status
from fastapi.concurrency import run_in_threadpool

from app.schemas.schemas import GroupEnum, SequenceDocument, SolveRequest
from app.services.io import to_document
from app.services.sequences import build_sequence, from_hamiltonians, qdd3_sequence
from app.services.solver import solve_times

logger = logging.getLogger(__name__)
router = APIRouter(prefix="/v1/sequences", tags=["Sequences"])

GENERATED_GROUPS = (GroupEnum.udd, GroupEnum.a3, GroupEnum.s3)


@router.get("/qdd3", response_model=SequenceDocument)
async def get_qdd3():
    return to_document(qdd3_sequence())


@router.get("/{group}/{order}", response_model=SequenceDocument)
async def get_sequence(group: str, order: int, solve: bool = Query(default=False)):
    try:
        kind = GroupEnum(group)
    except ValueError:
        kind = None
    if kind not in GENERATED_GROUPS:
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail=f"Unknown sequence group {group!r}")
    return to_document(await run_in_threadpool(build_sequence, kind, order, solve=solve))


@router.post("/solve", response_model=SequenceDocument)
async def solve_sequence(payload: SolveRequest):
    times = await run_in_threadpool(
        solve_times, payload.hamiltonians, payload.order, guess=payload.guess, normalize=payload.normalize
    )
    seq = from_hamiltonians(payload.hamiltonians, times, GroupEnum.custom, payload.order)
    logger.info("Solved %d-interval schedule at order %d", seq.n_intervals, payload.order)
    return to_document(seq)
