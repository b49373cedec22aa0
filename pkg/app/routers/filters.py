"""
Filters router — GET /v1/filters/{group}/{order}
"""
import logging
from typing import Optional

from fastapi import APIRouter, HTTPException, Query, status

from app.schemas.schemas import FilterDocument, GroupEnum
from app.services import filter as filters
from app.services.sequences import build_sequence, switching_functions

logger = logging.getLogger(__name__)
router = APIRouter(prefix="/v1/filters", tags=["Filters"])


@router.get("/{group}/{order}", response_model=FilterDocument)
async def get_filter(
    group: str,
    order: int,
    points: int = Query(default=400, ge=2, le=10000),
    omega_min: float = Query(default=1e-2, gt=0),
    omega_max: float = Query(default=1e3, gt=0),
):
    try:
        kind = GroupEnum(group)
    except ValueError:
        kind = None
    if kind not in (GroupEnum.udd, GroupEnum.a3, GroupEnum.s3, GroupEnum.qdd3):
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail=f"Unknown sequence group {group!r}")
    if omega_max <= omega_min:
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail="omega_max must exceed omega_min")

    seq = build_sequence(kind, order)
    functions = switching_functions(seq)
    grid = filters.default_grid(points, omega_min, omega_max)
    values: dict[str, list[float]] = {}
    slopes: dict[str, Optional[float]] = {}
    for name in functions.names:
        values[name] = filters.filter_value(functions, name, seq.times, grid).tolist()
        try:
            slopes[name] = filters.low_frequency_slope(functions, name, seq.times)
        except ValueError:
            slopes[name] = None
    return FilterDocument(
        group=kind,
        order=seq.order,
        functions=list(functions.names),
        omega_t=grid.tolist(),
        values=values,
        low_frequency_slopes=slopes,
    )
