"""
Verification router — POST /v1/verify/classical, POST /v1/verify/quantum
"""
import logging

from fastapi import APIRouter
from fastapi.concurrency import run_in_threadpool

from app.schemas.schemas import GlobalizationDocument, MomentReport, VerifyRequest
from app.services.expansion import globalization_report
from app.services.io import from_document
from app.services.sequences import moment_report

logger = logging.getLogger(__name__)
router = APIRouter(prefix="/v1/verify", tags=["Verification"])


@router.post("/classical", response_model=MomentReport)
async def verify_classical(payload: VerifyRequest):
    seq = from_document(payload.sequence)
    return moment_report(seq, payload.order)


@router.post("/quantum", response_model=GlobalizationDocument)
async def verify_quantum(payload: VerifyRequest):
    seq = from_document(payload.sequence)
    report = await run_in_threadpool(globalization_report, seq, payload.order)
    return GlobalizationDocument(**report.to_document())
