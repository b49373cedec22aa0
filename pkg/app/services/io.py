"""
Sequence JSON, switching-time CSV and report files.
"""
import json
import logging
from pathlib import Path

import pandas as pd
from pydantic import ValidationError

from app.exceptions import InputError, SequenceValidationError
from app.models.sequence import PulseSequence
from app.schemas.schemas import SequenceDocument
from app.services.sequences import make_sequence

logger = logging.getLogger(__name__)

TIME_FORMAT = "%.16g"


def _decimal(t: float) -> str:
    return TIME_FORMAT % t


def to_document(seq: PulseSequence) -> SequenceDocument:
    return SequenceDocument(
        group=seq.group,
        order=seq.order,
        hamiltonians=list(seq.hamiltonians),
        times=[_decimal(t) for t in seq.times],
        pulses=list(seq.pulses),
    )


def from_document(doc: SequenceDocument) -> PulseSequence:
    """Rebuild and validate a sequence; pulses are taken as written."""
    return make_sequence(doc.group, doc.order, doc.hamiltonians, [float(t) for t in doc.times], doc.pulses)


def write_sequence_json(seq: PulseSequence, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_document(seq).model_dump_json(indent=2) + "\n")
    logger.info("Wrote sequence %s/%d to %s", seq.group.value, seq.order, path)
    return path


def read_sequence_json(path) -> PulseSequence:
    try:
        raw = Path(path).read_text()
        doc = SequenceDocument.model_validate_json(raw)
    except OSError as exc:
        raise InputError(f"cannot read sequence file {path}: {exc}") from exc
    except ValidationError as exc:
        raise InputError(f"malformed sequence file {path}: {exc}") from exc
    try:
        return from_document(doc)
    except SequenceValidationError as exc:
        raise InputError(f"invalid sequence in {path}: {exc}") from exc


def write_times_csv(seq: PulseSequence, path) -> Path:
    """One switching time per row."""
    return write_frame(pd.DataFrame({"time": list(seq.times)}), path)


def write_frame(frame: pd.DataFrame, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=TIME_FORMAT)
    logger.info("Wrote %d rows to %s", len(frame), path)
    return path


def write_json(payload, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2) + "\n")
    logger.info("Wrote %s", path)
    return path
