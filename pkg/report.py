"""
Run Configuration and Report Artifacts

RunConfig is built from CLI flags and echoed verbatim into every report.
Reports are rendered as JSON (pydantic) or CSV (fixed column order).

CRITICAL CONSTRAINTS:
- Explicit amplitudes must normalize within 1e-9
- Seeds are unsigned 64-bit integers
- generated_at is the ONLY non-deterministic field (null under --deterministic)
- Records are ordered by trial index, then branch index

CSV COLUMNS:
- run / enumerate:  RECORD_COLUMNS
- control-power:    CONTROL_POWER_COLUMNS
- verify:           DISCREPANCY_COLUMNS
"""

import csv
import io
import logging
import sys
from datetime import datetime, timezone
from typing import Dict, List, Literal, Optional, Sequence

from pydantic import BaseModel, Field, FiniteFloat, field_validator, model_validator

from bcqt_protocol import BranchRecord, ControlPower, OutcomeRecord, PauliOp, ProtocolResult, branch_index
from qstate import NORMALIZATION_TOL, BellOutcome, InputState
from verify import DiscrepancyReport

logger = logging.getLogger(__name__)

ARTIFACT_VERSION = "1.0.0"
MAX_SEED = 2 ** 64 - 1

RECORD_COLUMNS = [
    "trial",
    "alice_z",
    "alice_x",
    "bob_z",
    "bob_x",
    "charlie_bell",
    "probability",
    "correction_b1",
    "correction_a2",
    "fidelity_b1",
    "fidelity_a2",
]

CONTROL_POWER_COLUMNS = [
    "trial",
    "controlled_receiver",
    "uncontrolled_receiver",
    "controlled_fidelity",
    "uncontrolled_fidelity",
    "controlled_trace_distance",
]

DISCREPANCY_COLUMNS = ["location", "verdict", "deviation", "published_value", "oracle_value"]


# ============================================================================
# CONFIGURATION
# ============================================================================

class RunConfig(BaseModel):
    mode: Literal["run", "enumerate", "verify", "control-power"]
    alice: Optional[List[FiniteFloat]] = None
    bob: Optional[List[FiniteFloat]] = None
    haar: Optional[int] = Field(None, ge=1)
    trials: int = Field(1, ge=1)
    seed: int = Field(0, ge=0, le=MAX_SEED)
    output_path: Optional[str] = None
    format: Literal["json", "csv"] = "json"
    deterministic: bool = False
    workers: int = Field(1, ge=1)

    @field_validator("alice", "bob")
    @classmethod
    def check_amplitudes(cls, value: Optional[List[float]]) -> Optional[List[float]]:
        if value is None:
            return value
        if len(value) != 4:
            raise ValueError(f"expected 4 components re0,im0,re1,im1, got {len(value)}")
        norm_sq = sum(c * c for c in value)
        if abs(norm_sq - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"amplitudes are not normalized (|alpha0|^2 + |alpha1|^2 = {norm_sq:.12f})")
        return value

    @model_validator(mode="after")
    def check_input_source(self) -> "RunConfig":
        if self.haar is not None and (self.alice is not None or self.bob is not None):
            raise ValueError("use either --haar or explicit --alice/--bob amplitudes, not both")
        return self


# ============================================================================
# REPORT MODELS
# ============================================================================

class BranchModel(BaseModel):
    alice_z: int
    alice_x: int
    bob_z: int
    bob_x: int
    charlie_bell: Optional[BellOutcome] = None


class RecordModel(BaseModel):
    trial: int
    branch: BranchModel
    alice: List[float]
    bob: List[float]
    probability: float
    correction_b1: PauliOp
    correction_a2: PauliOp
    fidelity_b1: float
    fidelity_a2: float


class ControlPowerRecord(BaseModel):
    trial: int
    alice: List[float]
    bob: List[float]
    controlled_receiver: str
    uncontrolled_receiver: str
    controlled_fidelity: float
    uncontrolled_fidelity: float
    controlled_trace_distance: float


class SummaryModel(BaseModel):
    min_fidelity: Optional[float] = None
    mean_fidelity: Optional[float] = None
    discrepancy_count: int = 0
    charlie_dependent_receiver: Optional[str] = None
    passed: bool


class Report(BaseModel):
    version: str = ARTIFACT_VERSION
    generated_at: Optional[str] = None
    config: RunConfig
    summary: SummaryModel
    checks: Dict[str, bool] = Field(default_factory=dict)
    records: List[RecordModel] = Field(default_factory=list)
    control_power: List[ControlPowerRecord] = Field(default_factory=list)
    discrepancies: List[DiscrepancyReport] = Field(default_factory=list)


# ============================================================================
# BUILDERS
# ============================================================================

def _branch_model(outcomes: OutcomeRecord) -> BranchModel:
    return BranchModel(
        alice_z=outcomes.alice_z,
        alice_x=outcomes.alice_x,
        bob_z=outcomes.bob_z,
        bob_x=outcomes.bob_x,
        charlie_bell=outcomes.charlie_bell,
    )


def record_from_result(trial: int, in_a: InputState, in_b: InputState, result: ProtocolResult) -> RecordModel:
    return RecordModel(
        trial=trial,
        branch=_branch_model(result.outcomes),
        alice=in_a.canonical().components(),
        bob=in_b.canonical().components(),
        probability=result.branch_probability,
        correction_b1=result.correction.on_b1,
        correction_a2=result.correction.on_a2,
        fidelity_b1=result.fidelity_b1_vs_A,
        fidelity_a2=result.fidelity_a2_vs_B,
    )


def record_from_branch(in_a: InputState, in_b: InputState, branch: BranchRecord) -> RecordModel:
    return RecordModel(
        trial=branch.trial,
        branch=_branch_model(branch.outcomes),
        alice=in_a.canonical().components(),
        bob=in_b.canonical().components(),
        probability=branch.probability,
        correction_b1=branch.correction.on_b1,
        correction_a2=branch.correction.on_a2,
        fidelity_b1=branch.fidelity_b1,
        fidelity_a2=branch.fidelity_a2,
    )


def control_power_record(trial: int, in_a: InputState, in_b: InputState, cp: ControlPower) -> ControlPowerRecord:
    return ControlPowerRecord(
        trial=trial,
        alice=in_a.canonical().components(),
        bob=in_b.canonical().components(),
        controlled_receiver=cp.controlled_receiver,
        uncontrolled_receiver=cp.uncontrolled_receiver,
        controlled_fidelity=cp.controlled_fidelity_without_charlie,
        uncontrolled_fidelity=cp.uncontrolled_fidelity_without_charlie,
        controlled_trace_distance=cp.controlled_trace_distance,
    )


def sort_records(records: Sequence[RecordModel]) -> List[RecordModel]:
    def key(r: RecordModel):
        b = r.branch
        return (r.trial, branch_index(OutcomeRecord(b.alice_z, b.alice_x, b.bob_z, b.bob_x, b.charlie_bell)))

    return sorted(records, key=key)


def summarize(
    records: Sequence[RecordModel],
    passed: bool,
    discrepancy_count: int = 0,
    charlie_dependent_receiver: Optional[str] = None,
) -> SummaryModel:
    """min/mean over both receivers' fidelities of every record."""
    fidelities = [f for r in records for f in (r.fidelity_b1, r.fidelity_a2)]
    return SummaryModel(
        min_fidelity=min(fidelities) if fidelities else None,
        mean_fidelity=sum(fidelities) / len(fidelities) if fidelities else None,
        discrepancy_count=discrepancy_count,
        charlie_dependent_receiver=charlie_dependent_receiver,
        passed=passed,
    )


def build_report(config: RunConfig, summary: SummaryModel, **sections) -> Report:
    generated_at = None if config.deterministic else datetime.now(timezone.utc).isoformat()
    return Report(config=config, summary=summary, generated_at=generated_at, **sections)


# ============================================================================
# RENDERING
# ============================================================================

def render_json(report: Report) -> str:
    return report.model_dump_json(indent=2) + "\n"


def _csv_text(columns: Sequence[str], rows: Sequence[Dict[str, object]]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue()


def render_csv(report: Report) -> str:
    """CSV of the mode's main table; the summary stays JSON-only."""
    mode = report.config.mode
    if mode == "verify":
        rows = [d.model_dump(mode="json") for d in report.discrepancies]
        return _csv_text(DISCREPANCY_COLUMNS, rows)
    if mode == "control-power":
        rows = [r.model_dump(mode="json", include=set(CONTROL_POWER_COLUMNS)) for r in report.control_power]
        return _csv_text(CONTROL_POWER_COLUMNS, rows)

    rows = []
    for r in report.records:
        row = r.model_dump(mode="json", exclude={"branch", "alice", "bob"})
        row.update(r.branch.model_dump(mode="json"))
        rows.append(row)
    return _csv_text(RECORD_COLUMNS, rows)


def write_report(report: Report) -> None:
    text = render_csv(report) if report.config.format == "csv" else render_json(report)
    path = report.config.output_path
    if path:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        logger.info(f"Report written to {path}")
    else:
        sys.stdout.write(text)
