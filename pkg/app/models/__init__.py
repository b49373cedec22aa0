from app.models.bath import ClassicalBathModel, ConstantBath, FunctionBath, SpinBathModel
from app.models.dfs import DfsBasis, DFSState, OrbitTable, PauliWord, ValidProjector
from app.models.ledger import ExpansionLedger, GlobalizationReport
from app.models.sequence import PulseSequence, SwitchingFunctions
from app.models.spectra import FilterCurve, SpectralDensity
from app.models.sweep import FitResult, SweepResult

__all__ = [
    "ClassicalBathModel",
    "ConstantBath",
    "FunctionBath",
    "SpinBathModel",
    "DfsBasis",
    "DFSState",
    "OrbitTable",
    "PauliWord",
    "ValidProjector",
    "ExpansionLedger",
    "GlobalizationReport",
    "PulseSequence",
    "SwitchingFunctions",
    "FilterCurve",
    "SpectralDensity",
    "FitResult",
    "SweepResult",
]
