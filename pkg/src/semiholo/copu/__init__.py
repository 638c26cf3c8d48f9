from .power import (
    ActivityReport,
    TransistorReport,
    energy_proxy,
    estimate_transistors,
    worst_case_activity,
    worst_case_commands,
)
from .sim import (
    ACTIVITY_CLASSES,
    Copu,
    CopuBusyError,
    CopuConfig,
    CopuState,
    CopuStats,
    OpCommand,
    OpKind,
    Phase,
    Signals,
)

__all__ = [
    "ACTIVITY_CLASSES",
    "ActivityReport",
    "Copu",
    "CopuBusyError",
    "CopuConfig",
    "CopuState",
    "CopuStats",
    "OpCommand",
    "OpKind",
    "Phase",
    "Signals",
    "TransistorReport",
    "energy_proxy",
    "estimate_transistors",
    "worst_case_activity",
    "worst_case_commands",
]
