from .relocation import Edit, lift, rebuild, relocate, relocate_jumps
from .probes import (
    ProbeKind,
    ProbeSite,
    InstrumentationMap,
    insert_probes,
    strip_markers,
    make_probe,
    marker_payload,
    probe_header_skip,
)

__all__ = [
    "Edit",
    "lift",
    "rebuild",
    "relocate",
    "relocate_jumps",
    "ProbeKind",
    "ProbeSite",
    "InstrumentationMap",
    "insert_probes",
    "strip_markers",
    "make_probe",
    "marker_payload",
    "probe_header_skip",
]
