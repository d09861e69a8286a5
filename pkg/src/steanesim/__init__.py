"""Simulation and analysis toolkit for syndrome-resolved logical noise of the
concatenated Steane code under arbitrary single-qubit CPTP noise."""

from .pauli import PauliOperator, StabilizerCode, steane_code, repetition3_code

__all__ = [
    "PauliOperator",
    "StabilizerCode",
    "steane_code",
    "repetition3_code",
]

__version__ = "0.1.0"
