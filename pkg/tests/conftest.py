import numpy as np
import pytest

from steanesim.pauli import repetition3_code, steane_code


@pytest.fixture(scope="session")
def steane():
    return steane_code()


@pytest.fixture(scope="session")
def rep3():
    return repetition3_code()


def dense_projector(code, s: int) -> np.ndarray:
    """Syndrome projector built densely from the expanded group sum."""
    dim = 1 << code.n
    out = np.zeros((dim, dim), dtype=complex)
    for idx, elem in enumerate(code.elements):
        out += code.syndrome_phase(s, idx) * elem.dense()
    return out / len(code.elements)
