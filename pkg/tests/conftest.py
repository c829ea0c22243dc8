import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from lrsec import codes

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def gross():
    return codes.builtin_code("gross")


@pytest.fixture(scope="session")
def fb126():
    return codes.builtin_code("fb126")


@pytest.fixture(scope="session")
def hgp13():
    return codes.builtin_code("hgp13")


@pytest.fixture(scope="session")
def steane():
    return codes.builtin_code("steane")


@pytest.fixture(scope="session")
def rep3():
    return codes.builtin_code("rep3")


def brute_rank(m):
    """Rank over GF(2) by counting the row span (independent of the library)."""
    m = np.asarray(m, dtype=np.uint8) % 2
    span = {bytes(m.shape[1])}
    for row in m:
        span |= {bytes(np.bitwise_xor(np.frombuffer(s, dtype=np.uint8), row)) for s in span}
    return int(np.log2(len(span)))


def int_rank(m):
    """Rank over GF(2) with rows as Python ints and an XOR basis (independent oracle)."""
    basis = {}
    for row in np.asarray(m, dtype=np.uint8):
        v = int("".join(map(str, row.tolist())) or "0", 2)
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                break
            v ^= basis[top]
    return len(basis)


def random_binary(rng, rows, cols):
    return rng.integers(0, 2, size=(rows, cols), dtype=np.uint8)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
