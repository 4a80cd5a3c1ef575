import logging
import threading

import pytest

from trefftz_dg.utils.errors import (ConfigError, DecompositionError, NotApplicableError, SolverError,
                                     TrefftzDGError)
from trefftz_dg.utils.logger import console_handler, get_logger, set_console_level
from trefftz_dg.utils.parallel import ordered_map


def test_ordered_map_keeps_input_order():
    def square(k):
        return k * k

    assert ordered_map(square, range(20), threads=4) == [k * k for k in range(20)]
    assert ordered_map(square, [], threads=4) == []


def test_ordered_map_runs_on_workers():
    seen = set()

    def record(k):
        seen.add(threading.get_ident())
        return k

    assert ordered_map(record, range(3), threads=1) == [0, 1, 2]
    assert seen == {threading.get_ident()}


def test_ordered_map_propagates_errors():
    def fail(k):
        if k == 3:
            raise ValueError("element 3")
        return k

    with pytest.raises(ValueError):
        ordered_map(fail, range(6), threads=2)


def test_error_hierarchy():
    error = ConfigError("pmax", "too small")
    assert isinstance(error, TrefftzDGError) and isinstance(error, ValueError)
    assert error.key == "pmax"
    assert str(error).startswith("pmax:")

    failure = SolverError("stalled", residual=1e-3, method="gmres")
    assert isinstance(failure, RuntimeError)
    assert (failure.residual, failure.method) == (1e-3, "gmres")
    assert "1.000e-03" in str(failure)
    assert SolverError("singular").residual == float("inf")

    assert issubclass(DecompositionError, TrefftzDGError)
    assert issubclass(NotApplicableError, ValueError)


def test_logger_handlers_attached_once():
    logger = get_logger("trefftz_dg.tests")
    assert get_logger("trefftz_dg.tests") is logger
    assert len(logger.handlers) == 2


def test_console_level():
    previous = console_handler.level
    try:
        set_console_level(logging.WARNING)
        assert console_handler.level == logging.WARNING
    finally:
        set_console_level(previous)
