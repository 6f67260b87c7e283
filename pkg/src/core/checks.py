"""
Check records shared by the verifiers and the report documents.
"""

import math
from typing import NamedTuple, Optional


class CheckResult(NamedTuple):
    """
    Outcome of a single numeric check.

    Args:
        name (str): Human readable check name
        value (float, optional): Measured quantity, when there is one
        defect (float): Deviation from the exact statement
        passed (bool): Whether ``defect`` is within its bound
    """

    name: str
    value: Optional[float]
    defect: float
    passed: bool


def check(name, defect, bound, value=None):
    """Build a CheckResult passing iff ``defect`` is finite and at most ``bound``."""
    defect = float(defect)
    return CheckResult(name, None if value is None else float(value), defect, math.isfinite(defect) and defect <= bound)


def check_flag(name, ok, value=None):
    """Boolean check: defect 0 when ``ok`` holds, 1 otherwise."""
    return CheckResult(name, None if value is None else float(value), 0.0 if ok else 1.0, bool(ok))
