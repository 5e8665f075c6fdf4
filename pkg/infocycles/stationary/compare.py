"""
Partial orders on belief cycles.

Cycle a has more informative experiments than b when its targets span a
wider interval, lower thresholds when it waits for a wider threshold band
before experimenting again, and more frequent experiments when both of its
waiting times are shorter. Each comparison can fail in both directions.
"""

from typing import Dict, Tuple

from infocycles.dynamics.longrun import BeliefCycle

EQUAL = "equal"
INCOMPARABLE = "incomparable"


def _contains(outer: Tuple[float, float], inner: Tuple[float, float]) -> bool:
    return outer[0] <= inner[0] and inner[1] <= outer[1]


def _interval_order(a: Tuple[float, float], b: Tuple[float, float]) -> str:
    if a == b:
        return EQUAL
    if _contains(a, b):
        return "a"
    if _contains(b, a):
        return "b"
    return INCOMPARABLE


def _componentwise_le(x: Tuple[float, float], y: Tuple[float, float]) -> bool:
    return all(xi <= yi for xi, yi in zip(x, y))


def compare_cycles(a: BeliefCycle, b: BeliefCycle) -> Dict[str, str]:
    """
    Compare two cycles on three partial orders.

    Returns:
        {"more_informative", "lower_thresholds", "more_frequent"} mapped to
        "a", "b", "equal" or "incomparable"
    """
    taus_a, taus_b = (a.tau0, a.tau1), (b.tau0, b.tau1)
    if taus_a == taus_b:
        frequent = EQUAL
    elif _componentwise_le(taus_a, taus_b):
        frequent = "a"
    elif _componentwise_le(taus_b, taus_a):
        frequent = "b"
    else:
        frequent = INCOMPARABLE

    return {
        "more_informative": _interval_order((a.q0, a.q1), (b.q0, b.q1)),
        "lower_thresholds": _interval_order((a.p0, a.p1), (b.p0, b.p1)),
        "more_frequent": frequent,
    }
