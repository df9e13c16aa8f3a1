"""Name -> factorization routine table shared by the CLI and scripts."""

from .ggr import cgr_factorize, ggr_blocked_factorize, ggr_factorize
from .householder import (
    hqr2_factorize, hqrf_blocked_factorize, mht_blocked_factorize, mht_factorize,
)
from .rotations import gr_factorize

UNBLOCKED = {
    "gr": gr_factorize,
    "cgr": cgr_factorize,
    "ggr": ggr_factorize,
    "hqr2": hqr2_factorize,
    "mht": mht_factorize,
}
BLOCKED = {
    "ggr_blocked": ggr_blocked_factorize,
    "hqrf": hqrf_blocked_factorize,
    "mht_blocked": mht_blocked_factorize,
}
ALGORITHMS = ("gr", "cgr", "ggr", "ggr_blocked", "hqr2", "hqrf", "mht", "mht_blocked")
DEFAULT_PANEL = 8


def is_blocked(name):
    return name in BLOCKED


def factorize(name, a, accumulate_q=True, counter=None, panel=DEFAULT_PANEL):
    """Run algorithm ``name``; ``panel`` is clipped to the column count."""
    if name in UNBLOCKED:
        return UNBLOCKED[name](a, accumulate_q=accumulate_q, counter=counter)
    if name in BLOCKED:
        b = max(1, min(panel, a.shape[1]))
        return BLOCKED[name](a, b, counter=counter, accumulate_q=accumulate_q)
    raise ValueError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}")
