"""Cutoff extrapolation ``E(b) - E(a) ~ c (1/a - 1/b)``.

Truncating the kernel at distance ``a`` drops a tail that shifts eigenvalues
by ``c / a`` to leading order.  The symmetric 1D routes lose two tails
(``c = 2/pi``); the radial routes integrate over ``[0, a]`` and lose the
one-sided tail of the 3D integral, which is twice as large (``c = 4/pi``).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from .operators import as_sector


class TailKind(str, enum.Enum):
    TWO_SIDED = "two_sided"
    ONE_SIDED = "one_sided"


_CONSTANTS = {TailKind.TWO_SIDED: 2 / math.pi, TailKind.ONE_SIDED: 4 / math.pi}


@dataclass(frozen=True)
class TailRoute:
    kind: TailKind

    def __post_init__(self):
        object.__setattr__(self, "kind", TailKind(self.kind))

    @property
    def constant(self) -> float:
        return _CONSTANTS[self.kind]

    @classmethod
    def for_sector(cls, sector) -> "TailRoute":
        sector = as_sector(sector)
        return cls(TailKind.TWO_SIDED if sector.is_1d else TailKind.ONE_SIDED)


TWO_SIDED = TailRoute(TailKind.TWO_SIDED)
ONE_SIDED = TailRoute(TailKind.ONE_SIDED)


def tail_correction(a: float, b: float, route: TailRoute) -> float:
    """``c (1/a - 1/b)`` with ``1/inf = 0``."""
    if not a > 0:
        raise ValueError(f"cutoff must be positive, got {a}")
    if b < a:
        raise ValueError(f"need a <= b, got a={a}, b={b}")
    return route.constant * (1.0 / a - (0.0 if math.isinf(b) else 1.0 / b))


def renormalize(result):
    """Return ``result`` with ``eigenvalue_renormalized = E(a) + c / a``.

    The route is read off the result's sector, never passed in.
    """
    route = TailRoute.for_sector(result.sector)
    shift = tail_correction(result.cutoff_a, math.inf, route)
    return replace(result, eigenvalue_renormalized=result.eigenvalue_at_a + shift)
