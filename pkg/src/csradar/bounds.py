"""Closed-form sparsity bounds for Alltop Gabor dictionaries.

``log`` is the natural logarithm throughout. The constants ``c`` and
``vartheta`` of the probabilistic bound are existential and are not
evaluated; only its sparsity threshold is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .tfcore import check_prime


def thm1_bound(n: int) -> float:
    """Coherence bound ``(sqrt(N) + 1) / 2`` for guaranteed recovery (strict K <)."""
    n = check_prime(n)
    return 0.5 * (math.sqrt(n) + 1.0)


def max_guaranteed_sparsity(n: int) -> int:
    """Largest integer K with ``K < thm1_bound(n)``."""
    return math.ceil(thm1_bound(n)) - 1


def thm2_bound(n: int, eps: float) -> float:
    """``N / (16 log(N / eps))``, the high-probability BP sparsity level."""
    n = check_prime(n)
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return n / (16.0 * math.log(n / eps))


def thm3_bound(n: int, eps: float, t: float) -> float:
    """Noisy version of the guaranteed bound for ``|e_n| <= eps`` and ``||s - s*||_1 <= t``."""
    n = check_prime(n)
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    if eps < 0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    return thm1_bound(n) / (1.0 + 2.0 * eps * n / t)


def empirical_line(n: int, base: float = math.e) -> float:
    """``N / (2 log N)``; ``base`` selects the logarithm for comparison tables."""
    if n < 3:
        raise ValueError(f"N must be >= 3, got {n}")
    return n / (2.0 * math.log(n, base))


@dataclass(frozen=True)
class BoundReport:
    n: int
    eps: float
    t: float
    thm1: float
    thm2: float
    thm3: float
    empirical_line: float


def bound_report(n: int, eps: float = 0.1, t: float = 1.0) -> BoundReport:
    return BoundReport(n, eps, t, thm1_bound(n), thm2_bound(n, eps), thm3_bound(n, eps, t),
                       empirical_line(n))
