"""Shared distribution helpers."""

from __future__ import annotations

import math

from scipy import special


def normal_two_sided_pvalue(z: float) -> float:
    """P(|N(0,1)| >= |z|)."""
    return float(math.erfc(abs(z) / math.sqrt(2.0)))


def student_t_sf(t: float, df: int) -> float:
    """P(T_df > t), the one-sided upper tail of Student's t."""
    if df < 1:
        raise ValueError("df must be >= 1")
    return float(1.0 - special.stdtr(df, t))
