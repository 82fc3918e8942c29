"""Decreasing scale sequences with logarithmic weights.

A sequence b_0 > b_1 > ... > b_{J-1} > 0 carries weights
nu_j = log(b_j / b_{j+1}); the last scale has no successor, so its weight
uses a closing ratio (the geometric ratio 1/q, or the final observed ratio
for explicit lists).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

__all__ = ["ScaleSequence", "make_scales"]


@dataclass(frozen=True)
class ScaleSequence:
    scales: np.ndarray
    nu: np.ndarray
    closing_ratio: float
    single_scale: bool
    kind: str

    def __len__(self) -> int:
        return self.scales.size

    @property
    def ratios(self) -> np.ndarray:
        """Consecutive ratios b_j / b_{j+1} (closing ratio if J = 1)."""
        if self.scales.size == 1:
            return np.array([self.closing_ratio])
        return self.scales[:-1] / self.scales[1:]

    @property
    def delta_lo(self) -> float:
        return float(self.ratios.min())

    @property
    def delta_hi(self) -> float:
        return float(self.ratios.max())


def make_scales(kind: str, *, b0=None, q=None, J=None, scales=None, closing_ratio=None) -> ScaleSequence:
    """Build a ScaleSequence.

    kind="geometric": b_j = b0 * q**j for j < J, with q in (0, 1); every
    weight equals -log q.  kind="explicit": a strictly decreasing positive
    list; the closing ratio defaults to the final observed ratio and must be
    supplied explicitly for a single-scale list.
    """
    if kind == "geometric":
        if b0 is None or q is None or J is None:
            raise ConfigurationError("geometric scales require b0, q, and J")
        if not b0 > 0:
            raise ConfigurationError(f"b0 must be positive, got {b0}")
        if not 0.0 < q < 1.0:
            raise ConfigurationError(f"q must lie in (0, 1), got {q}")
        if int(J) != J or J < 1:
            raise ConfigurationError(f"J must be an integer >= 1, got {J!r}")
        J = int(J)
        arr = b0 * np.float64(q) ** np.arange(J)
        nu = np.full(J, -math.log(q))
        return ScaleSequence(arr, nu, 1.0 / q, J == 1, "geometric")
    if kind == "explicit":
        if scales is None:
            raise ConfigurationError("explicit scales require the scales list")
        arr = np.asarray(scales, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise ConfigurationError("scales must be a nonempty 1-D sequence")
        if (arr <= 0).any():
            raise ConfigurationError("scales must be positive")
        if arr.size > 1 and not (np.diff(arr) < 0).all():
            raise ConfigurationError("scales must be strictly decreasing")
        if closing_ratio is None:
            if arr.size == 1:
                raise ConfigurationError("a single explicit scale needs a closing_ratio")
            closing_ratio = float(arr[-2] / arr[-1])
        if not closing_ratio > 1.0:
            raise ConfigurationError(f"closing_ratio must exceed 1, got {closing_ratio}")
        nu = np.empty(arr.size)
        nu[:-1] = np.log(arr[:-1] / arr[1:])
        nu[-1] = math.log(closing_ratio)
        return ScaleSequence(arr, nu, float(closing_ratio), arr.size == 1, "explicit")
    raise ConfigurationError(f"unknown scale kind {kind!r}")
