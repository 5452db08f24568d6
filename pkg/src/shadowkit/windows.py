"""Finite computation windows.

The underlying theory lives on all of Z (difference equations) or R
(differential equations); an artifact has to truncate.  A window fixes the
truncation and an interior margin on which sup-norm statements are
certified, since sums and integrals near the cut are artificially small.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import WindowBoundsError


@dataclass(frozen=True)
class DiscreteWindow:
    """Integer index range [n_lo, n_hi] with an interior margin."""

    n_lo: int
    n_hi: int
    margin: int = 10

    def __post_init__(self):
        if self.n_lo >= self.n_hi:
            raise ValueError(f"need n_lo < n_hi, got [{self.n_lo}, {self.n_hi}]")
        if self.margin < 0:
            raise ValueError("margin must be >= 0")
        if self.n_lo + self.margin > self.n_hi - self.margin:
            raise ValueError(
                f"margin {self.margin} leaves no interior in [{self.n_lo}, {self.n_hi}]"
            )

    @property
    def size(self):
        """Number of indices in the window."""
        return self.n_hi - self.n_lo + 1

    @cached_property
    def indices(self):
        return np.arange(self.n_lo, self.n_hi + 1)

    @property
    def interior_lo(self):
        return self.n_lo + self.margin

    @property
    def interior_hi(self):
        return self.n_hi - self.margin

    def contains(self, n):
        return self.n_lo <= n <= self.n_hi

    def offset(self, n):
        """Array offset of index n; raises if n is outside the window."""
        if not self.contains(n):
            raise WindowBoundsError(f"index {n} outside window [{self.n_lo}, {self.n_hi}]")
        return int(n) - self.n_lo

    def interior_offsets(self):
        """Offsets of the interior indices (slice endpoints inclusive)."""
        return self.interior_lo - self.n_lo, self.interior_hi - self.n_lo


@dataclass(frozen=True)
class ContinuousWindow:
    """Time interval [t_lo, t_hi] with grid step and excluded boundary layer."""

    t_lo: float
    t_hi: float
    h_grid: float = 0.05
    boundary: float = 5.0

    def __post_init__(self):
        if not self.t_lo < self.t_hi:
            raise ValueError(f"need t_lo < t_hi, got [{self.t_lo}, {self.t_hi}]")
        if self.h_grid <= 0:
            raise ValueError("h_grid must be > 0")
        if self.boundary < 0:
            raise ValueError("boundary must be >= 0")
        if self.t_lo + self.boundary > self.t_hi - self.boundary:
            raise ValueError("boundary layer leaves no interior")

    @cached_property
    def grid(self):
        """Evaluation grid t_lo + j*h_grid covering the window."""
        n = int(round((self.t_hi - self.t_lo) / self.h_grid))
        # Last point may fall slightly short of t_hi if the span is not an
        # exact multiple of h_grid; that is fine for grid functions.
        return self.t_lo + self.h_grid * np.arange(n + 1)

    @cached_property
    def interior_mask(self):
        g = self.grid
        return (g >= self.t_lo + self.boundary - 1e-12) & (g <= self.t_hi - self.boundary + 1e-12)

    def contains(self, t, slack=0.0):
        return self.t_lo - slack <= t <= self.t_hi + slack

    def require(self, t, slack=0.0):
        if not self.contains(t, slack):
            raise WindowBoundsError(f"time {t} outside window [{self.t_lo}, {self.t_hi}]")
