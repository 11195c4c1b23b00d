"""Small shared helpers."""
from __future__ import annotations

import numpy as np


def order_by_magnitude(values: np.ndarray) -> np.ndarray:
    """Indices sorting ``values`` by decreasing absolute value.

    Ties in magnitude put the positive value first; remaining ties keep the
    original index order.  Magnitudes within a relative 1e-12 count as tied,
    so a +/- pair that differs only by rounding noise resolves to the
    positive member instead of whichever noise made look bigger.
    """
    values = np.asarray(values, dtype=float)
    n = values.size
    magnitudes = np.abs(values)
    boosted = magnitudes * (1.0 + 1e-12 * (values > 0))
    # lexsort uses the last key as primary
    return np.lexsort((np.arange(n), -np.sign(values), -boosted))
