import math
from collections.abc import Callable

import numpy as np
import numpy.typing as npt

from spinlab.constants import INV_PHI, INV_PHI_SQUARE, SQRT2


def golden_section_max(
    func: Callable[[npt.NDArray], npt.NDArray],
    lo: npt.ArrayLike,
    hi: npt.ArrayLike,
    tol: float,
) -> tuple[npt.NDArray, npt.NDArray]:
    """
    Golden-section search for the maximum of a unimodal function, run on many brackets at once.

    Parameters:
    - func (Callable): Vectorized objective, maps an array of abscissae to an array of values.
    - lo (array-like): Left ends of the brackets.
    - hi (array-like): Right ends of the brackets.
    - tol (float): Final bracket width.

    Returns:
    - tuple[np.ndarray, np.ndarray]: Abscissae of the maxima and the objective there.
    """
    a = np.array(lo, dtype=float, ndmin=1)
    b = np.array(hi, dtype=float, ndmin=1)
    if a.size == 0:
        return a, a.copy()
    a, b = np.minimum(a, b), np.maximum(a, b)
    h = b - a
    widest = float(np.max(h))
    if widest <= tol:
        x = (a + b) / 2
        return x, func(x)

    # steps needed to bring the widest bracket below tol
    n = math.ceil(math.log(tol / widest) / math.log(INV_PHI))

    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = func(c)
    yd = func(d)

    for _ in range(n - 1):
        left = yc > yd
        # keep [a, d] where yc wins, [c, b] elsewhere
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        h = INV_PHI * h
        new_c = np.where(left, a + INV_PHI_SQUARE * h, d)
        new_d = np.where(left, c, a + INV_PHI * h)
        new_yc = np.where(left, np.nan, yd)
        new_yd = np.where(left, yc, np.nan)
        c, d = new_c, new_d
        # one fresh evaluation per bracket
        fresh = np.where(left, c, d)
        y_fresh = func(fresh)
        yc = np.where(left, y_fresh, new_yc)
        yd = np.where(left, new_yd, y_fresh)

    x = np.where(yc > yd, c, d)
    return x, np.maximum(yc, yd)


def resolve_time(value: str | float, omega: float) -> float:
    """Turn a time given as a number, "tau" or "tau/2" into a float, with tau = pi / (sqrt(2) omega)."""
    if isinstance(value, int | float):
        return float(value)
    text = str(value).strip().lower()
    tau = math.pi / (SQRT2 * omega)
    match text:
        case "tau":
            return tau
        case "tau/2":
            return tau / 2
        case _:
            try:
                return float(text)
            except ValueError:
                raise ValueError(f"Invalid time: {value}")  # noqa: B904


def complex_pairs(values: npt.ArrayLike) -> list:
    """Nested [re, im] lists for JSON output."""
    arr = np.asarray(values, dtype=complex)
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def clip_unit(value: float, lower: float = 0.0, upper: float = 1.0) -> float:
    # absorbs rounding past the exact bounds of overlaps and amplitudes
    return float(min(upper, max(lower, value)))
