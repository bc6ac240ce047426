"""
Integer-order Bessel functions of the first kind.

Values come from Miller's backward recurrence

    J_{k-1}(z) = (2k / z) J_k(z) - J_{k+1}(z)

started far above max(n, |z|) from an arbitrary seed, then normalized with the identity
J_0(z) + 2 * sum_k J_{2k}(z) = 1. Downward recurrence is stable for every order, so a single
pass produces J_0 .. J_n to near machine precision, including orders in the thousands.
"""

import cmath
import math

import numpy as np
import numpy.typing as npt

from spinlab.constants import BESSEL_RESCALE_AT, BESSEL_SEED, BESSEL_START_MARGIN, BESSEL_START_SCALE


def start_order(n_max: int, z: float) -> int:
    """Even starting order for the backward recurrence."""
    top = max(n_max, abs(z))
    order = int(math.ceil(top + BESSEL_START_MARGIN + math.sqrt(BESSEL_START_SCALE * top)))
    return order + (order % 2)


def bessel_jn_all(n_max: int, z: float) -> npt.NDArray[np.float64]:
    """
    J_0(z) .. J_{n_max}(z) for real z.

    Parameters:
    - n_max (int): Highest order, >= 0.
    - z (float): Real argument.

    Returns:
    - np.ndarray: Array of length n_max + 1.
    """
    if n_max < 0:
        raise ValueError(f"n_max must be non-negative, got {n_max}")
    z = float(z)
    if not math.isfinite(z):
        raise ValueError(f"argument must be finite, got {z}")

    values = np.zeros(n_max + 1)
    if z == 0.0:
        values[0] = 1.0
        return values
    if z < 0:
        # J_k(-z) = (-1)^k J_k(z)
        signs = np.where(np.arange(n_max + 1) % 2 == 0, 1.0, -1.0)
        return signs * bessel_jn_all(n_max, -z)

    top = start_order(n_max, z)
    two_over_z = 2.0 / z
    j_next = 0.0  # J_{k+1}
    j_curr = BESSEL_SEED  # J_k
    norm = 0.0  # running J_0 + 2 * sum J_2k, in the same scale as j_curr

    for k in range(top, 0, -1):
        if k <= n_max:
            values[k] = j_curr
        if k % 2 == 0:
            norm += 2.0 * j_curr
        j_prev = k * two_over_z * j_curr - j_next
        j_next, j_curr = j_curr, j_prev
        if abs(j_curr) > BESSEL_RESCALE_AT:
            scale = 1.0 / BESSEL_RESCALE_AT
            j_curr *= scale
            j_next *= scale
            norm *= scale
            values[: n_max + 1] *= scale

    values[0] = j_curr
    norm += j_curr
    return values / norm


def bessel_jn(n: int, z: float) -> float:
    """J_n(z) for any integer n, using J_{-n} = (-1)^n J_n."""
    value = float(bessel_jn_all(abs(n), z)[abs(n)])
    if n < 0 and n % 2:
        return -value
    return value


def jacobi_anger_sum(z: float, theta: float, k_max: int) -> complex:
    """Truncated sum_{|k| <= k_max} i^k J_k(z) e^{-i k theta}, which converges to e^{i z cos(theta)}."""
    orders = bessel_jn_all(k_max, z)
    total = complex(orders[0])
    for k in range(1, k_max + 1):
        # the +k and -k terms are equal up to the sign of the angle
        total += (1j**k) * orders[k] * (cmath.exp(-1j * k * theta) + cmath.exp(1j * k * theta))
    return total
