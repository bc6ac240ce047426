import math
from fractions import Fraction
from functools import reduce

import numpy as np

from spinlab.chains import MODELS, ChainSpec

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)


class CLOSE_IN_VALUE:
    value: float
    tolerance: float

    def __init__(self, value: float, tolerance: float = 0.0) -> None:
        self.value = value
        self.tolerance = tolerance

    def __eq__(self, __o: float) -> bool:
        # True if __o \in [value - tolerance, value + tolerance]
        return (self.value - self.tolerance) <= __o <= (self.value + self.tolerance)

    def __repr__(self) -> str:
        return f"{self.value} +/- {self.tolerance}"


def embed(n_spins: int, ops: dict[int, np.ndarray]) -> np.ndarray:
    """Kronecker product with ops on the given sites and identities elsewhere, site 0 leftmost."""
    return reduce(np.kron, [ops.get(site, I2) for site in range(n_spins)])


def kron_hamiltonian(spec: ChainSpec) -> np.ndarray:
    """Full Hamiltonian built term by term from Kronecker products, independent of the bit-flip assembly."""
    n = spec.n_spins
    h = np.zeros((2**n, 2**n), dtype=complex)
    for i, j, w in spec.bonds:
        if spec.model == MODELS.XY:
            h += w / 2 * (embed(n, {i: X, j: X}) + embed(n, {i: Y, j: Y}))
        else:
            h -= w / 2 * (embed(n, {i: X, j: X}) + embed(n, {i: Y, j: Y}) + embed(n, {i: Z, j: Z}))
    for site, b in enumerate(spec.fields):
        h -= b * embed(n, {site: Z})
    return h


def total_excitation(n_spins: int) -> np.ndarray:
    return sum(embed(n_spins, {site: (I2 - Z) / 2}) for site in range(n_spins))


def taylor_propagator(h: np.ndarray, t: float, terms: int = 30) -> np.ndarray:
    """exp(-iHt) by scaling and squaring of a truncated Taylor series."""
    a = -1j * t * np.asarray(h, dtype=complex)
    norm = np.linalg.norm(a, 1)
    squarings = max(0, math.ceil(math.log2(norm)) + 1) if norm > 0 else 0
    a = a / 2**squarings
    result = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, terms + 1):
        term = term @ a / k
        result = result + term
    for _ in range(squarings):
        result = result @ result
    return result


def bessel_series(n: int, z: float, terms: int = 120) -> float:
    """J_n(z) from its power series in exact rational arithmetic."""
    half = Fraction(z) / 2
    total = Fraction(0)
    for k in range(terms):
        total += Fraction((-1) ** k, math.factorial(k) * math.factorial(k + n)) * half ** (2 * k + n)
    return float(total)


def random_linear_spec(rng: np.random.RandomState, n_spins: int, model: MODELS = MODELS.XY) -> ChainSpec:
    return ChainSpec(
        n_spins=n_spins,
        model=model,
        couplings=tuple(rng.uniform(0.2, 2.0, n_spins - 1)),
        fields=tuple(rng.uniform(-1.0, 1.0, n_spins)),
    )


def random_mirror_spec(rng: np.random.RandomState, n_spins: int) -> ChainSpec:
    half_c = rng.uniform(0.2, 2.0, n_spins // 2)
    if n_spins % 2:
        couplings = np.concatenate([half_c, half_c[::-1]])
    else:
        couplings = np.concatenate([half_c[:-1], [rng.uniform(0.2, 2.0)], half_c[:-1][::-1]])
    half_b = rng.uniform(-1.0, 1.0, (n_spins + 1) // 2)
    fields = np.concatenate([half_b, half_b[: n_spins // 2][::-1]])
    return ChainSpec(n_spins=n_spins, couplings=tuple(couplings), fields=tuple(fields))
