# The MIT License (MIT)
# Copyright © 2024 spinlab developers

# Permission is hereby granted, free of charge, to any person obtaining a copy of this software and associated
# documentation files (the “Software”), to deal in the Software without restriction, including without limitation
# the rights to use, copy, modify, merge, publish, distribute, sublicense, and/or sell copies of the Software,
# and to permit persons to whom the Software is furnished to do so, subject to the following conditions:

# The above copyright notice and this permission notice shall be included in all copies or substantial portions of
# the Software.

# THE SOFTWARE IS PROVIDED “AS IS”, WITHOUT WARRANTY OF ANY KIND, EXPRESS OR IMPLIED, INCLUDING BUT NOT LIMITED TO
# THE WARRANTIES OF MERCHANTABILITY, FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL
# THE AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER LIABILITY, WHETHER IN AN ACTION
# OF CONTRACT, TORT OR OTHERWISE, ARISING FROM, OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER
# DEALINGS IN THE SOFTWARE.

import math
from enum import IntEnum
from functools import lru_cache, reduce
from typing import Any

import numpy as np
import numpy.typing as npt
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from spinlab.chains import ChainSpec, HermitianMatrix, build_excitation_hamiltonian, check_hermitian, coerce_enum
from spinlab.constants import ENTROPY_CUTOFF, STATE_NORM_TOL
from spinlab.errors import DimensionError, SpecValidationError


class BASES(IntEnum):
    FULL = 1
    EXCITATION = 2
    HALF_CHAIN = 3


def _frozen_array(value: Any, dtype: type = complex) -> npt.NDArray:
    arr = np.array(value, dtype=dtype)
    arr.flags.writeable = False
    return arr


class StateVector(BaseModel):
    """Normalized amplitudes over the full product basis, the single-excitation basis or the half-chain basis."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    amplitudes: np.ndarray = Field(..., description="complex amplitudes")
    basis: BASES = Field(BASES.FULL, description="basis the amplitudes refer to")
    n_spins: int = Field(..., ge=1, description="number of spins of the underlying chain")

    @field_validator("amplitudes", mode="before")
    def validator_amplitudes(cls, value) -> np.ndarray:
        arr = _frozen_array(value)
        if arr.ndim != 1:
            raise ValueError(f"amplitudes must be one-dimensional, got shape {arr.shape}")
        return arr

    @field_validator("basis", mode="before")
    def validator_basis(cls, value) -> BASES:
        return coerce_enum(BASES, value)

    @model_validator(mode="after")
    def check_params(self) -> "StateVector":
        expected = basis_dimension(self.basis, self.n_spins)
        if self.amplitudes.size != expected:
            raise DimensionError(
                f"{self.basis.name.lower()} basis of {self.n_spins} spins has dimension {expected}, got {self.amplitudes.size}"
            )
        norm = float(np.linalg.norm(self.amplitudes))
        if abs(norm - 1.0) > STATE_NORM_TOL:
            raise SpecValidationError(f"state is not normalized: |psi| = {norm:.15f}")
        return self

    @classmethod
    def from_vector(cls, vector: npt.ArrayLike, n_spins: int | None = None, basis: BASES = BASES.FULL) -> "StateVector":
        vec = np.asarray(vector, dtype=complex)
        if n_spins is None:
            if basis != BASES.FULL:
                raise SpecValidationError("n_spins is required outside the full basis")
            n_spins = int(round(math.log2(vec.size)))
        return cls(amplitudes=vec, basis=basis, n_spins=n_spins)

    @classmethod
    def basis_state(cls, label: str) -> "StateVector":
        """Computational basis state from a bit string, e.g. "100"."""
        if not label or set(label) - {"0", "1"}:
            raise SpecValidationError(f"Invalid basis label: {label!r}")
        vec = np.zeros(2 ** len(label), dtype=complex)
        vec[int(label, 2)] = 1.0
        return cls(amplitudes=vec, n_spins=len(label))

    @classmethod
    def product_state(cls, *qubits: npt.ArrayLike) -> "StateVector":
        """Tensor product of single-spin states given as (alpha, beta) pairs, spin 1 first."""
        factors = [np.asarray(q, dtype=complex) for q in qubits]
        if not factors or any(q.shape != (2,) for q in factors):
            raise DimensionError("product_state takes one or more two-component vectors")
        return cls(amplitudes=reduce(np.kron, factors), n_spins=len(factors))

    @classmethod
    def excitation(cls, n_spins: int, site: int) -> "StateVector":
        vec = np.zeros(n_spins, dtype=complex)
        vec[site] = 1.0
        return cls(amplitudes=vec, basis=BASES.EXCITATION, n_spins=n_spins)

    @property
    def dimension(self) -> int:
        return int(self.amplitudes.size)

    def overlap(self, other: "StateVector | npt.ArrayLike") -> complex:
        """<self|other>."""
        vec = other.amplitudes if isinstance(other, StateVector) else np.asarray(other, dtype=complex)
        if vec.shape != self.amplitudes.shape:
            raise DimensionError(f"cannot overlap dimensions {self.dimension} and {vec.size}")
        return complex(np.vdot(self.amplitudes, vec))


def basis_dimension(basis: BASES, n_spins: int) -> int:
    match basis:
        case BASES.FULL:
            return 2**n_spins
        case BASES.EXCITATION:
            return n_spins
        case BASES.HALF_CHAIN:
            return (n_spins + 1) // 2
    raise ValueError(f"Invalid basis: {basis}")


class Spectrum(BaseModel):
    """Eigen-decomposition H = V diag(E) V^dagger, energies ascending."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    energies: np.ndarray
    vectors: np.ndarray

    @field_validator("energies", mode="before")
    def validator_energies(cls, value) -> np.ndarray:
        return _frozen_array(value, float)

    @field_validator("vectors", mode="before")
    def validator_vectors(cls, value) -> np.ndarray:
        return _frozen_array(value)

    @model_validator(mode="after")
    def check_params(self) -> "Spectrum":
        d = self.energies.size
        if self.vectors.shape != (d, d):
            raise DimensionError(f"eigenvector matrix has shape {self.vectors.shape}, expected {(d, d)}")
        return self

    @property
    def dimension(self) -> int:
        return int(self.energies.size)

    def reconstruct(self) -> HermitianMatrix:
        return (self.vectors * self.energies) @ self.vectors.conj().T

    def propagator(self, t: float) -> npt.NDArray[np.complex128]:
        phases = np.exp(-1j * self.energies * t)
        return (self.vectors * phases) @ self.vectors.conj().T

    def evolve(self, vector: npt.ArrayLike, t: float) -> npt.NDArray[np.complex128]:
        vec = np.asarray(vector, dtype=complex)
        if vec.shape != (self.dimension,):
            raise DimensionError(f"state of dimension {vec.size} does not match H of dimension {self.dimension}")
        return self.vectors @ (np.exp(-1j * self.energies * t) * (self.vectors.conj().T @ vec))

    def amplitudes(self, row: int, col: int, times: npt.ArrayLike) -> npt.NDArray[np.complex128]:
        """<row| exp(-iHt) |col> for every t in times."""
        weights = self.vectors[row, :] * self.vectors[col, :].conj()
        t = np.asarray(times, dtype=float)
        return np.exp(-1j * np.multiply.outer(t, self.energies)) @ weights


def eigendecompose(h: npt.ArrayLike) -> Spectrum:
    h = check_hermitian(h)
    if not np.any(h.imag):
        # real symmetric input, faster solver and real eigenvectors
        energies, vectors = np.linalg.eigh(h.real)
    else:
        energies, vectors = np.linalg.eigh(h)
    return Spectrum(energies=energies, vectors=vectors)


def _as_spectrum(h: HermitianMatrix | Spectrum) -> Spectrum:
    return h if isinstance(h, Spectrum) else eigendecompose(h)


def propagate(h: HermitianMatrix | Spectrum, t: float, psi: StateVector) -> StateVector:
    """exp(-iHt) psi through the eigen-decomposition of H."""
    spectrum = _as_spectrum(h)
    if psi.dimension != spectrum.dimension:
        raise DimensionError(f"state of dimension {psi.dimension} does not match H of dimension {spectrum.dimension}")
    return StateVector(amplitudes=spectrum.evolve(psi.amplitudes, t), basis=psi.basis, n_spins=psi.n_spins)


def unitary_at(h: HermitianMatrix | Spectrum, t: float) -> npt.NDArray[np.complex128]:
    return _as_spectrum(h).propagator(t)


def reduced_state(psi: StateVector, keep: Any) -> npt.NDArray[np.complex128]:
    """
    Partial trace of |psi><psi| over every site not in keep.

    Kept sites are ordered ascending, the lowest site being the most significant bit.
    """
    if psi.basis != BASES.FULL:
        raise SpecValidationError("reduced states need a full-basis state")
    n = psi.n_spins
    requested = [int(s) for s in keep]
    sites = sorted(set(requested))
    if not sites or len(sites) != len(requested) or sites[0] < 0 or sites[-1] >= n:
        raise SpecValidationError(f"Invalid spin subset {keep} for {n} spins")
    tensor = np.moveaxis(psi.amplitudes.reshape([2] * n), sites, list(range(len(sites))))
    m = tensor.reshape(2 ** len(sites), -1)
    return m @ m.conj().T


def entanglement_entropy(rho: npt.ArrayLike) -> float:
    """Von Neumann entropy in bits."""
    rho = check_hermitian(rho, tol=1e-10)
    trace = float(np.trace(rho).real)
    if abs(trace - 1.0) > 1e-8:
        raise SpecValidationError(f"density matrix has trace {trace}")
    p = np.linalg.eigvalsh(rho)
    p = p[p > ENTROPY_CUTOFF]
    return float(max(0.0, -np.sum(p * np.log2(p))))


def purity(rho: npt.ArrayLike) -> float:
    rho = np.asarray(rho, dtype=complex)
    return float(np.real(np.trace(rho @ rho)))


@lru_cache(maxsize=256)
def excitation_spectrum(spec: ChainSpec) -> Spectrum:
    logger.debug(f"diagonalizing single-excitation block, N = {spec.n_spins}")
    return eigendecompose(build_excitation_hamiltonian(spec))


def transfer_amplitudes_complex(spec: ChainSpec, times: npt.ArrayLike) -> npt.NDArray[np.complex128]:
    """<10..0| exp(-iHt) |0..01> for every t, from one cached eigen-decomposition."""
    return excitation_spectrum(spec).amplitudes(0, spec.n_spins - 1, times)


def transfer_amplitude_complex(spec: ChainSpec, t: float) -> complex:
    return complex(transfer_amplitudes_complex(spec, [t])[0])


def transfer_amplitudes(spec: ChainSpec, times: npt.ArrayLike) -> npt.NDArray[np.float64]:
    return np.minimum(np.abs(transfer_amplitudes_complex(spec, times)), 1.0)


def transfer_amplitude(spec: ChainSpec, t: float) -> float:
    """f(t) = |<10..0| exp(-iHt) |0..01>|."""
    return float(transfer_amplitudes(spec, [t])[0])


def average_fidelity(f: float | npt.ArrayLike) -> float | npt.NDArray[np.float64]:
    """F = f/3 + f^2/6 + 1/2, the transfer fidelity averaged over input states."""
    arr = np.asarray(f, dtype=float)
    if np.any(arr < -1e-12) or np.any(arr > 1 + 1e-12) or not np.all(np.isfinite(arr)):
        raise SpecValidationError("transfer amplitude must lie in [0, 1]")
    arr = np.clip(arr, 0.0, 1.0)
    fidelity = arr / 3 + arr**2 / 6 + 0.5
    return float(fidelity) if fidelity.ndim == 0 else fidelity


class FidelitySample(BaseModel):
    model_config = ConfigDict(frozen=True)

    t: float = Field(..., description="time in units of 1/omega")
    f: float = Field(..., ge=0.0, le=1.0, description="transfer amplitude magnitude")
    F: float = Field(..., ge=0.5, le=1.0, description="input-averaged fidelity")

    @model_validator(mode="after")
    def check_params(self) -> "FidelitySample":
        if self.F != average_fidelity(self.f):
            raise ValueError("F must equal f/3 + f^2/6 + 1/2")
        return self

    @classmethod
    def at(cls, t: float, f: float) -> "FidelitySample":
        f = min(1.0, max(0.0, float(f)))
        return cls(t=float(t), f=f, F=average_fidelity(f))


def three_spin_amplitudes(omega: float, omega23: float, t: float) -> tuple[complex, complex, complex]:
    """
    Closed-form exp(-iHt)|100> on |100>, |010>, |001> for the chain with couplings (omega, omega23).

    With g = sqrt(omega^2 + omega23^2):
    (omega23^2 + omega^2 cos gt) / g^2,  -i (omega / g) sin gt,  omega omega23 (cos gt - 1) / g^2.
    """
    g = math.hypot(omega, omega23)
    c, s = math.cos(g * t), math.sin(g * t)
    return (
        complex((omega23**2 + omega**2 * c) / g**2),
        -1j * (omega / g) * s,
        complex(omega * omega23 * (c - 1) / g**2),
    )


def three_spin_pair_amplitudes(omega: float, omega23: float, t: float) -> tuple[complex, complex, complex]:
    """Closed-form exp(-iHt)|101> on |101>, |011>, |110>: cos gt, -i (omega / g) sin gt, -i (omega23 / g) sin gt."""
    g = math.hypot(omega, omega23)
    return (
        complex(math.cos(g * t)),
        -1j * (omega / g) * math.sin(g * t),
        -1j * (omega23 / g) * math.sin(g * t),
    )
