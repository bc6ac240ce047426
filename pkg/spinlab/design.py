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

import numpy as np
import numpy.typing as npt
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from spinlab.chains import (
    MODELS,
    ChainSpec,
    HalfChainBasis,
    build_full_hamiltonian,
    build_half_chain_hamiltonian,
    coerce_enum,
)
from spinlab.constants import HOMOGENEOUS_DESIGN_RATES, MIRROR_TOL, SQRT2
from spinlab.errors import SpecValidationError
from spinlab.evolve import BASES, StateVector, eigendecompose, propagate, purity, reduced_state
from spinlab.utils.config import get_config
from spinlab.utils.misc import clip_unit, golden_section_max


class SCHEMES(IntEnum):
    GENERATION = 1  # odd N, starts from the bare middle excitation
    SHARING = 2  # even N, starts from the entangled middle pair


class CouplingDesign(BaseModel):
    """Engineered couplings that map |n~> onto the end-to-end Bell state |1~> after predicted_time."""

    model_config = ConfigDict(frozen=True)

    n_spins: int = Field(..., ge=3, description="chain length N")
    half_length: int = Field(..., ge=2, description="n, length of the effective half chain")
    couplings: tuple[float, ...] = Field(..., description="omega_{j,j+1}")
    compensation_fields: tuple[float, ...] = Field(..., description="B_j, non-zero only on the middle pair of an even chain")
    design_constant: float = Field(..., gt=0.0, description="rate lambda_design, predicted_time = pi / lambda_design")
    predicted_time: float = Field(..., gt=0.0)
    resource_cost: float = Field(..., gt=0.0, description="max coupling times predicted_time")
    scheme: SCHEMES

    @field_validator("scheme", mode="before")
    def validator_scheme(cls, value) -> SCHEMES:
        return coerce_enum(SCHEMES, value)

    @model_validator(mode="after")
    def check_params(self) -> "CouplingDesign":
        c = np.asarray(self.couplings)
        b = np.asarray(self.compensation_fields)
        if c.size != self.n_spins - 1 or b.size != self.n_spins:
            raise SpecValidationError("design couplings and fields do not match the chain length")
        if np.any(np.abs(c - c[::-1]) > MIRROR_TOL) or np.any(np.abs(b - b[::-1]) > MIRROR_TOL):
            raise SpecValidationError("design couplings must be mirror symmetric")
        return self

    def to_chain_spec(self) -> ChainSpec:
        return ChainSpec(n_spins=self.n_spins, model=MODELS.XY, couplings=self.couplings, fields=self.compensation_fields)

    def to_file_dict(self) -> dict:
        return self.to_chain_spec().to_file_dict()


class DesignVerification(BaseModel):
    model_config = ConfigDict(frozen=True)

    amplitude: float = Field(..., description="|<1~| exp(-iH t) |n~>| in the half-chain basis")
    full_space_overlap: float | None = Field(None, description="|<Bell_ends|psi(t)>| from full 2^N propagation")
    bulk_purity: float | None = Field(None, description="purity of the end-spin pair in the full space")


def _profile(n: int, rate: float) -> npt.NDArray[np.float64]:
    """c_j = (rate / 2) sqrt(j (n - j)) for j = 1 .. n - 1."""
    j = np.arange(1, n)
    return rate / 2 * np.sqrt(j * (n - j))


def design_half_time_entanglement(n_spins: int, lambda_design: float = 1.0) -> CouplingDesign:
    """
    Couplings for which the half-chain Hamiltonian is lambda_design J_x, so |n~> reaches |1~> at pi / lambda_design.

    Odd N: n = (N+1)/2, omega_{j,j+1} = c_j for j < n-1 and c_{n-1}/sqrt(2) on the bond into the middle spin,
    mirrored onto the other half. Even N: n = N/2, omega_{j,j+1} = c_j on each half and c_{n-1} on the middle
    bond, with fields -omega_{n,n+1}/2 on the two middle spins which turn the corner term into a uniform shift.
    """
    if n_spins < 3:
        raise SpecValidationError(f"designs need N >= 3, got {n_spins}")
    if not math.isfinite(lambda_design) or lambda_design <= 0:
        raise SpecValidationError(f"design constant must be positive, got {lambda_design}")

    basis = HalfChainBasis.for_spins(n_spins)
    n = basis.n
    c = _profile(n, lambda_design)
    fields = np.zeros(n_spins)
    if n_spins % 2:
        half = c.copy()
        half[-1] /= SQRT2
        couplings = np.concatenate([half, half[::-1]])
        scheme = SCHEMES.GENERATION
    else:
        middle = c[-1]
        couplings = np.concatenate([c, [middle], c[::-1]])
        fields[n - 1] = fields[n] = -middle / 2
        scheme = SCHEMES.SHARING

    time = math.pi / lambda_design
    logger.debug(f"design N = {n_spins}, n = {n}, couplings {np.round(couplings, 6).tolist()}")
    return CouplingDesign(
        n_spins=n_spins,
        half_length=n,
        couplings=tuple(float(x) for x in couplings),
        compensation_fields=tuple(float(x) for x in fields),
        design_constant=float(lambda_design),
        predicted_time=time,
        resource_cost=float(np.max(couplings)) * time,
        scheme=scheme,
    )


def homogeneous_design(n_spins: int, omega: float = 1.0) -> CouplingDesign:
    """The homogeneous chains that are also engineered designs: N = 3, and N = 4, 6 with compensation fields."""
    if n_spins not in HOMOGENEOUS_DESIGN_RATES:
        raise SpecValidationError(f"a homogeneous chain of {n_spins} spins has no perfect half-time design")
    design = design_half_time_entanglement(n_spins, HOMOGENEOUS_DESIGN_RATES[n_spins] * omega)
    if not np.allclose(design.couplings, omega, rtol=1e-12, atol=0):
        raise SpecValidationError(f"design for N = {n_spins} is not homogeneous")
    return design


def homogeneous_spec(n_spins: int, omega: float = 1.0, compensate: bool = True) -> ChainSpec:
    """Homogeneous chain, with -omega/2 on the middle pair of an even chain when compensate is set."""
    fields = [0.0] * n_spins
    if compensate and n_spins % 2 == 0:
        fields[n_spins // 2 - 1] = fields[n_spins // 2] = -omega / 2
    return ChainSpec.homogeneous(n_spins, omega, fields=tuple(fields))


def half_chain_amplitudes(spec: ChainSpec, times: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """|<1~| exp(-iH_half t) |n~>| for every t."""
    spectrum = eigendecompose(build_half_chain_hamiltonian(spec))
    return np.abs(spectrum.amplitudes(0, spectrum.dimension - 1, times))


def amplitude_bound(spec: ChainSpec) -> float:
    """sum_m |V_1m V_nm|, an upper bound on |<1~| exp(-iH_half t) |n~>| over all t."""
    vectors = eigendecompose(build_half_chain_hamiltonian(spec)).vectors
    return float(np.sum(np.abs(vectors[0, :] * vectors[-1, :])))


def max_half_chain_amplitude(
    spec: ChainSpec, t_max: float, samples: int = 5001, refine_tol: float = 1e-9
) -> tuple[float, float]:
    """Largest half-chain amplitude on (0, t_max] from a grid scan refined by golden-section search; returns (t, amplitude)."""
    if t_max <= 0 or samples < 3:
        raise SpecValidationError("need t_max > 0 and at least three samples")
    spectrum = eigendecompose(build_half_chain_hamiltonian(spec))
    last = spectrum.dimension - 1

    def objective(t: npt.NDArray) -> npt.NDArray:
        return np.abs(spectrum.amplitudes(0, last, t))

    times = np.linspace(0.0, t_max, samples)
    values = objective(times)
    peaks = np.flatnonzero((values[1:-1] > values[:-2]) & (values[1:-1] >= values[2:])) + 1
    best_t, best = float(times[np.argmax(values)]), float(np.max(values))
    if peaks.size:
        ts, vs = golden_section_max(objective, times[peaks - 1], times[peaks + 1], refine_tol)
        k = int(np.argmax(vs))
        if vs[k] > best:
            best_t, best = float(ts[k]), float(vs[k])
    return best_t, clip_unit(best)


def _end_state_vectors(n_spins: int) -> tuple[npt.NDArray, npt.NDArray]:
    """Initial |n~> and target (|0..01> + |10..0>)/sqrt(2) in the full space."""
    dim = 2**n_spins
    start = np.zeros(dim, dtype=complex)
    middle = (n_spins - 1) // 2
    if n_spins % 2:
        start[1 << (n_spins - 1 - middle)] = 1.0
    else:
        start[1 << (n_spins - 1 - middle)] = start[1 << (n_spins - 2 - middle)] = 1 / SQRT2
    target = np.zeros(dim, dtype=complex)
    target[1] = target[1 << (n_spins - 1)] = 1 / SQRT2
    return start, target


def verify_design(design: CouplingDesign, full_check: bool | None = None) -> DesignVerification:
    """
    Propagate |n~> under the design's half-chain Hamiltonian for predicted_time and return |<1~|psi>|.

    Up to the configured size (12 spins by default) the run is repeated in the full 2^N space, checking the
    overlap with the end-spin Bell state and the purity of the end pair, which is 1 exactly when every
    bulk spin is disentangled.
    """
    spec = design.to_chain_spec()
    h_half = build_half_chain_hamiltonian(spec)
    n = design.half_length
    start = np.zeros(n, dtype=complex)
    start[n - 1] = 1.0
    initial = StateVector(amplitudes=start, basis=BASES.HALF_CHAIN, n_spins=design.n_spins)
    psi = propagate(h_half, design.predicted_time, initial)
    amplitude = clip_unit(abs(psi.amplitudes[0]))

    if full_check is None:
        full_check = design.n_spins <= get_config().full_check_max_spins
    overlap = bulk = None
    if full_check:
        start, target = _end_state_vectors(design.n_spins)
        final = propagate(build_full_hamiltonian(spec), design.predicted_time, StateVector.from_vector(start, design.n_spins))
        overlap = clip_unit(abs(final.overlap(target)))
        bulk = clip_unit(purity(reduced_state(final, [0, design.n_spins - 1])))
    logger.info(f"design N = {design.n_spins}: amplitude {amplitude:.12f}")
    return DesignVerification(amplitude=amplitude, full_space_overlap=overlap, bulk_purity=bulk)


def perfect_transfer_couplings(n_spins: int, lambda_design: float = 1.0) -> tuple[float, ...]:
    """Full-length profile (lambda/2) sqrt(j (N - j)), perfect end-to-end transfer at pi / lambda."""
    return tuple(float(x) for x in _profile(n_spins, lambda_design))


class ResourceComparison(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_spins: int
    entangle_cost: float
    transfer_cost: float
    ratio: float


def resource_comparison(n_spins: int, lambda_design: float = 1.0) -> ResourceComparison:
    """Cost of half-time entanglement against full-length perfect transfer at the same rate, odd N."""
    if n_spins < 3 or n_spins % 2 == 0:
        raise SpecValidationError(f"resource comparison needs odd N >= 3, got {n_spins}")
    entangle = design_half_time_entanglement(n_spins, lambda_design).resource_cost
    transfer = max(perfect_transfer_couplings(n_spins, lambda_design)) * math.pi / lambda_design
    return ResourceComparison(n_spins=n_spins, entangle_cost=entangle, transfer_cost=transfer, ratio=entangle / transfer)
