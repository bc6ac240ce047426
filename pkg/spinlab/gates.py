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
from collections.abc import Sequence
from typing import Any

import numpy as np
import numpy.typing as npt
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

from spinlab.chains import ChainSpec, build_full_hamiltonian
from spinlab.constants import INVARIANCE_TOL, UNITARY_TOL
from spinlab.errors import DimensionError, LeakageTooLargeError, SpecValidationError
from spinlab.evolve import unitary_at
from spinlab.utils.misc import complex_pairs

SWAP = np.array(
    [
        [1, 0, 0, 0],
        [0, 0, 1, 0],
        [0, 1, 0, 0],
        [0, 0, 0, 1],
    ],
    dtype=complex,
)
JOINT_PHASE = np.diag([1, -1, -1, -1]).astype(complex)
# exchange of the end spins composed with the joint phase Diag(1, -1, -1, -1)
EFFECTIVE_GATE = SWAP @ JOINT_PHASE


def is_unitary(matrix: npt.ArrayLike, tol: float = UNITARY_TOL) -> bool:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= tol)


def _n_spins_of(u: npt.NDArray) -> int:
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {u.shape}")
    n = int(round(math.log2(u.shape[0]))) if u.shape[0] > 0 else 0
    if n < 1 or 2**n != u.shape[0]:
        raise DimensionError(f"dimension {u.shape[0]} is not a power of two")
    return n


def sector_indices(n_spins: int, mediator_spins: Sequence[int], mediator_state: str) -> list[int]:
    """
    Full-space indices of the states whose mediators are in mediator_state.

    The remaining (data) spins are enumerated in binary order with the lowest site most significant, so for
    three spins with mediator site 1 the order is |00>, |01>, |10>, |11> on (spin 1, spin 3).
    """
    mediators = tuple(int(s) for s in mediator_spins)
    if len(set(mediators)) != len(mediators) or any(not 0 <= s < n_spins for s in mediators):
        raise SpecValidationError(f"Invalid mediator spins {mediators} for {n_spins} spins")
    if len(mediator_state) != len(mediators) or set(mediator_state) - {"0", "1"}:
        raise SpecValidationError(f"mediator state {mediator_state!r} does not label {len(mediators)} spins")

    data_sites = [s for s in range(n_spins) if s not in mediators]
    fixed = sum(int(bit) << (n_spins - 1 - site) for site, bit in zip(mediators, mediator_state, strict=True))
    indices = []
    for r in range(2 ** len(data_sites)):
        idx = fixed
        for k, site in enumerate(data_sites):
            bit = (r >> (len(data_sites) - 1 - k)) & 1
            idx |= bit << (n_spins - 1 - site)
        indices.append(idx)
    return indices


def check_invariant_subspace(u: npt.ArrayLike, mediator_spins: Sequence[int], mediator_state: str) -> float:
    """Operator norm of the blocks of U connecting the mediator_state sector to its complement."""
    u = np.asarray(u, dtype=complex)
    n = _n_spins_of(u)
    sector = sector_indices(n, mediator_spins, mediator_state)
    inside = set(sector)
    complement = [k for k in range(2**n) if k not in inside]
    if not complement:
        return 0.0
    outward = np.linalg.norm(u[np.ix_(complement, sector)], 2)
    inward = np.linalg.norm(u[np.ix_(sector, complement)], 2)
    return float(max(outward, inward))


def compare_gates(a: npt.ArrayLike, b: npt.ArrayLike, check_unitary: bool = True) -> tuple[float, complex]:
    """
    Distance between two gates up to a global phase.

    Returns min over |c| = 1 of ||A - cB||_F together with the minimizing c = tr(B^dagger A) / |tr(B^dagger A)|.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"cannot compare gates of shapes {a.shape} and {b.shape}")
    if check_unitary and not (is_unitary(a) and is_unitary(b)):
        raise SpecValidationError("compare_gates expects unitary matrices")
    overlap = complex(np.vdot(b, a))
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0 + 0j
    return float(np.linalg.norm(a - phase * b)), phase


class GateReport(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    leakage: float = Field(..., ge=0.0, description="operator norm coupling the mediator sector to its complement")
    effective_gate: np.ndarray = Field(..., description="restriction of U to the mediator sector, data spins ordered")
    mediator_spins: tuple[int, ...] = Field(..., description="sites held fixed")
    mediator_sector: str = Field(..., description="basis label of the mediators")
    decomposition_residual: float = Field(..., description="phase-insensitive distance from SWAP * Diag(1,-1,-1,-1)")
    global_phase: complex = Field(..., description="phase c minimizing the distance")
    invariant: bool = Field(..., description="leakage below the invariance threshold")
    excitation_residuals: dict[int, float] = Field(
        default_factory=dict, description="distance from the target per number of data excitations"
    )
    time: float | None = Field(None, description="evolution time of U")

    @field_validator("effective_gate", mode="before")
    def validator_effective_gate(cls, value) -> np.ndarray:
        arr = np.array(value, dtype=complex)
        arr.flags.writeable = False
        return arr

    @field_validator("global_phase", mode="before")
    def validator_global_phase(cls, value) -> complex:
        if isinstance(value, list | tuple) and len(value) == 2:
            return complex(value[0], value[1])
        return complex(value)

    @model_validator(mode="after")
    def check_params(self) -> "GateReport":
        if self.leakage < 1e-10 and not is_unitary(self.effective_gate):
            raise ValueError("effective gate of an invariant sector must be unitary")
        return self

    @field_serializer("effective_gate")
    def serialize_effective_gate(self, value: np.ndarray) -> list:
        return complex_pairs(value)

    @field_serializer("global_phase")
    def serialize_global_phase(self, value: complex) -> list:
        return [value.real, value.imag]


def _excitation_residuals(gate: npt.NDArray, target: npt.NDArray, fallback_phase: complex) -> dict[int, float]:
    # the all-zero data column fixes the phase when it is populated
    vacuum = gate[0, 0] * np.conj(target[0, 0])
    phase = vacuum / abs(vacuum) if abs(vacuum) > 0.5 else fallback_phase
    groups: dict[int, list[int]] = {}
    for col in range(gate.shape[1]):
        groups.setdefault(col.bit_count(), []).append(col)
    return {e: float(np.linalg.norm(gate[:, cols] - phase * target[:, cols])) for e, cols in sorted(groups.items())}


def extract_effective_gate(
    u: npt.ArrayLike,
    mediator_spins: Sequence[int] = (1,),
    mediator_state: str = "0",
    target: npt.ArrayLike | None = EFFECTIVE_GATE,
    strict: bool = True,
    threshold: float = INVARIANCE_TOL,
    time: float | None = None,
) -> GateReport:
    """
    Restrict U to a mediator sector and compare the result with a target gate.

    Args:
    - u (array-like): Full-space unitary.
    - mediator_spins (Sequence[int]): Sites whose state labels the sector.
    - mediator_state (str): Bit string of the mediators, e.g. "0".
    - target (array-like | None): Gate the restriction is compared against, SWAP * Diag(1,-1,-1,-1) by default.
    - strict (bool): Raise LeakageTooLargeError when the sector is not invariant; otherwise report it.
    - threshold (float): Largest leakage treated as invariant.
    - time (float | None): Evolution time, recorded in the report.

    Returns:
    - GateReport: The restriction with its leakage and residuals.
    """
    u = np.asarray(u, dtype=complex)
    n = _n_spins_of(u)
    leakage = check_invariant_subspace(u, mediator_spins, mediator_state)
    invariant = leakage < threshold
    if not invariant:
        if strict:
            logger.error(f"mediator sector |{mediator_state}> on sites {tuple(mediator_spins)} is not invariant")
            raise LeakageTooLargeError(leakage, threshold)
        logger.warning(f"mediator sector |{mediator_state}> leaks: {leakage:.3e}, reporting the restriction anyway")

    sector = sector_indices(n, mediator_spins, mediator_state)
    gate = u[np.ix_(sector, sector)]

    residual, phase, residuals = math.nan, 1.0 + 0j, {}
    if target is not None:
        target = np.asarray(target, dtype=complex)
        residual, phase = compare_gates(gate, target, check_unitary=invariant)
        residuals = _excitation_residuals(gate, target, phase)
    logger.debug(f"leakage {leakage:.3e}, residual {residual:.3e}")

    return GateReport(
        leakage=leakage,
        effective_gate=gate,
        mediator_spins=tuple(int(s) for s in mediator_spins),
        mediator_sector=mediator_state,
        decomposition_residual=residual,
        global_phase=phase,
        invariant=invariant,
        excitation_residuals=residuals,
        time=time,
    )


def chain_gate(spec: ChainSpec, t: float, mediator_state: str = "0", **kwargs: Any) -> tuple[npt.NDArray, GateReport]:
    """Full unitary of a chain at time t and its effective gate on the end spins."""
    u = unitary_at(build_full_hamiltonian(spec), t)
    return u, extract_effective_gate(u, spec.mediator_sites, mediator_state, time=t, **kwargs)
