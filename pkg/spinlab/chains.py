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

import json
import math
from enum import IntEnum
from itertools import combinations
from pathlib import Path
from typing import Any, NamedTuple

import numpy as np
import numpy.typing as npt
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from spinlab.constants import DISPLAY_ORDER_3SPIN, HERMITIAN_TOL, MIRROR_TOL
from spinlab.errors import DimensionError, NotHermitianError, SpecValidationError
from spinlab.utils.config import get_config

HermitianMatrix = npt.NDArray[np.complex128]


class MODELS(IntEnum):
    XY = 1
    HEISENBERG = 2


class TOPOLOGIES(IntEnum):
    LINEAR = 1
    PARALLEL_CHAINS = 2


class PARITIES(IntEnum):
    ODD = 1
    EVEN = 2


def coerce_enum(enum_cls: type[IntEnum], value: Any) -> IntEnum:
    """Accept an enum member, its integer value or its (case-insensitive) name."""
    if isinstance(value, enum_cls):
        return value
    if isinstance(value, int):
        try:
            return enum_cls(value)
        except ValueError:
            raise ValueError(f"Invalid {enum_cls.__name__} value: {value}")  # noqa: B904
    if isinstance(value, str):
        try:
            return enum_cls[value.strip().upper().replace("-", "_")]
        except KeyError:
            raise ValueError(f"Invalid enum name: {value}")  # noqa: B904
    raise ValueError(f"Invalid value: {value}")


class PauliConvention:
    """
    Single-spin matrices in the basis (|0>, |1>).

    |1> is the excited state and sigma_z|0> = +|0>. sigma_y carries the sign for which
    sigma_+ = (sigma_x + i sigma_y) / 2 takes |0> to |1>; bilinears such as
    sigma_x sigma_x + sigma_y sigma_y do not depend on that sign.
    """

    IDENTITY = np.eye(2, dtype=complex)
    SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
    SIGMA_Y = np.array([[0, 1j], [-1j, 0]], dtype=complex)
    SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
    SIGMA_PLUS = (SIGMA_X + 1j * SIGMA_Y) / 2
    SIGMA_MINUS = (SIGMA_X - 1j * SIGMA_Y) / 2


class PauliProduct(NamedTuple):
    coefficient: float
    factors: tuple[tuple[int, npt.NDArray], ...]  # (site, 2x2 matrix)


class ChainSpec(BaseModel):
    """
    A spin chain, or the parallel-chains network, together with its couplings and local fields.

    Sites are 0-based: spin j of the usual 1-based notation is site j - 1. For the parallel-chains
    network site 0 is end spin 1, sites 1..m are the mediators and site m + 1 is end spin 3.
    """

    model_config = ConfigDict(frozen=True)

    n_spins: int = Field(..., ge=2, description="number of spins N")
    model: MODELS = Field(MODELS.XY, description="exchange model")
    couplings: tuple[float, ...] = Field((), description="bond couplings omega_{j,j+1}; N - 1 entries for a linear chain")
    fields: tuple[float, ...] = Field((), description="sigma_z field strength B_j per spin")
    topology: TOPOLOGIES = Field(TOPOLOGIES.LINEAR, description="linear chain or parallel-chains network")
    branch_couplings: tuple[float, ...] = Field(
        (), description="per-branch coupling of a parallel-chains network, the same on both bonds of a branch"
    )

    @field_validator("model", mode="before")
    def validator_model(cls, value) -> MODELS:
        return coerce_enum(MODELS, value)

    @field_validator("topology", mode="before")
    def validator_topology(cls, value) -> TOPOLOGIES:
        return coerce_enum(TOPOLOGIES, value)

    @model_validator(mode="before")
    @classmethod
    def fill_defaults(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        topology = data.get("topology", TOPOLOGIES.LINEAR)
        # file form {"topology": {"parallel_chains": [w_a, w_b, ...]}}
        if isinstance(topology, dict):
            if len(topology) != 1:
                raise ValueError(f"Invalid topology: {topology}")
            (name, branches), = topology.items()
            data["topology"] = name
            data["branch_couplings"] = branches
            topology = name
        topology = coerce_enum(TOPOLOGIES, topology)

        if topology == TOPOLOGIES.PARALLEL_CHAINS and data.get("n_spins") is None and data.get("branch_couplings"):
            data["n_spins"] = len(data["branch_couplings"]) + 2
        n = data.get("n_spins")
        if isinstance(n, int) and n >= 2:
            if topology == TOPOLOGIES.LINEAR and data.get("couplings") is None:
                data["couplings"] = (1.0,) * (n - 1)
            if data.get("fields") is None:
                data["fields"] = (0.0,) * n
        return data

    @model_validator(mode="after")
    def check_params(self) -> "ChainSpec":
        n = self.n_spins
        if len(self.fields) != n:
            raise SpecValidationError(f"expected {n} fields, got {len(self.fields)}")
        values = self.couplings + self.fields + self.branch_couplings
        if not all(math.isfinite(v) for v in values):
            raise SpecValidationError("couplings and fields must be finite")

        match self.topology:
            case TOPOLOGIES.LINEAR:
                if len(self.couplings) != n - 1:
                    raise SpecValidationError(f"{n} spins need {n - 1} couplings, got {len(self.couplings)}")
                if self.branch_couplings:
                    raise SpecValidationError("branch couplings only apply to the parallel-chains network")
            case TOPOLOGIES.PARALLEL_CHAINS:
                if not self.branch_couplings:
                    raise SpecValidationError("a parallel-chains network needs at least one branch")
                if n != len(self.branch_couplings) + 2:
                    m = len(self.branch_couplings)
                    raise SpecValidationError(f"{m} branches need {m + 2} spins, got {n}")
                if self.couplings:
                    raise SpecValidationError("use branch_couplings for a parallel-chains network")
                if any(w <= 0 for w in self.branch_couplings):
                    raise SpecValidationError("branch couplings must be positive")
                if self.model != MODELS.XY:
                    raise SpecValidationError("the parallel-chains network is defined for XY coupling only")
        return self

    @classmethod
    def homogeneous(
        cls, n_spins: int, omega: float = 1.0, model: MODELS | str = MODELS.XY, fields: tuple[float, ...] | None = None
    ) -> "ChainSpec":
        return cls(n_spins=n_spins, model=model, couplings=(float(omega),) * (n_spins - 1), fields=fields)

    @classmethod
    def three_spin(cls, omega: float = 1.0, omega23: float | None = None) -> "ChainSpec":
        """The chain 1 - 2 - 3 with couplings omega (bond 1-2) and omega23 (bond 2-3, the lambda of the gate)."""
        return cls(n_spins=3, couplings=(float(omega), float(omega if omega23 is None else omega23)))

    @classmethod
    def parallel_chains(cls, branch_couplings: tuple[float, ...] | list[float]) -> "ChainSpec":
        return cls(
            n_spins=len(branch_couplings) + 2,
            topology=TOPOLOGIES.PARALLEL_CHAINS,
            branch_couplings=tuple(float(w) for w in branch_couplings),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "ChainSpec":
        """Load a chain-spec file (JSON with keys n_spins, model, couplings, fields, topology)."""
        try:
            with Path(path).open() as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as err:
            raise SpecValidationError(f"could not read chain spec {path}: {err}") from err
        if not isinstance(data, dict):
            raise SpecValidationError(f"chain spec {path} must be a JSON object")
        return cls(**data)

    def to_file_dict(self) -> dict:
        data = {
            "n_spins": self.n_spins,
            "model": self.model.name.lower(),
            "fields": list(self.fields),
        }
        if self.topology == TOPOLOGIES.PARALLEL_CHAINS:
            data["topology"] = {"parallel_chains": list(self.branch_couplings)}
        else:
            data["topology"] = "linear"
            data["couplings"] = list(self.couplings)
        return data

    @property
    def bonds(self) -> tuple[tuple[int, int, float], ...]:
        if self.topology == TOPOLOGIES.PARALLEL_CHAINS:
            last = self.n_spins - 1
            return tuple(
                bond
                for x, w in enumerate(self.branch_couplings, start=1)
                for bond in ((0, x, w), (x, last, w))
            )
        return tuple((j, j + 1, w) for j, w in enumerate(self.couplings))

    @property
    def mediator_sites(self) -> tuple[int, ...]:
        # every site between the two ends
        return tuple(range(1, self.n_spins - 1))

    @property
    def collective_coupling(self) -> float:
        """(sum_x omega_x^2)^(1/2) over the branches; the single coupling of a three-spin chain."""
        if self.topology == TOPOLOGIES.PARALLEL_CHAINS:
            return math.sqrt(sum(w * w for w in self.branch_couplings))
        return self.couplings[0]

    def is_mirror_symmetric(self, tol: float = MIRROR_TOL) -> bool:
        if self.topology != TOPOLOGIES.LINEAR:
            return False
        c = np.asarray(self.couplings)
        b = np.asarray(self.fields)
        return bool(np.all(np.abs(c - c[::-1]) <= tol) and np.all(np.abs(b - b[::-1]) <= tol))


class HalfChainBasis(BaseModel):
    """
    Mirror-symmetric single-excitation states of a chain of N spins.

    |j~> = (|j> + |N+1-j>) / sqrt(2) in 1-based site labels. For odd N the last state |n~> is the bare
    middle-spin excitation, with n = (N+1)/2. For even N, n = N/2 and |n~> is the symmetric
    superposition over the two middle spins.
    """

    model_config = ConfigDict(frozen=True)

    n_spins: int = Field(..., ge=2)
    parity: PARITIES

    @field_validator("parity", mode="before")
    def validator_parity(cls, value) -> PARITIES:
        return coerce_enum(PARITIES, value)

    @model_validator(mode="after")
    def check_params(self) -> "HalfChainBasis":
        expected = PARITIES.ODD if self.n_spins % 2 else PARITIES.EVEN
        if self.parity != expected:
            raise SpecValidationError(f"N = {self.n_spins} has {expected.name.lower()} parity, got {self.parity.name.lower()}")
        return self

    @classmethod
    def for_spins(cls, n_spins: int) -> "HalfChainBasis":
        return cls(n_spins=n_spins, parity=PARITIES.ODD if n_spins % 2 else PARITIES.EVEN)

    @property
    def n(self) -> int:
        return (self.n_spins + 1) // 2

    def isometry(self) -> npt.NDArray[np.float64]:
        """N x n matrix whose columns are the |j~> in the single-excitation basis."""
        big_n, n = self.n_spins, self.n
        p = np.zeros((big_n, n))
        for j in range(n):
            mirror = big_n - 1 - j
            if mirror == j:
                p[j, j] = 1.0
            else:
                p[j, j] = p[mirror, j] = 1 / math.sqrt(2)
        return p

    def labels(self) -> list[str]:
        big_n = self.n_spins
        out = []
        for j in range(self.n):
            mirror = big_n - 1 - j
            left = "".join("1" if k == j else "0" for k in range(big_n))
            if mirror == j:
                out.append(f"|{j + 1}~> = |{left}>")
            else:
                right = "".join("1" if k == mirror else "0" for k in range(big_n))
                out.append(f"|{j + 1}~> = (|{left}> + |{right}>)/sqrt(2)")
        return out


def local_terms(spec: ChainSpec) -> list[PauliProduct]:
    """Decompose H into Pauli products: bonds, then fields."""
    pc = PauliConvention
    terms = []
    for i, j, w in spec.bonds:
        if w == 0:
            continue
        match spec.model:
            case MODELS.XY:
                # (w/2)(sx sx + sy sy)
                terms.append(PauliProduct(w / 2, ((i, pc.SIGMA_X), (j, pc.SIGMA_X))))
                terms.append(PauliProduct(w / 2, ((i, pc.SIGMA_Y), (j, pc.SIGMA_Y))))
            case MODELS.HEISENBERG:
                # -(J/2) sigma . sigma
                for sigma in (pc.SIGMA_X, pc.SIGMA_Y, pc.SIGMA_Z):
                    terms.append(PauliProduct(-w / 2, ((i, sigma), (j, sigma))))
    for site, b in enumerate(spec.fields):
        if b != 0:
            terms.append(PauliProduct(-b, ((site, pc.SIGMA_Z),)))
    return terms


def apply_product(term: PauliProduct, state: int, n_spins: int) -> list[tuple[int, complex]]:
    """Act with a Pauli product on a basis state; site 0 is the most significant bit."""
    outputs = [(state, complex(term.coefficient))]
    for site, matrix in term.factors:
        shift = n_spins - 1 - site
        mask = 1 << shift
        stepped = []
        for s, amp in outputs:
            bit = (s >> shift) & 1
            for new_bit in (0, 1):
                entry = matrix[new_bit, bit]
                if entry != 0:
                    stepped.append(((s & ~mask) | (new_bit << shift), amp * entry))
        outputs = stepped
    return outputs


def sector_states(n_spins: int, excitations: int) -> list[int]:
    """Basis states with a fixed number of excitations, ordered by their excited sites."""
    if not 0 <= excitations <= n_spins:
        raise SpecValidationError(f"a chain of {n_spins} spins has no sector with {excitations} excitations")
    return [sum(1 << (n_spins - 1 - site) for site in sites) for sites in combinations(range(n_spins), excitations)]


def _assemble(spec: ChainSpec, states: list[int]) -> HermitianMatrix:
    index = {s: k for k, s in enumerate(states)}
    h = np.zeros((len(states), len(states)), dtype=complex)
    terms = local_terms(spec)
    for col, state in enumerate(states):
        for term in terms:
            for target, amp in apply_product(term, state, spec.n_spins):
                row = index.get(target)
                # targets outside a magnetization sector cancel between terms
                if row is not None:
                    h[row, col] += amp
    return check_hermitian(h)


def check_hermitian(h: npt.ArrayLike, tol: float = HERMITIAN_TOL) -> HermitianMatrix:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {h.shape}")
    deviation = float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0
    if deviation > tol:
        raise NotHermitianError(f"matrix is not Hermitian: max |H - H^dagger| = {deviation:.3e}")
    return h


def build_full_hamiltonian(spec: ChainSpec, max_spins: int | None = None) -> HermitianMatrix:
    """
    Hamiltonian on the full 2^N space, spin 1 (site 0) as the most significant bit.

    Args:
    - spec (ChainSpec): Chain or network.
    - max_spins (int | None): Size guard, defaults to the configured maximum.

    Returns:
    - np.ndarray: 2^N x 2^N Hermitian matrix.
    """
    limit = get_config().max_full_spins if max_spins is None else max_spins
    if spec.n_spins > limit:
        raise DimensionError(f"full space of {spec.n_spins} spins exceeds the configured maximum of {limit}")
    logger.debug(f"building full Hamiltonian, N = {spec.n_spins}, dimension {2**spec.n_spins}")
    return _assemble(spec, list(range(2**spec.n_spins)))


def build_sector_hamiltonian(spec: ChainSpec, excitations: int) -> HermitianMatrix:
    """Block of H on the states with a fixed number of excitations (see sector_states for the order)."""
    states = sector_states(spec.n_spins, excitations)
    logger.debug(f"building {excitations}-excitation block, N = {spec.n_spins}, dimension {len(states)}")
    return _assemble(spec, states)


def build_excitation_hamiltonian(spec: ChainSpec) -> HermitianMatrix:
    """N x N block of H on {|j>: excitation at site j}."""
    if spec.topology != TOPOLOGIES.LINEAR:
        raise SpecValidationError("the single-excitation chain Hamiltonian needs a linear chain")
    return build_sector_hamiltonian(spec, 1)


def build_half_chain_hamiltonian(spec: ChainSpec, parity: PARITIES | str | None = None) -> HermitianMatrix:
    """
    H restricted to the mirror-symmetric basis, P^dagger H P with P = HalfChainBasis.isometry().

    For odd N this puts sqrt(2) omega_{n-1,n} on the last off-diagonal entry; for even N the middle
    bond appears as omega_{n,n+1} on the last diagonal entry. Fields add their mirror-averaged value
    to the diagonal.
    """
    basis = HalfChainBasis.for_spins(spec.n_spins) if parity is None else HalfChainBasis(n_spins=spec.n_spins, parity=parity)
    if spec.topology != TOPOLOGIES.LINEAR:
        raise SpecValidationError("the half-chain basis needs a linear chain")
    if not spec.is_mirror_symmetric():
        raise SpecValidationError("couplings and fields must be mirror symmetric for the half-chain basis to be invariant")
    p = basis.isometry()
    return check_hermitian(p.T @ build_excitation_hamiltonian(spec) @ p)


def display_permutation() -> list[int]:
    return [int(label, 2) for label in DISPLAY_ORDER_3SPIN]


def to_display_order(matrix: npt.ArrayLike) -> npt.NDArray:
    """Reorder an 8x8 three-spin matrix into the display order (mediator sectors grouped)."""
    m = np.asarray(matrix)
    if m.shape != (8, 8):
        raise DimensionError(f"expected an 8x8 three-spin matrix, got {m.shape}")
    perm = display_permutation()
    return m[np.ix_(perm, perm)]
