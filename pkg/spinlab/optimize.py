import math
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from enum import IntEnum
from typing import Any

import numpy as np
import numpy.typing as npt
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

from spinlab.chains import MODELS, TOPOLOGIES, ChainSpec, coerce_enum
from spinlab.constants import (
    COARSE_GRID_SPACING,
    COMPARE_WINDOW,
    DEFAULT_REFINE_TOL,
    FINE_GRID_MAX_WINDOW,
    FINE_GRID_SPACING,
    PEAK_REPORT_THRESHOLD,
    PEAK_TIE_TOL,
    TUNE_WINDOW,
)
from spinlab.errors import SpecValidationError
from spinlab.evolve import FidelitySample, average_fidelity, transfer_amplitudes
from spinlab.utils.config import get_config
from spinlab.utils.misc import golden_section_max


class OBJECTIVES(IntEnum):
    MAX_FIDELITY = 1
    FIDELITY_PER_TIME = 2


def _readonly(value: Any) -> np.ndarray:
    arr = np.array(value, dtype=float)
    arr.flags.writeable = False
    return arr


class FidelityCurve(BaseModel):
    """f(t) and F(t) of one chain sampled on a uniform grid."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    spec: ChainSpec
    times: np.ndarray = Field(..., description="uniform grid, strictly increasing")
    f: np.ndarray = Field(..., description="transfer amplitude magnitudes")
    F: np.ndarray = Field(..., description="input-averaged fidelities")
    t_min: float
    t_max: float

    @field_validator("times", "f", "F", mode="before")
    def validator_arrays(cls, value) -> np.ndarray:
        return _readonly(value)

    @model_validator(mode="after")
    def check_params(self) -> "FidelityCurve":
        if not (self.times.shape == self.f.shape == self.F.shape) or self.times.ndim != 1:
            raise SpecValidationError("times, f and F must be one-dimensional and of equal length")
        if self.times.size >= 2 and np.any(np.diff(self.times) <= 0):
            raise SpecValidationError("sample times must be strictly increasing")
        if np.any(self.f < 0) or np.any(self.f > 1) or np.any(self.F < 0.5) or np.any(self.F > 1):
            raise SpecValidationError("f must lie in [0, 1] and F in [1/2, 1]")
        return self

    @property
    def samples(self) -> int:
        return int(self.times.size)

    @field_serializer("times", "f", "F")
    def serialize_arrays(self, value: np.ndarray) -> list[float]:
        return value.tolist()


class PeakResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    t_star: float
    f_star: float = Field(..., ge=0.0, le=1.0)
    F_star: float = Field(..., ge=0.5, le=1.0)
    # refined maxima with F above the report threshold, plus the global one
    maxima: tuple[FidelitySample, ...]
    refine_tol: float = Field(..., gt=0.0)
    t_min: float
    t_max: float

    @model_validator(mode="after")
    def check_params(self) -> "PeakResult":
        if not self.t_min <= self.t_star <= self.t_max:
            raise SpecValidationError(f"peak time {self.t_star} outside the scan window")
        return self


class ModelComparison(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_spins: int
    f_max_xy: float
    f_max_heisenberg: float
    t_xy: float
    t_heisenberg: float


def _time_scale(spec: ChainSpec) -> float:
    """Largest coupling, the rate on which f(t) oscillates."""
    strengths = [abs(w) for w in spec.couplings + spec.branch_couplings]
    scale = max(strengths, default=0.0)
    return scale if scale > 0 else 1.0


def default_samples(t_min: float, t_max: float, omega: float = 1.0) -> int:
    """Grid size for spacing 0.01/omega on windows up to 100/omega and 0.05/omega beyond."""
    window = (t_max - t_min) * omega
    spacing = FINE_GRID_SPACING if window <= FINE_GRID_MAX_WINDOW else COARSE_GRID_SPACING
    return max(3, math.ceil(window / spacing) + 1)


def _check_window(t_min: float, t_max: float) -> None:
    if not (math.isfinite(t_min) and math.isfinite(t_max)) or t_min < 0:
        raise SpecValidationError(f"Invalid scan window ({t_min}, {t_max})")
    if t_min >= t_max:
        raise SpecValidationError(f"scan window must satisfy t_min < t_max, got ({t_min}, {t_max})")


def scan(spec: ChainSpec, t_min: float = 0.0, t_max: float = 100.0, samples: int | None = None) -> FidelityCurve:
    """
    Sample f(t) and F(t) on a uniform grid from one eigen-decomposition of the single-excitation block.

    Parameters:
    - spec (ChainSpec): Linear chain.
    - t_min (float): Window start.
    - t_max (float): Window end.
    - samples (int, optional): Grid size; by default chosen from the window and the largest coupling.

    Returns:
    - FidelityCurve: The sampled curve.
    """
    _check_window(t_min, t_max)
    if samples is None:
        samples = default_samples(t_min, t_max, _time_scale(spec))
    if samples < 2:
        raise SpecValidationError(f"need at least two samples, got {samples}")
    times = np.linspace(t_min, t_max, samples)
    f = transfer_amplitudes(spec, times)
    return FidelityCurve(spec=spec, times=times, f=f, F=average_fidelity(f), t_min=t_min, t_max=t_max)


def find_peak(curve: FidelityCurve, refine_tol: float = DEFAULT_REFINE_TOL) -> PeakResult:
    """
    Refine every interior grid maximum of f by golden-section search and pick the global one.

    Window endpoints count as unrefined candidates. A refined value never falls below its grid
    sample, and candidates within PEAK_TIE_TOL of the best resolve to the earliest time.
    """
    if curve.samples < 3:
        raise SpecValidationError(f"peak search needs at least three samples, got {curve.samples}")
    if not refine_tol > 0:
        raise SpecValidationError(f"refine_tol must be positive, got {refine_tol}")
    t, f = curve.times, curve.f
    spec = curve.spec

    def objective(x: npt.NDArray) -> npt.NDArray:
        return transfer_amplitudes(spec, x)

    interior = np.flatnonzero((f[1:-1] > f[:-2]) & (f[1:-1] >= f[2:])) + 1
    cand_t = [float(t[0]), float(t[-1])]
    cand_f = [float(f[0]), float(f[-1])]
    if interior.size:
        ts, vs = golden_section_max(objective, t[interior - 1], t[interior + 1], refine_tol)
        better = vs > f[interior]
        cand_t.extend(np.where(better, ts, t[interior]).tolist())
        cand_f.extend(np.where(better, vs, f[interior]).tolist())

    order = np.argsort(cand_t, kind="stable")
    cand_t = np.asarray(cand_t)[order]
    cand_f = np.minimum(np.asarray(cand_f)[order], 1.0)
    best = float(np.max(cand_f))
    k = int(np.flatnonzero(cand_f >= best - PEAK_TIE_TOL)[0])

    fidelities = average_fidelity(cand_f)
    report = [i for i in range(cand_t.size) if fidelities[i] >= PEAK_REPORT_THRESHOLD or i == k]
    maxima = tuple(FidelitySample.at(cand_t[i], cand_f[i]) for i in report)
    logger.debug(f"{interior.size} grid maxima refined, peak f = {cand_f[k]:.10f} at t = {cand_t[k]:.6f}")
    return PeakResult(
        t_star=float(cand_t[k]),
        f_star=float(cand_f[k]),
        F_star=float(fidelities[k]),
        maxima=maxima,
        refine_tol=refine_tol,
        t_min=curve.t_min,
        t_max=curve.t_max,
    )


def with_middle_field(spec: ChainSpec, b_field: float) -> ChainSpec:
    """Copy of an even linear chain with field B on the two middle spins and zero elsewhere."""
    n = spec.n_spins
    if spec.topology != TOPOLOGIES.LINEAR or n % 2:
        raise SpecValidationError(f"middle-field tuning needs an even linear chain, got N = {n}")
    fields = [0.0] * n
    fields[n // 2 - 1] = fields[n // 2] = float(b_field)
    return ChainSpec(n_spins=n, model=spec.model, couplings=spec.couplings, fields=tuple(fields))


def _pool_map(func, items: Sequence, workers: int | None) -> list:
    workers = get_config().workers if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map keeps input order
        return list(pool.map(func, items))


def sweep_middle_field(
    spec: ChainSpec,
    b_grid: Iterable[float],
    window: tuple[float, float] = (0.0, TUNE_WINDOW),
    samples: int | None = None,
    refine_tol: float = DEFAULT_REFINE_TOL,
    workers: int | None = None,
) -> list[tuple[float, PeakResult]]:
    grid = [float(b) for b in b_grid]
    if not grid:
        raise SpecValidationError("field grid is empty")
    specs = [with_middle_field(spec, b) for b in grid]
    t_min, t_max = window

    def run_one(chain: ChainSpec) -> PeakResult:
        return find_peak(scan(chain, t_min, t_max, samples), refine_tol)

    return list(zip(grid, _pool_map(run_one, specs, workers)))


def _score(peak: PeakResult, objective: OBJECTIVES) -> float:
    match objective:
        case OBJECTIVES.MAX_FIDELITY:
            return peak.F_star
        case OBJECTIVES.FIDELITY_PER_TIME:
            return peak.F_star / peak.t_star if peak.t_star > 0 else -math.inf
    raise ValueError(f"Invalid objective: {objective}")


def best_field(
    results: list[tuple[float, PeakResult]], objective: OBJECTIVES | str = OBJECTIVES.MAX_FIDELITY
) -> tuple[float, PeakResult]:
    """Entry of a field sweep that maximizes the objective; the earliest entry wins ties."""
    objective = coerce_enum(OBJECTIVES, objective)
    if not results:
        raise SpecValidationError("field sweep is empty")
    for b, peak in results:
        logger.debug(f"B = {b:.4f}: F = {peak.F_star:.6f} at t = {peak.t_star:.4f}")
    b_best, peak = max(results, key=lambda item: _score(item[1], objective))
    logger.info(f"best middle field B = {b_best} ({objective.name.lower()}), F = {peak.F_star:.6f}")
    return b_best, peak


def tune_middle_field(
    spec: ChainSpec,
    b_grid: Iterable[float],
    window: tuple[float, float] = (0.0, TUNE_WINDOW),
    objective: OBJECTIVES | str = OBJECTIVES.MAX_FIDELITY,
    samples: int | None = None,
    refine_tol: float = DEFAULT_REFINE_TOL,
    workers: int | None = None,
) -> tuple[float, PeakResult]:
    """Middle-pair field from b_grid that maximizes the objective over the window."""
    return best_field(sweep_middle_field(spec, b_grid, window, samples, refine_tol, workers), objective)


def compare_models(
    n_range: Iterable[int],
    window: tuple[float, float] = (0.0, COMPARE_WINDOW),
    samples: int | None = None,
    refine_tol: float = DEFAULT_REFINE_TOL,
    omega: float = 1.0,
    workers: int | None = None,
) -> list[ModelComparison]:
    """Maximized transfer amplitude of homogeneous XY and Heisenberg chains, one row per N."""
    sizes = sorted({int(n) for n in n_range})
    if not sizes or sizes[0] < 2:
        raise SpecValidationError("chain lengths must be at least 2")
    t_min, t_max = window
    _check_window(t_min, t_max)

    def run_one(n: int) -> ModelComparison:
        peaks = [
            find_peak(scan(ChainSpec.homogeneous(n, omega, model=model), t_min, t_max, samples), refine_tol)
            for model in (MODELS.XY, MODELS.HEISENBERG)
        ]
        return ModelComparison(
            n_spins=n,
            f_max_xy=peaks[0].f_star,
            f_max_heisenberg=peaks[1].f_star,
            t_xy=peaks[0].t_star,
            t_heisenberg=peaks[1].t_star,
        )

    rows = _pool_map(run_one, sizes, workers)
    logger.info(f"compared XY and Heisenberg chains for N = {sizes[0]} .. {sizes[-1]}")
    return rows
