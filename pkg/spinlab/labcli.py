import sys
from pathlib import Path

import click
import numpy as np
import pandas as pd
import typer
from loguru import logger
from pydantic import ValidationError
from rich.table import Table

from spinlab import asymptotics, design, optimize, protocols
from spinlab.chains import ChainSpec, to_display_order
from spinlab.constants import COMPARE_WINDOW, DEFAULT_REFINE_TOL, DISPLAY_ORDER_3SPIN, TUNE_WINDOW
from spinlab.errors import NumericalFailure
from spinlab.gates import chain_gate
from spinlab.utils.config import configure_logging, get_config
from spinlab.utils.misc import complex_pairs, resolve_time
from spinlab.utils.output import TABLE_STYLE, OutputFormat, emit_frame, emit_record

cli = typer.Typer(name="spinlab", help="Exact dynamics of short spin chains: gates, protocols, designs and fidelity scans.")

FORMAT_OPTION = typer.Option(OutputFormat.PRETTY, "--format", help="csv, json or pretty")
OUTPUT_OPTION = typer.Option(None, "--output", help="write to this path instead of stdout")
SPEC_OPTION = typer.Option(None, "--spec", help="chain-spec JSON file")
N_OPTION = typer.Option(3, "--n", help="number of spins")
OMEGA_OPTION = typer.Option(1.0, "--omega", help="coupling omega")
LAMBDA_OPTION = typer.Option(None, "--lambda", help="coupling of bond 2-3 of a three-spin chain")
MODEL_OPTION = typer.Option("xy", "--model", help="xy or heisenberg")
B_FIELD_OPTION = typer.Option(None, "--b-field", help="field on the middle pair, or one value per spin")


@cli.callback()
def main_callback(log_level: str | None = typer.Option(None, "--log-level", help="loguru level, e.g. INFO")) -> None:
    configure_logging(log_level.upper() if log_level else get_config().log_level)


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise typer.BadParameter(f"expected comma-separated numbers, got {text!r}")  # noqa: B904


def _middle_fields(n: int, b_field: str | None) -> tuple[float, ...] | None:
    if b_field is None:
        return None
    values = _floats(b_field)
    if len(values) == n:
        return tuple(values)
    if len(values) == 1 and n % 2 == 0:
        fields = [0.0] * n
        fields[n // 2 - 1] = fields[n // 2] = values[0]
        return tuple(fields)
    raise typer.BadParameter(f"--b-field takes one value for an even chain or {n} values")


def load_spec(
    spec_path: Path | None, n: int, omega: float, lam: float | None, model: str, b_field: str | None
) -> ChainSpec:
    """Chain from --spec, or a homogeneous chain from --n/--omega with --lambda on bond 2-3 of three spins."""
    if spec_path is not None:
        spec = ChainSpec.from_file(spec_path)
        if b_field is None:
            return spec
        data = spec.to_file_dict()
        data["fields"] = list(_middle_fields(spec.n_spins, b_field))
        return ChainSpec(**data)
    couplings = [omega] * (n - 1)
    if lam is not None:
        if n != 3:
            raise typer.BadParameter("--lambda sets bond 2-3 of a three-spin chain")
        couplings[1] = lam
    return ChainSpec(n_spins=n, model=model, couplings=tuple(couplings), fields=_middle_fields(n, b_field))


def _time(value: str, omega: float) -> float:
    try:
        return resolve_time(value, omega)
    except ValueError as err:
        raise typer.BadParameter(str(err))  # noqa: B904


def _record_format(fmt: OutputFormat) -> OutputFormat:
    if fmt == OutputFormat.CSV:
        raise typer.BadParameter("csv output is only available for scan, tune-field and compare", param_hint="--format")
    return fmt


def _entry(z: complex) -> str:
    re, im = round(z.real, 10) + 0.0, round(z.imag, 10) + 0.0
    if im == 0:
        return f"{re:g}"
    if re == 0:
        return f"{im:g}i"
    return f"{re:g}{im:+g}i"


def _matrix_table(matrix: np.ndarray, labels: list[str], title: str) -> Table:
    table = Table(show_header=True, header_style=TABLE_STYLE, title=title)
    table.add_column("")
    for label in labels:
        table.add_column(label)
    for label, row in zip(labels, matrix, strict=True):
        table.add_row(label, *map(_entry, row))
    return table


@cli.command()
def gate(
    spec_path: Path | None = SPEC_OPTION,
    n: int = N_OPTION,
    omega: float = OMEGA_OPTION,
    lam: float | None = LAMBDA_OPTION,
    model: str = MODEL_OPTION,
    b_field: str | None = B_FIELD_OPTION,
    t: str = typer.Option("tau", "--t", help="time: number, tau or tau/2"),
    mediator_state: str | None = typer.Option(None, "--mediator-state", help="bit string of the mediators, all 0 by default"),
    allow_leakage: bool = typer.Option(False, "--allow-leakage", help="report a leaking sector instead of failing"),
    fmt: OutputFormat = FORMAT_OPTION,
    output: Path | None = OUTPUT_OPTION,
) -> None:
    """
    Full unitary at time t and the effective gate on the end spins.
    """
    fmt = _record_format(fmt)
    spec = load_spec(spec_path, n, omega, lam, model, b_field)
    time = _time(t, spec.collective_coupling)
    sector = mediator_state or "0" * len(spec.mediator_sites)
    u, report = chain_gate(spec, time, sector, strict=not allow_leakage)

    if spec.n_spins == 3:
        matrix, labels = to_display_order(u), list(DISPLAY_ORDER_3SPIN)
    else:
        matrix, labels = u, [format(i, f"0{spec.n_spins}b") for i in range(2**spec.n_spins)]
    data_labels = ["00", "01", "10", "11"] if report.effective_gate.shape == (4, 4) else None
    extra = [_matrix_table(matrix, labels, f"U(t = {time:.10g})")]
    if data_labels:
        extra.append(_matrix_table(report.effective_gate, data_labels, f"effective gate, mediators |{sector}>"))
    emit_record({"basis_order": labels, "unitary": complex_pairs(matrix), "report": report}, fmt, output, extra=extra)


@cli.command()
def transfer(
    spec_path: Path | None = SPEC_OPTION,
    omega: float = OMEGA_OPTION,
    mode: str = typer.Option("med0_tgt0_with_zcorrection", "--mode", help="preparation of spins 2 and 3"),
    theta: float = typer.Option(np.pi / 2, "--theta", help="Bloch polar angle of the input"),
    phi: float = typer.Option(0.0, "--phi", help="Bloch azimuth of the input"),
    fmt: OutputFormat = FORMAT_OPTION,
    output: Path | None = OUTPUT_OPTION,
) -> None:
    """
    Transfer a qubit from spin 1 to spin 3 in one gate time.
    """
    fmt = _record_format(fmt)
    spec = load_spec(spec_path, 3, omega, None, "xy", None)
    result = protocols.run_state_transfer(spec, protocols.QubitState.from_bloch(theta, phi), mode)
    emit_record(result, fmt, output)


@cli.command()
def exchange(
    spec_path: Path | None = SPEC_OPTION,
    omega: float = OMEGA_OPTION,
    bit_a: int = typer.Option(..., "--a", help="bit written by Alice on spin 1"),
    bit_b: int = typer.Option(..., "--b", help="bit written by Bob on spin 3"),
    mediator_bit: int = typer.Option(0, "--mediator-bit"),
    shots: int = typer.Option(0, "--shots", help="also sample this many readouts"),
    seed: int | None = typer.Option(None, "--seed"),
    fmt: OutputFormat = FORMAT_OPTION,
    output: Path | None = OUTPUT_OPTION,
) -> None:
    """
    Swap one classical bit each way through the mediator.
    """
    fmt = _record_format(fmt)
    spec = load_spec(spec_path, 3, omega, None, "xy", None)
    alice_reads, bob_reads = protocols.run_classical_exchange(spec, bit_a, bit_b, mediator_bit)
    record = {"sent": [bit_a, bit_b], "alice_reads": alice_reads, "bob_reads": bob_reads}
    if shots:
        counts = protocols.sample_exchange(spec, bit_a, bit_b, shots, seed, mediator_bit)
        record["samples"] = {f"{a}{b}": counts[(a, b)] for a, b in sorted(counts)}
    emit_record(record, fmt, output)


@cli.command()
def ebit(
    spec_path: Path | None = SPEC_OPTION,
    omega: float = OMEGA_OPTION,
    mode: str = typer.Option("plus_plus_full_tau", "--mode", help="plus_plus_full_tau, half_tau, repeated, two_ebit_sharing"),
    rounds: int = typer.Option(2, "--rounds", help="rounds of the repeated protocol"),
    fmt: OutputFormat = FORMAT_OPTION,
    output: Path | None = OUTPUT_OPTION,
) -> None:
    """
    Entangle the end spins, leaving the mediator in a product state.
    """
    spec = load_spec(spec_path, 3, omega, None, "xy", None)
    result = protocols.run_ebit_generation(spec, mode, rounds)
    if isinstance(result, list):
        frame = pd.DataFrame(
            [
                {"round": k, "t": r.elapsed_time, "fidelity": r.figure_of_merit, "mediator_purity": r.mediator_purity}
                for k, r in enumerate(result, start=1)
            ]
        )
        emit_frame(frame, fmt, output, title="repeated ebits")
    else:
        emit_record(result, _record_format(fmt), output)


@cli.command()
def wstate(
    spec_path: Path | None = SPEC_OPTION,
    omega: float = OMEGA_OPTION,
    fmt: OutputFormat = FORMAT_OPTION,
    output: Path | None = OUTPUT_OPTION,
) -> None:
    """
    Prepare (|101> + |011> + |110>)/sqrt(3) from |101>.
    """
    fmt = _record_format(fmt)
    spec = load_spec(spec_path, 3, omega, None, "xy", None)
    emit_record(protocols.run_w_state(spec), fmt, output)


@cli.command()
def network(
    branches: str = typer.Option(..., "--branches", help="comma-separated branch couplings"),
    strict: bool = typer.Option(False, "--strict", help="fail when the mediator sector leaks"),
    fmt: OutputFormat = FORMAT_OPTION,
    output: Path | None = OUTPUT_OPTION,
) -> None:
    """
    Effective gate of end spins joined by parallel mediators.
    """
    fmt = _record_format(fmt)
    net = protocols.NetworkSpec(branch_couplings=tuple(_floats(branches)))
    report = protocols.run_network_gate(net, strict=strict)
    extra = [_matrix_table(report.effective_gate, ["00", "01", "10", "11"], f"effective gate, {net.n_branches} branches")]
    emit_record({"collective_coupling": net.collective_coupling, "report": report}, fmt, output, extra=extra)


@cli.command(name="design")
def design_command(
    n: int = typer.Option(..., "--n", help="chain length"),
    lam: float = typer.Option(1.0, "--lambda", help="design rate, the state arrives at pi / lambda"),
    verify: bool = typer.Option(False, "--verify", help="propagate the design and report the amplitude"),
    fmt: OutputFormat = FORMAT_OPTION,
    output: Path | None = OUTPUT_OPTION,
) -> None:
    """
    Couplings that entangle the end spins at pi / lambda.
    """
    fmt = _record_format(fmt)
    coupling_design = design.design_half_time_entanglement(n, lam)
    record = {"design": coupling_design, "spec": coupling_design.to_file_dict()}
    if verify:
        record["verification"] = design.verify_design(coupling_design)
    emit_record(record, fmt, output)


def _curve_frame(curve: optimize.FidelityCurve) -> pd.DataFrame:
    return pd.DataFrame({"t": curve.times, "f": curve.f, "F": curve.F})


@cli.command(name="scan")
def scan_command(
    spec_path: Path | None = SPEC_OPTION,
    n: int = N_OPTION,
    omega: float = OMEGA_OPTION,
    model: str = MODEL_OPTION,
    b_field: str | None = B_FIELD_OPTION,
    t_min: float = typer.Option(0.0, "--t-min"),
    t_max: float = typer.Option(100.0, "--t-max"),
    samples: int | None = typer.Option(None, "--samples", help="grid size, 0.01/omega spacing up to 100/omega by default"),
    refine_tol: float = typer.Option(DEFAULT_REFINE_TOL, "--refine-tol"),
    fmt: OutputFormat = FORMAT_OPTION,
    output: Path | None = OUTPUT_OPTION,
) -> None:
    """
    Sample f(t) and F(t); csv writes the curve, json and pretty report the refined peak.
    """
    spec = load_spec(spec_path, n, omega, None, model, b_field)
    curve = optimize.scan(spec, t_min, t_max, samples)
    if fmt == OutputFormat.CSV:
        emit_frame(_curve_frame(curve), fmt, output)
        return
    peak = optimize.find_peak(curve, refine_tol)
    if fmt == OutputFormat.JSON:
        emit_record({"curve": curve, "peak": peak}, fmt, output)
    else:
        frame = pd.DataFrame([m.model_dump() for m in peak.maxima])
        emit_frame(frame, fmt, output, title=f"peak F = {peak.F_star:.6f} at t = {peak.t_star:.6f}")


@cli.command(name="tune-field")
def tune_field(
    spec_path: Path | None = SPEC_OPTION,
    n: int = typer.Option(4, "--n", help="number of spins, even"),
    omega: float = OMEGA_OPTION,
    b_grid: str = typer.Option("0,0.55,0.575,0.6,0.625,0.65,0.675,0.7", "--b-grid", help="comma-separated fields"),
    t_min: float = typer.Option(0.0, "--t-min"),
    t_max: float = typer.Option(TUNE_WINDOW, "--t-max"),
    samples: int | None = typer.Option(None, "--samples"),
    refine_tol: float = typer.Option(DEFAULT_REFINE_TOL, "--refine-tol"),
    objective: str = typer.Option("max_fidelity", "--objective", help="max_fidelity or fidelity_per_time"),
    fmt: OutputFormat = FORMAT_OPTION,
    output: Path | None = OUTPUT_OPTION,
) -> None:
    """
    Sweep a field on the two middle spins and report the peak for each value.
    """
    spec = load_spec(spec_path, n, omega, None, "xy", None)
    grid = _floats(b_grid)
    rows = optimize.sweep_middle_field(spec, grid, (t_min, t_max), samples, refine_tol)
    b_best, _ = optimize.best_field(rows, objective)
    frame = pd.DataFrame(
        [{"B": b, "t_star": p.t_star, "f_star": p.f_star, "F_star": p.F_star, "best": b == b_best} for b, p in rows]
    )
    emit_frame(frame, fmt, output, title=f"best B = {b_best:g}")


@cli.command()
def compare(
    n_min: int = typer.Option(2, "--n-min"),
    n_max: int = typer.Option(20, "--n-max"),
    omega: float = OMEGA_OPTION,
    t_max: float = typer.Option(COMPARE_WINDOW, "--t-max"),
    samples: int | None = typer.Option(None, "--samples"),
    refine_tol: float = typer.Option(DEFAULT_REFINE_TOL, "--refine-tol"),
    fmt: OutputFormat = FORMAT_OPTION,
    output: Path | None = OUTPUT_OPTION,
) -> None:
    """
    Maximized transfer amplitude of XY and Heisenberg chains for each length.
    """
    rows = optimize.compare_models(range(n_min, n_max + 1), (0.0, t_max), samples, refine_tol, omega)
    emit_frame(pd.DataFrame([r.model_dump() for r in rows]), fmt, output, title="XY vs Heisenberg")


@cli.command(name="asymptotics")
def asymptotics_command(
    n: int = typer.Option(..., "--n", help="chain length, at least 20"),
    omega: float = OMEGA_OPTION,
    ratio: bool = typer.Option(False, "--ratio", help="also compare with the Heisenberg chain at t0"),
    fmt: OutputFormat = FORMAT_OPTION,
    output: Path | None = OUTPUT_OPTION,
) -> None:
    """
    Peak-time and peak-height estimates for a long homogeneous XY chain.
    """
    fmt = _record_format(fmt)
    record = asymptotics.airy_peak(n, omega).model_dump()
    if ratio:
        record["xy_vs_heisenberg_ratio"] = asymptotics.xy_vs_heisenberg_ratio(n, omega)
    emit_record(record, fmt, output)


def run(argv: list[str] | None = None) -> int:
    """Run the cli and map failures to exit codes: 2 for invalid input, 1 for numerical failures."""
    try:
        result = cli(args=argv, prog_name="spinlab", standalone_mode=False)
    except click.ClickException as err:
        err.show()
        return 2
    except click.Abort:
        click.echo("Aborted!", err=True)
        return 1
    except NumericalFailure as err:
        logger.error(f"numerical failure: {err}")
        click.echo(f"Error: {err}", err=True)
        return 1
    except (ValidationError, ValueError) as err:
        click.echo(f"Error: {err}", err=True)
        return 2
    return result if isinstance(result, int) else 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
