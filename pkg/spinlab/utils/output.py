import json
import sys
from collections.abc import Iterator, Mapping
from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import Any, TextIO

import pandas as pd
from pydantic import BaseModel
from rich.console import Console
from rich.table import Table

CSV_FLOAT_FORMAT = "%.12g"
TABLE_STYLE = "bold magenta"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"
    PRETTY = "pretty"


@contextmanager
def open_output(path: Path | None) -> Iterator[TextIO]:
    """stdout, or a UTF-8 file with unix newlines when a path is given."""
    if path is None:
        yield sys.stdout
        return
    with Path(path).open("w", encoding="utf-8", newline="\n") as handle:
        yield handle


def to_jsonable(record: Any) -> Any:
    if isinstance(record, BaseModel):
        return record.model_dump(mode="json")
    if isinstance(record, Mapping):
        return {str(k): to_jsonable(v) for k, v in record.items()}
    if isinstance(record, list | tuple):
        return [to_jsonable(v) for v in record]
    return record


def dump_json(record: Any) -> str:
    return json.dumps(to_jsonable(record), sort_keys=True, indent=2) + "\n"


def dump_csv(frame: pd.DataFrame) -> str:
    # "%.12g" ignores the locale, so the decimal point is always "."
    return frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def frame_table(frame: pd.DataFrame, title: str | None = None) -> Table:
    table = Table(show_header=True, header_style=TABLE_STYLE, title=title)
    for column in frame.columns:
        table.add_column(str(column))
    for row in frame.itertuples(index=False):
        table.add_row(*map(_cell, row))
    return table


def record_table(record: Any, title: str | None = None) -> Table:
    """Two-column field/value table of a flat record; nested values are shown as compact JSON."""
    data = to_jsonable(record)
    table = Table(show_header=True, header_style=TABLE_STYLE, title=title)
    table.add_column("field")
    table.add_column("value")
    for key, value in data.items():
        text = json.dumps(value, sort_keys=True) if isinstance(value, dict | list) else _cell(value)
        table.add_row(key, text)
    return table


def print_tables(tables: list[Table], handle: TextIO) -> None:
    console = Console(file=handle, width=160, color_system=None if handle is not sys.stdout else "auto")
    for table in tables:
        console.print(table)


def emit_frame(frame: pd.DataFrame, fmt: OutputFormat, output: Path | None = None, title: str | None = None) -> None:
    with open_output(output) as handle:
        match fmt:
            case OutputFormat.CSV:
                handle.write(dump_csv(frame))
            case OutputFormat.JSON:
                handle.write(dump_json(frame.to_dict(orient="records")))
            case OutputFormat.PRETTY:
                print_tables([frame_table(frame, title)], handle)


def emit_record(record: Any, fmt: OutputFormat, output: Path | None = None, extra: list[Table] | None = None) -> None:
    """JSON or pretty output of a result record; CSV is reserved for curves and tables."""
    if fmt == OutputFormat.CSV:
        raise ValueError("csv output is only available for curves and tables")
    with open_output(output) as handle:
        if fmt == OutputFormat.JSON:
            handle.write(dump_json(record))
        else:
            print_tables([*(extra or []), record_table(record)], handle)
