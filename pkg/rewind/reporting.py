import json
import sys
from typing import Iterable, Mapping, TextIO

from colorama import Fore, Style, init

from .availability import format_duration


def to_json_line(record: Mapping) -> str:
    """One report as a single JSON line; key order is kept."""
    return json.dumps(record, sort_keys=False, default=str)


def _format_value(name: str, value) -> str:
    if isinstance(value, bool):
        colour = Fore.GREEN if value else Fore.RED
        return f"{colour}{value}{Fore.RESET}"
    if isinstance(value, float):
        if name.endswith("_ns"):
            return format_duration(value / 1e9)
        if name.endswith("_s") or name.endswith("_seconds"):
            return format_duration(value)
        return f"{value:.10g}"
    return str(value)


def format_table(record: Mapping) -> str:
    """Two-column table of one report for terminals."""
    width = max((len(name) for name in record), default=0)
    lines = [f"{Style.BRIGHT}{record.get('report', 'report')}{Style.RESET_ALL}"]
    for name, value in record.items():
        if name == "report":
            continue
        lines.append(f"  {Fore.CYAN}{name.ljust(width)}{Fore.RESET}  {_format_value(name, value)}")
    return "\n".join(lines)


def emit(records: Iterable[Mapping], pretty: bool = False, stream: TextIO = None) -> None:
    """
    Writes reports to standard output, as JSON lines or as coloured tables with `pretty`.

    Parameters
    ----------
    records: iterable of dict
    pretty: bool
    stream: file, optional
        Defaults to ``sys.stdout``.
    """
    stream = stream or sys.stdout
    if pretty:
        init()
    for record in records:
        stream.write((format_table(record) if pretty else to_json_line(record)) + "\n")
    stream.flush()
