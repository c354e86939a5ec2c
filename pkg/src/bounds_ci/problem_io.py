"""Reading and writing problem files and run configuration.

Problem files are headered CSV (UTF-8, dot decimals, ``#`` comment lines)
with one bound-pair inference instance per row. Run configuration files
use a flat ``key=value`` format with the same comment convention.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

from .intervals import InferenceProblem

__all__ = [
    "PROBLEM_COLUMNS",
    "RowError",
    "parse_problem_file",
    "read_problem_file",
    "write_problem_file",
    "read_key_value_config",
]

PROBLEM_COLUMNS = [
    "label", "theta_L", "theta_U", "se_L", "se_U", "rho", "alpha", "rho_known_zero",
]


@dataclass(frozen=True)
class RowError:
    """A row that failed to parse, with its 1-based line number."""

    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


def _iter_data_lines(text: str):
    """Yield (line_number, line) pairs, skipping blanks and # comments."""
    for i, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield i, line


def parse_problem_file(text: str) -> tuple[list[InferenceProblem], list[RowError]]:
    """Parse problem CSV text into problems plus per-row errors.

    The header row is required and must contain exactly the documented
    columns. Rows that fail validation are reported individually so a long
    file is not rejected wholesale.
    """
    lines = list(_iter_data_lines(text))
    if not lines:
        return [], [RowError(line=0, message="empty problem file")]
    header_line_no, header_line = lines[0]
    header = next(csv.reader(io.StringIO(header_line)))
    if [h.strip() for h in header] != PROBLEM_COLUMNS:
        return [], [RowError(
            line=header_line_no,
            message=f"expected header {','.join(PROBLEM_COLUMNS)!r}",
        )]

    problems: list[InferenceProblem] = []
    errors: list[RowError] = []
    for line_no, line in lines[1:]:
        fields = next(csv.reader(io.StringIO(line)))
        if len(fields) != len(PROBLEM_COLUMNS):
            errors.append(RowError(line=line_no,
                                   message=f"expected {len(PROBLEM_COLUMNS)} fields, got {len(fields)}"))
            continue
        row = dict(zip(PROBLEM_COLUMNS, (f.strip() for f in fields)))
        try:
            flag = row["rho_known_zero"]
            if flag not in ("0", "1"):
                raise ValueError(f"rho_known_zero must be 0 or 1, got {flag!r}")
            problems.append(InferenceProblem(
                theta_L_hat=float(row["theta_L"]),
                theta_U_hat=float(row["theta_U"]),
                se_L=float(row["se_L"]),
                se_U=float(row["se_U"]),
                rho_hat=float(row["rho"]),
                alpha=float(row["alpha"]),
                rho_known_zero=flag == "1",
                label=row["label"],
            ))
        except ValueError as exc:
            errors.append(RowError(line=line_no, message=str(exc)))
    return problems, errors


def read_problem_file(path) -> tuple[list[InferenceProblem], list[RowError]]:
    return parse_problem_file(Path(path).read_text(encoding="utf-8"))


def write_problem_file(path, problems: list[InferenceProblem]) -> None:
    """Write problems as CSV; float formatting round-trips exactly."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PROBLEM_COLUMNS)
        for p in problems:
            writer.writerow([
                p.label,
                repr(p.theta_L_hat), repr(p.theta_U_hat),
                repr(p.se_L), repr(p.se_U),
                repr(p.rho_hat), repr(p.alpha),
                "1" if p.rho_known_zero else "0",
            ])


def read_key_value_config(path) -> dict[str, str]:
    """Parse a flat key=value configuration file."""
    out: dict[str, str] = {}
    for line_no, line in _iter_data_lines(Path(path).read_text(encoding="utf-8")):
        if "=" not in line:
            raise ValueError(f"line {line_no}: expected key=value, got {line.strip()!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out
