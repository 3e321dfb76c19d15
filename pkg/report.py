"""
Report rendering for search, oracle, compare, evaluate and validate runs
Formats: csv (fixed headers), jsonl (one record per line with a schema
version) and pretty (run-length schemes, 4-decimal criterion values)
"""
import io
import json
import sys
from pathlib import Path
from typing import Dict, List, Literal, Optional, TextIO

import pandas as pd

from config import REPORT_SCHEMA_VERSION
from scheme import Scheme
from utils.logger import setup_logger

logger = setup_logger(__name__, "report.log")

ReportFormat = Literal["csv", "jsonl", "pretty"]

# Fixed column schemas, keyed by command or report kind
COLUMNS: Dict[str, List[str]] = {
    "search": [
        "beta", "k", "n", "m", "criterion", "proposal", "seed",
        "n_it", "n_ac", "best_scheme", "best_psi", "chains", "precision_fallbacks",
    ],
    "oracle": ["beta", "k", "n", "m", "criterion", "best_scheme", "best_psi", "evaluated"],
    "compare": [
        "beta", "k", "n", "m", "criterion", "proposal",
        "oracle_scheme", "oracle_psi", "n_it", "n_ac",
        "search_scheme", "search_psi", "r_eff1", "seed",
    ],
    # compare --reference
    "reference": [
        "beta", "k", "n", "m", "criterion", "proposal",
        "reference_scheme", "reference_psi", "n_it", "n_ac",
        "search_scheme", "search_psi", "r_eff", "seed",
    ],
    "evaluate": ["beta", "k", "n", "m", "criterion", "scheme", "psi"],
    "validate": ["s", "empirical", "asymptotic", "ratio", "replications", "excluded"],
}

# Shown with 4 decimals in pretty mode
CRITERION_COLUMNS = {
    "best_psi", "oracle_psi", "reference_psi", "search_psi", "psi", "r_eff1", "r_eff",
    "empirical", "asymptotic", "ratio",
}


class ReportWriter:
    """Renders report records and writes them to a file or stdout"""

    FORMATS = ("csv", "jsonl", "pretty")

    def __init__(self, fmt: ReportFormat = "csv", out: Optional[Path] = None):
        if fmt not in self.FORMATS:
            raise ValueError(f"Unknown report format: {fmt}")
        self.fmt = fmt
        self.out = Path(out) if out else None

    @staticmethod
    def _frame(schema: str, records: List[Dict], pretty: bool) -> pd.DataFrame:
        if schema not in COLUMNS:
            raise ValueError(f"No report schema: {schema}")
        columns = COLUMNS[schema]
        rows = []
        for record in records:
            row = {}
            for column in columns:
                value = record[column]
                if isinstance(value, Scheme):
                    value = value.display() if pretty else str(value)
                row[column] = value
            rows.append(row)
        return pd.DataFrame(rows, columns=columns)

    def render(self, command: str, records: List[Dict], schema: Optional[str] = None) -> str:
        """Report text for the configured format; schema defaults to the command name"""
        frame = self._frame(schema or command, records, pretty=self.fmt == "pretty")

        if self.fmt == "csv":
            buffer = io.StringIO()
            frame.to_csv(buffer, index=False, float_format="%.17g", lineterminator="\n")
            return buffer.getvalue()

        if self.fmt == "jsonl":
            lines = []
            for row in frame.to_dict(orient="records"):
                record = {"schema_version": REPORT_SCHEMA_VERSION, "command": command}
                for key, value in row.items():
                    # numpy scalars -> builtins
                    record[key] = value.item() if hasattr(value, "item") else value
                lines.append(json.dumps(record))
            return "\n".join(lines) + "\n"

        formatters = {
            column: "{:.4f}".format for column in frame.columns if column in CRITERION_COLUMNS
        }
        return frame.to_string(index=False, formatters=formatters) + "\n"

    def write(
        self,
        command: str,
        records: List[Dict],
        stream: Optional[TextIO] = None,
        schema: Optional[str] = None
    ) -> str:
        """
        Write the rendered report

        Args:
            command: Command that produced the records
            records: One dict per row holding at least the schema columns
            stream: Destination when no output path is configured (default stdout)
            schema: Column schema name when it differs from the command

        Returns:
            The rendered text
        """
        text = self.render(command, records, schema)
        if self.out is not None:
            self.out.parent.mkdir(parents=True, exist_ok=True)
            with open(self.out, "w", encoding="utf-8", newline="\n") as f:
                f.write(text)
            logger.info(f"Wrote {command} report ({len(records)} rows) to {self.out}")
        else:
            (stream or sys.stdout).write(text)
        return text
