"""Simple file writers for traces, reports and Monte-Carlo records."""

import csv
import json
import logging
from pathlib import Path
from typing import Iterable, Iterator

from pydantic import BaseModel

from dcflow.data import DataSink
from dcflow.models import SolveResult

logger = logging.getLogger(__name__)


class FileWriter(DataSink):
    """Base class for file writers."""

    def __init__(self, file_path: Path):
        self.file_path = Path(file_path)

    def get_data_dicts(self, results: Iterable[dict | BaseModel]) -> Iterator[dict]:
        """Yield dictionaries from records, dropping any ``errors`` field.

        :param results: An iterable of records.
        """
        for result in results:
            if isinstance(result, BaseModel):
                exclude = set()
                if hasattr(result, "errors"):
                    exclude = {"errors"}
                yield result.model_dump(mode="json", exclude=exclude)
            else:
                yield result


class CSVWriter(FileWriter):
    """Writes rows to a CSV file."""

    def write(self, results: Iterable[dict | BaseModel]):
        """Write rows to a CSV file; the first row sets the columns.

        :param results: An iterable of records.
        """
        results_dicts: list[dict] = list(self.get_data_dicts(results))
        if not results_dicts:
            logger.warning(f"Nothing to write to {self.file_path}")
            return
        with open(self.file_path, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=list(results_dicts[0].keys()))
            writer.writeheader()
            writer.writerows(results_dicts)
        logger.info(f"Data written to {self.file_path}")


class JsonWriter(FileWriter):
    """Writes a document to a JSON file."""

    def write(self, results: Iterable[dict | BaseModel] | dict | BaseModel):
        """Write a single document or a list of records to a JSON file.

        :param results: A record, a dictionary, or an iterable of them.
        """
        if isinstance(results, BaseModel):
            payload: dict | list = results.model_dump(mode="json")
        elif isinstance(results, dict):
            payload = results
        else:
            payload = list(self.get_data_dicts(results))
        with open(self.file_path, "w") as f:
            json.dump(payload, f, indent=4, sort_keys=True)
            f.write("\n")
        logger.info(f"Data written to {self.file_path}")


class TraceWriter(CSVWriter):
    """Writes a solver trace as ``iter,metric`` rows, plus ``energy`` for the energy method."""

    def write_result(self, result: SolveResult):
        if result.trace is None:
            raise ValueError("Result has no trace; solve with record_trace enabled.")
        rows = []
        for index, metric in enumerate(result.trace, start=1):
            row: dict = {"iter": index, "metric": metric}
            if result.energy_trace is not None:
                row["energy"] = result.energy_trace[index - 1]
            rows.append(row)
        self.write(rows)


writers: dict[str, type[FileWriter]] = {
    "csv": CSVWriter,
    "json": JsonWriter,
}
