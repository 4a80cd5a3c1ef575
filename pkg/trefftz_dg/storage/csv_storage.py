import csv
import io
import os
import threading
from typing import Dict, List

from ..utils.logger import get_logger

logger = get_logger(__name__)


class CsvStorage:
    """
    Writes study records to a CSV file.

    Rows are written in the order they are given, with '\\n' line endings, so the same
    records always produce the same bytes. Writes go through a temporary file and are
    guarded by a lock.
    """
    def __init__(self, storage_path: str, columns):
        self.storage_path = storage_path
        self.columns = tuple(columns)
        self.lock = threading.Lock()
        logger.info(f"CsvStorage initialized with path: {self.storage_path}")

    def _ensure_directory_exists(self):
        directory = os.path.dirname(self.storage_path)
        if directory:
            os.makedirs(directory, exist_ok=True)

    def render(self, records) -> str:
        """CSV text of the records; each record provides `to_row()` in column order."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)
        for record in records:
            row = record.to_row()
            if len(row) != len(self.columns):
                raise ValueError(f"Record with {len(row)} cells for {len(self.columns)} columns")
            writer.writerow(row)
        return buffer.getvalue()

    def save_records(self, records):
        """
        Replaces the file content with the header and one row per record.

        Raises:
            IOError: if the file cannot be written
        """
        records = list(records)
        text = self.render(records)
        self._ensure_directory_exists()
        temporary = f"{self.storage_path}.tmp"
        with self.lock:
            try:
                with open(temporary, "w", encoding="utf-8", newline="") as f:
                    f.write(text)
                os.replace(temporary, self.storage_path)
            except IOError as e:
                logger.error(f"Error saving records to {self.storage_path}: {e}")
                raise
        logger.info(f"Saved {len(records)} rows to {self.storage_path}")

    def load_rows(self) -> List[Dict[str, str]]:
        """Rows of the file as dictionaries of strings (empty list if the file is missing)."""
        with self.lock:
            if not os.path.exists(self.storage_path):
                logger.warning(f"Storage file not found at {self.storage_path}")
                return []
            with open(self.storage_path, "r", encoding="utf-8", newline="") as f:
                return list(csv.DictReader(f))
