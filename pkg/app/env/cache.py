import json
import logging
import threading
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

from pydantic import ValidationError

from app.config import LOGGER_NAME
from app.env.views import Measurement, MeasurementRecord

logger = logging.getLogger(LOGGER_NAME)

CacheKey = Tuple[str, str, int, int]


class EvalCache:
    """
    Thread-safe map (nest_id, source_digest, vf, if) -> Measurement.

    With a path, every insert is appended to a JSON-lines file and existing
    records are loaded on construction.
    """

    def __init__(self, path: Optional[Union[str, Path]] = None):
        self.path = Path(path) if path else None
        self._lock = threading.Lock()
        self._entries: Dict[CacheKey, Measurement] = {}
        self.hits = 0
        self.misses = 0
        if self.path is not None and self.path.exists():
            self._load()

    def _load(self) -> None:
        skipped = 0
        with self.path.open("r", encoding="utf-8") as handle:
            for line in handle:
                if not line.strip():
                    continue
                try:
                    record = MeasurementRecord.model_validate(json.loads(line))
                except (json.JSONDecodeError, ValidationError):
                    skipped += 1
                    continue
                key = (record.nest_id, record.source_digest, record.vf, record.if_)
                self._entries[key] = Measurement(
                    **record.model_dump(include=set(Measurement.model_fields))
                )
        if skipped:
            logger.warning("Skipped %d malformed cache records in %s", skipped, self.path)
        logger.info("Loaded %d cached measurements from %s", len(self._entries), self.path)

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    def get(self, key: CacheKey) -> Optional[Measurement]:
        with self._lock:
            found = self._entries.get(key)
            if found is None:
                self.misses += 1
            else:
                self.hits += 1
            return found

    def put(self, key: CacheKey, measurement: Measurement) -> Measurement:
        """Insert unless present; returns the stored measurement."""
        with self._lock:
            if key in self._entries:
                return self._entries[key]
            self._entries[key] = measurement
            if self.path is not None:
                nest_id, digest, vf, if_ = key
                record = MeasurementRecord(
                    nest_id=nest_id, source_digest=digest, vf=vf, if_=if_, **measurement.model_dump()
                )
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with self.path.open("a", encoding="utf-8") as handle:
                    handle.write(record.model_dump_json(by_alias=True) + "\n")
            return measurement
