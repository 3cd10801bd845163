import datetime
import logging
from pathlib import Path

from multiband_bcs.schemas.models import Event


logger = logging.getLogger(__name__)


class ActionLogger:
    """Run journal: one JSON line per event in <out>/events.jsonl, mirrored to the log"""

    journal: Path | None = None

    @classmethod
    def open(cls, out_dir: str | Path) -> Path:
        cls.journal = Path(out_dir) / "events.jsonl"
        return cls.journal

    @classmethod
    def close(cls):
        cls.journal = None

    @classmethod
    def log_event(cls, run_id: str, action_type: str, details: dict):
        event = Event(
            run_id=run_id,
            action_type=action_type,
            details=details,
            create_ts=datetime.datetime.now(datetime.timezone.utc),
        )
        logger.info(f"[{run_id}] {action_type}: {details}")
        if cls.journal is not None:
            with cls.journal.open("a", encoding="utf-8") as f:
                f.write(event.model_dump_json() + "\n")
        return event
