import json
import logging
import threading
from datetime import datetime
from pathlib import Path
from typing import Any, Optional

from .logger import LOGGER_NAME, get_formatted_logger


class JSONRunHandler:
    """Run-scoped structured output.

    ``metrics.jsonl`` gets one sorted-key object per epoch and nothing time dependent, so two
    runs of the same config and seed write identical streams. Wall-clock timings go to
    ``timings.jsonl``; lifecycle events with timestamps go to ``events.json``. With ``append``
    (a resumed run) all three keep what the earlier run wrote.
    """

    def __init__(self, run_dir: str | Path, config_hash: str, append: bool = False):
        self.run_dir = Path(run_dir)
        self.run_dir.mkdir(parents=True, exist_ok=True)
        self.config_hash = config_hash
        self.metrics_file = self.run_dir / "metrics.jsonl"
        self.timings_file = self.run_dir / "timings.jsonl"
        self.json_file = self.run_dir / "events.json"
        if not append:
            self.metrics_file.write_text("", encoding="utf-8")
            self.timings_file.write_text("", encoding="utf-8")
        self.run_data = self._load_json() if append else None
        if self.run_data is None:
            self.run_data = {
                "timestamp": datetime.now().isoformat(),
                "events": [],
                "content": {
                    "config_hash": config_hash,
                    "final": {},
                },
            }

    def _load_json(self) -> Optional[dict[str, Any]]:
        if not self.json_file.exists():
            return None
        with open(self.json_file, "r", encoding="utf-8") as f:
            data = json.load(f)
        data.setdefault("events", [])
        data.setdefault("content", {"config_hash": self.config_hash, "final": {}})
        return data

    def log_metrics(self, record: dict[str, Any]) -> None:
        line = json.dumps({**record, "config_hash": self.config_hash}, sort_keys=True)
        with open(self.metrics_file, "a", encoding="utf-8") as f:
            f.write(line + "\n")

    def log_timing(self, epoch: int, seconds: float) -> None:
        line = json.dumps(
            {"config_hash": self.config_hash, "epoch": epoch, "wall_clock_seconds": seconds},
            sort_keys=True,
        )
        with open(self.timings_file, "a", encoding="utf-8") as f:
            f.write(line + "\n")

    def log_event(self, event_type: str, data: dict[str, Any]) -> None:
        self.run_data["events"].append({
            "timestamp": datetime.now().isoformat(),
            "type": event_type,
            "data": data,
        })
        self._save_json()

    def update_content(self, key: str, value: Any) -> None:
        self.run_data["content"][key] = value
        self._save_json()

    def _save_json(self) -> None:
        with open(self.json_file, "w", encoding="utf-8") as f:
            json.dump(self.run_data, f, indent=2)


class RunThreadFilter(logging.Filter):
    """Passes only records emitted by the thread that opened the run."""

    def __init__(self):
        super().__init__()
        self.thread_id = threading.get_ident()

    def filter(self, record: logging.LogRecord) -> bool:
        return record.thread == self.thread_id


def _own_file_handlers(logger: logging.Logger) -> list[logging.Handler]:
    """File handlers opened by a run on the calling thread."""
    current = threading.get_ident()
    return [
        handler
        for handler in logger.handlers
        if isinstance(handler, logging.FileHandler)
        and any(isinstance(f, RunThreadFilter) and f.thread_id == current for f in handler.filters)
    ]


def setup_run_logging(
    run_dir: str | Path,
    config_hash: str,
    verbose: bool = True,
    append: bool = False,
) -> tuple[str, logging.Logger, JSONRunHandler]:
    """Attach ``run.log`` to the package logger and open the run's JSON outputs.

    The file handler only takes records from the calling thread, so runs sharing a process
    on a thread pool each keep their own ``run.log``.
    """
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    log_file = run_dir / "run.log"

    logger = get_formatted_logger(LOGGER_NAME)
    # Drop a handler left by a previous run on this thread
    close_run_logging(logger)

    file_handler = logging.FileHandler(log_file, mode="a" if append else "w", encoding="utf-8")
    file_handler.setLevel(logging.INFO)
    file_handler.setFormatter(logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s"))
    file_handler.addFilter(RunThreadFilter())
    logger.addHandler(file_handler)

    for handler in logger.handlers:
        if not isinstance(handler, logging.FileHandler):
            handler.setLevel(logging.INFO if verbose else logging.WARNING)

    json_handler = JSONRunHandler(run_dir, config_hash, append=append)
    return str(log_file), logger, json_handler


def close_run_logging(logger: Optional[logging.Logger] = None) -> None:
    """Detach and close the run file handler opened on the calling thread."""
    logger = logger or logging.getLogger(LOGGER_NAME)
    for handler in _own_file_handlers(logger):
        logger.removeHandler(handler)
        handler.close()
