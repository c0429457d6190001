import json
import logging
import threading

from ml_msda.utils.logger import LOGGER_NAME, get_formatted_logger
from ml_msda.utils.logging_config import JSONRunHandler, close_run_logging, setup_run_logging


def test_metrics_stream_is_sorted_and_tagged(tmp_path):
    handler = JSONRunHandler(tmp_path, "abc123")
    handler.log_metrics({"epoch": 0, "total": 1.5})
    handler.log_metrics({"total": 1.0, "epoch": 1})
    lines = (tmp_path / "metrics.jsonl").read_text(encoding="utf-8").splitlines()
    assert lines[0] == '{"config_hash": "abc123", "epoch": 0, "total": 1.5}'
    assert json.loads(lines[1])["epoch"] == 1


def test_timings_stay_out_of_the_metrics_stream(tmp_path):
    handler = JSONRunHandler(tmp_path, "abc123")
    handler.log_timing(0, 2.5)
    assert (tmp_path / "metrics.jsonl").read_text(encoding="utf-8") == ""
    timing = json.loads((tmp_path / "timings.jsonl").read_text(encoding="utf-8"))
    assert timing == {"config_hash": "abc123", "epoch": 0, "wall_clock_seconds": 2.5}


def test_events_and_content(tmp_path):
    handler = JSONRunHandler(tmp_path, "abc123")
    handler.log_event("run_started", {"seed": 0})
    handler.update_content("final", {"total": 0.5})
    data = json.loads((tmp_path / "events.json").read_text(encoding="utf-8"))
    assert len(data["events"]) == 1
    assert data["events"][0]["type"] == "run_started"
    assert data["events"][0]["data"] == {"seed": 0}
    assert data["content"] == {"config_hash": "abc123", "final": {"total": 0.5}}


def test_append_keeps_earlier_records(tmp_path):
    JSONRunHandler(tmp_path, "abc123").log_metrics({"epoch": 0})
    JSONRunHandler(tmp_path, "abc123", append=True).log_metrics({"epoch": 1})
    assert len((tmp_path / "metrics.jsonl").read_text(encoding="utf-8").splitlines()) == 2
    JSONRunHandler(tmp_path, "abc123")
    assert (tmp_path / "metrics.jsonl").read_text(encoding="utf-8") == ""


def test_run_logging_writes_run_log(tmp_path):
    log_file, logger, handler = setup_run_logging(tmp_path, "abc123", verbose=False)
    try:
        logger.info("epoch 1/1 done")
        assert isinstance(handler, JSONRunHandler)
    finally:
        close_run_logging(logger)
    assert "epoch 1/1 done" in (tmp_path / "run.log").read_text(encoding="utf-8")
    assert log_file == str(tmp_path / "run.log")
    assert not any(isinstance(h, logging.FileHandler) for h in logger.handlers)


def test_a_new_run_replaces_the_previous_file_handler(tmp_path):
    setup_run_logging(tmp_path / "first", "a")
    _, logger, _ = setup_run_logging(tmp_path / "second", "b")
    try:
        file_handlers = [h for h in logger.handlers if isinstance(h, logging.FileHandler)]
        assert len(file_handlers) == 1
        assert file_handlers[0].baseFilename.endswith("run.log")
        assert "second" in file_handlers[0].baseFilename
    finally:
        close_run_logging()


def test_package_logger_is_formatted_once():
    logger = get_formatted_logger()
    again = get_formatted_logger()
    assert logger is again
    assert logger.name == LOGGER_NAME
    assert not logger.propagate
    stream_handlers = [h for h in logger.handlers if not isinstance(h, logging.FileHandler)]
    assert len(stream_handlers) == 1


def test_resumed_run_keeps_earlier_events(tmp_path):
    JSONRunHandler(tmp_path, "abc123").log_event("run_started", {"start_epoch": 0})
    resumed = JSONRunHandler(tmp_path, "abc123", append=True)
    resumed.log_event("run_started", {"start_epoch": 2})
    events = json.loads((tmp_path / "events.json").read_text(encoding="utf-8"))["events"]
    assert [e["data"]["start_epoch"] for e in events] == [0, 2]
    JSONRunHandler(tmp_path, "abc123").log_event("run_started", {"start_epoch": 0})
    assert len(json.loads((tmp_path / "events.json").read_text(encoding="utf-8"))["events"]) == 1


def test_concurrent_runs_keep_separate_run_logs(tmp_path):
    barrier = threading.Barrier(2)

    def run(name):
        _, logger, _ = setup_run_logging(tmp_path / name, name)
        try:
            barrier.wait()
            for epoch in range(3):
                logger.info(f"{name} epoch {epoch}")
            barrier.wait()
        finally:
            close_run_logging(logger)

    threads = [threading.Thread(target=run, args=(name,)) for name in ("first", "second")]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()

    first = (tmp_path / "first" / "run.log").read_text(encoding="utf-8")
    second = (tmp_path / "second" / "run.log").read_text(encoding="utf-8")
    assert first.count("first epoch") == 3 and "second" not in first
    assert second.count("second epoch") == 3 and "first" not in second
    assert not any(isinstance(h, logging.FileHandler) for h in get_formatted_logger().handlers)
