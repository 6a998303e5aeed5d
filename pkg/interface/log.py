import logging

from application.bifidelity.events import ProgressEvent

LOG_FORMAT = "[%(asctime)s] [%(levelname)s] %(message)s"

logger = logging.getLogger(__name__)


def configure_logging(level: str | int = logging.INFO) -> logging.Logger:
    root = logging.getLogger()
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.INFO
    root.setLevel(level)

    for handler in list(root.handlers):
        if getattr(handler, "_engine_handler", False):
            root.removeHandler(handler)
    stream_handler = logging.StreamHandler()
    stream_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    stream_handler._engine_handler = True
    root.addHandler(stream_handler)
    return root


def log_progress(event: ProgressEvent) -> None:
    stage = f"{event.stage}: " if event.stage else ""
    logger.info(f"[progress] {stage}{event.value}%, remaining {event.remaining_time}")
