import json
import math
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from constants import FORMAT_VERSION
from utils.exceptions import DataError

TIME_FORMAT = "%Y-%m-%d %H:%M:%S"


def to_json_compatible(value):
    if isinstance(value, np.ndarray):
        return to_json_compatible(value.tolist())
    if isinstance(value, np.generic):
        return to_json_compatible(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, dict):
        return {str(key): to_json_compatible(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_json_compatible(item) for item in value]
    return value


def write_json(path, data: Dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as file:
        json.dump(to_json_compatible(data), file, ensure_ascii=False, indent=4)
    return path


def read_json(path) -> Dict:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as file:
            return json.load(file)
    except FileNotFoundError:
        raise DataError(f"{path} does not exist") from None
    except json.JSONDecodeError as e:
        raise DataError(f"{path}: line {e.lineno}: {e.msg}") from None


class RunRecord:
    """Manifest of one command run: config echo, results and timestamps."""

    def __init__(
        self,
        command: str,
        config: Optional[Dict] = None,
        finished: Any = "--",
    ):
        self.command = command
        self.config = config or {}
        self.results: Dict[str, Any] = {}
        self.outputs: Dict[str, str] = {}
        self.started = datetime.now()
        self.finished = finished

    def add(self, **results) -> "RunRecord":
        self.results.update(results)
        return self

    def add_output(self, name: str, path) -> "RunRecord":
        self.outputs[name] = Path(path).name
        return self

    def save(self, path, finish: bool = True) -> Path:
        if finish:
            self.finished = datetime.now()
        return write_json(path, self.to_json())

    def to_json(self):
        finished = self.finished
        if finished == "--":
            finished = datetime.now()
        return {
            "format_version": FORMAT_VERSION,
            "command": self.command,
            "started": self.started.strftime(TIME_FORMAT),
            "finished": finished.strftime(TIME_FORMAT),
            "config": to_json_compatible(self.config),
            "results": to_json_compatible(self.results),
            "outputs": dict(self.outputs),
        }
