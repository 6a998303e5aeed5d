from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Optional

from utils.functions import remaining_time


@dataclass(frozen=True)
class ProgressEvent:
    value: int
    remaining_time: str
    stage: str = ""


ProgressCallback = Callable[[ProgressEvent], None]


class ProgressTracker:
    """Turns completed-task counts into ProgressEvents for an optional callback."""

    def __init__(self, total: int, callback: Optional[ProgressCallback] = None, stage: str = ""):
        self.total = max(int(total), 1)
        self.callback = callback
        self.stage = stage
        self.done = 0
        self._started = time.perf_counter()
        self._last_value = -1

    def advance(self, count: int = 1) -> None:
        self.done += count
        if self.callback is None:
            return
        value = int(100 * self.done / self.total)
        if value == self._last_value and self.done < self.total:
            return
        self._last_value = value
        elapsed = time.perf_counter() - self._started
        self.callback(
            ProgressEvent(
                value=value,
                remaining_time=remaining_time(elapsed, self.done, self.total),
                stage=self.stage,
            )
        )
