import logging
import os
import threading
from concurrent.futures import Future, ThreadPoolExecutor
from typing import Any, Callable, ClassVar, Iterable, List, Optional, TypeVar

from . import types

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class Engine:
    _default: ClassVar[Optional["Engine"]] = None
    _lock: ClassVar[threading.Lock] = threading.Lock()

    def __init__(
        self,
        *,
        settings: types.Settings,
    ) -> None:
        """
        Creates the compute engine.

        Args:
            settings: The settings to use for the engine. `settings.threads` caps the worker pool.
        """

        self._settings = types.model_copy(settings)
        self._executor = ThreadPoolExecutor(
            max_workers=self.max_workers,
            thread_name_prefix="feigenjulia",
        )
        logger.debug("engine started with %d workers", self.max_workers)

    @property
    def settings(self) -> types.Settings:
        """
        Get the current settings.

        Returns:
            The current settings.
        """

        return self._settings

    @property
    def max_workers(self) -> int:
        if self._settings.threads is not None:
            return max(1, self._settings.threads)
        return max(1, (os.cpu_count() or 1) - 1)

    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        """
        Applies `fn` to every item on the worker pool and returns the results in input order.

        Work is never nested on the pool: callers that already run on a worker
        map sequentially.
        """

        items = list(items)
        if self.max_workers == 1 or len(items) <= 1 or _on_worker():
            return [fn(item) for item in items]
        return list(self._executor.map(fn, items))

    def submit(self, fn: Callable[..., R], *args: Any, **kwargs: Any) -> "Future[R]":
        return self._executor.submit(fn, *args, **kwargs)

    def shutdown(self) -> None:
        self._executor.shutdown(wait=True)

    @classmethod
    def get_default(cls) -> "Engine":
        """
        Return the default engine.

        Returns:
            The default engine with the default settings.
        """
        from . import settings as default_settings

        if cls._default is None or cls._default.settings != default_settings:
            with cls._lock:
                if cls._default is None or cls._default.settings != default_settings:
                    cls._default = cls(settings=default_settings)

        return cls._default


def _on_worker() -> bool:
    return threading.current_thread().name.startswith("feigenjulia")
