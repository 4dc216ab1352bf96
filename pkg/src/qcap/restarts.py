"""Index-ordered execution of optimizer restarts."""

from __future__ import annotations

import concurrent.futures
import os
from typing import Callable, Mapping, TypeVar

THREADS_ENV_VAR = "QCAP_THREADS"
DEFAULT_THREADS = 1

T = TypeVar("T")


def resolve_thread_count(
    environ: Mapping[str, str] | None = None,
    warn: Callable[[str], None] | None = None,
) -> int:
    env = os.environ if environ is None else environ
    raw = env.get(THREADS_ENV_VAR)
    if raw is None or raw.strip() == "":
        return DEFAULT_THREADS
    try:
        value = int(raw)
    except ValueError:
        value = 0
    if value < 1:
        if warn is not None:
            warn(f"Invalid {THREADS_ENV_VAR}='{raw}'. Using {DEFAULT_THREADS} thread.")
        return DEFAULT_THREADS
    return value


def run_restarts(
    task: Callable[[int], T],
    count: int,
    threads: int | None = None,
) -> list[T]:
    """Run ``task(index)`` for every restart index; results come back in index order."""
    workers = resolve_thread_count() if threads is None else max(1, threads)
    workers = min(workers, count)
    if workers <= 1:
        return [task(index) for index in range(count)]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(task, index) for index in range(count)]
        return [future.result() for future in futures]
