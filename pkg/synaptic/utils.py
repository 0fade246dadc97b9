from concurrent.futures import Future
from functools import wraps
from threading import Lock
from types import SimpleNamespace
from typing import Callable, TypeVar

T = TypeVar("T")


def once(func: Callable[[], T]) -> Callable[[], T]:
    """
    Return a function that will be called only once, and its result cached.

    If an exception occurs, the exception is reraised on every invocation.
    """
    state = SimpleNamespace(lock=Lock(), result=None)

    @wraps(func)
    def wrapped():
        if state.result is None:
            with state.lock:
                if state.result is None:
                    f = Future()
                    f.set_running_or_notify_cancel()
                    try:
                        f.set_result(func())
                    except BaseException as e:
                        f.set_exception(e)
                    state.result = f
        return state.result.result()
    return wrapped


def parse_range(text):
    """Parse 'A..B' (inclusive) or a single integer into a list of integers."""
    first, sep, last = str(text).partition("..")
    try:
        first = int(first)
        last = int(last) if sep else first
    except ValueError:
        raise ValueError(f"invalid range '{text}', expected A..B") from None
    if last < first:
        raise ValueError(f"empty range '{text}'")
    return list(range(first, last + 1))
