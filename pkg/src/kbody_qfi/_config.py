import os

THREADS_ENV = "KBODY_QFI_THREADS"


def max_workers() -> int:
    """Worker cap from ``KBODY_QFI_THREADS``; unset or 0 means one per CPU."""
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if value < 0:
        raise ValueError(f"{THREADS_ENV} must be >= 0, got {value}")
    return value or (os.cpu_count() or 1)
