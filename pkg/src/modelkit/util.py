import os


def max_workers() -> int:
    """Thread cap from ``MODELKIT_THREADS`` (default: 4)."""
    try:
        n = int(os.environ.get("MODELKIT_THREADS", "4"))
    except ValueError:
        n = 4
    return max(1, n)
