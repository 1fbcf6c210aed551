"""Allocator tuning for batch-sized buffer churn.

Training allocates and frees the same multi-megabyte activation buffers
every step; glibc serves those via mmap/munmap by default, so each step
pays page-fault cost again.  Raising the mmap/trim thresholds keeps the
blocks on the heap for reuse.  Silently a no-op off glibc.
"""

import ctypes

_M_TRIM_THRESHOLD = -1
_M_MMAP_THRESHOLD = -3


def tune_allocator() -> None:
    try:
        libc = ctypes.CDLL("libc.so.6")
        libc.mallopt(_M_MMAP_THRESHOLD, 1 << 30)
        libc.mallopt(_M_TRIM_THRESHOLD, 1 << 31)
    except (OSError, AttributeError):
        pass
