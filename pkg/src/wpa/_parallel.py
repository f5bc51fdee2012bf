"""Order-preserving thread fan-out capped by ``WPA_THREADS``."""
import os
from concurrent.futures import ThreadPoolExecutor


def thread_count():
    raw = os.environ.get("WPA_THREADS", "").strip()
    if not raw:
        return min(4, os.cpu_count() or 1)
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def ordered_map(fn, items, threads=None):
    """``list(map(fn, items))`` possibly on worker threads; output order is input order."""
    items = list(items)
    threads = thread_count() if threads is None else max(1, int(threads))
    if threads == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(fn, items))
