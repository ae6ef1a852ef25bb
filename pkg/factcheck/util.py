import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from factcheck.settings import settings

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: str | None = None):
    logging.basicConfig(
        level=(level or settings.LOG_LEVEL).upper(), format=LOG_FORMAT, force=True
    )


def file_hash(path: str | Path) -> str:
    digest = hashlib.md5()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def claim_seed(seed: int, claim_id: int) -> list[int]:
    """Per-claim generator seed, stable across worker counts and claim order."""
    return [seed, claim_id]


def parallel_map(fn, items, max_workers: int | None = None) -> list:
    """``fn`` over ``items`` on a thread pool; results keep input order."""
    items = list(items)
    if not items:
        return []
    if max_workers is None:
        max_workers = settings.MAX_WORKERS or min(8, len(items))
    if max_workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        return list(executor.map(fn, items))
