import json
import logging
from pathlib import Path
from typing import Iterable

from factcheck.util import file_hash

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def write_jsonl(path: str | Path, rows: Iterable[dict]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
            count += 1
    logger.info("Wrote %d rows to %s", count, path)
    return path


def write_json(path: str | Path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def update_manifest(output_dir: str | Path, *paths: str | Path) -> dict[str, str]:
    """Record the md5 of each artifact in ``output_dir/manifest.json``."""
    output_dir = Path(output_dir)
    manifest_path = output_dir / MANIFEST_NAME
    manifest = {}
    if manifest_path.exists():
        with open(manifest_path, "r", encoding="utf-8") as f:
            manifest = json.load(f)
    for path in paths:
        manifest[Path(path).name] = file_hash(path)
    write_json(manifest_path, manifest)
    return manifest
