import json
from pathlib import Path
from typing import Iterator, List

from factcheck.corpus import ClaimRecord, Corpus, ingest, load_claims
from factcheck.errors import ParseError, StartupError


def _require(path: str | Path) -> Path:
    path = Path(path)
    if not path.exists():
        raise StartupError(f"{path} does not exist")
    return path


def load_corpus(path: str | Path) -> Corpus:
    with open(_require(path), "r", encoding="utf-8") as f:
        return ingest(f)


def load_claim_file(path: str | Path, corpus: Corpus | None = None) -> List[ClaimRecord]:
    with open(_require(path), "r", encoding="utf-8") as f:
        return load_claims(f, corpus)


def read_jsonl(path: str | Path) -> Iterator[dict]:
    with open(_require(path), "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(str(e), line_number) from e
