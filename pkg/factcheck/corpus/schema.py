from dataclasses import dataclass, field
from enum import Enum
from typing import List, Tuple

from pydantic import BaseModel, Field, field_validator

EvidencePointer = Tuple[str, int]
EvidenceGroup = List[EvidencePointer]


class Label(str, Enum):
    SUPPORTS = "SUPPORTS"
    REFUTES = "REFUTES"
    NEI = "NEI"

    @classmethod
    def parse(cls, value: str) -> "Label":
        key = value.strip().upper()
        if key in ("NOT ENOUGH INFO", "NOT_ENOUGH_INFO", "NOTENOUGHINFO"):
            return cls.NEI
        return cls(key)

    @property
    def index(self) -> int:
        return LABELS.index(self)


LABELS = [Label.SUPPORTS, Label.REFUTES, Label.NEI]


@dataclass(frozen=True)
class Document:
    id: str
    title: str
    sentences: Tuple[str, ...]
    links: Tuple[Tuple[str, ...], ...] = ()
    pageview: int = 0

    def sentence_links(self, index: int) -> Tuple[str, ...]:
        if index < len(self.links):
            return self.links[index]
        return ()

    def body_sentences(self) -> List[Tuple[int, str]]:
        return [(i, s) for i, s in enumerate(self.sentences) if i >= 1]

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "sentences": list(self.sentences),
            "links": [list(group) for group in self.links],
            "pageview": self.pageview,
        }


@dataclass
class ClaimRecord:
    id: int
    claim: str
    label: Label
    evidence_groups: List[EvidenceGroup] = field(default_factory=list)

    @property
    def verifiable(self) -> bool:
        return self.label != Label.NEI

    def gold_sentences(self) -> set[EvidencePointer]:
        return {tuple(p) for group in self.evidence_groups for p in group}

    def gold_documents(self) -> set[str]:
        return {doc_id for doc_id, _ in self.gold_sentences()}

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "claim": self.claim,
            "label": self.label.value,
            "evidence": [[[d, i] for d, i in group] for group in self.evidence_groups],
        }


class DocumentLine(BaseModel):
    id: str = Field(min_length=1)
    title: str = Field(min_length=1)
    sentences: List[str] = Field(default_factory=list)
    links: List[List[str]] = Field(default_factory=list)
    pageview: int = Field(default=0, ge=0)

    def to_document(self) -> Document:
        sentences = self.sentences or [self.title]
        if sentences[0] != self.title:
            raise ValueError(
                f"sentence 0 must be the title {self.title!r}, got {sentences[0]!r}"
            )
        return Document(
            id=self.id,
            title=self.title,
            sentences=tuple(sentences),
            links=tuple(tuple(group) for group in self.links),
            pageview=self.pageview,
        )


class ClaimLine(BaseModel):
    id: int
    claim: str
    label: str
    evidence: List[List[Tuple[str, int]]] = Field(default_factory=list)

    @field_validator("label")
    @classmethod
    def _known_label(cls, value: str) -> str:
        return Label.parse(value).value

    def to_record(self) -> ClaimRecord:
        label = Label(self.label)
        groups = [[(d, int(i)) for d, i in group] for group in self.evidence if group]
        if (label == Label.NEI) != (not groups):
            raise ValueError(
                f"claim {self.id}: label {label.value} inconsistent with "
                f"{len(groups)} evidence group(s)"
            )
        return ClaimRecord(
            id=self.id, claim=self.claim, label=label, evidence_groups=groups
        )
