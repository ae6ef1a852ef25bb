"""Seeded synthetic corpora and claim sets for desk-scale evaluation.

The generated world is a set of entity documents (with a small share of
disambiguative title clusters), place documents reachable through hyperlinks,
a toy ontology over the entity kinds and an antonym list over the adjectives.
Every claim is produced by a rule whose trace row records the fact it was
built from and the value it asserts, so its label can be re-derived.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np
from pydantic import BaseModel, Field

from factcheck.corpus import ClaimRecord, Document, Label
from factcheck.output import update_manifest, write_json, write_jsonl

logger = logging.getLogger(__name__)

KIND_PARENTS = {
    "artist": "person",
    "athlete": "person",
    "scientist": "person",
    "musician": "artist",
    "painter": "artist",
    "writer": "artist",
    "singer": "musician",
    "guitarist": "musician",
    "drummer": "musician",
    "novelist": "writer",
    "poet": "writer",
    "runner": "athlete",
    "swimmer": "athlete",
    "boxer": "athlete",
    "chemist": "scientist",
    "biologist": "scientist",
    "band": "group",
    "orchestra": "group",
    "choir": "group",
    "film": "work",
    "novel": "work",
    "album": "work",
    "song": "work",
    "city": "place",
    "village": "place",
    "river": "place",
    "mountain": "place",
    "mammal": "animal",
    "bird": "animal",
    "horse": "mammal",
    "dog": "mammal",
    "eagle": "bird",
    "parrot": "bird",
}
PLACE_KINDS = ("city", "village")
ENTITY_KINDS = tuple(
    k for k in KIND_PARENTS if k not in set(KIND_PARENTS.values()) and k not in PLACE_KINDS
)
YEAR_VERBS = {
    "person": "born",
    "group": "formed",
    "work": "released",
    "place": "founded",
    "animal": "born",
}
ANTONYMS = (
    ("famous", "obscure"),
    ("large", "small"),
    ("old", "young"),
    ("rich", "poor"),
    ("ancient", "modern"),
    ("northern", "southern"),
    ("loud", "quiet"),
    ("popular", "unpopular"),
)
ADJECTIVES = tuple(a for pair in ANTONYMS for a in pair)
TOPICS = (
    "music",
    "history",
    "football",
    "science",
    "cooking",
    "travel",
    "architecture",
    "television",
    "farming",
    "poetry",
    "fashion",
    "weather",
)
FILLERS = (
    "{name} is often mentioned in local {topic} reports.",
    "{name} appeared in a documentary about {topic}.",
    "Critics have written about {name} and {topic}.",
    "{name} is associated with the {topic} scene.",
    "A museum exhibit on {topic} features {name}.",
)

_ONSETS = ("b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "t", "v", "z", "br", "dr", "kr", "tr", "st")
_VOWELS = ("a", "e", "i", "o", "u")
_CODAS = ("", "n", "r", "l", "k")


class SyntheticSpec(BaseModel):
    n_docs: int = Field(default=100, ge=20)
    disambiguative_fraction: float = Field(default=0.10, ge=0, lt=0.5)
    claims_per_label: int = Field(default=40, ge=1)
    # share of claims aimed at a disambiguative page
    disambiguative_claim_fraction: float = Field(default=0.3, ge=0, le=1)
    # share of verifiable claims whose second evidence sentence is only linked
    chain_fraction: float = Field(default=0.2, ge=0, le=1)
    partner_fraction: float = Field(default=0.5, ge=0, le=1)
    dev_fraction: float = Field(default=0.2, ge=0, lt=1)
    filler_sentences: int = Field(default=3, ge=0)
    topics: List[str] = Field(default_factory=lambda: list(TOPICS), min_length=1)


@dataclass
class _Entity:
    doc_id: str
    name: str
    kind: str
    adjective: str
    year: int
    place: str | None = None
    partner: str | None = None


@dataclass
class SyntheticData:
    documents: List[Document]
    claims: List[ClaimRecord]
    trace: List[dict]
    ontology_lines: List[str]
    train_ids: List[int]
    dev_ids: List[int]
    stats: dict = field(default_factory=dict)

    def split(self, name: str) -> List[ClaimRecord]:
        ids = set(self.train_ids if name == "train" else self.dev_ids)
        return [c for c in self.claims if c.id in ids]


def ancestors(kind: str) -> List[str]:
    chain = []
    while kind in KIND_PARENTS:
        kind = KIND_PARENTS[kind]
        chain.append(kind)
    return chain


def family(kind: str) -> str:
    chain = ancestors(kind)
    return chain[-1] if chain else kind


def article(word: str) -> str:
    return "an" if word[0].lower() in "aeiou" else "a"


def derive_label(attribute: str, fact, claimed) -> Label:
    """Label implied by a trace row: absent facts are NEI, kinds allow generalization."""
    if attribute == "absent":
        return Label.NEI
    if attribute == "kind":
        return Label.SUPPORTS if claimed == fact or claimed in ancestors(fact) else Label.REFUTES
    return Label.SUPPORTS if claimed == fact else Label.REFUTES


def _pick(rng: np.random.Generator, items: Sequence):
    return items[int(rng.integers(len(items)))]


def _name(rng: np.random.Generator, used: set[str]) -> str:
    while True:
        syllables = [_pick(rng, _ONSETS) + _pick(rng, _VOWELS) for _ in range(int(rng.integers(2, 4)))]
        name = ("".join(syllables) + _pick(rng, _CODAS)).capitalize()
        if name not in used:
            used.add(name)
            return name


def _cluster_sizes(total: int, rng: np.random.Generator) -> List[int]:
    sizes = []
    remaining = total
    while remaining > 0:
        size = int(rng.integers(6, 10))
        if remaining - size < 2:
            size = remaining
        sizes.append(size)
        remaining -= size
    return sizes


def _year(rng: np.random.Generator) -> int:
    return int(rng.integers(1900, 2021))


def _perturbed_year(year: int, rng: np.random.Generator) -> int:
    offset = int(rng.integers(1, 10)) * (1 if rng.random() < 0.5 else -1)
    return year + offset


def _build_world(spec: SyntheticSpec, rng: np.random.Generator):
    used: set[str] = set()
    n_disambiguative = round(spec.n_docs * spec.disambiguative_fraction)
    n_places = max(2, spec.n_docs // 10)
    n_plain = spec.n_docs - n_disambiguative - n_places

    places = []
    for _ in range(n_places):
        name = _name(rng, used)
        places.append(_Entity(name, name, _pick(rng, PLACE_KINDS), _pick(rng, ADJECTIVES), _year(rng)))

    plain = []
    for _ in range(n_plain):
        name = _name(rng, used)
        plain.append(_Entity(name, name, _pick(rng, ENTITY_KINDS), _pick(rng, ADJECTIVES), _year(rng)))

    clusters = []
    for size in _cluster_sizes(n_disambiguative, rng):
        base = _name(rng, used)
        kinds = rng.choice(len(ENTITY_KINDS), size=size, replace=False)
        clusters.append(
            [
                _Entity(f"{base}_({ENTITY_KINDS[k]})", base, ENTITY_KINDS[k], _pick(rng, ADJECTIVES), _year(rng))
                for k in kinds
            ]
        )

    entities = plain + [e for cluster in clusters for e in cluster]
    for entity in entities:
        entity.place = _pick(rng, places).doc_id
        if len(plain) > 1 and rng.random() < spec.partner_fraction:
            partner = _pick(rng, plain)
            if partner.doc_id != entity.doc_id:
                entity.partner = partner.doc_id
    return places, plain, clusters


def _title(entity: _Entity) -> str:
    return entity.doc_id.replace("_", " ")


def _fillers(name: str, spec: SyntheticSpec, rng: np.random.Generator) -> List[str]:
    return [
        _pick(rng, FILLERS).format(name=name, topic=_pick(rng, spec.topics))
        for _ in range(spec.filler_sentences)
    ]


def _document(sentences: List[str], links: Dict[int, str], entity: _Entity, rng) -> Document:
    return Document(
        id=entity.doc_id,
        title=_title(entity),
        sentences=tuple(sentences),
        links=tuple((links[i],) if i in links else () for i in range(len(sentences))),
        pageview=int(rng.integers(0, 100_000)),
    )


def _place_document(place: _Entity, spec, rng) -> Document:
    sentences = [
        _title(place),
        f"{place.name} is {article(place.adjective)} {place.adjective} {place.kind}.",
        f"{place.name} was founded in {place.year}.",
    ] + _fillers(place.name, spec, rng)
    return _document(sentences, {}, place, rng)


def _entity_document(entity: _Entity, by_id: Dict[str, _Entity], spec, rng) -> Document:
    verb = YEAR_VERBS[family(entity.kind)]
    sentences = [
        _title(entity),
        f"{entity.name} is {article(entity.adjective)} {entity.adjective} {entity.kind} "
        f"from {by_id[entity.place].name}.",
        f"{entity.name} was {verb} in {entity.year}.",
    ]
    links = {1: entity.place}
    if entity.partner is not None:
        sentences.append(f"{entity.name} worked with {by_id[entity.partner].name}.")
        links[3] = entity.partner
    sentences += _fillers(entity.name, spec, rng)
    return _document(sentences, links, entity, rng)


class _ClaimFactory:
    def __init__(self, places, by_id, rng):
        self.places = places
        self.by_id = by_id
        self.rng = rng

    def supports(self, target: _Entity, chain: bool) -> tuple[str, list, dict]:
        rng = self.rng
        if chain:
            if target.partner is not None and rng.random() < 0.5:
                return self._partner_chain(target, truthful=True)
            return self._place_chain(target, truthful=True)
        rule = _pick(rng, ("paraphrase", "hypernym", "number"))
        if rule == "paraphrase":
            text = f"{target.name} is {article(target.adjective)} {target.adjective} {target.kind}."
            return text, [(target.doc_id, 1)], self._trace(rule, "adjective", target.adjective, target.adjective)
        if rule == "hypernym":
            general = _pick(rng, ancestors(target.kind))
            text = f"{target.name} is {article(general)} {general}."
            return text, [(target.doc_id, 1)], self._trace(rule, "kind", target.kind, general)
        verb = YEAR_VERBS[family(target.kind)]
        text = f"{target.name} was {verb} in {target.year}."
        return text, [(target.doc_id, 2)], self._trace(rule, "year", target.year, target.year)

    def refutes(self, target: _Entity, chain: bool) -> tuple[str, list, dict]:
        rng = self.rng
        if chain:
            return self._place_chain(target, truthful=False)
        rule = _pick(rng, ("antonym", "category", "number"))
        if rule == "antonym":
            flipped = next(b if a == target.adjective else a for a, b in ANTONYMS if target.adjective in (a, b))
            text = f"{target.name} is {article(flipped)} {flipped} {target.kind}."
            return text, [(target.doc_id, 1)], self._trace(rule, "adjective", target.adjective, flipped)
        if rule == "category":
            other = _pick(rng, [k for k in ENTITY_KINDS if k != target.kind])
            text = f"{target.name} is {article(other)} {other}."
            return text, [(target.doc_id, 1)], self._trace(rule, "kind", target.kind, other)
        verb = YEAR_VERBS[family(target.kind)]
        year = _perturbed_year(target.year, rng)
        text = f"{target.name} was {verb} in {year}."
        return text, [(target.doc_id, 2)], self._trace(rule, "year", target.year, year)

    def not_enough_info(self, target: _Entity) -> tuple[str, list, dict]:
        rng = self.rng
        year = _year(rng)
        if rng.random() < 0.5:
            text = f"{target.name} won an award in {year}."
        else:
            text = f"{target.name} visited {_pick(rng, self.places).name} in {year}."
        return text, [], self._trace("absent", "absent", None, year)

    def _place_chain(self, target: _Entity, truthful: bool):
        place = self.by_id[target.place]
        year = place.year if truthful else _perturbed_year(place.year, self.rng)
        text = f"{target.name} is from a place founded in {year}."
        group = [(target.doc_id, 1), (place.doc_id, 2)]
        return text, group, self._trace("place_chain", "place_year", place.year, year, hop=place.doc_id)

    def _partner_chain(self, target: _Entity, truthful: bool):
        partner = self.by_id[target.partner]
        general = family(partner.kind)
        verb = YEAR_VERBS[general]
        year = partner.year if truthful else _perturbed_year(partner.year, self.rng)
        text = f"{target.name} worked with {article(general)} {general} {verb} in {year}."
        group = [(target.doc_id, 3), (partner.doc_id, 2)]
        return text, group, self._trace("partner_chain", "partner_year", partner.year, year, hop=partner.doc_id)

    @staticmethod
    def _trace(rule: str, attribute: str, fact, claimed, hop: str | None = None) -> dict:
        return {"rule": rule, "attribute": attribute, "fact": fact, "claimed": claimed, "hop": hop}


def _ontology_lines() -> List[str]:
    kinds = sorted(set(KIND_PARENTS) | set(KIND_PARENTS.values()))
    lines = ["# synthetic ontology: entity kinds and adjective antonyms"]
    lines += [f"LEMMA\t{k}\t{k}.n.01" for k in kinds]
    lines += [f"HYPER\t{child}.n.01\t{parent}.n.01" for child, parent in sorted(KIND_PARENTS.items())]
    lines += [f"ANT\t{a}\t{b}" for a, b in ANTONYMS]
    return lines


def _dev_split(claims: List[ClaimRecord], spec: SyntheticSpec, rng) -> tuple[List[int], List[int]]:
    per_label = int(spec.dev_fraction * spec.claims_per_label)
    dev = set()
    for label in (Label.SUPPORTS, Label.REFUTES, Label.NEI):
        ids = [c.id for c in claims if c.label == label]
        dev.update(ids[i] for i in rng.choice(len(ids), size=min(per_label, len(ids)), replace=False))
    train = [c.id for c in claims if c.id not in dev]
    return train, sorted(dev)


def generate_synthetic(spec: SyntheticSpec, seed: int = 0) -> SyntheticData:
    rng = np.random.default_rng(seed)
    places, plain, clusters = _build_world(spec, rng)
    by_id = {e.doc_id: e for e in places + plain}
    by_id.update({e.doc_id: e for cluster in clusters for e in cluster})

    documents = [_place_document(p, spec, rng) for p in places]
    documents += [_entity_document(e, by_id, spec, rng) for e in plain]
    documents += [_entity_document(e, by_id, spec, rng) for cluster in clusters for e in cluster]
    documents.sort(key=lambda d: d.id)

    clustered = [e for cluster in clusters for e in cluster]
    factory = _ClaimFactory(places, by_id, rng)
    claims, trace = [], []
    for label in (Label.SUPPORTS, Label.REFUTES, Label.NEI):
        for _ in range(spec.claims_per_label):
            if clustered and rng.random() < spec.disambiguative_claim_fraction:
                target = _pick(rng, clustered)
            else:
                target = _pick(rng, plain)
            chain = rng.random() < spec.chain_fraction
            if label == Label.SUPPORTS:
                text, group, row = factory.supports(target, chain)
            elif label == Label.REFUTES:
                text, group, row = factory.refutes(target, chain)
            else:
                text, group, row = factory.not_enough_info(target)
            derived = derive_label(row["attribute"], row["fact"], row["claimed"])
            claim_id = len(claims) + 1
            claims.append(ClaimRecord(claim_id, text, derived, [group] if group else []))
            trace.append({"id": claim_id, "target": target.doc_id, "label": derived.value, **row})

    train_ids, dev_ids = _dev_split(claims, spec, rng)
    stats = {
        "seed": seed,
        "n_docs": len(documents),
        "n_disambiguative": len(clustered),
        "cluster_sizes": [len(c) for c in clusters],
        "n_places": len(places),
        "n_claims": {label.value: sum(c.label == label for c in claims) for label in Label},
        "n_chain_claims": sum(row["hop"] is not None for row in trace),
        "n_disambiguative_claims": sum("(" in row["target"] for row in trace),
        "n_train": len(train_ids),
        "n_dev": len(dev_ids),
    }
    logger.info(
        "Generated %d documents (%d disambiguative) and %d claims",
        stats["n_docs"],
        stats["n_disambiguative"],
        len(claims),
    )
    return SyntheticData(documents, claims, trace, _ontology_lines(), train_ids, dev_ids, stats)


def write_synthetic(data: SyntheticData, out_dir: str | Path) -> List[Path]:
    """Write corpus, claims (all, train, dev), ontology, trace and stats; record them in the manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [
        write_jsonl(out_dir / "corpus.jsonl", (d.to_json() for d in data.documents)),
        write_jsonl(out_dir / "claims.jsonl", (c.to_json() for c in data.claims)),
        write_jsonl(out_dir / "train.jsonl", (c.to_json() for c in data.split("train"))),
        write_jsonl(out_dir / "dev.jsonl", (c.to_json() for c in data.split("dev"))),
        write_jsonl(out_dir / "trace.jsonl", data.trace),
    ]
    ontology = out_dir / "ontology.tsv"
    ontology.write_text("\n".join(data.ontology_lines) + "\n", encoding="utf-8")
    paths.append(ontology)
    paths.append(write_json(out_dir / "synthetic.json", data.stats))
    update_manifest(out_dir, *paths)
    return paths
