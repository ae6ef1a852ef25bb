"""Small WordNet-style lexical ontology: lemmas, synsets, hypernym edges, antonyms.

File format, one record per line (tab or space separated, ``#`` comments)::

    LEMMA  dog      dog.n.01
    HYPER  dog.n.01 canine.n.01
    ANT    hot      cold
"""

import logging
from collections import defaultdict, deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Mapping, NamedTuple

from factcheck.corpus.text import lemma
from factcheck.errors import OntologyError, ParseError
from factcheck.settings import settings

logger = logging.getLogger(__name__)


class Direction(str, Enum):
    HYPONYM = "hyponym"
    HYPERNYM = "hypernym"


class Relation(NamedTuple):
    """How the second lemma relates to the first one."""

    direction: Direction
    edges: int


@dataclass(frozen=True)
class OntologyGraph:
    lemma_synsets: Mapping[str, frozenset[str]]
    hypernyms: Mapping[str, frozenset[str]]
    antonyms: Mapping[str, frozenset[str]]

    @classmethod
    def empty(cls) -> "OntologyGraph":
        return cls({}, {}, {})

    @property
    def synsets(self) -> set[str]:
        return {s for group in self.lemma_synsets.values() for s in group}

    @property
    def edge_count(self) -> int:
        return sum(len(parents) for parents in self.hypernyms.values())

    def synsets_of(self, word: str) -> frozenset[str]:
        return self.lemma_synsets.get(lemma(word), frozenset())

    def are_antonyms(self, a: str, b: str) -> bool:
        return lemma(b) in self.antonyms.get(lemma(a), ())

    def closure(self, synset: str, depth: int) -> Iterator[tuple[str, int]]:
        """Hypernym ancestors of ``synset`` breadth-first with their edge distance."""
        seen = {synset}
        queue = deque([(synset, 0)])
        while queue:
            node, dist = queue.popleft()
            if dist == depth:
                continue
            for parent in sorted(self.hypernyms.get(node, ())):
                if parent not in seen:
                    seen.add(parent)
                    yield parent, dist + 1
                    queue.append((parent, dist + 1))


def _fields(line: str) -> list[str]:
    return line.split("\t") if "\t" in line else line.split()


def load_ontology(stream: Iterable[str]) -> OntologyGraph:
    lemma_synsets = defaultdict(set)
    edges = []
    antonyms = defaultdict(set)
    for line_number, line in enumerate(stream, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        kind, *rest = [f.strip() for f in _fields(line) if f.strip()]
        if kind == "LEMMA" and len(rest) >= 2:
            lemma_synsets[lemma(rest[0])].update(rest[1:])
        elif kind == "HYPER" and len(rest) == 2:
            edges.append((line_number, rest[0], rest[1]))
        elif kind == "ANT" and len(rest) == 2:
            a, b = lemma(rest[0]), lemma(rest[1])
            antonyms[a].add(b)
            antonyms[b].add(a)
        else:
            raise ParseError(f"unrecognised ontology record {line!r}", line_number)

    known = {s for group in lemma_synsets.values() for s in group}
    hypernyms = defaultdict(set)
    for line_number, child, parent in edges:
        for synset in (child, parent):
            if synset not in known:
                raise OntologyError(f"line {line_number}: synset {synset!r} has no LEMMA record")
        hypernyms[child].add(parent)
    _check_acyclic(hypernyms)

    graph = OntologyGraph(
        lemma_synsets={k: frozenset(v) for k, v in lemma_synsets.items()},
        hypernyms={k: frozenset(v) for k, v in hypernyms.items()},
        antonyms={k: frozenset(v) for k, v in antonyms.items()},
    )
    logger.info(
        "Loaded ontology: %d lemmas, %d synsets, %d hypernym edges",
        len(graph.lemma_synsets),
        len(known),
        graph.edge_count,
    )
    return graph


def _check_acyclic(hypernyms: Mapping[str, set[str]]):
    state: dict[str, int] = {}  # 1 = on stack, 2 = done
    for root in sorted(hypernyms):
        if root in state:
            continue
        stack = [(root, iter(sorted(hypernyms.get(root, ()))))]
        state[root] = 1
        while stack:
            node, children = stack[-1]
            child = next(children, None)
            if child is None:
                state[node] = 2
                stack.pop()
            elif state.get(child) == 1:
                raise OntologyError(f"hypernym cycle through {child!r}")
            elif child not in state:
                state[child] = 1
                stack.append((child, iter(sorted(hypernyms.get(child, ())))))


def _upward_distance(sources: Iterable[str], targets: frozenset[str], graph, depth: int) -> int | None:
    best = None
    for synset in sources:
        for ancestor, dist in graph.closure(synset, depth):
            if ancestor in targets and (best is None or dist < best):
                best = dist
    return best


def hypernym_distance(a: str, b: str, graph: OntologyGraph, max_depth: int | None = None) -> Relation | None:
    """Shortest hypernym-edge path between the synsets of ``a`` and ``b``.

    ``Relation(HYPERNYM, d)`` means ``b`` generalizes ``a``; ``HYPONYM`` the
    reverse. Zero-length paths are excluded; paths longer than ``max_depth``
    count as unreachable. On equal distances both ways, HYPERNYM wins.
    """
    depth = settings.ONTOLOGY_MAX_DEPTH if max_depth is None else max_depth
    syn_a, syn_b = graph.synsets_of(a), graph.synsets_of(b)
    if not syn_a or not syn_b:
        return None
    up = _upward_distance(syn_a, syn_b, graph, depth)
    down = _upward_distance(syn_b, syn_a, graph, depth)
    if up is not None and (down is None or up <= down):
        return Relation(Direction.HYPERNYM, up)
    if down is not None:
        return Relation(Direction.HYPONYM, down)
    return None
