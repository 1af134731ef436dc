"""Self-contained verification report model.

Records carry resolved labels and descriptions so a report can be rendered or
inspected without the knowledge graph it came from. Conversion to and from
plain dicts is lossless, which makes the JSON output a faithful serialization
of the report object.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence

from .kg import KnowledgeGraph, Triplet
from .linking import LinkedEntity
from .retrieval import KgPath, RetrievedTriplets
from .scoring import ScoredClaim


@dataclass(frozen=True)
class TripletRecord:
    s_id: str
    s_label: str
    p: str
    o_id: str
    o_label: str

    def to_dict(self) -> dict[str, Any]:
        return {"s_id": self.s_id, "s_label": self.s_label, "p": self.p,
                "o_id": self.o_id, "o_label": self.o_label}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "TripletRecord":
        return cls(s_id=d["s_id"], s_label=d["s_label"], p=d["p"],
                   o_id=d["o_id"], o_label=d["o_label"])


@dataclass(frozen=True)
class PathRecord:
    nodes: tuple[str, ...]
    edges: tuple[TripletRecord, ...]

    @property
    def endpoints(self) -> tuple[str, str]:
        return self.nodes[0], self.nodes[-1]

    def to_dict(self) -> dict[str, Any]:
        return {"nodes": list(self.nodes), "edges": [e.to_dict() for e in self.edges]}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "PathRecord":
        return cls(nodes=tuple(d["nodes"]),
                   edges=tuple(TripletRecord.from_dict(e) for e in d["edges"]))


@dataclass(frozen=True)
class EntityRecord:
    mention: str
    start: int
    end: int
    node: str
    label: str
    description: str = ""
    alternates: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {"mention": self.mention, "start": self.start, "end": self.end,
                "node": self.node, "label": self.label,
                "description": self.description, "alternates": list(self.alternates)}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "EntityRecord":
        return cls(mention=d["mention"], start=d["start"], end=d["end"],
                   node=d["node"], label=d["label"],
                   description=d.get("description", ""),
                   alternates=tuple(d.get("alternates", ())))


@dataclass(frozen=True)
class ClaimRecord:
    span: str
    start: Optional[int]
    end: Optional[int]
    prediction: str
    triplets: tuple[TripletRecord, ...]
    rationale: str
    ss: float
    epr: float
    tms: float
    claim_score: int
    diagnostics: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "span": self.span, "start": self.start, "end": self.end,
            "prediction": self.prediction,
            "triplets": [t.to_dict() for t in self.triplets],
            "rationale": self.rationale,
            "ss": self.ss, "epr": self.epr, "tms": self.tms,
            "claim_score": self.claim_score,
            "diagnostics": list(self.diagnostics),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ClaimRecord":
        return cls(span=d["span"], start=d["start"], end=d["end"],
                   prediction=d["prediction"],
                   triplets=tuple(TripletRecord.from_dict(t) for t in d["triplets"]),
                   rationale=d["rationale"], ss=d["ss"], epr=d["epr"], tms=d["tms"],
                   claim_score=d["claim_score"],
                   diagnostics=tuple(d.get("diagnostics", ())))


@dataclass(frozen=True)
class VerificationReport:
    """Everything produced for one input: entities, evidence, claims, scores."""

    input_text: str
    entities: tuple[EntityRecord, ...]
    retrieved_paths: tuple[PathRecord, ...]
    retrieved_triplets: tuple[TripletRecord, ...]
    claims: tuple[ClaimRecord, ...]
    n: int
    kas: float
    config: dict[str, Any] = field(default_factory=dict)
    diagnostics: tuple[str, ...] = ()

    def __post_init__(self):
        if self.n != len(self.claims):
            raise ValueError(f"n={self.n} does not match {len(self.claims)} claims")

    def to_dict(self) -> dict[str, Any]:
        return {
            "input_text": self.input_text,
            "entities": [e.to_dict() for e in self.entities],
            "retrieved_triplets": [t.to_dict() for t in self.retrieved_triplets],
            "retrieved_paths": [p.to_dict() for p in self.retrieved_paths],
            "claims": [c.to_dict() for c in self.claims],
            "n": self.n,
            "kas": self.kas,
            "config": self.config,
            "diagnostics": list(self.diagnostics),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "VerificationReport":
        return cls(
            input_text=d["input_text"],
            entities=tuple(EntityRecord.from_dict(e) for e in d["entities"]),
            retrieved_paths=tuple(PathRecord.from_dict(p) for p in d.get("retrieved_paths", ())),
            retrieved_triplets=tuple(TripletRecord.from_dict(t) for t in d["retrieved_triplets"]),
            claims=tuple(ClaimRecord.from_dict(c) for c in d["claims"]),
            n=d["n"], kas=d["kas"], config=dict(d.get("config", {})),
            diagnostics=tuple(d.get("diagnostics", ())),
        )


def triplet_record(kg: KnowledgeGraph, t: Triplet) -> TripletRecord:
    return TripletRecord(s_id=t.subject, s_label=kg.label_of(t.subject), p=t.predicate,
                         o_id=t.object, o_label=kg.label_of(t.object))


def path_record(kg: KnowledgeGraph, path: KgPath) -> PathRecord:
    return PathRecord(nodes=path.nodes,
                      edges=tuple(triplet_record(kg, e) for e in path.edges))


def entity_record(kg: KnowledgeGraph, entity: LinkedEntity) -> EntityRecord:
    node = kg.nodes[entity.node]
    return EntityRecord(mention=entity.mention, start=entity.start, end=entity.end,
                        node=entity.node, label=node.label,
                        description=node.description, alternates=entity.alternates)


def claim_record(kg: KnowledgeGraph, scored: ScoredClaim) -> ClaimRecord:
    c = scored.claim
    return ClaimRecord(span=c.span, start=c.start, end=c.end,
                       prediction=c.prediction.value,
                       triplets=tuple(triplet_record(kg, t) for t in c.rel_triplets),
                       rationale=c.rationale,
                       ss=scored.ss, epr=scored.epr, tms=scored.tms, claim_score=scored.cs,
                       diagnostics=c.diagnostics)


def build_report(kg: KnowledgeGraph, input_text: str,
                 entities: Sequence[LinkedEntity], retrieved: RetrievedTriplets,
                 scored: Sequence[ScoredClaim], kas: float,
                 config: dict[str, Any], diagnostics: Iterable[str] = ()) -> VerificationReport:
    return VerificationReport(
        input_text=input_text,
        entities=tuple(entity_record(kg, e) for e in entities),
        retrieved_paths=tuple(path_record(kg, p) for p in retrieved.paths),
        retrieved_triplets=tuple(triplet_record(kg, t) for t in retrieved.triplets),
        claims=tuple(claim_record(kg, sc) for sc in scored),
        n=len(scored), kas=kas, config=dict(config), diagnostics=tuple(diagnostics),
    )
