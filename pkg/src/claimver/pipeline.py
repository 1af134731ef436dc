"""End-to-end orchestration: text in, verification report out.

Flow: preprocess and link entities, chunk if requested, then per chunk
retrieve evidence paths, build the prompt, call the backend, parse and
validate the claims. Scoring and the document score run once over the
concatenated claims. Failures surface as PipelineError tagged with the stage
that failed, carrying any diagnostics gathered so far.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Any, Callable, Iterator, Optional, Sequence

from .backend import (BackendConfig, ChatBackend, PromptBundle,
                      build_datagen_prompt, build_verification_prompt)
from .errors import BackendError, ClaimverError, PipelineError, ResponseParseError
from .kg import KnowledgeGraph
from .linking import (LinkedEntity, PreprocessHook, TextChunk, chunk_text,
                      preprocess, split_sentences)
from .parsing import ClaimResult, parse_response, validate_claims
from .report import VerificationReport, build_report
from .retrieval import RetrievalConfig, RetrievedTriplets, retrieve
from .scoring import Embedder, ScoringConfig, kg_attribution_score, score_claims

logger = logging.getLogger(__name__)

Completer = Callable[[PromptBundle], str]

_PARALLEL_CHUNKS = 4


def _as_completer(backend) -> Completer:
    if isinstance(backend, BackendConfig):
        return ChatBackend(backend).complete
    if hasattr(backend, "complete"):
        return backend.complete
    if callable(backend):
        return backend
    raise TypeError(f"backend must be a BackendConfig, a client, or a callable: {backend!r}")


@dataclass
class _ChunkOutcome:
    retrieved: RetrievedTriplets
    claims: list[ClaimResult]
    diagnostics: list[str]


def _chunk_entities(chunk: TextChunk, entities: Sequence[LinkedEntity]) -> list[LinkedEntity]:
    lo, hi = chunk.offset, chunk.offset + len(chunk.text)
    return [e for e in entities if lo <= e.start and e.end <= hi]


def _process_chunk(kg: KnowledgeGraph, chunk: TextChunk,
                   entities: Sequence[LinkedEntity], completer: Completer,
                   retrieval_cfg: RetrievalConfig) -> _ChunkOutcome:
    diagnostics: list[str] = []
    inside = _chunk_entities(chunk, entities)
    seeds = list(dict.fromkeys(e.node for e in inside))

    try:
        retrieved = retrieve(kg, seeds, retrieval_cfg)
    except ClaimverError as exc:
        raise PipelineError("triplet-retrieval", str(exc), diagnostics) from exc

    try:
        prompt = build_verification_prompt(chunk.text, retrieved, kg)
    except ClaimverError as exc:
        raise PipelineError("prompt", str(exc), diagnostics) from exc

    try:
        raw = completer(prompt)
    except PipelineError:
        raise
    except (BackendError, OSError) as exc:
        raise PipelineError("llm-backend", str(exc), diagnostics) from exc

    try:
        raws = parse_response(raw, diagnostics)
    except ResponseParseError as exc:
        raise PipelineError("response-parser", str(exc), diagnostics) from exc

    claims = validate_claims(raws, chunk.text, retrieved, kg)
    if chunk.offset:
        claims = [
            replace(c, start=c.start + chunk.offset, end=c.end + chunk.offset)
            if c.start is not None else c
            for c in claims
        ]
    return _ChunkOutcome(retrieved=retrieved, claims=claims, diagnostics=diagnostics)


def _merge_retrieved(outcomes: Sequence[_ChunkOutcome]) -> RetrievedTriplets:
    seen = {}
    for outcome in outcomes:
        for path in outcome.retrieved.paths:
            seen.setdefault(path, None)
    return RetrievedTriplets(paths=tuple(seen))


def run_pipeline(kg: KnowledgeGraph, text: str, backend,
                 retrieval_cfg: Optional[RetrievalConfig] = None,
                 scoring_cfg: Optional[ScoringConfig] = None, *,
                 embedder: Optional[Embedder] = None,
                 hooks: Sequence[PreprocessHook] = (),
                 chunk_chars: Optional[int] = None,
                 extra_config: Optional[dict[str, Any]] = None) -> VerificationReport:
    """Verify one input text against the graph and assemble the report.

    backend may be a BackendConfig, any object with complete(prompt) -> str,
    or a bare callable. Chunks are processed concurrently (bounded) when the
    input was split; claims keep chunk order and the document score covers
    them all.
    """
    retrieval_cfg = retrieval_cfg or RetrievalConfig()
    scoring_cfg = scoring_cfg or ScoringConfig()
    completer = _as_completer(backend)
    if not text:
        raise PipelineError("input", "input text is empty")

    doc_diagnostics: list[str] = []
    try:
        text, entities = preprocess(kg, text, hooks)
    except Exception as exc:
        raise PipelineError("preprocess", str(exc)) from exc
    if not text:
        raise PipelineError("preprocess", "preprocessing left no text")
    for e in entities:
        if e.alternates:
            doc_diagnostics.append(
                f"ambiguous mention {e.mention!r} at {e.start}: "
                f"linked {e.node}, also matches {', '.join(e.alternates)}")

    if chunk_chars:
        chunks = chunk_text(text, chunk_chars)
        if len(chunks) > 1:
            doc_diagnostics.append(f"input split into {len(chunks)} chunks")
    else:
        chunks = [TextChunk(text, 0)]

    try:
        if len(chunks) == 1:
            outcomes = [_process_chunk(kg, chunks[0], entities, completer, retrieval_cfg)]
        else:
            workers = min(_PARALLEL_CHUNKS, len(chunks))
            with ThreadPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(
                    lambda ch: _process_chunk(kg, ch, entities, completer, retrieval_cfg),
                    chunks))
    except PipelineError as exc:
        exc.diagnostics[:0] = doc_diagnostics
        raise

    claims = [c for outcome in outcomes for c in outcome.claims]
    for outcome in outcomes:
        doc_diagnostics.extend(outcome.diagnostics)
    retrieved = _merge_retrieved(outcomes)

    try:
        scored = score_claims(claims, entities, kg, embedder, scoring_cfg)
        attribution = kg_attribution_score(scored, scoring_cfg)
    except ClaimverError as exc:
        raise PipelineError("scoring", str(exc), doc_diagnostics) from exc

    config: dict[str, Any] = {
        "retrieval": asdict(retrieval_cfg),
        "scoring": asdict(scoring_cfg),
        "chunk_chars": chunk_chars or 0,
    }
    if extra_config:
        config.update(extra_config)

    return build_report(kg, text, entities, retrieved, scored,
                        attribution.kas, config, doc_diagnostics)


def iter_datagen_records(kg: KnowledgeGraph, text: str,
                         retrieval_cfg: Optional[RetrievalConfig] = None,
                         backend=None,
                         hooks: Sequence[PreprocessHook] = ()) -> Iterator[dict[str, Any]]:
    """Span-labeling records for one document, one per sentence.

    Each record holds the document, the sentence span, the triplets retrieved
    for that sentence's entities (as label triples), and the rendered prompt;
    with a backend also the model's response.
    """
    retrieval_cfg = retrieval_cfg or RetrievalConfig()
    completer = _as_completer(backend) if backend is not None else None
    text, entities = preprocess(kg, text, hooks)
    offset = 0
    for sentence in split_sentences(text):
        chunk = TextChunk(sentence, offset)
        offset += len(sentence)
        span = sentence.strip()
        if not span:
            continue
        seeds = list(dict.fromkeys(e.node for e in _chunk_entities(chunk, entities)))
        retrieved = retrieve(kg, seeds, retrieval_cfg)
        labeled = [
            (kg.label_of(t.subject), t.predicate, kg.label_of(t.object))
            for t in retrieved.triplets
        ]
        prompt = build_datagen_prompt(text, span, retrieved, kg)
        record: dict[str, Any] = {
            "full_text": text,
            "text_span": span,
            "triplets": [list(t) for t in labeled],
            "prompt": prompt.text,
        }
        if completer is not None:
            record["response"] = completer(prompt)
        yield record
