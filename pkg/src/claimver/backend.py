"""Prompt construction and chat-completion clients (HTTP and mock)."""

from __future__ import annotations

import hashlib
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import requests

from .errors import BackendAuthError, BackendError, PromptError, UnknownPromptError
from .kg import KnowledgeGraph, Triplet
from .retrieval import RetrievedTriplets
from .text import normalized_find

logger = logging.getLogger(__name__)

# Instruction sent before each verification request. The {Input Text} and
# {Retrieved Triplets} slots are filled literally, never via str.format, so
# braces in user text survive.
VERIFICATION_TEMPLATE = """\
Analyze text against provided triplets, classifying claims as "Attributable", "Contradictory", or "Extrapolatory".
Justify your classification using the following structure:
- "text_span": Text under evaluation.
- "prediction": Category of the text (Attributable / Contradictory / Extrapolatory).
- "triplets": Relevant triplets (if any, else "NA").
- "rationale": Reason for classification.
For multiple claims, number each component (e.g., "text_span1", "prediction1",..). Use "NA" for inapplicable keys.
Example:
"text_span1": "Specific claim",
"prediction1": "Attributable/Contradictory/Extrapolatory",
"triplets1": "Relevant triplets",
"rationale1": "Prediction justification",
...
Input for analysis:
-Text: {Input Text}
-Triplets: {Retrieved Triplets}
"""

# Few-shot instruction for labeling one text span against triplets, used to
# produce training/evaluation records.
DATAGEN_TEMPLATE = """\
**Text Span Attribution Verification**

**Objective:** Predict whether the text span is "Attributable", "Contradictory", or "Extrapolatory" based on the information provided in the triplets.

**Instructions:**

1. **Read the Full Text:**
- Understand the context and content of the full text string.

2. **Examine the Text Span:**
- Determine the claims made within the text span.

3. **Analyze the Triplets:**
- Evaluate if the triplets support, refute, or neither support nor refute the claims in the text span.

4. **Make Your Prediction:**
- Classify the text span as "Attributable", "Contradictory", or "Extrapolatory" based on your analysis of the triplets.

5. **Provide Rationale:**
- Clearly explain your reasoning for the classification.

**Classification Criteria:**

- **"Attributable"**: The text span is sufficiently supported by the triplet(s). All claims in the text span are directly present in the triplet information.
- **"Contradictory"**: The text span is conclusively refuted by the triplet(s). All claims in the text span are directly contradicted by the triplet information.
- **"Extrapolatory"**: The triplet(s) can neither support nor refute the text span. The information provided is either irrelevant, indirect, or related but not sufficient to support or refute the text span.

**Example:**

**Full Text:** "Albert Einstein is widely recognized as the father of modern physics. He was awarded the Nobel Prize in Physics for his services to Theoretical Physics."

**Text Span:** "He was awarded the Nobel Prize in Physics."

**Triplets:** [("Albert Einstein", "award received", "Nobel Prize in Physics")]

**Sample Evaluation:**
- **Prediction:** "Attributable"
- **Rationale:** "The triplet directly supports the claim that Albert Einstein received the Nobel Prize in Physics."

**Example:**

**Full Text:** "Isaac Newton discovered the element radium."

**Text Span:** "Isaac Newton discovered radium."

**Triplets:** [("Marie Curie", "discovered", "radium")]

**Sample Evaluation:**
- **Prediction:** "Contradictory"
- **Rationale:** "The triplet states that Marie Curie discovered radium, contradicting the claim that Isaac Newton discovered it."

**Example:**

**Full Text:** "The Eiffel Tower is a wrought-iron lattice tower that was opened in 1889."

**Text Span:** "The Eiffel Tower is a wrought-iron lattice tower that was opened in 1889."

**Triplets:** [("Eiffel Tower", "located in", "Paris")]

**Sample Evaluation:**
- **Prediction:** "Extrapolatory"
- **Rationale:** "The triplet states that the Eiffel Tower is located in Paris, which is related but not sufficient to confirm or refute that it was opened in 1889."

**Verification Checklist:**

- [ ] The prediction accurately reflects the relationship between the text span and the triplets.
- [ ] The rationale clearly explains the classification based on the triplets.
- [ ] The explanation is free from irrelevant information.

**Response Format:**
Provide your evaluation in the following JSON format:
- "prediction": "Attributable", "Contradictory", or "Extrapolatory"
- "rationale": "Your comments here"

**Inputs to Evaluate**

**Full text:** "{full_text}"
**Text span:** "{text_span}"
**Triplets:** {triplets}
"""

_VERIFICATION_SPLIT = "Input for analysis:\n"
_DATAGEN_SPLIT = "**Inputs to Evaluate**\n\n"


@dataclass(frozen=True)
class PromptBundle:
    """A rendered prompt: fixed instruction plus the per-request input block."""

    instruction: str
    rendered_input: str

    @property
    def text(self) -> str:
        return self.instruction + self.rendered_input


def _render(template: str, slots: list[tuple[str, str]]) -> str:
    """Fill placeholders in template order.

    Each placeholder is located in the not-yet-consumed remainder of the
    template, so substituted values can never be mistaken for later slots.
    """
    parts: list[str] = []
    rest = template
    for placeholder, value in slots:
        head, sep, tail = rest.partition(placeholder)
        if not sep:
            raise PromptError(f"template slot {placeholder!r} missing")
        parts.append(head)
        parts.append(value)
        rest = tail
    parts.append(rest)
    return "".join(parts)


def triplet_labels(kg: KnowledgeGraph,
                   triplets: RetrievedTriplets | Iterable[Triplet]) -> list[tuple[str, str, str]]:
    """Resolve stored triplets to (subject label, predicate, object label)."""
    items = triplets.triplets if isinstance(triplets, RetrievedTriplets) else triplets
    return [(kg.label_of(t.subject), t.predicate, kg.label_of(t.object)) for t in items]


def serialize_triplets(labeled: Iterable[tuple[str, str, str]]) -> str:
    """One (s, p, o) line per triplet, in the given order."""
    return "\n".join(f"({s}, {p}, {o})" for s, p, o in labeled)


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def serialize_triplets_bracketed(labeled: Iterable[tuple[str, str, str]]) -> str:
    """Bracketed tuple-list form, e.g. [("s", "p", "o"), ("s2", "p2", "o2")]."""
    inner = ", ".join(f"({_quote(s)}, {_quote(p)}, {_quote(o)})" for s, p, o in labeled)
    return f"[{inner}]"


def build_verification_prompt(text: str, triplets: RetrievedTriplets,
                              kg: KnowledgeGraph) -> PromptBundle:
    """Render the verification instruction with the text and its triplets.

    Triplets appear once each, in retrieval order, as (subject label,
    predicate, object label) lines.
    """
    serialized = serialize_triplets(triplet_labels(kg, triplets))
    filled = _render(VERIFICATION_TEMPLATE,
                     [("{Input Text}", text), ("{Retrieved Triplets}", serialized)])
    instruction, _, rendered_input = filled.partition(_VERIFICATION_SPLIT)
    return PromptBundle(instruction + _VERIFICATION_SPLIT, rendered_input)


def _span_in_text(full_text: str, text_span: str) -> bool:
    # A quoted span often gains terminal punctuation the source lacks at that
    # position; ignore it, and fall back to case/whitespace-folded search.
    if text_span in full_text:
        return True
    stripped = text_span.rstrip(" \t\n.?!")
    if not stripped:
        return False
    return stripped in full_text or normalized_find(full_text, stripped) is not None


def build_datagen_prompt(full_text: str, text_span: str,
                         triplets: RetrievedTriplets | Iterable[Triplet],
                         kg: KnowledgeGraph) -> PromptBundle:
    """Render the span-labeling instruction for one (text, span, triplets) item.

    The span must occur in full_text (trailing sentence punctuation and
    case/whitespace differences are tolerated).
    """
    if not _span_in_text(full_text, text_span):
        raise PromptError("text_span must be a substring of full_text")
    serialized = serialize_triplets_bracketed(triplet_labels(kg, triplets))
    filled = _render(DATAGEN_TEMPLATE,
                     [("{full_text}", full_text), ("{text_span}", text_span),
                      ("{triplets}", serialized)])
    instruction, _, rendered_input = filled.partition(_DATAGEN_SPLIT)
    return PromptBundle(instruction + _DATAGEN_SPLIT, rendered_input)


def _default_api_key() -> str:
    return os.environ.get("CLAIMVER_API_KEY", "")


@dataclass(frozen=True)
class BackendConfig:
    """Connection settings for a chat-completion endpoint."""

    base_url: str
    model: str
    api_key: str = field(default_factory=_default_api_key, repr=False)
    timeout: float = 30.0
    max_retries: int = 2
    temperature: float = 0.0
    backoff_base: float = 0.5
    concurrency: int = 4

    def __post_init__(self):
        if not self.base_url:
            raise ValueError("base_url must be non-empty")
        if not self.model:
            raise ValueError("model must be non-empty")
        if self.timeout <= 0:
            raise ValueError(f"timeout must be > 0, got {self.timeout}")
        if self.max_retries < 0:
            raise ValueError(f"max_retries must be >= 0, got {self.max_retries}")
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if self.backoff_base <= 0:
            raise ValueError(f"backoff_base must be > 0, got {self.backoff_base}")
        if self.concurrency < 1:
            raise ValueError(f"concurrency must be >= 1, got {self.concurrency}")


class ChatBackend:
    """Thread-safe client for a chat-completion endpoint.

    In-flight requests are capped by config.concurrency; 5xx responses and
    timeouts are retried with exponential backoff, 4xx never.
    """

    def __init__(self, config: BackendConfig):
        self.config = config
        self._session = requests.Session()
        self._slots = threading.Semaphore(config.concurrency)

    def complete(self, prompt: PromptBundle | str) -> str:
        text = prompt.text if isinstance(prompt, PromptBundle) else prompt
        cfg = self.config
        url = cfg.base_url.rstrip("/") + "/chat/completions"
        body = {
            "model": cfg.model,
            "temperature": cfg.temperature,
            "messages": [{"role": "user", "content": text}],
        }
        headers = {}
        if cfg.api_key:
            headers["Authorization"] = f"Bearer {cfg.api_key}"
        last_error = "exhausted retries"
        for attempt in range(cfg.max_retries + 1):
            if attempt:
                time.sleep(cfg.backoff_base * 2 ** (attempt - 1))
            with self._slots:
                try:
                    resp = self._session.post(url, json=body, headers=headers,
                                              timeout=cfg.timeout)
                except requests.Timeout:
                    last_error = "request timed out"
                    logger.warning("completion attempt %d timed out", attempt + 1)
                    continue
                except requests.RequestException as exc:
                    last_error = f"connection failed: {exc}"
                    logger.warning("completion attempt %d failed: %s", attempt + 1, exc)
                    continue
            if resp.status_code in (401, 403):
                raise BackendAuthError(f"endpoint rejected credentials (HTTP {resp.status_code})")
            if 400 <= resp.status_code < 500:
                raise BackendError(f"request rejected (HTTP {resp.status_code}): {resp.text[:200]}")
            if resp.status_code != 200:
                last_error = f"HTTP {resp.status_code}"
                logger.warning("completion attempt %d got HTTP %d", attempt + 1, resp.status_code)
                continue
            return _extract_content(resp)
        raise BackendError(f"completion failed after {cfg.max_retries + 1} attempts: {last_error}")


def _extract_content(resp: requests.Response) -> str:
    try:
        payload = resp.json()
        content = payload["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise BackendError(f"malformed endpoint response: {exc}") from exc
    if not isinstance(content, str):
        raise BackendError("malformed endpoint response: content is not a string")
    return content


def complete(config: BackendConfig, prompt: PromptBundle | str) -> str:
    """One-shot completion with a throwaway client."""
    return ChatBackend(config).complete(prompt)


def prompt_digest(prompt: PromptBundle | str) -> str:
    """Stable identity of a prompt: sha256 over its full text."""
    text = prompt.text if isinstance(prompt, PromptBundle) else prompt
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def mock_complete(fixture_table: Mapping[str, str], prompt: PromptBundle | str) -> str:
    """Return the canned response for a prompt, keyed by its digest."""
    digest = prompt_digest(prompt)
    if digest not in fixture_table:
        raise UnknownPromptError(f"no canned response for prompt digest {digest[:12]}")
    return fixture_table[digest]


class MockBackend:
    """Deterministic in-memory backend for tests and offline runs."""

    def __init__(self, responses: Mapping[str, str] | None = None, default: str | None = None):
        self.responses = dict(responses or {})
        self.default = default
        self.calls: list[str] = []

    def add(self, prompt: PromptBundle | str, response: str):
        self.responses[prompt_digest(prompt)] = response

    def complete(self, prompt: PromptBundle | str) -> str:
        digest = prompt_digest(prompt)
        self.calls.append(digest)
        if digest in self.responses:
            return self.responses[digest]
        if self.default is not None:
            return self.default
        raise UnknownPromptError(f"no canned response for prompt digest {digest[:12]}")
