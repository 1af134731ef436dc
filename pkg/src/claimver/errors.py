"""Exception types shared across the package."""

from __future__ import annotations


class ClaimverError(Exception):
    """Base class for all errors raised by this package."""


class KgLoadError(ClaimverError):
    """A knowledge-graph snapshot could not be loaded.

    Carries one message per rejected row, each prefixed with its line number.
    """

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors) if self.errors else "load failed")


class UnknownNodeError(ClaimverError):
    """A node id was requested that is not present in the graph."""

    def __init__(self, node_id: str):
        self.node_id = node_id
        super().__init__(f"unknown node id: {node_id!r}")


class PromptError(ClaimverError):
    """A prompt could not be built from the given inputs."""


class BackendError(ClaimverError):
    """A completion request failed."""


class BackendAuthError(BackendError):
    """The completion endpoint rejected the credentials (4xx auth failure)."""


class UnknownPromptError(BackendError):
    """The mock backend has no canned response for this prompt."""


class ResponseParseError(ClaimverError):
    """No usable claim group could be extracted from a model response."""

    def __init__(self, message: str, raw: str):
        self.raw = raw
        super().__init__(message)


class PipelineError(ClaimverError):
    """A pipeline stage failed; names the stage and keeps partial diagnostics."""

    def __init__(self, stage: str, message: str, diagnostics: list[str] | None = None):
        self.stage = stage
        self.diagnostics = list(diagnostics or [])
        super().__init__(f"[{stage}] {message}")
