"""Exception types shared across the toolkit."""

from __future__ import annotations


class SketchkitError(Exception):
    """Base class for all toolkit errors."""


class LexError(SketchkitError):
    """Raised when source text cannot be turned into a token stream.

    kind is one of UNTERMINATED_STRING, INCONSISTENT_INDENT,
    INVALID_ENCODING. line/col locate the offending position (1-based
    line, 0-based column); both are 0 when unknown.
    """

    UNTERMINATED_STRING = "unterminated-string"
    INCONSISTENT_INDENT = "inconsistent-indent"
    INVALID_ENCODING = "invalid-encoding"

    def __init__(self, kind: str, line: int = 0, col: int = 0, detail: str = ""):
        self.kind = kind
        self.line = line
        self.col = col
        self.detail = detail
        msg = f"{kind} at line {line}, col {col}"
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)


class EmptyCandidateList(SketchkitError):
    """vote() was called with no candidates."""


class EmptyCorpus(SketchkitError):
    """An epoch plan was requested over zero files."""


class DomainError(SketchkitError):
    """A numeric estimator was called outside its precondition domain."""


class MissingProblem(SketchkitError):
    """A candidate set references a task_id absent from the problem set."""


class BlockAlignmentError(SketchkitError):
    """A sketched block could not be aligned with its original block."""


class SandboxUnavailable(SketchkitError):
    """The external execution harness could not be spawned."""


class CompletionError(SketchkitError):
    """Base class for completion-endpoint failures."""


class EndpointTimeout(CompletionError):
    """The endpoint did not answer within the configured timeout."""


class RateLimited(CompletionError):
    """The endpoint kept answering 429 after all retries."""


class MalformedResponse(CompletionError):
    """The endpoint answered with an unparseable or schema-violating body."""


class AuthFailure(CompletionError):
    """The endpoint rejected the bearer token (401/403). Never retried."""


class ServerError(CompletionError):
    """The endpoint kept answering 5xx after all retries."""
