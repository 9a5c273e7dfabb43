"""Error types shared across the package, each with a stable machine code."""
from __future__ import annotations


class CharshapeError(Exception):
    """Base class; `code` is the machine-readable identifier used on the wire."""

    code = "error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__


# --- character state ---

class EmptyValue(CharshapeError):
    code = "empty_value"


class ValueTooLong(CharshapeError):
    code = "value_too_long"


class NotBotMessage(CharshapeError):
    code = "not_bot_message"


class UnknownMessage(CharshapeError):
    code = "unknown_message"


# --- attribute registry ---

class RegistryParseError(CharshapeError):
    code = "registry_parse_error"

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class RegistryValidationError(CharshapeError):
    code = "registry_validation_error"


class UnknownAttribute(CharshapeError):
    code = "unknown_attribute"


class NoneRemaining(CharshapeError):
    code = "none_remaining"


# --- concept suggestions ---

class SourceUnavailable(CharshapeError):
    code = "source_unavailable"


class NoEdges(CharshapeError):
    code = "no_edges"


class NotSuggestible(CharshapeError):
    code = "not_suggestible"


class Exhausted(CharshapeError):
    code = "exhausted"


# --- reply generation ---

class BackendUnavailable(CharshapeError):
    code = "backend_unavailable"


class MalformedResponse(CharshapeError):
    code = "malformed_response"


# --- engine ---

class NoCandidatesPending(CharshapeError):
    code = "no_candidates_pending"


class IndexOutOfRange(CharshapeError):
    code = "index_out_of_range"


# --- persistence ---

class StoreUnavailable(CharshapeError):
    code = "store_unavailable"


class SessionNotFound(CharshapeError):
    code = "not_found"


class VersionMismatch(CharshapeError):
    code = "version_mismatch"


class CorruptDocument(CharshapeError):
    code = "corrupt_document"


# --- replay tooling ---

class ScriptParseError(CharshapeError):
    code = "script_parse_error"

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class ExpectationMismatch(CharshapeError):
    code = "expectation_mismatch"


class NoSessions(CharshapeError):
    code = "no_sessions"
