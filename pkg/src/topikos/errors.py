"""Exception hierarchy.

Every error carries a stable machine-readable ``code`` so the HTTP layer
and the CLI can surface it without string matching.
"""

from __future__ import annotations


class TopikosError(Exception):
    """Base class for all package errors."""

    code = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


# --- taxonomy parsing / graph integrity ---------------------------------


class MalformedTriple(TopikosError):
    code = "malformed_triple"

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class CycleDetected(TopikosError):
    code = "cycle_detected"

    def __init__(self, path: list[str]):
        super().__init__("cycle through broader: " + " -> ".join(path))
        self.path = list(path)


class DanglingReference(TopikosError):
    code = "dangling_reference"

    def __init__(self, missing_id: str, referrer: str):
        super().__init__(f"{referrer!r} references undeclared topic {missing_id!r}")
        self.missing_id = missing_id
        self.referrer = referrer


class MissingPrefLabel(TopikosError):
    code = "missing_pref_label"

    def __init__(self, topic_id: str):
        super().__init__(f"topic {topic_id!r} has no preferred label")
        self.topic_id = topic_id


class SchemaViolation(TopikosError):
    code = "schema_violation"


class UnknownTopic(TopikosError):
    code = "unknown_topic"

    def __init__(self, topic_id: str, scheme_id: str | None = None):
        where = f" in scheme {scheme_id!r}" if scheme_id else ""
        super().__init__(f"unknown topic {topic_id!r}{where}")
        self.topic_id = topic_id
        self.scheme_id = scheme_id


class UnknownScheme(TopikosError):
    code = "unknown_scheme"

    def __init__(self, scheme_id: str):
        super().__init__(f"unknown scheme {scheme_id!r}")
        self.scheme_id = scheme_id


# --- embedding -----------------------------------------------------------


class EmptyText(TopikosError):
    code = "empty_text"


class DimensionMismatch(TopikosError):
    code = "dimension_mismatch"


class RemoteUnavailable(TopikosError):
    code = "remote_unavailable"


class RemoteBadResponse(TopikosError):
    code = "remote_bad_response"


# --- retrieval -----------------------------------------------------------


class EmptyIndex(TopikosError):
    code = "empty_index"


class UnknownRestrictedTopic(TopikosError):
    code = "unknown_restricted_topic"


class FingerprintMismatch(TopikosError):
    code = "fingerprint_mismatch"


# --- dialogue ------------------------------------------------------------


class EmptyQuery(TopikosError):
    code = "empty_query"


class NoMultiFieldScheme(TopikosError):
    code = "no_multi_field_scheme"


class SessionFinalized(TopikosError):
    code = "session_finalized"


class UnknownActionTarget(TopikosError):
    code = "unknown_action_target"


class NotFinalized(TopikosError):
    code = "not_finalized"


# --- configuration / service --------------------------------------------


class ConfigError(TopikosError):
    code = "config_error"


class UnknownSession(TopikosError):
    code = "unknown_session"

    def __init__(self, session_id: str):
        super().__init__(f"unknown session {session_id!r}")
        self.session_id = session_id
