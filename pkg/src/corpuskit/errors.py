"""Exception hierarchy for the toolkit."""

from __future__ import annotations


class CorpuskitError(Exception):
    """Base class for all toolkit errors."""


class CorpusParseError(CorpuskitError):
    """A corpus line could not be parsed into a Document."""

    def __init__(self, path: str, line_number: int, message: str):
        super().__init__(f"{path}:{line_number}: {message}")
        self.path = path
        self.line_number = line_number
        self.message = message


class ManifestError(CorpuskitError):
    """A run manifest is structurally invalid."""


class DegenerateTrainingSetError(CorpuskitError):
    """Classifier training was asked to fit an empty class."""


class DocumentTooShortError(CorpuskitError):
    """Document has no shingles at the configured width; caller keeps it."""


class SignatureMismatchError(CorpuskitError):
    """MinHash signatures built with different k or permutation seed."""


class SpecMismatchError(CorpuskitError):
    """Tokenizer spec differs from the one an index was built with."""


class EndpointError(CorpuskitError):
    """A remote endpoint call failed (network, HTTP status, bad JSON)."""


class EndpointProtocolError(EndpointError):
    """Endpoint answered, but the payload violates the wire contract."""


class ZeroProbabilityError(CorpuskitError):
    """Model assigned probability zero to an observed token."""

    def __init__(self, position: int, token: str):
        super().__init__(
            f"model assigns zero probability to token {token!r} at position {position}"
        )
        self.position = position
        self.token = token


class GatePolicyError(CorpuskitError):
    """Quality gate ran into a source with no policy entry."""


class ExecutorError(CorpuskitError):
    """Sandbox executor could not run at all (spawn/protocol failure)."""


class PartialCandidateError(CorpuskitError):
    """Fewer candidates than requested survived retries.

    Carries what succeeded so callers can decide to keep going.
    """

    def __init__(self, requested: int, partial):
        super().__init__(
            f"generated {len(partial.candidates)} of {requested} requested candidates"
        )
        self.requested = requested
        self.partial = partial


class DomainShortfallError(CorpuskitError):
    """Diversity sampling asked for more samples than a domain holds."""


class UnlabeledSampleError(CorpuskitError):
    """Difficulty compression hit a sample without a difficulty label."""


class StageFailure(CorpuskitError):
    """A pipeline stage failed; carries the partial run report."""

    def __init__(self, stage: str, cause: Exception, report):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.report = report
