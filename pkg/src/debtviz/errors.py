"""Exception types shared across the package."""


class DebtvizError(Exception):
    """Base class for all debtviz errors."""


class UnsupportedLanguage(DebtvizError):
    """No language profile matches the file extension."""


class NotARepository(DebtvizError):
    """Path does not point at a Git repository."""


class UnknownRevision(DebtvizError):
    """Revision id does not resolve in the repository."""


class EmptyHistory(DebtvizError):
    """Repository has no commits to sample."""


class AuthFailed(DebtvizError):
    """Issue tracker rejected the supplied credentials."""


class ProjectNotFound(DebtvizError):
    """Issue tracker does not know the requested project."""


class NetworkError(DebtvizError):
    """Request still failing after the retry budget was spent."""


class EmptyDump(DebtvizError):
    """Issue dump contained no valid records."""


class EmptyCorpus(DebtvizError):
    """Training corpus contained no usable examples."""


class ModelNotLoaded(DebtvizError):
    """Prediction requested but no model is available."""


class FormatVersionMismatch(DebtvizError):
    """Model file is truncated, corrupt, or from an unknown format version."""


class UnknownRepo(DebtvizError):
    """Repository id is not registered in the datastore."""


class NoSnapshots(DebtvizError):
    """No scanned snapshots exist for the repository."""


class StaleClaim(DebtvizError):
    """Work-queue claim expired and the target was re-claimed elsewhere."""


class NotClassified(DebtvizError):
    """Target has no stored classification yet."""
