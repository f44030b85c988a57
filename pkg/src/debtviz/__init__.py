"""Self-admitted technical debt scanner, classifier, datastore, API, and reports."""

__version__ = "0.1.0"
