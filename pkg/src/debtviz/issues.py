"""Issue ingestion: a paginated tracker REST client with retry, an offline
JSONL dump importer, and the mapping from issues to classifiable texts."""

import json
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from typing import Iterator

import requests

from .errors import AuthFailed, EmptyDump, NetworkError, ProjectNotFound

_CLOSED_STATUSES = frozenset({"closed", "resolved", "done"})


class OpenClosed(str, Enum):
    OPEN = "OPEN"
    CLOSED = "CLOSED"


class IssueField(str, Enum):
    SUMMARY = "SUMMARY"
    DESCRIPTION = "DESCRIPTION"


@dataclass(frozen=True)
class IssueDoc:
    project: str
    key: str
    summary: str
    description: str
    issue_type: str
    status: str
    created_at: int  # UTC seconds
    resolved_at: int | None = None

    @property
    def open_closed(self) -> OpenClosed:
        if self.status.strip().lower() in _CLOSED_STATUSES:
            return OpenClosed.CLOSED
        return OpenClosed.OPEN


def classifiable_texts(issue: IssueDoc) -> list[tuple[IssueField, str]]:
    """The issue's non-empty text fields, summary first."""
    out = []
    if issue.summary.strip():
        out.append((IssueField.SUMMARY, issue.summary))
    if issue.description.strip():
        out.append((IssueField.DESCRIPTION, issue.description))
    return out


def parse_timestamp(value: str) -> int:
    """ISO-8601 → UTC seconds; a missing offset means UTC."""
    dt = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def format_timestamp(seconds: int) -> str:
    return datetime.fromtimestamp(seconds, tz=timezone.utc) \
        .isoformat().replace("+00:00", "Z")


def _doc_from_record(rec: dict, default_project: str | None = None) -> IssueDoc:
    """Validate one raw record (dump line or REST payload entry)."""
    key = str(rec.get("key", "")).strip()
    if not key:
        raise ValueError("missing or empty 'key'")
    project = str(rec.get("project") or default_project or "").strip()
    if not project:
        raise ValueError("missing or empty 'project'")
    created_raw = rec.get("created_at")
    if created_raw is None:
        raise ValueError("missing 'created_at'")
    created = parse_timestamp(str(created_raw))
    resolved_raw = rec.get("resolved_at")
    resolved = None if resolved_raw in (None, "") else parse_timestamp(str(resolved_raw))
    if resolved is not None and resolved < created:
        raise ValueError("'resolved_at' precedes 'created_at'")
    return IssueDoc(
        project=project,
        key=key,
        summary=str(rec.get("summary") or ""),
        description=str(rec.get("description") or ""),
        issue_type=str(rec.get("issue_type") or ""),
        status=str(rec.get("status") or ""),
        created_at=created,
        resolved_at=resolved,
    )


# -- offline dump ---------------------------------------------------------


@dataclass(frozen=True)
class DumpProblem:
    line: int
    message: str


@dataclass(frozen=True)
class DumpImport:
    issues: list[IssueDoc]
    problems: list[DumpProblem]


def import_issue_dump(path, default_project: str | None = None) -> DumpImport:
    """Read a JSONL issue dump; bad lines become reported problems, and a
    dump yielding zero valid issues raises EmptyDump.  Records without a
    'project' field fall back to default_project."""
    issues: list[IssueDoc] = []
    problems: list[DumpProblem] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                if not isinstance(rec, dict):
                    raise ValueError("record is not an object")
                issues.append(_doc_from_record(rec, default_project))
            except (json.JSONDecodeError, ValueError) as exc:
                problems.append(DumpProblem(line=lineno, message=str(exc)))
    if not issues:
        raise EmptyDump(f"{path}: no valid issue records")
    return DumpImport(issues=issues, problems=problems)


def write_issue_dump(issues, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in issues:
            rec = {
                "project": doc.project,
                "key": doc.key,
                "summary": doc.summary,
                "description": doc.description,
                "issue_type": doc.issue_type,
                "status": doc.status,
                "created_at": format_timestamp(doc.created_at),
                "resolved_at": (None if doc.resolved_at is None
                                else format_timestamp(doc.resolved_at)),
            }
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


# -- REST client ----------------------------------------------------------


class IssueFetcher:
    """Offset-paginated search client.

    Transient failures (connection errors, 5xx) are retried with exponential
    backoff up to max_attempts per page; auth and missing-project responses
    fail immediately.  retries_performed counts the retries of the last
    fetch for observability.
    """

    def __init__(self, endpoint: str, auth: str | None = None,
                 page_size: int = 50, max_attempts: int = 3,
                 retry_base_delay: float = 0.5):
        if not 1 <= page_size <= 1000:
            raise ValueError("page_size must be in [1, 1000]")
        self.endpoint = endpoint
        self.auth = auth
        self.page_size = page_size
        self.max_attempts = max_attempts
        self.retry_base_delay = retry_base_delay
        self.retries_performed = 0
        self._session = requests.Session()

    def _headers(self) -> dict:
        if self.auth:
            return {"Authorization": f"Bearer {self.auth}"}
        return {}

    def _get_page(self, project: str, start_at: int) -> dict:
        params = {"project": project, "startAt": start_at,
                  "maxResults": self.page_size}
        last_error = None
        for attempt in range(self.max_attempts):
            if attempt > 0:
                time.sleep(self.retry_base_delay * 2 ** (attempt - 1))
                self.retries_performed += 1
            try:
                resp = self._session.get(self.endpoint, params=params,
                                         headers=self._headers(), timeout=30)
            except requests.RequestException as exc:
                last_error = f"request failed: {exc}"
                continue
            if resp.status_code in (401, 403):
                raise AuthFailed(f"{self.endpoint}: HTTP {resp.status_code}")
            if resp.status_code == 404:
                raise ProjectNotFound(f"{project}: HTTP 404")
            if resp.status_code >= 500:
                last_error = f"HTTP {resp.status_code}"
                continue
            if resp.status_code != 200:
                raise NetworkError(f"{self.endpoint}: HTTP {resp.status_code}")
            try:
                return resp.json()
            except ValueError as exc:
                raise NetworkError(f"{self.endpoint}: bad JSON: {exc}") from exc
        raise NetworkError(
            f"{self.endpoint}: gave up after {self.max_attempts} attempts "
            f"({last_error})")

    def fetch(self, project: str) -> Iterator[IssueDoc]:
        """Stream every issue of the project in pagination order."""
        self.retries_performed = 0
        start_at = 0
        while True:
            page = self._get_page(project, start_at)
            try:
                total = int(page["total"])
                batch = page["issues"]
            except (KeyError, TypeError, ValueError) as exc:
                raise NetworkError(
                    f"{self.endpoint}: malformed page payload: {exc}") from exc
            for rec in batch:
                try:
                    yield _doc_from_record(rec, default_project=project)
                except ValueError as exc:
                    raise NetworkError(
                        f"{self.endpoint}: malformed issue record: {exc}") from exc
            start_at += len(batch)
            if start_at >= total or not batch:
                return


def fetch_issues(endpoint: str, project: str, auth: str | None = None,
                 page_size: int = 50, **kwargs) -> Iterator[IssueDoc]:
    return IssueFetcher(endpoint, auth=auth, page_size=page_size,
                        **kwargs).fetch(project)
