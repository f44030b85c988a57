"""Single-file SQLite persistence: repositories, comments, issues, the
classification work queue, snapshots, and every dashboard statistics query.

Concurrency model: WAL with one connection per thread; the claim/store pair
runs under BEGIN IMMEDIATE so a target can never be handed to two live
workers.  Claims carry a lease — an expired lease silently returns the
target to the queue, and a worker that stores after losing its claim gets
StaleClaim instead of corrupting the winner's work.
"""

import json
import os
import sqlite3
import threading
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum

from .cnn import Classification
from .errors import (
    NoSnapshots,
    NotClassified,
    StaleClaim,
    UnknownRepo,
)
from .extractor import CommentKind, content_hash as _make_hash
from .gitrepo import RevisionSample
from .issues import IssueDoc, IssueField, OpenClosed, classifiable_texts
from .keywords import KeywordSpan
from .labels import LABELS, SATD_LABELS, SatdLabel, TaskId

DEFAULT_DB_PATH = "./debtviz.db"
DEFAULT_LEASE_SECONDS = 300.0


class TargetKind(str, Enum):
    COMMENT = "COMMENT"
    ISSUE_SUMMARY = "ISSUE_SUMMARY"
    ISSUE_DESCRIPTION = "ISSUE_DESCRIPTION"

    @property
    def task(self) -> TaskId:
        return TaskId.COMMENTS if self is TargetKind.COMMENT else TaskId.ISSUES


_FIELD_TO_KIND = {IssueField.SUMMARY: TargetKind.ISSUE_SUMMARY,
                  IssueField.DESCRIPTION: TargetKind.ISSUE_DESCRIPTION}


class ScanState(str, Enum):
    QUEUED = "QUEUED"
    RUNNING = "RUNNING"
    DONE = "DONE"
    FAILED = "FAILED"


@dataclass(frozen=True)
class RepoInfo:
    repo_id: int
    name: str
    path: str


@dataclass(frozen=True)
class UpsertResult:
    inserted: int
    unchanged: int


@dataclass(frozen=True)
class IssueUpsertResult:
    inserted: int
    updated: int


@dataclass(frozen=True)
class ClaimedTarget:
    target_id: int
    repo_id: int
    kind: TargetKind
    ref_id: int
    content_hash: int
    text: str


@dataclass(frozen=True)
class SnapshotStats:
    commit_id: str
    timestamp: int
    counts: dict
    total_comments: int


@dataclass
class HeatmapNode:
    path: str
    counts: dict
    total_satd: int
    total_comments: int
    children: list = field(default_factory=list)


@dataclass(frozen=True)
class TreeEntry:
    name: str
    path: str
    is_dir: bool
    total_comments: int
    satd_total: int


@dataclass(frozen=True)
class ScanJob:
    job_id: int
    repo_id: int
    state: ScanState
    files_done: int
    files_total: int
    error: str | None
    created_at: int
    started_at: int | None
    finished_at: int | None


_SCHEMA = """
CREATE TABLE IF NOT EXISTS repos (
    id INTEGER PRIMARY KEY,
    name TEXT NOT NULL,
    path TEXT NOT NULL,
    created_at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS comments (
    id INTEGER PRIMARY KEY,
    repo_id INTEGER NOT NULL REFERENCES repos(id),
    file_path TEXT NOT NULL,
    line_start INTEGER NOT NULL,
    line_end INTEGER NOT NULL,
    col_start INTEGER NOT NULL,
    col_end INTEGER NOT NULL,
    kind TEXT NOT NULL,
    raw_text TEXT NOT NULL,
    normalized_text TEXT NOT NULL,
    content_hash INTEGER NOT NULL,
    UNIQUE (repo_id, file_path, content_hash)
);
CREATE INDEX IF NOT EXISTS idx_comments_repo ON comments(repo_id);
CREATE TABLE IF NOT EXISTS issues (
    id INTEGER PRIMARY KEY,
    repo_id INTEGER NOT NULL REFERENCES repos(id),
    project TEXT NOT NULL,
    key TEXT NOT NULL,
    summary TEXT NOT NULL,
    description TEXT NOT NULL,
    issue_type TEXT NOT NULL,
    status TEXT NOT NULL,
    open_closed TEXT NOT NULL,
    created_at INTEGER NOT NULL,
    resolved_at INTEGER,
    UNIQUE (repo_id, project, key)
);
CREATE TABLE IF NOT EXISTS targets (
    id INTEGER PRIMARY KEY,
    repo_id INTEGER NOT NULL REFERENCES repos(id),
    kind TEXT NOT NULL,
    ref_id INTEGER NOT NULL,
    content_hash INTEGER NOT NULL,
    text TEXT NOT NULL,
    state TEXT NOT NULL DEFAULT 'QUEUED',
    claim_worker TEXT,
    claim_expires REAL,
    UNIQUE (kind, ref_id)
);
CREATE INDEX IF NOT EXISTS idx_targets_state ON targets(state);
CREATE TABLE IF NOT EXISTS classifications (
    id INTEGER PRIMARY KEY,
    target_id INTEGER NOT NULL REFERENCES targets(id),
    label TEXT NOT NULL,
    probs TEXT NOT NULL,
    model_version TEXT NOT NULL,
    classified_at INTEGER NOT NULL,
    UNIQUE (target_id, model_version)
);
CREATE TABLE IF NOT EXISTS keywords (
    id INTEGER PRIMARY KEY,
    classification_id INTEGER NOT NULL REFERENCES classifications(id),
    rank INTEGER NOT NULL,
    token_start INTEGER NOT NULL,
    token_end INTEGER NOT NULL,
    text TEXT NOT NULL,
    score REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS snapshots (
    id INTEGER PRIMARY KEY,
    repo_id INTEGER NOT NULL REFERENCES repos(id),
    commit_id TEXT NOT NULL,
    timestamp INTEGER NOT NULL,
    ordinal INTEGER NOT NULL,
    UNIQUE (repo_id, commit_id)
);
CREATE TABLE IF NOT EXISTS snapshot_comments (
    snapshot_id INTEGER NOT NULL REFERENCES snapshots(id),
    comment_id INTEGER NOT NULL REFERENCES comments(id),
    PRIMARY KEY (snapshot_id, comment_id)
);
CREATE TABLE IF NOT EXISTS scan_jobs (
    id INTEGER PRIMARY KEY,
    repo_id INTEGER NOT NULL REFERENCES repos(id),
    state TEXT NOT NULL DEFAULT 'QUEUED',
    files_done INTEGER NOT NULL DEFAULT 0,
    files_total INTEGER NOT NULL DEFAULT 0,
    error TEXT,
    created_at INTEGER NOT NULL,
    started_at INTEGER,
    finished_at INTEGER
);
"""


class Datastore:
    """All persistence behind one file path; safe to share across threads."""

    def __init__(self, path: str | None = None, clock=time.time,
                 lease_seconds: float = DEFAULT_LEASE_SECONDS):
        self.path = path or os.environ.get("DEBTVIZ_DB_PATH", DEFAULT_DB_PATH)
        self._clock = clock
        self.lease_seconds = lease_seconds
        self._local = threading.local()
        self._all_connections: list[sqlite3.Connection] = []
        self._conn_lock = threading.Lock()
        with self._tx():
            pass  # force schema creation eagerly

    # -- connection plumbing ---------------------------------------------

    def _conn(self) -> sqlite3.Connection:
        conn = getattr(self._local, "conn", None)
        if conn is None:
            # check_same_thread off: each conn is used by its owning thread
            # only, but close() sweeps them all from whichever thread exits.
            conn = sqlite3.connect(self.path, timeout=60,
                                   isolation_level=None,
                                   check_same_thread=False)
            conn.row_factory = sqlite3.Row
            conn.execute("PRAGMA journal_mode=WAL")
            conn.execute("PRAGMA synchronous=NORMAL")
            conn.execute("PRAGMA foreign_keys=ON")
            conn.execute("PRAGMA busy_timeout=60000")
            conn.executescript(_SCHEMA)
            self._local.conn = conn
            with self._conn_lock:
                self._all_connections.append(conn)
        return conn

    def close(self) -> None:
        with self._conn_lock:
            for conn in self._all_connections:
                try:
                    conn.close()
                except sqlite3.Error:
                    pass
            self._all_connections.clear()
        self._local = threading.local()

    @contextmanager
    def _tx(self):
        """Write transaction: BEGIN IMMEDIATE ... COMMIT/ROLLBACK."""
        conn = self._conn()
        conn.execute("BEGIN IMMEDIATE")
        try:
            yield conn
        except BaseException:
            conn.execute("ROLLBACK")
            raise
        else:
            conn.execute("COMMIT")

    # -- repositories -----------------------------------------------------

    def register_repo(self, name: str, path: str) -> int:
        with self._tx() as conn:
            cur = conn.execute(
                "INSERT INTO repos (name, path, created_at) VALUES (?, ?, ?)",
                (name, path, int(self._clock())))
            return cur.lastrowid

    def get_repo(self, repo_id: int) -> RepoInfo:
        row = self._conn().execute(
            "SELECT id, name, path FROM repos WHERE id = ?",
            (repo_id,)).fetchone()
        if row is None:
            raise UnknownRepo(f"no repository with id {repo_id}")
        return RepoInfo(repo_id=row["id"], name=row["name"], path=row["path"])

    def list_repos(self) -> list[RepoInfo]:
        rows = self._conn().execute(
            "SELECT id, name, path FROM repos ORDER BY id").fetchall()
        return [RepoInfo(r["id"], r["name"], r["path"]) for r in rows]

    def _require_repo(self, conn, repo_id: int) -> None:
        if conn.execute("SELECT 1 FROM repos WHERE id = ?",
                        (repo_id,)).fetchone() is None:
            raise UnknownRepo(f"no repository with id {repo_id}")

    # -- comments and snapshots ------------------------------------------

    def _upsert_comment_rows(self, conn, repo_id: int, comments):
        """Insert-or-find each comment; returns (ids, inserted, unchanged)."""
        ids, inserted, unchanged = [], 0, 0
        for c in comments:
            row = conn.execute(
                "SELECT id FROM comments WHERE repo_id = ? AND file_path = ? "
                "AND content_hash = ?",
                (repo_id, c.file_path, c.content_hash)).fetchone()
            if row is not None:
                ids.append(row["id"])
                unchanged += 1
                continue
            cur = conn.execute(
                "INSERT INTO comments (repo_id, file_path, line_start, "
                "line_end, col_start, col_end, kind, raw_text, "
                "normalized_text, content_hash) "
                "VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?)",
                (repo_id, c.file_path, c.line_start, c.line_end, c.col_start,
                 c.col_end, c.kind.value, c.raw_text, c.normalized_text,
                 c.content_hash))
            comment_id = cur.lastrowid
            conn.execute(
                "INSERT INTO targets (repo_id, kind, ref_id, content_hash, "
                "text) VALUES (?, ?, ?, ?, ?)",
                (repo_id, TargetKind.COMMENT.value, comment_id,
                 c.content_hash, c.normalized_text))
            ids.append(comment_id)
            inserted += 1
        return ids, inserted, unchanged

    def upsert_comments(self, repo_id: int, comments) -> UpsertResult:
        """Deduplicating insert; new comments join the unclassified queue."""
        with self._tx() as conn:
            self._require_repo(conn, repo_id)
            _, inserted, unchanged = self._upsert_comment_rows(
                conn, repo_id, comments)
            return UpsertResult(inserted=inserted, unchanged=unchanged)

    def store_snapshot(self, repo_id: int, sample: RevisionSample,
                       comments) -> UpsertResult:
        """Upsert comments and bind them as the snapshot's exact membership."""
        with self._tx() as conn:
            self._require_repo(conn, repo_id)
            ids, inserted, unchanged = self._upsert_comment_rows(
                conn, repo_id, comments)
            row = conn.execute(
                "SELECT id FROM snapshots WHERE repo_id = ? AND commit_id = ?",
                (repo_id, sample.commit_id)).fetchone()
            if row is None:
                cur = conn.execute(
                    "INSERT INTO snapshots (repo_id, commit_id, timestamp, "
                    "ordinal) VALUES (?, ?, ?, ?)",
                    (repo_id, sample.commit_id, sample.timestamp,
                     sample.ordinal))
                snapshot_id = cur.lastrowid
            else:
                snapshot_id = row["id"]
                conn.execute(
                    "UPDATE snapshots SET timestamp = ?, ordinal = ? "
                    "WHERE id = ?",
                    (sample.timestamp, sample.ordinal, snapshot_id))
                conn.execute(
                    "DELETE FROM snapshot_comments WHERE snapshot_id = ?",
                    (snapshot_id,))
            conn.executemany(
                "INSERT OR IGNORE INTO snapshot_comments "
                "(snapshot_id, comment_id) VALUES (?, ?)",
                [(snapshot_id, cid) for cid in ids])
            return UpsertResult(inserted=inserted, unchanged=unchanged)

    def latest_snapshot(self, repo_id: int):
        """(commit_id, timestamp) of the newest snapshot, or None."""
        conn = self._conn()
        self._require_repo(conn, repo_id)
        row = conn.execute(
            "SELECT commit_id, timestamp FROM snapshots WHERE repo_id = ? "
            "ORDER BY timestamp DESC, ordinal DESC, id DESC LIMIT 1",
            (repo_id,)).fetchone()
        return None if row is None else (row["commit_id"], row["timestamp"])

    def _latest_snapshot_id(self, conn, repo_id: int):
        row = conn.execute(
            "SELECT id FROM snapshots WHERE repo_id = ? "
            "ORDER BY timestamp DESC, ordinal DESC, id DESC LIMIT 1",
            (repo_id,)).fetchone()
        return None if row is None else row["id"]

    def _current_comments_parts(self, conn, repo_id: int):
        """(join_sql, where_sql, params) selecting the repo's current
        comments (table alias c): the newest snapshot's membership, or every
        comment when no snapshot exists (plain upserts, unit-test style)."""
        snap = self._latest_snapshot_id(conn, repo_id)
        if snap is None:
            return "", "c.repo_id = ?", (repo_id,)
        return ("JOIN snapshot_comments sc ON sc.comment_id = c.id "
                "AND sc.snapshot_id = ?", "c.repo_id = ?", (snap, repo_id))

    # -- issues -----------------------------------------------------------

    def upsert_issues(self, repo_id: int, issues) -> IssueUpsertResult:
        """Keyed by (project, key); changed texts re-enter the queue."""
        inserted = updated = 0
        with self._tx() as conn:
            self._require_repo(conn, repo_id)
            for doc in issues:
                row = conn.execute(
                    "SELECT * FROM issues WHERE repo_id = ? AND project = ? "
                    "AND key = ?",
                    (repo_id, doc.project, doc.key)).fetchone()
                if row is None:
                    cur = conn.execute(
                        "INSERT INTO issues (repo_id, project, key, summary, "
                        "description, issue_type, status, open_closed, "
                        "created_at, resolved_at) "
                        "VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?)",
                        (repo_id, doc.project, doc.key, doc.summary,
                         doc.description, doc.issue_type, doc.status,
                         doc.open_closed.value, doc.created_at,
                         doc.resolved_at))
                    issue_id = cur.lastrowid
                    inserted += 1
                else:
                    issue_id = row["id"]
                    changed = (row["summary"], row["description"],
                               row["issue_type"], row["status"],
                               row["created_at"], row["resolved_at"]) != (
                        doc.summary, doc.description, doc.issue_type,
                        doc.status, doc.created_at, doc.resolved_at)
                    if changed:
                        conn.execute(
                            "UPDATE issues SET summary = ?, description = ?, "
                            "issue_type = ?, status = ?, open_closed = ?, "
                            "created_at = ?, resolved_at = ? WHERE id = ?",
                            (doc.summary, doc.description, doc.issue_type,
                             doc.status, doc.open_closed.value,
                             doc.created_at, doc.resolved_at, issue_id))
                        updated += 1
                self._sync_issue_targets(conn, repo_id, issue_id, doc)
            return IssueUpsertResult(inserted=inserted, updated=updated)

    def _sync_issue_targets(self, conn, repo_id, issue_id, doc: IssueDoc):
        wanted = {}
        for issue_field, text in classifiable_texts(doc):
            kind = _FIELD_TO_KIND[issue_field]
            h = _make_hash(f"{doc.project}/{doc.key}#{issue_field.value}",
                           text)
            wanted[kind] = (text, h)
        for kind in (TargetKind.ISSUE_SUMMARY, TargetKind.ISSUE_DESCRIPTION):
            row = conn.execute(
                "SELECT id, content_hash FROM targets WHERE kind = ? "
                "AND ref_id = ?", (kind.value, issue_id)).fetchone()
            if kind not in wanted:
                if row is not None:  # field emptied: no longer classifiable
                    conn.execute("DELETE FROM keywords WHERE "
                                 "classification_id IN (SELECT id FROM "
                                 "classifications WHERE target_id = ?)",
                                 (row["id"],))
                    conn.execute("DELETE FROM classifications WHERE "
                                 "target_id = ?", (row["id"],))
                    conn.execute("DELETE FROM targets WHERE id = ?",
                                 (row["id"],))
                continue
            text, h = wanted[kind]
            if row is None:
                conn.execute(
                    "INSERT INTO targets (repo_id, kind, ref_id, "
                    "content_hash, text) VALUES (?, ?, ?, ?, ?)",
                    (repo_id, kind.value, issue_id, h, text))
            elif row["content_hash"] != h:
                conn.execute(
                    "UPDATE targets SET content_hash = ?, text = ?, "
                    "state = 'QUEUED', claim_worker = NULL, "
                    "claim_expires = NULL WHERE id = ?",
                    (h, text, row["id"]))

    # -- work queue -------------------------------------------------------

    def claim_unclassified(self, kinds=None, batch_size: int = 32,
                           worker_id: str = "worker",
                           lease_seconds: float | None = None
                           ) -> list[ClaimedTarget]:
        """Atomically lease up to batch_size queued (or lease-expired)
        targets to worker_id."""
        if batch_size < 1:
            raise ValueError("batch_size must be ≥ 1")
        lease = self.lease_seconds if lease_seconds is None else lease_seconds
        kind_values = [k.value for k in kinds] if kinds else None
        now = self._clock()
        with self._tx() as conn:
            sql = ("SELECT id, repo_id, kind, ref_id, content_hash, text "
                   "FROM targets WHERE (state = 'QUEUED' OR "
                   "(state = 'CLAIMED' AND claim_expires < ?))")
            params: list = [now]
            if kind_values:
                sql += f" AND kind IN ({','.join('?' * len(kind_values))})"
                params.extend(kind_values)
            sql += " ORDER BY id LIMIT ?"
            params.append(batch_size)
            rows = conn.execute(sql, params).fetchall()
            if rows:
                conn.executemany(
                    "UPDATE targets SET state = 'CLAIMED', claim_worker = ?, "
                    "claim_expires = ? WHERE id = ?",
                    [(worker_id, now + lease, r["id"]) for r in rows])
            return [ClaimedTarget(target_id=r["id"], repo_id=r["repo_id"],
                                  kind=TargetKind(r["kind"]),
                                  ref_id=r["ref_id"],
                                  content_hash=r["content_hash"],
                                  text=r["text"])
                    for r in rows]

    def store_classification(self, worker_id: str, c: Classification,
                             keywords=()) -> None:
        """Persist a result for the target named by c.target_id.

        Raises StaleClaim when the lease was lost to another worker (their
        claim is live, or they already finished); the caller discards its
        result.  Re-storing the same (target, model_version) replaces the
        earlier row, keeping the uniqueness invariant.
        """
        if c.target_id is None:
            raise ValueError("classification has no target_id")
        now = self._clock()
        with self._tx() as conn:
            row = conn.execute(
                "SELECT state, claim_worker, claim_expires FROM targets "
                "WHERE id = ?", (c.target_id,)).fetchone()
            if row is None:
                raise StaleClaim(f"target {c.target_id} no longer exists")
            if row["state"] == "DONE":
                raise StaleClaim(
                    f"target {c.target_id} already classified elsewhere")
            if (row["state"] == "CLAIMED" and row["claim_worker"] != worker_id
                    and row["claim_expires"] >= now):
                raise StaleClaim(
                    f"target {c.target_id} re-claimed by "
                    f"{row['claim_worker']!r}")
            old = conn.execute(
                "SELECT id FROM classifications WHERE target_id = ? "
                "AND model_version = ?",
                (c.target_id, c.model_version)).fetchone()
            if old is not None:
                conn.execute("DELETE FROM keywords WHERE classification_id = ?",
                             (old["id"],))
                conn.execute("DELETE FROM classifications WHERE id = ?",
                             (old["id"],))
            cur = conn.execute(
                "INSERT INTO classifications (target_id, label, probs, "
                "model_version, classified_at) VALUES (?, ?, ?, ?, ?)",
                (c.target_id, c.label.value, json.dumps(c.probs),
                 c.model_version, c.classified_at))
            classification_id = cur.lastrowid
            conn.executemany(
                "INSERT INTO keywords (classification_id, rank, token_start, "
                "token_end, text, score) VALUES (?, ?, ?, ?, ?, ?)",
                [(classification_id, rank, k.token_start, k.token_end,
                  k.text, k.score) for rank, k in enumerate(keywords)])
            if row["state"] == "CLAIMED":
                conn.execute(
                    "UPDATE targets SET state = 'DONE', claim_worker = NULL, "
                    "claim_expires = NULL WHERE id = ?", (c.target_id,))
            # A QUEUED target was explicitly re-enqueued mid-flight (text
            # changed, claim released, or model requeue): keep it queued so
            # the newer intent still gets its pass; the stored row stands.

    def release_claim(self, worker_id: str, target_id: int) -> None:
        """Return a still-owned claim to the queue (graceful shutdown)."""
        with self._tx() as conn:
            conn.execute(
                "UPDATE targets SET state = 'QUEUED', claim_worker = NULL, "
                "claim_expires = NULL WHERE id = ? AND state = 'CLAIMED' "
                "AND claim_worker = ?", (target_id, worker_id))

    def requeue_done(self, repo_id: int | None = None) -> int:
        """Re-enqueue finished targets (model upgrade); audit rows remain."""
        with self._tx() as conn:
            sql = ("UPDATE targets SET state = 'QUEUED', claim_worker = NULL, "
                   "claim_expires = NULL WHERE state = 'DONE'")
            params: tuple = ()
            if repo_id is not None:
                sql += " AND repo_id = ?"
                params = (repo_id,)
            return conn.execute(sql, params).rowcount

    def queue_depth(self, kinds=None) -> int:
        now = self._clock()
        sql = ("SELECT COUNT(*) AS n FROM targets WHERE (state = 'QUEUED' OR "
               "(state = 'CLAIMED' AND claim_expires < ?))")
        params: list = [now]
        if kinds:
            values = [k.value for k in kinds]
            sql += f" AND kind IN ({','.join('?' * len(values))})"
            params.extend(values)
        return self._conn().execute(sql, params).fetchone()["n"]

    def queue_states(self) -> dict:
        """state → target count (expired leases count as QUEUED)."""
        now = self._clock()
        rows = self._conn().execute(
            "SELECT CASE WHEN state = 'CLAIMED' AND claim_expires < ? "
            "THEN 'QUEUED' ELSE state END AS s, COUNT(*) AS n "
            "FROM targets GROUP BY s", (now,)).fetchall()
        out = {"QUEUED": 0, "CLAIMED": 0, "DONE": 0}
        for r in rows:
            out[r["s"]] = r["n"]
        return out

    # -- classification lookups ------------------------------------------

    _CURRENT_CLS = (
        "SELECT cl.* FROM classifications cl WHERE cl.id = "
        "(SELECT MAX(id) FROM classifications WHERE target_id = cl.target_id)"
    )

    def current_classification(self, kind: TargetKind, ref_id: int):
        """Latest stored Classification for a target, or None."""
        row = self._conn().execute(
            f"SELECT t.id AS tid, cl.* FROM targets t "
            f"JOIN ({self._CURRENT_CLS}) cl ON cl.target_id = t.id "
            f"WHERE t.kind = ? AND t.ref_id = ?",
            (kind.value, ref_id)).fetchone()
        if row is None:
            return None
        return Classification(
            label=SatdLabel(row["label"]),
            probs=json.loads(row["probs"]),
            model_version=row["model_version"],
            classified_at=row["classified_at"],
            target_kind=kind.value,
            target_id=row["tid"],
        )

    def keywords_for_comment(self, comment_id: int) -> list[KeywordSpan]:
        """Stored keywords of the comment's current classification.

        KeyError for an unknown comment; NotClassified while still queued.
        """
        conn = self._conn()
        if conn.execute("SELECT 1 FROM comments WHERE id = ?",
                        (comment_id,)).fetchone() is None:
            raise KeyError(f"no comment with id {comment_id}")
        row = conn.execute(
            f"SELECT cl.id FROM targets t "
            f"JOIN ({self._CURRENT_CLS}) cl ON cl.target_id = t.id "
            f"WHERE t.kind = ? AND t.ref_id = ?",
            (TargetKind.COMMENT.value, comment_id)).fetchone()
        if row is None:
            raise NotClassified(f"comment {comment_id} not classified yet")
        rows = conn.execute(
            "SELECT token_start, token_end, text, score FROM keywords "
            "WHERE classification_id = ? ORDER BY rank", (row["id"],)).fetchall()
        return [KeywordSpan(token_start=r["token_start"],
                            token_end=r["token_end"], text=r["text"],
                            score=r["score"]) for r in rows]

    # -- statistics -------------------------------------------------------

    def stats_labels(self, repo_id: int, kinds=None) -> dict:
        """Current-classification label counts; comments restricted to the
        newest snapshot.  Keys cover every label, zeros included."""
        kinds = tuple(kinds) if kinds else tuple(TargetKind)
        conn = self._conn()
        self._require_repo(conn, repo_id)
        counts = {label: 0 for label in LABELS}
        if TargetKind.COMMENT in kinds:
            join, where, params = self._current_comments_parts(conn, repo_id)
            rows = conn.execute(
                f"SELECT cl.label AS label, COUNT(*) AS n "
                f"FROM comments c {join} "
                f"JOIN targets t ON t.kind = 'COMMENT' AND t.ref_id = c.id "
                f"JOIN ({self._CURRENT_CLS}) cl ON cl.target_id = t.id "
                f"WHERE {where} GROUP BY cl.label",
                params).fetchall()
            for r in rows:
                counts[SatdLabel(r["label"])] += r["n"]
        issue_kinds = [k for k in kinds if k is not TargetKind.COMMENT]
        if issue_kinds:
            marks = ",".join("?" * len(issue_kinds))
            rows = conn.execute(
                f"SELECT cl.label AS label, COUNT(*) AS n FROM targets t "
                f"JOIN ({self._CURRENT_CLS}) cl ON cl.target_id = t.id "
                f"WHERE t.repo_id = ? AND t.kind IN ({marks}) "
                f"GROUP BY cl.label",
                (repo_id, *[k.value for k in issue_kinds])).fetchall()
            for r in rows:
                counts[SatdLabel(r["label"])] += r["n"]
        return counts

    def stats_comment_kinds(self, repo_id: int) -> dict:
        """SATD-classified current comments grouped by comment kind."""
        conn = self._conn()
        self._require_repo(conn, repo_id)
        join, where, params = self._current_comments_parts(conn, repo_id)
        counts = {kind: 0 for kind in CommentKind}
        rows = conn.execute(
            f"SELECT c.kind AS kind, COUNT(*) AS n FROM comments c {join} "
            f"JOIN targets t ON t.kind = 'COMMENT' AND t.ref_id = c.id "
            f"JOIN ({self._CURRENT_CLS}) cl ON cl.target_id = t.id "
            f"WHERE {where} AND cl.label != 'NON_SATD' GROUP BY c.kind",
            params).fetchall()
        for r in rows:
            counts[CommentKind(r["kind"])] = r["n"]
        return counts

    def stats_issues(self, repo_id: int) -> dict:
        """Issue-side dashboard numbers.

        by_label: per-field label distribution of classified issue texts;
        by_issue_type / by_open_closed: partitions of SATD issues (issues
        with at least one SATD-classified field).
        """
        conn = self._conn()
        self._require_repo(conn, repo_id)
        by_label = {f: {label: 0 for label in LABELS} for f in IssueField}
        for issue_field, kind in _FIELD_TO_KIND.items():
            rows = conn.execute(
                f"SELECT cl.label AS label, COUNT(*) AS n FROM targets t "
                f"JOIN ({self._CURRENT_CLS}) cl ON cl.target_id = t.id "
                f"WHERE t.repo_id = ? AND t.kind = ? GROUP BY cl.label",
                (repo_id, kind.value)).fetchall()
            for r in rows:
                by_label[issue_field][SatdLabel(r["label"])] = r["n"]
        satd_issue_sql = (
            f"SELECT DISTINCT t.ref_id AS issue_id FROM targets t "
            f"JOIN ({self._CURRENT_CLS}) cl ON cl.target_id = t.id "
            f"WHERE t.repo_id = ? AND t.kind IN ('ISSUE_SUMMARY', "
            f"'ISSUE_DESCRIPTION') AND cl.label != 'NON_SATD'")
        by_issue_type: dict = {}
        rows = conn.execute(
            f"SELECT i.issue_type AS g, COUNT(*) AS n FROM issues i "
            f"WHERE i.id IN ({satd_issue_sql}) GROUP BY i.issue_type",
            (repo_id,)).fetchall()
        for r in rows:
            by_issue_type[r["g"]] = r["n"]
        by_open_closed = {oc: 0 for oc in OpenClosed}
        rows = conn.execute(
            f"SELECT i.open_closed AS g, COUNT(*) AS n FROM issues i "
            f"WHERE i.id IN ({satd_issue_sql}) GROUP BY i.open_closed",
            (repo_id,)).fetchall()
        for r in rows:
            by_open_closed[OpenClosed(r["g"])] = r["n"]
        return {"by_label": by_label, "by_issue_type": by_issue_type,
                "by_open_closed": by_open_closed}

    # -- heatmap / tree / timeline ---------------------------------------

    def _current_comment_label_rows(self, conn, repo_id: int):
        """(file_path, kind, label-or-None) for every current comment."""
        join, where, params = self._current_comments_parts(conn, repo_id)
        return conn.execute(
            f"SELECT c.file_path AS file_path, c.kind AS kind, "
            f"cl.label AS label FROM comments c {join} "
            f"LEFT JOIN targets t ON t.kind = 'COMMENT' AND t.ref_id = c.id "
            f"LEFT JOIN ({self._CURRENT_CLS}) cl ON cl.target_id = t.id "
            f"WHERE {where}",
            params).fetchall()

    def heatmap(self, repo_id: int,
                label: SatdLabel | None = None) -> HeatmapNode:
        """Directory tree with cumulative SATD counts at every node."""
        if label is SatdLabel.NON_SATD:
            raise ValueError("heatmap filter must be a SATD label")
        conn = self._conn()
        self._require_repo(conn, repo_id)
        wanted = (label,) if label else SATD_LABELS
        nodes: dict[str, HeatmapNode] = {}

        def node_for(path: str) -> HeatmapNode:
            if path in nodes:
                return nodes[path]
            node = HeatmapNode(path=path,
                               counts={lab: 0 for lab in wanted},
                               total_satd=0, total_comments=0)
            nodes[path] = node
            if path:
                parent = node_for(path.rsplit("/", 1)[0] if "/" in path else "")
                parent.children.append(node)
            return node

        node_for("")
        for row in self._current_comment_label_rows(conn, repo_id):
            directory = row["file_path"].rsplit("/", 1)[0] \
                if "/" in row["file_path"] else ""
            lab = SatdLabel(row["label"]) if row["label"] else None
            path = directory
            chain = [node_for(path)]
            while path:
                path = path.rsplit("/", 1)[0] if "/" in path else ""
                chain.append(node_for(path))
            for node in chain:
                node.total_comments += 1
                if lab is not None and lab in node.counts:
                    node.counts[lab] += 1
                    node.total_satd += 1
        for node in nodes.values():
            node.children.sort(key=lambda n: n.path)
        return nodes[""]

    def tree_listing(self, repo_id: int, path: str = "") -> list[TreeEntry]:
        """One directory level: subdirectories first, then files, each with
        cumulative comment/SATD counts.  KeyError for paths outside the
        scanned tree."""
        path = path.strip("/")
        if ".." in path.split("/"):
            raise KeyError(f"path escapes the repository: {path!r}")
        conn = self._conn()
        self._require_repo(conn, repo_id)
        prefix = f"{path}/" if path else ""
        dirs: dict[str, list] = {}
        files: dict[str, list] = {}
        known_dirs = {""}
        rows = self._current_comment_label_rows(conn, repo_id)
        for row in rows:
            fp = row["file_path"]
            parts = fp.split("/")
            for i in range(1, len(parts)):
                known_dirs.add("/".join(parts[:i]))
            if not fp.startswith(prefix):
                continue
            rest = fp[len(prefix):]
            is_satd = (row["label"] is not None
                       and row["label"] != SatdLabel.NON_SATD.value)
            if "/" in rest:
                name = rest.split("/", 1)[0]
                bucket = dirs.setdefault(name, [0, 0])
            else:
                bucket = files.setdefault(rest, [0, 0])
            bucket[0] += 1
            bucket[1] += int(is_satd)
        if path and path not in known_dirs:
            raise KeyError(f"no such directory: {path!r}")
        entries = [TreeEntry(name=n, path=f"{prefix}{n}", is_dir=True,
                             total_comments=tot, satd_total=satd)
                   for n, (tot, satd) in sorted(dirs.items())]
        entries += [TreeEntry(name=n, path=f"{prefix}{n}", is_dir=False,
                              total_comments=tot, satd_total=satd)
                    for n, (tot, satd) in sorted(files.items())]
        return entries

    def comments_for_file(self, repo_id: int, file_path: str) -> list[dict]:
        """Current comments of one file with their classification state."""
        conn = self._conn()
        self._require_repo(conn, repo_id)
        join, where, params = self._current_comments_parts(conn, repo_id)
        rows = conn.execute(
            f"SELECT c.id AS comment_id, c.file_path, c.line_start, "
            f"c.line_end, c.col_start, c.col_end, c.kind, c.raw_text, "
            f"c.normalized_text, cl.label AS label, cl.probs AS probs, "
            f"cl.model_version AS model_version FROM comments c {join} "
            f"LEFT JOIN targets t ON t.kind = 'COMMENT' AND t.ref_id = c.id "
            f"LEFT JOIN ({self._CURRENT_CLS}) cl ON cl.target_id = t.id "
            f"WHERE {where} AND c.file_path = ? "
            f"ORDER BY c.line_start, c.col_start",
            (*params, file_path)).fetchall()
        return [dict(r) for r in rows]

    def comment_count(self, repo_id: int) -> int:
        conn = self._conn()
        self._require_repo(conn, repo_id)
        return conn.execute(
            "SELECT COUNT(*) AS n FROM comments WHERE repo_id = ?",
            (repo_id,)).fetchone()["n"]

    def list_comments(self, repo_id: int) -> list[dict]:
        """Every stored comment of the repo (all snapshots) with its current
        classification state, ordered by (file_path, position)."""
        conn = self._conn()
        self._require_repo(conn, repo_id)
        rows = conn.execute(
            f"SELECT c.id AS comment_id, c.file_path, c.line_start, "
            f"c.line_end, c.col_start, c.col_end, c.kind, "
            f"c.normalized_text, c.content_hash, cl.label AS label, "
            f"cl.probs AS probs, cl.model_version AS model_version, "
            f"cl.classified_at AS classified_at FROM comments c "
            f"LEFT JOIN targets t ON t.kind = 'COMMENT' AND t.ref_id = c.id "
            f"LEFT JOIN ({self._CURRENT_CLS}) cl ON cl.target_id = t.id "
            f"WHERE c.repo_id = ? "
            f"ORDER BY c.file_path, c.line_start, c.col_start",
            (repo_id,)).fetchall()
        return [dict(r) for r in rows]

    def list_issues(self, repo_id: int) -> list[dict]:
        """Every stored issue with current per-field classification state."""
        conn = self._conn()
        self._require_repo(conn, repo_id)
        rows = conn.execute(
            "SELECT * FROM issues WHERE repo_id = ? ORDER BY project, key",
            (repo_id,)).fetchall()
        out = []
        for r in rows:
            record = dict(r)
            record.pop("id")
            for kind, name in ((TargetKind.ISSUE_SUMMARY, "summary"),
                               (TargetKind.ISSUE_DESCRIPTION,
                                "description")):
                cls = self.current_classification(kind, r["id"])
                record[f"{name}_classification"] = None if cls is None else {
                    "label": cls.label.value,
                    "probs": cls.probs,
                    "model_version": cls.model_version,
                    "classified_at": cls.classified_at,
                }
            out.append(record)
        return out

    def timeline(self, repo_id: int) -> list[SnapshotStats]:
        """Chronological per-snapshot label counts from stored snapshots."""
        conn = self._conn()
        self._require_repo(conn, repo_id)
        snaps = conn.execute(
            "SELECT id, commit_id, timestamp FROM snapshots "
            "WHERE repo_id = ? ORDER BY timestamp, ordinal, id",
            (repo_id,)).fetchall()
        if not snaps:
            raise NoSnapshots(f"repository {repo_id} has no snapshots")
        out = []
        for snap in snaps:
            counts = {label: 0 for label in LABELS}
            rows = conn.execute(
                f"SELECT cl.label AS label, COUNT(*) AS n "
                f"FROM snapshot_comments sc "
                f"JOIN targets t ON t.kind = 'COMMENT' AND t.ref_id = sc.comment_id "
                f"JOIN ({self._CURRENT_CLS}) cl ON cl.target_id = t.id "
                f"WHERE sc.snapshot_id = ? GROUP BY cl.label",
                (snap["id"],)).fetchall()
            for r in rows:
                counts[SatdLabel(r["label"])] = r["n"]
            total = conn.execute(
                "SELECT COUNT(*) AS n FROM snapshot_comments "
                "WHERE snapshot_id = ?", (snap["id"],)).fetchone()["n"]
            out.append(SnapshotStats(commit_id=snap["commit_id"],
                                     timestamp=snap["timestamp"],
                                     counts=counts, total_comments=total))
        return out

    # -- scan jobs --------------------------------------------------------

    def create_scan_job(self, repo_id: int) -> int:
        with self._tx() as conn:
            self._require_repo(conn, repo_id)
            cur = conn.execute(
                "INSERT INTO scan_jobs (repo_id, created_at) VALUES (?, ?)",
                (repo_id, int(self._clock())))
            return cur.lastrowid

    def active_scan_job(self, repo_id: int):
        row = self._conn().execute(
            "SELECT id FROM scan_jobs WHERE repo_id = ? "
            "AND state IN ('QUEUED', 'RUNNING') ORDER BY id LIMIT 1",
            (repo_id,)).fetchone()
        return None if row is None else row["id"]

    def claim_next_scan_job(self):
        """Oldest queued job → RUNNING, atomically; None when idle."""
        with self._tx() as conn:
            row = conn.execute(
                "SELECT id FROM scan_jobs WHERE state = 'QUEUED' "
                "ORDER BY id LIMIT 1").fetchone()
            if row is None:
                return None
            conn.execute(
                "UPDATE scan_jobs SET state = 'RUNNING', started_at = ? "
                "WHERE id = ?", (int(self._clock()), row["id"]))
            return self._scan_job_row(conn, row["id"])

    def update_scan_progress(self, job_id: int, files_done: int,
                             files_total: int) -> None:
        with self._tx() as conn:
            conn.execute(
                "UPDATE scan_jobs SET files_done = MAX(files_done, ?), "
                "files_total = ? WHERE id = ?",
                (files_done, files_total, job_id))

    def finish_scan_job(self, job_id: int, error: str | None = None) -> None:
        with self._tx() as conn:
            conn.execute(
                "UPDATE scan_jobs SET state = ?, error = ?, finished_at = ? "
                "WHERE id = ?",
                (ScanState.FAILED.value if error else ScanState.DONE.value,
                 error, int(self._clock()), job_id))

    def _scan_job_row(self, conn, job_id: int) -> ScanJob:
        row = conn.execute("SELECT * FROM scan_jobs WHERE id = ?",
                           (job_id,)).fetchone()
        if row is None:
            raise KeyError(f"no scan job with id {job_id}")
        return ScanJob(job_id=row["id"], repo_id=row["repo_id"],
                       state=ScanState(row["state"]),
                       files_done=row["files_done"],
                       files_total=row["files_total"], error=row["error"],
                       created_at=row["created_at"],
                       started_at=row["started_at"],
                       finished_at=row["finished_at"])

    def get_scan_job(self, job_id: int) -> ScanJob:
        return self._scan_job_row(self._conn(), job_id)
