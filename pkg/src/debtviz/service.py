"""HTTP layer plus the background scan and classifier workers.

Every statistics endpoint is a verbatim serialization of one datastore
query; handlers hold no state of their own, so anything the UI shows can be
traced to a single store call.  Workers run as plain daemon-less threads and
honor a shutdown event, releasing any claims they have not finished.
"""

import json
import logging
import os
import threading
from dataclasses import dataclass

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse
from starlette.middleware.cors import CORSMiddleware

from . import gitrepo
from .cnn import CnnModel, predict
from .errors import (
    NoSnapshots,
    NotARepository,
    NotClassified,
    StaleClaim,
    UnknownRepo,
)
from .extractor import CommentKind
from .gitrepo import SamplePolicy, ScanConfig
from .keywords import extract_keywords
from .labels import LABELS, SATD_LABELS, SatdLabel
from .store import Datastore, HeatmapNode, TargetKind

log = logging.getLogger("debtviz.service")

DEFAULT_PORT = 8080


@dataclass
class ServiceConfig:
    batch_size: int = 32
    idle_sleep: float = 2.0
    classifier_workers: int = 1
    scan_jobs: int = 1  # per-file fanout within one snapshot scan
    sample_policy: SamplePolicy | None = None  # None: scanner default
    start_workers: bool = True

    def __post_init__(self):
        if self.sample_policy is None:
            self.sample_policy = SamplePolicy()


class ServiceState:
    """Shared handles: the store, the (optional) model, worker lifecycle."""

    def __init__(self, store: Datastore, model: CnnModel | None,
                 config: ServiceConfig):
        self.store = store
        self.model = model
        self.config = config
        self.shutdown = threading.Event()
        self.threads: list[threading.Thread] = []

    def start(self):
        if not self.config.start_workers:
            return
        self.threads.append(threading.Thread(
            target=scan_worker, args=(self,), name="scan-worker"))
        for i in range(self.config.classifier_workers):
            self.threads.append(threading.Thread(
                target=classifier_worker, args=(self, f"classifier-{i}"),
                name=f"classifier-{i}"))
        for t in self.threads:
            t.start()

    def stop(self):
        self.shutdown.set()
        for t in self.threads:
            t.join(timeout=30)
        self.threads.clear()


# -- workers ---------------------------------------------------------------

def run_scan_job(state: ServiceState, job) -> None:
    """Execute one scan job: sample revisions, extract, snapshot each."""
    store = state.store
    try:
        info = store.get_repo(job.repo_id)
        handle = gitrepo.open_repo(info.path)
        samples = gitrepo.sample_revisions(handle, state.config.sample_policy)
        per_rev_files = [
            len(gitrepo.list_source_files(handle, s.commit_id))
            for s in samples]
        total = sum(per_rev_files)
        done = 0
        store.update_scan_progress(job.job_id, 0, total)
        scan_config = ScanConfig(jobs=state.config.scan_jobs,
                                 policy=state.config.sample_policy)
        for sample, n_files in zip(samples, per_rev_files):
            if state.shutdown.is_set():
                store.finish_scan_job(job.job_id, error="shutdown")
                return
            result = gitrepo.scan_snapshot(handle, sample.commit_id,
                                           scan_config)
            store.store_snapshot(job.repo_id, sample, result.comments)
            for err in result.errors:
                log.warning("scan %s at %s: %s: %s", info.name,
                            sample.commit_id[:10], err.file_path, err.message)
            done += n_files
            store.update_scan_progress(job.job_id, done, total)
        store.finish_scan_job(job.job_id)
    except Exception as exc:
        log.exception("scan job %s failed", job.job_id)
        store.finish_scan_job(job.job_id, error=str(exc))


def scan_worker(state: ServiceState) -> None:
    while not state.shutdown.is_set():
        job = state.store.claim_next_scan_job()
        if job is None:
            state.shutdown.wait(state.config.idle_sleep)
            continue
        run_scan_job(state, job)


def classifier_worker(state: ServiceState, worker_id: str) -> None:
    store = state.store
    while not state.shutdown.is_set():
        model = state.model
        if model is None:
            state.shutdown.wait(state.config.idle_sleep)
            continue
        batch = store.claim_unclassified(batch_size=state.config.batch_size,
                                         worker_id=worker_id)
        if not batch:
            state.shutdown.wait(state.config.idle_sleep)
            continue
        for position, target in enumerate(batch):
            if state.shutdown.is_set():
                for left in batch[position:]:
                    store.release_claim(worker_id, left.target_id)
                return
            try:
                task = target.kind.task
                classification = predict(model, target.text, task)
                classification.target_kind = target.kind.value
                classification.target_id = target.target_id
                keywords = extract_keywords(model, target.text, task)
                store.store_classification(worker_id, classification,
                                           keywords)
            except StaleClaim:
                continue  # someone else finished it; drop our result
            except Exception:
                log.exception("classifying target %s failed",
                              target.target_id)
                store.release_claim(worker_id, target.target_id)


def drain_queue(store: Datastore, model: CnnModel, worker_id: str = "cli",
                batch_size: int = 32, kinds=None) -> int:
    """Classify every queued target synchronously; returns how many landed.

    Same per-target behavior as classifier_worker, minus the thread loop —
    used by the command line to finish a scan in one process.
    """
    done = 0
    while True:
        batch = store.claim_unclassified(kinds=kinds, batch_size=batch_size,
                                         worker_id=worker_id)
        if not batch:
            return done
        for target in batch:
            task = target.kind.task
            classification = predict(model, target.text, task)
            classification.target_kind = target.kind.value
            classification.target_id = target.target_id
            keywords = extract_keywords(model, target.text, task)
            try:
                store.store_classification(worker_id, classification,
                                           keywords)
            except StaleClaim:
                continue
            done += 1


# -- serialization helpers -------------------------------------------------

def _label_map(counts: dict) -> dict:
    return {label.value: counts.get(label, 0) for label in LABELS}


def _satd_label_map(counts: dict) -> dict:
    return {label.value: n for label, n in counts.items()}


def _heatmap_json(node: HeatmapNode) -> dict:
    return {
        "path": node.path,
        "counts": _satd_label_map(node.counts),
        "total_satd": node.total_satd,
        "total_comments": node.total_comments,
        "children": [_heatmap_json(child) for child in node.children],
    }


def _bad_path(path: str) -> bool:
    parts = path.split("/")
    return path.startswith("/") or ".." in parts


# -- app -------------------------------------------------------------------

def create_app(store: Datastore, model: CnnModel | None = None,
               config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    state = ServiceState(store, model, config)

    async def lifespan(app):
        state.start()
        yield
        state.stop()

    app = FastAPI(title="debtviz", lifespan=lifespan)
    app.state.service = state
    # The dashboard may be served from a different origin than the API
    # (its base URL is configurable), so answer preflights permissively.
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["GET", "POST"], allow_headers=["*"])

    def error(status: int, message: str) -> JSONResponse:
        return JSONResponse(status_code=status,
                            content={"detail": message})

    @app.exception_handler(UnknownRepo)
    async def _unknown_repo(request: Request, exc: UnknownRepo):
        return error(404, str(exc))

    @app.get("/health")
    async def health():
        return {
            "status": "ok",
            "model_version": state.model.version if state.model else None,
            "queue_depth": store.queue_depth(),
        }

    @app.post("/repos", status_code=201)
    async def register_repo(body: dict):
        name = str(body.get("name") or "").strip()
        path = str(body.get("path") or "").strip()
        if not name or not path:
            return error(400, "both 'name' and 'path' are required")
        try:
            gitrepo.open_repo(path)
        except NotARepository as exc:
            return error(400, str(exc))
        existing = next((r for r in store.list_repos() if r.path == path),
                        None)
        if existing is not None:
            if store.active_scan_job(existing.repo_id) is not None:
                return error(409, f"a scan for {path!r} is already running")
            repo_id = existing.repo_id
        else:
            repo_id = store.register_repo(name, path)
        job_id = store.create_scan_job(repo_id)
        return {"repo_id": repo_id, "scan_job_id": job_id,
                "state": "QUEUED"}

    @app.get("/repos")
    async def list_repos():
        return {"repos": [{"repo_id": r.repo_id, "name": r.name,
                           "path": r.path} for r in store.list_repos()]}

    @app.get("/repos/{repo_id}/scan")
    async def scan_status(repo_id: int):
        store.get_repo(repo_id)
        job_id = store.active_scan_job(repo_id)
        if job_id is None:
            return {"job": None}
        job = store.get_scan_job(job_id)
        return {"job": {"job_id": job.job_id, "state": job.state.value,
                        "files_done": job.files_done,
                        "files_total": job.files_total,
                        "error": job.error}}

    @app.get("/repos/{repo_id}/stats/comments")
    async def stats_comments(repo_id: int):
        labels = store.stats_labels(repo_id, kinds={TargetKind.COMMENT})
        kinds = store.stats_comment_kinds(repo_id)
        return {
            "by_label": _label_map(labels),
            "by_comment_kind": {kind.value: kinds.get(kind, 0)
                                for kind in CommentKind},
        }

    @app.get("/repos/{repo_id}/stats/issues")
    async def stats_issues(repo_id: int):
        stats = store.stats_issues(repo_id)
        return {
            "by_label": {f.value: _label_map(m)
                         for f, m in stats["by_label"].items()},
            "by_issue_type": stats["by_issue_type"],
            "by_open_closed": {oc.value: n for oc, n
                               in stats["by_open_closed"].items()},
        }

    @app.get("/repos/{repo_id}/timeline")
    async def timeline(repo_id: int):
        try:
            points = store.timeline(repo_id)
        except NoSnapshots as exc:
            return error(404, str(exc))
        return {"points": [{
            "commit_id": p.commit_id,
            "timestamp": p.timestamp,
            "counts": _label_map(p.counts),
            "total_comments": p.total_comments,
        } for p in points]}

    @app.get("/repos/{repo_id}/heatmap")
    async def heatmap(repo_id: int, label: str | None = Query(None)):
        chosen = None
        if label is not None:
            try:
                chosen = SatdLabel(label)
            except ValueError:
                return error(422, f"unknown label {label!r}")
            if chosen not in SATD_LABELS:
                return error(422, f"label {label!r} is not a SATD label")
        return _heatmap_json(store.heatmap(repo_id, label=chosen))

    @app.get("/repos/{repo_id}/tree")
    async def tree(repo_id: int, path: str = Query("")):
        info = store.get_repo(repo_id)
        clean = path.strip("/")
        if _bad_path(clean):
            return error(404, f"path outside repository: {path!r}")
        snap = store.latest_snapshot(repo_id)
        if snap is None:
            return error(404, "repository has no scanned snapshot yet")
        handle = gitrepo.open_repo(info.path)
        files = gitrepo.list_source_files(handle, snap[0])
        prefix = f"{clean}/" if clean else ""
        inside = [f[len(prefix):] for f in files if f.startswith(prefix)]
        if clean and not inside:
            return error(404, f"no such directory: {path!r}")
        try:
            counted = {e.name: e for e in store.tree_listing(repo_id, clean)}
        except KeyError:
            counted = {}
        dir_names = sorted({rest.split("/", 1)[0] for rest in inside
                            if "/" in rest})
        file_names = sorted(rest for rest in inside if "/" not in rest)
        entries = []
        for name, is_dir in [(n, True) for n in dir_names] + \
                            [(n, False) for n in file_names]:
            entry = counted.get(name)
            entries.append({
                "name": name,
                "path": f"{prefix}{name}",
                "is_dir": is_dir,
                "total_comments": entry.total_comments if entry else 0,
                "satd_total": entry.satd_total if entry else 0,
            })
        return {"path": clean, "entries": entries}

    @app.get("/repos/{repo_id}/file")
    async def file_view(repo_id: int, path: str = Query(...)):
        info = store.get_repo(repo_id)
        clean = path.strip("/")
        if _bad_path(clean) or not clean:
            return error(404, f"path outside repository: {path!r}")
        snap = store.latest_snapshot(repo_id)
        if snap is None:
            return error(404, "repository has no scanned snapshot yet")
        handle = gitrepo.open_repo(info.path)
        if clean not in gitrepo.list_source_files(handle, snap[0]):
            return error(404, f"no such file in scanned tree: {path!r}")
        raw = gitrepo.read_file_at(handle, snap[0], clean)
        if b"\x00" in raw:
            return error(415, f"binary file: {path!r}")
        content = raw.decode("utf-8", errors="replace")
        rows = store.comments_for_file(repo_id, clean)
        return {
            "path": clean,
            "content": content,
            "comments": [{
                "comment_id": r["comment_id"],
                "span": {"line_start": r["line_start"],
                         "line_end": r["line_end"],
                         "col_start": r["col_start"],
                         "col_end": r["col_end"]},
                "kind": r["kind"],
                "label": r["label"],
                "probs": (None if r["probs"] is None
                          else json.loads(r["probs"])),
                "model_version": r["model_version"],
            } for r in rows],
        }

    @app.get("/comments/{comment_id}/keywords")
    async def comment_keywords(comment_id: int):
        try:
            spans = store.keywords_for_comment(comment_id)
        except KeyError as exc:
            return error(404, str(exc))
        except NotClassified as exc:
            return error(409, str(exc))
        return [{"token_start": s.token_start, "token_end": s.token_end,
                 "text": s.text, "score": s.score} for s in spans]

    return app


def serve(store: Datastore, model: CnnModel | None = None,
          config: ServiceConfig | None = None,
          port: int | None = None, host: str = "127.0.0.1") -> None:
    import uvicorn

    if port is None:
        port = int(os.environ.get("DEBTVIZ_PORT", DEFAULT_PORT))
    uvicorn.run(create_app(store, model, config), host=host, port=port)
