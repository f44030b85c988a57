"""HTTP endpoints and the background workers, exercised through a real
datastore and throwaway git repositories."""

import json
import time

import pytest
from fastapi.testclient import TestClient

from debtviz.cnn import (
    CnnHyperparams,
    TrainConfig,
    build_model_from_corpus,
    predict,
    train,
)
from debtviz.corpus import synthetic_corpus
from debtviz.gitrepo import RevisionSample
from debtviz.issues import IssueDoc
from debtviz.keywords import KeywordSpan
from debtviz.labels import LABELS, SatdLabel, TaskId
from debtviz.service import ServiceConfig, create_app, run_scan_job
from debtviz.store import Datastore, ScanState, TargetKind
from gitfixtures import commit_files, make_repo
from store_oracle import classify_target, drain, make_comment

JAVA_MAIN = """\
public class Main {
    // todo refactor this mess
    int x;
    // just a note
}
"""

JAVA_HELPER = """\
public class Helper {
    // fixme timeout flaky
}
"""

JAVA_PLAIN = """\
public class Plain {
    int y;
}
"""


@pytest.fixture
def store(tmp_path):
    ds = Datastore(path=str(tmp_path / "svc.db"))
    yield ds
    ds.close()


@pytest.fixture
def client(store):
    app = create_app(store, model=None,
                     config=ServiceConfig(start_workers=False))
    return TestClient(app)


@pytest.fixture
def git_repo(tmp_path):
    repo = make_repo(tmp_path / "fixture")
    commit_files(repo, {"src/Main.java": JAVA_MAIN},
                 timestamp=1_600_000_000)
    commit_files(repo, {"src/util/Helper.java": JAVA_HELPER,
                        "README.md": "docs, not scanned\n"},
                 timestamp=1_600_100_000)
    commit_files(repo, {"src/Plain.java": JAVA_PLAIN,
                        "bin/blob.java": b"\x00\x01binary"},
                 timestamp=1_600_200_000)
    return repo


def scan_now(client, store, git_repo, name="fixture"):
    """Register via the API, then run the queued scan synchronously."""
    response = client.post("/repos", json={"name": name,
                                           "path": str(git_repo)})
    assert response.status_code == 201, response.text
    body = response.json()
    state = client.app.state.service
    job = store.claim_next_scan_job()
    assert job.job_id == body["scan_job_id"]
    run_scan_job(state, job)
    assert store.get_scan_job(job.job_id).state is ScanState.DONE
    return body["repo_id"]


class TestHealth:
    def test_health_without_model(self, client, store):
        response = client.get("/health")
        assert response.status_code == 200
        assert response.json() == {"status": "ok", "model_version": None,
                                   "queue_depth": 0}
        assert response.headers["content-type"].startswith(
            "application/json")

    def test_queue_depth_reflects_store(self, client, store):
        repo = store.register_repo("r", "/r")
        store.upsert_comments(repo, [make_comment("a.java", "todo x")])
        assert client.get("/health").json()["queue_depth"] == 1


class TestRegisterRepo:
    def test_register_enqueues_scan(self, client, store, git_repo):
        response = client.post("/repos", json={"name": "fix",
                                               "path": str(git_repo)})
        assert response.status_code == 201
        body = response.json()
        assert body["state"] == "QUEUED"
        assert store.active_scan_job(body["repo_id"]) == body["scan_job_id"]
        status = client.get(f"/repos/{body['repo_id']}/scan").json()
        assert status["job"]["state"] == "QUEUED"

    def test_invalid_path_is_400(self, client, tmp_path):
        response = client.post("/repos", json={"name": "x",
                                               "path": str(tmp_path)})
        assert response.status_code == 400

    def test_missing_fields_are_400(self, client):
        assert client.post("/repos", json={"name": "x"}).status_code == 400
        assert client.post("/repos", json={"path": "/p"}).status_code == 400

    def test_concurrent_duplicate_scan_is_409(self, client, git_repo):
        first = client.post("/repos", json={"name": "a",
                                            "path": str(git_repo)})
        assert first.status_code == 201
        second = client.post("/repos", json={"name": "a",
                                             "path": str(git_repo)})
        assert second.status_code == 409

    def test_rescan_after_done_reuses_repo(self, client, store, git_repo):
        repo_id = scan_now(client, store, git_repo)
        response = client.post("/repos", json={"name": "fixture",
                                               "path": str(git_repo)})
        assert response.status_code == 201
        assert response.json()["repo_id"] == repo_id


class TestStatsEndpoints:
    def seed(self, store):
        repo = store.register_repo("seeded", "/seeded")
        store.upsert_comments(repo, [
            make_comment("a.java", "todo tighten retries"),
            make_comment("a.java", "fixme slow test", line=2),
            make_comment("b.java", "plain words"),
        ])
        store.upsert_issues(repo, [
            IssueDoc(project="P", key="P-1", summary="todo cache rework",
                     description="fixme eviction test", issue_type="Bug",
                     status="Open", created_at=1_600_000_000),
            IssueDoc(project="P", key="P-2", summary="plain request",
                     description="", issue_type="Task", status="Closed",
                     created_at=1_600_000_100),
        ])
        drain(store)
        return repo

    def test_fresh_repo_serves_zero_maps(self, client, store):
        repo = store.register_repo("empty", "/empty")
        body = client.get(f"/repos/{repo}/stats/comments").json()
        assert set(body["by_label"]) == {label.value for label in LABELS}
        assert all(v == 0 for v in body["by_label"].values())
        assert all(v == 0 for v in body["by_comment_kind"].values())
        issues = client.get(f"/repos/{repo}/stats/issues").json()
        assert issues["by_issue_type"] == {}
        assert issues["by_open_closed"] == {"OPEN": 0, "CLOSED": 0}

    def test_comment_stats_equal_direct_store_query(self, client, store):
        repo = self.seed(store)
        body = client.get(f"/repos/{repo}/stats/comments").json()
        labels = store.stats_labels(repo, kinds={TargetKind.COMMENT})
        kinds = store.stats_comment_kinds(repo)
        assert body["by_label"] == {
            label.value: n for label, n in labels.items()}
        assert body["by_comment_kind"] == {
            kind.value: n for kind, n in kinds.items()}

    def test_issue_stats_equal_direct_store_query(self, client, store):
        repo = self.seed(store)
        body = client.get(f"/repos/{repo}/stats/issues").json()
        stats = store.stats_issues(repo)
        assert body["by_label"] == {
            f.value: {label.value: n for label, n in m.items()}
            for f, m in stats["by_label"].items()}
        assert body["by_issue_type"] == stats["by_issue_type"]
        assert body["by_open_closed"] == {
            oc.value: n for oc, n in stats["by_open_closed"].items()}
        assert sum(body["by_issue_type"].values()) == \
            sum(body["by_open_closed"].values())

    def test_unknown_repo_404_everywhere(self, client):
        for url in ["/repos/999/stats/comments", "/repos/999/stats/issues",
                    "/repos/999/timeline", "/repos/999/heatmap",
                    "/repos/999/tree", "/repos/999/file?path=x",
                    "/repos/999/scan"]:
            assert client.get(url).status_code == 404, url


class TestTimelineAndHeatmap:
    def seed(self, store):
        repo = store.register_repo("tl", "/tl")
        c1 = make_comment("src/a.java", "todo alpha")
        c2 = make_comment("src/a.java", "plain beta", line=5)
        c3 = make_comment("src/util/b.java", "fixme gamma")
        store.store_snapshot(repo, RevisionSample("r1", 100, 0), [c1, c2])
        store.store_snapshot(repo, RevisionSample("r2", 200, 1),
                             [c1, c2, c3])
        drain(store)
        return repo

    def test_timeline_matches_store(self, client, store):
        repo = self.seed(store)
        body = client.get(f"/repos/{repo}/timeline").json()
        points = store.timeline(repo)
        assert body["points"] == [{
            "commit_id": p.commit_id,
            "timestamp": p.timestamp,
            "counts": {label.value: p.counts[label] for label in LABELS},
            "total_comments": p.total_comments,
        } for p in points]
        assert [p["timestamp"] for p in body["points"]] == [100, 200]

    def test_timeline_without_snapshots_is_404(self, client, store):
        repo = store.register_repo("empty", "/empty")
        assert client.get(f"/repos/{repo}/timeline").status_code == 404

    def test_heatmap_matches_store_and_sums(self, client, store):
        repo = self.seed(store)
        body = client.get(f"/repos/{repo}/heatmap").json()

        def check(node):
            assert node["total_satd"] == sum(node["counts"].values())
            child_counts = {}
            child_total = 0
            for child in node["children"]:
                check(child)
                child_total += child["total_comments"]
                for key, value in child["counts"].items():
                    child_counts[key] = child_counts.get(key, 0) + value
            for key, value in child_counts.items():
                assert node["counts"][key] >= value
            assert node["total_comments"] >= child_total

        check(body)
        assert body["path"] == ""
        assert body["total_comments"] == 3
        assert body["counts"]["CODE_DESIGN_DEBT"] == 1
        assert body["counts"]["TEST_DEBT"] == 1

    def test_heatmap_label_filter(self, client, store):
        repo = self.seed(store)
        body = client.get(f"/repos/{repo}/heatmap",
                          params={"label": "TEST_DEBT"}).json()
        assert set(body["counts"]) == {"TEST_DEBT"}
        assert body["total_satd"] == 1

    def test_heatmap_unknown_label_is_422(self, client, store):
        repo = self.seed(store)
        assert client.get(f"/repos/{repo}/heatmap",
                          params={"label": "NOPE"}).status_code == 422
        assert client.get(f"/repos/{repo}/heatmap",
                          params={"label": "NON_SATD"}).status_code == 422


class TestTreeAndFile:
    @pytest.fixture
    def scanned(self, client, store, git_repo):
        repo_id = scan_now(client, store, git_repo)
        drain(store)
        return repo_id

    def test_root_listing_dirs_first(self, client, scanned):
        body = client.get(f"/repos/{scanned}/tree").json()
        names = [(e["name"], e["is_dir"]) for e in body["entries"]]
        assert names == [("bin", True), ("src", True)]

    def test_src_listing_with_counts(self, client, scanned):
        body = client.get(f"/repos/{scanned}/tree",
                          params={"path": "src"}).json()
        by_name = {e["name"]: e for e in body["entries"]}
        assert list(by_name) == ["util", "Main.java", "Plain.java"]
        assert by_name["Main.java"]["total_comments"] == 2
        assert by_name["Main.java"]["satd_total"] == 1
        assert by_name["util"]["total_comments"] == 1
        assert by_name["util"]["satd_total"] == 1
        assert by_name["Plain.java"]["total_comments"] == 0

    def test_tree_counts_match_heatmap(self, client, scanned):
        heatmap = client.get(f"/repos/{scanned}/heatmap").json()
        src_node = next(c for c in heatmap["children"]
                        if c["path"] == "src")
        body = client.get(f"/repos/{scanned}/tree").json()
        src_entry = next(e for e in body["entries"] if e["name"] == "src")
        assert src_entry["satd_total"] == src_node["total_satd"]
        assert src_entry["total_comments"] == src_node["total_comments"]

    def test_tree_traversal_and_unknown(self, client, scanned):
        assert client.get(f"/repos/{scanned}/tree",
                          params={"path": "../etc"}).status_code == 404
        assert client.get(f"/repos/{scanned}/tree",
                          params={"path": "no/such"}).status_code == 404

    def test_tree_before_any_scan_is_404(self, client, store):
        repo = store.register_repo("unscanned", "/nowhere")
        assert client.get(f"/repos/{repo}/tree").status_code == 404

    def test_file_spans_are_byte_accurate(self, client, scanned):
        body = client.get(f"/repos/{scanned}/file",
                          params={"path": "src/Main.java"}).json()
        assert "todo refactor" in body["content"]
        lines = body["content"].split("\n")
        for comment in body["comments"]:
            span = comment["span"]
            assert span["line_start"] == span["line_end"]
            line = lines[span["line_start"] - 1].encode("utf-8")
            text = line[span["col_start"]:span["col_end"]].decode("utf-8")
            assert text.startswith("//")
        labels = {c["label"] for c in body["comments"]}
        assert SatdLabel.CODE_DESIGN_DEBT.value in labels
        assert SatdLabel.NON_SATD.value in labels
        for comment in body["comments"]:
            assert comment["probs"] is not None
            assert len(comment["probs"]) == len(LABELS)

    def test_file_without_comments_is_empty_list(self, client, scanned):
        body = client.get(f"/repos/{scanned}/file",
                          params={"path": "src/Plain.java"}).json()
        assert body["comments"] == []

    def test_binary_file_is_415(self, client, scanned):
        response = client.get(f"/repos/{scanned}/file",
                              params={"path": "bin/blob.java"})
        assert response.status_code == 415

    def test_unscanned_or_outside_paths_are_404(self, client, scanned):
        for path in ["README.md", "../secrets", "nope.java"]:
            response = client.get(f"/repos/{scanned}/file",
                                  params={"path": path})
            assert response.status_code == 404, path


class TestKeywordsEndpoint:
    def test_stored_keywords_round_trip(self, client, store):
        repo = store.register_repo("kw", "/kw")
        store.upsert_comments(repo, [make_comment("a.java", "todo fix it")])
        (target,) = store.claim_unclassified(batch_size=1, worker_id="w0")
        spans = (KeywordSpan(0, 1, "todo", 3.5),
                 KeywordSpan(1, 3, "fix it", 1.25))
        classify_target(store, target, keywords=spans)
        body = client.get(
            f"/comments/{target.ref_id}/keywords").json()
        assert body == [
            {"token_start": 0, "token_end": 1, "text": "todo",
             "score": 3.5},
            {"token_start": 1, "token_end": 3, "text": "fix it",
             "score": 1.25},
        ]

    def test_non_satd_comment_has_no_keywords(self, client, store):
        repo = store.register_repo("kw", "/kw")
        store.upsert_comments(repo, [make_comment("a.java", "plain words")])
        (target,) = store.claim_unclassified(batch_size=1, worker_id="w0")
        classify_target(store, target)
        assert client.get(
            f"/comments/{target.ref_id}/keywords").json() == []

    def test_unknown_comment_is_404(self, client):
        assert client.get("/comments/999/keywords").status_code == 404

    def test_unclassified_comment_is_409(self, client, store):
        repo = store.register_repo("kw", "/kw")
        store.upsert_comments(repo, [make_comment("a.java", "todo wait")])
        (target,) = store.claim_unclassified(batch_size=1, worker_id="w0")
        assert client.get(
            f"/comments/{target.ref_id}/keywords").status_code == 409


SMALL_HP = CnnHyperparams(embed_dim=16, widths=(1, 2, 3),
                          filters_per_width=8, max_len=16)


@pytest.fixture(scope="module")
def worker_model():
    corpus = synthetic_corpus(150, seed=21)
    model = build_model_from_corpus(corpus, SMALL_HP, seed=3,
                                    version="svc-test-1")
    trained, _ = train(model, corpus, TrainConfig(
        epochs=50, batch_size=32, lr=0.2, seed=3, stop_at_accuracy=0.995))
    return trained, corpus


def wait_until(condition, timeout=30.0, step=0.05):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        if condition():
            return True
        time.sleep(step)
    return condition()


class TestWorkers:
    def test_classifier_drains_queue(self, tmp_path, worker_model):
        model, corpus = worker_model
        store = Datastore(path=str(tmp_path / "w.db"))
        try:
            repo = store.register_repo("w", "/w")
            texts = [e.text for e in corpus
                     if e.task is TaskId.COMMENTS][:20]
            store.upsert_comments(repo, [
                make_comment(f"f{i}.java", text)
                for i, text in enumerate(texts)])
            app = create_app(store, model=model, config=ServiceConfig(
                batch_size=8, idle_sleep=0.05, start_workers=True))
            with TestClient(app) as client:
                assert wait_until(lambda: store.queue_depth() == 0)
                health = client.get("/health").json()
                assert health["queue_depth"] == 0
                assert health["model_version"] == "svc-test-1"
            counts = store.stats_labels(repo)
            assert sum(counts.values()) == 20
            states = store.queue_states()
            assert states == {"QUEUED": 0, "CLAIMED": 0, "DONE": 20}
        finally:
            store.close()

    def test_worker_stores_keywords_served_by_endpoint(self, tmp_path,
                                                       worker_model):
        model, corpus = worker_model
        satd_text = next(
            e.text for e in corpus
            if e.task is TaskId.COMMENTS
            and "todo" in e.text.split()
            and predict(model, e.text, TaskId.COMMENTS).label
            is SatdLabel.CODE_DESIGN_DEBT)
        store = Datastore(path=str(tmp_path / "kw.db"))
        try:
            repo = store.register_repo("kw", "/kw")
            store.upsert_comments(repo, [make_comment("a.java", satd_text)])
            app = create_app(store, model=model, config=ServiceConfig(
                batch_size=8, idle_sleep=0.05, start_workers=True))
            with TestClient(app) as client:
                assert wait_until(lambda: store.queue_depth() == 0)
                rows = store.comments_for_file(repo, "a.java")
                comment_id = rows[0]["comment_id"]
                body = client.get(f"/comments/{comment_id}/keywords").json()
            assert body, "expected stored keywords for a SATD comment"
            assert any("todo" in span["text"].split() for span in body)
        finally:
            store.close()

    def test_scan_worker_end_to_end(self, tmp_path, git_repo, worker_model):
        model, _ = worker_model
        store = Datastore(path=str(tmp_path / "e2e.db"))
        try:
            app = create_app(store, model=model, config=ServiceConfig(
                batch_size=8, idle_sleep=0.05, start_workers=True))
            with TestClient(app) as client:
                response = client.post("/repos", json={
                    "name": "fixture", "path": str(git_repo)})
                assert response.status_code == 201
                repo_id = response.json()["repo_id"]
                job_id = response.json()["scan_job_id"]
                assert wait_until(
                    lambda: store.get_scan_job(job_id).state in
                    (ScanState.DONE, ScanState.FAILED))
                job = store.get_scan_job(job_id)
                assert job.state is ScanState.DONE, job.error
                assert job.files_done == job.files_total > 0
                assert wait_until(lambda: store.queue_depth() == 0)
                timeline = client.get(f"/repos/{repo_id}/timeline").json()
                assert len(timeline["points"]) == 3
                times = [p["timestamp"] for p in timeline["points"]]
                assert times == sorted(times)
                assert timeline["points"][-1]["total_comments"] == 3
        finally:
            store.close()

    def test_shutdown_releases_unfinished_claims(self, tmp_path,
                                                 worker_model):
        model, corpus = worker_model
        store = Datastore(path=str(tmp_path / "s.db"))
        try:
            repo = store.register_repo("s", "/s")
            texts = [e.text for e in corpus if e.task is TaskId.COMMENTS]
            comments = [make_comment(f"f{i}.java", f"{text} v{i}")
                        for i, text in enumerate(texts * 4)]
            store.upsert_comments(repo, comments)
            total = len(comments)
            app = create_app(store, model=model, config=ServiceConfig(
                batch_size=4, idle_sleep=0.05, start_workers=True))
            with TestClient(app):
                pass  # enter and immediately shut down
            states = store.queue_states()
            assert states["CLAIMED"] == 0
            assert states["QUEUED"] + states["DONE"] == total
        finally:
            store.close()
