"""Repository scanning tests against throwaway git repos built on the fly."""

import subprocess

import pytest

import debtviz.gitrepo as gitrepo
from debtviz.errors import EmptyHistory, NotARepository, UnknownRevision
from debtviz.extractor import CommentKind
from debtviz.gitrepo import (
    RevisionSample,
    SamplePolicy,
    SampleStrategy,
    ScanConfig,
    head_commit,
    list_source_files,
    open_repo,
    sample_revisions,
    scan_snapshot,
)
from debtviz.languages import has_profile
from gitfixtures import commit_files, make_repo, run_git


def rev_list(repo):
    out = subprocess.run(["git", "-C", str(repo), "log", "--format=%H"],
                         check=True, capture_output=True, text=True).stdout
    return out.split()


@pytest.fixture(scope="module")
def three_commit_repo(tmp_path_factory):
    repo = make_repo(tmp_path_factory.mktemp("repos") / "three")
    commit_files(repo, {"a.java": "// first\nint a;\n"}, "one", 1_600_000_000)
    commit_files(repo, {"b.py": "# second\nx = 1\n"}, "two", 1_600_100_000)
    commit_files(repo, {"a.java": "// first\n// extra\nint a;\n"},
                 "three", 1_600_200_000)
    return repo


@pytest.fixture(scope="module")
def long_repo(tmp_path_factory):
    repo = make_repo(tmp_path_factory.mktemp("repos") / "long")
    for i in range(30):
        commit_files(repo, {"main.c": f"// rev {i}\nint v = {i};\n"},
                     f"c{i}", 1_600_000_000 + i * 3600)
    return repo


class TestOpenRepo:
    def test_empty_directory_is_not_a_repository(self, tmp_path):
        with pytest.raises(NotARepository):
            open_repo(tmp_path)

    def test_valid_repo_resolves_head(self, three_commit_repo):
        handle = open_repo(three_commit_repo)
        assert not handle.bare
        assert head_commit(handle) == rev_list(three_commit_repo)[0]

    def test_bare_repo_detected(self, tmp_path):
        bare = tmp_path / "bare.git"
        subprocess.run(["git", "init", "-q", "--bare", str(bare)],
                       check=True, capture_output=True)
        assert open_repo(bare).bare

    def test_repo_without_commits_has_empty_history(self, tmp_path):
        repo = make_repo(tmp_path / "fresh")
        handle = open_repo(repo)
        with pytest.raises(EmptyHistory):
            sample_revisions(handle)


class TestListSourceFiles:
    def test_extension_filter(self, tmp_path):
        repo = make_repo(tmp_path / "r")
        commit_files(repo, {"a.java": "int x;\n", "b.png": b"\x89PNG\r\n"})
        handle = open_repo(repo)
        assert list_source_files(handle, "HEAD") == ["a.java"]

    def test_exclusion_glob(self, tmp_path):
        repo = make_repo(tmp_path / "r")
        commit_files(repo, {"src/a.c": "int a;\n", "vendor/lib/b.c": "int b;\n"})
        handle = open_repo(repo)
        assert list_source_files(handle, "HEAD",
                                 exclude_globs=("vendor/**",)) == ["src/a.c"]

    def test_include_globs_limit_scope(self, tmp_path):
        repo = make_repo(tmp_path / "r")
        commit_files(repo, {"src/a.c": "int a;\n", "tools/b.c": "int b;\n"})
        handle = open_repo(repo)
        assert list_source_files(handle, "HEAD",
                                 include_globs=("src/*",)) == ["src/a.c"]

    def test_sorted_and_matches_reference_walk(self, tmp_path):
        repo = make_repo(tmp_path / "r")
        commit_files(repo, {
            "z.py": "x = 1\n", "a/deep/file.rs": "fn f() {}\n",
            "m.java": "int m;\n", "notes.txt": "hi\n", "img.png": b"\x00",
        })
        handle = open_repo(repo)
        got = list_source_files(handle, "HEAD")
        reference = subprocess.run(
            ["git", "-C", str(repo), "ls-tree", "-r", "--name-only", "HEAD"],
            check=True, capture_output=True, text=True).stdout.splitlines()
        expected = sorted(p for p in reference if has_profile(p))
        assert got == expected == ["a/deep/file.rs", "m.java", "z.py"]

    def test_unknown_revision(self, three_commit_repo):
        with pytest.raises(UnknownRevision):
            list_source_files(open_repo(three_commit_repo), "0" * 40)


class TestSampleRevisions:
    def test_small_repo_returns_every_commit(self, three_commit_repo):
        handle = open_repo(three_commit_repo)
        samples = sample_revisions(handle, SamplePolicy(max_points=10))
        assert len(samples) == 3
        assert [s.ordinal for s in samples] == [0, 1, 2]
        assert [s.timestamp for s in samples] == sorted(s.timestamp for s in samples)
        assert samples[-1].commit_id == head_commit(handle)

    def test_every_kth_subsamples_and_keeps_head(self, long_repo):
        handle = open_repo(long_repo)
        samples = sample_revisions(handle, SamplePolicy(
            strategy=SampleStrategy.EVERY_KTH, max_points=10))
        assert len(samples) == 10
        assert samples[-1].commit_id == head_commit(handle)
        ordinals = [s.ordinal for s in samples]
        assert ordinals == sorted(set(ordinals))

    def test_time_buckets_bound_the_sample_count(self, long_repo):
        handle = open_repo(long_repo)
        samples = sample_revisions(handle, SamplePolicy(
            strategy=SampleStrategy.TIME_BUCKETED, max_points=7))
        assert 1 <= len(samples) <= 7
        assert samples[-1].commit_id == head_commit(handle)

    def test_head_present_for_all_policies(self, long_repo):
        handle = open_repo(long_repo)
        head = head_commit(handle)
        for strategy in SampleStrategy:
            for max_points in (1, 2, 3, 5, 11, 29, 30, 50):
                samples = sample_revisions(
                    handle, SamplePolicy(strategy=strategy,
                                         max_points=max_points))
                assert len(samples) <= max_points
                assert any(s.commit_id == head for s in samples), \
                    (strategy, max_points)
                stamps = [s.timestamp for s in samples]
                assert stamps == sorted(stamps)
                assert [s.ordinal for s in samples] == list(range(len(samples)))

    def test_identical_timestamps_fall_back_to_positional(self, tmp_path):
        repo = make_repo(tmp_path / "same")
        for i in range(8):
            commit_files(repo, {"a.py": f"x = {i}\n"}, f"c{i}", 1_600_000_000)
        samples = sample_revisions(open_repo(repo), SamplePolicy(max_points=3))
        assert 1 <= len(samples) <= 3
        assert samples[-1].commit_id == rev_list(repo)[0]

    def test_invalid_max_points(self, three_commit_repo):
        with pytest.raises(ValueError):
            sample_revisions(open_repo(three_commit_repo),
                             SamplePolicy(max_points=0))


PLANTED = """\
// alpha note
int a; // beta trailing
/* gamma
 * block
 */
/** Doc for f. */
int f;
"""


class TestScanSnapshot:
    def test_hand_planted_comments_found_exactly(self, tmp_path):
        repo = make_repo(tmp_path / "r")
        commit_files(repo, {
            "src/main.java": PLANTED,
            "util.py": "# delta\nx = 1  # epsilon\n",
        })
        scan = scan_snapshot(open_repo(repo), "HEAD")
        assert scan.errors == []
        got = {(c.file_path, c.normalized_text, c.kind) for c in scan.comments}
        assert got == {
            ("src/main.java", "alpha note", CommentKind.INLINE),
            ("src/main.java", "beta trailing", CommentKind.INLINE),
            ("src/main.java", "gamma\nblock", CommentKind.BLOCK),
            ("src/main.java", "Doc for f.", CommentKind.DOC_BLOCK),
            ("util.py", "delta", CommentKind.INLINE),
            ("util.py", "epsilon", CommentKind.INLINE),
        }
        # Deterministic merge: path order.
        paths = [c.file_path for c in scan.comments]
        assert paths == sorted(paths)

    def test_empty_tree_scans_to_nothing(self, tmp_path):
        repo = make_repo(tmp_path / "r")
        commit_files(repo, {}, "empty")
        scan = scan_snapshot(open_repo(repo), "HEAD")
        assert scan.comments == [] and scan.errors == []

    def test_hash_overlap_across_revisions_is_untouched_files(self, tmp_path):
        repo = make_repo(tmp_path / "r")
        commit_files(repo, {
            "stable.c": "// keep me\nint s;\n",
            "moving.c": "// version one\nint m;\n",
        }, "first", 1_600_000_000)
        commit_files(repo, {
            "moving.c": "// version two\nint m;\n",
        }, "second", 1_600_001_000)
        first, second = rev_list(repo)[1], rev_list(repo)[0]
        handle = open_repo(repo)
        h1 = {c.content_hash for c in scan_snapshot(handle, first).comments}
        h2 = {c.content_hash for c in scan_snapshot(handle, second).comments}
        untouched = {c.content_hash
                     for c in scan_snapshot(handle, second).comments
                     if c.file_path == "stable.c"}
        assert h1 & h2 == untouched

    def test_one_broken_file_does_not_abort(self, tmp_path, monkeypatch):
        repo = make_repo(tmp_path / "r")
        commit_files(repo, {"good.py": "# fine\n", "bad.py": "# doomed\n"})
        real = gitrepo.extract_file_comments

        def flaky(data, profile, path):
            if path == "bad.py":
                raise IOError("synthetic read failure")
            return real(data, profile, path)

        monkeypatch.setattr(gitrepo, "extract_file_comments", flaky)
        scan = scan_snapshot(open_repo(repo), "HEAD")
        assert [c.file_path for c in scan.comments] == ["good.py"]
        assert [e.file_path for e in scan.errors] == ["bad.py"]
        assert "synthetic" in scan.errors[0].message

    def test_threaded_scan_matches_serial(self, tmp_path):
        repo = make_repo(tmp_path / "r")
        files = {f"m{i}.py": f"# note {i}\nx = {i}\n" for i in range(12)}
        commit_files(repo, files)
        handle = open_repo(repo)
        serial = scan_snapshot(handle, "HEAD", ScanConfig(jobs=1))
        threaded = scan_snapshot(handle, "HEAD", ScanConfig(jobs=4))
        assert serial.comments == threaded.comments
        assert serial.errors == threaded.errors == []

    def test_unknown_revision_propagates(self, three_commit_repo):
        with pytest.raises(UnknownRevision):
            scan_snapshot(open_repo(three_commit_repo), "f" * 40)
