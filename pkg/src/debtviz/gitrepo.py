"""Git history access: revision sampling along the first-parent chain and
comment snapshots of sampled trees.

All repository access shells out to the git CLI, which keeps odd on-disk
layouts (bare repos, alternates, worktrees) somebody else's problem.
"""

import fnmatch
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

from .errors import EmptyHistory, NotARepository, UnknownRevision
from .extractor import SourceComment, extract_file_comments
from .languages import has_profile, profile_for_path


class SampleStrategy(str, Enum):
    EVERY_KTH = "EVERY_KTH"
    TIME_BUCKETED = "TIME_BUCKETED"


@dataclass(frozen=True)
class SamplePolicy:
    strategy: SampleStrategy = SampleStrategy.TIME_BUCKETED
    max_points: int = 50


@dataclass(frozen=True)
class RevisionSample:
    commit_id: str
    timestamp: int  # UTC seconds
    ordinal: int  # position in the sampled sequence


@dataclass(frozen=True)
class ScanError:
    file_path: str
    message: str


@dataclass(frozen=True)
class SnapshotScan:
    comments: list[SourceComment]
    errors: list[ScanError]


@dataclass(frozen=True)
class ScanConfig:
    include_globs: tuple[str, ...] = ()  # empty = everything
    exclude_globs: tuple[str, ...] = ()
    policy: SamplePolicy = field(default_factory=SamplePolicy)
    jobs: int = 1


@dataclass(frozen=True)
class RepoHandle:
    root: str
    bare: bool

    def git(self, *args: str, binary: bool = False):
        proc = subprocess.run(["git", "-C", self.root, *args],
                              capture_output=True)
        if proc.returncode != 0:
            raise subprocess.CalledProcessError(
                proc.returncode, proc.args, proc.stdout, proc.stderr)
        return proc.stdout if binary else proc.stdout.decode("utf-8", "replace")


def open_repo(path) -> RepoHandle:
    """Bind a handle to the repository at path (working tree or bare)."""
    probe = subprocess.run(
        ["git", "-C", str(path), "rev-parse", "--is-bare-repository"],
        capture_output=True)
    if probe.returncode != 0:
        detail = probe.stderr.decode("utf-8", "replace").strip()
        raise NotARepository(f"{path}: {detail or 'not a git repository'}")
    return RepoHandle(root=str(path), bare=probe.stdout.strip() == b"true")


def head_commit(handle: RepoHandle) -> str:
    try:
        return handle.git("rev-parse", "--verify", "HEAD^{commit}").strip()
    except subprocess.CalledProcessError as exc:
        raise EmptyHistory(f"{handle.root}: no commits on HEAD") from exc


def _first_parent_chain(handle: RepoHandle) -> list[tuple[str, int]]:
    """(commit_id, timestamp) along first parents, oldest first."""
    try:
        out = handle.git("log", "--first-parent", "--format=%H %ct", "HEAD")
    except subprocess.CalledProcessError as exc:
        raise EmptyHistory(f"{handle.root}: no commits on HEAD") from exc
    chain = []
    for line in out.splitlines():
        commit_id, ts = line.split()
        chain.append((commit_id, int(ts)))
    chain.reverse()
    return chain


def list_source_files(handle: RepoHandle, rev: str,
                      include_globs=(), exclude_globs=()) -> list[str]:
    """Repo-relative paths at rev with a known language, sorted.

    Globs are shell-style patterns over the full relative path; an empty
    include list admits everything.
    """
    try:
        out = handle.git("ls-tree", "-r", "--name-only", "-z", rev)
    except subprocess.CalledProcessError as exc:
        raise UnknownRevision(f"{handle.root}: unknown revision {rev!r}") from exc
    paths = []
    for path in out.split("\0"):
        if not path or not has_profile(path):
            continue
        if include_globs and not any(fnmatch.fnmatch(path, g)
                                     for g in include_globs):
            continue
        if any(fnmatch.fnmatch(path, g) for g in exclude_globs):
            continue
        paths.append(path)
    return sorted(paths)


def sample_revisions(handle: RepoHandle,
                     policy: SamplePolicy | None = None) -> list[RevisionSample]:
    """≤ max_points first-parent commits, HEAD always among them.

    Ordered so timestamps never decrease with ordinal (chain order breaks
    timestamp ties, which also absorbs clock skew between commits).
    """
    policy = policy or SamplePolicy()
    if policy.max_points < 1:
        raise ValueError("max_points must be ≥ 1")
    chain = _first_parent_chain(handle)
    if not chain:
        raise EmptyHistory(f"{handle.root}: no commits on HEAD")

    if len(chain) <= policy.max_points:
        picked = list(range(len(chain)))
    elif policy.strategy is SampleStrategy.EVERY_KTH:
        picked = _every_kth(len(chain), policy.max_points)
    else:
        picked = _time_buckets(chain, policy.max_points)

    chosen = sorted(picked)
    chosen_commits = [chain[i] for i in chosen]
    chosen_commits.sort(key=lambda c: c[1])  # stable: ties keep chain order
    return [RevisionSample(commit_id=c, timestamp=t, ordinal=i)
            for i, (c, t) in enumerate(chosen_commits)]


def _every_kth(n: int, max_points: int) -> list[int]:
    """Indices of every k-th commit counting back from HEAD (index n-1)."""
    k = -(-n // max_points)  # ceil
    return [n - 1 - j for j in range(0, n, k)]


def _time_buckets(chain, max_points: int) -> list[int]:
    """Newest commit of each nonempty equal-width time bucket."""
    times = [t for _, t in chain]
    t_lo, t_hi = min(times), max(times)
    if t_hi == t_lo:  # degenerate span: fall back to positional sampling
        return _every_kth(len(chain), max_points)
    span = t_hi - t_lo
    newest_per_bucket: dict[int, int] = {}
    for i, (_, t) in enumerate(chain):
        bucket = min(max_points - 1, (t - t_lo) * max_points // span)
        newest_per_bucket[bucket] = i  # later chain position wins
    picked = set(newest_per_bucket.values())
    picked.add(len(chain) - 1)  # HEAD, whatever its timestamp
    while len(picked) > max_points:
        picked.remove(min(picked))
    return list(picked)


def read_file_at(handle: RepoHandle, rev: str, path: str) -> bytes:
    try:
        return handle.git("show", f"{rev}:{path}", binary=True)
    except subprocess.CalledProcessError as exc:
        detail = exc.stderr.decode("utf-8", "replace").strip()
        raise IOError(f"{rev}:{path}: {detail}") from exc


def scan_snapshot(handle: RepoHandle, rev: str,
                  config: ScanConfig | None = None) -> SnapshotScan:
    """All comments in the tree at rev, merged in path order.

    Per-file failures land in the error report instead of aborting the
    snapshot.  With jobs > 1, files are extracted concurrently and the merge
    order stays deterministic.
    """
    config = config or ScanConfig()
    paths = list_source_files(handle, rev, config.include_globs,
                              config.exclude_globs)

    def scan_one(path: str):
        data = read_file_at(handle, rev, path)
        return extract_file_comments(data, profile_for_path(path), path)

    comments: list[SourceComment] = []
    errors: list[ScanError] = []
    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            futures = [(p, pool.submit(scan_one, p)) for p in paths]
            results = []
            for path, fut in futures:
                try:
                    results.append((path, fut.result(), None))
                except Exception as exc:
                    results.append((path, None, str(exc)))
    else:
        results = []
        for path in paths:
            try:
                results.append((path, scan_one(path), None))
            except Exception as exc:
                results.append((path, None, str(exc)))
    for path, found, err in results:
        if err is None:
            comments.extend(found)
        else:
            errors.append(ScanError(file_path=path, message=err))
    return SnapshotScan(comments=comments, errors=errors)
