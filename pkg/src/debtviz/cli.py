"""Command-line entry point.

One subcommand per invocation:

    scan           walk a git repo's sampled history into the datastore
    train          fit a classifier on a labeled corpus and save it
    classify       label a single text with a saved model
    import-issues  load an issue-tracker JSONL dump into the datastore
    export         dump one repo (comments, issues, classifications, stats)
    report         render CSV tables and PNG charts for one repo
    serve          run the HTTP API

Exit codes: 0 on success, 1 on runtime failure (missing file, bad model,
empty corpus, ...), 2 on usage errors.  DEBTVIZ_DB_PATH, DEBTVIZ_MODEL_PATH
and DEBTVIZ_PORT supply defaults for --db, --model and --port.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import gitrepo
from .cnn import (
    CnnHyperparams,
    TrainConfig,
    build_model_from_corpus,
    load_model,
    predict,
    save_model,
    train,
)
from .corpus import read_corpus
from .errors import DebtvizError, ModelNotLoaded, NotARepository
from .issues import import_issue_dump
from .keywords import extract_keywords
from .labels import TaskId
from .service import ServiceConfig, drain_queue, serve
from .store import Datastore, TargetKind


class UsageError(Exception):
    """Bad invocation discovered after argparse (e.g. --repo isn't a repo)."""


def _env_model_path(explicit: str | None) -> str | None:
    return explicit or os.environ.get("DEBTVIZ_MODEL_PATH")


def _load_model_or_die(path: str | None):
    if not path:
        raise UsageError("no model given (--model or DEBTVIZ_MODEL_PATH)")
    try:
        return load_model(path)
    except (OSError, ValueError, KeyError) as exc:
        raise ModelNotLoaded(f"{path}: {exc}") from exc


# -- scan ------------------------------------------------------------------


def _cmd_scan(args: argparse.Namespace) -> int:
    try:
        handle = gitrepo.open_repo(args.repo)
    except NotARepository as exc:
        raise UsageError(str(exc)) from exc
    store = Datastore(path=args.db)
    try:
        path = os.path.abspath(args.repo)
        name = args.name or os.path.basename(path.rstrip("/"))
        existing = [r for r in store.list_repos() if r.path == path]
        repo_id = existing[0].repo_id if existing \
            else store.register_repo(name, path)

        policy = gitrepo.SamplePolicy(max_points=args.max_points)
        samples = gitrepo.sample_revisions(handle, policy)
        config = gitrepo.ScanConfig(policy=policy, jobs=args.jobs)
        inserted = unchanged = 0
        for sample in samples:
            scan = gitrepo.scan_snapshot(handle, sample.commit_id, config)
            for err in scan.errors:
                print(f"warning: {sample.commit_id[:10]} {err.file_path}: "
                      f"{err.message}", file=sys.stderr)
            result = store.store_snapshot(repo_id, sample, scan.comments)
            inserted += result.inserted
            unchanged += result.unchanged
        total = store.comment_count(repo_id)
        print(f"repo {repo_id} ({name}): scanned {len(samples)} revisions")
        print(f"{total} comments (inserted {inserted}, unchanged "
              f"{unchanged}), {store.queue_depth()} queued for "
              f"classification")

        if args.model:
            model = _load_model_or_die(args.model)
            classified = drain_queue(store, model,
                                     kinds={TargetKind.COMMENT})
            print(f"classified {classified} comments "
                  f"with {model.version}")
        return 0
    finally:
        store.close()


# -- train -----------------------------------------------------------------


def _cmd_train(args: argparse.Namespace) -> int:
    corpus = read_corpus(args.corpus)
    hp = CnnHyperparams(embed_dim=args.embed_dim, max_len=args.max_len)
    model = build_model_from_corpus(corpus, hp, min_freq=args.min_freq,
                                    seed=args.seed, version=args.version)
    config = TrainConfig(epochs=args.epochs, batch_size=args.batch_size,
                         lr=args.lr, seed=args.seed,
                         stop_at_accuracy=args.stop_at_accuracy)
    trained, metrics = train(model, corpus, config)
    save_model(trained, args.out)
    last_epoch = metrics[-1].epoch if metrics else 0
    print(f"trained {trained.version} on {len(corpus)} examples "
          f"({last_epoch} epochs)")
    for m in metrics:
        if m.epoch == last_epoch:
            print(f"{m.task.value}: final accuracy {m.accuracy:.4f} "
                  f"loss {m.loss:.4f}")
    print(f"model written to {args.out}")
    return 0


# -- classify --------------------------------------------------------------


def _cmd_classify(args: argparse.Namespace) -> int:
    model = _load_model_or_die(_env_model_path(args.model))
    task = TaskId(args.task)
    classification = predict(model, args.text, task)
    doc = {
        "label": classification.label.value,
        "probs": classification.probs,
        "model_version": classification.model_version,
        "task": task.value,
    }
    if args.keywords:
        spans = extract_keywords(model, args.text, task, top_k=args.top_k)
        doc["keywords"] = [
            {"token_start": s.token_start, "token_end": s.token_end,
             "text": s.text, "score": s.score} for s in spans]
    print(json.dumps(doc))
    return 0


# -- import-issues ---------------------------------------------------------


def _cmd_import_issues(args: argparse.Namespace) -> int:
    result = import_issue_dump(args.dump, default_project=args.project)
    store = Datastore(path=args.db)
    try:
        if args.repo is not None:
            repo_id = store.get_repo(args.repo).repo_id
        else:
            # Issues live under a repo row; bind them to a placeholder repo
            # named after the project unless the caller picked one.
            pseudo_path = f"issues://{args.project}"
            existing = [r for r in store.list_repos()
                        if r.path == pseudo_path]
            repo_id = existing[0].repo_id if existing \
                else store.register_repo(args.project, pseudo_path)
        upsert = store.upsert_issues(repo_id, result.issues)
        for problem in result.problems:
            print(f"warning: line {problem.line}: {problem.message}",
                  file=sys.stderr)
        print(f"imported {len(result.issues)} issues into repo {repo_id} "
              f"({upsert.inserted} new, {upsert.updated} updated), "
              f"{store.queue_depth()} queued for classification")
        return 0
    finally:
        store.close()


# -- export ----------------------------------------------------------------


def _export_document(store: Datastore, repo_id: int) -> dict:
    from .errors import NoSnapshots
    from .extractor import CommentKind
    from .labels import LABELS

    repo = store.get_repo(repo_id)
    comments = []
    for row in store.list_comments(repo_id):
        comments.append({
            "comment_id": row["comment_id"],
            "file_path": row["file_path"],
            "span": {"line_start": row["line_start"],
                     "line_end": row["line_end"],
                     "col_start": row["col_start"],
                     "col_end": row["col_end"]},
            "kind": row["kind"],
            "text": row["normalized_text"],
            "content_hash": row["content_hash"],
            "classification": None if row["label"] is None else {
                "label": row["label"],
                "probs": json.loads(row["probs"]),
                "model_version": row["model_version"],
                "classified_at": row["classified_at"],
            },
        })

    labels = store.stats_labels(repo_id, kinds={TargetKind.COMMENT})
    kinds = store.stats_comment_kinds(repo_id)
    issue_stats = store.stats_issues(repo_id)
    try:
        timeline = [{"commit_id": p.commit_id, "timestamp": p.timestamp,
                     "counts": {lab.value: n for lab, n in p.counts.items()},
                     "total_comments": p.total_comments}
                    for p in store.timeline(repo_id)]
    except NoSnapshots:
        timeline = []

    return {
        "repo": {"repo_id": repo.repo_id, "name": repo.name,
                 "path": repo.path},
        "comments": comments,
        "issues": store.list_issues(repo_id),
        "stats": {
            "comments": {
                "by_label": {lab.value: labels[lab] for lab in LABELS},
                "by_comment_kind": {k.value: kinds.get(k, 0)
                                    for k in CommentKind},
            },
            "issues": {
                "by_label": {
                    fld.value: {lab.value: by[lab] for lab in LABELS}
                    for fld, by in issue_stats["by_label"].items()},
                "by_issue_type": issue_stats["by_issue_type"],
                "by_open_closed": {oc.value: n for oc, n in
                                   issue_stats["by_open_closed"].items()},
            },
        },
        "timeline": timeline,
    }


def _cmd_export(args: argparse.Namespace) -> int:
    store = Datastore(path=args.db)
    try:
        doc = _export_document(store, args.repo)
    finally:
        store.close()
    text = json.dumps(doc, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        print(f"exported repo {args.repo} to {args.out}")
    else:
        print(text)
    return 0


# -- report ----------------------------------------------------------------


def _cmd_report(args: argparse.Namespace) -> int:
    from .report import render_report

    store = Datastore(path=args.db)
    try:
        written = render_report(store, args.repo, args.out_dir)
    finally:
        store.close()
    for path in written:
        print(path)
    return 0


# -- serve -----------------------------------------------------------------


def _cmd_serve(args: argparse.Namespace) -> int:
    model_path = _env_model_path(args.model)
    model = _load_model_or_die(model_path) if model_path else None
    store = Datastore(path=args.db)
    config = ServiceConfig(classifier_workers=args.workers)
    try:
        serve(store, model, config, port=args.port, host=args.host)
    finally:
        store.close()
    return 0


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="debtviz",
        description="Track self-admitted technical debt in code comments "
                    "and issue trackers.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_db(p):
        p.add_argument("--db", default=None,
                       help="datastore path (default: $DEBTVIZ_DB_PATH "
                            "or ./debtviz.db)")

    p = sub.add_parser("scan", help="scan a git repository's history")
    p.add_argument("--repo", required=True, help="path to a git repository")
    p.add_argument("--name", default=None, help="display name for the repo")
    p.add_argument("--max-points", type=int, default=50,
                   help="revisions to sample across history")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel file extraction jobs")
    p.add_argument("--model", default=None,
                   help="classify queued comments after scanning")
    add_db(p)
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("train", help="train a classifier on a JSONL corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--min-freq", type=int, default=1)
    p.add_argument("--embed-dim", type=int, default=64)
    p.add_argument("--max-len", type=int, default=128)
    p.add_argument("--version", default="dev", help="model version string")
    p.add_argument("--stop-at-accuracy", type=float, default=None)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("classify", help="classify one text")
    p.add_argument("--model", default=None,
                   help="model file (default: $DEBTVIZ_MODEL_PATH)")
    p.add_argument("--text", required=True)
    p.add_argument("--task", choices=[t.value for t in TaskId],
                   default=TaskId.COMMENTS.value)
    p.add_argument("--keywords", action="store_true",
                   help="include explanation keyword spans")
    p.add_argument("--top-k", type=int, default=3)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("import-issues", help="import a JSONL issue dump")
    p.add_argument("--dump", required=True)
    p.add_argument("--project", required=True,
                   help="project key for records that lack one")
    p.add_argument("--repo", type=int, default=None,
                   help="attach to this repo id instead of a per-project one")
    add_db(p)
    p.set_defaults(func=_cmd_import_issues)

    p = sub.add_parser("export", help="dump one repo as a JSON document")
    p.add_argument("--repo", type=int, required=True)
    p.add_argument("--format", choices=["json"], default="json")
    p.add_argument("--out", default=None, help="write here instead of stdout")
    add_db(p)
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("report", help="render CSV + PNG report files")
    p.add_argument("--repo", type=int, required=True)
    p.add_argument("--out-dir", required=True)
    add_db(p)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--port", type=int, default=None,
                   help="default: $DEBTVIZ_PORT or 8080")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--model", default=None,
                   help="model file (default: $DEBTVIZ_MODEL_PATH)")
    p.add_argument("--workers", type=int, default=1,
                   help="classifier worker threads")
    add_db(p)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage / help
        code = exc.code
        return code if isinstance(code, int) else 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    except (DebtvizError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 1


if __name__ == "__main__":
    sys.exit(main())
