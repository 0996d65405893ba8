"""Command-line front end: ``dynstr bench`` and ``dynstr index``.

The bench path prints one JSON object per line (optionally rendering
summary figures to a directory); the index path maintains SUCIDX1 files
holding byte documents.  Exit codes: 0 on success, 1 on runtime errors
such as missing files or failed verification, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from typing import Optional

from .bench import DEFAULT_SEED, STRUCTURES, VerificationError, render_figures, \
    run_bench
from .textindex import TextCollection, dump_index, load_index


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dynstr",
        description="dynamic succinct strings: benchmarks and text indexing")
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="time one structure across sizes")
    bench.add_argument("--structure", choices=STRUCTURES, default="bitvec",
                       help="what to benchmark (default: bitvec)")
    bench.add_argument("--sizes", default="65536,1048576",
                       help="comma-separated element counts")
    bench.add_argument("--sigma", type=int, default=256,
                       help="alphabet size (string) or sequence count (cspsi)")
    bench.add_argument("--ops", type=int, default=2000,
                       help="operations timed per batch")
    bench.add_argument("--seed", type=int, default=DEFAULT_SEED,
                       help="seed for all generated workloads")
    bench.add_argument("--verify", action="store_true",
                       help="cross-check every batch against the oracle")
    bench.add_argument("--format", choices=["json"], default="json",
                       help="record output format")
    bench.add_argument("--figures", metavar="DIR",
                       help="also render PNG charts into this directory")
    bench.add_argument("--out", metavar="FILE",
                       help="write records here instead of standard output")
    bench.add_argument("--inject-fault", action="store_true",
                       help=argparse.SUPPRESS)

    index = sub.add_parser("index", help="build and query SUCIDX1 files")
    isub = index.add_subparsers(dest="index_command", required=True)

    build = isub.add_parser("build", help="create a new index from files")
    build.add_argument("index_file")
    build.add_argument("files", nargs="*", help="documents to index")

    add = isub.add_parser("add", help="append documents to an index")
    add.add_argument("index_file")
    add.add_argument("files", nargs="+", help="documents to add")

    remove = isub.add_parser("remove", help="drop documents by id")
    remove.add_argument("index_file")
    remove.add_argument("doc_ids", nargs="+", type=int,
                        help="1-based document ids")

    count = isub.add_parser("count", help="count pattern occurrences")
    count.add_argument("index_file")
    count.add_argument("pattern", help="pattern text (UTF-8)")

    extract = isub.add_parser("extract", help="recover one document")
    extract.add_argument("index_file")
    extract.add_argument("doc_id", type=int, help="1-based document id")
    extract.add_argument("--out", metavar="FILE",
                         help="write bytes here instead of standard output")
    return parser


# ----------------------------------------------------------------------
# bench


def _cmd_bench(args: argparse.Namespace) -> int:
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        print("error: --sizes expects comma-separated integers",
              file=sys.stderr)
        return 2
    try:
        records = run_bench(args.structure, sizes, sigma=args.sigma,
                            ops=args.ops, seed=args.seed, verify=args.verify,
                            inject_fault=args.inject_fault)
    except VerificationError as exc:
        print(f"error: verification failed: {exc}", file=sys.stderr)
        return 1
    except (ValueError, MemoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    lines = "".join(rec.to_json() + "\n" for rec in records)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fp:
            fp.write(lines)
    else:
        sys.stdout.write(lines)
    if args.figures:
        for path in render_figures(records, args.figures):
            print(f"wrote {path}", file=sys.stderr)
    return 0


# ----------------------------------------------------------------------
# index


def _read_document(path: str) -> bytes:
    with open(path, "rb") as fp:
        data = fp.read()
    if not data:
        raise ValueError(f"{path}: empty files cannot be indexed")
    if 0 in data:
        raise ValueError(f"{path}: NUL bytes cannot be indexed")
    return data


def _rewrite(collection: TextCollection, path: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".dynstr-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as fp:
            dump_index(collection, fp)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _cmd_index(args: argparse.Namespace) -> int:
    try:
        if args.index_command == "build":
            docs = [_read_document(p) for p in args.files]
            collection = TextCollection()
            for doc in docs:
                collection.insert_document(doc)
            with open(args.index_file, "xb") as fp:
                dump_index(collection, fp)
            print(f"indexed {collection.document_count} documents")
            return 0

        if args.index_command == "add":
            docs = [_read_document(p) for p in args.files]
            collection = load_index(args.index_file)
            for doc in docs:
                collection.insert_document(doc)
            _rewrite(collection, args.index_file)
            print(f"indexed {collection.document_count} documents")
            return 0

        if args.index_command == "remove":
            collection = load_index(args.index_file)
            handles = collection.document_handles()
            if len(set(args.doc_ids)) != len(args.doc_ids):
                raise ValueError("duplicate document ids")
            picked = []
            for doc_id in args.doc_ids:
                if not 1 <= doc_id <= len(handles):
                    raise ValueError(f"unknown document id {doc_id}")
                picked.append(handles[doc_id - 1])
            for handle in picked:
                collection.delete_document(handle)
            _rewrite(collection, args.index_file)
            print(f"indexed {collection.document_count} documents")
            return 0

        if args.index_command == "count":
            collection = load_index(args.index_file)
            print(collection.count(args.pattern.encode("utf-8")))
            return 0

        if args.index_command == "extract":
            collection = load_index(args.index_file)
            handles = collection.document_handles()
            if not 1 <= args.doc_id <= len(handles):
                raise ValueError(f"unknown document id {args.doc_id}")
            payload = bytes(collection.extract_document(handles[args.doc_id - 1]))
            if args.out:
                with open(args.out, "wb") as fp:
                    fp.write(payload)
            else:
                sys.stdout.buffer.write(payload)
                sys.stdout.buffer.flush()
            return 0
    except FileExistsError as exc:
        print(f"error: index file already exists: {exc.filename}",
              file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: no such file: {exc.filename}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError("unhandled index subcommand")


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "bench":
        return _cmd_bench(args)
    return _cmd_index(args)


if __name__ == "__main__":
    sys.exit(main())
