#!/usr/bin/env python3
"""Convert a 20 Newsgroups archive into the corpus JSONL this project ingests.

Accepts either the classic `20news-bydate.tar.gz` archive or a directory that
already contains the extracted `20news-bydate-train` / `20news-bydate-test`
trees (any directory-of-class-directories layout works). Train and test
messages are pooled into one file; the experiment harness makes its own
splits.

Each output line is {"id": ..., "text": ..., "class": ...}. By default the
leading mail-header block of every message is dropped: headers carry the
newsgroup name itself ("Newsgroups: rec.sport.hockey"), which leaks the label
into the features. Pass --keep-headers to disable that.

Usage:
  python3 tools/prepare_20news.py 20news-bydate.tar.gz -o data/20news.jsonl
"""

import argparse
import json
import pathlib
import sys
import tarfile


def strip_header_block(text: str) -> str:
    head, sep, body = text.partition("\n\n")
    return body if sep else text


def clean(text: str, keep_headers: bool) -> str:
    if not keep_headers:
        text = strip_header_block(text)
    return text.strip()


def iter_tar(archive: pathlib.Path):
    with tarfile.open(archive, "r:*") as tar:
        for member in tar:
            if not member.isfile():
                continue
            parts = pathlib.PurePosixPath(member.name).parts
            # <split-root>/<group>/<docid>; tolerate a leading wrapper dir
            if len(parts) < 2:
                continue
            group, docid = parts[-2], parts[-1]
            if "." not in group:  # newsgroup names all contain a dot
                continue
            handle = tar.extractfile(member)
            if handle is None:
                continue
            yield f"{parts[-3]}/{group}/{docid}" if len(parts) >= 3 else f"{group}/{docid}", \
                group, handle.read().decode("latin-1")


def iter_dir(root: pathlib.Path):
    for path in sorted(root.rglob("*")):
        if not path.is_file():
            continue
        group = path.parent.name
        if "." not in group:
            continue
        rel = path.relative_to(root)
        yield str(rel), group, path.read_text(encoding="latin-1")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("input", type=pathlib.Path,
                        help="20news-bydate.tar.gz or an extracted directory")
    parser.add_argument("-o", "--output", type=pathlib.Path,
                        default=pathlib.Path("data/20news.jsonl"))
    parser.add_argument("--keep-headers", action="store_true",
                        help="keep the mail header block (leaks the label; off by default)")
    args = parser.parse_args()

    if not args.input.exists():
        print(f"error: {args.input} does not exist", file=sys.stderr)
        return 1
    records = iter_dir(args.input) if args.input.is_dir() else iter_tar(args.input)

    args.output.parent.mkdir(parents=True, exist_ok=True)
    seen = set()
    kept = skipped = 0
    with open(args.output, "w", encoding="utf-8") as out:
        for doc_id, group, raw in records:
            text = clean(raw, args.keep_headers)
            if not text or doc_id in seen:
                skipped += 1
                continue
            seen.add(doc_id)
            out.write(json.dumps({"id": doc_id, "text": text, "class": group}) + "\n")
            kept += 1

    if kept == 0:
        print("error: no messages found; is this a 20 Newsgroups archive?", file=sys.stderr)
        return 1
    print(f"wrote {kept} documents to {args.output} ({skipped} empty or duplicate skipped)",
          file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
