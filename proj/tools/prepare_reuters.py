#!/usr/bin/env python3
"""Convert a Reuters-21578 archive into the corpus JSONL this project ingests.

Accepts the distribution archive `reuters21578.tar.gz` (22 reut2-0??.sgm
files) or a directory containing the extracted .sgm files. The SGML is not
well-formed XML (stray numeric entities, unclosed tags), so stories are cut
out with plain string matching rather than an XML parser.

Following the usual single-label protocol, a story is kept only when its
TOPICS attribute is YES and it carries exactly one topic tag; the topic
becomes the class, and the text is the title plus the body. Each output line
is {"id": ..., "text": ..., "class": ...}.

Usage:
  python3 tools/prepare_reuters.py reuters21578.tar.gz -o data/reuters.jsonl
"""

import argparse
import html
import json
import pathlib
import re
import sys
import tarfile

STORY_RE = re.compile(r"<REUTERS\b(.*?)</REUTERS>", re.S)
NEWID_RE = re.compile(r'NEWID="(\d+)"')
TOPICS_ATTR_RE = re.compile(r'TOPICS="([A-Z]+)"')
TOPIC_TAGS_RE = re.compile(r"<TOPICS>(.*?)</TOPICS>", re.S)
D_TAG_RE = re.compile(r"<D>(.*?)</D>", re.S)
TITLE_RE = re.compile(r"<TITLE>(.*?)</TITLE>", re.S)
BODY_RE = re.compile(r"<BODY>(.*?)</BODY>", re.S)
CONTROL_RE = re.compile(r"[\x00-\x08\x0b-\x1f\x7f]")


def unescape(text: str) -> str:
    return CONTROL_RE.sub(" ", html.unescape(text))


def stories(sgml: str):
    for match in STORY_RE.finditer(sgml):
        block = match.group(0)
        newid = NEWID_RE.search(block)
        attr = TOPICS_ATTR_RE.search(block)
        if newid is None or attr is None or attr.group(1) != "YES":
            continue
        tags = TOPIC_TAGS_RE.search(block)
        topics = D_TAG_RE.findall(tags.group(1)) if tags else []
        if len(topics) != 1:
            continue
        title = TITLE_RE.search(block)
        body = BODY_RE.search(block)
        text = " ".join(part for part in
                        (unescape(title.group(1)).strip() if title else "",
                         unescape(body.group(1)).strip() if body else "")
                        if part)
        if not text:
            continue
        yield newid.group(1), topics[0].strip(), text


def iter_sgml_files(source: pathlib.Path):
    if source.is_dir():
        for path in sorted(source.glob("*.sgm")):
            yield path.read_text(encoding="latin-1")
        return
    with tarfile.open(source, "r:*") as tar:
        for member in sorted(tar, key=lambda m: m.name):
            if member.isfile() and member.name.endswith(".sgm"):
                handle = tar.extractfile(member)
                if handle is not None:
                    yield handle.read().decode("latin-1")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("input", type=pathlib.Path,
                        help="reuters21578.tar.gz or a directory of .sgm files")
    parser.add_argument("-o", "--output", type=pathlib.Path,
                        default=pathlib.Path("data/reuters.jsonl"))
    args = parser.parse_args()

    if not args.input.exists():
        print(f"error: {args.input} does not exist", file=sys.stderr)
        return 1

    args.output.parent.mkdir(parents=True, exist_ok=True)
    kept = 0
    with open(args.output, "w", encoding="utf-8") as out:
        for sgml in iter_sgml_files(args.input):
            for newid, topic, text in stories(sgml):
                out.write(json.dumps({"id": newid, "text": text, "class": topic}) + "\n")
                kept += 1

    if kept == 0:
        print("error: no single-topic stories found; is this Reuters-21578?", file=sys.stderr)
        return 1
    print(f"wrote {kept} documents to {args.output}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
