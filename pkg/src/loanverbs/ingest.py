"""Streaming JSONL post reader and author timelines."""
from __future__ import annotations

import itertools
import json
import unicodedata
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Dict, Iterable, Iterator, List, Optional

REQUIRED_KEYS = ("id", "author_id", "timestamp", "text", "is_retweet")
SAMPLE_LINES = 1000


class SchemaError(ValueError):
    """Most of the sampled lines do not follow the post schema."""


class Unreadable(OSError):
    pass


@dataclass(frozen=True)
class Post:
    id: str
    author_id: str
    timestamp: float
    text: str
    is_retweet: bool = False
    profile_location: Optional[str] = None


@dataclass
class AuthorTimeline:
    author_id: str
    posts: List[Post] = field(default_factory=list)

    @property
    def span_days(self) -> float:
        if not self.posts:
            return 0.0
        return (self.posts[-1].timestamp - self.posts[0].timestamp) / 86400.0


def parse_timestamp(value) -> float:
    if isinstance(value, bool):
        raise ValueError("boolean timestamp")
    if isinstance(value, (int, float)):
        ts = float(value)
    elif isinstance(value, str):
        text = value.strip()
        if text.endswith(("Z", "z")):
            text = text[:-1] + "+00:00"
        dt = datetime.fromisoformat(text)
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        ts = dt.timestamp()
    else:
        raise ValueError(f"unsupported timestamp {value!r}")
    if ts <= 0:
        raise ValueError("timestamp must be positive")
    return ts


def post_from_dict(obj: dict) -> Post:
    """Validate one decoded JSON object; raises ``ValueError``/``KeyError``/``TypeError``."""
    if not isinstance(obj, dict):
        raise TypeError("line is not a JSON object")
    missing = [k for k in REQUIRED_KEYS if k not in obj]
    if missing:
        raise KeyError(f"missing keys {missing}")
    pid, author = str(obj["id"]), str(obj["author_id"])
    if not pid or not author:
        raise ValueError("empty id or author_id")
    text = obj["text"]
    if not isinstance(text, str):
        raise TypeError("text must be a string")
    if not isinstance(obj["is_retweet"], bool):
        raise TypeError("is_retweet must be a boolean")
    loc = obj.get("profile_location")
    if loc is not None and not isinstance(loc, str):
        raise TypeError("profile_location must be a string")
    return Post(
        id=pid,
        author_id=author,
        timestamp=parse_timestamp(obj["timestamp"]),
        text=unicodedata.normalize("NFC", text),
        is_retweet=obj["is_retweet"],
        profile_location=loc,
    )


def parse_line(line: str) -> Post:
    return post_from_dict(json.loads(line))


def post_to_dict(post: Post) -> dict:
    d = {
        "id": post.id,
        "author_id": post.author_id,
        "timestamp": post.timestamp,
        "text": post.text,
        "is_retweet": post.is_retweet,
    }
    if post.profile_location is not None:
        d["profile_location"] = post.profile_location
    return d


class PostReader:
    """Iterate over the posts of one or more JSONL files.

    Malformed lines are skipped and counted in :attr:`skipped`. If more than
    half of the first 1000 non-blank lines of a file are malformed the file
    is rejected with :class:`SchemaError` before anything is yielded.
    """

    def __init__(self, paths, sample_size: int = SAMPLE_LINES):
        if isinstance(paths, (str, bytes)) or hasattr(paths, "__fspath__"):
            paths = [paths]
        self.paths = list(paths)
        self.sample_size = sample_size
        self.skipped = 0
        self.read = 0

    def __iter__(self) -> Iterator[Post]:
        for path in self.paths:
            yield from self._read_file(path)

    def raw_lines(self) -> Iterator[str]:
        """Non-blank lines after the schema sample check, without parsing."""
        for path in self.paths:
            for line, _ in self._lines(path):
                yield line

    def _read_file(self, path) -> Iterator[Post]:
        for line, post in self._lines(path):
            if post is None:
                try:
                    post = parse_line(line)
                except (ValueError, KeyError, TypeError):
                    self.skipped += 1
                    continue
            self.read += 1
            yield post

    def _lines(self, path):
        try:
            fh = open(path, encoding="utf-8")
        except OSError as exc:
            raise Unreadable(f"cannot read {path}: {exc}") from exc
        with fh:
            lines = (ln for ln in fh if ln.strip())
            try:
                head = list(itertools.islice(lines, self.sample_size))
            except (OSError, UnicodeDecodeError) as exc:
                raise Unreadable(f"cannot read {path}: {exc}") from exc
            parsed = []
            bad = 0
            for ln in head:
                try:
                    parsed.append(parse_line(ln))
                except (ValueError, KeyError, TypeError):
                    parsed.append(None)
                    bad += 1
            if head and bad * 2 > len(head):
                raise SchemaError(f"{path}: {bad} of the first {len(head)} lines are malformed")
            for ln, post in zip(head, parsed):
                yield ln, post
            try:
                for ln in lines:
                    yield ln, None
            except (OSError, UnicodeDecodeError) as exc:
                raise Unreadable(f"cannot read {path}: {exc}") from exc


def read_posts(path) -> PostReader:
    return PostReader(path)


def group_timelines(posts: Iterable[Post]) -> Dict[str, AuthorTimeline]:
    timelines: Dict[str, AuthorTimeline] = {}
    for post in posts:
        tl = timelines.get(post.author_id)
        if tl is None:
            tl = timelines[post.author_id] = AuthorTimeline(post.author_id)
        tl.posts.append(post)
    for tl in timelines.values():
        tl.posts.sort(key=lambda p: (p.timestamp, p.id))
    return timelines


def merge_timelines(parts: Iterable[Dict[str, AuthorTimeline]]) -> Dict[str, AuthorTimeline]:
    return group_timelines(p for part in parts for tl in part.values() for p in tl.posts)
