import json

import pytest

from loanverbs.ingest import (
    Post, PostReader, SchemaError, Unreadable, group_timelines, merge_timelines, parse_timestamp,
    post_to_dict, read_posts,
)


def _line(i, author="a", ts=1_600_000_000, **kw):
    d = {"id": f"p{i}", "author_id": author, "timestamp": ts + i, "text": f"hola {i}", "is_retweet": False}
    d.update(kw)
    return json.dumps(d)


def _write(tmp_path, lines, name="in.jsonl"):
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def test_valid_three_lines(tmp_path):
    reader = read_posts(_write(tmp_path, [_line(i) for i in range(3)]))
    assert [p.id for p in reader] == ["p0", "p1", "p2"]
    assert reader.skipped == 0 and reader.read == 3


@pytest.mark.parametrize("bad", [
    "{not json",
    json.dumps({"id": "x", "author_id": "a", "timestamp": 5, "text": "t"}),
    json.dumps({"id": "x", "author_id": "a", "timestamp": -1, "text": "t", "is_retweet": False}),
    json.dumps({"id": "", "author_id": "a", "timestamp": 5, "text": "t", "is_retweet": False}),
    json.dumps({"id": "x", "author_id": "a", "timestamp": 5, "text": "t", "is_retweet": "no"}),
    json.dumps([1, 2]),
])
def test_one_malformed_of_four_skipped(tmp_path, bad):
    reader = PostReader(_write(tmp_path, [_line(0), bad, _line(1), _line(2)]))
    assert len(list(reader)) == 3
    assert reader.skipped == 1


def test_mostly_malformed_is_schema_error(tmp_path):
    path = _write(tmp_path, [_line(0)] + ["garbage"] * 3)
    with pytest.raises(SchemaError):
        list(PostReader(path))


def test_exactly_half_malformed_is_tolerated(tmp_path):
    reader = PostReader(_write(tmp_path, [_line(0), "x", _line(1), "y"]))
    assert len(list(reader)) == 2


def test_missing_file_unreadable(tmp_path):
    with pytest.raises(Unreadable):
        list(PostReader(tmp_path / "nope.jsonl"))


def test_blank_lines_ignored(tmp_path):
    reader = PostReader(_write(tmp_path, ["", _line(0), "   ", _line(1)]))
    assert len(list(reader)) == 2 and reader.skipped == 0


def test_multiple_inputs_in_order(tmp_path):
    a = _write(tmp_path, [_line(0)], "a.jsonl")
    b = _write(tmp_path, [_line(1)], "b.jsonl")
    assert [p.id for p in PostReader([a, b])] == ["p0", "p1"]


def test_fixture_corpus(fixtures_dir, manifest):
    reader = PostReader(fixtures_dir / "corpus.jsonl")
    posts = list(reader)
    assert len(posts) == manifest["posts"] == 1000
    assert reader.skipped == 0
    assert sum(p.is_retweet for p in posts) == manifest["retweets"]
    timelines = group_timelines(posts)
    assert {a: len(t.posts) for a, t in timelines.items()} == manifest["authors"]


@pytest.mark.parametrize("value,expected", [
    (1_600_000_000, 1_600_000_000.0),
    ("2020-01-01T00:00:00Z", 1577836800.0),
    ("2020-01-01T01:00:00+01:00", 1577836800.0),
    ("2020-01-01T00:00:00", 1577836800.0),
])
def test_timestamps(value, expected):
    assert parse_timestamp(value) == expected


@pytest.mark.parametrize("value", [0, True, "yesterday", None])
def test_bad_timestamps(value):
    with pytest.raises(ValueError):
        parse_timestamp(value)


def test_text_is_nfc(tmp_path):
    decomposed = "tuité"
    (post,) = PostReader(_write(tmp_path, [_line(0, text=decomposed)]))
    assert post.text == "tuité"


def test_two_authors_three_posts():
    posts = [Post(f"{a}{i}", a, 100.0 + 10 * (3 - i), "x") for a in "ab" for i in range(3)]
    tl = group_timelines(posts)
    assert sorted(tl) == ["a", "b"]
    for t in tl.values():
        assert len(t.posts) == 3
        stamps = [p.timestamp for p in t.posts]
        assert stamps == sorted(stamps)


def test_single_post_span_zero():
    (tl,) = group_timelines([Post("1", "a", 5.0, "x")]).values()
    assert tl.span_days == 0.0


def test_span_days():
    tl = group_timelines([Post("1", "a", 86400.0, "x"), Post("2", "a", 3 * 86400.0, "y")])["a"]
    assert tl.span_days == 2.0


def test_merge_partial_maps():
    posts = [Post(str(i), "ab"[i % 2], float(i + 1), "x") for i in range(10)]
    merged = merge_timelines([group_timelines(posts[:4]), group_timelines(posts[4:])])
    whole = group_timelines(posts)
    assert {a: [p.id for p in t.posts] for a, t in merged.items()} == \
           {a: [p.id for p in t.posts] for a, t in whole.items()}


def test_post_roundtrip():
    p = Post("1", "a", 5.0, "hola", True, "Madrid")
    assert json.loads(json.dumps(post_to_dict(p))) == post_to_dict(p)
