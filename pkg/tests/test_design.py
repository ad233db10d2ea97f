import numpy as np
import pytest

from loanverbs.features import AuthorProfile
from loanverbs.matcher import MatchRecord
from loanverbs.stats.design import (
    RARE, MissingProfile, RegressionSpec, encode_design, level_codes, regression_sample,
)


def _rec(i, author, base="like", variant="integrated", cls="loanword"):
    return MatchRecord(f"p{i}", author, base, cls, variant, (0, 5), "likeo")


def _feat(i):
    return {"post_id": f"p{i}", "has_hashtag": i % 2 == 0, "has_mention": i % 3 == 0, "post_length": 10 + i}


def _prof(aid, region="UNK", bin_="low", native=0.5):
    return AuthorProfile(aid, 1.0 + len(aid), 0.1, 0.2, region, 0.4, bin_, native, 10)


def _sample():
    # author "big" has 6 records, "small" has 4 (below the threshold of 5)
    recs = [_rec(i, "big", variant="integrated" if i % 2 else "light") for i in range(6)]
    recs += [_rec(6 + i, "small", base="tweet", variant="light" if i % 2 else "integrated") for i in range(4)]
    feats = [_feat(i) for i in range(10)]
    profs = {"big": _prof("big", "Europe", "high", 0.9), "small": _prof("small")}
    return recs, feats, profs


def test_column_layout():
    recs, feats, profs = _sample()
    enc = encode_design(recs, feats, profs, RegressionSpec(seed=0))
    names = enc.design.names
    assert names[:3] == ["intercept", "has_hashtag", "has_mention"]
    assert "native_integration_rate" in names
    assert "region=UNK" not in names and "language=low" not in names
    assert enc.design.intercept == 0 and not enc.design.penalized[0]
    assert enc.outcome.tolist() == [float(r.variant == "integrated") for r in recs]


def test_rare_author_bucket():
    recs, feats, profs = _sample()
    enc = encode_design(recs, feats, profs, RegressionSpec(seed=0))
    assert enc.design.group_names == ["author=big", f"author={RARE}"]
    assert enc.design.groups.tolist() == [0] * 6 + [1] * 4


def test_rare_word_bucket():
    recs, feats, profs = _sample()
    enc = encode_design(recs, feats, profs, RegressionSpec(seed=0))
    assert enc.word_levels == ["like", RARE]
    j = enc.design.names.index(f"word={RARE}")
    assert enc.design.X[:, j].tolist() == [0.0] * 6 + [1.0] * 4
    assert enc.design.fixed_effect[j]


def test_unknown_region_all_zero():
    recs, feats, profs = _sample()
    enc = encode_design(recs, feats, profs, RegressionSpec(seed=0))
    region_cols = [j for j, n in enumerate(enc.design.names) if n.startswith("region=")]
    assert len(region_cols) == 4
    assert np.all(enc.design.X[6:, region_cols] == 0)
    assert enc.design.X[0, enc.design.names.index("region=Europe")] == 1.0


def test_scalars_are_z_scored():
    recs, feats, profs = _sample()
    enc = encode_design(recs, feats, profs, RegressionSpec(seed=0))
    col = enc.design.X[:, enc.design.names.index("post_length")]
    assert abs(col.mean()) < 1e-9 and abs(col.std() - 1) < 1e-9


def test_native_regression_omits_native_rate():
    recs, feats, profs = _sample()
    recs = [MatchRecord(r.post_id, r.author_id, r.base, "native", r.variant, r.char_span, r.matched_surface)
            for r in recs]
    enc = encode_design(recs, feats, profs, RegressionSpec(seed=0, word_class="native"))
    assert "native_integration_rate" not in enc.design.names


def test_missing_profile():
    recs, feats, profs = _sample()
    del profs["small"]
    with pytest.raises(MissingProfile):
        encode_design(recs, feats, profs, RegressionSpec(seed=0))


def test_sample_filters_unusable_authors():
    recs, feats, profs = _sample()
    profs["small"] = _prof("small", native=None)
    kept, kept_f, dropped = regression_sample(recs, feats, profs, RegressionSpec(seed=0))
    assert len(kept) == len(kept_f) == 6 and dropped == 4
    # a native regression does not need the native rate
    native = RegressionSpec(seed=0, word_class="native")
    assert regression_sample(recs, feats, profs, native) == ([], [], 0)


@pytest.mark.parametrize("kwargs", [
    {"test_fraction": 0.0}, {"test_fraction": 1.0}, {"l2_grid": ()}, {"rare_threshold": 0}, {"seed": None},
])
def test_spec_validation(kwargs):
    base = {"seed": 0}
    base.update(kwargs)
    with pytest.raises(ValueError):
        RegressionSpec(**base)


def test_level_codes_without_rare_levels():
    codes, levels = level_codes(["a", "b", "a", "b"], 2)
    assert levels == ["a", "b"] and codes.tolist() == [0, 1, 0, 1]
