import gzip

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dtc.errors import ConfigError, ParseError, StreamIntegrityError
from dtc.exact import exact_incremental, exact_static
from dtc.stream_io import (
    CanonicalStream,
    SignedEdge,
    load_edge_list,
    parse_edge_list,
    parse_stream,
    planted_community_graph,
    read_stream,
    synthesize_fully_dynamic,
    write_stream,
)

from conftest import gnm_edges


def test_cleaning_rules():
    stream, report = parse_edge_list("3 5\n5 3\n7 7\n3 5\n")
    assert [(e.u, e.v) for e in stream] == [(3, 5)]
    assert report.dropped == 3
    assert (report.self_loops, report.duplicates) == (1, 2)


def test_empty_and_comment_only():
    stream, report = parse_edge_list("")
    assert len(stream) == 0 and report.dropped == 0
    stream, report = parse_edge_list("# header\n% other\n\n")
    assert len(stream) == 0 and report.dropped == 0 and report.comments == 2


def test_first_occurrence_order_and_extra_columns():
    stream, _ = parse_edge_list("9 1 1700000000\n2 4\n1 9\n4 3\n")
    assert [(e.u, e.v) for e in stream] == [(1, 9), (2, 4), (3, 4)]


def test_parse_error_line_number():
    with pytest.raises(ParseError, match="line 2"):
        parse_edge_list("1 2\n1 x\n")
    with pytest.raises(ParseError):
        parse_edge_list("1\n")


def test_gzip_transparent(tmp_path):
    raw = tmp_path / "g.txt.gz"
    with gzip.open(raw, "wt") as fh:
        fh.write("# c\n1 2\n2 3\n")
    stream, _ = load_edge_list(raw)
    assert len(stream) == 2


def test_signed_edge_orientation():
    e = SignedEdge(9, 2, -1, 4)
    assert e.pair == (2, 9) and not e.is_insertion
    with pytest.raises(StreamIntegrityError):
        SignedEdge(3, 3)


def test_validity_checks():
    with pytest.raises(StreamIntegrityError):
        parse_stream("- 1 2\n")
    with pytest.raises(StreamIntegrityError):
        parse_stream("+ 1 2\n+ 2 1\n")
    with pytest.raises(ParseError):
        parse_stream("* 1 2\n")
    with pytest.raises(StreamIntegrityError):
        CanonicalStream.from_edges([(1, 2), (2, 1)])


def test_dynamic_example():
    s = parse_stream("+ 1 2\n+ 1 3\n+ 2 3\n- 1 2\n")
    assert len(s) == 4 and s.num_deletions == 1
    assert s.surviving_edges() == {(1, 3), (2, 3)}


def test_round_trip(tmp_path):
    base = CanonicalStream.from_edges(gnm_edges(40, 200, seed=1))
    for stream in (base, synthesize_fully_dynamic(base, 0.3, seed=5)):
        path = tmp_path / "s.txt"
        write_stream(stream, path)
        assert read_stream(path) == stream


def test_synth_identity_and_full_deletion():
    base = CanonicalStream.from_edges(gnm_edges(20, 60, seed=2))
    assert synthesize_fully_dynamic(base, 0.0, seed=1) == base
    full = synthesize_fully_dynamic(base, 1.0, seed=1)
    assert len(full) == 120 and full.surviving_edges() == set()
    assert exact_incremental(full)[-1].global_count == 0


def test_synth_counts_and_positions():
    base = CanonicalStream.from_edges(gnm_edges(30, 100, seed=3))
    for seed in range(20):
        s = synthesize_fully_dynamic(base, 0.2, seed)
        assert len(s) == 120 and s.num_deletions == 20
        pos = {}
        for e in s:
            if e.sign > 0:
                pos[e.pair] = e.index
            else:
                assert e.index > pos[e.pair]


def test_synth_errors_and_determinism():
    base = CanonicalStream.from_edges(gnm_edges(10, 20, seed=4))
    with pytest.raises(ConfigError):
        synthesize_fully_dynamic(base, 1.5)
    with pytest.raises(ConfigError):
        synthesize_fully_dynamic(base, -0.1)
    assert synthesize_fully_dynamic(base, 0.5, 9) == synthesize_fully_dynamic(base, 0.5, 9)
    dyn = synthesize_fully_dynamic(base, 0.5, 9)
    with pytest.raises(StreamIntegrityError):
        synthesize_fully_dynamic(dyn, 0.1)


def test_deletion_gaps_reach_stream_end():
    # a deletion for the first edge should be able to land anywhere after it
    base = CanonicalStream.from_edges([(0, i) for i in range(1, 11)])
    last = []
    for seed in range(400):
        s = synthesize_fully_dynamic(base, 0.1, seed)
        last.append(int(np.flatnonzero(s.sign < 0)[0]))
    assert min(last) >= 1 and max(last) == 10


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.floats(0, 1), st.integers(5, 60))
def test_synthesized_stream_valid_and_oracles_agree(seed, delta, m):
    base = CanonicalStream.from_edges(gnm_edges(14, m, seed))
    s = synthesize_fully_dynamic(base, delta, seed)
    CanonicalStream(s.u, s.v, s.sign)  # revalidates
    assert s.num_deletions == int(np.floor(delta * len(base) + 0.5))
    assert exact_incremental(s)[-1].global_count == exact_static(s.surviving_edges()).global_count


def test_planted_graph_is_simple_and_seeded():
    g = planted_community_graph(300, 1500, seed=7)
    assert len(g) == 1500 and g.insertion_only
    assert g == planted_community_graph(300, 1500, seed=7)
    assert exact_static(g.surviving_edges()).global_count > 0
    with pytest.raises(ConfigError):
        planted_community_graph(4, 100)
