"""Knowledge-graph store: construction, indexing, loading, error reporting."""

import pytest

from claimver.errors import KgLoadError, UnknownNodeError
from claimver.kg import KgNode, Triplet, build_graph, load_kg


class TestNodeAndTriplet:
    def test_empty_label_rejected(self):
        with pytest.raises(ValueError):
            KgNode("Q1", "")

    def test_empty_id_rejected(self):
        with pytest.raises(ValueError):
            KgNode("", "label")

    def test_duplicate_aliases_after_casefold_rejected(self):
        with pytest.raises(ValueError):
            KgNode("Q1", "x", aliases=("USA", "usa"))

    def test_triplet_is_hashable_value(self):
        assert Triplet("a", "p", "b") == Triplet("a", "p", "b")
        assert len({Triplet("a", "p", "b"), Triplet("a", "p", "b")}) == 1


class TestBuildGraph:
    def test_nodes_sorted_by_id(self, apollo_kg):
        assert list(apollo_kg.nodes) == sorted(apollo_kg.nodes)

    def test_duplicate_triplets_dropped_keep_first(self):
        nodes = [KgNode("A", "a"), KgNode("B", "b")]
        g = build_graph(nodes, [Triplet("A", "p", "B"), Triplet("A", "p", "B")])
        assert g.edges == (Triplet("A", "p", "B"),)

    def test_unknown_endpoint_rejected(self):
        with pytest.raises(UnknownNodeError):
            build_graph([KgNode("A", "a")], [Triplet("A", "p", "Zzz")])

    def test_self_loop_kept_and_reported(self):
        g = build_graph([KgNode("A", "a")], [Triplet("A", "p", "A")])
        assert g.edges == (Triplet("A", "p", "A"),)
        assert any("self-loop" in line for line in g.load_report)

    def test_edges_indexed_under_both_endpoints(self, apollo_kg):
        for idx, t in enumerate(apollo_kg.edges):
            assert (t.object, idx) in apollo_kg.adjacency[t.subject]
            if t.subject != t.object:
                assert (t.subject, idx) in apollo_kg.adjacency[t.object]


class TestLookups:
    def test_label_lookup_case_insensitive(self, apollo_kg):
        assert apollo_kg.lookup_by_label("apollo 11") == ["Q43653"]
        assert apollo_kg.lookup_by_label("APOLLO  11") == ["Q43653"]

    def test_alias_lookup(self, apollo_kg):
        assert apollo_kg.lookup_by_label("USA") == ["Q30"]
        assert apollo_kg.lookup_by_label("Edwin Aldrin") == ["Q2252"]

    def test_unknown_surface_empty(self, apollo_kg):
        assert apollo_kg.lookup_by_label("Jupiter") == []

    def test_ambiguous_surface_sorted(self):
        nodes = [KgNode("Q9", "Mercury"), KgNode("Q5", "Mercury"), KgNode("Q1", "x")]
        g = build_graph(nodes, [Triplet("Q9", "p", "Q1")])
        assert g.lookup_by_label("mercury") == ["Q5", "Q9"]

    def test_neighbors_sorted_unique(self, apollo_kg):
        assert apollo_kg.neighbors("Q43653") == ("Q1615", "Q2252", "Q405")
        assert apollo_kg.neighbors("Q30") == ("Q1615", "Q2252")

    def test_neighbors_unknown_node(self, apollo_kg):
        with pytest.raises(UnknownNodeError):
            apollo_kg.neighbors("Q999")

    def test_contains_triplet_by_labels(self, apollo_kg):
        hit = apollo_kg.contains_triplet("apollo 11", "LANDING SITE", "moon")
        assert hit == Triplet("Q43653", "landing site", "Q405")
        assert apollo_kg.contains_triplet("Moon", "landing site", "Apollo 11") is None

    def test_edge_between_picks_first_parallel_edge(self):
        nodes = [KgNode("A", "a"), KgNode("B", "b")]
        g = build_graph(nodes, [Triplet("A", "first", "B"), Triplet("B", "second", "A")])
        assert g.edge_between("A", "B") == Triplet("A", "first", "B")
        assert g.edge_between("B", "A") == Triplet("A", "first", "B")

    def test_label_of(self, apollo_kg):
        assert apollo_kg.label_of("Q405") == "Moon"
        with pytest.raises(UnknownNodeError):
            apollo_kg.label_of("Q999")


class TestLoadTsv:
    def test_roundtrip_against_programmatic_graph(self, tsv_kg_path, apollo_kg):
        g = load_kg(tsv_kg_path, "tsv")
        assert set(g.nodes) == set(apollo_kg.nodes)
        assert g.edges == apollo_kg.edges
        for nid, node in apollo_kg.nodes.items():
            assert g.nodes[nid].label == node.label
            assert g.nodes[nid].description == node.description
            assert g.nodes[nid].aliases == node.aliases

    def test_sidecar_autodiscovery(self, tsv_kg_path):
        g = load_kg(tsv_kg_path, "tsv")
        assert g.nodes["Q30"].aliases == ("USA", "United States of America")

    def test_dangling_node_names_line(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("A\tAlpha\trel\tB\t\n", encoding="utf-8")
        with pytest.raises(KgLoadError) as err:
            load_kg(path, "tsv")
        assert any("line 1" in e and "'B'" in e for e in err.value.errors)

    def test_dangling_node_lenient_skips(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("A\tAlpha\trel\tB\t\nA\tAlpha\trel\tC\tGamma\n", encoding="utf-8")
        g = load_kg(path, "tsv", lenient=True)
        assert set(g.nodes) == {"A", "C"}
        assert g.edges == (Triplet("A", "rel", "C"),)
        assert any("skipped" in line for line in g.load_report)

    def test_bad_column_count(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("A\tAlpha\trel\n", encoding="utf-8")
        with pytest.raises(KgLoadError) as err:
            load_kg(path, "tsv")
        assert "line 1" in err.value.errors[0]

    def test_label_resolved_from_other_row(self, tmp_path):
        path = tmp_path / "kg.tsv"
        path.write_text("A\tAlpha\trel\tB\t\nB\tBeta\trel2\tA\tAlpha\n", encoding="utf-8")
        g = load_kg(path, "tsv")
        assert g.nodes["B"].label == "Beta"

    def test_conflicting_labels_keep_first_and_report(self, tmp_path):
        path = tmp_path / "kg.tsv"
        path.write_text("A\tAlpha\trel\tB\tBeta\nA\tOther\trel2\tB\tBeta\n", encoding="utf-8")
        g = load_kg(path, "tsv")
        assert g.nodes["A"].label == "Alpha"
        assert any("conflicting label" in line for line in g.load_report)

    def test_node_file_unknown_id(self, tmp_path):
        path = tmp_path / "kg.tsv"
        path.write_text("A\tAlpha\trel\tB\tBeta\n", encoding="utf-8")
        (tmp_path / "kg.nodes.tsv").write_text("Zzz\tsome description\t\n", encoding="utf-8")
        with pytest.raises(KgLoadError) as err:
            load_kg(path, "tsv")
        assert any("unknown node id" in e for e in err.value.errors)

    def test_missing_file(self, tmp_path):
        with pytest.raises(KgLoadError):
            load_kg(tmp_path / "nope.tsv", "tsv")

    def test_unknown_format(self, tsv_kg_path):
        with pytest.raises(ValueError):
            load_kg(tsv_kg_path, "xml")

    def test_blank_lines_ignored(self, tmp_path):
        path = tmp_path / "kg.tsv"
        path.write_text("\nA\tAlpha\trel\tB\tBeta\n\n", encoding="utf-8")
        g = load_kg(path, "tsv")
        assert len(g.edges) == 1


class TestLoadJsonl:
    def test_roundtrip_against_programmatic_graph(self, jsonl_kg_path, apollo_kg):
        g = load_kg(jsonl_kg_path, "jsonl")
        assert set(g.nodes) == set(apollo_kg.nodes)
        assert g.edges == apollo_kg.edges
        assert g.nodes["Q2252"].aliases == ("Edwin Aldrin",)

    def test_invalid_json_line_reported(self, tmp_path):
        path = tmp_path / "kg.jsonl"
        path.write_text('{"s_id": "A", "s_label": "a", "p": "r", "o_id": "B", "o_label": "b"}\n'
                        "{not json}\n", encoding="utf-8")
        with pytest.raises(KgLoadError) as err:
            load_kg(path, "jsonl")
        assert any("line 2" in e for e in err.value.errors)

    def test_missing_required_key(self, tmp_path):
        path = tmp_path / "kg.jsonl"
        path.write_text('{"s_id": "A", "o_id": "B"}\n', encoding="utf-8")
        with pytest.raises(KgLoadError) as err:
            load_kg(path, "jsonl")
        assert any("missing" in e for e in err.value.errors)

    def test_node_file_can_introduce_isolated_node(self, tmp_path):
        path = tmp_path / "kg.jsonl"
        path.write_text('{"s_id": "A", "s_label": "a", "p": "r", "o_id": "B", "o_label": "b"}\n',
                        encoding="utf-8")
        (tmp_path / "kg.nodes.jsonl").write_text(
            '{"id": "C", "label": "c", "description": "isolated"}\n', encoding="utf-8")
        g = load_kg(path, "jsonl")
        assert g.nodes["C"].description == "isolated"
        assert g.neighbors("C") == ()

    def test_explicit_nodes_path(self, tmp_path):
        path = tmp_path / "kg.jsonl"
        path.write_text('{"s_id": "A", "s_label": "a", "p": "r", "o_id": "B", "o_label": "b"}\n',
                        encoding="utf-8")
        nodes = tmp_path / "extra.jsonl"
        nodes.write_text('{"id": "A", "label": "a", "aliases": ["alpha"]}\n', encoding="utf-8")
        g = load_kg(path, "jsonl", nodes_path=nodes)
        assert g.nodes["A"].aliases == ("alpha",)
        with pytest.raises(KgLoadError):
            load_kg(path, "jsonl", nodes_path=tmp_path / "gone.jsonl")


class TestDeterminism:
    def test_same_input_same_graph(self, tsv_kg_path):
        a = load_kg(tsv_kg_path, "tsv")
        b = load_kg(tsv_kg_path, "tsv")
        assert list(a.nodes) == list(b.nodes)
        assert a.edges == b.edges
        assert a.label_index == b.label_index
        assert a.adjacency == b.adjacency
