"""Transform steps: cleaning, standardisation, language extraction,
knowledge building, graph composition/decomposition, metadata."""

from __future__ import annotations

from datetime import date
from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import generators
from stratamesh import formats
from stratamesh.errors import CoverageError, TransformError
from stratamesh.model import (
    ContentKind,
    Datatype,
    DatasetRef,
    DownloadPolicy,
    Lexicalization,
    Role,
    SourceDataset,
    validate,
)
from stratamesh.pipeline import (
    ColumnSpec,
    SpecializationRule,
    TableSpec,
    TransformConfig,
    build_knowledge,
    clean,
    compose_graph,
    config_from_json,
    config_to_json,
    decompose_graph,
    extract_language,
    generate_metadata,
    read_source_csv,
    run_pipeline,
    standardise,
)

SRC = DatasetRef("unitn", "raw", 1, ContentKind.LOW_QUALITY)
CFG = TransformConfig(tables=(TableSpec("thing", (ColumnSpec("A", "a", Datatype.STRING),)),))


def source(headers, rows):
    return SourceDataset(SRC, tuple(headers), tuple(tuple(r) for r in rows))


class TestClean:
    def test_trims_and_collapses_whitespace(self):
        cleaned = clean(source(["A"], [["  Rossi \t"], ["due   parole"]]), CFG)
        assert cleaned.rows == (("Rossi",), ("due parole",))

    def test_null_markers_become_none(self):
        cleaned = clean(source(["A", "B"], [["N/A", "x"], ["kept", "y"]]), CFG)
        assert cleaned.rows == ((None, "x"), ("kept", "y"))

    def test_all_null_rows_dropped(self):
        cleaned = clean(source(["A", "B"], [["N/A", ""], ["x", "y"]]), CFG)
        assert cleaned.rows == (("x", "y"),)

    def test_empty_header_and_all_null_columns_dropped(self):
        cleaned = clean(
            source(["A", " ", "B"], [["x", "noise", "NA"], ["y", "noise", "null"]]), CFG
        )
        assert cleaned.headers == ("A",)
        assert cleaned.rows == (("x",), ("y",))

    def test_duplicate_headers_keep_first(self):
        cleaned = clean(source(["A", "A"], [["x", "y"]]), CFG)
        assert cleaned.headers == ("A",)
        assert cleaned.rows == (("x",),)

    def test_control_characters_stripped(self):
        cleaned = clean(source(["A"], [["be\x07fore\x00after"]]), CFG)
        assert cleaned.rows == (("be fore after",),)

    @given(
        st.lists(
            st.lists(st.text(max_size=12), min_size=3, max_size=3),
            max_size=40,
        )
    )
    @settings(max_examples=120, deadline=None)
    def test_idempotent_on_fuzzed_rows(self, rows):
        raw = source(["H1", "H2", "H3"], rows)
        once = clean(raw, CFG)
        assert clean(once, CFG) == once


class TestStandardise:
    def _cfg(self):
        return TransformConfig(
            tables=(
                TableSpec(
                    "course",
                    (
                        ColumnSpec("Code", "code", Datatype.IDENTIFIER, Role.PRIMARY_KEY),
                        ColumnSpec("Seen", "seen", Datatype.DATE),
                        ColumnSpec("Credits", "credits", Datatype.INTEGER),
                        ColumnSpec("Score", "score", Datatype.DECIMAL),
                        ColumnSpec("Active", "active", Datatype.BOOLEAN),
                    ),
                ),
            )
        )

    def test_coercions(self):
        raw = source(
            ["Code", "Seen", "Credits", "Score", "Active"],
            [["c1", "05/11/2023", "+9", "-3.50", "Yes"]],
        )
        ds = standardise(clean(raw, self._cfg()), self._cfg())
        assert ds.tables[0].rows[0] == ("c1", True, 9, Decimal("-3.5"), date(2023, 11, 5))

    @pytest.mark.parametrize(
        "raw_date,expected",
        [
            ("2023-11-05", date(2023, 11, 5)),
            ("05/11/2023", date(2023, 11, 5)),
            ("2023/11/05", date(2023, 11, 5)),
        ],
    )
    def test_date_layouts(self, raw_date, expected):
        raw = source(["Code", "Seen", "Credits", "Score", "Active"], [["c1", raw_date, "1", "1", "no"]])
        ds = standardise(clean(raw, self._cfg()), self._cfg())
        assert ds.tables[0].rows[0][-1] == expected

    def test_unmapped_header_listed(self):
        raw = source(["Code", "Mystery"], [["c1", "x"]])
        with pytest.raises(TransformError) as err:
            standardise(clean(raw, self._cfg()), self._cfg())
        assert "Mystery" in str(err.value)

    def test_uncoercible_cell_names_position(self):
        raw = source(["Code", "Seen", "Credits", "Score", "Active"], [["c1", "soon", "1", "1", "no"]])
        with pytest.raises(TransformError) as err:
            standardise(clean(raw, self._cfg()), self._cfg())
        assert "course" in str(err.value) and "seen" in str(err.value)

    def test_duplicate_primary_key_rejected(self):
        raw = source(
            ["Code", "Seen", "Credits", "Score", "Active"],
            [["p01", "2023-01-01", "1", "1", "no"], ["p01", "2023-01-02", "2", "2", "yes"]],
        )
        with pytest.raises(TransformError) as err:
            standardise(clean(raw, self._cfg()), self._cfg())
        assert "duplicate primary key" in str(err.value)

    def test_exact_duplicate_rows_collapse(self):
        raw = source(
            ["Code", "Seen", "Credits", "Score", "Active"],
            [["c1", "2023-01-01", "1", "1", "no"], ["c1", "2023-01-01", "1", "1.0", "no"]],
        )
        ds = standardise(clean(raw, self._cfg()), self._cfg())
        assert len(ds.tables[0].rows) == 1

    def test_canonical_column_order(self, walkthrough):
        course = walkthrough.standardised.table("course")
        assert [c.attribute for c in course.columns] == [
            "course_code", "course_name", "credits", "level", "professor_id", "taught_from",
        ]
        assert course.columns[0].role is Role.PRIMARY_KEY

    def test_denormalized_source_splits_into_tables(self, walkthrough):
        professor = walkthrough.standardised.table("professor")
        assert [r[0] for r in professor.rows] == ["p01", "p02"]


class TestExtractLanguage:
    def test_concepts_cover_tables_attributes_and_lexicon(self, walkthrough, unitn_cfg):
        ids = walkthrough.language.concept_ids()
        assert {"professor", "course", "course_code", "level", "courses_taught"} <= ids

    def test_lexicon_gloss_wins(self, walkthrough):
        concept = walkthrough.language.concept("courses_taught")
        assert any("triennali che magistrali" in x.gloss for x in concept.lexicalizations)

    def test_default_gloss_generated(self, walkthrough):
        concept = walkthrough.language.concept("taught_from")
        (lex,) = concept.lexicalizations
        assert lex.language_tag == "it"
        assert lex.lemma == "taught from"
        assert lex.gloss == "concept for taught_from as used in dataset university-std"

    def test_deterministic(self, walkthrough, unitn_cfg):
        again = extract_language(walkthrough.standardised, unitn_cfg, walkthrough.language.ref)
        assert again == walkthrough.language


class TestBuildKnowledge:
    def test_specialization_children(self, walkthrough):
        k = walkthrough.knowledge
        master = k.etype("master_course")
        bachelor = k.etype("bachelor_course")
        assert master.parent == "course" and bachelor.parent == "course"
        assert master.discriminator.attribute == "level"
        assert master.discriminator.value == "master"

    def test_discriminator_column_not_a_data_property(self, walkthrough):
        course = walkthrough.knowledge.etype("course")
        assert all(p.concept != "level" for p in course.data_properties)

    def test_foreign_key_becomes_object_property(self, walkthrough):
        course = walkthrough.knowledge.etype("course")
        (prop,) = course.object_properties
        assert prop.target == "professor"
        assert prop.concept == "professor_id"

    def test_key_property_recorded(self, walkthrough):
        assert walkthrough.knowledge.etype("course").key_property == "course_course_code"

    def test_concept_closure_against_language(self, walkthrough):
        assert validate(walkthrough.knowledge, context=[walkthrough.language]).ok

    def test_missing_discriminator_column_rejected(self, walkthrough, unitn_cfg):
        cfg = TransformConfig(
            tables=unitn_cfg.tables,
            default_language_tag="it",
            lexicon=unitn_cfg.lexicon,
            specializations=(
                SpecializationRule("course", "ghost", {"x": ("x_course", "course")}),
            ),
        )
        with pytest.raises(TransformError) as err:
            build_knowledge(walkthrough.standardised, walkthrough.language, cfg)
        assert "ghost" in str(err.value)

    def test_uncovered_discriminator_values_listed(self, walkthrough, unitn_cfg):
        cfg = TransformConfig(
            tables=unitn_cfg.tables,
            default_language_tag="it",
            lexicon=unitn_cfg.lexicon,
            specializations=(
                SpecializationRule("course", "level", {"master": ("master_course", "master_course")}),
            ),
        )
        with pytest.raises(TransformError) as err:
            build_knowledge(walkthrough.standardised, walkthrough.language, cfg)
        assert "bachelor" in str(err.value)

    def test_table_with_only_plain_columns(self):
        cfg = TransformConfig(
            tables=(TableSpec("note", (ColumnSpec("Text", "text", Datatype.STRING),)),)
        )
        raw = source(["Text"], [["hello"]])
        s = standardise(clean(raw, cfg), cfg)
        lang = extract_language(s, cfg)
        k = build_knowledge(s, lang, cfg)
        etype = k.etype("note")
        assert etype.key_property is None
        assert [p.concept for p in etype.data_properties] == ["text"]
        assert not etype.object_properties


class TestComposeGraph:
    def test_specialized_typing_consumes_discriminator(self, walkthrough):
        g = walkthrough.graph
        masters = [e for e in g.entities if e.etype == "master_course"]
        assert len(masters) == 1
        assert all(prop != "course_level" for prop, _ in masters[0].literals)
        assert masters[0].iri.endswith("/course/cs501")

    def test_entity_and_link_counts_match_fixture(self, walkthrough):
        s = walkthrough.standardised
        total_rows = sum(len(t.rows) for t in s.tables)
        course = s.table("course")
        fk_idx = course.column_index("professor_id")
        non_null_fk = sum(1 for row in course.rows if row[fk_idx] is not None)
        assert len(walkthrough.graph.entities) == total_rows
        assert sum(len(e.links) for e in walkthrough.graph.entities) == non_null_fk

    def test_composed_of_refs(self, walkthrough):
        sources = walkthrough.graph.composed_of
        assert sources.standardised == walkthrough.standardised.ref
        assert sources.language == walkthrough.language.ref
        assert sources.knowledge == walkthrough.knowledge.ref

    def test_empty_standardised_gives_zero_entities(self, unitn_node):
        cfg = TransformConfig(
            tables=(TableSpec("thing", (ColumnSpec("A", "a", Datatype.STRING),)),)
        )
        raw = source(["A"], [])
        result = run_pipeline(raw, cfg, unitn_node)
        assert result.graph.entities == ()
        assert validate(result.graph, context=[result.knowledge]).ok

    def test_keyless_rows_get_hash_iris(self, unitn_node):
        cfg = TransformConfig(
            tables=(TableSpec("thing", (ColumnSpec("A", "a", Datatype.STRING),)),)
        )
        raw = source(["A"], [["uno"], ["due"]])
        result = run_pipeline(raw, cfg, unitn_node)
        tails = sorted(e.iri.rsplit("/", 1)[1] for e in result.graph.entities)
        assert all(len(t) == 16 and int(t, 16) >= 0 for t in tails)

    def test_table_without_etype_is_coverage_error(self, walkthrough, num_walkthrough, unitn_node):
        foreign_k = num_walkthrough.knowledge  # covers professor/course only
        cfg = TransformConfig(
            tables=(TableSpec("unrelated", (ColumnSpec("A", "a", Datatype.STRING),)),)
        )
        raw = source(["A"], [["x"]])
        s = standardise(clean(raw, cfg), cfg)
        with pytest.raises(CoverageError) as err:
            compose_graph(s, num_walkthrough.language, foreign_k, unitn_node)
        assert err.value.uncovered == ("unrelated",)

    def test_language_must_be_used_by_knowledge(self, walkthrough, num_walkthrough, unitn_node):
        with pytest.raises(TransformError):
            compose_graph(
                walkthrough.standardised,
                num_walkthrough.language,
                walkthrough.knowledge,
                unitn_node,
            )


class TestDecomposeGraph:
    def test_round_trip_on_walkthrough(self, walkthrough):
        rebuilt = decompose_graph(walkthrough.graph, walkthrough.language, walkthrough.knowledge)
        assert rebuilt == walkthrough.standardised

    def test_zero_entity_graph_gives_empty_tables(self, unitn_node):
        cfg = TransformConfig(
            tables=(TableSpec("thing", (ColumnSpec("A", "a", Datatype.STRING),)),)
        )
        result = run_pipeline(source(["A"], []), cfg, unitn_node)
        rebuilt = decompose_graph(result.graph, result.language, result.knowledge)
        assert rebuilt == result.standardised
        assert rebuilt.tables[0].rows == ()

    @pytest.mark.parametrize("seed", range(30))
    def test_round_trip_on_generated_fixtures(self, seed, unitn_node):
        raw_bytes, cfg, ref = generators.generate_fixture(seed + 1000)
        raw = read_source_csv(raw_bytes, ref)
        result = run_pipeline(raw, cfg, unitn_node)
        rebuilt = decompose_graph(result.graph, result.language, result.knowledge)
        assert rebuilt == result.standardised


class TestGenerateMetadata:
    def test_graph_links(self, walkthrough, unitn_node):
        record = generate_metadata(
            walkthrough.graph, unitn_node, DownloadPolicy.AUTOMATIC,
            {"en": "Graph"}, {"en": "d"},
        )
        assert set(record.links.composed_of) == {
            walkthrough.standardised.ref, walkthrough.language.ref, walkthrough.knowledge.ref,
        }

    def test_knowledge_links(self, walkthrough, unitn_node):
        record = generate_metadata(
            walkthrough.knowledge, unitn_node, DownloadPolicy.AUTOMATIC,
            {"en": "Onto"}, {"en": "d"},
        )
        assert record.links.uses_language == (walkthrough.language.ref,)

    def test_standardised_has_empty_links(self, walkthrough, unitn_node, unitn_source):
        record = generate_metadata(
            walkthrough.standardised, unitn_node, DownloadPolicy.AUTOMATIC,
            {"en": "Std"}, {"en": "d"}, derived_from=(unitn_source.ref,),
        )
        assert record.links.composed_of == ()
        assert record.links.uses_language == ()
        assert record.links.derived_from == (unitn_source.ref,)

    def test_content_hash_matches_serialization(self, walkthrough, unitn_node):
        import hashlib

        record = generate_metadata(
            walkthrough.language, unitn_node, DownloadPolicy.AUTOMATIC,
            {"en": "L"}, {"en": "d"},
        )
        assert record.content_hash == hashlib.sha256(
            formats.serialize_language(walkthrough.language)
        ).hexdigest()

    def test_title_required(self, walkthrough, unitn_node):
        with pytest.raises(TransformError):
            generate_metadata(
                walkthrough.language, unitn_node, DownloadPolicy.AUTOMATIC,
                {"en": "  "}, {"en": "d"},
            )


class TestConfigCodec:
    def test_round_trip(self, unitn_cfg):
        assert config_from_json(config_to_json(unitn_cfg)) == unitn_cfg

    def test_attribute_defaults_to_slugged_header(self):
        doc = {
            "format": "transform-config/1",
            "tables": [
                {
                    "name": "professor",
                    "columns": [
                        {"header": "Courses Taught", "datatype": "identifier"},
                        {"header": "First  Name!", "datatype": "string"},
                    ],
                }
            ],
        }
        import json

        cfg = config_from_json(json.dumps(doc).encode())
        assert [c.attribute for c in cfg.tables[0].columns] == ["courses_taught", "first_name"]

    def test_slugged_header_becomes_typed_column(self):
        import json

        doc = {
            "format": "transform-config/1",
            "tables": [
                {
                    "name": "professor",
                    "columns": [{"header": "Courses Taught", "datatype": "identifier"}],
                }
            ],
        }
        cfg = config_from_json(json.dumps(doc).encode())
        raw = source(["Courses Taught"], [["cs101"]])
        ds = standardise(clean(raw, cfg), cfg)
        (column,) = ds.tables[0].columns
        assert column.attribute == "courses_taught"
        assert column.datatype is Datatype.IDENTIFIER
        assert ds.tables[0].rows == (("cs101",),)

    def test_duplicate_header_in_table_rejected(self):
        with pytest.raises(TransformError):
            TransformConfig(
                tables=(
                    TableSpec(
                        "t",
                        (
                            ColumnSpec("A", "a", Datatype.STRING),
                            ColumnSpec("A", "b", Datatype.STRING),
                        ),
                    ),
                )
            )

    def test_specialization_concept_must_be_in_lexicon(self):
        with pytest.raises(TransformError):
            TransformConfig(
                tables=(TableSpec("t", (ColumnSpec("A", "a", Datatype.STRING),)),),
                specializations=(SpecializationRule("t", "a", {"x": ("x_t", "x_t")}),),
            )

    def test_one_discriminator_per_table(self):
        lexicon = {"x_t": (Lexicalization("x", "en", "g"),), "y_t": (Lexicalization("y", "en", "g"),)}
        with pytest.raises(TransformError):
            TransformConfig(
                tables=(TableSpec("t", (ColumnSpec("A", "a", Datatype.STRING),)),),
                lexicon=lexicon,
                specializations=(
                    SpecializationRule("t", "a", {"x": ("x_t", "x_t")}),
                    SpecializationRule("t", "b", {"y": ("y_t", "y_t")}),
                ),
            )


class TestDeterminism:
    def test_pipeline_is_reproducible(self, unitn_source, unitn_cfg, unitn_node):
        first = run_pipeline(unitn_source, unitn_cfg, unitn_node)
        second = run_pipeline(unitn_source, unitn_cfg, unitn_node)
        for a, b in zip(first.datasets(), second.datasets()):
            assert formats.serialize_dataset(a) == formats.serialize_dataset(b)
