"""Shared fixtures: the two-node university walkthrough (Italian and
Mongolian lexicalizations over the same schema slugs) and small helpers.
"""

from __future__ import annotations

import pytest

from stratamesh.model import (
    ContentKind,
    Datatype,
    DatasetRef,
    Lexicalization,
    NodeDescriptor,
    Role,
)
from stratamesh.pipeline import (
    ColumnSpec,
    SpecializationRule,
    TableSpec,
    TransformConfig,
    read_source_csv,
    run_pipeline,
)

UNITN_RAW = b"""Professor ID, First Name , Last Name,Course Code,Course Name,Level,Credits,Taught From,Notes
p01,  Maria ,Rossi,cs101,Algoritmi e Strutture Dati,bachelor,9,2023-09-18,NA
p01,Maria,Rossi,cs501,Apprendimento   Automatico,master,6,18/09/2023,-
p02,Luca,Bianchi,m201,Analisi Matematica 2,bachelor,12,2023/09/18,N/A
,,,,,,,,
"""

NUM_RAW = "\n".join(
    [
        "Багшийн дугаар,Нэр,Овог,Хичээлийн код,Хичээлийн нэр,Түвшин,Кредит,Эхлэх огноо",
        "n01,Болд,Бат,cs101,Алгоритм ба өгөгдлийн бүтэц,bachelor,9,2023-09-04",
        "n01,Болд,Бат,ml502,Машин сургалт,master,6,04/09/2023",
        "n02,Сараа,Дорж,ph210,Физик 2,bachelor,12,2023/09/04",
    ]
).encode("utf-8") + b"\n"


def _course_table(headers: dict[str, str]) -> TableSpec:
    return TableSpec(
        "course",
        (
            ColumnSpec(headers["code"], "course_code", Datatype.IDENTIFIER, Role.PRIMARY_KEY),
            ColumnSpec(headers["name"], "course_name", Datatype.STRING),
            ColumnSpec(headers["level"], "level", Datatype.STRING),
            ColumnSpec(headers["credits"], "credits", Datatype.INTEGER),
            ColumnSpec(headers["from"], "taught_from", Datatype.DATE),
            ColumnSpec(
                headers["prof"], "professor_id", Datatype.IDENTIFIER, Role.FOREIGN_KEY, target="professor"
            ),
        ),
    )


def _professor_table(headers: dict[str, str]) -> TableSpec:
    return TableSpec(
        "professor",
        (
            ColumnSpec(headers["prof"], "professor_id", Datatype.IDENTIFIER, Role.PRIMARY_KEY),
            ColumnSpec(headers["first"], "first_name", Datatype.STRING),
            ColumnSpec(headers["last"], "last_name", Datatype.STRING),
        ),
    )


_SPECIALIZATION = SpecializationRule(
    "course",
    "level",
    {
        "master": ("master_course", "master_course"),
        "bachelor": ("bachelor_course", "bachelor_course"),
    },
)


def unitn_config() -> TransformConfig:
    headers = {
        "prof": "Professor ID", "first": "First Name", "last": "Last Name",
        "code": "Course Code", "name": "Course Name", "level": "Level",
        "credits": "Credits", "from": "Taught From",
    }
    lexicon = {
        "course": (
            Lexicalization("corso", "it", "unità di insegnamento universitario"),
            Lexicalization("course", "en", "a unit of university teaching"),
        ),
        "master_course": (
            Lexicalization("corso magistrale", "it", "corso erogato in una laurea magistrale"),
        ),
        "bachelor_course": (
            Lexicalization("corso triennale", "it", "corso erogato in una laurea triennale"),
        ),
        "professor": (Lexicalization("professore", "it", "docente universitario"),),
        "courses_taught": (
            Lexicalization(
                "corsi insegnati", "it",
                "corsi tenuti da un docente, sia triennali che magistrali",
            ),
        ),
    }
    return TransformConfig(
        tables=(_professor_table(headers), _course_table(headers)),
        default_language_tag="it",
        lexicon=lexicon,
        specializations=(_SPECIALIZATION,),
    )


def num_config() -> TransformConfig:
    headers = {
        "prof": "Багшийн дугаар", "first": "Нэр", "last": "Овог",
        "code": "Хичээлийн код", "name": "Хичээлийн нэр", "level": "Түвшин",
        "credits": "Кредит", "from": "Эхлэх огноо",
    }
    lexicon = {
        "course": (Lexicalization("хичээл", "mn", "их сургуулийн хичээл"),),
        "master_course": (Lexicalization("магистрын хичээл", "mn", "магистрын түвшний хичээл"),),
        "bachelor_course": (Lexicalization("бакалаврын хичээл", "mn", "бакалаврын түвшний хичээл"),),
        "professor": (Lexicalization("багш", "mn", "их сургуулийн багш"),),
    }
    return TransformConfig(
        tables=(_professor_table(headers), _course_table(headers)),
        default_language_tag="mn",
        lexicon=lexicon,
        specializations=(_SPECIALIZATION,),
    )


@pytest.fixture(scope="session")
def unitn_node() -> NodeDescriptor:
    return NodeDescriptor(
        node_id="unitn",
        name="University of Trento",
        domain_description={
            "en": "University data from Trento, Italy",
            "it": "Dati universitari di Trento",
        },
        base_url="https://unitn.example",
        publisher="University of Trento",
    )


@pytest.fixture(scope="session")
def num_node() -> NodeDescriptor:
    return NodeDescriptor(
        node_id="num",
        name="National University of Mongolia",
        domain_description={
            "en": "University data from Ulaanbaatar, Mongolia",
            "mn": "Улаанбаатар хотын их сургуулийн өгөгдөл",
        },
        base_url="https://num.example",
        publisher="National University of Mongolia",
    )


@pytest.fixture(scope="session")
def unitn_source():
    ref = DatasetRef("unitn", "university", 1, ContentKind.LOW_QUALITY)
    return read_source_csv(UNITN_RAW, ref, provenance="HR export")


@pytest.fixture(scope="session")
def num_source():
    ref = DatasetRef("num", "university", 1, ContentKind.LOW_QUALITY)
    return read_source_csv(NUM_RAW, ref, provenance="registry export")


@pytest.fixture(scope="session")
def unitn_cfg() -> TransformConfig:
    return unitn_config()


@pytest.fixture(scope="session")
def num_cfg() -> TransformConfig:
    return num_config()


@pytest.fixture(scope="session")
def walkthrough(unitn_source, unitn_cfg, unitn_node):
    """Node A's full pipeline result over the walkthrough source."""
    return run_pipeline(unitn_source, unitn_cfg, unitn_node)


@pytest.fixture(scope="session")
def num_walkthrough(num_source, num_cfg, num_node):
    return run_pipeline(num_source, num_cfg, num_node)
