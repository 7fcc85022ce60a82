"""Seeded random (raw source, transform config) fixtures for round-trip
and property testing. Every generated pair is guaranteed to standardise
cleanly (unique keys, resolvable foreign keys, covered discriminators),
while the raw surface stays deliberately messy: mixed date layouts,
boolean synonyms, padded whitespace, null markers, noise rows/columns.
"""

from __future__ import annotations

import random
from datetime import date, timedelta

from stratamesh.model import ContentKind, Datatype, DatasetRef, Lexicalization, Role
from stratamesh.pipeline import (
    ColumnSpec,
    SpecializationRule,
    TableSpec,
    TransformConfig,
)

WORDS = [
    "alpha", "brook", "cedar", "delta", "ember", "frost", "grove", "harbor",
    "iris", "juniper", "koala", "lumen", "meadow", "nimbus", "opal", "pine",
]
PHRASES = [
    "  double  spaced value ", "plain text", 'quoted, "tricky" cell', "tab\tseparated",
    "ünïcode välue", "хоёр үг", "due parole", " trailing space ", "with-dash",
]
TAGS = ["en", "it", "mn", "de"]
NULLISH = ["", "NA", "N/A", "-", "null"]
DATE_EPOCH = date(2020, 1, 1)


def _raw_date(rng: random.Random, value: date) -> str:
    style = rng.randrange(3)
    if style == 0:
        return value.isoformat()
    if style == 1:
        return value.strftime("%d/%m/%Y")
    return value.strftime("%Y/%m/%d")


def _raw_bool(rng: random.Random, value: bool) -> str:
    return rng.choice(["yes", "true", "1"] if value else ["no", "false", "0"])


def _pad(rng: random.Random, text: str) -> str:
    left = " " * rng.randrange(3)
    right = "\t" if rng.random() < 0.2 else " " * rng.randrange(3)
    return f"{left}{text}{right}"


class FixtureBuilder:
    def __init__(self, rng: random.Random, index: int):
        self.rng = rng
        self.index = index
        self.counter = 0

    def _slug(self, pool: list[str]) -> str:
        self.counter += 1
        return f"{self.rng.choice(pool)}_{self.counter}"

    def build(self) -> tuple[bytes, TransformConfig, DatasetRef]:
        rng = self.rng
        n_tables = rng.randint(1, 3)
        specs: list[TableSpec] = []
        rows_by_table: dict[str, list[dict[str, str]]] = {}
        pk_values: dict[str, list[str]] = {}
        pk_attr: dict[str, tuple[str, Datatype]] = {}
        lexicon: dict[str, tuple[Lexicalization, ...]] = {}
        specializations: list[SpecializationRule] = []

        for t in range(n_tables):
            name = self._slug(WORDS)
            columns: list[ColumnSpec] = []
            has_pk = rng.random() < 0.85
            if has_pk:
                datatype = rng.choice([Datatype.IDENTIFIER, Datatype.INTEGER])
                attr = self._slug(["code", "key", "tag"])
                columns.append(ColumnSpec(f"{attr} RAW", attr, datatype, Role.PRIMARY_KEY))
                pk_attr[name] = (attr, datatype)
            for _ in range(rng.randint(1, 4)):
                datatype = rng.choice(
                    [Datatype.STRING, Datatype.INTEGER, Datatype.DECIMAL, Datatype.BOOLEAN, Datatype.DATE]
                )
                attr = self._slug(WORDS)
                columns.append(ColumnSpec(f"{attr} RAW", attr, datatype))
            # foreign key into an earlier keyed table
            targets = [s.name for s in specs if s.name in pk_attr]
            if targets and rng.random() < 0.6:
                target = rng.choice(targets)
                attr = f"{pk_attr[target][0]}_ref{self.counter}"
                columns.append(
                    ColumnSpec(f"{attr} RAW", attr, pk_attr[target][1], Role.FOREIGN_KEY, target=target)
                )
            spec = TableSpec(name, tuple(columns))
            specs.append(spec)

            n_rows = rng.randint(0, 8)
            rows = []
            used_keys: set[str] = set()
            for r in range(n_rows):
                row: dict[str, str] = {}
                for col in columns:
                    if col.role is Role.PRIMARY_KEY:
                        if col.datatype is Datatype.INTEGER:
                            value = str(rng.randrange(10_000) + len(used_keys) * 10_000)
                        else:
                            value = f"id{self.index}_{t}_{r}"
                        used_keys.add(value)
                        row[col.header] = _pad(rng, value)
                        pk_values.setdefault(name, []).append(value)
                    elif col.role is Role.FOREIGN_KEY:
                        choices = pk_values.get(col.target or "", [])
                        if choices and rng.random() < 0.8:
                            row[col.header] = _pad(rng, rng.choice(choices))
                        else:
                            row[col.header] = rng.choice(NULLISH)
                    elif rng.random() < 0.15:
                        row[col.header] = rng.choice(NULLISH)
                    elif col.datatype is Datatype.STRING:
                        row[col.header] = rng.choice(PHRASES)
                    elif col.datatype is Datatype.INTEGER:
                        row[col.header] = _pad(rng, str(rng.randrange(-500, 5000)))
                    elif col.datatype is Datatype.DECIMAL:
                        row[col.header] = _pad(rng, f"{rng.randrange(-9999, 9999)}.{rng.randrange(1000):03d}")
                    elif col.datatype is Datatype.BOOLEAN:
                        row[col.header] = _raw_bool(rng, rng.random() < 0.5)
                    elif col.datatype is Datatype.DATE:
                        row[col.header] = _raw_date(rng, DATE_EPOCH + timedelta(days=rng.randrange(3000)))
                rows.append(row)
            rows_by_table[name] = rows

        # specialization on one table with a dedicated plain string column
        candidates = [s for s in specs if rows_by_table[s.name]]
        if candidates and rng.random() < 0.6:
            chosen = rng.choice(candidates)
            attr = self._slug(["kind", "level", "group"])
            values = rng.sample(["basic", "advanced", "special", "general"], k=rng.randint(2, 3))
            children = {}
            for value in values:
                child = f"{value}_{chosen.name}"
                children[value] = (child, child)
                lexicon[child] = (
                    Lexicalization(value.replace("_", " "), rng.choice(TAGS), f"the {value} flavour of {chosen.name}"),
                )
            specializations.append(SpecializationRule(chosen.name, attr, children))
            new_spec = TableSpec(chosen.name, (*chosen.columns, ColumnSpec(f"{attr} RAW", attr, Datatype.STRING)))
            specs[specs.index(chosen)] = new_spec
            for row in rows_by_table[chosen.name]:
                row[f"{attr} RAW"] = _pad(rng, rng.choice(values)) if rng.random() < 0.9 else ""

        # random lexicon entries for some table/attribute concepts
        all_slugs = [s.name for s in specs] + [c.attribute for s in specs for c in s.columns]
        for slug in rng.sample(all_slugs, k=min(len(all_slugs), rng.randint(0, 4))):
            tags = rng.sample(TAGS, k=rng.randint(1, 3))
            lexicon[slug] = tuple(
                Lexicalization(f"{slug.replace('_', ' ')} ({tag})", tag, f"meaning of {slug} in {tag}")
                for tag in tags
            )

        cfg = TransformConfig(
            tables=tuple(specs),
            default_language_tag=rng.choice(TAGS),
            lexicon=lexicon,
            specializations=tuple(specializations),
        )

        raw = self._render_csv(specs, rows_by_table)
        ref = DatasetRef("unitn", f"fixture{self.index}", 1, ContentKind.LOW_QUALITY)
        return raw, cfg, ref

    def _render_csv(self, specs: list[TableSpec], rows_by_table: dict[str, list[dict[str, str]]]) -> bytes:
        rng = self.rng
        headers: list[str] = []
        for spec in specs:
            headers.extend(c.header for c in spec.columns)
        noise_header = rng.random() < 0.4
        if noise_header:
            headers.append("Noise Column")
        lines = [",".join(_quote(h) for h in headers)]
        # one wide row per (table, row): other tables' cells stay empty
        for spec in specs:
            for row in rows_by_table[spec.name]:
                cells = []
                for header in headers:
                    cells.append(_quote(row.get(header, "")))
                lines.append(",".join(cells))
                if rng.random() < 0.1:
                    lines.append(",".join(_quote(v) for v in [""] * len(headers)))  # all-null row
        if rng.random() < 0.3 and len(lines) > 1:
            body = lines[1:]
            rng.shuffle(body)
            lines[1:] = body
        newline = "\r\n" if rng.random() < 0.3 else "\n"
        return (newline.join(lines) + newline).encode("utf-8")


def _quote(value: str) -> str:
    if any(ch in value for ch in ',"\n\r'):
        return '"' + value.replace('"', '""') + '"'
    return value


def generate_fixture(seed: int) -> tuple[bytes, TransformConfig, DatasetRef]:
    """One deterministic (raw bytes, config, source ref) triple."""
    return FixtureBuilder(random.Random(seed), seed).build()
