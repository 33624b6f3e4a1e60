#!/usr/bin/env python3
"""Recount the fixture corpus with plain regular expressions.

Writes expected_stats.json next to this script. The counts are produced
without the Rust parser: tags are removed by regex, words are split on
whitespace, and degrees come from the JSON headers.

    python3 fixtures/oracle/recount.py [--check]
"""
import json
import pathlib
import re
import sys

HERE = pathlib.Path(__file__).resolve().parent
SCENARIOS = HERE.parent / "scenarios"
OUTPUT = HERE / "expected_stats.json"

VOCABULARY = {
    "IfcActor",
    "IfcControl",
    "IfcCostItem",
    "IfcPerformanceHistory",
    "IfcRelAssignsToControl",
    "IfcTask",
    "IfcZone",
}

TAG = re.compile(r"</?(?:phase|level|model|def|ref|modelref|scenarioref)\b[^>]*>")
DEF = re.compile(r'<def name="[^"]*">(.*?)</def>', re.S)
IFC = re.compile(r"\bIfc[A-Za-z0-9]+")
HEADER = re.compile(r"<rasaeco-meta>(.*?)</rasaeco-meta>", re.S)
LINE_MARKER = re.compile(r"^(#+(?=\s|$)|[-*] |\d+\. )")


def words(text):
    total = 0
    for line in text.split("\n"):
        line = line.lstrip()
        if line.startswith("```"):
            continue
        total += len(LINE_MARKER.sub("", line, count=1).split())
    return total


def recount():
    rows = {}
    relations = []
    for path in sorted(SCENARIOS.glob("*/scenario.md")):
        ident = path.parent.name
        source = path.read_text(encoding="utf-8").replace("\r\n", "\n")
        header = HEADER.search(source)
        meta = json.loads(header.group(1))
        body = source[header.end():]
        for rel in meta.get("relations", []):
            relations.append((ident, rel["target"]))
        matched = sum(
            1 for d in DEF.findall(body) if any(t in VOCABULARY for t in IFC.findall(d))
        )
        rows[ident] = {
            "identifier": ident,
            "word_count": words(TAG.sub("", body)),
            "phase_markings": len(re.findall(r"<phase\b", body)),
            "level_markings": len(re.findall(r"<level\b", body)),
            "definitions": len(re.findall(r"<def\b", body)),
            "ifc_matched": matched,
            "in_degree": 0,
            "out_degree": 0,
        }
    for source, target in relations:
        if target in rows:
            rows[source]["out_degree"] += 1
            rows[target]["in_degree"] += 1
    return {"scenarios": [rows[k] for k in sorted(rows)]}


def main():
    text = json.dumps(recount(), indent=2) + "\n"
    if "--check" in sys.argv:
        if OUTPUT.read_text() != text:
            sys.exit("expected_stats.json is stale; rerun recount.py")
        return
    OUTPUT.write_text(text)


if __name__ == "__main__":
    main()
