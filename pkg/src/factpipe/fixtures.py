"""Deterministic toy corpus for demos and integration tests.

Generates a small Wikipedia-style dump plus a claim file whose claims are
actually solvable by the pipeline: every entity title appears before the
main verb of its claims, gold sentences share distinctive tokens with
their claims, and an intentionally ambiguous "Vell" title family makes
document retrieval sensitive to the search cutoff k (the gold page for
one claim only enters the candidate list at k = 7, another at k = 5).

Everything is a pure function of the requested sizes — no randomness —
so two generated corpora are byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path

from .corpus import ingest_dump, load_claims

_FIRST = ["Almera", "Boreth", "Calden", "Dorvik", "Elsin",
          "Farnel", "Gorsta", "Halvek", "Imbrel", "Jorvan"]
_LAST = ["Aster", "Brell", "Corin", "Dray", "Evrik",
         "Fenn", "Grova", "Hulde", "Ivren", "Joss"]
_KINDS = ["painter", "glacier", "novelist", "violinist", "sculptor",
          "cathedral", "botanist", "lighthouse", "composer", "fortress"]
_PLACES = ["Vestmark", "Quillor", "Sarneth", "Tolvane", "Ulmere",
           "Wrenfall", "Yarrowdale", "Zembric", "Norvik", "Peltham"]


def _entity(i):
    first = _FIRST[i % 10]
    last = _LAST[(i // 10) % 10]
    place_idx = (i // 3) % 10
    return {
        "first": first,
        "last": last,
        "name": f"{first} {last}",
        "title": f"{first}_{last}",
        "kind": _KINDS[i % 10],
        "wrong_kind": _KINDS[(i + 3) % 10],
        "place": _PLACES[place_idx],
        "wrong_place": _PLACES[(place_idx + 4) % 10],
        "other_place": _PLACES[(i + 5) % 10],
        "year": 1850 + (i * 7) % 140,
    }


def _lines_field(sentences):
    return "\n".join(f"{no}\t{s}" for no, s in enumerate(sentences))


def _article(title, sentences):
    return {"id": title, "text": " ".join(s for s in sentences if s),
            "lines": _lines_field(sentences)}


# The Vell family: one short gold title buried under longer siblings that
# outrank it for ambiguous mentions (ties break shorter-then-alphabetical,
# so Old_Vell and the Vell_* wings come first).
_VELL_ARTICLES = [
    ("Vell", ["Vell is a fortress above the Peltham valley.",
              "Vell was rebuilt twice after the border wars.",
              "The garrison records survive only in fragments.",
              "A narrow road connects the walls to the valley floor.",
              "Traders once wintered inside the lower court.",
              "Map makers disagree about the oldest towers.",
              ""]),
    ("Vell_Hall", ["Vell Hall is the roofed wing of the old fortress.",
                   "The hall hosted the winter assemblies.",
                   "Its beams were cut from valley oak.",
                   "A fire damaged the gallery long ago.",
                   "Restorers replaced the floor twice.",
                   "The kitchens stood behind the north wall.",
                   ""]),
    ("Vell_Gate", ["Vell Gate is the fortified entrance of the complex.",
                   "Two towers flank the passage.",
                   "The portcullis mechanism still turns.",
                   "Carved marks cover the inner arch.",
                   "Guards lodged above the passage.",
                   "The outer doors were replaced in iron.",
                   ""]),
    ("Vell_Arch", ["Vell Arch is a ceremonial span near the keep.",
                   "Processions passed beneath it each spring.",
                   "The keystone bears a worn crest.",
                   "Masons repaired the footing twice.",
                   "Lanterns once hung from the soffit.",
                   "The span survived both sieges.",
                   ""]),
    ("Vell_Keep", ["Vell Keep is the inner tower of the fortress.",
                   "Its walls are four paces thick.",
                   "A cistern sits beneath the floor.",
                   "Signal fires burned on the roof.",
                   "The stair winds against the sun.",
                   "Prisoners left marks in the cellar.",
                   ""]),
    ("Old_Vell", ["Old Vell is a ruined outer wall below the fortress.",
                  "Only the footings remain visible.",
                  "Sheep graze along the old ditch.",
                  "Stones were carted off for barns.",
                  "The line of the wall shows after rain.",
                  "Surveys traced the lost towers.",
                  ""]),
]

# (claim text, label, gold line numbers in the Vell article)
_VELL_CLAIMS = [
    ("The old Vell hall gate arch keep is a fortress.", "SUPPORTS", [0]),
    ("The old Vell hall gate is a fortress.", "SUPPORTS", [0]),
    ("The old Vell is a ruin.", "REFUTES", [0]),
]


def fixture_article_records(entities=50, ambiguity=True):
    """Dump records: one article per entity plus the Vell family."""
    records = []
    for i in range(entities):
        e = _entity(i)
        sentences = [
            f"{e['name']} is a {e['kind']} from {e['place']}.",
            f"{e['name']} was first recorded in {e['year']}.",
            f"The {e['place']} registry keeps a short entry on the subject.",
            "Several archives describe the surrounding region instead.",
            f"A museum in {e['place']} holds a few related documents.",
            "Scholars still debate most of the remaining details.",
            "",
        ]
        records.append(_article(e["title"], sentences))
    if ambiguity:
        for title, sentences in _VELL_ARTICLES:
            records.append(_article(title, sentences))
    return records


def fixture_claim_records(claims=50, entities=50, ambiguity=True):
    """Claim records cycling Supported / Refuted / NotEnoughInfo."""
    records = []
    amb = _VELL_CLAIMS if ambiguity else []
    for j, (text, label, lines) in enumerate(amb[:claims]):
        records.append({
            "id": 1000 + j, "claim": text, "label": label,
            "evidence": [[[j, j, "Vell", n] for n in lines]],
        })
    for j in range(len(records), claims):
        r = j - len(amb)
        e = _entity(r % entities)
        kind_of = r % 3
        cid = 1000 + j
        if kind_of == 0:
            if r % 12 == 0:
                # joint two-sentence evidence
                text = (f"{e['name']} is a {e['kind']} from {e['place']} "
                        f"first recorded in {e['year']}.")
                evidence = [[[j, j, e["title"], 0], [j, j, e["title"], 1]]]
            elif r % 9 == 3:
                # two alternative evidence sets; either one suffices
                text = f"{e['name']} is a {e['kind']} from {e['place']}."
                evidence = [[[j, j, e["title"], 0]],
                            [[j, j, e["title"], 0], [j, j, e["title"], 1]]]
            else:
                text = f"{e['name']} is a {e['kind']} from {e['place']}."
                evidence = [[[j, j, e["title"], 0]]]
            records.append({"id": cid, "claim": text, "label": "SUPPORTS",
                            "evidence": evidence})
        elif kind_of == 1:
            text = f"{e['name']} is a {e['wrong_kind']} from {e['wrong_place']}."
            records.append({"id": cid, "claim": text, "label": "REFUTES",
                            "evidence": [[[j, j, e["title"], 0]]]})
        else:
            text = f"{e['name']} appeared in {e['other_place']} without notice."
            records.append({"id": cid, "claim": text,
                            "label": "NOT ENOUGH INFO",
                            "evidence": [[[j, j, None, None]]]})
    return records


def write_fixture(out_dir, entities=50, claims=50, ambiguity=True):
    """Write wiki.jsonl and claims.jsonl under ``out_dir``; returns the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    wiki_path = out_dir / "wiki.jsonl"
    claims_path = out_dir / "claims.jsonl"
    with open(wiki_path, "w", encoding="utf-8") as fh:
        for rec in fixture_article_records(entities, ambiguity):
            fh.write(json.dumps(rec) + "\n")
    with open(claims_path, "w", encoding="utf-8") as fh:
        for rec in fixture_claim_records(claims, entities, ambiguity):
            fh.write(json.dumps(rec) + "\n")
    return wiki_path, claims_path


def build_fixture(out_dir, entities=50, claims=50, ambiguity=True):
    """Write the fixture under ``out_dir`` and load it back as objects."""
    wiki_path, claims_path = write_fixture(out_dir, entities, claims, ambiguity)
    return ingest_dump(wiki_path), load_claims(claims_path)
