#!/usr/bin/env python3
"""Regenerates the bundled fixture under data/: a small knowledge graph, the
pages its external identifiers point to, and the page index.

    python3 tools/make_fixture.py [data_dir]

Output is deterministic; rerunning it must leave git clean.
"""

import json
import random
import sys
import zlib
from pathlib import Path

REFERENCE_YEAR = 2022

COUNTRIES = [
    # id, label, aliases, continent
    ("Q29", "Spain", [], "Q46"),
    ("Q142", "France", [], "Q46"),
    ("Q183", "Germany", [], "Q46"),
    ("Q17", "Japan", [], "Q48"),
    ("Q155", "Brazil", [], "Q18"),
    ("Q16", "Canada", [], "Q49"),
    ("Q230", "Georgia", ["Sakartvelo"], "Q48"),
    ("Q34", "Sweden", [], "Q46"),
    ("Q38", "Italy", [], "Q46"),
    ("Q96", "Mexico", [], "Q49"),
]

ADJECTIVES = ["Copper", "Velvet", "Hollow", "Silent", "Northern", "Paper", "Electric", "Golden",
              "Lunar", "Crimson", "Wandering", "Glass", "Iron", "Amber", "Distant", "Static"]
NOUNS = ["Lanterns", "Harbors", "Tides", "Foxes", "Engines", "Gardens", "Signals", "Rivers",
         "Pilots", "Orchards", "Echoes", "Satellites", "Wolves", "Bridges", "Choirs", "Kites"]


def entity(eid, label, aliases=None, claims=None, external_ids=None, description=None):
    rec = {"id": eid, "labels": {"en": label}}
    if aliases:
        rec["aliases"] = {"en": aliases}
    if description:
        rec["descriptions"] = {"en": description}
    rec["claims"] = claims or {}
    if external_ids:
        rec["external_ids"] = external_ids
    return rec


def prop(pid, label, datatype, aliases=None, formatter=None):
    rec = {"id": pid, "labels": {"en": label}, "datatype": datatype, "claims": {}}
    if aliases:
        rec["aliases"] = {"en": aliases}
    if formatter:
        rec["claims"]["P1630"] = [{"value": formatter}]
    return rec


def items(*ids):
    return [{"item": i} for i in ids]


def musicbrainz_page(name, year, area):
    founded = ""
    if year is not None:
        founded = (f'<dt>Founded:</dt><dd class="begin-date">{year}<!---->'
                   f'({REFERENCE_YEAR - year} years ago)</dd>\n')
    return f"""<!DOCTYPE html>
<html lang="en"><head><meta charset="utf-8"><title>{name} - MusicBrainz</title>
<script>window.__MB__ = {{"begin": "1888 (134 years ago)", "area": "Atlantis"}};</script>
<style>.begin-date {{ color: #333; }}</style></head>
<body><div id="header"><img src="/static/logo.svg" alt="MusicBrainz"></div>
<div id="content"><h1>{name}</h1>
<h2>Artist information</h2>
<dl class="properties">
<dt>Type:</dt><dd class="type">Group</dd>
{founded}<dt>Area:</dt><dd class="area"><a href="/area/{zlib.crc32(area.encode()) % 1000}">{area}</a></dd>
</dl></div></body></html>
"""


def orcid_page(name, education, employment):
    return f"""<!DOCTYPE html>
<html><head><title>{name} - ORCID</title><script src="/orcid.js"></script></head>
<body><div class="record"><h1>{name}</h1>
<section id="education"><h2>Education and qualifications</h2><ul><li>{education}</li></ul></section>
<section id="employment"><h2>Employment</h2><ul><li>{employment}</li></ul></section>
</div></body></html>
"""


def trial_page(title, study_type, enrollment):
    return f"""<!DOCTYPE html>
<html><head><title>{title} | ClinicalTrials.gov</title></head>
<body><div class="tr-study"><h1>{title}</h1>
<table class="tr-table">
<tr><td>Enrollment :</td><td>{enrollment} participants</td></tr>
<tr><td>Study Type :</td><td>{study_type}</td></tr>
</table></div></body></html>
"""


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data"
    rng = random.Random(7)
    lines = []
    pages = []

    def add_page(url, file, html):
        path = out / "pages" / file
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(html, encoding="utf-8")
        pages.append({"url": url, "file": file, "status": 200, "content_type": "text/html; charset=utf-8"})

    # properties
    lines += [
        prop("P1630", "formatter URL", "string"),
        prop("P31", "instance of", "wikibase-item"),
        prop("P30", "continent", "wikibase-item"),
        prop("P17", "country", "wikibase-item"),
        prop("P434", "MusicBrainz artist ID", "external-id", formatter="https://musicbrainz.org/artist/$1"),
        prop("P496", "ORCID iD", "external-id", formatter="https://orcid.org/$1"),
        prop("P3098", "ClinicalTrials.gov ID", "external-id", formatter="https://clinicaltrials.gov/study/$1"),
        prop("P718", "Canmore ID", "external-id", formatter="https://canmore.org.uk/site/$1"),
        prop("P571", "inception", "time", aliases=["date founded", "formed"]),
        prop("P495", "country of origin", "wikibase-item", aliases=["origin"]),
        prop("P108", "employer", "wikibase-item", aliases=["employed by"]),
        prop("P735", "given name", "wikibase-item", aliases=["first name"]),
        prop("P69", "educated at", "wikibase-item", aliases=["alma mater"]),
        prop("P8363", "study type", "wikibase-item"),
        prop("P527", "has part", "wikibase-item"),
        prop("P131", "located in the administrative territorial entity", "wikibase-item",
             aliases=["is located in"]),
    ]

    # classes and shared neighbors
    for eid, label in [("Q6256", "country"), ("Q3624078", "sovereign state"), ("Q35657", "state of the United States"),
                       ("Q30", "United States of America"), ("Q145", "United Kingdom"), ("Q515", "city"),
                       ("Q875538", "public university"), ("Q3918", "university"), ("Q476028", "association football club"),
                       ("Q928830", "metro station"), ("Q5", "human"), ("Q215380", "musical group"),
                       ("Q202866", "given name"), ("Q30612", "clinical trial"), ("Q46", "Europe"), ("Q48", "Asia"),
                       ("Q18", "South America"), ("Q49", "North America"), ("Q213", "Czech Republic"),
                       ("Q7280038", "Radcliffe Science Library"), ("Q22", "Scotland"), ("Q1408", "New Jersey"),
                       ("Q3957", "town"), ("Q15060255", "council area of Scotland"), ("Q1187580", "borough of New Jersey")]:
        lines.append(entity(eid, label))

    for eid, label, aliases, continent in COUNTRIES:
        lines.append(entity(eid, label, aliases, {"P31": items("Q6256", "Q3624078"), "P30": items(continent)}))
    lines.append(entity("Q1428", "Georgia", ["GA"], {"P31": items("Q35657"), "P17": items("Q30")},
                        description="state of the United States"))

    # Oxford and Charles University, with same-named confusables
    lines.append(entity("Q34433", "University of Oxford", ["Oxford"],
                        {"P31": items("Q875538", "Q3918"), "P17": items("Q145"), "P527": items("Q7280038")}))
    lines.append(entity("Q34217", "Oxford", [], {"P31": items("Q515"), "P17": items("Q145")},
                        description="city in Oxfordshire"))
    lines.append(entity("Q48946", "Oxford United F.C.", ["Oxford"], {"P31": items("Q476028"), "P17": items("Q145")},
                        description="association football club in Oxford"))
    lines.append(entity("Q31519", "Charles University", ["Univerzita Karlova"],
                        {"P31": items("Q875538", "Q3918"), "P17": items("Q213")}))
    lines.append(entity("Q90000301", "Charles University", [], {"P31": items("Q928830"), "P17": items("Q213")},
                        description="metro station"))
    lines.append(entity("Q1256981", "ETH Zurich", ["ETH"], {"P31": items("Q875538", "Q3918")}))
    lines.append(entity("Q49108", "Massachusetts Institute of Technology", ["MIT"], {"P31": items("Q3918")}))

    # Highlands
    lines.append(entity("Q1086265", "Highlands", ["Highland"], {"P31": items("Q1187580"), "P17": items("Q30"),
                                                                "P131": items("Q1408")},
                        description="borough of New Jersey, United States"))
    lines.append(entity("Q208279", "Highland", ["Highlands"], {"P31": items("Q15060255"), "P17": items("Q145"),
                                                               "P131": items("Q22")},
                        description="council area in the Scottish Highlands"))
    lines.append(entity("Q90000401", "Kilmuir Church", [], {"P131": items("Q208279")},
                        external_ids={"P718": "12001"}))

    # MusicBrainz artists
    lines.append(entity("Q113585063", "Deskadena", [], {"P31": items("Q215380")},
                        external_ids={"P434": "f6afb1cc-8799-41cf-8fa8-2745eeab36e6"}))
    add_page("https://musicbrainz.org/artist/f6afb1cc-8799-41cf-8fa8-2745eeab36e6", "musicbrainz/deskadena.html",
             musicbrainz_page("Deskadena", 1997, "Spain"))
    names = set()
    for i in range(40):
        while True:
            name = f"The {rng.choice(ADJECTIVES)} {rng.choice(NOUNS)}"
            if name not in names:
                names.add(name)
                break
        qid = f"Q9000{1000 + i}"
        mbid = f"{rng.getrandbits(32):08x}-{rng.getrandbits(16):04x}-4{rng.getrandbits(12):03x}-" \
               f"{8 + rng.getrandbits(2):x}{rng.getrandbits(12):03x}-{rng.getrandbits(48):012x}"
        year = rng.randint(1962, 2016)
        country = COUNTRIES[i % len(COUNTRIES)]
        claims = {"P31": items("Q215380")}
        # every eighth artist lacks the year, every ninth the country
        if i % 8 != 5:
            claims["P571"] = [{"value": str(year)}]
        if i % 9 != 4 and i != 26:
            claims["P495"] = items(country[0])
        area = country[1]
        if i == 13:
            area = "Atlantis"  # no such entity: the proposal stays unlinked
            claims.pop("P495", None)
        lines.append(entity(qid, name, [], claims, external_ids={"P434": mbid}))
        add_page(f"https://musicbrainz.org/artist/{mbid}", f"musicbrainz/{qid}.html",
                 musicbrainz_page(name, year, area))

    # ORCID researchers
    lines.append(entity("Q90000201", "Evzen", [], {"P31": items("Q202866")}))
    researchers = [
        ("Q994013", "Evzen Amler", "0000-0002-0977-8922", "Q90000201", None, "Q31519",
         "Charles University, Doctor of Medicine", "2nd Faculty of Medicine, Charles University, Prague, CZ"),
    ]
    given = ["Anna", "Tomas", "Mira", "Jonas", "Lea", "Pavel", "Iris", "Karel", "Nora", "Oskar"]
    schools = [("Q34433", "Oxford"), ("Q31519", "Charles University"), ("Q1256981", "ETH Zurich"),
               ("Q49108", "MIT")]
    employers = [("Q34433", "University of Oxford", "Oxford", "GB"), ("Q31519", "Charles University", "Prague", "CZ"),
                 ("Q1256981", "ETH Zurich", "Zurich", "CH"), ("Q49108", "Massachusetts Institute of Technology",
                                                              "Cambridge", "US")]
    for i, g in enumerate(given):
        gid = f"Q9000021{i}"
        lines.append(entity(gid, g, [], {"P31": items("Q202866")}))
        school = schools[i % len(schools)]
        emp = employers[(i + 1) % len(employers)]
        orcid = f"0000-000{i % 3}-{rng.randint(1000, 9999)}-{rng.randint(1000, 9999)}"
        employer_claim = None if i == 6 else emp[0]
        school_claim = None if i == 4 else school[0]
        researchers.append((f"Q9000022{i}", f"{g} {rng.choice(['Novak', 'Berg', 'Lind', 'Marek', 'Stone'])}", orcid,
                            gid, employer_claim, school_claim, f"{school[1]}, doctorate",
                            f"Department of Physics, {emp[1]}, {emp[2]}, {emp[3]}"))
    for qid, name, orcid, gid, employer, school, education, employment in researchers:
        claims = {"P31": items("Q5"), "P735": items(gid)}
        if employer:
            claims["P108"] = items(employer)
        if school:
            claims["P69"] = items(school)
        lines.append(entity(qid, name, [], claims, external_ids={"P496": orcid}))
        add_page(f"https://orcid.org/{orcid}", f"orcid/{qid}.html", orcid_page(name, education, employment))

    # ClinicalTrials studies
    lines.append(entity("Q818574", "observational study", ["Observational"], {"P31": items("Q30612")}))
    lines.append(entity("Q78089383", "interventional study", ["Interventional"], {"P31": items("Q30612")}))
    for i in range(10):
        qid = f"Q9100030{i}"
        nct = f"NCT0{4000000 + 137 * i}"
        observational = i % 3 != 1
        claims = {"P31": items("Q30612")}
        if i != 7:
            claims["P8363"] = items("Q818574" if observational else "Q78089383")
        title = f"Cohort study {i + 1} of sleep and memory" if observational else f"Trial {i + 1} of drug X"
        lines.append(entity(qid, title, [], claims, external_ids={"P3098": nct}))
        add_page(f"https://clinicaltrials.gov/study/{nct}", f"clinicaltrials/{nct}.html",
                 trial_page(title, "Observational" if observational else "Interventional", 40 + 17 * i))

    with open(out / "kg.ndjson", "w", encoding="utf-8") as f:
        for rec in lines:
            f.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")
    pages.sort(key=lambda p: p["url"])
    with open(out / "pages" / "index.json", "w", encoding="utf-8") as f:
        json.dump({"pages": pages}, f, indent=1, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    main()
