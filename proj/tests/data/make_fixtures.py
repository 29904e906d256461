#!/usr/bin/env python3
"""Regenerates the fixture dataset and the topic-structured toy model.

The model is synthetic: each word is a weighted sum of topic directions plus
a small word-specific perturbation, so related words (father, mother, family)
end up close together. Output is deterministic.
"""
import json
import random
import re
from pathlib import Path

HERE = Path(__file__).resolve().parent

PROPERTIES = [
    ("P17", "country", "sovereign state of this item", ["sovereign state", "state", "land", "nation", "Country"]),
    ("P18", "image", "image of relevant illustration of the subject", ["picture", "photo", "photograph", "portrait"]),
    ("P19", "place of birth", "most specific known birth location of a person", ["birthplace", "born in", "birth place", "POB", "location of birth"]),
    ("P20", "place of death", "most specific known location of death", ["deathplace", "died in", "death place", "POD", "location of death"]),
    ("P21", "sex or gender", "sex or gender identity of human or animal", ["gender", "sex", "biological sex", "gender identity"]),
    ("P22", "father", "male parent of the subject", ["dad", "has father", "papa", "sire"]),
    ("P25", "mother", "female parent of the subject", ["mom", "mum", "mama", "has mother", "dam"]),
    ("P26", "spouse", "the subject has the object as their spouse (husband, wife, partner, etc.)", ["wife", "husband", "married to", "consort", "partner", "marriage partner"]),
    ("P27", "country of citizenship", "the object is a country that recognizes the subject as its citizen", ["citizenship", "nationality", "citizen of", "national of"]),
    ("P31", "instance of", "that class of which this subject is a particular example and member", ["is a", "type", "example of"]),
    ("P36", "capital", "seat of government of a country, province, state or other type of administrative territorial entity", ["capital city", "seat", "administrative seat", "seat of government"]),
    ("P40", "child", "subject has object as child", ["son", "daughter", "children", "kid", "offspring", "has child"]),
    ("P50", "author", "main creator(s) of a written work", ["writer", "written by", "creator", "poet"]),
    ("P53", "family", "family, including dynasty and nobility houses", ["house", "dynasty", "noble family", "clan"]),
    ("P57", "director", "director(s) of film, TV-series, stageplay, video game or similar", ["directed by", "film director", "movie director"]),
    ("P69", "educated at", "educational institution attended by subject", ["alma mater", "studied at", "university", "education", "school"]),
    ("P106", "occupation", "occupation of a person", ["profession", "job", "work", "career", "employment", "craft"]),
    ("P108", "employer", "person or organization for which the subject works or worked", ["employed by", "works at", "worked for", "company"]),
    ("P119", "place of burial", "location of grave, resting place, place of ash-scattering, etc.", ["burial place", "buried at", "grave", "tomb", "interred at"]),
    ("P131", "located in the administrative territorial entity", "the item is located on the territory of the following administrative entity", ["in", "located in", "city", "region", "is in the county of"]),
    ("P135", "movement", "literary, artistic, scientific or philosophical movement associated with this person or work", ["artistic movement", "art movement", "literary movement"]),
    ("P136", "genre", "creative work's genre or an artist's field of work", ["style", "music genre", "artistic genre", "film genre"]),
    ("P150", "contains administrative territorial entity", "(list of) direct subdivisions of an administrative territorial entity", ["divides into", "contains", "has villages", "subdivisions", "has subdivision"]),
    ("P166", "award received", "award or recognition received by a person, organisation or creative work", ["awards", "prize", "honors", "medal", "won"]),
    ("P214", "VIAF ID", "identifier for the Virtual International Authority File database", ["VIAF", "Virtual International Authority File"]),
    ("P279", "subclass of", "next higher class or type; all instances of these items are instances of those items", ["subtype of", "kind of", "subset of"]),
    ("P373", "Commons category", "name of the Wikimedia Commons category containing files related to this item", ["commons cat", "category on Commons"]),
    ("P463", "member of", "organization, club or musical group to which the subject belongs", ["member", "belongs to", "club membership"]),
    ("P509", "cause of death", "underlying or immediate cause of death", ["death cause", "died of", "died from"]),
    ("P551", "residence", "the place where the person is or has been, resident", ["lived in", "home", "address", "resides in", "domicile"]),
    ("P569", "date of birth", "date on which the subject was born", ["birth date", "born", "DOB", "birthday", "birth"]),
    ("P570", "date of death", "date on which the subject died", ["death date", "died", "DOD", "deathdate", "death"]),
    ("P580", "start time", "time an item begins to exist or a statement starts being valid", ["from", "start date", "beginning", "began", "starting", "since", "married"]),
    ("P582", "end time", "time an item ceases to exist or a statement stops being valid", ["end date", "until", "to", "divorced", "stop time", "ending", "ended", "dissolved"]),
    ("P734", "family name", "part of full name of person", ["surname", "last name", "cognomen"]),
    ("P735", "given name", "first name or another given name of this person", ["first name", "forename", "christian name", "personal name"]),
    ("P737", "influenced by", "this person, idea, etc. is informed by that other person, idea, etc.", ["inspired by", "influences", "influence", "taught by"]),
    ("P800", "notable work", "notable scientific, artistic or literary work, or other work of significance among subject's works", ["works", "known for", "famous work", "major works", "magnum opus"]),
    ("P937", "work location", "location where persons or organisations were actively participating in employment, business or other work", ["place of work", "workplace", "employment place"]),
    ("P1038", "relative", "family member (qualify with type of kinship)", ["relatives", "kin", "family member", "cousin", "uncle", "aunt", "nephew", "niece"]),
    ("P1082", "population", "number of people inhabiting the place; number of people of subject", ["inhabitants", "number of inhabitants", "residents", "human population"]),
    ("P1196", "manner of death", "general circumstances of a person's death", ["type of death", "mode of death"]),
    ("P1344", "participant in", "event in which a person or organization was/is a participant", ["participated in", "took part in", "attended"]),
    ("P1412", "languages spoken, written or signed", "language(s) that a person speaks, writes or signs", ["language", "speaks", "languages", "language spoken"]),
    ("P1477", "birth name", "full name of a person at birth, if different from their current, generally used name", ["maiden name", "born as", "original name"]),
    ("P1559", "name in native language", "name of a person in their native language", ["native name", "original language name"]),
    ("P3373", "sibling", "the subject and the object have the same parents", ["brother", "sister", "siblings", "has sibling"]),
    ("P6379", "has works in the collection", "collection that has works of this person or organisation", ["works in collection", "represented in collection"]),
]

ENTITIES = {
    "Q5582": ["P18", "P19", "P20", "P21", "P22", "P25", "P27", "P31", "P106", "P119", "P135", "P136",
              "P214", "P373", "P509", "P551", "P569", "P570", "P734", "P735", "P737", "P800", "P937",
              "P1038", "P1196", "P1412", "P1477", "P1559", "P3373", "P6379"],
    "Q42": ["P18", "P19", "P20", "P21", "P25", "P26", "P27", "P31", "P40", "P69", "P106", "P108",
            "P119", "P166", "P214", "P463", "P509", "P551", "P569", "P570", "P734", "P735", "P737",
            "P800", "P1412", "P3373"],
    "Q1001": ["P19", "P20", "P21", "P22", "P25", "P26", "P27", "P31", "P40", "P69", "P106",
              "P509", "P569", "P570", "P734", "P735", "P1196", "P1412", "P3373"],
    "Q90": ["P17", "P18", "P31", "P131", "P150", "P373", "P1082", "P166"],
    "Q64": ["P17", "P18", "P31", "P131", "P150", "P373", "P1082"],
    "Q183": ["P17", "P18", "P31", "P36", "P150", "P463", "P1082"],
    "Q172241": ["P31", "P57", "P136", "P166", "P18"],
    "Q25338": ["P31", "P50", "P136", "P166"],
    "Q1339": ["P19", "P20", "P21", "P22", "P26", "P27", "P31", "P40", "P106", "P119", "P136",
              "P569", "P570", "P734", "P735", "P3373", "P1038"],
    "Q7186": ["P19", "P20", "P21", "P26", "P27", "P31", "P40", "P69", "P106", "P108", "P166",
              "P463", "P569", "P570", "P1477", "P735", "P734"],
}

# Topic weights per word. Words not listed get a generic random vector.
TOPICS = {
    "kin": "family father mother sibling relative relatives kin cousin uncle aunt nephew niece dad papa sire mom mum mama dam parent parents male female son daughter children child kid offspring brother sister siblings spouse wife husband married marriage partner consort kinship dynasty clan noble nobility houses house",
    "time_start": "start starts began beginning starting since from begins time",
    "time_end": "end ending ended ends until stop stops ceases divorced dissolved",
    "birth": "birth born birthday birthplace dob",
    "death": "death died deathplace deathdate dod grave burial buried tomb interred resting ash-scattering",
    "place": "place location located territory city region county capital seat land state country province entity territorial administrative subdivisions villages divides residence lived home address resides domicile resident workplace",
    "name": "name names surname forename given first last cognomen christian personal maiden native original",
    "art": "image picture photo photograph portrait illustration genre style music film movement artistic art literary creative artist work works notable famous opus magnum collection represented",
    "org": "member membership club organization organisation belongs group employer employed company works worked employment job profession occupation career craft business",
    "gov": "country citizenship nationality citizen national sovereign nation government",
    "lang": "language languages speaks spoken written signed writes signs",
    "ident": "viaf id identifier authority file database commons category cat wikimedia",
    "class": "instance class type subclass subtype kind subset example instances",
    "award": "award awards received prize honors medal won recognition",
    "edu": "educated education university school alma mater studied institution attended",
    "quantity": "population inhabitants number people residents human inhabiting",
    "gender": "sex gender biological identity male female",
    "cause": "cause manner circumstances mode underlying immediate",
    "influence": "influenced influences influence inspired taught informed idea",
    "author": "author writer creator poet director directed",
    "event": "participant participated event took part attended",
}
SECONDARY = {"time_start": ["time"], "time_end": ["time"], "birth": ["kin"], "death": ["cause"]}

DIM = 32
STOP = set((HERE.parent.parent / "data" / "stopwords_en.txt").read_text().split())


def tokens(text):
    out = []
    for piece in text.lower().split():
        piece = re.sub(r"^[^0-9a-z]+|[^0-9a-z]+$", "", piece)
        if piece and piece not in STOP:
            out.append(piece)
    return out


def main():
    with open(HERE / "properties.jsonl", "w") as f:
        for pid, label, desc, aliases in PROPERTIES:
            f.write(json.dumps({"id": pid, "label": label, "description": desc, "aliases": aliases}) + "\n")
    with open(HERE / "entity_map.tsv", "w") as f:
        for qid, props in ENTITIES.items():
            f.write(qid + "\t" + ",".join(props) + "\n")

    vocab = ["family", "father", "mother", "sister", "brother"]
    for pid, label, desc, aliases in PROPERTIES:
        for text in [label, desc] + aliases:
            vocab.extend(tokens(text))
    for words in TOPICS.values():
        vocab.extend(words.split())
    seen, ordered = set(), []
    for w in vocab:
        if w not in seen and w not in ("viaf", "id", "dob", "dod"):
            seen.add(w)
            ordered.append(w)

    rng = random.Random(20180601)
    topics = sorted(set(TOPICS) | {"time"})
    basis = {t: [rng.gauss(0, 1) for _ in range(DIM)] for t in topics}
    membership = {}
    for t, words in TOPICS.items():
        for w in words.split():
            membership.setdefault(w, []).append(t)

    with open(HERE / "fixture_model.txt", "w") as f:
        f.write(f"{len(ordered)} {DIM}\n")
        for w in ordered:
            wr = random.Random("word:" + w)
            vec = [0.35 * wr.gauss(0, 1) for _ in range(DIM)]
            for t in membership.get(w, []):
                for extra in [t] + SECONDARY.get(t, []):
                    weight = 1.0 if extra == t else 0.5
                    vec = [v + weight * b for v, b in zip(vec, basis[extra])]
            f.write(w + " " + " ".join(f"{v:.5f}" for v in vec) + "\n")


if __name__ == "__main__":
    main()
