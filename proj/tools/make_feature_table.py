#!/usr/bin/env python3
"""Generate data/features.csv: a 24-feature ternary articulatory table.

Feature names and value conventions follow the PanPhon layout. Base segments
are described by manner/place/laryngeal settings; diacritic variants are
derived from them.
"""
import sys
import unicodedata

FEATURES = [
    "syl", "son", "cons", "cont", "delrel", "lat", "nas", "strid", "voi",
    "sg", "cg", "ant", "cor", "distr", "lab", "hi", "lo", "back", "round",
    "velaric", "tense", "long", "hitone", "hireg",
]

# place -> (ant, cor, distr, lab, hi, lo, back, round)
PLACES = {
    "bilabial":     (+1, -1, -1, +1, -1, -1, -1, -1),
    "labiodental":  (+1, -1, +1, +1, -1, -1, -1, -1),
    "dental":       (+1, +1, +1, -1, -1, -1, -1, -1),
    "alveolar":     (+1, +1, -1, -1, -1, -1, -1, -1),
    "postalveolar": (-1, +1, +1, -1, -1, -1, -1, -1),
    "retroflex":    (-1, +1, -1, -1, -1, -1, -1, -1),
    "alveolopal":   (-1, +1, +1, -1, +1, -1, -1, -1),
    "palatal":      (-1, -1, -1, -1, +1, -1, -1, -1),
    "velar":        (-1, -1, -1, -1, +1, -1, +1, -1),
    "labiovelar":   (-1, -1, -1, +1, +1, -1, +1, +1),
    "uvular":       (-1, -1, -1, -1, -1, -1, +1, -1),
    "pharyngeal":   (-1, -1, -1, -1, -1, +1, +1, -1),
    "glottal":      (-1, -1, -1, -1, -1, -1, -1, -1),
}

# manner -> (son, cons, cont, delrel, lat, nas)
MANNERS = {
    "stop":       (-1, +1, -1, -1, -1, -1),
    "affricate":  (-1, +1, -1, +1, -1, -1),
    "fricative":  (-1, +1, +1, -1, -1, -1),
    "latfric":    (-1, +1, +1, -1, +1, -1),
    "nasal":      (+1, +1, -1, -1, -1, +1),
    "trill":      (+1, +1, +1, -1, -1, -1),
    "lateral":    (+1, +1, +1, -1, +1, -1),
    "approx":     (+1, -1, +1, -1, -1, -1),
    "glottalstop": (-1, -1, -1, -1, -1, -1),
    "glottalfric": (-1, -1, +1, -1, -1, -1),
}

SIBILANT = {"s", "z", "ʃ", "ʒ", "ʂ", "ʐ", "ɕ", "ʑ", "ts", "dz", "tʃ", "dʒ",
            "ʈʂ", "ɖʐ", "tɕ", "dʑ", "f", "v", "pf", "χ", "ʁ"}

CONSONANTS = [
    # phone, place, manner, voice
    ("p", "bilabial", "stop", -1), ("b", "bilabial", "stop", +1),
    ("m", "bilabial", "nasal", +1), ("ɸ", "bilabial", "fricative", -1),
    ("β", "bilabial", "fricative", +1), ("ʙ", "bilabial", "trill", +1),
    ("pf", "labiodental", "affricate", -1),
    ("f", "labiodental", "fricative", -1), ("v", "labiodental", "fricative", +1),
    ("ɱ", "labiodental", "nasal", +1), ("ʋ", "labiodental", "approx", +1),
    ("θ", "dental", "fricative", -1), ("ð", "dental", "fricative", +1),
    ("t", "alveolar", "stop", -1), ("d", "alveolar", "stop", +1),
    ("n", "alveolar", "nasal", +1), ("s", "alveolar", "fricative", -1),
    ("z", "alveolar", "fricative", +1), ("ts", "alveolar", "affricate", -1),
    ("dz", "alveolar", "affricate", +1), ("r", "alveolar", "trill", +1),
    ("ɾ", "alveolar", "trill", +1), ("l", "alveolar", "lateral", +1),
    ("ɬ", "alveolar", "latfric", -1), ("ɮ", "alveolar", "latfric", +1),
    ("ɹ", "alveolar", "approx", +1),
    ("tʃ", "postalveolar", "affricate", -1), ("dʒ", "postalveolar", "affricate", +1),
    ("ʃ", "postalveolar", "fricative", -1), ("ʒ", "postalveolar", "fricative", +1),
    ("ʈ", "retroflex", "stop", -1), ("ɖ", "retroflex", "stop", +1),
    ("ɳ", "retroflex", "nasal", +1), ("ʂ", "retroflex", "fricative", -1),
    ("ʐ", "retroflex", "fricative", +1), ("ɭ", "retroflex", "lateral", +1),
    ("ɻ", "retroflex", "approx", +1), ("ɽ", "retroflex", "trill", +1),
    ("ʈʂ", "retroflex", "affricate", -1), ("ɖʐ", "retroflex", "affricate", +1),
    ("tɕ", "alveolopal", "affricate", -1), ("dʑ", "alveolopal", "affricate", +1),
    ("ɕ", "alveolopal", "fricative", -1), ("ʑ", "alveolopal", "fricative", +1),
    ("c", "palatal", "stop", -1), ("ɟ", "palatal", "stop", +1),
    ("ɲ", "palatal", "nasal", +1), ("ç", "palatal", "fricative", -1),
    ("ʝ", "palatal", "fricative", +1), ("ʎ", "palatal", "lateral", +1),
    ("j", "palatal", "approx", +1),
    ("k", "velar", "stop", -1), ("g", "velar", "stop", +1),
    ("ŋ", "velar", "nasal", +1), ("x", "velar", "fricative", -1),
    ("ɣ", "velar", "fricative", +1), ("ɰ", "velar", "approx", +1),
    ("ʟ", "velar", "lateral", +1), ("kx", "velar", "affricate", -1),
    ("w", "labiovelar", "approx", +1), ("ʍ", "labiovelar", "approx", -1),
    ("q", "uvular", "stop", -1), ("ɢ", "uvular", "stop", +1),
    ("ɴ", "uvular", "nasal", +1), ("χ", "uvular", "fricative", -1),
    ("ʁ", "uvular", "fricative", +1), ("ʀ", "uvular", "trill", +1),
    ("ħ", "pharyngeal", "fricative", -1), ("ʕ", "pharyngeal", "fricative", +1),
    ("ʔ", "glottal", "glottalstop", -1), ("h", "glottal", "glottalfric", -1),
    ("ɦ", "glottal", "glottalfric", +1),
]

# phone, hi, lo, back, round, tense ; back 0 = central
VOWELS = [
    ("i", +1, -1, -1, -1, +1), ("y", +1, -1, -1, +1, +1),
    ("ɪ", +1, -1, -1, -1, -1), ("ʏ", +1, -1, -1, +1, -1),
    ("ɨ", +1, -1, 0, -1, +1), ("ʉ", +1, -1, 0, +1, +1),
    ("ɯ", +1, -1, +1, -1, +1), ("u", +1, -1, +1, +1, +1),
    ("ʊ", +1, -1, +1, +1, -1),
    ("e", -1, -1, -1, -1, +1), ("ø", -1, -1, -1, +1, +1),
    ("ɛ", -1, -1, -1, -1, -1), ("œ", -1, -1, -1, +1, -1),
    ("ɘ", -1, -1, 0, -1, +1), ("ɵ", -1, -1, 0, +1, +1),
    ("ə", -1, -1, 0, -1, -1), ("ɞ", -1, -1, 0, +1, -1),
    ("ɤ", -1, -1, +1, -1, +1), ("o", -1, -1, +1, +1, +1),
    ("ʌ", -1, -1, +1, -1, -1), ("ɔ", -1, -1, +1, +1, -1),
    ("æ", -1, +1, -1, -1, +1), ("ɶ", -1, +1, -1, +1, -1),
    ("a", -1, +1, 0, -1, -1), ("ɐ", -1, +1, 0, -1, +1),
    ("ɑ", -1, +1, +1, -1, -1), ("ɒ", -1, +1, +1, +1, -1),
]

CLICKS = [("ʘ", "bilabial"), ("ǀ", "dental"), ("ǃ", "postalveolar")]


def blank():
    return {f: 0 for f in FEATURES}


def consonant(phone, place, manner, voice):
    v = blank()
    son, cons, cont, delrel, lat, nas = MANNERS[manner]
    ant, cor, distr, lab, hi, lo, back, rnd = PLACES[place]
    v.update(syl=-1, son=son, cons=cons, cont=cont, delrel=delrel, lat=lat,
             nas=nas, strid=+1 if phone in SIBILANT else -1, voi=voice,
             sg=-1, cg=-1, ant=ant, cor=cor, distr=distr, lab=lab, hi=hi,
             lo=lo, back=back, round=rnd, velaric=-1, long=-1)
    if phone in ("h", "ɦ"):
        v["sg"] = +1
    if phone == "ʔ":
        v["cg"] = +1
    if phone == "ɾ":
        v["delrel"] = -1
        v["tense"] = -1
    if phone == "r":
        v["tense"] = +1
    return v


def vowel(phone, hi, lo, back, rnd, tense):
    v = blank()
    v.update(syl=+1, son=+1, cons=-1, cont=+1, delrel=-1, lat=-1, nas=-1,
             strid=-1, voi=+1, sg=-1, cg=-1, lab=-1, hi=hi, lo=lo, back=back,
             round=rnd, velaric=-1, tense=tense, long=-1)
    return v


def main(out):
    rows = {}

    def add(phone, vec):
        phone = unicodedata.normalize("NFD", phone)
        assert phone not in rows, phone
        rows[phone] = dict(vec)

    for phone, place, manner, voice in CONSONANTS:
        add(phone, consonant(phone, place, manner, voice))
    for phone, *q in VOWELS:
        add(phone, vowel(phone, *q))
    for phone, place in CLICKS:
        v = consonant(phone, place, "stop", -1)
        v["velaric"] = +1
        add(phone, v)

    base = dict(rows)
    obstruents = [p for p, v in base.items()
                  if v["syl"] == -1 and v["son"] == -1 and v["cons"] == +1
                  and v["velaric"] == -1]
    stops = [p for p in obstruents if base[p]["cont"] == -1]
    sonorants = [p for p, v in base.items() if v["syl"] == -1 and v["son"] == +1]
    vowels = [p for p, v in base.items() if v["syl"] == +1]

    # Allowed diacritics: aspiration, glottalization, length.
    for p in stops:
        v = dict(base[p]); v["sg"] = +1; add(p + "ʰ", v)
        if base[p]["voi"] == -1:
            v = dict(base[p]); v["cg"] = +1; add(p + "ʼ", v)
    for p in sonorants:
        v = dict(base[p]); v["cg"] = +1; add(p + "ˀ", v)
    for p in list(base):
        if base[p]["velaric"] == +1:
            continue
        v = dict(base[p]); v["long"] = +1; add(p + "ː", v)

    # Other diacritics: present for data-side lookup, pruned from the graph.
    for p in vowels:
        v = dict(base[p]); v["nas"] = +1; add(p + "̃", v)
    for p in ("p", "t", "k", "g", "b", "d", "s", "n", "l"):
        v = dict(base[p]); v["hi"] = +1; v["back"] = -1; add(p + "ʲ", v)
    for p in ("k", "g", "x", "q"):
        v = dict(base[p]); v["round"] = +1; v["lab"] = +1; add(p + "ʷ", v)
    for p in ("t", "d", "n"):
        v = dict(base[p]); v["distr"] = +1; add(p + "̺", v)  # apical
        v = dict(base[p]); v["distr"] = +1; add(p + "̻", v)  # laminal
    v = dict(base["t"]); v["distr"] = +1; add("t̪", v)
    v = dict(base["t"]); v["distr"] = +1; v["sg"] = +1; add("t̪ʰ", v)
    v = dict(base["d"]); v["voi"] = -1; add("d̥", v)

    with open(out, "w", encoding="utf-8") as fh:
        sym = {-1: "-", 0: "0", 1: "+"}
        fh.write("phone," + ",".join(FEATURES) + "\n")
        for phone, v in rows.items():
            fh.write(phone + "," + ",".join(sym[v[f]] for f in FEATURES) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/features.csv")
