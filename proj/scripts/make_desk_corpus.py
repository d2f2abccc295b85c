#!/usr/bin/env python3
"""Generate the desk-scale stand-in corpus shipped under data/desk/.

Produces taxonomy.tsv (~370 codes with descriptions, synonyms and a derivable
hierarchy) and notes.jsonl (~2,000 multi-label notes with a long-tail
frequency profile) from a fixed seed. Rerunning the script reproduces both
files byte for byte.

Construction rules the rest of the toolkit relies on:

* Frequency tiers are realized exactly: every code's occurrence count lands in
  its intended tier (head >=1000, medium 100-999, tail 10-99, few-shot 1-9,
  zero-shot 0), so tier-based accounting is stable.
* Few-shot codes (1-9 occurrences) appear only in "quarantine" notes whose
  other codes all come from the reserved Z chapter. Z-chapter codes are kept
  at medium frequency and are never augmentation targets or substitution
  donors, so cloning or substituting for any other anchor can never change a
  few-shot code's occurrence count. That keeps the per-code extended counts
  exactly real + budget.
* Every zero-shot code shares a chapter (and usually a family) with at least
  one observed code, so sibling substitution always finds a donor.
* A small ICD-9-like family (428.x / 401.x) is mixed in to exercise the
  numeric code shapes end to end.
"""

import argparse
import json
import pathlib
import random
from collections import Counter

SEED = 20240501

# Per-chapter clinical vocabulary used to assemble descriptions. Every
# description keeps at least two words of length >= 4 so downstream text
# matching has something to anchor on.
CHAPTER_VOCAB = {
    "A": ("infection", ["bacterial", "enteric", "systemic", "parasitic", "febrile"],
          ["sepsis", "colitis", "bacteremia", "abscess"]),
    "C": ("neoplasm", ["malignant", "primary", "metastatic", "localized", "indolent"],
          ["carcinoma", "lymphoma", "tumor burden", "mass lesion"]),
    "E": ("endocrine disorder", ["metabolic", "diabetic", "thyroid", "nutritional", "lipid"],
          ["diabetes mellitus", "hypothyroidism", "hyperlipidemia", "malnutrition"]),
    "I": ("circulatory disease", ["hypertensive", "ischemic", "embolic", "valvular", "arrhythmic"],
          ["heart failure", "myocardial ischemia", "atrial fibrillation", "hypertension"]),
    "J": ("respiratory disease", ["obstructive", "restrictive", "infectious", "hypoxemic", "chronic"],
          ["pneumonia", "respiratory failure", "bronchitis", "airway obstruction"]),
    "K": ("digestive disease", ["hepatic", "gastric", "biliary", "pancreatic", "intestinal"],
          ["cirrhosis", "gastritis", "pancreatitis", "bowel obstruction"]),
    "N": ("genitourinary disease", ["renal", "chronic", "obstructive", "tubular", "glomerular"],
          ["kidney disease", "nephropathy", "urinary obstruction", "renal insufficiency"]),
    "R": ("clinical finding", ["unexplained", "recurrent", "transient", "persistent", "acute"],
          ["syncope", "fever episodes", "weight loss", "altered mentation"]),
    "Z": ("care encounter", ["scheduled", "long-term", "preventive", "postprocedural", "routine"],
          ["medication monitoring", "device aftercare", "screening visit", "therapy management"]),
    "9": ("cardiovascular condition", ["congestive", "hypertensive", "chronic", "decompensated", "stable"],
          ["heart failure", "hypertension", "cardiomegaly", "volume overload"]),
}

SYNONYM_POOL = {
    "A": ["recurrent bloodstream infection", "invasive organism recovered", "culture positive illness"],
    "C": ["biopsy proven malignancy", "oncologic disease", "tumor recurrence"],
    "E": ["endocrinopathy", "metabolic derangement", "glandular dysfunction"],
    "I": ["cardiac decompensation", "cardiovascular disease", "pump dysfunction"],
    "J": ["pulmonary compromise", "airway disease", "ventilatory impairment"],
    "K": ["gastrointestinal disorder", "digestive complaint", "enteric disease"],
    "N": ["renal impairment", "urologic disease", "kidney dysfunction"],
    "R": ["nonspecific presentation", "constitutional symptoms", "clinical syndrome"],
    "Z": ["maintenance encounter", "follow-up visit", "administrative admission"],
    "9": ["cardiac insufficiency", "circulatory overload", "elevated blood pressure"],
}

HPI_OPENERS = [
    "Patient admitted with",
    "Presented to the emergency department with",
    "Transferred from an outside facility for",
    "Admitted electively for management of",
]
COURSE_VERBS = [
    "was treated for",
    "underwent evaluation of",
    "received targeted therapy for",
    "was monitored closely for",
]


def code_str(chapter, root_idx, suffix=""):
    if chapter == "9":
        return f"{root_idx}{suffix}"
    return f"{chapter}{root_idx:02d}{suffix}"


def make_description(rng, chapter, code):
    noun, qualifiers, findings = CHAPTER_VOCAB[chapter]
    qualifier = rng.choice(qualifiers)
    finding = rng.choice(findings)
    variants = [
        f"{qualifier.capitalize()} {finding} with {noun}",
        f"{qualifier.capitalize()} {noun} presenting as {finding}",
        f"{finding.capitalize()} due to {qualifier} {noun}",
        f"{qualifier.capitalize()} {finding}, {noun} type {code[-1]}",
    ]
    return rng.choice(variants)


def make_synonyms(rng, chapter):
    n = rng.choice([0, 0, 1, 1, 2, 3])
    pool = SYNONYM_POOL[chapter]
    return rng.sample(pool, min(n, len(pool)))


def build_taxonomy(rng):
    """Returns (rows, roles) where roles maps code -> intended tier role."""
    rows = []   # (code, description, synonyms, parent)
    roles = {}  # code -> "head"|"medium"|"tail"|"few"|"zero"|"companion"

    def add(code, chapter, role, parent=""):
        rows.append((code, make_description(rng, chapter, code), make_synonyms(rng, chapter), parent))
        roles[code] = role

    # Clinical chapters: 4 families each, a mix of flat (4-char) and deep
    # (5-char) leaves. Role patterns per family cycle so every fallback
    # structure occurs somewhere.
    chapters = ["A", "C", "E", "I", "J", "K", "N", "R"]
    head_assigned = 0
    for ci, chapter in enumerate(chapters):
        for fi in range(5):
            root_idx = 10 + fi * 7 + ci  # spread family roots out a bit
            root = code_str(chapter, root_idx)
            # some roots are themselves coded in notes
            root_role = ["tail", "zero", "medium", "tail", "tail"][fi]
            add(root, chapter, root_role)

            deep = fi == 2  # one deep family per chapter
            if deep:
                # two subfamilies of 3 leaves: X##.1y / X##.2y
                for sub in (1, 2):
                    for li in range(3):
                        leaf = f"{root}{sub}{li + 1}"
                        # subfamily 2 of the deep family is fully zero-shot so
                        # substitution has to fall back to cousins (family tier)
                        if sub == 2:
                            role = "zero" if li < 2 else "tail"
                        else:
                            role = ["tail", "few", "few"][li]
                        add(leaf, chapter, role)
            else:
                n_leaves = 4 + (fi + ci) % 3
                for li in range(n_leaves):
                    leaf = f"{root}{li + 1}"
                    pattern = ["few", "tail", "zero", "few", "medium", "few"]
                    role = pattern[(li + fi) % len(pattern)]
                    # keep two head codes overall, hosted in I and J chapters
                    if head_assigned < 2 and chapter in ("I", "J") and fi == 0 and li == 0:
                        role = "head"
                        head_assigned += 1
                    add(leaf, chapter, role)

    # Reserved companion chapter Z: always observed at medium frequency, never
    # a target, never a donor (no zero-shot Z codes exist).
    add("Z10", "Z", "companion")
    add("Z11", "Z", "companion")
    for li in range(5):
        add(f"Z10{li + 1}", "Z", "companion")
        add(f"Z11{li + 1}", "Z", "companion")

    # ICD-9-like numeric family; explicit parents on two rows exercise the
    # parent column.
    add("428", "9", "zero")
    add("401", "9", "tail")
    add("4280", "9", "tail", parent="428")
    add("4281", "9", "few", parent="428")
    add("4289", "9", "zero")
    add("4010", "9", "tail")
    add("4011", "9", "zero")
    add("4019", "9", "medium")

    return rows, roles


def assign_frequencies(rng, roles):
    freq = {}
    for code, role in sorted(roles.items()):
        if role == "head":
            freq[code] = rng.randint(1050, 1150)
        elif role == "medium":
            freq[code] = rng.randint(110, 220)
        elif role == "tail":
            freq[code] = rng.randint(12, 60)
        elif role == "few":
            freq[code] = rng.randint(1, 9)
        elif role == "zero":
            freq[code] = 0
        elif role == "companion":
            freq[code] = 0  # counted from quarantine composition, topped up later
    return freq


def dotted(code):
    if code[0].isdigit():
        return code if len(code) <= 3 else code[:3] + "." + code[3:]
    return code if len(code) <= 3 else code[:3] + "." + code[3:]


def chapter_of(code):
    return "9" if code[0].isdigit() else code[0]


def note_text(rng, descriptions):
    opener = rng.choice(HPI_OPENERS)
    parts = [f"{opener} {descriptions[0][0].lower() + descriptions[0][1:]}."]
    for desc in descriptions[1:]:
        verb = rng.choice(COURSE_VERBS)
        parts.append(f"The patient {verb} {desc[0].lower() + desc[1:]}.")
    parts.append("Discharged in stable condition with follow-up arranged.")
    return " ".join(parts)


def build_notes(rng, roles, freq, desc_of):
    notes = []
    counter = 0

    def emit(codes):
        nonlocal counter
        counter += 1
        descriptions = [desc_of[c] for c in codes]
        notes.append({
            "id": f"note-{counter:05d}",
            "text": note_text(rng, descriptions),
            "codes": [dotted(c) for c in codes],
            "origin": "real",
        })

    companions = sorted(c for c, r in roles.items() if r == "companion")
    few_codes = sorted(c for c, r in roles.items() if r == "few")
    general_codes = sorted(c for c, r in roles.items() if r in ("head", "medium", "tail"))

    # Quarantine notes: one few-shot code plus 3-6 companion codes.
    companion_count = Counter()
    quarantine = []
    for f in few_codes:
        for _ in range(freq[f]):
            picks = rng.sample(companions, rng.randint(3, 6))
            for p in picks:
                companion_count[p] += 1
            quarantine.append([f] + sorted(picks))
    rng.shuffle(quarantine)

    # Top up companions to medium frequency with companion-only notes.
    topups = []
    for p in companions:
        while companion_count[p] < 110:
            others = rng.sample([c for c in companions if c != p], rng.randint(2, 4))
            group = [p] + others
            for g in group:
                companion_count[g] += 1
            topups.append(sorted(group))

    # General notes: deal the exact per-code occurrence counts into notes of
    # 3-9 distinct codes, preferring same-chapter groupings.
    remaining = Counter({c: freq[c] for c in general_codes})
    general = []
    while remaining:
        pool = sorted(remaining.keys())
        weights = [remaining[c] for c in pool]
        pivot = rng.choices(pool, weights=weights, k=1)[0]
        want = rng.randint(3, 9)
        note = [pivot]
        same = [c for c in pool if c != pivot and chapter_of(c) == chapter_of(pivot)]
        other = [c for c in pool if c != pivot and chapter_of(c) != chapter_of(pivot)]
        rng.shuffle(same)
        rng.shuffle(other)
        same.sort(key=lambda c: -remaining[c])
        other.sort(key=lambda c: -remaining[c])
        take_same = min(len(same), max(1, want // 2))
        note += same[:take_same]
        note += other[: want - len(note)]
        for c in note:
            remaining[c] -= 1
            if remaining[c] == 0:
                del remaining[c]
        general.append(sorted(note))

    for codes in quarantine + topups:
        emit(codes)
    for codes in general:
        emit(codes)
    rng.shuffle(notes)
    for i, note in enumerate(notes):
        note["id"] = f"note-{i + 1:05d}"
    return notes, companion_count


def verify(rows, roles, notes):
    """Structural assertions the pipeline's accounting depends on."""
    taxonomy_codes = {r[0] for r in rows}
    counts = Counter()
    for note in notes:
        codes = [c.replace(".", "") for c in note["codes"]]
        assert 1 <= len(codes) <= 10, note["id"]
        assert len(set(codes)) == len(codes), note["id"]
        for c in codes:
            assert c in taxonomy_codes, f"{c} missing from taxonomy"
            counts[c] += 1
        non_companion = [c for c in codes if roles[c] != "companion"]
        few = [c for c in codes if roles[c] == "few"]
        if few:
            assert len(few) == 1 and len(non_companion) == 1, \
                f"few-shot code {few} shares {note['id']} with {non_companion}"

    observed_chapters = {chapter_of(c) for c in counts}
    for code, role in roles.items():
        n = counts[code]
        if role == "head":
            assert n >= 1000, (code, n)
        elif role == "medium":
            assert 100 <= n <= 999, (code, n)
        elif role == "tail":
            assert 10 <= n <= 99, (code, n)
        elif role == "few":
            assert 1 <= n <= 9, (code, n)
        elif role == "zero":
            assert n == 0, (code, n)
            assert chapter_of(code) in observed_chapters, f"no donor chapter for {code}"
        elif role == "companion":
            assert 100 <= n <= 999, (code, n)

    avg = sum(len(n["codes"]) for n in notes) / len(notes)
    assert 3.0 <= avg <= 8.0, avg
    print(f"verified: {len(rows)} taxonomy codes, {len(notes)} notes, "
          f"avg {avg:.2f} codes/note, "
          f"{sum(1 for c, r in roles.items() if r == 'zero')} zero-shot codes")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "desk"))
    args = parser.parse_args()

    rng = random.Random(SEED)
    rows, roles = build_taxonomy(rng)
    freq = assign_frequencies(rng, roles)
    desc_of = {code: desc for code, desc, _, _ in rows}
    notes, _ = build_notes(rng, roles, freq, desc_of)
    verify(rows, roles, notes)

    out_dir = pathlib.Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    with open(out_dir / "taxonomy.tsv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("code\tdescription\tsynonyms\tparent\n")
        for code, desc, synonyms, parent in sorted(rows):
            fh.write(f"{dotted(code)}\t{desc}\t{'|'.join(synonyms)}\t{dotted(parent) if parent else ''}\n")

    with open(out_dir / "notes.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for note in notes:
            fh.write(json.dumps(note, sort_keys=True) + "\n")

    print(f"wrote {out_dir / 'taxonomy.tsv'} and {out_dir / 'notes.jsonl'}")


if __name__ == "__main__":
    main()
