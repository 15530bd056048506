"""Synthetic challenge-format corpus with planted criterion evidence.

Real records are access-controlled, so offline runs use generated
patients. Each patient gets 3-5 dated notes of neutral filler text. Per
criterion the generator may plant

* ``evidence``: a sentence naming a concept from the criterion's code list,
  placed in the latest note (inside every temporal window);
* ``stale``: the same kind of sentence in the earliest note, at least 400
  days before the latest one (outside every window); temporal criteria only;
* ``distractor``: a sentence sharing a keyword with the evidence but
  naming no ontology concept.

Gold labels follow from the plants: evidence means met (not met for the
two negatively phrased criteria), stale evidence counts as absent.
``MockBackend`` keyword rules in ``mock_keywords.json`` answer "Yes." when
a criterion keyword appears, so the full record misleads them on
distractors while the extractive summary does not.
"""

from __future__ import annotations

import datetime as dt
import json
import random
from dataclasses import dataclass
from pathlib import Path

from .corpus import to_xml
from .criteria import TEMPORAL_WINDOWS
from .labels import CRITERION_IDS, Label
from .ontology import Concept, ConceptGraph, write_simple

# (id, preferred term, synonyms, parents)
TOY_CONCEPTS = [
    (138875005, "SNOMED CT Concept", (), ()),
    (404684003, "Clinical finding", (), (138875005,)),
    (71388002, "Procedure", (), (138875005,)),
    (105590001, "Substance", (), (138875005,)),
    (161617006, "Major abdominal surgery", (), (71388002,)),
    (236886002, "Hysterectomy", (), (161617006,)),
    (23968004, "Colectomy", ("large intestine excision",), (161617006,)),
    (1000101, "Small intestine excision", ("small bowel resection",), (161617006,)),
    (81060008, "Intestinal obstruction", ("bowel obstruction",), (404684003,)),
    (1000102, "Small bowel obstruction", (), (81060008,)),
    (194828000, "Angina", ("angina pectoris",), (404684003,)),
    (1000201, "Unstable angina", (), (194828000,)),
    (414795007, "Myocardial ischemia", (), (404684003,)),
    (53741008, "Coronary arteriosclerosis", ("coronary artery disease",), (404684003,)),
    (22298006, "Myocardial infarction", (), (404684003,)),
    (57054005, "Acute myocardial infarction", (), (22298006,)),
    (1001301, "Old myocardial infarction", (), (22298006,)),
    (15167005, "Alcohol abuse", (), (404684003,)),
    (7200002, "Alcoholism", ("alcohol dependence",), (404684003,)),
    (1000301, "Binge drinking", (), (15167005,)),
    (387458008, "Aspirin", ("acetylsalicylic acid", "ASA"), (105590001,)),
    (1000401, "Enteric coated aspirin", (), (387458008,)),
    (15373003, "Creatinine", (), (105590001,)),
    (113075003, "Serum creatinine measurement", ("serum creatinine",), (71388002,)),
    (63718003, "Folic acid", ("folate",), (105590001,)),
    (5540006, "Calcium", (), (105590001,)),
    (1000603, "Calcium carbonate", (), (5540006,)),
    (72717003, "Magnesium", (), (105590001,)),
    (1000604, "Magnesium oxide", (), (72717003,)),
    (3829006, "Iron", (), (105590001,)),
    (1000602, "Ferrous sulfate", (), (3829006,)),
    (1000605, "Fish oil", (), (105590001,)),
    (26416006, "Drug abuse", (), (404684003,)),
    (1000701, "Cocaine abuse", (), (26416006,)),
    (66214007, "Substance abuse", (), (404684003,)),
    (1000702, "Heroin dependence", (), (66214007,)),
    (315594003, "Interpreter needed", ("needs interpreter", "requires interpreter"), (404684003,)),
    (1000801, "Speaks only Spanish", ("spanish speaking only",), (315594003,)),
    (43396009, "Hemoglobin A1c measurement", ("hemoglobin A1c", "HbA1c", "glycated hemoglobin"), (71388002,)),
    (420422005, "Diabetic ketoacidosis", ("ketoacidosis",), (404684003,)),
    (1001001, "Euglycemic diabetic ketoacidosis", (), (420422005,)),
    (81723002, "Amputation", (), (71388002,)),
    (1001101, "Below knee amputation", (), (81723002,)),
    (4855003, "Diabetic retinopathy", (), (404684003,)),
    (1001102, "Proliferative diabetic retinopathy", (), (4855003,)),
    (127013003, "Diabetic renal disease", ("diabetic nephropathy",), (404684003,)),
    (230572002, "Diabetic neuropathy", (), (404684003,)),
    (52448006, "Dementia", (), (404684003,)),
    (1001201, "Alzheimer's dementia", (), (52448006,)),
    (386806002, "Impaired cognition", ("cognitive impairment",), (404684003,)),
]


@dataclass(frozen=True)
class Plants:
    evidence: tuple[str, ...]
    distractors: tuple[str, ...]
    keywords: tuple[str, ...]


PLANTS = {
    "ABDOMINAL": Plants(
        ("Status post hysterectomy in 2065.", "History of colectomy for diverticulitis.",
         "Admitted with small bowel obstruction, managed conservatively."),
        ("Knee surgery planned by orthopedics.", "Dental surgery scheduled next month."),
        ("surgery", "hysterectomy", "colectomy", "obstruction"),
    ),
    "ADVANCED-CAD": Plants(
        ("Currently experiencing angina with exertion. Nuclear stress test showed myocardial ischemia.",
         "Unstable angina last winter. Known coronary artery disease on two agents."),
        ("Family history of CAD in father.", "Cardiology referral to rule out CAD."),
        ("angina", "ischemia", "CAD"),
    ),
    "ALCOHOL-ABUSE": Plants(
        ("Ongoing alcohol abuse, drinks a fifth of vodka daily.",
         "Known alcoholism with recent binge drinking."),
        ("Drinks alcohol socially on weekends.",
         "Occasional glass of wine with dinner, alcohol intake is modest."),
        ("alcohol", "alcoholism", "drinking", "drinks"),
    ),
    "ASP-FOR-MI": Plants(
        ("Continues aspirin 81 mg daily as antiplatelet therapy.",
         "Takes enteric coated aspirin daily as antiplatelet prophylaxis."),
        ("Antiplatelet therapy was discussed but not started.",),
        ("antiplatelet",),
    ),
    "CREATININE": Plants(
        ("Serum creatinine 2.1 today, up from baseline.", "Creatinine 1.9 on repeat labs."),
        ("Renal ultrasound was unremarkable.", "Renal diet reviewed with nutrition."),
        ("creatinine", "renal"),
    ),
    "DIETSUPP-2MOS": Plants(
        ("Taking ferrous sulfate 325 mg daily.", "Started calcium carbonate with meals.",
         "Continues folic acid supplementation.", "Magnesium oxide 400 mg nightly."),
        ("Asked about supplements at the pharmacy.",),
        ("ferrous", "calcium", "folic", "magnesium", "supplements"),
    ),
    "DRUG-ABUSE": Plants(
        ("History of cocaine abuse, last used years ago.", "Remote heroin dependence, now in recovery."),
        ("Drug allergies: none known.",),
        ("cocaine", "heroin", "drug"),
    ),
    "ENGLISH": Plants(
        ("Speaks only Spanish, interpreter needed for the visit.",),
        ("Husband is fluent in Spanish as well as English.", "Interpreter services offered and declined."),
        ("spanish", "interpreter"),
    ),
    "HBA1C": Plants(
        ("HbA1c 7.8% last month.", "Hemoglobin A1c was 8.2 in the spring."),
        ("A1c goal discussed with the patient.",),
        ("hba1c", "a1c"),
    ),
    "KETO-1YR": Plants(
        ("Admitted for diabetic ketoacidosis requiring an insulin drip.",),
        ("Urine ketones negative.",),
        ("ketoacidosis", "ketones"),
    ),
    "MAJOR-DIABETES": Plants(
        ("Proliferative diabetic retinopathy s/p laser.", "Status post below knee amputation.",
         "Known diabetic neuropathy of both feet."),
        ("Annual retinopathy screening recommended.",),
        ("retinopathy", "amputation", "neuropathy", "nephropathy"),
    ),
    "MAKES-DECISIONS": Plants(
        ("Advanced dementia, daughter is health care proxy.",
         "Cognitive impairment limits medical decision making."),
        ("Health care proxy form on file.",),
        ("dementia", "cognitive", "proxy"),
    ),
    "MI-6MOS": Plants(
        ("Presented with acute myocardial infarction and was stented.",),
        ("Father died of a heart attack.",),
        ("infarction", "heart attack"),
    ),
}

FILLER = (
    "Patient seen today for routine follow up.",
    "Vital signs reviewed and stable.",
    "Lungs are clear to auscultation bilaterally.",
    "Heart has a regular rate and rhythm.",
    "Abdomen soft and nontender.",
    "Blood pressure 132/78, pulse 72.",
    "Will return to clinic in three months.",
    "Patient reports feeling well overall.",
    "Sleep and appetite are unchanged.",
    "Exercises by walking most mornings.",
    "Weight is stable compared with the last visit.",
    "Flu vaccine given today.",
    "Lives with spouse and two children.",
    "Works as a school teacher.",
    "Skin is warm and dry.",
    "Extremities without edema.",
    "Reviewed medication list with the patient.",
    "Discussed diet and exercise goals.",
    "Eye exam scheduled with ophthalmology.",
)

NEGATIVE_CRITERIA = ("ENGLISH", "MAKES-DECISIONS")
SEPARATOR = "*" * 100
STALE_GAP_DAYS = 400


def toy_graph() -> ConceptGraph:
    return ConceptGraph.from_concepts(Concept(*row) for row in TOY_CONCEPTS)


def gold_label(criterion: str, state: str) -> Label:
    present = state == "evidence"
    if criterion in NEGATIVE_CRITERIA:
        return Label.NOT_MET if present else Label.MET
    return Label.MET if present else Label.NOT_MET


@dataclass
class GeneratedPatient:
    patient_id: str
    text: str
    gold: dict[str, Label]
    dates: list[dt.date]
    plants: list[dict]


def generate_patient(patient_id: str, rng: random.Random) -> GeneratedPatient:
    n_notes = rng.randint(3, 5)
    last = dt.date(2085, 1, 1) + dt.timedelta(days=rng.randint(0, 12 * 365))
    first_gap = rng.randint(STALE_GAP_DAYS + 50, 900)
    middle = sorted(rng.sample(range(1, first_gap), n_notes - 2), reverse=True)
    dates = [last - dt.timedelta(days=g) for g in [first_gap, *middle, 0]]

    bodies = [[rng.choice(FILLER) for _ in range(rng.randint(3, 6))] for _ in range(n_notes)]
    gold: dict[str, Label] = {}
    plants: list[dict] = []
    for crit in CRITERION_IDS:
        p = PLANTS[crit]
        if crit in TEMPORAL_WINDOWS:
            state = rng.choices(("evidence", "stale", "none"), (0.35, 0.3, 0.35))[0]
        else:
            state = rng.choices(("evidence", "none"), (0.45, 0.55))[0]
        if state != "none":
            note = n_notes - 1 if state == "evidence" else 0
            sentence = rng.choice(p.evidence)
            bodies[note].insert(rng.randint(0, len(bodies[note])), sentence)
            plants.append({"criterion": crit, "kind": state, "note_index": note, "sentence": sentence})
        if rng.random() < 0.5:
            note = rng.randrange(n_notes)
            sentence = rng.choice(p.distractors)
            bodies[note].insert(rng.randint(0, len(bodies[note])), sentence)
            plants.append({"criterion": crit, "kind": "distractor", "note_index": note, "sentence": sentence})
        gold[crit] = gold_label(crit, state)

    parts = []
    for date, body in zip(dates, bodies):
        cut = max(1, len(body) // 2)
        paragraphs = [" ".join(body[:cut]), " ".join(body[cut:])]
        parts.append(f"Record date: {date.isoformat()}\n\n" + "\n\n".join(x for x in paragraphs if x) + "\n")
    text = "\n\n\n" + f"\n{SEPARATOR}\n\n".join(parts)
    return GeneratedPatient(patient_id, text, gold, dates, plants)


def mock_script(keywords: bool = True) -> dict:
    if not keywords:
        return {"model_name": "mock", "default": "No."}
    return {
        "model_name": "mock",
        "default": "No.",
        "keywords": {c: list(PLANTS[c].keywords) for c in CRITERION_IDS},
    }


def generate(out_dir, n_patients: int = 12, seed: int = 0, split: str = "test") -> dict:
    """Write a synthetic corpus, toy ontology, mock scripts and a run config."""
    out = Path(out_dir)
    (out / split).mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    manifest: dict = {"seed": seed, "split": split, "patients": {}}
    width = max(3, len(str(n_patients)))
    for i in range(1, n_patients + 1):
        pid = f"P{i:0{width}d}"
        p = generate_patient(pid, rng)
        (out / split / f"{pid}.xml").write_text(to_xml(p.text, p.gold), encoding="utf-8")
        manifest["patients"][pid] = {
            "dates": [d.isoformat() for d in p.dates],
            "current": p.dates[-1].isoformat(),
            "gold": {c: p.gold[c].value for c in CRITERION_IDS},
            "plants": p.plants,
        }
    write_simple(toy_graph(), out / "ontology.tsv")
    _dump(out / "manifest.json", manifest)
    _dump(out / "mock_keywords.json", mock_script(True))
    _dump(out / "mock_all_no.json", mock_script(False))
    _dump(
        out / "config.json",
        {
            "data_dir": ".",
            "split": split,
            "ontology_format": "simple",
            "ontology_paths": ["ontology.tsv"],
            "run_dir": "runs/summarize",
            "scenario": "summarize",
            "backend": "mock",
            "mock_script": "mock_keywords.json",
        },
    )
    return manifest


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
