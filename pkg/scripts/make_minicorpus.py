"""Regenerate the bundled mini-corpus under src/cdsbench/data/minicorpus/.

Deterministic: running it twice produces identical files.
"""

import random
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "cdsbench" / "data" / "minicorpus"
SEED = 20160328

THEMES = {
    "sepsis": {
        "core": ["sepsis", "septic shock", "bacteremia"],
        "syn": ["blood infection", "systemic infection"],
        "signs": ["fever", "hypotension", "tachycardia", "elevated lactate", "altered mental status"],
        "care": ["broad-spectrum antibiotics", "fluid resuscitation", "vasopressors", "blood cultures"],
        "mesh": ["Sepsis", "Shock, Septic", "Bacteremia"],
    },
    "mi": {
        "core": ["myocardial infarction", "acute coronary syndrome"],
        "syn": ["heart attack", "cardiac infarct"],
        "signs": ["chest pain", "diaphoresis", "st elevation", "elevated troponin", "dyspnea"],
        "care": ["percutaneous coronary intervention", "aspirin", "heparin", "coronary angiography"],
        "mesh": ["Myocardial Infarction", "Acute Coronary Syndrome"],
    },
    "pneumonia": {
        "core": ["pneumonia", "lower respiratory infection"],
        "syn": ["lung infection", "pulmonary infiltrate"],
        "signs": ["productive cough", "fever", "crackles", "hypoxemia", "pleuritic pain"],
        "care": ["chest radiograph", "macrolide therapy", "oxygen therapy", "sputum culture"],
        "mesh": ["Pneumonia", "Respiratory Tract Infections"],
    },
    "stroke": {
        "core": ["ischemic stroke", "cerebral infarction"],
        "syn": ["brain attack", "cerebrovascular accident"],
        "signs": ["hemiparesis", "aphasia", "facial droop", "visual field loss", "dysarthria"],
        "care": ["thrombolysis", "computed tomography", "thrombectomy", "antiplatelet therapy"],
        "mesh": ["Stroke", "Brain Ischemia"],
    },
    "dka": {
        "core": ["diabetic ketoacidosis", "hyperglycemia"],
        "syn": ["ketotic crisis", "diabetic coma"],
        "signs": ["polyuria", "vomiting", "kussmaul breathing", "abdominal pain", "dehydration"],
        "care": ["insulin infusion", "potassium replacement", "anion gap", "serum ketones"],
        "mesh": ["Diabetic Ketoacidosis", "Diabetes Mellitus, Type 1"],
    },
    "pe": {
        "core": ["pulmonary embolism", "venous thromboembolism"],
        "syn": ["lung clot", "embolic event"],
        "signs": ["pleuritic chest pain", "tachypnea", "hemoptysis", "leg swelling", "syncope"],
        "care": ["ct pulmonary angiography", "anticoagulation", "d-dimer", "thrombolytic therapy"],
        "mesh": ["Pulmonary Embolism", "Venous Thromboembolism"],
    },
    "appendicitis": {
        "core": ["appendicitis", "appendiceal inflammation"],
        "syn": ["inflamed appendix", "appendix infection"],
        "signs": ["right lower quadrant pain", "anorexia", "rebound tenderness", "leukocytosis", "nausea"],
        "care": ["appendectomy", "abdominal ultrasound", "laparoscopy", "perioperative antibiotics"],
        "mesh": ["Appendicitis", "Appendectomy"],
    },
    "meningitis": {
        "core": ["bacterial meningitis", "meningeal infection"],
        "syn": ["brain membrane infection", "meningoencephalitis"],
        "signs": ["neck stiffness", "headache", "photophobia", "petechial rash", "confusion"],
        "care": ["lumbar puncture", "ceftriaxone", "dexamethasone", "cerebrospinal fluid analysis"],
        "mesh": ["Meningitis, Bacterial", "Cerebrospinal Fluid"],
    },
}

FILLER = [
    "We report a retrospective cohort of {n} patients admitted to a tertiary center.",
    "Outcomes were compared across age groups and sexes.",
    "Mortality at thirty days was the primary endpoint.",
    "Secondary endpoints included length of stay and readmission.",
    "Multivariable regression adjusted for comorbidities.",
    "The study was approved by the institutional review board.",
    "Limitations include the single-center design and modest sample size.",
    "Further prospective trials are warranted.",
    "Data were extracted from electronic health records.",
    "Patients were followed for a median of {n} months.",
]

TITLE_TEMPLATES = [
    "{core} in adults: a {design}",
    "Management of {core} with {care}",
    "{signs} as an early marker of {core}",
    "Outcomes after {care} for {syn}",
    "A {design} of {syn} presenting with {signs}",
    "Diagnostic value of {care} in suspected {core}",
]
DESIGNS = ["retrospective cohort", "case series", "randomized trial", "systematic review", "case report"]

SENTENCES = [
    "Patients with {core} frequently presented with {signs} and {signs2}.",
    "{care} was associated with improved survival in {core}.",
    "Early recognition of {syn} reduced complications.",
    "The incidence of {core} increased with age.",
    "{signs} preceded the diagnosis of {syn} in most cases.",
    "Clinicians should consider {care} when {signs} is present.",
    "Delayed {care} worsened outcomes in {core}.",
    "Among those with {syn}, {signs} predicted intensive care admission.",
]

# (topic id, theme, type, note, desc, summary)
TOPICS = [
    (1, "sepsis", "treatment",
     "78 y/o F w/ fever, hypotension and tachycardia. Lactate 4.1. No chest pain. Blood cultures pending.",
     "A 78-year-old woman with fever, low blood pressure and a fast heart rate. Lactate is elevated. "
     "She denies chest pain.",
     "78 y/o F with fever, hypotension, tachycardia and elevated lactate; suspected sepsis."),
    (2, "mi", "diagnosis",
     "56 yo M c/o substernal chest pain radiating to L arm, diaphoretic. Denies fever. Trop pending.",
     "A 56-year-old man with chest pain spreading to the left arm and sweating. He denies fever.",
     "56 yo M with chest pain, diaphoresis and st elevation."),
    (3, "stroke", "test",
     "81 y/o m found w/ R facial droop, aphasia. LKW 2h. No headache. No trauma.",
     "An 81-year-old man with facial droop on the right and trouble speaking for two hours. "
     "No headache and no trauma.",
     "81 y/o m with facial droop, aphasia and hemiparesis."),
    (4, "dka", "treatment",
     "19 yo F T1DM w/ vomiting, abd pain, Kussmaul breathing. Glucose 540. Not pregnant.",
     "A 19-year-old woman with type 1 diabetes who has vomiting, abdominal pain and deep rapid "
     "breathing. Her blood sugar is very high. She is not pregnant.",
     "19 yo F with vomiting, abdominal pain, kussmaul breathing and hyperglycemia."),
    (5, "meningitis", "diagnosis",
     "22 y/o m with headache, neck stiffness, photophobia, petechial rash. Free of recent travel.",
     "A 22-year-old man with headache, stiff neck, sensitivity to light and a rash. No recent travel.",
     "22 y/o m with headache, neck stiffness, photophobia and petechial rash."),
]

TRAIN_TOPICS = [
    (101, "pneumonia", "diagnosis",
     "67 y/o M productive cough, fever, crackles R base. SpO2 88%.",
     "A 67-year-old man with a wet cough, fever and crackles in the right lung.",
     "67 y/o M with productive cough, fever, crackles and hypoxemia."),
    (102, "pe", "test",
     "45 yo F post-op day 3 w/ pleuritic chest pain, tachypnea, L leg swelling.",
     "A 45-year-old woman three days after surgery with chest pain on breathing and a swollen left leg.",
     "45 yo F with pleuritic chest pain, tachypnea and leg swelling."),
    (103, "appendicitis", "treatment",
     "12 y/o m RLQ pain, anorexia, rebound tenderness, WBC 15.",
     "A 12-year-old boy with right lower abdominal pain, no appetite and rebound tenderness.",
     "12 y/o m with right lower quadrant pain, anorexia and rebound tenderness."),
    (104, "sepsis", "diagnosis",
     "70 yo M with fever, confusion, hypotension after UTI.",
     "A 70-year-old man with fever, confusion and low blood pressure after a urinary infection.",
     "70 yo M with fever, altered mental status and hypotension; bacteremia suspected."),
    (105, "mi", "test",
     "63 y/o F with dyspnea, diaphoresis, elevated troponin.",
     "A 63-year-old woman with shortness of breath, sweating and a raised troponin.",
     "63 y/o F with dyspnea, diaphoresis and elevated troponin."),
]

LEXICON = [
    ("sepsis", "C0243026", "Disease or Syndrome", "sepsis"),
    ("septic shock", "C0036983", "Disease or Syndrome", "septic shock"),
    ("bacteremia", "C0004610", "Disease or Syndrome", "bacteremia"),
    ("myocardial infarction", "C0027051", "Disease or Syndrome", "myocardial infarction"),
    ("acute myocardial infarction", "C0155626", "Disease or Syndrome", "acute myocardial infarction"),
    ("heart attack", "C0027051", "Disease or Syndrome", "myocardial infarction"),
    ("chest pain", "C0008031", "Sign or Symptom", "chest pain"),
    ("fever", "C0015967", "Sign or Symptom", "fever"),
    ("hypotension", "C0020649", "Finding", "hypotension"),
    ("pneumonia", "C0032285", "Disease or Syndrome", "pneumonia"),
    ("ischemic stroke", "C0948008", "Disease or Syndrome", "ischemic stroke"),
    ("facial droop", "C0427055", "Sign or Symptom", "facial paresis"),
    ("aphasia", "C0003537", "Sign or Symptom", "aphasia"),
    ("diabetic ketoacidosis", "C0011880", "Disease or Syndrome", "diabetic ketoacidosis"),
    ("hyperglycemia", "C0020456", "Disease or Syndrome", "hyperglycemia"),
    ("kussmaul breathing", "C0232318", "Sign or Symptom", "kussmaul respiration"),
    ("pulmonary embolism", "C0034065", "Disease or Syndrome", "pulmonary embolism"),
    ("appendicitis", "C0003615", "Disease or Syndrome", "appendicitis"),
    ("bacterial meningitis", "C0085437", "Disease or Syndrome", "bacterial meningitis"),
    ("neck stiffness", "C0151315", "Sign or Symptom", "neck stiffness"),
    ("photophobia", "C0085636", "Sign or Symptom", "photophobia"),
    ("headache", "C0018681", "Sign or Symptom", "headache"),
    ("lumbar puncture", "C0553794", "Diagnostic Procedure", "lumbar puncture"),
    ("insulin infusion", "C0412767", "Therapeutic or Preventive Procedure", "insulin infusion"),
    ("aspirin", "C0004057", "Pharmacologic Substance", "aspirin"),
    ("ceftriaxone", "C0007561", "Pharmacologic Substance", "ceftriaxone"),
    ("troponin", "C0041199", "Laboratory Procedure", "troponin measurement"),
    ("lactate", "C0376261", "Laboratory Procedure", "lactate measurement"),
    ("boston", "C0006044", "Geographic Area", "boston"),
    ("blood cultures", "C0200949", "Laboratory Procedure", "blood culture"),
]

EMBED_DIM = 16


def _theme_words(theme):
    t = THEMES[theme]
    words = set()
    for key in ("core", "syn", "signs", "care"):
        for phrase in t[key]:
            words.update(w for w in phrase.replace("-", " ").split())
    return words


def make_docs(rng):
    docs = []
    keywords = {}
    themes = list(THEMES)
    doc_theme = {}
    for i in range(100):
        theme = themes[i % len(themes)]
        t = THEMES[theme]
        doc_id = f"PMC{1000 + i}"
        # Every third round of themes talks only in synonyms, so lexical matching misses it.
        syn_only = (i // len(themes)) % 3 == 2
        core_pool = t["syn"] if syn_only else t["core"]
        fill = {
            "core": rng.choice(core_pool),
            "syn": rng.choice(t["syn"]),
            "signs": rng.choice(t["signs"]),
            "care": rng.choice(t["care"]),
            "design": rng.choice(DESIGNS),
        }
        title = rng.choice(TITLE_TEMPLATES).format(**fill)
        title = title[0].upper() + title[1:]
        abstract = " ".join(
            rng.choice(SENTENCES).format(
                core=rng.choice(core_pool), syn=rng.choice(t["syn"]), signs=rng.choice(t["signs"]),
                signs2=rng.choice(t["signs"]), care=rng.choice(t["care"]),
            ).capitalize()
            for _ in range(3)
        )
        body_sents = []
        for _ in range(rng.randint(5, 9)):
            if rng.random() < 0.6:
                s = rng.choice(SENTENCES).format(
                    core=rng.choice(core_pool), syn=rng.choice(t["syn"]), signs=rng.choice(t["signs"]),
                    signs2=rng.choice(t["signs"]), care=rng.choice(t["care"]),
                )
            else:
                s = rng.choice(FILLER).format(n=rng.randint(12, 400))
            body_sents.append(s[0].upper() + s[1:])
        if rng.random() < 0.3:
            other = THEMES[rng.choice([x for x in themes if x != theme])]
            body_sents.append(f"Differential diagnosis included {rng.choice(other['core'])}.")
        if i % 10 == 0:
            body_sents.append("Naïve patients from São Paulo were also included.")
        body = " ".join(body_sents[: len(body_sents) // 2]) + "\n" + " ".join(body_sents[len(body_sents) // 2 :])
        docs.append((doc_id, title, abstract, body))
        doc_theme[doc_id] = theme
        if i % 5 != 4:
            keywords[doc_id] = rng.sample(t["mesh"], k=min(2, len(t["mesh"])))
    return docs, keywords, doc_theme


def doc_text(docs):
    out = []
    for doc_id, title, abstract, body in docs:
        out.append(f"#id: {doc_id}\n#title: {title}\n#abstract: {abstract}\n#body: {body}\n")
    return "---\n".join(out)


def topic_text(topics):
    out = []
    for tid, _theme, ttype, note, desc, summ in topics:
        out.append(f"#topic: {tid}\n#type: {ttype}\n#note: {note}\n#desc: {desc}\n#summary: {summ}\n")
    return "---\n".join(out)


def make_qrels(rng, topics, docs, doc_theme, sampled):
    """Pool = theme docs + a handful of others; stratum 1 fully judged, stratum 2 sampled at 50%."""
    q_lines = []
    s_lines = []
    full_lines = []
    for tid, theme, *_ in topics:
        core = THEMES[theme]["core"]
        on_theme = [d for d, *_ in docs if doc_theme[d] == theme]
        off_theme = rng.sample([d for d, *_ in docs if doc_theme[d] != theme], 12)
        grades = {}
        titles = {d: t.lower() for d, t, *_ in docs}
        for d in on_theme:
            grades[d] = 2 if any(c in titles[d] for c in core) else 1
        # A few on-theme documents judged nonrelevant keep the task from being trivial.
        for d in on_theme[::5]:
            grades[d] = 0
        for d in off_theme:
            grades[d] = 0
        pool = sorted(grades)
        rng.shuffle(pool)
        half = len(pool) // 2
        strata = [("1", pool[:half], 1.0), ("2", pool[half:], 0.5 if sampled else 1.0)]
        for sid, members, rate in strata:
            members = sorted(members)
            n_judge = max(1, int(round(rate * len(members))))
            judged = set(rng.sample(members, n_judge))
            if sampled and not any(grades[d] >= 1 for d in judged):
                rel = [d for d in members if grades[d] >= 1]
                if rel:
                    judged.pop()
                    judged.add(rel[0])
            s_lines.append(f"{tid} {sid} {len(members)}\n")
            for d in members:
                g = grades[d] if d in judged else -1
                q_lines.append(f"{tid} {sid} {d} {g}\n")
        for d in sorted(grades):
            full_lines.append(f"{tid} 0 {d} {grades[d]}\n")
    return "".join(q_lines), "".join(s_lines), "".join(full_lines)


def make_embeddings(rng):
    np_rng = np.random.default_rng(SEED)
    centers = {theme: np_rng.normal(size=EMBED_DIM) for theme in THEMES}
    vocab = {}
    for theme in THEMES:
        for w in sorted(_theme_words(theme)):
            vec = centers[theme] + 0.35 * np_rng.normal(size=EMBED_DIM)
            vocab.setdefault(w, vec)
    generic = ["patient", "patients", "study", "cohort", "outcome", "outcomes", "man", "woman", "male",
               "female", "elderly", "adult", "child", "infant", "adolescent", "therapy", "treatment"]
    for w in generic:
        vocab.setdefault(w, np_rng.normal(size=EMBED_DIM))
    lines = []
    for w in sorted(vocab):
        lines.append(w + " " + " ".join(f"{x:.6f}" for x in vocab[w]) + "\n")
    return "".join(lines)


CONFIGS = {
    "baseline.cfg": """\
# Baseline: BM25 over the concatenated text, no query processing.
corpus = docs.txt
topics = topics.txt
keywords = keywords.tsv
lexicon = lexicon.txt
embeddings = embeddings.txt
qrels = qrels.txt
strata = strata.txt
index = minicorpus.idx
field = sum
run_tag = baseline
""",
    "pipeline.cfg": """\
# Demographic normalization, negation removal, then pseudo-relevance feedback.
corpus = docs.txt
topics = topics.txt
keywords = keywords.tsv
lexicon = lexicon.txt
qrels = qrels.txt
strata = strata.txt
index = minicorpus.idx
field = sum
run_tag = demo_neg_prf

[stage:demographics]

[stage:negation]

[stage:prf]
feedback_docs = 10
expansion_terms = 10
""",
    "prf_zero.cfg": """\
# PRF with zero expansion weight: must reproduce the baseline run exactly.
corpus = docs.txt
topics = topics.txt
keywords = keywords.tsv
lexicon = lexicon.txt
index = minicorpus.idx
field = sum
run_tag = baseline

[stage:prf]
weight = 0.0
""",
    "ltr.cfg": """\
# Prior-year training data for the re-ranker, then PRF + concepts + LTR.
corpus = docs.txt
topics = topics.txt
keywords = keywords.tsv
lexicon = lexicon.txt
embeddings = embeddings.txt
qrels = qrels.txt
strata = strata.txt
index = minicorpus.idx
train_topics = train_topics.txt
train_qrels = train_qrels.txt
field = sum
run_tag = prf_concepts_ltr

[stage:prf]

[stage:concepts]

[stage:ltr]
model = ltr_model.txt
""",
}


def main():
    rng = random.Random(SEED)
    OUT.mkdir(parents=True, exist_ok=True)
    docs, keywords, doc_theme = make_docs(rng)
    (OUT / "docs.txt").write_text(doc_text(docs), encoding="utf-8")
    (OUT / "keywords.tsv").write_text(
        "".join(f"{d}\t{', '.join(kw)}\n" for d, kw in sorted(keywords.items())), encoding="utf-8"
    )
    (OUT / "topics.txt").write_text(topic_text(TOPICS), encoding="utf-8")
    (OUT / "train_topics.txt").write_text(topic_text(TRAIN_TOPICS), encoding="utf-8")
    q, s, full = make_qrels(rng, TOPICS, docs, doc_theme, sampled=True)
    (OUT / "qrels.txt").write_text(q, encoding="utf-8")
    (OUT / "strata.txt").write_text(s, encoding="utf-8")
    (OUT / "qrels_full.txt").write_text(full, encoding="utf-8")
    _, _, train_full = make_qrels(rng, TRAIN_TOPICS, docs, doc_theme, sampled=False)
    (OUT / "train_qrels.txt").write_text(train_full, encoding="utf-8")
    (OUT / "lexicon.txt").write_text("".join("|".join(e) + "\n" for e in LEXICON), encoding="utf-8")
    (OUT / "embeddings.txt").write_text(make_embeddings(rng), encoding="utf-8")
    for name, text in CONFIGS.items():
        (OUT / name).write_text(text, encoding="utf-8")
    print(f"wrote mini-corpus to {OUT}")


if __name__ == "__main__":
    main()
