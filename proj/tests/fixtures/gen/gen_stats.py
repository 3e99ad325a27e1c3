"""Bundled statistics fixture and its golden report, computed here from the
word-count definition (whitespace tokens, a standalone '?' not counted)."""
import json
import os
import random
import sys

sys.path.insert(0, os.path.dirname(__file__))
from thgfix import word_count, write_jsonl  # noqa: E402

OUT = os.path.join(os.path.dirname(__file__), "..", "stats")
WORDS = ["river", "ancient", "famous", "island", "painter", "century", "northern", "capital",
         "empire", "novel", "battle", "coastal", "singer", "temple", "mountain", "harbour"]


def sentence(rng, n, end):
    return " ".join(rng.choice(WORDS).capitalize() if i == 0 else rng.choice(WORDS)
                    for i in range(n)) + end


def main():
    rng = random.Random(1312)
    rows = []
    q_words = h_words = q_ent = h_ent = sources = n_hints = 0
    for i in range(12):
        qn = rng.randint(6, 20)
        q = sentence(rng, qn, " ?" if i % 4 == 0 else "?")
        hints = []
        for _ in range(rng.randint(5, 10)):
            ht = sentence(rng, rng.randint(4, 18), ".")
            words = sorted(set(ht.rstrip(".").split()))
            ents = [{"Surface": w, "Wiki_Title": w.title(), "Raw_Views": None}
                    for w in rng.sample(words, min(len(words), rng.randint(0, 3)))]
            hints.append({"Hint": ht, "Entities": ents, "H_Popularity": [None] * len(ents),
                          "Leak": False, "Question_Similarity": round(rng.uniform(0, 0.7), 4)})
            h_words += word_count(ht)
            h_ent += len(ents)
        n_src = rng.randint(0, 5)
        qpop = [round(rng.random(), 4) for _ in range(rng.randint(0, 3))]
        rows.append({"Q_ID": "st%02d" % i, "Question": q, "ExactAnswer": "Answer %d" % i,
                     "MajorType": "ENTITY", "MinorType": "ENTY:other",
                     "Snippet": "Snippet text.", "Snippet_Sources": ["https://example.org/%d/%d" % (i, s) for s in range(n_src)],
                     "Hints": hints, "Q_Popularity": qpop})
        q_words += word_count(q)
        q_ent += len(qpop)
        sources += n_src
        n_hints += len(hints)
    nq = len(rows)
    golden = {
        "n_questions": nq,
        "n_hints": n_hints,
        "avg_question_len": float(q_words) / nq,
        "avg_hint_len": float(h_words) / n_hints,
        "avg_hints_per_q": float(n_hints) / nq,
        "avg_entities_per_q": float(q_ent) / nq,
        "avg_entities_per_hint": float(h_ent) / n_hints,
        "avg_sources_per_q": float(sources) / nq,
    }
    os.makedirs(OUT, exist_ok=True)
    write_jsonl(os.path.join(OUT, "dataset.jsonl"), rows)
    with open(os.path.join(OUT, "golden.json"), "w") as f:
        json.dump(golden, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
