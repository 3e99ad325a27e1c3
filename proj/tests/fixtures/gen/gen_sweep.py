"""Sweep fixture with a planted optimum at n = 11.

Every hint has k valid non-answer candidates among generated positions
0..9 and the answer is never generated, so at n = 11 HICOS is (11 - k)/11.
Human convergence ratings are linear in k, which makes r exactly 1 there.
Positions past 9 carry random verdicts, and smaller n truncate the valid
set, so every other n correlates less. The oracle curve is written
alongside for the test to compare against.
"""
import csv
import os
import random
import sys

import numpy as np

sys.path.insert(0, os.path.dirname(__file__))
from thgfix import CANDIDATE_PROMPT, JUDGE_PROMPT, Fixture, fill, write_jsonl  # noqa: E402

OUT = os.path.join(os.path.dirname(__file__), "..", "sweep")
N_QUESTIONS = 8
HINTS = 5
GENERATE_MAX = 20


def hicos(flags, ea):
    n = len(flags)
    if not ea:
        return 0.0
    return (n - sum(flags) + 1) / n


def candidate_list(gen, answer, n):
    out = gen[:n]
    if answer in out:
        return out
    if len(out) == n:
        out = out[:-1]
    return out + [answer]


def build(seed):
    rng = random.Random(seed)
    questions = []
    for q in range(N_QUESTIONS):
        answer = "Answer%02d" % q
        gen = ["Option%02d%02d" % (q, i) for i in range(GENERATE_MAX)]
        hints = []
        for h in range(HINTS):
            k = rng.randint(0, 8)
            valid = set(rng.sample(range(10), k))
            tail = {i for i in range(10, GENERATE_MAX) if rng.random() < 0.5}
            verdict = {gen[i]: (i in valid or i in tail) for i in range(GENERATE_MAX)}
            verdict[answer] = True
            hints.append({"text": "Clue %d about puzzle %d." % (h, q), "k": k, "verdict": verdict})
        questions.append({"q_id": "s%02d" % q, "question": "Which planted answer belongs to puzzle number %d?" % q,
                          "answer": answer, "gen": gen, "hints": hints})
    return questions


def curve(questions):
    out = []
    for n in range(1, 21):
        metric, human = [], []
        for q in questions:
            cands = candidate_list(q["gen"], q["answer"], n)
            ea = cands.index(q["answer"])
            for h in q["hints"]:
                flags = [h["verdict"][c] for c in cands]
                metric.append(hicos(flags, flags[ea]))
                human.append((5 - h["k"] / 2 - 1) / 4)
        if np.std(metric) == 0 or np.std(human) == 0:
            out.append((n, None, len(metric)))
        else:
            out.append((n, float(np.corrcoef(metric, human)[0, 1]), len(metric)))
    return out


def main():
    for seed in range(1000):
        qs = build(seed)
        c = curve(qs)
        rs = [(r, n) for n, r, _ in c if r is not None]
        best = max(rs)
        second = sorted(rs)[-2]
        if best[1] == 11 and best[0] - second[0] > 0.03:
            break
    else:
        raise SystemExit("no seed plants the optimum")

    fx = Fixture()
    records, ratings = [], []
    for q in qs:
        fx.chat(fill(CANDIDATE_PROMPT, N=GENERATE_MAX, QUESTION=q["question"]),
                "\n".join("- " + g for g in q["gen"]))
        rec = {"Q_ID": q["q_id"], "Question": q["question"], "ExactAnswer": q["answer"], "Hints": []}
        for hi, h in enumerate(q["hints"]):
            rec["Hints"].append({"Hint": h["text"]})
            for cand, v in h["verdict"].items():
                fx.chat(fill(JUDGE_PROMPT, HINT=h["text"], CANDIDATE=cand), "Yes" if v else "No")
            total = 20 - 2 * h["k"]  # four annotators, mean 5 - k/2
            base, extra = divmod(total, 4)
            for a in range(4):
                ratings.append({"annotator_id": "a%d" % a, "q_id": q["q_id"], "hint_idx": hi,
                                "attribute": "convergence", "value": base + (1 if a < extra else 0)})
        records.append(rec)

    os.makedirs(OUT, exist_ok=True)
    write_jsonl(os.path.join(OUT, "dataset.jsonl"), records)
    write_jsonl(os.path.join(OUT, "ratings.jsonl"), ratings)
    fx.write(os.path.join(OUT, "replay.jsonl"))
    with open(os.path.join(OUT, "expected_curve.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["n", "pearson_r", "n_samples"])
        for n, r, m in c:
            w.writerow([n, "" if r is None else repr(r), m])
    print("seed", seed, "best", best, "runner-up", second)


if __name__ == "__main__":
    main()
