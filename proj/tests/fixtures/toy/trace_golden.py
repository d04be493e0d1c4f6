# Writes the expected outputs of the toy pipeline. Everything here is traced
# by hand from corpus.jsonl and mock_rules.json; only the ids are computed.
import hashlib
import json
import re

def sha(s):
    return hashlib.sha256(s.encode()).hexdigest()

def passage_id(text):
    return "p_" + sha(re.sub(r"\s+", " ", text.strip()).lower())[:16]

def rubric_id(qid, text):
    return "r_" + sha(qid + "\n" + text)[:16]

# Sentence windows with min 2 / max 3: the five-sentence document splits 3 + 2.
eiffel_a = ("The Eiffel Tower was designed by the engineering firm of Gustave Eiffel. Engineers Maurice Koechlin "
            "and Emile Nouguier drew the first sketches. Architect Stephen Sauvestre refined the iron lattice design.")
eiffel_b = ("Construction of the tower finished in March 1889. It opened as the entrance arch of the Exposition "
            "Universelle world fair.")
docs = {json.loads(l)["doc_id"]: json.loads(l)["text"] for l in open("corpus.jsonl")}
waggle, round_ = docs["waggle"], docs["round"]

# Mining (threshold 0.4): q_tower seeds eiffel_a, whose rewrite reaches eiffel_b.
# q_bees seeds waggle; its first rewrite reaches round, the second is a duplicate.
A, B, W, R = passage_id(eiffel_a), passage_id(eiffel_b), passage_id(waggle), passage_id(round_)

WEIGHT = {"vital": 1.0, "okay": 0.5}
VALUE = {"support": 1.0, "partial_support": 0.5, "not_support": 0.0}

tower = [
    ("The Eiffel Tower was designed by the engineering firm of Gustave Eiffel", "vital", [A, B]),
    ("Maurice Koechlin and Emile Nouguier drew the first sketches of the tower", "vital", [A]),
    ("Stephen Sauvestre refined the iron lattice design", "okay", [A]),
    ("Construction of the Eiffel Tower finished in March 1889", "vital", [B]),
    ("The tower opened for the 1889 world fair", "okay", [B]),
]
bees = [
    ("Honeybee foragers perform a waggle dance inside the hive", "vital", [W]),
    ("The angle of the waggle run encodes the direction of the food source", "vital", [W]),
    ("The duration of the waggle run encodes the distance to the food", "vital", [W]),
    ("Honeybees perform a round dance for food close to the hive", "vital", [R]),
    ("Dancers share floral scent that helps recruits find the food", "okay", [R]),
]
sets = {"q_tower": tower, "q_bees": bees}

def rubric_records(qid):
    return [{"id": rubric_id(qid, t), "text": t, "weight_class": w, "weight": WEIGHT[w], "provenance": p}
            for t, w, p in sets[qid]]

# Labels per answer block, in rubric order.
s, p, n = "support", "partial_support", "not_support"
answers = [
    ("q_tower", "gen_a", [[s, s, n, n, n], [n, n, n, s, p]]),
    ("q_tower", "gen_b", [[n, n, n, p, n]]),
    ("q_bees", "gen_a", [[s, s, s, n, n], [n, n, n, s, n]]),
    ("q_bees", "gen_b", [[n, n, n, n, n]]),
]

order = {"not_support": 0, "partial_support": 1, "support": 2}
judgments, rewards = [], []
for qid, gen, blocks in answers:
    rubrics = rubric_records(qid)
    for b, labels in enumerate(blocks):
        for r, label in zip(rubrics, labels):
            judgments.append({"question_id": qid, "generator": gen, "rubric_id": r["id"], "block_index": b,
                              "label": label})
    pooled = [max((blk[i] for blk in blocks), key=order.get) for i in range(len(rubrics))]
    total = sum(r["weight"] for r in rubrics)
    earned = [r["weight"] * VALUE[l] for r, l in zip(rubrics, pooled)]
    numerator = 0.0
    for e in earned:
        numerator += e
    rewards.append({"question_id": qid, "generator": gen, "value": numerator / total,
                    "per_rubric": [{"rubric_id": r["id"], "label": l, "contribution": e / total}
                                   for r, l, e in zip(rubrics, pooled, earned)]})

def write(path, records):
    with open(path, "w") as f:
        for rec in records:
            rec = dict(rec, schema_version=1)
            f.write(json.dumps(rec, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n")

write("golden/rubrics.jsonl", [{"question_id": q, "rubrics": rubric_records(q)} for q in ("q_tower", "q_bees")])
write("golden/judgments.jsonl", judgments)
write("golden/rewards.jsonl", rewards)
