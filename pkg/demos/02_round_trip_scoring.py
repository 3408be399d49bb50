"""Score reconstructions of a text against the original.

The round trip text -> logic -> text' earns a high score only when the
reconstruction keeps the original wording (longest common subsequence);
beta shifts the balance between the two directions of the comparison.

Run: python3 demos/02_round_trip_scoring.py
"""

from logictext import ConsistencyConfig, content_score, lcs_length, tokenize

original = "canada obtained 3 gold medals in 2008"
reconstructions = [
    "canada obtained 3 gold medals in 2008",
    "canada obtained 3 gold medals",
    "in 2008 canada obtained 3 gold medals",
    "the gold medals of canada",
    "nothing in common here",
]

print(f"original: {original!r}\n")
for rec in reconstructions:
    lcs = lcs_length(tokenize(original), tokenize(rec))
    score = content_score(original, rec)
    print(f"score={score:.4f}  lcs={lcs}  {rec!r}")

print("\nbeta sweep for a short reconstruction (precision vs recall weighting):")
rec = "canada obtained 3 gold medals"
for beta in (0.25, 0.5, 1.0, 2.0, 4.0):
    score = content_score(original, rec, ConsistencyConfig(beta=beta))
    print(f"beta={beta:<5} score={score:.4f}")
