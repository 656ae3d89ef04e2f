"""Direct-formula BM25 and RM3 values on small hand-written corpora.

Tokenization is lowercase alphanumeric runs with no stopwords or stemming,
so the numbers depend only on the formulas. Prints Rust-ready constants.

    python3 tests/oracles/toy_oracle.py
"""
import math
import re

K1, B = 0.9, 0.4

TEN = [
    "heart attack risk in adults",
    "aspirin lowers heart attack risk",
    "aspirin dose and bleeding",
    "stroke risk after heart surgery heart failure",
    "lung cancer screening",
    "screening for lung cancer with low dose ct",
    "children with asthma",
    "asthma and lung function in children children",
    "risk risk risk",
    "aspirin aspirin heart",
]
QUERIES = [
    [("heart", 1.0), ("attack", 1.0)],
    [("aspirin", 2.0), ("risk", 0.5)],
    [("lung", 1.0), ("cancer", 1.0), ("screening", 1.0), ("lung", 1.0)],
    [("children", 0.25), ("asthma", 1.5), ("unseen", 3.0)],
    [("dose", 1.0), ("heart", 0.75), ("risk", 1.25), ("stroke", 1.0)],
]

FOUR = [
    "heart attack heart aspirin",
    "heart stroke risk",
    "lung cancer risk smoking",
    "aspirin dose",
]
RM3_QUERY = [("heart", 1.0), ("aspirin", 1.0), ("heart", 0.5)]
FB_DOCS, FB_TERMS, ALPHA = 3, 4, 0.5


def toks(s):
    return re.findall(r"[a-z0-9]+", s.lower())


def stats(docs):
    tfs = []
    for d in docs:
        tf = {}
        for w in toks(d):
            tf[w] = tf.get(w, 0) + 1
        tfs.append(tf)
    lens = [len(toks(d)) for d in docs]
    df = {}
    for tf in tfs:
        for w in tf:
            df[w] = df.get(w, 0) + 1
    return tfs, lens, df


def bm25(query, i, docs):
    tfs, lens, df = stats(docs)
    n, avg = len(docs), sum(lens) / len(docs)
    s = 0.0
    for w, q in query:
        f = tfs[i].get(w, 0)
        if f:
            idf = math.log(1 + (n - df[w] + 0.5) / (df[w] + 0.5))
            s += q * idf * f * (K1 + 1) / (f + K1 * (1 - B + B * lens[i] / avg))
    return s


print("// (query, doc, score)")
print("const BM25_TEN: [(usize, usize, f64); 50] = [")
for qi, q in enumerate(QUERIES):
    for d in range(len(TEN)):
        print(f"    ({qi}, {d}, {bm25(q, d, TEN)!r}),")
print("];")

# RM3 on FOUR: first pass ranks all four, top FB_DOCS feed back.
first = sorted(range(4), key=lambda d: (-bm25(RM3_QUERY, d, FOUR), d + 1))
top = first[:FB_DOCS]
scores = [bm25(RM3_QUERY, d, FOUR) for d in top]
mn = min(scores)
shifted = [s - mn for s in scores]
tot = sum(shifted)
pd = [x / tot for x in shifted] if tot > 0 else [1 / len(top)] * len(top)
tfs, lens, _ = stats(FOUR)
fw = {}
for d, p in zip(top, pd):
    for w, f in tfs[d].items():
        fw[w] = fw.get(w, 0.0) + p * f / lens[d]
fb = sorted((w for w in fw if fw[w] > 0), key=lambda w: (-fw[w], w))[:FB_TERMS]
fbt = sum(fw[w] for w in fb)
agg, order = {}, []
for w, q in RM3_QUERY:
    if w not in agg:
        order.append(w)
        agg[w] = 0.0
    agg[w] += q
ot = sum(agg.values())
out = {w: ALPHA * agg[w] / ot for w in order}
for w in fb:
    out[w] = out.get(w, 0.0) + (1 - ALPHA) * fw[w] / fbt
    if w not in order:
        order.append(w)
print(f"// first pass order {[d + 1 for d in first]}, p(d) {pd}")
print("const RM3_FOUR: [(&str, f64); %d] = [" % len(order))
for w in order:
    print(f"    ({w!r}, {out[w]!r}),".replace("'", '"'))
print("];")
