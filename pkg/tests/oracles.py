"""Independent brute-force oracles. These deliberately share no code with the
package implementations they check."""

import math


def ratcliff_oracle(a: str, b: str) -> float:
    """Gestalt similarity in [0, 100] by explicit recursion over all substrings."""
    if not a and not b:
        return 100.0

    def longest(alo, ahi, blo, bhi):
        # scan every start pair, extend greedily; keep earliest (i, j) on ties
        best = (0, alo, blo)
        for i in range(alo, ahi):
            for j in range(blo, bhi):
                n = 0
                while i + n < ahi and j + n < bhi and a[i + n] == b[j + n]:
                    n += 1
                if n > best[0]:
                    best = (n, i, j)
        return best

    def matches(alo, ahi, blo, bhi):
        n, i, j = longest(alo, ahi, blo, bhi)
        if n == 0:
            return 0
        return n + matches(alo, i, blo, j) + matches(i + n, ahi, j + n, bhi)

    m = matches(0, len(a), 0, len(b))
    return 200.0 * m / (len(a) + len(b))


def bm25_oracle_scores(doc_token_lists, query_tokens, k1, b):
    """Score every document against the distinct query terms, naively."""
    n = len(doc_token_lists)
    avgdl = sum(len(d) for d in doc_token_lists) / n
    scores = []
    for tokens in doc_token_lists:
        dl = len(tokens)
        score = 0.0
        for term in sorted(set(query_tokens)):
            tf = tokens.count(term)
            if tf == 0:
                continue
            df = sum(1 for d in doc_token_lists if term in d)
            idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
            score += idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * dl / avgdl))
        scores.append(score)
    return scores


def bm25_oracle_ranking(doc_ids, doc_token_lists, query_tokens, k1, b, k):
    """Top-k ids/scores with the package's tie-break: score desc, id asc."""
    scores = bm25_oracle_scores(doc_token_lists, query_tokens, k1, b)
    matched = [
        (doc_ids[i], scores[i])
        for i in range(len(doc_ids))
        if any(t in doc_token_lists[i] for t in set(query_tokens))
    ]
    matched.sort(key=lambda pair: (-pair[1], pair[0]))
    return matched[:k]
