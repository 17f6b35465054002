import numpy as np


# discounted cumulative gain
def dcg(grades, k):
    """Sum of (2^grade - 1) / log2(rank + 1) over the first k grades"""

    grades = np.asarray(grades, dtype=float)[:k]
    if grades.size == 0:
        return 0.0
    discounts = np.log2(np.arange(2, grades.size + 2))
    return float(np.sum((2.0 ** grades - 1.0) / discounts))


# normalized discounted cumulative gain
def ndcg_at(grades, k):
    """Function takes the grades of a ranked list, best ranked first, and
    returns DCG@k divided by the DCG@k of the ideal ordering. Lists without
    a positive grade score 0.

    >>> ndcg_at([4, 2, 0], 3)
    1.0
    """
    if k < 1:
        raise ValueError("k must be at least 1, got %r" % k)
    ideal = dcg(sorted(grades, reverse=True), k)
    if ideal == 0:
        return 0.0
    return dcg(grades, k) / ideal


def mean_ndcg(rankings, k):
    """Mean NDCG@k over a list of ranked grade lists (0 for no lists)"""

    if len(rankings) == 0:
        return 0.0
    return float(np.mean([ndcg_at(grades, k) for grades in rankings]))
