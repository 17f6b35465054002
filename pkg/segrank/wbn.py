""" Wikipedia-based normalization (WBN) scoring and top-k candidate generation.

A segment of two or more words is weighted by its frequency, or, when it is a
Wikipedia title, by a quadratic length bonus plus its most frequent inner
bigram. A segmentation scores the sum of its multi-word segment weights, or -1
as soon as one multi-word segment has no positive weight. One-word segments
never contribute.

Candidates are ordered by descending score, ties broken by ascending break
vector. That order is total, so every ranking downstream is deterministic.
"""
import heapq
import logging
from segrank.errors import InvariantError
from segrank.segcore import Segmentation, enumerate_all
from segrank.stats import normalize

logger = logging.getLogger(__name__)

DEFAULT_K = 6
POISONED_SCORE = -1
TIE_BREAK = "lexicographic"


def segment_weight(segment, stats, titles):
    """ Weight of one segment

    |s|^2 + |s| * max freq(t) over the two-token substrings t of s, if s is a
    title (the max is 0 for a one-token title); |s| * freq(s) otherwise.

    Parameters
    ----------
    segment: sequence of tokens
    stats: NGramStats instance
    titles: TitleSet instance

    Returns
    -------
    int
    """
    segment = tuple(segment)
    length = len(segment)
    if normalize(segment) in titles:
        inner = [stats.freq(segment[ii:ii + 2]) for ii in range(length - 1)]
        return length ** 2 + length * max(inner or [0])
    return length * stats.freq(segment)


def score_from_weights(weights, lengths):
    """ Combines per-segment weights into a segmentation score. Segments of
    length one are ignored; an empty sum scores 0. """

    total = 0
    for weight, length in zip(weights, lengths):
        if length < 2:
            continue
        if weight <= 0:
            return POISONED_SCORE
        total += weight
    return total


def segmentation_score(segmentation, stats, titles):
    """ WBN score of a segmentation """

    weights = [segment_weight(segment, stats, titles) for segment in segmentation.segments]
    return score_from_weights(weights, [len(segment) for segment in segmentation.segments])


class ScoredSegmentation(object):
    """ A segmentation together with its WBN score and its segment weights

    Attributes
    ----------
    segmentation: Segmentation instance
    score: int
    segment_weights: tuple of ints, one per segment (including one-word segments)
    """

    def __init__(self, segmentation, score, segment_weights):

        self.segmentation = segmentation
        self.score = score
        self.segment_weights = tuple(segment_weights)

    @classmethod
    def from_segmentation(cls, segmentation, stats, titles):
        weights = [segment_weight(segment, stats, titles) for segment in segmentation.segments]
        score = score_from_weights(weights, [len(segment) for segment in segmentation.segments])
        return cls(segmentation, score, weights)

    @property
    def breaks(self):
        return self.segmentation.breaks

    @property
    def sort_key(self):
        return (-self.score, self.segmentation.breaks)

    def recompute_score(self):
        return score_from_weights(self.segment_weights,
                                  [len(segment) for segment in self.segmentation.segments])

    def __repr__(self):
        return "ScoredSegmentation(%r, score=%r)" % (self.segmentation.text, self.score)


class CandidateList(object):
    """ The ranked top-k segmentations of one query

    Attributes
    ----------
    query: Query instance
    candidates: list of ScoredSegmentation, best first
    k: int
        the requested size
    """

    def __init__(self, query, candidates, k):

        self.query = query
        self.candidates = list(candidates)
        self.k = k
        self._ranks = dict((candidate.breaks, rank)
                           for rank, candidate in enumerate(self.candidates, 1))

    def __len__(self):
        return len(self.candidates)

    def __iter__(self):
        return iter(self.candidates)

    def __getitem__(self, index):
        return self.candidates[index]

    @property
    def top(self):
        return self.candidates[0]

    def rank_of(self, segmentation):
        """ Returns the 1-based rank of segmentation (or of its break vector),
        or None if it is not among the candidates """

        breaks = getattr(segmentation, "breaks", segmentation)
        return self._ranks.get(tuple(breaks))

    def __contains__(self, segmentation):
        return self.rank_of(segmentation) is not None

    def to_dict(self):
        return dict(query=" ".join(self.query.tokens),
                    k=self.k,
                    tie_break=TIE_BREAK,
                    candidates=[dict(rank=rank,
                                     segmentation=candidate.segmentation.text,
                                     breaks=list(candidate.breaks),
                                     score=candidate.score,
                                     segment_weights=list(candidate.segment_weights))
                                for rank, candidate in enumerate(self.candidates, 1)])


def score_all(query, stats, titles, limit=None):
    """ Scores every segmentation of query and sorts them best first. This is
    the exhaustive counterpart of topk and is bounded by the enumeration limit.
    """
    kwargs = dict() if limit is None else dict(limit=limit)
    scored = [ScoredSegmentation.from_segmentation(segmentation, stats, titles)
              for segmentation in enumerate_all(query, **kwargs)]
    return sorted(scored, key=lambda candidate: candidate.sort_key)


def topk(query, k, stats, titles):
    """ Generates the k best segmentations of query by dynamic programming

    For every prefix of the query the program keeps three short lists of
    partial segmentations: the k best unpoisoned ones by (score, breaks), the
    k lexicographically smallest poisoned ones, and the k lexicographically
    smallest of all. A poisoned partial already contains a multi-word segment
    with non-positive weight, so every completion of it scores -1 and only its
    break vector matters for the order. The work is O(n^2 k log k) instead of
    the O(2^n) of scoring every segmentation.

    Parameters
    ----------
    query: Query instance
    k: int
        number of candidates to return (>= 1)
    stats: NGramStats instance
    titles: TitleSet instance

    Returns
    -------
    CandidateList with min(k, 2^(n-1)) candidates
    """
    if k < 1:
        raise ValueError("k must be at least 1, got %r" % k)

    n = query.n
    tokens = query.tokens
    weights = dict()
    for start in range(n):
        for end in range(start + 1, n + 1):
            weights[(start, end)] = segment_weight(tokens[start:end], stats, titles)

    # partials are (score, breaks); breaks cover the positions before the prefix end.
    # smallest only needs the breaks
    clean = [list() for _ in range(n + 1)]
    poisoned = [list() for _ in range(n + 1)]
    smallest = [list() for _ in range(n + 1)]
    clean[0] = [(0, ())]
    smallest[0] = [()]

    for end in range(1, n + 1):
        clean_pool = list()
        poisoned_pool = list()
        smallest_pool = list()
        for start in range(end):
            length = end - start
            suffix = ((1,) if start > 0 else ()) + (0,) * (length - 1)
            weight = weights[(start, end)]
            poisons = length >= 2 and weight <= 0
            gain = weight if length >= 2 else 0

            smallest_pool.extend(breaks + suffix for breaks in smallest[start])
            if poisons:
                poisoned_pool.extend((POISONED_SCORE, breaks + suffix)
                                     for breaks in smallest[start])
            else:
                clean_pool.extend((score + gain, breaks + suffix)
                                  for score, breaks in clean[start])
                poisoned_pool.extend((POISONED_SCORE, breaks + suffix)
                                     for score, breaks in poisoned[start])

        clean[end] = heapq.nsmallest(k, clean_pool, key=lambda item: (-item[0], item[1]))
        poisoned[end] = heapq.nsmallest(k, poisoned_pool, key=lambda item: item[1])
        smallest[end] = heapq.nsmallest(k, smallest_pool)

    ranked = (clean[n] + poisoned[n])[:k]

    candidates = list()
    for score, breaks in ranked:
        candidate = ScoredSegmentation.from_segmentation(Segmentation(query, breaks), stats, titles)
        if candidate.score != score:
            raise InvariantError("Dynamic program scored %r as %r, direct scoring gives %r" % (
                candidate.segmentation.text, score, candidate.score))
        candidates.append(candidate)

    logger.debug("Generated %d candidates for %r" % (len(candidates), query))
    return CandidateList(query, candidates, k)
