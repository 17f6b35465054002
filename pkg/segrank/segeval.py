""" Gold standards from multiple annotators, and segmentation metrics.
"""
import math
import logging
import numpy as np
from scipy import stats as sp_stats
from segrank.errors import EvaluationError, DimensionError, ParseError
from segrank.segcore import tokenize, Segmentation, parse_segmentation
from segrank.utils import read_jsonl

logger = logging.getLogger(__name__)

METRICS = ("query_accuracy", "segment_precision", "segment_recall", "segment_f",
           "break_accuracy")

# values published for the re-ranking method and its baselines. printed next
# to reports as annotations, never asserted.
PUBLISHED_REFERENCE = {
    "bwc": {"NP": (0.548, 0.651, 0.742, 0.694, 0.834),
            "WT": (0.414, 0.538, 0.658, 0.592, 0.762),
            "WBN": (0.572, 0.692, 0.664, 0.677, 0.830),
            "rerank": (0.602, 0.715, 0.700, 0.707, 0.848)},
    "wqs": {"NP": (0.512, 0.666, 0.796, 0.726, 0.783),
            "WT": (0.508, 0.680, 0.728, 0.703, 0.784),
            "WBN": (0.362, 0.561, 0.456, 0.503, 0.680),
            "rerank": (0.560, 0.710, 0.749, 0.729, 0.800)},
}
PUBLISHED_COVERAGE = {1: 0.50, 2: 0.73, 3: 0.81, 4: 0.87, 6: 0.94, 8: 0.98, 10: 0.98}


class AnnotatedQuery(object):
    """ A query with the break vectors of its annotators

    Parameters
    ----------
    query: Query instance
    annotations: list of break vectors, each of length n - 1

    Raises
    ------
    DimensionError
        If there is no annotation or an annotation has the wrong length
    """

    def __init__(self, query, annotations, id=None):

        annotations = [tuple(int(bb) for bb in annotation) for annotation in annotations]
        if len(annotations) == 0:
            raise DimensionError("Query %r has no annotation" % (query,))
        for annotation in annotations:
            if len(annotation) != query.n - 1:
                raise DimensionError("Annotation %r does not fit query %r" % (annotation, query))
        self.query = query
        self.annotations = annotations
        self.id = id

    @property
    def gold(self):
        return fuse_breaks(self)


def fuse_breaks(annotated):
    """ Break fusion: a break is kept when at least half of the annotators
    set it

    Parameters
    ----------
    annotated: AnnotatedQuery instance

    Returns
    -------
    Segmentation instance
    """
    threshold = int(math.ceil(len(annotated.annotations) / 2.0))
    votes = np.sum(np.array(annotated.annotations, dtype=int).reshape(
        len(annotated.annotations), annotated.query.n - 1), axis=0)
    return Segmentation(annotated.query, [int(vote >= threshold) for vote in votes])


class SegMetrics(object):
    """ The five segmentation measures

    Attributes
    ----------
    query_accuracy: float
    segment_precision: float
    segment_recall: float
    segment_f: float
        harmonic mean of precision and recall (0 when both are 0)
    break_accuracy: float
    """

    def __init__(self, query_accuracy, segment_precision, segment_recall, break_accuracy):

        self.query_accuracy = query_accuracy
        self.segment_precision = segment_precision
        self.segment_recall = segment_recall
        self.segment_f = f_measure(segment_precision, segment_recall)
        self.break_accuracy = break_accuracy

    def as_tuple(self):
        return tuple(getattr(self, name) for name in METRICS)

    def as_dict(self):
        return dict(zip(METRICS, self.as_tuple()))

    def __repr__(self):
        return "SegMetrics(%s)" % ", ".join("%s=%.4f" % item for item in zip(METRICS, self.as_tuple()))


def f_measure(precision, recall):

    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _ratio(numerator, denominator, empty=1.0):

    if denominator == 0:
        return empty
    return float(numerator) / denominator


def evaluate(predictions, golds, average="micro"):
    """ Scores predicted segmentations against gold segmentations

    Segments are compared as token spans. With micro averaging, segment
    precision and recall pool the segments of all queries and break accuracy
    pools all break positions; with macro averaging each query is scored
    on its own and the scores are averaged.

    Parameters
    ----------
    predictions: list of Segmentation
    golds: list of Segmentation, aligned with predictions
    average: string
        "micro" or "macro"

    Returns
    -------
    SegMetrics instance

    Raises
    ------
    EvaluationError
        If the lists differ in length or a pair covers different queries
    """
    if average not in ("micro", "macro"):
        raise ValueError("average must be 'micro' or 'macro', got %r" % average)
    if len(predictions) != len(golds):
        raise EvaluationError("%d predictions for %d gold segmentations" % (
            len(predictions), len(golds)))
    if len(golds) == 0:
        raise EvaluationError("Nothing to evaluate")

    exact = 0
    counts = np.zeros((len(golds), 5))
    for index, (predicted, gold) in enumerate(zip(predictions, golds)):
        if predicted.query != gold.query:
            raise EvaluationError("Prediction %r and gold %r cover different queries" % (
                predicted.text, gold.text))
        matched_breaks = sum(1 for bp, bg in zip(predicted.breaks, gold.breaks) if bp == bg)
        correct = len(set(predicted.spans) & set(gold.spans))
        exact += int(predicted.breaks == gold.breaks)
        counts[index] = (correct, predicted.m, gold.m, matched_breaks, len(gold.breaks))

    query_accuracy = float(exact) / len(golds)
    if average == "micro":
        correct, n_predicted, n_gold, matched, positions = counts.sum(axis=0)
        return SegMetrics(query_accuracy,
                          _ratio(correct, n_predicted),
                          _ratio(correct, n_gold),
                          _ratio(matched, positions))

    precisions = [_ratio(row[0], row[1]) for row in counts]
    recalls = [_ratio(row[0], row[2]) for row in counts]
    breaks = [_ratio(row[3], row[4]) for row in counts]
    return SegMetrics(query_accuracy,
                      float(np.mean(precisions)),
                      float(np.mean(recalls)),
                      float(np.mean(breaks)))


def coverage_at_k(candidate_lists, golds, max_k=10):
    """ Fraction of queries whose gold segmentation is among the top k
    candidates, for k = 1..max_k

    Parameters
    ----------
    candidate_lists: list of CandidateList generated with k >= max_k
    golds: list of Segmentation, aligned with candidate_lists

    Returns
    -------
    list of (k, coverage) tuples. Coverage never decreases with k.
    """
    if len(candidate_lists) != len(golds):
        raise EvaluationError("%d candidate lists for %d gold segmentations" % (
            len(candidate_lists), len(golds)))
    ranks = [candidates.rank_of(gold) for candidates, gold in zip(candidate_lists, golds)]
    table = list()
    for k in range(1, max_k + 1):
        hits = sum(1 for rank in ranks if rank is not None and rank <= k)
        table.append((k, _ratio(hits, len(ranks), empty=0.0)))
    return table


def sign_test(predictions_a, predictions_b, golds):
    """ Two-sided exact sign test on per-query exact matches of two systems

    Queries where both systems are right, or both wrong, are ties and are
    left out.

    Returns
    -------
    tuple (wins_a, wins_b, p_value). p_value is 1.0 without untied queries.
    """
    if not (len(predictions_a) == len(predictions_b) == len(golds)):
        raise EvaluationError("Systems and gold segmentations differ in length")

    wins_a = wins_b = 0
    for predicted_a, predicted_b, gold in zip(predictions_a, predictions_b, golds):
        right_a = predicted_a.breaks == gold.breaks
        right_b = predicted_b.breaks == gold.breaks
        if right_a and not right_b:
            wins_a += 1
        elif right_b and not right_a:
            wins_b += 1

    if wins_a + wins_b == 0:
        return wins_a, wins_b, 1.0
    result = sp_stats.binomtest(wins_a, wins_a + wins_b, 0.5, alternative="two-sided")
    return wins_a, wins_b, float(result.pvalue)


def segment_length_distribution(segmentations, longest=4):
    """ Share of segments of each length (the last bucket holds longest and
    beyond), words per query and words per segment

    Returns
    -------
    dict with keys "ratios" (list of floats), "words_per_query" and
    "words_per_segment"
    """
    counts = [0] * longest
    words = 0
    segments = 0
    for segmentation in segmentations:
        words += segmentation.query.n
        for segment in segmentation.segments:
            counts[min(len(segment), longest) - 1] += 1
            segments += 1

    return dict(ratios=[_ratio(count, segments, empty=0.0) for count in counts],
                words_per_query=_ratio(words, len(segmentations), empty=0.0),
                words_per_segment=_ratio(words, segments, empty=0.0))


def annotated_from_record(record, filename=None, line_number=None):
    """ Builds an AnnotatedQuery from one corpus record

    The record holds "query" and either "annotations" (list of break
    vectors), "breaks" (a single gold break vector) or "segmentation" (slash
    notation). An optional "id" is carried over.
    """
    try:
        if "segmentation" in record and "query" not in record:
            gold = parse_segmentation(record["segmentation"])
            return AnnotatedQuery(gold.query, [gold.breaks], id=record.get("id"))
        query = tokenize(record["query"])
        if "annotations" in record:
            annotations = record["annotations"]
        elif "breaks" in record:
            annotations = [record["breaks"]]
        elif "segmentation" in record:
            annotations = [parse_segmentation(record["segmentation"]).breaks]
        else:
            raise KeyError("annotations")
        return AnnotatedQuery(query, annotations, id=record.get("id"))
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError("not an annotated query record (%s)" % e, filename, line_number)


def load_annotated(filename):
    """ Reads an annotated query corpus from JSON-lines

    Each line looks like `{"query": "a b c", "annotations": [[0, 1], [1, 1]]}`.

    Returns
    -------
    list of AnnotatedQuery
    """
    annotated = [annotated_from_record(record, filename, line_number)
                 for line_number, record in read_jsonl(filename)]
    logger.info("Loaded %d annotated queries from %s" % (len(annotated), filename))
    return annotated
