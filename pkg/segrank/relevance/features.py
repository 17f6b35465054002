""" Relevance features of a (query, document) pair under a dual query
representation.

Three schemes are available:

- bm25: n-gram BM25 of every field, for word and phrase n-grams of orders
  1 to 3 (42 features)
- kn: the bm25 features plus the same six cells over the key n-gram field
  (48 features)
- dm: dependency model counts of unigrams and bigrams, weighted by seven
  weight sources (294 features)

All layouts are representation-major: the word half comes first, then the
phrase half.
"""
import math
import logging
import numpy as np
from segrank.errors import ConfigError, PreconditionError, StatsError, ParseError
from segrank.relevance.corpus import (FIELDS, KEY_FIELD, MAX_ORDER, ngram_length,
                                      term_frequency, all_ngrams)
from segrank.relevance.representation import SIDES
from segrank.stats import normalize
from segrank.utils import find_occurrences, read_lines

logger = logging.getLogger(__name__)

SCHEMES = ("bm25", "kn", "dm")
DEFAULT_K1 = 1.2
DEFAULT_B = 0.75
DEFAULT_KEY_NGRAM_BUDGET = 20
DEFAULT_WINDOW = 8
WEIGHT_SOURCES = 7
DM_TYPES = ("unigram", "bigram_exact", "bigram_window")


class BM25Params(object):
    """ BM25 constants, with optional per-field overrides

    Parameters
    ----------
    k1: float (> 0)
    b: float in [0, 1]
    fields: dict
        field name to a dict with "k1" and/or "b"
    """

    def __init__(self, k1=DEFAULT_K1, b=DEFAULT_B, fields=None):

        self.k1 = float(k1)
        self.b = float(b)
        self.overrides = dict()
        for name, values in (fields or dict()).items():
            if name not in FIELDS + (KEY_FIELD,):
                raise ConfigError("BM25 override for unknown field %r" % name)
            self.overrides[name] = (float(values.get("k1", k1)), float(values.get("b", b)))
        for k1_, b_ in [(self.k1, self.b)] + list(self.overrides.values()):
            if k1_ <= 0 or not 0 <= b_ <= 1:
                raise ConfigError("BM25 needs k1 > 0 and 0 <= b <= 1, got k1=%r b=%r" % (k1_, b_))

    def for_field(self, name):
        return self.overrides.get(name, (self.k1, self.b))

    def to_dict(self):
        return dict(k1=self.k1, b=self.b,
                    fields=dict((name, dict(k1=k1, b=b)) for name, (k1, b) in self.overrides.items()))


def idf(df, doc_count):
    """ Robertson-Sparck-Jones idf, floored at 0 """

    return max(0.0, math.log((doc_count - df + 0.5) / (df + 0.5)))


def ngram_bm25(grams, field_tokens, field_stats, order, k1=DEFAULT_K1, b=DEFAULT_B):
    """ n-gram BM25 of one field

    Sums idf(g) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len / avglen)) over the
    distinct n-grams g, where tf counts contiguous occurrences of g in the
    field and len is the n-gram length of the field for this order.

    Parameters
    ----------
    grams: list of token tuples (repeats are scored once)
    field_tokens: sequence of tokens
    field_stats: FieldStats instance of the same field
    order: int between 1 and 3
    k1: float
    b: float

    Returns
    -------
    float

    Raises
    ------
    StatsError
        If the collection average length is 0 while the field is not empty
    """
    length = ngram_length(field_tokens, order)
    avglen = field_stats.avglen(order)
    if avglen == 0:
        if length > 0:
            raise StatsError("Average %d-gram length of field %s is 0 but the document has %d" % (
                order, field_stats.name, length))
        return 0.0

    norm = k1 * (1.0 - b + b * length / avglen)
    score = 0.0
    for gram in sorted(set(grams)):
        tf = term_frequency(field_tokens, gram)
        if tf == 0:
            continue
        score += idf(field_stats.df(gram), field_stats.doc_count) * tf * (k1 + 1) / (tf + norm)
    return score


def bm25_names(fields=FIELDS):
    return ["bm25:%s:%s:%d" % (side, field, order)
            for side in SIDES for field in fields for order in range(1, MAX_ORDER + 1)]


def _bm25_cells(doc, rep, stats, params, fields):

    values = list()
    for side in SIDES:
        for field in fields:
            k1, b = params.for_field(field)
            for order in range(1, MAX_ORDER + 1):
                values.append(ngram_bm25(rep.ngrams(side, order), doc.field(field),
                                         stats[field], order, k1=k1, b=b))
    return values


def bm25_features(doc, rep, stats, params=None):
    """ The 42 BM25 features: side (word, phrase) x field (7) x order (1-3)

    Returns
    -------
    numpy array of 42 floats
    """
    params = params or BM25Params()
    return np.array(_bm25_cells(doc, rep, stats, params, FIELDS), dtype=float)


def extract_key_ngrams(body, budget=DEFAULT_KEY_NGRAM_BUDGET, stats=None):
    """ Picks the most salient n-grams of a body as the key n-gram field

    Each distinct n-gram of orders 1 to 3 scores tf * (ln((N + 1) / (df + 1)) + 1)
    with the body statistics of the collection (idf is 1 without
    statistics). The top budget n-grams, ties broken by first occurrence
    and then by shorter order, are concatenated in score order.

    Parameters
    ----------
    body: sequence of tokens
    budget: int (>= 1)
    stats: CollectionStats instance, or None

    Returns
    -------
    tuple of tokens
    """
    if budget < 1:
        raise ConfigError("Key n-gram budget must be at least 1, got %r" % budget)

    first_seen = dict()
    counts = dict()
    for order, position, gram in all_ngrams(body):
        counts[gram] = counts.get(gram, 0) + 1
        first_seen.setdefault(gram, (position, order))

    def score(gram):
        if stats is None:
            return float(counts[gram])
        body_stats = stats["body"]
        weight = math.log((body_stats.doc_count + 1.0) / (body_stats.df(gram) + 1.0)) + 1.0
        return counts[gram] * weight

    ranked = sorted(counts, key=lambda gram: (-score(gram),) + first_seen[gram])
    return tuple(token for gram in ranked[:budget] for token in gram)


def build_key_fields(documents, budget=DEFAULT_KEY_NGRAM_BUDGET, stats=None):
    """ Returns copies of documents carrying their key n-gram field """

    documents = [document.with_key_field(extract_key_ngrams(document.field("body"),
                                                            budget=budget, stats=stats))
                 for document in documents]
    logger.info("Built key n-gram fields of %d documents (budget %d)" % (len(documents), budget))
    return documents


def kn_names():
    return bm25_names() + bm25_names(fields=(KEY_FIELD,))


def kn_features(doc, rep, stats, params=None):
    """ The 48 key n-gram features: the 42 BM25 features followed by word
    and phrase orders 1-3 over the key n-gram field

    Raises
    ------
    PreconditionError
        If the document has no key n-gram field
    """
    if not doc.has_key_field:
        raise PreconditionError("Document %s has no %s field, run `segrank index` first" % (
            doc.id, KEY_FIELD))
    params = params or BM25Params()
    return np.array(_bm25_cells(doc, rep, stats, params, FIELDS) +
                    _bm25_cells(doc, rep, stats, params, (KEY_FIELD,)), dtype=float)


def exact_count(tokens, first, second):
    """ Occurrences of first immediately followed by second """

    return len(find_occurrences(tokens, tuple(first) + tuple(second)))


def window_count(tokens, first, second, window=DEFAULT_WINDOW):
    """ Unordered co-occurrences of two units within a window

    Counts pairs of non-overlapping occurrences, in either order, with at
    most window - 2 tokens between them. For one-word units that is a
    distance below window. When both units are the same, each pair of
    occurrences counts once.
    """
    first, second = tuple(first), tuple(second)
    left = [(start, start + len(first)) for start in find_occurrences(tokens, first)]
    if first == second:
        pairs = [(left[ii], left[jj]) for ii in range(len(left)) for jj in range(ii + 1, len(left))]
    else:
        right = [(start, start + len(second)) for start in find_occurrences(tokens, second)]
        pairs = [(aa, bb) for aa in left for bb in right]

    count = 0
    for (start_a, end_a), (start_b, end_b) in pairs:
        if end_a <= start_b:
            gap = start_b - end_a
        elif end_b <= start_a:
            gap = start_a - end_b
        else:
            continue
        if gap <= window - 2:
            count += 1
    return count


class ConstantWeights(object):
    """ The same weight for every n-gram and source """

    def __init__(self, value=1.0):

        self.value = float(value)

    def __call__(self, gram):
        return np.full(WEIGHT_SOURCES, self.value)


class TableWeights(object):
    """ Per-n-gram weights read from a `ngram<TAB>w1<TAB>...<TAB>w7` file.
    N-grams are normalized like n-gram statistics; absent n-grams get the
    default weight.
    """

    def __init__(self, table, default=0.0):

        self.table = dict((normalize(gram), np.asarray(weights, dtype=float))
                          for gram, weights in table.items())
        self.default = float(default)

    def __call__(self, gram):
        return self.table.get(normalize(gram), np.full(WEIGHT_SOURCES, self.default))

    @classmethod
    def load(cls, filename, default=0.0):

        table = dict()
        for line_number, line in read_lines(filename):
            if len(line.strip()) == 0:
                continue
            parts = line.split("\t")
            if len(parts) != WEIGHT_SOURCES + 1:
                raise ParseError("expected an n-gram and %d weights" % WEIGHT_SOURCES,
                                 filename, line_number)
            try:
                table[parts[0]] = [float(value) for value in parts[1:]]
            except ValueError as e:
                raise ParseError(str(e), filename, line_number)
        logger.info("Loaded dependency model weights of %d n-grams from %s" % (len(table), filename))
        return cls(table, default=default)


def dm_names():
    return ["dm:%s:%s:%d:%s" % (side, field, source, kind)
            for side in SIDES for field in FIELDS
            for source in range(1, WEIGHT_SOURCES + 1) for kind in DM_TYPES]


def dm_features(doc, rep, weights=None, window=DEFAULT_WINDOW):
    """ The 294 dependency model features: side (2) x field (7) x weight
    source (7) x frequency type (3)

    The frequency types are the unigram frequency, the frequency of a bigram
    as adjacent units and its unordered frequency within the window. Unigram
    counts are divided by the field length, bigram counts by the bigram
    length of the field; each feature sums weight * normalized frequency over
    the n-grams of its side.

    Raises
    ------
    ConfigError
        If window < 2
    """
    if window < 2:
        raise ConfigError("Dependency model window must be at least 2, got %r" % window)
    weights = weights or ConstantWeights()

    values = np.zeros((len(SIDES), len(FIELDS), WEIGHT_SOURCES, len(DM_TYPES)))
    for ss, side in enumerate(SIDES):
        unigrams = [gram[0] for gram in rep.unit_ngrams(side, 1)]
        bigrams = rep.unit_ngrams(side, 2)
        unigram_weights = [weights(" ".join(unit)) for unit in unigrams]
        bigram_weights = [weights(" ".join(first + second)) for first, second in bigrams]
        for ff, field in enumerate(FIELDS):
            tokens = doc.field(field)
            unigram_length = ngram_length(tokens, 1)
            bigram_length = ngram_length(tokens, 2)
            if unigram_length > 0:
                for unit, weight in zip(unigrams, unigram_weights):
                    values[ss, ff, :, 0] += weight * term_frequency(tokens, unit) / unigram_length
            if bigram_length > 0:
                for (first, second), weight in zip(bigrams, bigram_weights):
                    values[ss, ff, :, 1] += weight * exact_count(tokens, first, second) / bigram_length
                    values[ss, ff, :, 2] += weight * window_count(tokens, first, second,
                                                                  window=window) / bigram_length
    return values.ravel()


def feature_names(scheme):
    """ Ordered feature names of a scheme """

    if scheme == "bm25":
        return bm25_names()
    elif scheme == "kn":
        return kn_names()
    elif scheme == "dm":
        return dm_names()
    raise ConfigError("Unknown feature scheme %r, choose one of %s" % (scheme, ", ".join(SCHEMES)))


class FeatureScheme(object):
    """ Computes the features of one scheme with fixed parameters

    Parameters
    ----------
    scheme: string
        "bm25", "kn" or "dm"
    stats: CollectionStats instance
    params: BM25Params instance
    weights: weight provider for "dm"
    window: int, window for "dm"
    """

    def __init__(self, scheme, stats, params=None, weights=None, window=DEFAULT_WINDOW):

        self.names = tuple(feature_names(scheme))
        if scheme == "dm" and window < 2:
            raise ConfigError("Dependency model window must be at least 2, got %r" % window)
        self.scheme = scheme
        self.stats = stats
        self.params = params or BM25Params()
        self.weights = weights or ConstantWeights()
        self.window = window

    @property
    def dimension(self):
        return len(self.names)

    def __call__(self, doc, rep):

        if self.scheme == "bm25":
            return bm25_features(doc, rep, self.stats, self.params)
        elif self.scheme == "kn":
            return kn_features(doc, rep, self.stats, self.params)
        return dm_features(doc, rep, weights=self.weights, window=self.window)
