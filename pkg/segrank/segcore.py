""" Queries, segmentations and break-vector algebra.

A query of n tokens has n - 1 break positions. Break i is 1 when the query is
split between token i and token i + 1. A segmentation is fully described by its
break vector; its segments are the maximal token spans without a break.
"""
import itertools
import logging
from segrank.errors import EmptyQueryError, DimensionError, EnumerationBoundError

logger = logging.getLogger(__name__)

SEGMENT_SEPARATOR = " / "
DEFAULT_ENUMERATION_LIMIT = 16


class Query(object):
    """ A tokenized query

    Parameters
    ----------
    raw: string
        the query as typed
    tokens: sequence of strings
        the query tokens, in order. Casing is preserved.

    Attributes
    ----------
    raw: string
    tokens: tuple of strings
    n: int
        number of tokens
    """

    def __init__(self, raw, tokens):

        tokens = tuple(tokens)
        if len(tokens) == 0:
            raise EmptyQueryError("Query %r has no tokens" % raw)
        self.raw = raw
        self.tokens = tokens

    @property
    def n(self):
        return len(self.tokens)

    @property
    def normalized(self):
        return " ".join(self.tokens).lower()

    def __eq__(self, other):
        return isinstance(other, Query) and self.tokens == other.tokens

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self.tokens)

    def __repr__(self):
        return "Query(%r)" % " ".join(self.tokens)


def tokenize(raw):
    """ Splits a raw query on whitespace runs

    >>> tokenize("  a   b ").tokens
    ('a', 'b')

    Raises
    ------
    EmptyQueryError
        If raw holds no non-whitespace character
    """
    return Query(raw, raw.split())


class Segmentation(object):
    """ A segmentation of a query, stored as its break vector

    Parameters
    ----------
    query: Query instance
    breaks: sequence of 0/1 values of length n - 1

    Attributes
    ----------
    query: Query instance
    breaks: tuple of ints
    spans: tuple of (start, end) token offsets, end exclusive
    segments: tuple of token tuples, one per segment
    m: int
        number of segments
    """

    def __init__(self, query, breaks):

        breaks = tuple(int(bb) for bb in breaks)
        if len(breaks) != query.n - 1:
            raise DimensionError("Query %r has %d break positions, got %d" % (
                " ".join(query.tokens), query.n - 1, len(breaks)))
        if any(bb not in (0, 1) for bb in breaks):
            raise DimensionError("Break vectors hold only 0 and 1: %r" % (breaks,))

        self.query = query
        self.breaks = breaks

        spans = list()
        start = 0
        for position, bb in enumerate(breaks):
            if bb == 1:
                spans.append((start, position + 1))
                start = position + 1
        spans.append((start, query.n))
        self.spans = tuple(spans)
        self.segments = tuple(query.tokens[start:end] for start, end in spans)

    @property
    def m(self):
        return len(self.spans)

    @property
    def text(self):
        return SEGMENT_SEPARATOR.join(" ".join(segment) for segment in self.segments)

    def __eq__(self, other):
        return (isinstance(other, Segmentation) and
                self.query == other.query and
                self.breaks == other.breaks)

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((self.query.tokens, self.breaks))

    def __repr__(self):
        return "Segmentation(%r)" % self.text


def breaks_to_segments(query, breaks):
    """ Builds the Segmentation of query induced by a break vector

    Raises
    ------
    DimensionError
        If len(breaks) != n - 1
    """
    return Segmentation(query, breaks)


def segments_to_breaks(query, segments):
    """ Inverse of breaks_to_segments: recovers the break vector from an
    ordered list of token segments that concatenate to the query tokens

    Raises
    ------
    DimensionError
        If the segments do not concatenate to the query
    """
    segments = [tuple(segment) for segment in segments]
    if any(len(segment) == 0 for segment in segments) or \
            tuple(itertools.chain(*segments)) != query.tokens:
        raise DimensionError("Segments %r do not partition query %r" % (
            segments, " ".join(query.tokens)))

    breaks = list()
    for segment in segments:
        breaks.extend([0] * (len(segment) - 1))
        breaks.append(1)
    return tuple(breaks[:-1])


def parse_segmentation(text):
    """ Parses slash notation ("beijing / seven eleven / stores") into a
    Segmentation of the query made of all its tokens """

    segments = [part.split() for part in text.split("/")]
    if any(len(segment) == 0 for segment in segments):
        raise EmptyQueryError("Empty segment in %r" % text)
    query = Query(" ".join(" ".join(segment) for segment in segments),
                  itertools.chain(*segments))
    return Segmentation(query, segments_to_breaks(query, segments))


def format_segmentation(segmentation):
    """ Returns the slash notation of a segmentation """

    return segmentation.text


def enumerate_all(query, limit=DEFAULT_ENUMERATION_LIMIT):
    """ Lists all 2^(n-1) segmentations of query in lexicographic order of their
    break vectors (all zeros first, all ones last)

    Raises
    ------
    EnumerationBoundError
        If the query has more than limit tokens
    """
    if query.n > limit:
        raise EnumerationBoundError("Query of %d tokens exceeds the enumeration limit of %d" % (
            query.n, limit))

    return [Segmentation(query, breaks)
            for breaks in itertools.product((0, 1), repeat=query.n - 1)]
