""" Dual query representation: n-grams of the query words and n-grams of the
query segments.

With the segmentation "beijing / seven eleven / stores" the word bigrams are
"beijing seven", "seven eleven" and "eleven stores", while the phrase bigrams
are "beijing seven eleven" and "seven eleven stores".
"""
import logging
from segrank.errors import AlignmentError, ConfigError
from segrank.relevance.corpus import MAX_ORDER, analyze
from segrank.utils import ngrams

logger = logging.getLogger(__name__)

MODES = ("wp", "p", "w")
SIDES = ("word", "phrase")


def _flatten(units):

    return tuple(token for unit in units for token in unit)


class DualQueryRep(object):
    """ A query seen both as a sequence of words and as a sequence of phrases

    Parameters
    ----------
    word_units: sequence of token tuples, one per word
    phrase_units: sequence of token tuples, one per segment

    Attributes
    ----------
    word_units: tuple of token tuples
    phrase_units: tuple of token tuples
    """

    def __init__(self, word_units, phrase_units):

        self.word_units = tuple(tuple(unit) for unit in word_units)
        self.phrase_units = tuple(tuple(unit) for unit in phrase_units)

    def units(self, side):

        if side == "word":
            return self.word_units
        elif side == "phrase":
            return self.phrase_units
        raise ValueError("side must be 'word' or 'phrase', got %r" % side)

    def unit_ngrams(self, side, order):
        """ n-grams of units, each a tuple of order units """

        return ngrams(self.units(side), order)

    def ngrams(self, side, order):
        """ n-grams of one side as flat token tuples, in query order. The
        result is a multiset: repeated n-grams appear repeatedly. """

        return [_flatten(gram) for gram in self.unit_ngrams(side, order)]

    @property
    def word_ngrams(self):
        return [self.ngrams("word", order) for order in range(1, MAX_ORDER + 1)]

    @property
    def phrase_ngrams(self):
        return [self.ngrams("phrase", order) for order in range(1, MAX_ORDER + 1)]

    def with_mode(self, mode):
        """ Applies a representation mode

        "wp" keeps both sides, "w" uses the words on both sides and "p" the
        phrases on both sides, so feature vectors keep their length.
        """
        if mode == "wp":
            return self
        elif mode == "w":
            return DualQueryRep(self.word_units, self.word_units)
        elif mode == "p":
            return DualQueryRep(self.phrase_units, self.phrase_units)
        raise ConfigError("Representation mode must be one of %s, got %r" % (
            ", ".join(MODES), mode))

    def __eq__(self, other):
        return (isinstance(other, DualQueryRep) and
                self.word_units == other.word_units and
                self.phrase_units == other.phrase_units)

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return "DualQueryRep(%r | %r)" % (" ".join(_flatten(self.word_units)),
                                          " / ".join(" ".join(unit) for unit in self.phrase_units))


def _analyze_token(token):

    return analyze(token) or (token.lower(),)


def build_dual_rep(query, segmentation, mode="wp"):
    """ Builds the dual representation of a segmented query. Each query token
    is analyzed like document text, so "Seven-Eleven" becomes the unit
    ("seven", "eleven").

    Parameters
    ----------
    query: Query instance
    segmentation: Segmentation instance over query
    mode: string
        "wp", "w" or "p"

    Returns
    -------
    DualQueryRep instance

    Raises
    ------
    AlignmentError
        If segmentation belongs to another query
    """
    if segmentation.query != query:
        raise AlignmentError("Segmentation %r does not belong to %r" % (segmentation.text, query))

    words = [_analyze_token(token) for token in query.tokens]
    phrases = [_flatten(_analyze_token(token) for token in segment)
               for segment in segmentation.segments]
    return DualQueryRep(words, phrases).with_mode(mode)
