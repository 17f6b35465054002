""" N-gram frequency statistics and the Wikipedia title set.

Both are loaded once from local snapshot files and are read-only afterwards,
so a single instance can be shared by any number of readers.
"""
import math
import logging
from segrank.errors import ParseError, UndefinedStatisticsError
from segrank.utils import read_lines

logger = logging.getLogger(__name__)

TOTAL_KEY = "__TOTAL__"


def normalize(ngram):
    """ Lowercases an n-gram and collapses whitespace. Accepts either a string
    or a sequence of tokens.

    >>> normalize(["Hot", "Dog"])
    'hot dog'
    >>> normalize("  Hot   dog ")
    'hot dog'
    """
    if not isinstance(ngram, str):
        ngram = " ".join(ngram)
    return " ".join(ngram.lower().split())


class NGramStats(object):
    """ Frequency oracle over lowercase, space-joined n-grams

    Parameters
    ----------
    entries: dict
        mapping from normalized n-gram string to its count
    total_unigrams: int
        token mass used to turn counts into probabilities. Defaults to the sum
        of the unigram counts.

    Attributes
    ----------
    entries: dict
        mapping from normalized n-gram string to its count
    total_unigrams: int
        token mass used to turn counts into probabilities
    max_order: int
        the largest n-gram order present (1 for empty statistics)
    name: string
        the source this snapshot came from (e.g. "web" or "querylog")
    """

    def __init__(self, entries=None, total_unigrams=None, name="web"):

        self.entries = dict()
        for key, count in (entries or dict()).items():
            key = normalize(key)
            self.entries[key] = self.entries.get(key, 0) + int(count)

        if total_unigrams is None:
            total_unigrams = sum(count for key, count in self.entries.items()
                                 if " " not in key)
        self.total_unigrams = int(total_unigrams)
        self.max_order = max([key.count(" ") + 1 for key in self.entries] or [1])
        self.name = name

    def __str__(self):

        return "NGramStats(%s): %d entries, max order %d, %d unigram tokens" % (
            self.name, len(self.entries), self.max_order, self.total_unigrams)

    def __len__(self):

        return len(self.entries)

    def freq(self, ngram):
        """ Returns the count of ngram, or 0 if it is absent. The n-gram is
        normalized first, so lookups are case-insensitive. """

        return self.entries.get(normalize(ngram), 0)

    def pmi(self, left, right):
        """ Pointwise mutual information between two adjacent token sequences

        log( (freq(left+right) * N) / (freq(left) * freq(right)) ), with one
        added to each of the four counts. N is total_unigrams.

        Parameters
        ----------
        left: sequence of tokens
        right: sequence of tokens

        Returns
        -------
        float

        Raises
        ------
        UndefinedStatisticsError
            If the statistics hold no unigram mass
        """
        if self.total_unigrams == 0:
            raise UndefinedStatisticsError(
                "Mutual information is undefined: %s has no unigram mass" % self.name)

        left = list(left)
        right = list(right)
        joint = self.freq(left + right) + 1
        return math.log(float(joint * (self.total_unigrams + 1)) /
                        ((self.freq(left) + 1) * (self.freq(right) + 1)))


def freq(stats, ngram):
    """ Module level form of NGramStats.freq """

    return stats.freq(ngram)


def pmi(stats, left, right):
    """ Module level form of NGramStats.pmi """

    return stats.pmi(left, right)


def load_stats(filename, name="web"):
    """ Loads n-gram counts from a `ngram<TAB>count` file

    Duplicate n-grams are summed. A `__TOTAL__<TAB>count` line overrides the
    unigram token mass. Blank lines are skipped.

    Parameters
    ----------
    filename: string
        path to the UTF-8 TSV snapshot
    name: string
        name of the statistics source

    Returns
    -------
    NGramStats instance

    Raises
    ------
    LoadError
        If the file cannot be read
    ParseError
        If a line has no tab or a count is not a non-negative integer
    """
    entries = dict()
    total = None
    for line_number, line in read_lines(filename):
        if len(line.strip()) == 0:
            continue
        if "\t" not in line:
            raise ParseError("expected 'ngram<TAB>count'", filename, line_number)
        key, count = line.rsplit("\t", 1)
        try:
            count = int(count)
        except ValueError:
            raise ParseError("count %r is not an integer" % count, filename, line_number)
        if count < 0:
            raise ParseError("count %d is negative" % count, filename, line_number)

        if key == TOTAL_KEY:
            total = count
            continue
        key = normalize(key)
        if len(key) == 0:
            raise ParseError("empty n-gram", filename, line_number)
        entries[key] = entries.get(key, 0) + count

    stats = NGramStats(entries, total_unigrams=total, name=name)
    largest = max([count for key, count in stats.entries.items() if " " not in key] or [0])
    if stats.total_unigrams < largest:
        raise ParseError("%s %d is smaller than the largest unigram count %d" % (
            TOTAL_KEY, stats.total_unigrams, largest), filename)

    logger.info("Loaded %s from %s" % (stats, filename))
    return stats


class TitleSet(object):
    """ Membership oracle for Wikipedia titles. Titles are normalized the same
    way at load time and at query time.

    Parameters
    ----------
    titles: iterable of strings (or of token sequences)
    """

    def __init__(self, titles=None):

        self.titles = frozenset(normalize(title) for title in (titles or list()))
        self.titles = self.titles - frozenset([""])

    def __contains__(self, title):

        return normalize(title) in self.titles

    def __len__(self):

        return len(self.titles)

    def __str__(self):

        return "TitleSet: %d titles" % len(self.titles)


def load_titles(filename):
    """ Loads a title list, one title per line, into a TitleSet

    Raises
    ------
    LoadError
        If the file cannot be read
    """
    titles = TitleSet(line for line_number, line in read_lines(filename))
    logger.info("Loaded %s from %s" % (titles, filename))
    return titles
