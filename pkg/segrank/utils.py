import os
import io
import sys
import logging
import tempfile
from contextlib import contextmanager
import numpy as np
from segrank.errors import LoadError, ParseError

try:
    import simplejson as json
except ImportError:
    import json

logger = logging.getLogger(__name__)


class NumpyAwareJSONEncoder(json.JSONEncoder):
    """ this json encoder converts numpy arrays and scalars to python values so
    that json can write them.

    example usage:

    >>> import numpy as np
    >>> json.dumps({'weights': np.zeros((3,))}, cls=NumpyAwareJSONEncoder)
    '{"weights": [0.0, 0.0, 0.0]}'

    """

    def default(self, obj):
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, (tuple, set, frozenset)):
            return list(obj)
        return json.JSONEncoder.default(self, obj)


def dumps(obj):
    """ Serializes obj to a single canonical JSON line (sorted keys, no
    whitespace padding) so that artifacts are byte-identical across runs """

    return json.dumps(obj,
                      cls=NumpyAwareJSONEncoder,
                      sort_keys=True,
                      separators=(",", ":"),
                      ensure_ascii=False)


def read_jsonl(filename):
    """ Reads a JSON-lines file

    Parameters
    ----------
    filename: string
        path to a UTF-8 file holding one JSON object per line. Blank lines are
        skipped.

    Returns
    -------
    list of (line_number, object) tuples

    Raises
    ------
    LoadError
        If the file cannot be read
    ParseError
        If a line is not valid JSON
    """
    records = list()
    for line_number, line in read_lines(filename):
        if len(line.strip()) == 0:
            continue
        try:
            records.append((line_number, json.loads(line)))
        except ValueError as e:
            raise ParseError("invalid JSON (%s)" % e, filename, line_number)

    logger.debug("Read %d records from %s" % (len(records), filename))
    return records


def read_lines(filename):
    """ Returns (line_number, line) pairs of a UTF-8 text file, with the line
    terminator stripped. Line numbers start at 1. A filename of "-" reads
    standard input. """

    try:
        if filename == "-":
            lines = sys.stdin.read().split("\n")
        else:
            with io.open(filename, "r", encoding="utf-8") as fh:
                lines = fh.read().split("\n")
    except (IOError, OSError) as e:
        raise LoadError("Could not read %s: %s" % (filename, e))

    if len(lines) > 0 and lines[-1] == "":
        lines.pop()
    return [(ii + 1, line.rstrip("\r")) for ii, line in enumerate(lines)]


@contextmanager
def atomic_output(filename):
    """ Opens a temporary file next to filename for writing. The temporary file
    replaces filename when the block completes and is removed if the block
    raises, so a failed run never leaves a partial artifact behind.

    Example
    -------
    with atomic_output("candidates.jsonl") as fh:
        fh.write(line)
    """

    directory = os.path.dirname(os.path.abspath(filename))
    if not os.path.isdir(directory):
        os.makedirs(directory)
    fd, tmp_name = tempfile.mkstemp(prefix=".%s." % os.path.basename(filename),
                                    dir=directory)
    try:
        with io.open(fd, "w", encoding="utf-8", newline="\n") as fh:
            yield fh
        os.replace(tmp_name, filename)
        logger.debug("Wrote %s" % filename)
    except BaseException:
        if os.path.exists(tmp_name):
            os.remove(tmp_name)
        logger.debug("Removed partial output for %s" % filename)
        raise


def ngrams(tokens, order):
    """ Returns the contiguous n-grams of tokens as tuples, in order

    >>> ngrams(["a", "b", "c"], 2)
    [('a', 'b'), ('b', 'c')]
    """
    tokens = tuple(tokens)
    return [tokens[ii:ii + order] for ii in range(len(tokens) - order + 1)]


def find_occurrences(tokens, pattern):
    """ Returns the start positions of every contiguous occurrence of the token
    sequence pattern in tokens (occurrences may overlap) """

    pattern = tuple(pattern)
    width = len(pattern)
    if width == 0:
        return []
    tokens = tuple(tokens)
    return [ii for ii in range(len(tokens) - width + 1)
            if tokens[ii:ii + width] == pattern]
