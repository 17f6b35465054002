""" Multi-field documents, queries, relevance judgments and collection
statistics for the ranking experiments.
"""
import re
import logging
import numpy as np
from segrank.errors import ParseError, StatsError
from segrank.segcore import tokenize
from segrank.utils import read_jsonl, read_lines, ngrams, find_occurrences

logger = logging.getLogger(__name__)

FIELDS = ("url", "title", "body", "meta_keywords", "meta_description", "anchor",
          "associated_queries")
KEY_FIELD = "key_ngram"
GRADES = (0, 1, 2, 3, 4)
MAX_ORDER = 3

_WORD = re.compile(r"\w+", re.UNICODE)


def analyze(text):
    """ Lowercases text and splits it on non-word characters

    >>> analyze("http://www.Seven-Eleven.com/stores")
    ('http', 'www', 'seven', 'eleven', 'com', 'stores')
    """
    return tuple(_WORD.findall(text.lower()))


def ngram_length(tokens, order):
    """ The n-gram document length of a field: max(0, |field| - order + 1) """

    return max(0, len(tokens) - order + 1)


class Document(object):
    """ A document with its named text fields

    Parameters
    ----------
    id: string
    fields: dict
        field name to token sequence. Missing named fields are empty.

    Attributes
    ----------
    id: string
    fields: dict of token tuples
        always holds the seven named fields, plus KEY_FIELD once built
    """

    def __init__(self, id, fields):

        unknown = set(fields) - set(FIELDS) - set([KEY_FIELD])
        if len(unknown) > 0:
            raise ValueError("Unknown fields %s" % ", ".join(sorted(unknown)))
        self.id = id
        self.fields = dict((name, tuple()) for name in FIELDS)
        for name, tokens in fields.items():
            self.fields[name] = tuple(tokens)

    def field(self, name):
        return self.fields.get(name, tuple())

    @property
    def has_key_field(self):
        return KEY_FIELD in self.fields

    def with_key_field(self, tokens):
        """ Returns a copy of the document holding tokens as its key n-gram field """

        fields = dict(self.fields)
        fields[KEY_FIELD] = tuple(tokens)
        return Document(self.id, fields)

    def to_dict(self):
        record = dict(id=self.id)
        for name, tokens in self.fields.items():
            record[name] = " ".join(tokens)
        return record

    def __repr__(self):
        return "Document(%r)" % self.id


def document_from_record(record, filename=None, line_number=None):

    try:
        doc_id = str(record["id"])
        fields = dict((name, analyze(text)) for name, text in record.items() if name != "id")
        return Document(doc_id, fields)
    except (KeyError, TypeError, AttributeError, ValueError) as e:
        raise ParseError("not a document record (%s)" % e, filename, line_number)


def load_corpus(filename):
    """ Reads documents from JSON-lines, one document per line:
    `{"id": "d1", "title": "...", "body": "...", ...}`. Fields are analyzed on
    load. A corpus written by `segrank index` also carries "key_ngram".

    Returns
    -------
    list of Document, in file order

    Raises
    ------
    ParseError
        On malformed records, unknown fields or duplicate ids
    """
    documents = list()
    seen = set()
    for line_number, record in read_jsonl(filename):
        document = document_from_record(record, filename, line_number)
        if document.id in seen:
            raise ParseError("duplicate document id %r" % document.id, filename, line_number)
        seen.add(document.id)
        documents.append(document)

    logger.info("Loaded %d documents from %s" % (len(documents), filename))
    return documents


def load_queries(filename):
    """ Reads `query_id<TAB>query_text` lines

    Returns
    -------
    list of (query_id, Query) tuples, in file order
    """
    queries = list()
    seen = set()
    for line_number, line in read_lines(filename):
        if len(line.strip()) == 0:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError("expected 'query_id<TAB>query_text'", filename, line_number)
        query_id = parts[0].strip()
        if query_id in seen:
            raise ParseError("duplicate query id %r" % query_id, filename, line_number)
        seen.add(query_id)
        queries.append((query_id, tokenize(parts[1])))

    logger.info("Loaded %d queries from %s" % (len(queries), filename))
    return queries


class Judgment(object):
    """ A graded relevance label of one document for one query """

    def __init__(self, query_id, doc_id, grade):

        if grade not in GRADES:
            raise ValueError("grade %r is not one of %s" % (grade, GRADES))
        self.query_id = query_id
        self.doc_id = doc_id
        self.grade = grade

    def __repr__(self):
        return "Judgment(%r, %r, %d)" % (self.query_id, self.doc_id, self.grade)


def load_judgments(filename):
    """ Reads `query_id<TAB>doc_id<TAB>grade` lines, grades 0 to 4

    Returns
    -------
    list of Judgment, in file order
    """
    judgments = list()
    seen = set()
    for line_number, line in read_lines(filename):
        if len(line.strip()) == 0:
            continue
        parts = [part.strip() for part in line.split("\t")]
        if len(parts) != 3:
            raise ParseError("expected 'query_id<TAB>doc_id<TAB>grade'", filename, line_number)
        try:
            judgment = Judgment(parts[0], parts[1], int(parts[2]))
        except ValueError as e:
            raise ParseError(str(e), filename, line_number)
        if (judgment.query_id, judgment.doc_id) in seen:
            raise ParseError("duplicate judgment for %s/%s" % (parts[0], parts[1]),
                             filename, line_number)
        seen.add((judgment.query_id, judgment.doc_id))
        judgments.append(judgment)

    logger.info("Loaded %d judgments from %s" % (len(judgments), filename))
    return judgments


class FieldStats(object):
    """ Statistics of one field over a collection

    Document frequencies are computed on demand, since phrase n-grams can be
    longer than any order worth indexing, and memoised.

    Attributes
    ----------
    name: string
    doc_count: int
    """

    def __init__(self, name, documents):

        self.name = name
        self.doc_count = len(documents)
        # padded with spaces so a substring test is a contiguous token match
        self._texts = [" %s " % " ".join(document.field(name)) for document in documents]
        lengths = [len(document.field(name)) for document in documents]
        self._avglen = dict()
        for order in range(1, MAX_ORDER + 1):
            if self.doc_count == 0:
                self._avglen[order] = 0.0
            else:
                self._avglen[order] = float(np.mean([max(0, length - order + 1)
                                                     for length in lengths]))
        self._df = dict()

    def avglen(self, order):
        """ Average n-gram document length for an order between 1 and 3 """

        try:
            return self._avglen[order]
        except KeyError:
            raise StatsError("No average length for order %r" % order)

    def df(self, gram):
        """ Number of documents whose field contains the token sequence gram """

        gram = tuple(gram)
        if gram not in self._df:
            needle = " %s " % " ".join(gram)
            self._df[gram] = sum(1 for text in self._texts if needle in text)
        return self._df[gram]

    def __str__(self):
        return "FieldStats(%s): %d documents, avglen %.2f" % (self.name, self.doc_count,
                                                             self._avglen[1])


class CollectionStats(object):
    """ Per-field statistics of a document collection

    Parameters
    ----------
    documents: list of Document
    fields: sequence of field names. Defaults to the seven named fields, plus
        KEY_FIELD when every document carries it.
    """

    def __init__(self, documents, fields=None):

        if fields is None:
            fields = FIELDS
            if len(documents) > 0 and all(document.has_key_field for document in documents):
                fields = FIELDS + (KEY_FIELD,)
        self.doc_count = len(documents)
        self.fields = dict((name, FieldStats(name, documents)) for name in fields)
        logger.debug("Collected statistics of %d fields over %d documents" % (
            len(self.fields), self.doc_count))

    def __getitem__(self, name):

        try:
            return self.fields[name]
        except KeyError:
            raise StatsError("No statistics for field %r" % name)

    def __contains__(self, name):
        return name in self.fields


def term_frequency(tokens, gram):
    """ Number of contiguous occurrences of gram in tokens """

    return len(find_occurrences(tokens, gram))


def all_ngrams(tokens, max_order=MAX_ORDER):
    """ Every n-gram of tokens for orders 1..max_order, as (order, position, gram) """

    return [(order, position, gram)
            for order in range(1, max_order + 1)
            for position, gram in enumerate(ngrams(tokens, order))]
