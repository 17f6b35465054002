""" Linear combination of relevance features, trained by coordinate ascent on
mean NDCG, and the text format of feature matrices.

A feature matrix file holds one line per judged document:

    2 qid:q1 1:0.5 2:0 3:1.25 # d7

Lines of a query are contiguous and keep the judgment file order. Leading
`# feature <index> <name>` lines name the columns.
"""
import math
import logging
import numpy as np
from segrank.errors import DegenerateLabelError, ParseError, ConfigError
from segrank.relevance.metrics import ndcg_at, mean_ndcg
from segrank.utils import read_lines, atomic_output

logger = logging.getLogger(__name__)

COMBINER_VERSION = 1
DEFAULT_STEPS = tuple(2.0 ** exponent for exponent in range(-4, 5))


class QueryRows(object):
    """ The judged documents of one query

    Attributes
    ----------
    query_id: string
    doc_ids: list of strings
    matrix: numpy array (documents x features)
    grades: numpy array of ints
    """

    def __init__(self, query_id, doc_ids, matrix, grades):

        self.query_id = query_id
        self.doc_ids = list(doc_ids)
        self.matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        self.grades = np.asarray(grades, dtype=int)
        if self.matrix.shape[0] != len(self.doc_ids) or self.grades.shape != (len(self.doc_ids),):
            raise ValueError("Query %s: %d documents, %d feature rows and %d grades" % (
                query_id, len(self.doc_ids), self.matrix.shape[0], self.grades.size))

    def __len__(self):
        return len(self.doc_ids)


class RankingDataset(object):
    """ Feature rows of judged documents, grouped by query

    Parameters
    ----------
    names: sequence of feature names
    queries: list of QueryRows
    """

    def __init__(self, names, queries=None):

        self.names = tuple(names)
        self.queries = list(queries or list())

    @property
    def dimension(self):
        return len(self.names)

    def add(self, query_id, doc_ids, matrix, grades):

        rows = QueryRows(query_id, doc_ids, np.reshape(matrix, (len(doc_ids), self.dimension)), grades)
        self.queries.append(rows)
        return rows

    def subset(self, indices):
        return RankingDataset(self.names, [self.queries[index] for index in indices])

    def __len__(self):
        return len(self.queries)

    def __iter__(self):
        return iter(self.queries)

    @property
    def grades(self):
        if len(self.queries) == 0:
            return np.zeros(0, dtype=int)
        return np.concatenate([rows.grades for rows in self.queries])


def _format_value(value):

    value = float(value)
    if value == int(value) and abs(value) < 1e15:
        return "%d" % value
    return repr(value)


def dumps_matrix(dataset):
    """ The text form of a dataset """

    lines = ["# feature %d %s" % (index, name) for index, name in enumerate(dataset.names, 1)]
    for rows in dataset:
        for doc_id, vector, grade in zip(rows.doc_ids, rows.matrix, rows.grades):
            cells = " ".join("%d:%s" % (index, _format_value(value))
                             for index, value in enumerate(vector, 1))
            lines.append("%d qid:%s %s # %s" % (grade, rows.query_id, cells, doc_id))
    return "\n".join(lines) + "\n"


def write_matrix(dataset, filename):

    with atomic_output(filename) as fh:
        fh.write(dumps_matrix(dataset))
    logger.info("Wrote %d queries x %d features to %s" % (len(dataset), dataset.dimension, filename))


def read_matrix(filename):
    """ Reads a feature matrix file

    Features absent from a line are 0. Without `# feature` lines, columns
    are named f1, f2, ...

    Returns
    -------
    RankingDataset instance
    """
    names = dict()
    records = list()
    for line_number, line in read_lines(filename):
        if len(line.strip()) == 0:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 3 and parts[0] == "feature":
                try:
                    names[int(parts[1])] = parts[2]
                except ValueError:
                    raise ParseError("bad feature index %r" % parts[1], filename, line_number)
            continue
        body, _, doc_id = line.partition("#")
        parts = body.split()
        try:
            grade = int(parts[0])
            if not parts[1].startswith("qid:"):
                raise ValueError("expected qid:<id>, got %r" % parts[1])
            cells = dict()
            for cell in parts[2:]:
                index, value = cell.split(":", 1)
                cells[int(index)] = float(value)
        except (IndexError, ValueError) as e:
            raise ParseError("not a feature line (%s)" % e, filename, line_number)
        doc_id = doc_id.strip() or "%s:%d" % (filename, line_number)
        records.append((parts[1][4:], doc_id, grade, cells))

    dimension = max([max(cells) for _, _, _, cells in records if len(cells) > 0] +
                    list(names) + [0])
    feature_names = [names.get(index, "f%d" % index) for index in range(1, dimension + 1)]
    dataset = RankingDataset(feature_names)

    grouped = list()
    for query_id, doc_id, grade, cells in records:
        if len(grouped) == 0 or grouped[-1][0] != query_id:
            if any(query_id == group[0] for group in grouped):
                raise ParseError("lines of query %s are not contiguous" % query_id, filename)
            grouped.append((query_id, list()))
        vector = np.zeros(dimension)
        for index, value in cells.items():
            vector[index - 1] = value
        grouped[-1][1].append((doc_id, vector, grade))

    for query_id, rows in grouped:
        dataset.add(query_id, [row[0] for row in rows], np.vstack([row[1] for row in rows]),
                    [row[2] for row in rows])

    logger.info("Read %d queries x %d features from %s" % (len(dataset), dimension, filename))
    return dataset


class LinearCombiner(object):
    """ A weighted sum of features

    Attributes
    ----------
    names: tuple of strings
    weights: numpy array
    degenerate: bool
        True when training found no weighting better than a constant
    """

    def __init__(self, names, weights, degenerate=False):

        self.names = tuple(names)
        self.weights = np.asarray(weights, dtype=float)
        if self.weights.shape != (len(self.names),):
            raise ValueError("Got %d weights for %d features" % (self.weights.size, len(self.names)))
        self.degenerate = bool(degenerate)

    @property
    def dimension(self):
        return len(self.names)

    def scores(self, matrix):
        return np.atleast_2d(np.asarray(matrix, dtype=float)).dot(self.weights)

    def rank(self, matrix):
        """ Row indices, best first; ties keep document order """

        return np.argsort(-self.scores(matrix), kind="mergesort")

    def ranked_grades(self, rows):
        return [int(grade) for grade in rows.grades[self.rank(rows.matrix)]]

    def save(self, filename):

        lines = ["# segrank linear combiner",
                 "version\t%d" % COMBINER_VERSION,
                 "dimension\t%d" % self.dimension,
                 "degenerate\t%d" % int(self.degenerate)]
        lines += ["%s\t%r" % (name, float(weight)) for name, weight in zip(self.names, self.weights)]
        with atomic_output(filename) as fh:
            fh.write("\n".join(lines) + "\n")
        logger.info("Saved %d-feature combiner to %s" % (self.dimension, filename))

    @classmethod
    def load(cls, filename):

        header = dict()
        names, weights = list(), list()
        for line_number, line in read_lines(filename):
            if len(line.strip()) == 0 or line.startswith("#"):
                continue
            fields = line.split("\t")
            try:
                if len(fields) != 2:
                    raise ValueError("expected 2 fields, got %d" % len(fields))
                if fields[0] in ("version", "dimension", "degenerate"):
                    header[fields[0]] = int(fields[1])
                else:
                    names.append(fields[0])
                    weights.append(float(fields[1]))
            except ValueError as e:
                raise ParseError(str(e), filename, line_number)

        if header.get("version") != COMBINER_VERSION:
            raise ParseError("unsupported combiner version %r" % header.get("version"), filename)
        if header.get("dimension") != len(names):
            raise ParseError("combiner declares %r features but holds %d" % (
                header.get("dimension"), len(names)), filename)
        return cls(names, weights, degenerate=bool(header.get("degenerate", 0)))


def pessimistic_grades(scores, grades):
    """ Grades ordered by descending score, tied documents worst grade first """

    order = np.lexsort((grades, -np.asarray(scores, dtype=float)))
    return [int(grade) for grade in np.asarray(grades)[order]]


def _training_metric(weights, dataset, k):

    return mean_ndcg([pessimistic_grades(rows.matrix.dot(weights), rows.grades)
                      for rows in dataset], k)


def split_validation(n_queries, fraction, seed):
    """ Splits query indices into training and validation indices with a
    seeded permutation. Without room for a validation query, the training
    queries validate themselves. """

    if not 0 <= fraction < 1:
        raise ConfigError("Validation fraction must be in [0, 1), got %r" % fraction)
    order = np.random.RandomState(seed).permutation(n_queries)
    n_validation = min(int(math.floor(fraction * n_queries)), n_queries - 1)
    if n_validation <= 0:
        indices = sorted(order.tolist())
        return indices, indices
    return sorted(order[n_validation:].tolist()), sorted(order[:n_validation].tolist())


def train_ltr(dataset, max_rounds=25, patience=5, validation_fraction=0.25, metric_k=10,
              seed=0, steps=DEFAULT_STEPS):
    """ Learns linear weights by coordinate ascent on mean NDCG@metric_k

    Each round visits the features in order and moves one weight at a time
    by the step (from steps, either sign) that most improves the training
    metric, then rescales the weights to unit L1 norm. Tied scores count
    pessimistically during training. The weights that did best on the
    validation queries are kept; training stops after a round without
    improvement or after patience rounds without validation gain.

    Parameters
    ----------
    dataset: RankingDataset instance
    max_rounds: int
    patience: int
    validation_fraction: float in [0, 1)
    metric_k: int
    seed: int
        seeds the training/validation split

    Returns
    -------
    LinearCombiner instance. It is flagged degenerate, with zero weights,
    when no weighting beats scoring all documents alike.

    Raises
    ------
    DegenerateLabelError
        If the judgments hold fewer than two distinct grades
    """
    grades = set(dataset.grades.tolist())
    if len(grades) < 2:
        raise DegenerateLabelError("Judgments hold %d distinct grade(s), need at least 2" % len(grades))

    train_indices, validation_indices = split_validation(len(dataset), validation_fraction, seed)
    training = dataset.subset(train_indices)
    validation = dataset.subset(validation_indices)
    logger.info("Training combiner on %d queries, validating on %d" % (
        len(training), len(validation)))

    weights = np.zeros(dataset.dimension)
    train_score = _training_metric(weights, training, metric_k)
    best = (_training_metric(weights, validation, metric_k), weights.copy())
    stale = 0
    for round_ in range(1, max_rounds + 1):
        improved = False
        for dd in range(dataset.dimension):
            base = weights[dd]
            choice = None
            for step in steps:
                for sign in (1.0, -1.0):
                    trial = weights.copy()
                    trial[dd] = base + sign * step
                    score = _training_metric(trial, training, metric_k)
                    if score > train_score:
                        train_score, choice = score, trial
            if choice is not None:
                weights = choice
                improved = True

        norm = np.sum(np.abs(weights))
        if norm > 0:
            weights = weights / norm

        validation_score = _training_metric(weights, validation, metric_k)
        logger.debug("Round %d: training %.4f, validation %.4f" % (
            round_, train_score, validation_score))
        if validation_score >= best[0] and improved:
            best = (validation_score, weights.copy())
            stale = 0
        else:
            stale += 1
        if not improved or stale >= patience:
            break

    degenerate = not np.any(best[1] != 0)
    if degenerate:
        logger.warning("No feature weighting ranks better than a constant; the combiner is degenerate")
    logger.info("Trained combiner: validation NDCG@%d %.4f" % (metric_k, best[0]))
    return LinearCombiner(dataset.names, best[1], degenerate=degenerate)


def evaluate_ranking(combiner, dataset, ks=(1, 5, 10)):
    """ NDCG at each cutoff for each query, ranking ties by document order

    Returns
    -------
    tuple (rows, means): rows is a list of (query_id, [ndcg@k ...]) and means
    the list of mean values per cutoff
    """
    if combiner.dimension != dataset.dimension:
        raise ConfigError("Combiner has %d features, the feature matrix %d" % (
            combiner.dimension, dataset.dimension))
    rows = list()
    for query_rows in dataset:
        ranked = combiner.ranked_grades(query_rows)
        rows.append((query_rows.query_id, [ndcg_at(ranked, k) for k in ks]))
    means = [float(np.mean([values[ii] for _, values in rows])) if len(rows) > 0 else 0.0
             for ii in range(len(ks))]
    return rows, means
