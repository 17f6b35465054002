""" Re-ranking of WBN candidates with a linear max-margin model.

Each candidate of a CandidateList is described by four groups of features:
WBN quantities, mutual information between and within segments, the shape
of the segmentation, and its similarity to the top candidate. Training uses
the candidate matching the gold segmentation as the positive instance and the
other candidates of the same list as negatives.
"""
import math
import itertools
import logging
import numpy as np
from segrank.errors import (ConfigError,
                            MembershipError,
                            AlignmentError,
                            TrainingDataError,
                            ParseError)
from segrank.stats import normalize
from segrank.utils import read_lines, atomic_output

logger = logging.getLogger(__name__)

# words which tend to be a segment on their own
DEFAULT_INDICATOR_WORDS = ("and", "or", "vs", "the", "a", "an", "of", "for", "in",
                           "on", "at", "to", "with", "by", "from", "free", "new", "best")

LENGTH_BUCKETS = 6
MODEL_VERSION = 1


def feature_names(indicator_words=DEFAULT_INDICATOR_WORDS):
    """ Returns the ordered feature names for a given indicator word list """

    names = ["rank", "score"]
    names += ["weight_len%d" % length for length in range(1, LENGTH_BUCKETS)]
    names += ["weight_len%dplus" % LENGTH_BUCKETS]
    names += ["first_weight",
              "mean_weight",
              "segment_count",
              "mean_length",
              "max_title_length",
              "max_mi_segments",
              "max_mi_break_words",
              "min_mi_inner_words"]
    names += ["single:%s" % word for word in indicator_words]
    names += ["two_word_edge",
              "capitalized_segment",
              "one_multiword",
              "one_word_count",
              "split_of_top",
              "merge_of_top",
              "moved_break",
              "same_breaks",
              "same_segments"]
    return names


class RerankFeatures(object):
    """ A named, fixed-order feature vector

    Attributes
    ----------
    names: tuple of strings
    values: numpy array of floats
    """

    def __init__(self, names, values):

        self.names = tuple(names)
        self.values = np.asarray(values, dtype=float)
        if self.values.shape != (len(self.names),):
            raise ValueError("Got %d values for %d feature names" % (
                self.values.size, len(self.names)))

    def __getitem__(self, name):
        return self.values[self.names.index(name)]

    def __len__(self):
        return len(self.names)

    def as_dict(self):
        return dict(zip(self.names, self.values.tolist()))


def _is_capitalized(token):

    return len(token) > 0 and token[0].isupper()


def _max_or_zero(values):

    return max(values) if len(values) > 0 else 0.0


class FeatureExtractor(object):
    """ Computes re-ranking features of candidates

    Parameters
    ----------
    stats: NGramStats instance
        statistics the WBN weights were computed with
    titles: TitleSet instance
    mi_stats: NGramStats instance
        statistics used for mutual information features. Defaults to stats.
    indicator_words: sequence of strings
        words which tend to form a one-word segment

    Attributes
    ----------
    names: tuple of strings
        the feature order, fixed for the lifetime of the extractor
    """

    def __init__(self, stats, titles, mi_stats=None, indicator_words=DEFAULT_INDICATOR_WORDS):

        self.stats = stats
        self.titles = titles
        self.mi_stats = stats if mi_stats is None else mi_stats
        self.indicator_words = tuple(word.lower() for word in indicator_words)
        self.names = tuple(feature_names(self.indicator_words))

    @property
    def dimension(self):
        return len(self.names)

    def extract(self, candidate, candidates):
        """ Feature vector of one candidate of a candidate list

        Parameters
        ----------
        candidate: ScoredSegmentation instance
        candidates: CandidateList instance containing candidate

        Returns
        -------
        RerankFeatures instance

        Raises
        ------
        MembershipError
            If candidate is not in candidates
        """
        rank = candidates.rank_of(candidate.segmentation)
        if rank is None or candidate.segmentation.query != candidates.query:
            raise MembershipError("%r is not a candidate for %r" % (
                candidate.segmentation.text, candidates.query))

        segmentation = candidate.segmentation
        tokens = segmentation.query.tokens
        segments = segmentation.segments
        weights = candidate.segment_weights
        lengths = [len(segment) for segment in segments]
        m = segmentation.m
        mi = self.mi_stats.pmi

        values = [float(rank), float(candidate.score)]

        # weights summed per segment length
        buckets = [0.0] * LENGTH_BUCKETS
        for weight, length in zip(weights, lengths):
            buckets[min(length, LENGTH_BUCKETS) - 1] += weight
        values += buckets

        title_lengths = [length for segment, length in zip(segments, lengths)
                         if normalize(segment) in self.titles]
        values += [float(weights[0]),
                   float(sum(weights)) / m,
                   float(m),
                   float(len(tokens)) / m,
                   float(_max_or_zero(title_lengths))]

        # mutual information
        if m > 1:
            between_segments = [mi(segments[ii], segments[ii + 1]) for ii in range(m - 1)]
            across_breaks = [mi(tokens[ii:ii + 1], tokens[ii + 1:ii + 2])
                             for ii, bb in enumerate(segmentation.breaks) if bb == 1]
        else:
            between_segments = across_breaks = list()
        inside = [mi(tokens[ii:ii + 1], tokens[ii + 1:ii + 2])
                  for ii, bb in enumerate(segmentation.breaks) if bb == 0]
        values += [_max_or_zero(between_segments),
                   _max_or_zero(across_breaks),
                   min(inside) if len(inside) > 0 else 0.0]

        # shape of the segmentation
        singles = set(segment[0].lower() for segment in segments if len(segment) == 1)
        values += [float(word in singles) for word in self.indicator_words]
        multiword = sum(1 for length in lengths if length >= 2)
        values += [float(lengths[0] == 2 or lengths[-1] == 2),
                   float(any(length >= 2 and all(_is_capitalized(token) for token in segment)
                             for segment, length in zip(segments, lengths))),
                   float(multiword == 1),
                   float(lengths.count(1))]

        # similarity to the top candidate
        top = candidates.top.segmentation
        differs = [ii for ii, (bb, bh) in enumerate(zip(segmentation.breaks, top.breaks))
                   if bb != bh]
        split = len(differs) == 1 and segmentation.breaks[differs[0]] == 1
        merge = len(differs) == 1 and segmentation.breaks[differs[0]] == 0
        moved = (len(differs) == 2 and differs[1] == differs[0] + 1 and
                 segmentation.breaks[differs[0]] != segmentation.breaks[differs[1]])
        values += [float(split),
                   float(merge),
                   float(moved),
                   float(len(tokens) - 1 - len(differs)),
                   float(len(set(segmentation.spans) & set(top.spans)))]

        return RerankFeatures(self.names, values)

    def extract_all(self, candidates):
        """ Returns a (len(candidates), dimension) matrix, rows in rank order """

        return np.vstack([self.extract(candidate, candidates).values
                          for candidate in candidates])


def extract_features(candidate, candidates, stats, titles, mi_stats=None,
                     indicator_words=DEFAULT_INDICATOR_WORDS):
    """ Module level form of FeatureExtractor.extract """

    extractor = FeatureExtractor(stats, titles, mi_stats=mi_stats,
                                 indicator_words=indicator_words)
    return extractor.extract(candidate, candidates)


class TrainingInstance(object):
    """ One labeled candidate

    Attributes
    ----------
    features: RerankFeatures instance
    label: int
        +1 if the candidate equals the gold segmentation, -1 otherwise
    group: hashable
        identifier of the query the candidate belongs to
    gold_absent: bool
        True if no candidate of the group matches the gold segmentation
    """

    def __init__(self, features, label, group, gold_absent=False):

        self.features = features
        self.label = label
        self.group = group
        self.gold_absent = gold_absent


def build_instances(candidates, gold, extractor, group=None):
    """ Labels every candidate of a list against the gold segmentation

    Parameters
    ----------
    candidates: CandidateList instance
    gold: Segmentation instance over the same query
    extractor: FeatureExtractor instance
    group: hashable
        group identifier. Defaults to the query text.

    Returns
    -------
    list of TrainingInstance, in rank order

    Raises
    ------
    AlignmentError
        If gold is a segmentation of another query
    """
    if gold.query != candidates.query:
        raise AlignmentError("Gold segmentation %r does not belong to query %r" % (
            gold.text, candidates.query))

    if group is None:
        group = " ".join(candidates.query.tokens)
    gold_absent = gold not in candidates
    if gold_absent:
        logger.warning("Gold segmentation %r is not among the top %d candidates" % (
            gold.text, candidates.k))

    return [TrainingInstance(extractor.extract(candidate, candidates),
                             1 if candidate.breaks == gold.breaks else -1,
                             group,
                             gold_absent=gold_absent)
            for candidate in candidates]


class LinearModel(object):
    """ A linear decision function w.f + bias over re-ranking features

    Parameters
    ----------
    names: sequence of strings
        feature names, aligned with weights
    weights: array of floats
    bias: float
    c: float
        trade-off between margin and training error
    j: float
        cost factor of errors on positive instances
    b: bool
        whether the bias was fit (the bias is exactly 0 when it was not)
    scaling: tuple of (mean, std) arrays, or None
        z-scoring applied to features before the decision function
    """

    def __init__(self, names, weights, bias=0.0, c=1.0, j=1.0, b=True, scaling=None):

        self.names = tuple(names)
        self.weights = np.asarray(weights, dtype=float)
        if self.weights.shape != (len(self.names),):
            raise ValueError("Got %d weights for %d features" % (self.weights.size,
                                                                 len(self.names)))
        self.bias = float(bias) if b else 0.0
        self.c = float(c)
        self.j = float(j)
        self.b = bool(b)
        self.scaling = scaling

    @property
    def dimension(self):
        return len(self.names)

    @classmethod
    def zeros(cls, names):
        """ The model which scores every candidate 0, so re-ranking keeps the
        WBN order """

        return cls(names, np.zeros(len(names)), bias=0.0, b=False)

    def transform(self, matrix):
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        if self.scaling is not None:
            mean, std = self.scaling
            matrix = (matrix - mean) / std
        return matrix

    def decision(self, matrix):
        """ Decision values of the rows of matrix """

        return self.transform(matrix).dot(self.weights) + self.bias

    def save(self, filename):
        """ Writes the model as versioned text. The file is replaced only once
        it has been written completely. """

        with atomic_output(filename) as fh:
            fh.write(self.dumps())
        logger.info("Saved %d-feature model to %s" % (self.dimension, filename))

    def dumps(self):
        lines = ["# segrank re-ranking model",
                 "version\t%d" % MODEL_VERSION,
                 "dimension\t%d" % self.dimension,
                 "b\t%d" % int(self.b),
                 "c\t%r" % self.c,
                 "j\t%r" % self.j,
                 "scaling\t%s" % ("none" if self.scaling is None else "zscore")]
        lines += ["%s\t%r" % (name, float(weight)) for name, weight in zip(self.names, self.weights)]
        lines.append("bias\t%r" % self.bias)
        if self.scaling is not None:
            lines += ["scale\t%s\t%r\t%r" % (name, float(mu), float(sigma))
                      for name, mu, sigma in zip(self.names, *self.scaling)]
        return "\n".join(lines) + "\n"

    @classmethod
    def load(cls, filename):
        """ Reads a model written by save

        Raises
        ------
        LoadError
            If the file cannot be read
        ParseError
            If the file is not a model file of a known version
        """
        header = dict()
        names, weights, scale = list(), list(), dict()
        bias = None
        for line_number, line in read_lines(filename):
            if len(line.strip()) == 0 or line.startswith("#"):
                continue
            fields = line.split("\t")
            try:
                if fields[0] == "scale" and len(fields) == 4:
                    scale[fields[1]] = (float(fields[2]), float(fields[3]))
                elif len(fields) != 2:
                    raise ValueError("expected 2 fields, got %d" % len(fields))
                elif fields[0] in ("version", "dimension", "b"):
                    header[fields[0]] = int(fields[1])
                elif fields[0] in ("c", "j"):
                    header[fields[0]] = float(fields[1])
                elif fields[0] == "scaling":
                    header[fields[0]] = fields[1]
                elif fields[0] == "bias":
                    bias = float(fields[1])
                else:
                    names.append(fields[0])
                    weights.append(float(fields[1]))
            except ValueError as e:
                raise ParseError(str(e), filename, line_number)

        if header.get("version") != MODEL_VERSION:
            raise ParseError("unsupported model version %r" % header.get("version"), filename)
        if header.get("dimension") != len(names) or bias is None:
            raise ParseError("model declares %r features but holds %d" % (
                header.get("dimension"), len(names)), filename)
        scaling = None
        if header.get("scaling") == "zscore":
            if set(scale) != set(names):
                raise ParseError("z-scored model without complete scale lines", filename)
            scaling = (np.array([scale[name][0] for name in names]),
                       np.array([scale[name][1] for name in names]))

        logger.info("Loaded %d-feature model from %s" % (len(names), filename))
        return cls(names, weights, bias=bias, c=header.get("c", 1.0), j=header.get("j", 1.0),
                   b=bool(header.get("b", 1)), scaling=scaling)


def objective(weights, bias, matrix, labels, c, j):
    """ Primal objective 0.5 * |w|^2 + c * sum(cost_i * hinge_i), where cost_i is
    j for positive instances and 1 for negative ones. The bias is not
    regularized. """

    labels = np.asarray(labels, dtype=float)
    margins = labels * (np.asarray(matrix, dtype=float).dot(weights) + bias)
    costs = np.where(labels > 0, j, 1.0)
    return 0.5 * float(np.dot(weights, weights)) + \
        c * float(np.sum(costs * np.maximum(0.0, 1.0 - margins)))


def instances_to_arrays(instances):
    """ Stacks instances into a feature matrix and a label vector """

    matrix = np.vstack([instance.features.values for instance in instances])
    labels = np.array([instance.label for instance in instances], dtype=float)
    return matrix, labels


def train(instances, c=1.0, j=1.0, b=True, max_epochs=100000, tolerance=1e-6,
          scaling="none", check_every=100):
    """ Fits an L2-regularized hinge-loss linear classifier

    Full-batch subgradient descent on the primal objective, with the step
    1 / (lambda t) for lambda = 1 / (c N) and projection of w onto the ball
    that contains the optimum. The best iterate seen is returned. Every
    check_every epochs the best objective is compared with the one at the
    previous check; training stops when it improved by less than tolerance
    (relative to max(1, objective)). The procedure has no random component.

    Parameters
    ----------
    instances: list of TrainingInstance
    c: float
        trade-off between training error and margin (> 0)
    j: float
        cost factor of training errors on positive instances (> 0)
    b: bool
        whether to fit a bias term. If False the bias stays exactly 0.
    max_epochs: int
    tolerance: float
    scaling: string
        "none" or "zscore"

    Returns
    -------
    LinearModel instance

    Raises
    ------
    TrainingDataError
        If the instances do not hold both classes
    ConfigError
        If c, j or scaling are invalid
    """
    if c <= 0 or j <= 0:
        raise ConfigError("c and j must be positive, got c=%r j=%r" % (c, j))
    if scaling not in ("none", "zscore"):
        raise ConfigError("Unknown feature scaling %r" % scaling)
    if len(instances) == 0:
        raise TrainingDataError("No training instances")

    names = instances[0].features.names
    matrix, labels = instances_to_arrays(instances)
    n_pos = int(np.sum(labels > 0))
    if n_pos == 0 or n_pos == len(labels):
        raise TrainingDataError("Training data holds a single class (%d positive of %d)" % (
            n_pos, len(labels)))

    model_scaling = None
    if scaling == "zscore":
        mean = matrix.mean(axis=0)
        std = matrix.std(axis=0)
        std[std == 0] = 1.0
        model_scaling = (mean, std)
        matrix = (matrix - mean) / std

    n_rows, dimension = matrix.shape
    costs = np.where(labels > 0, j, 1.0)
    weighted = costs * labels
    radius = math.sqrt(2.0 * c * float(np.sum(costs)))

    weights = np.zeros(dimension)
    bias = 0.0
    best = (objective(weights, bias, matrix, labels, c, j), weights.copy(), bias)
    checkpoint = best[0]

    logger.info("Training on %d instances (%d positive), c=%r j=%r b=%d" % (
        n_rows, n_pos, c, j, int(b)))
    for epoch in range(1, max_epochs + 1):
        margins = labels * (matrix.dot(weights) + bias)
        violated = margins < 1.0
        current = 0.5 * float(np.dot(weights, weights)) + \
            c * float(np.sum(costs * np.maximum(0.0, 1.0 - margins)))
        if current < best[0]:
            best = (current, weights.copy(), bias)

        step = c / epoch
        weights = (1.0 - 1.0 / epoch) * weights + step * matrix[violated].T.dot(weighted[violated])
        if b:
            bias += step * float(np.sum(weighted[violated]))
        norm = float(np.sqrt(np.dot(weights, weights)))
        if norm > radius:
            weights *= radius / norm

        if epoch % check_every == 0:
            if checkpoint - best[0] < tolerance * max(1.0, abs(best[0])):
                logger.debug("Converged after %d epochs, objective %.6g" % (epoch, best[0]))
                break
            checkpoint = best[0]

    final = objective(weights, bias, matrix, labels, c, j)
    if final < best[0]:
        best = (final, weights.copy(), bias)

    logger.info("Trained model with objective %.6g" % best[0])
    return LinearModel(names, best[1], bias=best[2], c=c, j=j, b=b, scaling=model_scaling)


def best_index(model, matrix):
    """ Index of the row with the largest decision value; ties go to the
    earliest row, i.e. the better WBN rank """

    values = model.decision(matrix)
    return int(np.argmax(values))


def rerank(candidates, model, extractor):
    """ Picks the final segmentation among the candidates

    Parameters
    ----------
    candidates: CandidateList instance (non-empty)
    model: LinearModel instance
    extractor: FeatureExtractor instance with the model's feature order

    Returns
    -------
    Segmentation instance
    """
    if extractor.names != model.names:
        raise ConfigError("Model features do not match the extractor's features")
    matrix = extractor.extract_all(candidates)
    return candidates[best_index(model, matrix)].segmentation


class QueryGroup(object):
    """ Precomputed features of one annotated query, reused across training
    runs during a parameter sweep

    Attributes
    ----------
    candidates: CandidateList instance
    gold: Segmentation instance
    matrix: numpy array, one row per candidate
    labels: numpy array of +1 / -1
    gold_rank: int or None
    """

    def __init__(self, candidates, gold, extractor, group=None):

        self.candidates = candidates
        self.gold = gold
        self.instances = build_instances(candidates, gold, extractor, group=group)
        self.matrix, self.labels = instances_to_arrays(self.instances)
        self.gold_rank = candidates.rank_of(gold)

    @property
    def gold_absent(self):
        return self.gold_rank is None

    def correct(self, model):
        return self.gold_rank is not None and best_index(model, self.matrix) + 1 == self.gold_rank


def build_groups(dataset, extractor):
    """ Builds a QueryGroup for each (CandidateList, gold) pair """

    return [QueryGroup(candidates, gold, extractor, group=index)
            for index, (candidates, gold) in enumerate(dataset)]


def segmentation_accuracy(model, groups):
    """ Fraction of groups for which the model picks the gold segmentation """

    if len(groups) == 0:
        return 0.0
    return float(sum(1 for group in groups if group.correct(model))) / len(groups)


def train_groups(groups, c, j, b, drop_absent=False, **train_kwargs):
    """ Trains on the instances of groups, optionally leaving out the groups
    whose gold segmentation is not among the candidates """

    instances = list()
    for group in groups:
        if drop_absent and group.gold_absent:
            continue
        instances.extend(group.instances)
    return train(instances, c=c, j=j, b=b, **train_kwargs)


def expand_grid(grid):
    """ Lists the (c, j, b) points of a grid in c-major order

    Raises
    ------
    ConfigError
        If one of the parameter ranges is empty or missing
    """
    try:
        ranges = [list(grid["c"]), list(grid["j"]), list(grid["b"])]
    except (KeyError, TypeError):
        raise ConfigError("A grid needs 'c', 'j' and 'b' ranges, got %r" % (grid,))
    if any(len(values) == 0 for values in ranges):
        raise ConfigError("Empty parameter grid: %r" % (grid,))
    return [(float(c), float(j), bool(b)) for c, j, b in itertools.product(*ranges)]


def sweep(groups, grid, folds=4, drop_absent=False, **train_kwargs):
    """ K-fold cross validation of every grid point

    Query i belongs to fold i mod folds. Each grid point scores the mean
    segmentation accuracy over the folds. A fold whose training part holds a
    single class cannot be trained; it scores 0 and is counted in
    skipped_folds.

    Parameters
    ----------
    groups: list of QueryGroup
    grid: dict with "c", "j" and "b" lists
    folds: int (>= 2)

    Returns
    -------
    list of dictionaries with keys c, j, b, accuracy, fold_accuracies and
    skipped_folds, in grid order
    """
    points = expand_grid(grid)
    if folds < 2:
        raise ConfigError("Cross validation needs at least 2 folds, got %r" % folds)
    if len(groups) < folds:
        raise TrainingDataError("%d annotated queries cannot fill %d folds" % (len(groups), folds))

    splits = list()
    for fold in range(folds):
        held_out = [group for index, group in enumerate(groups) if index % folds == fold]
        kept = [group for index, group in enumerate(groups) if index % folds != fold]
        splits.append((kept, held_out))

    table = list()
    for c, j, b in points:
        fold_accuracies = list()
        skipped = 0
        for fold, (kept, held_out) in enumerate(splits):
            try:
                model = train_groups(kept, c, j, b, drop_absent=drop_absent, **train_kwargs)
            except TrainingDataError as e:
                logger.warning("c=%r j=%r b=%d: fold %d not trained, scored 0: %s" % (
                    c, j, int(b), fold, e))
                fold_accuracies.append(0.0)
                skipped += 1
                continue
            fold_accuracies.append(segmentation_accuracy(model, held_out))
        accuracy = float(np.mean(fold_accuracies))
        logger.info("c=%r j=%r b=%d: accuracy %.4f" % (c, j, int(b), accuracy))
        table.append(dict(c=c, j=j, b=b, accuracy=accuracy, fold_accuracies=fold_accuracies,
                          skipped_folds=skipped))
    return table


def best_point(table):
    """ The grid point with the highest accuracy; the first one wins ties """

    best = table[0]
    for row in table[1:]:
        if row["accuracy"] > best["accuracy"]:
            best = row
    return best["c"], best["j"], best["b"]


def cross_validate(dataset, grid, folds, extractor, drop_absent=False, **train_kwargs):
    """ Selects (c, j, b) by cross validation on an annotated dataset

    Parameters
    ----------
    dataset: list of (CandidateList, gold Segmentation) pairs
    grid: dict with "c", "j" and "b" lists
    folds: int
    extractor: FeatureExtractor instance

    Returns
    -------
    tuple (c, j, b)
    """
    table = sweep(build_groups(dataset, extractor), grid, folds=folds,
                  drop_absent=drop_absent, **train_kwargs)
    return best_point(table)
