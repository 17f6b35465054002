""" Orchestration of command line runs: logging set-up, loading of shared
resources, the work of each subcommand and the run manifest.
"""
import os
import sys
import logging
import platform
import traceback
from contextlib import contextmanager
import numpy as np
import segrank
from segrank import segeval
from segrank.errors import ConfigError, DataError, InvariantError
from segrank.stats import load_stats, load_titles, TitleSet
from segrank.segcore import tokenize
from segrank.wbn import topk, score_all
from segrank.rerank import FeatureExtractor, LinearModel, build_groups, sweep, best_point, train_groups
from segrank.segmenters import get_segmenter, NoSegmenter, WBNSegmenter, RerankSegmenter
from segrank.datastore import TSVStore
from segrank.relevance.corpus import load_corpus, load_queries, load_judgments, CollectionStats
from segrank.relevance.representation import build_dual_rep
from segrank.relevance.features import BM25Params, FeatureScheme, TableWeights, build_key_fields
from segrank.relevance.ltr import (RankingDataset, write_matrix, read_matrix, dumps_matrix,
                                   train_ltr, evaluate_ranking, LinearCombiner)
from segrank.utils import dumps, atomic_output, read_lines

logger = logging.getLogger(__name__)

LOG_FORMAT = '"%(asctime)s","%(levelname)s","%(message)s"'


def _log_except_hook(*exc_info):
    text = "".join(traceback.format_exception(*exc_info))
    logger.critical("Unhandled exception: %s", text)


def configure_logging(level=logging.INFO, debug=False):
    """ Configures the basic logging for a run. Log lines go to stderr, set
    at the requested level (DEBUG when debug is True). Uncaught exceptions
    are sent to the log as well. """

    if debug is True:
        level = logging.DEBUG

    sys.excepthook = _log_except_hook

    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)

    # Make sure that the stream handler has the requested log level.
    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    for handler in root_logger.handlers:
        if isinstance(handler, logging.StreamHandler):
            handler.setLevel(level)
    return level


def add_file_handler(filename="segrank.log", format=LOG_FORMAT, level=logging.INFO):
    """ Add a file handler to the root logger

    Parameters
    ----------
    filename: string
        name of the log file
    format: string
        format for log messages
    level: logging level
        defaults to logging.INFO, but could be set to logging.DEBUG
    """
    file_handler = logging.FileHandler(filename)
    file_handler.setLevel(level)
    file_handler.setFormatter(logging.Formatter(format))

    # Make sure the root logger's level is not too high
    root_logger = logging.getLogger()
    if root_logger.level > level:
        root_logger.setLevel(level)
    root_logger.addHandler(file_handler)
    logger.debug("File handler added to %s with level %d" % (filename, level))
    return file_handler


@contextmanager
def _open_output(filename):
    """ Yields stdout when filename is None or "-", else an atomic_output
    handle. Outputs opened inside the block are committed first, so a failure
    anywhere in the block leaves filename untouched. """

    if filename in (None, "-"):
        yield sys.stdout
        sys.stdout.flush()
        return
    with atomic_output(filename) as fh:
        yield fh


def _write_text(filename, text):
    """ Writes text to filename, or to stdout when filename is None or "-" """

    with _open_output(filename) as fh:
        fh.write(text)


class Runner(object):
    """ Carries out the subcommands of one run

    Parameters
    ----------
    config: RunConfig instance
    command: string
        name of the subcommand, recorded in the manifest

    Attributes
    ----------
    inputs: dict
        input files read during the run, by role
    summary: dict
        counts and flags recorded in the manifest
    """

    def __init__(self, config, command=None):

        self.config = config
        self.command = command
        self.inputs = dict()
        self.summary = dict()
        self._stats = dict()
        self._titles = None

    # shared resources
    def stats(self, source):

        if source not in self._stats:
            try:
                filename = self.config.stats[source]
            except KeyError:
                raise ConfigError("No n-gram statistics configured for source %r (use --stats %s=FILE)" % (
                    source, source))
            self.inputs["stats:%s" % source] = filename
            self._stats[source] = load_stats(filename, name=source)
        return self._stats[source]

    @property
    def wbn_stats(self):
        return self.stats(self.config.wbn_source)

    @property
    def mi_stats(self):
        return self.stats(self.config.mi_source or self.config.wbn_source)

    @property
    def titles(self):

        if self._titles is None:
            if self.config.titles is None:
                logger.warning("No title list configured; every segment is scored by frequency")
                self._titles = TitleSet()
            else:
                self.inputs["titles"] = self.config.titles
                self._titles = load_titles(self.config.titles)
        return self._titles

    def extractor(self):

        return FeatureExtractor(self.wbn_stats, self.titles, mi_stats=self.mi_stats,
                                indicator_words=self.config.indicator_words)

    def segmenter(self, name=None, model=None, predictions=None):
        """ Builds a segmenter by name

        Parameters
        ----------
        name: string
            "none", "wbn", "rerank", "WT", "NP" or "precomputed". Defaults
            to the configured segmenter.
        model: string
            re-ranking model file, required by "rerank"
        predictions: string
            JSON-lines segmentations, required by the precomputed segmenters
        """
        name = name or self.config.segmenter
        cls = get_segmenter(name)
        if cls is NoSegmenter:
            return NoSegmenter()
        if cls is WBNSegmenter:
            return WBNSegmenter(self.wbn_stats, self.titles, k=self.config.k)
        if cls is RerankSegmenter:
            if model is None:
                raise ConfigError("The rerank segmenter needs a model (--model)")
            self.inputs["model"] = model
            return RerankSegmenter(self.wbn_stats, self.titles, LinearModel.load(model),
                                   self.extractor(), k=self.config.k)
        if predictions is None:
            raise ConfigError("The %s segmenter needs precomputed segmentations (--predictions)" % name)
        self.inputs["predictions:%s" % name] = predictions
        return cls.from_file(predictions)

    def load_gold(self, filename):

        self.inputs["gold"] = filename
        annotated = segeval.load_annotated(filename)
        self.summary["queries"] = len(annotated)
        return [item.gold for item in annotated]

    def candidate_dataset(self, golds):
        """ (CandidateList, gold) pairs of the annotated queries """

        dataset = [(topk(gold.query, self.config.k, self.wbn_stats, self.titles), gold)
                   for gold in golds]
        absent = sum(1 for candidates, gold in dataset if gold not in candidates)
        self.summary["gold_absent"] = absent
        if absent > 0:
            logger.warning("%d of %d gold segmentations are not among the top %d candidates" % (
                absent, len(dataset), self.config.k))
        return dataset

    def _train_kwargs(self):

        return dict(max_epochs=self.config.max_epochs,
                    tolerance=self.config.tolerance,
                    scaling=self.config.feature_scaling)

    # subcommands
    def topk(self, queries, output=None, check=False):
        """ Writes the top-k candidates of each query as JSON-lines. With check,
        queries within the enumeration limit are also scored exhaustively and
        both lists must agree. """

        self.inputs["queries"] = queries
        lines = list()
        checked = 0
        for line_number, raw in read_lines(queries):
            if len(raw.strip()) == 0:
                continue
            query = tokenize(raw)
            candidates = topk(query, self.config.k, self.wbn_stats, self.titles)
            if check and query.n <= self.config.enumeration_limit:
                expected = score_all(query, self.wbn_stats, self.titles,
                                     limit=self.config.enumeration_limit)[:self.config.k]
                if [(c.breaks, c.score) for c in candidates] != [(c.breaks, c.score) for c in expected]:
                    raise InvariantError("Top-k candidates of %r differ from exhaustive scoring" % raw)
                checked += 1
            lines.append(dumps(candidates.to_dict()))
        self.summary["queries"] = len(lines)
        if check:
            self.summary["checked"] = checked
        _write_text(output, "".join(line + "\n" for line in lines))

    def segment(self, queries, output=None, segmenter=None, model=None, predictions=None):
        """ Writes one segmentation per query as JSON-lines """

        self.inputs["queries"] = queries
        segmenter = self.segmenter(segmenter, model=model, predictions=predictions)
        lines = list()
        for line_number, raw in read_lines(queries):
            if len(raw.strip()) == 0:
                continue
            segmentation = segmenter.segment(tokenize(raw))
            lines.append(dumps(dict(query=raw.strip(),
                                    segmentation=segmentation.text,
                                    breaks=list(segmentation.breaks))))
        self.summary["queries"] = len(lines)
        self.summary["segmenter"] = segmenter.name
        _write_text(output, "".join(line + "\n" for line in lines))

    def sweep(self, gold, output=None):
        """ Cross validates every point of the configured grid and writes
        the accuracy table. Returns the best (c, j, b). """

        groups = build_groups(self.candidate_dataset(self.load_gold(gold)), self.extractor())
        table = sweep(groups, self.config.grid, folds=self.config.folds,
                      drop_absent=self.config.drop_absent_gold, **self._train_kwargs())

        store = TSVStore(["c", "j", "b", "accuracy"] +
                         ["fold%d" % fold for fold in range(1, self.config.folds + 1)], output)
        for row in table:
            data = dict(c=row["c"], j=row["j"], b=int(row["b"]), accuracy=row["accuracy"])
            data.update(("fold%d" % fold, value) for fold, value in enumerate(row["fold_accuracies"], 1))
            store.store(data)
        c, j, b = best_point(table)
        store.comment("best c=%r j=%r b=%d" % (c, j, int(b)))
        self.summary.update(points=len(table), best=dict(c=c, j=j, b=int(b)),
                            skipped_folds=sum(row["skipped_folds"] for row in table))
        _write_text(output, store.dumps())
        return c, j, b

    def train_rerank(self, gold, model_out, cross_validate=False):
        """ Trains the re-ranking model on an annotated corpus, with the
        configured (c, j, b) or the best point of a cross validation sweep """

        groups = build_groups(self.candidate_dataset(self.load_gold(gold)), self.extractor())
        c, j, b = self.config.c, self.config.j, bool(self.config.b)
        if cross_validate:
            table = sweep(groups, self.config.grid, folds=self.config.folds,
                          drop_absent=self.config.drop_absent_gold, **self._train_kwargs())
            c, j, b = best_point(table)
            logger.info("Cross validation picked c=%r j=%r b=%d" % (c, j, int(b)))
        model = train_groups(groups, c, j, b, drop_absent=self.config.drop_absent_gold,
                             **self._train_kwargs())
        model.save(model_out)
        self.summary.update(c=c, j=j, b=int(b))
        return model

    def eval_seg(self, gold, systems, output=None, reference=None):
        """ Scores segmenters against the fused gold standard

        Parameters
        ----------
        gold: string
            annotated corpus
        systems: list of (segmenter name, model, predictions) tuples
        reference: string
            "bwc" or "wqs" to annotate the report with published values
        """
        if len(systems) == 0:
            raise ConfigError("eval-seg needs at least one system")
        golds = self.load_gold(gold)

        store = TSVStore(["system"] + list(segeval.METRICS), output)
        predictions = list()
        for name, model, prediction_file in systems:
            segmenter = self.segmenter(name, model=model, predictions=prediction_file)
            predicted = segmenter.segment_all([item.query for item in golds])
            metrics = segeval.evaluate(predicted, golds, average=self.config.average)
            logger.info("%s: %r" % (segmenter.name, metrics))
            data = metrics.as_dict()
            data["system"] = segmenter.name
            store.store(data)
            predictions.append((segmenter.name, predicted))

        for ii in range(len(predictions)):
            for jj in range(ii + 1, len(predictions)):
                (name_a, predicted_a), (name_b, predicted_b) = predictions[ii], predictions[jj]
                wins_a, wins_b, p_value = segeval.sign_test(predicted_a, predicted_b, golds)
                store.comment("sign test %s vs %s: %d/%d wins, p=%.4g" % (
                    name_a, name_b, wins_a, wins_b, p_value))

        if reference is not None:
            try:
                published = segeval.PUBLISHED_REFERENCE[reference]
            except KeyError:
                raise ConfigError("Unknown reference %r, choose bwc or wqs" % reference)
            for name in sorted(published):
                store.comment("published %s %s: %s" % (
                    reference, name, " ".join("%.3f" % value for value in published[name])))

        self.summary["systems"] = [name for name, _ in predictions]
        _write_text(output, store.dumps())
        return store

    def fuse(self, annotated, output=None, summary=None):
        """ Writes the fused gold segmentation of each annotated query """

        self.inputs["annotated"] = annotated
        items = segeval.load_annotated(annotated)
        golds = list()
        lines = list()
        for item in items:
            gold = segeval.fuse_breaks(item)
            golds.append(gold)
            record = dict(query=" ".join(item.query.tokens),
                          breaks=list(gold.breaks),
                          segmentation=gold.text,
                          annotators=len(item.annotations))
            if item.id is not None:
                record["id"] = item.id
            lines.append(dumps(record))
        self.summary["queries"] = len(lines)

        # the gold file is only committed once the summary is written
        with _open_output(output) as fh:
            fh.write("".join(line + "\n" for line in lines))
            if summary is not None:
                distribution = segeval.segment_length_distribution(golds)
                store = TSVStore(["statistic", "value"], summary)
                longest = len(distribution["ratios"])
                for length, ratio in enumerate(distribution["ratios"], 1):
                    label = "segments_len%d%s" % (length, "plus" if length == longest else "")
                    store.store(dict(statistic=label, value=ratio))
                store.store(dict(statistic="words_per_query", value=distribution["words_per_query"]))
                store.store(dict(statistic="words_per_segment", value=distribution["words_per_segment"]))
                _write_text(summary, store.dumps())
        return golds

    def coverage(self, gold, output=None, max_k=10):
        """ Writes the share of gold segmentations found in the top k, k = 1..max_k """

        golds = self.load_gold(gold)
        candidate_lists = [topk(item.query, max_k, self.wbn_stats, self.titles) for item in golds]
        table = segeval.coverage_at_k(candidate_lists, golds, max_k=max_k)
        store = TSVStore(["k", "coverage"], output)
        for k, value in table:
            store.store(dict(k=k, coverage=value))
        store.comment("published coverage: %s" % " ".join(
            "k=%d:%.2f" % item for item in sorted(segeval.PUBLISHED_COVERAGE.items())))
        _write_text(output, store.dumps())
        return table

    def index(self, corpus, output):
        """ Adds the key n-gram field to each document of a corpus """

        self.inputs["corpus"] = corpus
        documents = load_corpus(corpus)
        indexed = build_key_fields(documents, budget=self.config.key_ngram_budget,
                                   stats=CollectionStats(documents))
        self.summary["documents"] = len(indexed)
        _write_text(output, "".join(dumps(document.to_dict()) + "\n" for document in indexed))
        return indexed

    def rank(self, corpus, queries, judgments, output=None, segmenter=None, model=None,
             predictions=None):
        """ Writes the feature matrix of every judged (query, document) pair """

        self.inputs.update(corpus=corpus, queries=queries, judgments=judgments)
        documents = load_corpus(corpus)
        by_id = dict((document.id, document) for document in documents)
        stats = CollectionStats(documents)

        weights = None
        if self.config.scheme == "dm" and self.config.dm_weights is not None:
            self.inputs["dm_weights"] = self.config.dm_weights
            weights = TableWeights.load(self.config.dm_weights)
        bm25 = self.config.bm25
        scheme = FeatureScheme(self.config.scheme, stats,
                               params=BM25Params(bm25["k1"], bm25["b"], bm25.get("fields")),
                               weights=weights, window=self.config.dm_window)
        segmenter = self.segmenter(segmenter, model=model, predictions=predictions)

        judged = dict()
        for judgment in load_judgments(judgments):
            judged.setdefault(judgment.query_id, list()).append(judgment)

        dataset = RankingDataset(scheme.names)
        known = set()
        for query_id, query in load_queries(queries):
            known.add(query_id)
            if query_id not in judged:
                logger.warning("Query %s has no judgments and is left out" % query_id)
                continue
            rep = build_dual_rep(query, segmenter.segment(query), mode=self.config.rep)
            logger.debug("Query %s: %r" % (query_id, rep))
            rows = list()
            for judgment in judged[query_id]:
                try:
                    document = by_id[judgment.doc_id]
                except KeyError:
                    raise DataError("Judged document %s of query %s is not in %s" % (
                        judgment.doc_id, query_id, corpus))
                rows.append(scheme(document, rep))
            dataset.add(query_id, [judgment.doc_id for judgment in judged[query_id]],
                        np.vstack(rows), [judgment.grade for judgment in judged[query_id]])

        for query_id in sorted(set(judged) - known):
            logger.warning("Judgments of unknown query %s are left out" % query_id)

        self.summary.update(queries=len(dataset), features=scheme.dimension,
                            scheme=self.config.scheme, segmenter=segmenter.name,
                            rep=self.config.rep)
        if output in (None, "-"):
            _write_text(output, dumps_matrix(dataset))
        else:
            write_matrix(dataset, output)
        return dataset

    def eval_rank(self, train, test=None, output=None, model_in=None, model_out=None):
        """ Trains (or loads) a linear combiner and reports NDCG per query and
        on average at the configured cutoffs """

        if model_in is not None:
            self.inputs["model"] = model_in
            combiner = LinearCombiner.load(model_in)
        else:
            if train is None:
                raise ConfigError("eval-rank needs a training matrix or a model")
            self.inputs["train"] = train
            ltr = self.config.ltr
            combiner = train_ltr(read_matrix(train), max_rounds=ltr["max_rounds"],
                                 patience=ltr["patience"],
                                 validation_fraction=ltr["validation_fraction"],
                                 metric_k=ltr["metric_k"], seed=self.config.seed)
        if model_out is not None:
            combiner.save(model_out)

        if test is None:
            if train is None:
                raise ConfigError("eval-rank needs a matrix to evaluate (--test)")
            logger.warning("No test matrix given; evaluating on the training matrix")
            test = train
        self.inputs["test"] = test
        dataset = read_matrix(test)

        ks = self.config.ndcg
        rows, means = evaluate_ranking(combiner, dataset, ks=ks)
        store = TSVStore(["query_id"] + ["ndcg@%d" % k for k in ks], output)
        for query_id, values in rows:
            data = dict(("ndcg@%d" % k, value) for k, value in zip(ks, values))
            data["query_id"] = query_id
            store.store(data)
        data = dict(("ndcg@%d" % k, value) for k, value in zip(ks, means))
        data["query_id"] = "mean"
        store.store(data)
        if combiner.degenerate:
            store.comment("degenerate combiner: all documents scored alike")
        self.summary.update(queries=len(rows), degenerate=combiner.degenerate,
                            mean=dict(("ndcg@%d" % k, value) for k, value in zip(ks, means)))
        _write_text(output, store.dumps())
        return rows, means

    # manifest
    def manifest(self):

        return dict(command=self.command,
                    config=self.config.to_dict(),
                    config_digest=self.config.digest(),
                    seed=self.config.seed,
                    inputs=dict((role, os.path.normpath(path)) for role, path in self.inputs.items()),
                    summary=self.summary,
                    versions=dict(segrank=segrank.__version__,
                                  python=platform.python_version(),
                                  numpy=np.__version__))

    def write_manifest(self, output):
        """ Writes `<output>.manifest.json` next to an output file """

        if output in (None, "-"):
            return None
        filename = "%s.manifest.json" % output
        with atomic_output(filename) as fh:
            fh.write(dumps(self.manifest()) + "\n")
        logger.info("Wrote run manifest %s" % filename)
        return filename
