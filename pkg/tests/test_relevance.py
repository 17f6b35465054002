#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
test_relevance
----------------------------------

Tests for the `segrank.relevance` package.
"""

import math
import os
import shutil
import tempfile
import unittest

import numpy as np

from segrank.errors import (AlignmentError, ConfigError, PreconditionError, StatsError,
                            ParseError, DegenerateLabelError)
from segrank.relevance.corpus import (Document, CollectionStats, FieldStats, analyze,
                                      load_corpus, load_queries, load_judgments, KEY_FIELD)
from segrank.relevance.features import (idf, ngram_bm25, bm25_features, bm25_names, kn_features,
                                        kn_names, dm_features, dm_names, extract_key_ngrams,
                                        build_key_fields, exact_count, window_count,
                                        ConstantWeights, TableWeights, FeatureScheme,
                                        feature_names)
from segrank.relevance.ltr import (RankingDataset, LinearCombiner, train_ltr, evaluate_ranking,
                                   write_matrix, read_matrix, pessimistic_grades,
                                   split_validation)
from segrank.relevance.metrics import dcg, ndcg_at, mean_ndcg
from segrank.relevance.representation import build_dual_rep
from segrank.segcore import tokenize, parse_segmentation
from tests.helpers import fixture, write_file


def body_documents(*bodies):
    return [Document("d%d" % (ii + 1), dict(body=analyze(body)))
            for ii, body in enumerate(bodies)]


def rep_of(text, mode="wp"):
    segmentation = parse_segmentation(text)
    return build_dual_rep(segmentation.query, segmentation, mode=mode)


class TestDualRepresentation(unittest.TestCase):

    def test_word_and_phrase_ngrams(self):
        rep = rep_of("beijing / seven eleven / stores")
        self.assertEqual(rep.ngrams("word", 2), [("beijing", "seven"), ("seven", "eleven"),
                                                 ("eleven", "stores")])
        self.assertEqual(rep.ngrams("phrase", 1), [("beijing",), ("seven", "eleven"), ("stores",)])
        self.assertEqual(rep.ngrams("phrase", 2), [("beijing", "seven", "eleven"),
                                                   ("seven", "eleven", "stores")])
        self.assertEqual(rep.ngrams("phrase", 3), [("beijing", "seven", "eleven", "stores")])
        self.assertEqual(len(rep.word_ngrams[2]), 2)

    def test_singletons_give_equal_sides(self):
        rep = rep_of("beijing / seven / eleven / stores")
        self.assertEqual(rep.word_ngrams, rep.phrase_ngrams)

    def test_single_segment(self):
        rep = rep_of("new york hotels")
        self.assertEqual(rep.ngrams("phrase", 1), [("new", "york", "hotels")])
        self.assertEqual(rep.ngrams("phrase", 2), [])

    def test_modes(self):
        rep = rep_of("new york / hotels")
        self.assertEqual(rep.with_mode("w").phrase_units, rep.word_units)
        self.assertEqual(rep.with_mode("p").word_units, rep.phrase_units)
        self.assertEqual(rep.with_mode("wp"), rep)
        with self.assertRaises(ConfigError):
            rep.with_mode("pw")

    def test_tokens_are_analyzed(self):
        rep = rep_of("Seven-Eleven / Stores")
        self.assertEqual(rep.word_units, (("seven", "eleven"), ("stores",)))
        self.assertEqual(rep.ngrams("word", 1), [("seven", "eleven"), ("stores",)])

    def test_alignment(self):
        with self.assertRaises(AlignmentError):
            build_dual_rep(tokenize("a b"), parse_segmentation("a / c"))


class TestCorpus(unittest.TestCase):

    def setUp(self):
        self.directory = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.directory)

    def test_load_fixtures(self):
        documents = load_corpus(fixture("documents.jsonl"))
        self.assertEqual([document.id for document in documents], ["d1", "d2", "d3", "d4", "d5", "d6"])
        self.assertEqual(documents[4].field("url")[:4], ("http", "www", "7", "eleven"))
        self.assertFalse(documents[0].has_key_field)
        queries = load_queries(fixture("rank_queries.tsv"))
        self.assertEqual(queries[2][0], "q3")
        self.assertEqual(queries[2][1].n, 4)
        judgments = load_judgments(fixture("judgments.tsv"))
        self.assertEqual(len(judgments), 9)
        self.assertEqual(judgments[0].grade, 4)

    def test_malformed_inputs(self):
        filename = write_file(self.directory, "docs.jsonl",
                              '{"id": "d1", "body": "a"}\n{"id": "d1", "body": "b"}\n')
        with self.assertRaises(ParseError):
            load_corpus(filename)
        filename = write_file(self.directory, "docs.jsonl", '{"id": "d1", "color": "red"}\n')
        with self.assertRaises(ParseError):
            load_corpus(filename)
        filename = write_file(self.directory, "qrels.tsv", "q1\td1\t5\n")
        with self.assertRaises(ParseError):
            load_judgments(filename)
        filename = write_file(self.directory, "qrels.tsv", "q1\td1\t1\nq1\td1\t2\n")
        with self.assertRaises(ParseError):
            load_judgments(filename)

    def test_field_statistics(self):
        stats = CollectionStats(body_documents("a b a c", "b d", "e f g"))
        body = stats["body"]
        self.assertEqual(body.doc_count, 3)
        self.assertEqual(body.avglen(1), 3.0)
        self.assertEqual(body.avglen(2), 2.0)
        self.assertEqual(body.df(("b",)), 2)
        self.assertEqual(body.df(("a", "b")), 1)
        self.assertEqual(body.df(("b", "a", "c")), 1)
        self.assertEqual(body.df(("a", "c", "b")), 0)
        self.assertNotIn(KEY_FIELD, stats)
        with self.assertRaises(StatsError):
            stats[KEY_FIELD]
        with self.assertRaises(StatsError):
            body.avglen(4)


class TestBM25(unittest.TestCase):

    def setUp(self):
        self.documents = body_documents("a b a c", "b d", "e f g")
        self.stats = CollectionStats(self.documents)
        self.names = bm25_names()

    def feature(self, values, name):
        return values[self.names.index(name)]

    def test_idf_floor(self):
        self.assertEqual(idf(1, 1), 0.0)
        self.assertEqual(idf(1, 2), 0.0)
        self.assertAlmostEqual(idf(1, 3), math.log(5.0 / 3))

    def test_idf_is_never_negative(self):
        random_state = np.random.RandomState(3)
        for _ in range(200):
            doc_count = int(random_state.randint(1, 50))
            df = int(random_state.randint(0, doc_count + 1))
            value = idf(df, doc_count)
            self.assertGreaterEqual(value, 0.0)
            if 2 * df >= doc_count:
                self.assertEqual(value, 0.0)
            else:
                self.assertGreater(value, 0.0)

    def test_score_grows_with_term_frequency(self):
        random_state = np.random.RandomState(4)
        for _ in range(30):
            n_documents = int(random_state.randint(4, 12))
            bodies = ["q z z"] + [" ".join(["z"] * int(random_state.randint(1, 15)))
                                  for _ in range(n_documents - 1)]
            body = FieldStats("body", body_documents(*bodies))
            k1 = float(random_state.uniform(0.1, 3.0))
            b = float(random_state.uniform(0.0, 1.0))
            length = int(random_state.randint(1, 20))
            scores = [ngram_bm25([("q",)], ("q",) * tf + ("z",) * (length - tf), body, 1, k1=k1, b=b)
                      for tf in range(length + 1)]
            self.assertEqual(scores[0], 0.0)
            for before, after in zip(scores, scores[1:]):
                self.assertGreaterEqual(after, before)

    def test_hand_computed_values(self):
        values = bm25_features(self.documents[0], rep_of("a / b"), self.stats)
        unigram = math.log(5.0 / 3) * 2 * 2.2 / (2 + 1.5)
        bigram = math.log(5.0 / 3) * 1 * 2.2 / (1 + 1.65)
        self.assertAlmostEqual(self.feature(values, "bm25:word:body:1"), unigram)
        self.assertAlmostEqual(self.feature(values, "bm25:word:body:2"), bigram)
        self.assertEqual(self.feature(values, "bm25:word:body:3"), 0.0)
        self.assertEqual(self.feature(values, "bm25:word:title:1"), 0.0)

    def test_phrase_side(self):
        values = bm25_features(self.documents[0], rep_of("a b"), self.stats)
        # a phrase unigram is normalized by the unigram length of the field
        phrase = math.log(5.0 / 3) * 1 * 2.2 / (1 + 1.5)
        self.assertAlmostEqual(self.feature(values, "bm25:phrase:body:1"), phrase)
        self.assertEqual(self.feature(values, "bm25:phrase:body:2"), 0.0)

    def test_single_document_scores_zero(self):
        documents = body_documents("a b a")
        values = bm25_features(documents[0], rep_of("a b"), CollectionStats(documents))
        self.assertEqual(np.count_nonzero(values), 0)

    def test_repeated_ngrams_score_once(self):
        body = self.stats["body"]
        once = ngram_bm25([("a",)], self.documents[0].field("body"), body, 1)
        twice = ngram_bm25([("a",), ("a",)], self.documents[0].field("body"), body, 1)
        self.assertEqual(once, twice)

    def test_empty_document(self):
        empty = Document("d0", dict())
        values = bm25_features(empty, rep_of("a b / c"), self.stats)
        self.assertEqual(values.shape, (42,))
        self.assertEqual(np.count_nonzero(values), 0)

    def test_zero_average_length(self):
        stats = FieldStats("title", body_documents("a b"))
        with self.assertRaises(StatsError):
            ngram_bm25([("a",)], ("a",), stats, 1)
        self.assertEqual(ngram_bm25([("a",)], (), stats, 1), 0.0)

    def test_halves_equal_for_singleton_segmentation(self):
        documents = load_corpus(fixture("documents.jsonl"))
        stats = CollectionStats(documents)
        rep = rep_of("new / york / hotels")
        for document in documents:
            values = bm25_features(document, rep, stats)
            np.testing.assert_array_equal(values[:21], values[21:])

    def test_word_mode_ignores_segmentation(self):
        documents = load_corpus(fixture("documents.jsonl"))
        stats = CollectionStats(documents)
        first = bm25_features(documents[0], rep_of("new york / hotels", mode="w"), stats)
        second = bm25_features(documents[0], rep_of("new / york / hotels"), stats)
        np.testing.assert_array_equal(first, second)


class TestKeyNgrams(unittest.TestCase):

    def test_empty_body(self):
        self.assertEqual(extract_key_ngrams(()), ())

    def test_repeated_unigram(self):
        body = ("a", "a", "a", "a")
        self.assertEqual(extract_key_ngrams(body, budget=1), ("a",))
        self.assertEqual(extract_key_ngrams(body, budget=2), ("a", "a", "a"))

    def test_matches_brute_force(self):
        rs = np.random.RandomState(5)
        for _ in range(50):
            body = tuple(rs.choice(["a", "b", "c"], size=int(rs.randint(1, 12))))
            candidates = dict()
            for order in (1, 2, 3):
                for start in range(len(body) - order + 1):
                    gram = body[start:start + order]
                    count, first = candidates.get(gram, (0, (start, order)))
                    candidates[gram] = (count + 1, first)
            ranked = sorted(candidates, key=lambda gram: (-candidates[gram][0], candidates[gram][1]))
            expected = tuple(token for gram in ranked[:4] for token in gram)
            self.assertEqual(extract_key_ngrams(body, budget=4), expected)

    def test_collection_weighting(self):
        documents = body_documents("x y x y z", "x y", "x q")
        stats = CollectionStats(documents)
        # "x" occurs in every document, so the bigram "x y" outranks it
        self.assertEqual(extract_key_ngrams(documents[0].field("body"), budget=1, stats=stats),
                         ("x", "y"))
        self.assertEqual(extract_key_ngrams(documents[0].field("body"), budget=1), ("x",))

    def test_budget(self):
        with self.assertRaises(ConfigError):
            extract_key_ngrams(("a",), budget=0)


class TestKeyNgramFeatures(unittest.TestCase):

    def setUp(self):
        self.documents = load_corpus(fixture("documents.jsonl"))

    def test_dimension_and_precondition(self):
        self.assertEqual(len(kn_names()), 48)
        stats = CollectionStats(self.documents)
        with self.assertRaises(PreconditionError):
            kn_features(self.documents[0], rep_of("new york / hotels"), stats)

    def test_key_field_equal_to_body(self):
        documents = [document.with_key_field(document.field("body")) for document in self.documents]
        stats = CollectionStats(documents)
        self.assertIn(KEY_FIELD, stats)
        rep = rep_of("new york / hotels")
        names = kn_names()
        for document in documents:
            values = kn_features(document, rep, stats)
            self.assertEqual(values.shape, (48,))
            for side in ("word", "phrase"):
                for order in (1, 2, 3):
                    self.assertEqual(values[names.index("bm25:%s:%s:%d" % (side, KEY_FIELD, order))],
                                     values[names.index("bm25:%s:body:%d" % (side, order))])

    def test_empty_key_field(self):
        documents = [document.with_key_field(()) for document in self.documents]
        values = kn_features(documents[0], rep_of("new york / hotels"), CollectionStats(documents))
        self.assertEqual(np.count_nonzero(values[42:]), 0)

    def test_build_key_fields(self):
        documents = build_key_fields(self.documents, budget=3)
        self.assertTrue(all(document.has_key_field for document in documents))
        self.assertFalse(self.documents[0].has_key_field)
        self.assertLessEqual(len(documents[0].field(KEY_FIELD)), 9)


class TestDependencyModel(unittest.TestCase):

    def test_counts(self):
        self.assertEqual(exact_count(("a", "x", "b"), ("a",), ("b",)), 0)
        self.assertEqual(window_count(("a", "x", "b"), ("a",), ("b",)), 1)
        self.assertEqual(exact_count(("a", "b", "a", "b"), ("a",), ("b",)), 2)
        self.assertEqual(window_count(("a", "b", "a", "b"), ("a",), ("b",)), 4)

    def test_window_bound(self):
        tokens = ("a",) + ("x",) * 6 + ("b",)
        self.assertEqual(window_count(tokens, ("a",), ("b",), window=8), 1)
        self.assertEqual(window_count(tokens, ("a",), ("b",), window=7), 0)

    def test_window_matches_brute_force(self):
        rs = np.random.RandomState(11)
        for _ in range(200):
            tokens = tuple(rs.choice(["a", "b", "c"], size=int(rs.randint(0, 15))))
            first, second = rs.choice(["a", "b", "c"], size=2)
            window = int(rs.randint(2, 6))
            expected = 0
            for ii in range(len(tokens)):
                for jj in range(len(tokens)):
                    if ii == jj or abs(ii - jj) >= window:
                        continue
                    if first == second and jj < ii:
                        continue
                    if tokens[ii] == first and tokens[jj] == second:
                        expected += 1
            self.assertEqual(window_count(tokens, (first,), (second,), window=window), expected)

    def test_multiword_units_do_not_overlap(self):
        tokens = ("a", "b", "c")
        self.assertEqual(window_count(tokens, ("a", "b"), ("b", "c")), 0)
        self.assertEqual(exact_count(tokens, ("a", "b"), ("c",)), 1)

    def test_features(self):
        document = body_documents("a b a b")[0]
        values = dm_features(document, rep_of("a / b"))
        names = dm_names()
        self.assertEqual(values.shape, (294,))
        self.assertAlmostEqual(values[names.index("dm:word:body:1:unigram")], 1.0)
        self.assertAlmostEqual(values[names.index("dm:word:body:7:bigram_exact")], 2.0 / 3)
        self.assertAlmostEqual(values[names.index("dm:phrase:body:3:bigram_window")], 4.0 / 3)
        self.assertEqual(values[names.index("dm:word:title:1:unigram")], 0.0)

    def test_table_weights(self):
        weights = TableWeights({"A": [2.0] * 7, "a b": [0.5] * 7})
        document = body_documents("a b a b")[0]
        values = dm_features(document, rep_of("a / b"), weights=weights)
        names = dm_names()
        self.assertAlmostEqual(values[names.index("dm:word:body:1:unigram")], 2.0 * 2 / 4)
        self.assertAlmostEqual(values[names.index("dm:word:body:1:bigram_exact")], 0.5 * 2 / 3)

    def test_table_weights_file(self):
        directory = tempfile.mkdtemp()
        try:
            filename = write_file(directory, "weights.tsv", "new york\t1\t2\t3\t4\t5\t6\t7\n")
            weights = TableWeights.load(filename)
            np.testing.assert_array_equal(weights("New York"), np.arange(1, 8))
            np.testing.assert_array_equal(weights("hotels"), np.zeros(7))
            filename = write_file(directory, "weights.tsv", "new york\t1\t2\n")
            with self.assertRaises(ParseError):
                TableWeights.load(filename)
        finally:
            shutil.rmtree(directory)

    def test_empty_document(self):
        values = dm_features(Document("d0", dict()), rep_of("a / b"), weights=ConstantWeights())
        self.assertEqual(np.count_nonzero(values), 0)

    def test_window_too_small(self):
        document = body_documents("a b")[0]
        with self.assertRaises(ConfigError):
            dm_features(document, rep_of("a / b"), window=1)
        with self.assertRaises(ConfigError):
            FeatureScheme("dm", None, window=1)


class TestFeatureScheme(unittest.TestCase):

    def test_dimensions(self):
        self.assertEqual(len(feature_names("bm25")), 42)
        self.assertEqual(len(feature_names("kn")), 48)
        self.assertEqual(len(feature_names("dm")), 294)
        with self.assertRaises(ConfigError):
            feature_names("tfidf")

    def test_scheme_matches_functions(self):
        documents = load_corpus(fixture("documents.jsonl"))
        stats = CollectionStats(documents)
        rep = rep_of("bank of america")
        scheme = FeatureScheme("bm25", stats)
        np.testing.assert_array_equal(scheme(documents[2], rep), bm25_features(documents[2], rep, stats))
        self.assertGreater(scheme(documents[2], rep)[bm25_names().index("bm25:phrase:title:1")], 0)


class TestNDCG(unittest.TestCase):

    def test_perfect_ranking(self):
        self.assertEqual(ndcg_at([4, 2, 0], 3), 1.0)

    def test_swapped_ranking(self):
        expected = (3.0 + 15.0 / math.log(3, 2)) / (15.0 + 3.0 / math.log(3, 2))
        self.assertAlmostEqual(ndcg_at([2, 4, 0], 2), expected)
        self.assertAlmostEqual(ndcg_at([2, 4, 0], 2), 0.7378, places=4)

    def test_no_relevant_document(self):
        self.assertEqual(ndcg_at([0, 0, 0], 10), 0.0)
        self.assertEqual(mean_ndcg([], 10), 0.0)

    def test_values_stay_between_zero_and_one(self):
        random_state = np.random.RandomState(5)
        for _ in range(300):
            grades = random_state.randint(0, 5, size=int(random_state.randint(1, 12))).tolist()
            k = int(random_state.randint(1, 14))
            value = ndcg_at(grades, k)
            self.assertGreaterEqual(value, 0.0)
            self.assertLessEqual(value, 1.0 + 1e-12)
            if not any(grades):
                self.assertEqual(value, 0.0)
            self.assertAlmostEqual(ndcg_at(sorted(grades, reverse=True), k), 1.0 if any(grades) else 0.0)

    def test_cutoff(self):
        self.assertEqual(dcg([3], 5), 7.0)
        with self.assertRaises(ValueError):
            ndcg_at([1, 0], 0)


def two_feature_dataset():
    dataset = RankingDataset(["f1", "f2"])
    dataset.add("q1", ["d1", "d2", "d3"], [[2.0, 2.0], [3.0, 0.0], [0.0, 2.5]], [2, 1, 0])
    return dataset


class TestLearningToRank(unittest.TestCase):

    def setUp(self):
        self.directory = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.directory)

    def test_single_features_are_imperfect(self):
        dataset = two_feature_dataset()
        rows = dataset.queries[0]
        for weights in ([1.0, 0.0], [0.0, 1.0]):
            ranked = LinearCombiner(dataset.names, weights).ranked_grades(rows)
            self.assertLess(ndcg_at(ranked, 10), 1.0)

    def test_combination_is_learned(self):
        dataset = two_feature_dataset()
        combiner = train_ltr(dataset, validation_fraction=0.0)
        self.assertFalse(combiner.degenerate)
        self.assertAlmostEqual(np.sum(np.abs(combiner.weights)), 1.0)
        rows, means = evaluate_ranking(combiner, dataset, ks=(10,))
        self.assertEqual(means, [1.0])

    def test_informative_feature_dominates(self):
        rs = np.random.RandomState(2)
        dataset = RankingDataset(["signal", "noise"])
        for qq in range(6):
            grades = rs.randint(0, 5, size=8)
            grades[0], grades[1] = 0, 4
            matrix = np.column_stack([grades + 0.1 * np.arange(8) / 8, rs.rand(8)])
            dataset.add("q%d" % qq, ["d%d" % ii for ii in range(8)], matrix, grades)
        combiner = train_ltr(dataset, validation_fraction=0.0)
        self.assertGreater(abs(combiner.weights[0]), abs(combiner.weights[1]))
        self.assertEqual(evaluate_ranking(combiner, dataset, ks=(10,))[1], [1.0])

    def test_identical_documents(self):
        dataset = RankingDataset(["f1", "f2"])
        dataset.add("q1", ["d1", "d2", "d3"], [[1.0, 2.0]] * 3, [0, 1, 2])
        combiner = train_ltr(dataset, validation_fraction=0.0)
        self.assertTrue(combiner.degenerate)
        np.testing.assert_array_equal(combiner.weights, [0.0, 0.0])

    def test_single_grade(self):
        dataset = RankingDataset(["f1"])
        dataset.add("q1", ["d1", "d2"], [[1.0], [2.0]], [1, 1])
        with self.assertRaises(DegenerateLabelError):
            train_ltr(dataset)

    def test_ties(self):
        self.assertEqual(pessimistic_grades([1.0, 1.0, 0.5], [2, 0, 1]), [0, 2, 1])
        combiner = LinearCombiner(["f1"], [1.0])
        self.assertEqual(combiner.rank([[1.0], [1.0], [2.0]]).tolist(), [2, 0, 1])

    def test_validation_split(self):
        train_indices, validation_indices = split_validation(8, 0.25, seed=0)
        self.assertEqual(len(validation_indices), 2)
        self.assertEqual(sorted(train_indices + validation_indices), list(range(8)))
        self.assertEqual(split_validation(8, 0.25, seed=0), (train_indices, validation_indices))
        self.assertEqual(split_validation(3, 0.0, seed=0), ([0, 1, 2], [0, 1, 2]))
        with self.assertRaises(ConfigError):
            split_validation(3, 1.0, seed=0)

    def test_dimension_mismatch(self):
        with self.assertRaises(ConfigError):
            evaluate_ranking(LinearCombiner(["f1"], [1.0]), two_feature_dataset())

    def test_matrix_file(self):
        dataset = two_feature_dataset()
        dataset.add("q2", ["d9"], [[0.125, 1e-3]], [3])
        filename = os.path.join(self.directory, "features.txt")
        write_matrix(dataset, filename)
        with open(filename) as fh:
            lines = fh.read().splitlines()
        self.assertEqual(lines[0], "# feature 1 f1")
        self.assertEqual(lines[2], "2 qid:q1 1:2 2:2 # d1")
        loaded = read_matrix(filename)
        self.assertEqual(loaded.names, dataset.names)
        self.assertEqual([rows.query_id for rows in loaded], ["q1", "q2"])
        np.testing.assert_array_equal(loaded.queries[1].matrix, [[0.125, 1e-3]])
        self.assertEqual(loaded.queries[0].doc_ids, ["d1", "d2", "d3"])

    def test_sparse_matrix_lines(self):
        filename = write_file(self.directory, "sparse.txt", "1 qid:a 2:0.5\n0 qid:a\n")
        loaded = read_matrix(filename)
        self.assertEqual(loaded.names, ("f1", "f2"))
        np.testing.assert_array_equal(loaded.queries[0].matrix, [[0.0, 0.5], [0.0, 0.0]])
        filename = write_file(self.directory, "split.txt", "1 qid:a 1:1\n0 qid:b 1:1\n0 qid:a 1:1\n")
        with self.assertRaises(ParseError):
            read_matrix(filename)

    def test_combiner_file(self):
        combiner = LinearCombiner(["f1", "f2"], [0.25, -0.75])
        filename = os.path.join(self.directory, "combiner.txt")
        combiner.save(filename)
        loaded = LinearCombiner.load(filename)
        self.assertEqual(loaded.names, combiner.names)
        np.testing.assert_array_equal(loaded.weights, combiner.weights)
        self.assertFalse(loaded.degenerate)


if __name__ == '__main__':
    unittest.main()
