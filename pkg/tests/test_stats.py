#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
test_stats
----------------------------------

Tests for `segrank.stats` module.
"""

import math
import shutil
import tempfile
import unittest

from segrank.errors import ParseError, LoadError, UndefinedStatisticsError
from segrank.stats import NGramStats, TitleSet, load_stats, load_titles, normalize, freq, pmi
from tests.helpers import fixture, write_file


class TestNGramStats(unittest.TestCase):

    def setUp(self):
        self.stats = load_stats(fixture("ngrams.tsv"))

    def test_freq_is_case_insensitive(self):
        self.assertEqual(self.stats.freq("New York"), 300)
        self.assertEqual(self.stats.freq(["NEW", "york"]), 300)
        self.assertEqual(freq(self.stats, "new   york"), 300)

    def test_missing_ngram_is_zero(self):
        self.assertEqual(self.stats.freq("york new"), 0)

    def test_total_override_and_max_order(self):
        self.assertEqual(self.stats.total_unigrams, 100000)
        self.assertEqual(self.stats.max_order, 3)

    def test_pmi_formula(self):
        expected = math.log(301.0 * 100001 / (501 * 401))
        self.assertAlmostEqual(self.stats.pmi(["new"], ["york"]), expected, places=12)
        self.assertAlmostEqual(pmi(self.stats, ["new"], ["york"]), expected, places=12)

    def test_pmi_of_unseen_pair(self):
        value = self.stats.pmi(["beijing"], ["america"])
        self.assertAlmostEqual(value, math.log(1.0 * 100001 / (81 * 151)), places=12)

    def test_pmi_longer_than_max_order(self):
        # the joint n-gram is simply unseen
        value = self.stats.pmi(["bank", "of"], ["america", "new"])
        self.assertAlmostEqual(value, math.log(1.0 * 100001 / (41 * 3)), places=12)

    def test_pmi_without_mass(self):
        with self.assertRaises(UndefinedStatisticsError):
            NGramStats({"a b": 3}).pmi(["a"], ["b"])

    def test_default_total_is_unigram_sum(self):
        stats = NGramStats({"a": 2, "b": 3, "a b": 1})
        self.assertEqual(stats.total_unigrams, 5)
        self.assertEqual(stats.max_order, 2)


class TestLoadStats(unittest.TestCase):

    def setUp(self):
        self.directory = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.directory)

    def test_duplicates_are_summed(self):
        filename = write_file(self.directory, "dup.tsv", "a\t2\nA\t3\n\nb\t1\n")
        stats = load_stats(filename)
        self.assertEqual(stats.freq("a"), 5)
        self.assertEqual(stats.total_unigrams, 6)

    def test_missing_tab(self):
        filename = write_file(self.directory, "bad.tsv", "a\t2\na 3\n")
        with self.assertRaises(ParseError) as context:
            load_stats(filename)
        self.assertEqual(context.exception.line_number, 2)

    def test_bad_counts(self):
        for text in ("a\tx\n", "a\t-1\n", "a\t1.5\n"):
            filename = write_file(self.directory, "bad.tsv", text)
            with self.assertRaises(ParseError):
                load_stats(filename)

    def test_total_below_largest_unigram(self):
        filename = write_file(self.directory, "total.tsv", "a\t10\n__TOTAL__\t5\n")
        with self.assertRaises(ParseError):
            load_stats(filename)

    def test_missing_file(self):
        with self.assertRaises(LoadError):
            load_stats("/nonexistent/ngrams.tsv")


class TestTitles(unittest.TestCase):

    def test_normalized_membership(self):
        titles = load_titles(fixture("titles.txt"))
        self.assertIn("new york", titles)
        self.assertIn(("Bank", "of", "AMERICA"), titles)
        self.assertNotIn("york", titles)
        self.assertEqual(len(titles), 4)

    def test_blank_titles_are_ignored(self):
        self.assertEqual(len(TitleSet(["", "  ", "a"])), 1)

    def test_normalize(self):
        self.assertEqual(normalize(["Hot", "Dog"]), "hot dog")
        self.assertEqual(normalize("  Hot \t dog "), "hot dog")


if __name__ == '__main__':
    unittest.main()
