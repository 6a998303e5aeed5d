import unittest
from math import comb

from domain.gpc.multiindex import MultiIndex, build_index_set, position_of
from utils.exceptions import ConfigurationError


class MultiIndexTest(unittest.TestCase):
    def test_size_matches_binomial(self):
        for dimensions in range(1, 4):
            for degree in range(0, 7):
                index_set = build_index_set(dimensions, degree)
                self.assertEqual(index_set.size, comb(degree + dimensions, dimensions))

    def test_two_dimensions_degree_five_has_21_entries(self):
        self.assertEqual(build_index_set(2, 5).size, 21)

    def test_degree_zero_is_the_constant_index(self):
        index_set = build_index_set(2, 0)
        self.assertEqual(list(index_set), [MultiIndex.of(0, 0)])

    def test_graded_order_in_three_dimensions(self):
        index_set = build_index_set(3, 2)
        self.assertEqual(
            [str(index) for index in index_set],
            [
                "(0,0,0)",
                "(1,0,0)",
                "(0,1,0)",
                "(0,0,1)",
                "(2,0,0)",
                "(1,1,0)",
                "(1,0,1)",
                "(0,2,0)",
                "(0,1,1)",
                "(0,0,2)",
            ],
        )

    def test_degrees_are_nondecreasing(self):
        degrees = build_index_set(3, 4).degrees()
        self.assertTrue(all(a <= b for a, b in zip(degrees, degrees[1:])))

    def test_position_round_trip(self):
        index_set = build_index_set(2, 5)
        for position, index in enumerate(index_set):
            self.assertEqual(position_of(index_set, index), position)
            self.assertEqual(index_set[index_set.position_of(index.entries)], index)

    def test_known_positions(self):
        index_set = build_index_set(2, 5)
        self.assertEqual(position_of(index_set, (0, 0)), 0)
        self.assertEqual(position_of(index_set, (1, 0)), 1)
        self.assertEqual(position_of(index_set, (0, 1)), 2)

    def test_rejects_zero_dimensions(self):
        with self.assertRaises(ConfigurationError):
            build_index_set(0, 3)

    def test_rejects_index_outside_set(self):
        index_set = build_index_set(2, 2)
        with self.assertRaises(ConfigurationError):
            position_of(index_set, (2, 1))
        with self.assertRaises(ConfigurationError):
            position_of(index_set, (1, 0, 0))

    def test_rejects_negative_entries(self):
        with self.assertRaises(ConfigurationError):
            MultiIndex.of(1, -1)


if __name__ == "__main__":
    unittest.main()
