import unittest
from fractions import Fraction

from src.diamond_sfm.core.exceptions import ValidationError
from src.diamond_sfm.core.rational import (
    format_fraction,
    is_half_integral,
    lcm_denominator,
    matrix_rank,
    null_vector,
    solve_linear,
    to_fraction,
)


class TestRationalParsing(unittest.TestCase):
    """测试有理数解析与格式化"""

    def test_to_fraction(self) -> None:
        """测试合法输入"""
        self.assertEqual(to_fraction("3/6"), Fraction(1, 2))
        self.assertEqual(to_fraction(" -4 "), Fraction(-4))
        self.assertEqual(to_fraction(7), Fraction(7))
        self.assertEqual(to_fraction(Fraction(2, 3)), Fraction(2, 3))

    def test_rejects_floats_and_bools(self) -> None:
        """测试浮点数与布尔值被拒绝"""
        for value in (0.5, True, "0.5", "1e3", "1/0", "abc", None):
            with self.subTest(value=value):
                with self.assertRaises(ValidationError):
                    to_fraction(value)

    def test_format(self) -> None:
        """测试格式化总是带分母"""
        self.assertEqual(format_fraction(Fraction(3, 6)), "1/2")
        self.assertEqual(format_fraction(-2), "-2/1")

    def test_helpers(self) -> None:
        """测试分母与半整数辅助函数"""
        self.assertEqual(lcm_denominator([Fraction(1, 4), Fraction(1, 6), 3]), 12)
        self.assertEqual(lcm_denominator([]), 1)
        self.assertTrue(is_half_integral(Fraction(3, 2)))
        self.assertFalse(is_half_integral(Fraction(1, 3)))


class TestExactLinearAlgebra(unittest.TestCase):
    """测试精确线性代数"""

    def test_rank(self) -> None:
        """测试秩"""
        self.assertEqual(matrix_rank([[1, 2], [2, 4]]), 1)
        self.assertEqual(matrix_rank([[1, 0], [0, 1], [1, 1]]), 2)
        self.assertEqual(matrix_rank([]), 0)

    def test_solve(self) -> None:
        """测试唯一解、奇异与矛盾"""
        self.assertEqual(solve_linear([[2, 1], [1, 3]], [3, 5]), [Fraction(4, 5), Fraction(7, 5)])
        self.assertIsNone(solve_linear([[1, 1], [2, 2]], [1, 2]))
        self.assertIsNone(solve_linear([[1, 0], [1, 0], [0, 1]], [1, 2, 0]))
        # 超定但相容
        self.assertEqual(solve_linear([[1, 0], [0, 1], [1, 1]], [1, 2, 3]), [1, 2])

    def test_null_vector(self) -> None:
        """测试零空间向量"""
        rows = [[1, 1, 0], [0, 1, 1]]
        vector = null_vector(rows, 3)
        self.assertIsNotNone(vector)
        self.assertTrue(any(v != 0 for v in vector))
        for row in rows:
            self.assertEqual(sum(a * b for a, b in zip(row, vector)), 0)
        self.assertIsNone(null_vector([[1, 0], [0, 1]], 2))
        self.assertEqual(null_vector([], 2), [1, 0])


if __name__ == "__main__":
    unittest.main()
