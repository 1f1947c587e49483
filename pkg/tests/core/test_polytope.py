import unittest
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from src.diamond_sfm.core.exceptions import BudgetExceededError, ValidationError
from src.diamond_sfm.core.lattice import LatticeTuple, enumerate_tuples
from src.diamond_sfm.core.oracle import CallableFunction, TabulatedFunction
from src.diamond_sfm.core.polytope import (
    PVector,
    TightChain,
    apply,
    best_selector,
    enumerate_ineqs,
    is_base_dense,
    is_member_dense,
    is_unified,
    maximizing_pairs,
    s_value,
    selector_count,
    tight_tuples_dense,
    top_two,
    unify,
    vertex_pattern,
)

E1 = {"n": 1, "k": 3, "values": {"0": 0, "a1": 1, "a2": 1, "a3": 1, "1": 1}}

rows = st.lists(
    st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=6), min_size=3, max_size=3),
    min_size=1,
    max_size=3,
)


class TestPVector(unittest.TestCase):
    """测试 PVector"""

    def test_layout(self) -> None:
        """测试行主序布局"""
        x = PVector.from_rows([[1, 2, 3], [4, 5, 6]])
        self.assertEqual(x.get(1, 2), 5)
        self.assertEqual(x.row(0), (1, 2, 3))
        self.assertEqual(PVector.unit(2, 3, 1, 3).entries, (0, 0, 0, 0, 0, 1))
        self.assertEqual(PVector.coordinate_unit(2, 3, 0).entries, (1, 1, 1, 0, 0, 0))

    def test_arithmetic(self) -> None:
        """测试运算"""
        x = PVector.from_rows([[1, -2, 3]])
        y = PVector.from_rows([[1, 1, 1]])
        self.assertEqual((x + y).row(0), (2, -1, 4))
        self.assertEqual((x - y).row(0), (0, -3, 2))
        self.assertEqual(x.dot(y), 2)
        self.assertEqual(x.scale("1/2").row(0), (Fraction(1, 2), -1, Fraction(3, 2)))
        self.assertEqual(x.negative_part().row(0), (0, -2, 0))
        self.assertFalse(x.is_nonpositive())
        with self.assertRaises(ValidationError):
            x + PVector.zeros(2, 3)

    def test_json(self) -> None:
        """测试向量 JSON"""
        x = PVector.from_rows([["1/2", 0, -1]])
        data = x.to_json()
        self.assertEqual(data["entries"][0], [0, "a1", "1/2"])
        self.assertEqual(data["entries"][2], [0, "a3", "-1/1"])
        self.assertEqual(PVector.from_json(data), x)

    def test_json_errors(self) -> None:
        """测试向量 JSON 的错误"""
        good = PVector.zeros(1, 3).to_json()
        cases = [
            ({"n": 1, "k": 3}, "POLYTOPE_003"),
            ({"n": 0, "k": 3, "entries": []}, "POLYTOPE_003"),
            ({**good, "entries": good["entries"][:2]}, "POLYTOPE_001"),
            ({**good, "entries": good["entries"] + [[0, "a1", "0"]]}, "POLYTOPE_004"),
            ({**good, "entries": [[1, "a1", "0"]] + good["entries"][1:]}, "POLYTOPE_004"),
            ({**good, "entries": [[0, "a1"]] + good["entries"][1:]}, "POLYTOPE_003"),
        ]
        for data, code in cases:
            with self.subTest(code=code, data=data):
                with self.assertRaises(ValidationError) as context:
                    PVector.from_json(data)
                self.assertEqual(context.exception.error_code, code)
        with self.assertRaises(ValidationError):
            PVector.from_json({**good, "entries": [[0, "a1", "0.5"]] + good["entries"][1:]})


class TestApply(unittest.TestCase):
    """测试 x(t) 与选择子"""

    def test_apply(self) -> None:
        """测试底元、原子、顶元的贡献"""
        x = PVector.from_rows([[3, 2, 1], [0, -1, 5]])
        self.assertEqual(apply(x, LatticeTuple.parse("1,0", 3)), 5)
        self.assertEqual(apply(x, LatticeTuple.parse("a3,1", 3)), 1 + 5)
        self.assertEqual(apply(x, LatticeTuple.parse("0,a2", 3)), -1)

    def test_pairs(self) -> None:
        """测试最大原子对"""
        row = (Fraction(1), Fraction(1), Fraction(1))
        self.assertEqual(top_two(row), (1, 2))
        self.assertEqual(maximizing_pairs(row), [(1, 2), (1, 3), (2, 3)])
        self.assertEqual(maximizing_pairs((Fraction(2), Fraction(1), Fraction(1))), [(1, 2), (1, 3)])

    def test_selectors(self) -> None:
        """测试选择子的枚举与最优选择子"""
        t = LatticeTuple.parse("1,a2,0", 3)
        self.assertEqual(selector_count(t), 3)
        selectors = list(enumerate_ineqs(t))
        self.assertEqual(len(selectors), 3)
        x = PVector.from_rows([[0, 2, 1], [5, 7, 9], [1, 1, 1]])
        best = best_selector(x, t)
        self.assertEqual(best.choices, ((2, 3), (2,), None))
        self.assertEqual(best.value(x), apply(x, t))
        self.assertEqual(max(s.value(x) for s in selectors), apply(x, t))
        self.assertEqual(best.as_vector(3, 3).row(0), (0, 1, 1))
        self.assertEqual(best.to_json(), [["a2", "a3"], ["a2"], None])
        with self.assertRaises(BudgetExceededError):
            list(enumerate_ineqs(LatticeTuple.top(3, 3), budget=10))

    @settings(max_examples=100)
    @given(rows)
    def test_apply_is_max_over_selectors(self, data) -> None:
        """x(t) 等于全部选择子取值的最大值"""
        x = PVector.from_rows(data)
        for t in enumerate_tuples(x.n, 3):
            self.assertEqual(apply(x, t), max(s.value(x) for s in enumerate_ineqs(t)))


class TestMembership(unittest.TestCase):
    """测试稠密成员检查"""

    def setUp(self) -> None:
        self.f = TabulatedFunction.from_json(E1)

    def test_member_and_base(self) -> None:
        """测试成员与基"""
        x = PVector.from_rows([[1, 0, 0]])
        self.assertTrue(is_member_dense(x, self.f))
        self.assertTrue(is_base_dense(x, self.f))
        half = PVector.from_rows([["1/2", "1/2", "1/2"]])
        self.assertTrue(is_base_dense(half, self.f))
        low = PVector.from_rows([[0, 0, 0]])
        self.assertTrue(is_member_dense(low, self.f))
        self.assertFalse(is_base_dense(low, self.f))

    def test_violation(self) -> None:
        """测试违反的元组"""
        result = is_member_dense(PVector.from_rows([[1, 1, 0]]), self.f)
        self.assertFalse(result)
        self.assertEqual(result.violated.text(), "1")
        with self.assertRaises(ValidationError):
            tight_tuples_dense(PVector.from_rows([[2, 0, 0]]), self.f)

    def test_tight_tuples(self) -> None:
        """测试紧元组"""
        x = PVector.from_rows([[1, 0, 0]])
        self.assertEqual([t.text() for t in tight_tuples_dense(x, self.f)], ["0", "a1", "1"])

    def test_modular_function(self) -> None:
        """秩函数下全 1 向量处处紧"""
        f = CallableFunction(2, 3, lambda t: t.rank())
        x = PVector.from_rows([[1, 1, 1], [1, 1, 1]])
        self.assertEqual(len(tight_tuples_dense(x, f)), 25)


class TestUnifyAndChains(unittest.TestCase):
    """测试统一化与紧链"""

    def test_unify(self) -> None:
        """测试统一化"""
        x = PVector.from_rows([[3, 2, 1], [1, 1, 4]])
        y = unify(x)
        self.assertEqual(y.rows(), [(3, 1, 1), (1, 1, 4)])
        self.assertTrue(is_unified(y))
        self.assertFalse(is_unified(x))
        self.assertEqual(s_value(x), 4 + 5)

    def test_vertex_pattern(self) -> None:
        """测试顶点坐标形态"""
        self.assertEqual(vertex_pattern((Fraction(1),) * 3), "equal")
        self.assertEqual(vertex_pattern((Fraction(2), Fraction(1), Fraction(1))), "one_above")
        self.assertEqual(vertex_pattern((Fraction(0), Fraction(1), Fraction(1))), "one_below")
        self.assertIsNone(vertex_pattern((Fraction(0), Fraction(1), Fraction(2))))

    def test_tight_chain(self) -> None:
        """测试紧链的结构信息"""
        chain = TightChain(
            tuple(LatticeTuple.parse(s, 3) for s in ("0,0", "a1,0", "1,1"))
        )
        self.assertTrue(chain.spans_lattice())
        self.assertEqual(chain.step_jumps(), [0, 1])
        self.assertEqual(chain.max_jumps(), 1)
        self.assertEqual(chain.text(), ["0,0", "a1,0", "1,1"])
        with self.assertRaises(ValidationError):
            TightChain((LatticeTuple.parse("1,1", 3), LatticeTuple.parse("0,0", 3)))
        with self.assertRaises(ValidationError):
            TightChain(())


if __name__ == "__main__":
    unittest.main()
