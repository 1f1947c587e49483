import unittest
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from src.diamond_sfm.core.config import DEFAULT_SETTINGS
from src.diamond_sfm.core.exceptions import FaceEmptyError, ValidationError
from src.diamond_sfm.core.greedy import greedy_base
from src.diamond_sfm.core.lattice import LatticeTuple
from src.diamond_sfm.core.lpengine import INFEASIBLE, OPTIMAL, UNBOUNDED, pm_system, solve_lp_dense
from src.diamond_sfm.core.minimize import (
    chain_separate,
    face_optimize,
    improving_direction,
    minimize,
    optimize_P,
    recover_tight_chain,
    separate_zero,
)
from src.diamond_sfm.core.oracle import (
    TabulatedFunction,
    brute_min,
    normalize,
    random_submodular,
    strictify,
)
from src.diamond_sfm.core.polytope import PVector, TightChain, apply, is_member_dense, tight_tuples_dense

E1 = {"n": 1, "k": 3, "values": {"0": 0, "a1": 1, "a2": 1, "a3": 1, "1": 1}}
E2 = {"n": 1, "k": 3, "values": {"0": 0, "a1": -1, "a2": -1, "a3": -1, "1": -2}}

HALF = Fraction(1, 2)


def _chain(*texts: str, k: int = 3, **options) -> TightChain:
    return TightChain(tuple(LatticeTuple.parse(text, k) for text in texts), **options)


class TestChainSeparate(unittest.TestCase):
    """测试沿紧链的成员判定"""

    def setUp(self) -> None:
        self.f = TabulatedFunction.from_json(E1)

    def test_greedy_vertex_is_member(self) -> None:
        """贪心向量沿其紧链判定为属于"""
        start = greedy_base(self.f)
        verdict = chain_separate(start.vector, self.f, start.tight_chain)
        self.assertTrue(verdict)
        self.assertGreater(verdict.minimizations, 0)

    def test_violation(self) -> None:
        """(1,1,0) 在顶元上超出 1"""
        x = PVector.from_rows([[1, 1, 0]])
        verdict = chain_separate(x, self.f, _chain("0", "a1", "1"))
        self.assertFalse(verdict)
        self.assertEqual(verdict.violated.text(), "1")
        self.assertEqual(verdict.excess, 1)
        self.assertEqual(verdict.selector.value(x), apply(x, verdict.violated))

    def test_negative_bottom(self) -> None:
        """f(0) < 0 时直接报告底元"""
        f = TabulatedFunction.from_json({"n": 1, "k": 3, "values": {**E1["values"], "0": -1}})
        verdict = chain_separate(PVector.zeros(1, 3), f, _chain("0", "1"))
        self.assertFalse(verdict)
        self.assertTrue(verdict.violated.is_bottom())

    def test_preconditions(self) -> None:
        """测试链的前提条件"""
        x = PVector.from_rows([[1, 0, 0]])
        cases = [
            (x, _chain("0", "a1"), "MIN_002"),
            (x, _chain("0", "a2", "1"), "MIN_003"),
            (PVector.zeros(2, 3), _chain("0", "1"), "MIN_011"),
        ]
        for vector, chain, code in cases:
            with self.subTest(code=code):
                with self.assertRaises(ValidationError) as context:
                    chain_separate(vector, self.f, chain)
                self.assertEqual(context.exception.error_code, code)

    def test_jump_bound(self) -> None:
        """跳变坐标超过上界"""
        f = normalize(random_submodular(2, 3, 4, seed=2))
        x = PVector.zeros(2, 3)
        with self.assertRaises(ValidationError) as context:
            chain_separate(x, f, _chain("0,0", "1,1", jump_bound=1))
        self.assertEqual(context.exception.error_code, "MIN_004")


class TestVertexImprovement(unittest.TestCase):
    """测试改进方向、面上优化与紧元组恢复"""

    def setUp(self) -> None:
        self.f = TabulatedFunction.from_json(E1)
        self.h = strictify(self.f)

    def test_direction_from_greedy_vertex(self) -> None:
        """贪心顶点不是 (1,1,1) 的最优点，存在改进方向"""
        start = greedy_base(self.h)
        direction = improving_direction(start.vector, self.h, start.tight_chain, [1, 1, 1])
        self.assertTrue(direction)
        self.assertEqual(direction.z.dot(PVector.from_rows([[1, 1, 1]])), 1)
        self.assertTrue(direction.kept[-1].is_top())
        self.assertEqual(direction.to_json()["value"], 1)

    def test_zero_objective(self) -> None:
        """零目标没有改进方向"""
        start = greedy_base(self.h)
        direction = improving_direction(start.vector, self.h, start.tight_chain, [0, 0, 0])
        self.assertFalse(direction)
        self.assertIsNone(direction.z)

    def test_no_direction_at_optimum(self) -> None:
        """最优顶点处没有改进方向"""
        best = optimize_P([1, 1, 1], self.h)
        direction = improving_direction(best.vector, self.h, best.chain, [1, 1, 1])
        self.assertFalse(direction)

    def test_face_optimize(self) -> None:
        """只要求原子对 (1,2) 在顶元上取等时最优点为 1/2 向量"""
        x = PVector.from_rows([[1, 0, 0]])
        y = face_optimize([1, 1, 1], x, self.f, _chain("0", "1"), (((1, 2),),))
        self.assertEqual(y.rows(), [(HALF, HALF, HALF)])
        self.assertIs(face_optimize([0, 0, 0], x, self.f, _chain("0", "1")), x)

    def test_empty_face(self) -> None:
        """相互矛盾的等式约束给出空面"""
        x = PVector.from_rows([[1, 0, 0]])
        with self.assertRaises(FaceEmptyError) as context:
            face_optimize([1, 1, 1], x, self.f, _chain("0", "a1", "1"), (((2, 3),),))
        self.assertEqual(context.exception.error_code, "ENGINE_008")

    def test_recover_tight_chain(self) -> None:
        """从两端构成的面恢复出顶点的全部紧元组"""
        for seed in (1, 7, 19):
            with self.subTest(seed=seed):
                h = strictify(normalize(random_submodular(2, 3, 6, seed)))
                x = greedy_base(h).vector
                face = TightChain((h.bottom(), h.top()), jump_bound=2)
                chain = recover_tight_chain(x, h, face)
                self.assertEqual(
                    {t.positions for t in chain},
                    {t.positions for t in tight_tuples_dense(x, h)},
                )
                self.assertEqual(len(chain), 2 * h.n + 1)


class TestOptimizeP(unittest.TestCase):
    """测试 P_M(f) 上的线性优化"""

    def setUp(self) -> None:
        self.f = TabulatedFunction.from_json(E1)

    def test_example(self) -> None:
        """(1,1,1) 的最优值为 3/2，在 1/2 向量处取到"""
        result = optimize_P([1, 1, 1], self.f)
        self.assertTrue(result.is_optimal)
        self.assertEqual(result.value, Fraction(3, 2))
        self.assertEqual(result.vector.rows(), [(HALF, HALF, HALF)])
        self.assertEqual(result.to_json()["value"], "3/2")

    def test_rational_and_zero_entries(self) -> None:
        """有理目标与含零分量的目标"""
        self.assertEqual(optimize_P(["1/2", "1/2", "1/2"], self.f).value, Fraction(3, 4))
        self.assertEqual(optimize_P([1, 0, 0], self.f).value, 1)

    def test_zero_objective(self) -> None:
        """零目标返回贪心顶点"""
        result = optimize_P([0, 0, 0], self.f)
        self.assertEqual(result.status, OPTIMAL)
        self.assertEqual(result.value, 0)
        self.assertEqual(result.vector.rows(), [(1, 0, 0)])

    def test_infeasible_and_unbounded(self) -> None:
        """f(0) < 0 时为空，负分量方向无界"""
        f = TabulatedFunction.from_json({"n": 1, "k": 3, "values": {**E1["values"], "0": -1}})
        self.assertEqual(optimize_P([1, 1, 1], f).status, INFEASIBLE)
        result = optimize_P([1, -1, 0], self.f)
        self.assertEqual(result.status, UNBOUNDED)
        self.assertEqual(result.ray.rows(), [(0, -1, 0)])
        self.assertIn("ray", result.to_json())

    def test_dimension_mismatch(self) -> None:
        """目标维数错误"""
        with self.assertRaises(ValidationError) as context:
            optimize_P([1, 1], self.f)
        self.assertEqual(context.exception.error_code, "MIN_011")

    def test_trace(self) -> None:
        """顶点改进的每一步写入 trace"""
        steps = []
        optimize_P([1, 1, 1], strictify(self.f), trace=steps)
        self.assertTrue(steps)
        self.assertFalse(steps[-1]["improved"])

    @settings(max_examples=8, deadline=None)
    @given(
        seed=st.integers(0, 10_000),
        c=st.lists(st.integers(1, 3), min_size=3, max_size=3),
    )
    def test_matches_dense_lp(self, seed: int, c) -> None:
        """与显式不等式组上的单纯形法给出相同的最优值"""
        f = normalize(random_submodular(1, 3, 8, seed))
        result = optimize_P(c, f)
        expected = solve_lp_dense(pm_system(f), c)
        self.assertEqual(result.value, expected.value)
        self.assertTrue(is_member_dense(result.vector, f))
        self.assertEqual(result.vector.dot(PVector(1, 3, tuple(Fraction(v) for v in c))), result.value)


class TestSeparateZero(unittest.TestCase):
    """测试 0 ∈ P_M(f) 的判定"""

    def test_examples(self) -> None:
        """非负函数含 0，E2 给出负的违反元组"""
        self.assertTrue(separate_zero(TabulatedFunction.from_json(E1)))
        f = TabulatedFunction.from_json(E2)
        verdict = separate_zero(f)
        self.assertFalse(verdict)
        self.assertLess(f(verdict.violated), 0)

    def test_negative_bottom(self) -> None:
        """f(0) < 0 时底元就是违反元组"""
        f = TabulatedFunction.from_json({"n": 1, "k": 3, "values": {**E1["values"], "0": -1}})
        verdict = separate_zero(f)
        self.assertFalse(verdict)
        self.assertTrue(verdict.violated.is_bottom())


class TestMinimize(unittest.TestCase):
    """测试整体最小化"""

    def test_examples(self) -> None:
        """示例实例的最小值与最小点"""
        result = minimize(TabulatedFunction.from_json(E1))
        self.assertEqual((result.value, result.minimizer.text()), (0, "0"))
        self.assertEqual(result.separations, 0)

        result = minimize(TabulatedFunction.from_json(E2))
        self.assertEqual((result.value, result.minimizer.text()), (-2, "1"))
        self.assertEqual(result.brackets, ((-2, 0), (-2, -2)))
        self.assertEqual(result.separations, 1)
        data = result.to_json()
        self.assertEqual(data["brackets"], [[-2, 0], [-2, -2]])
        self.assertNotIn("dual", data)

    def test_dual_and_trace(self) -> None:
        """附带对偶向量与过程记录"""
        f = TabulatedFunction.from_json(E2)
        result = minimize(f, emit_dual=True, trace=True)
        self.assertTrue(result.dual.is_nonpositive())
        self.assertEqual(apply(result.dual, f.top()), result.value)
        self.assertTrue(result.trace)
        self.assertIn("trace", result.to_json())
        self.assertEqual(result.to_json()["dual"]["n"], 1)

    def test_witness_recovery(self) -> None:
        """witness 方式的最小点取到最小值"""
        f = random_submodular(2, 3, 8, seed=4)
        result = minimize(f, DEFAULT_SETTINGS.with_overrides(minimizer_recovery="witness"))
        self.assertEqual(f(result.minimizer), result.value)
        self.assertEqual(result.value, brute_min(f)[0])

    @settings(max_examples=12, deadline=None)
    @given(
        shape=st.sampled_from([(1, 3), (2, 3), (3, 3), (1, 4), (2, 4)]),
        bound=st.integers(0, 10),
        seed=st.integers(0, 10_000),
    )
    def test_matches_brute_force(self, shape: tuple[int, int], bound: int, seed: int) -> None:
        """最小值与第一个最小点都与暴力枚举一致（k = 3 时直到 n = 3）"""
        n, k = shape
        f = random_submodular(n, k, bound, seed)
        result = minimize(f)
        self.assertEqual((result.value, result.minimizer), brute_min(f))

    def test_three_coordinates(self) -> None:
        """n = 3 的实例：最小值、第一个最小点与对偶值"""
        f = random_submodular(3, 3, 20, 2)
        result = minimize(f, emit_dual=True)
        self.assertEqual((result.value, result.minimizer), brute_min(f))
        self.assertEqual(apply(result.dual, f.top()) + f(f.bottom()), result.value)

    def test_engines_agree(self) -> None:
        """两种引擎给出相同结果"""
        f = random_submodular(2, 3, 6, seed=8)
        expected = brute_min(f)
        for engine in ("cuttingplane", "ellipsoid"):
            with self.subTest(engine=engine):
                result = minimize(f, DEFAULT_SETTINGS.with_overrides(engine=engine))
                self.assertEqual((result.value, result.minimizer), expected)


if __name__ == "__main__":
    unittest.main()
