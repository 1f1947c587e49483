import unittest
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from src.diamond_sfm.core.config import DEFAULT_SETTINGS
from src.diamond_sfm.core.exceptions import BudgetExceededError, EngineError, ValidationError
from src.diamond_sfm.core.lpengine import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    LinearSystem,
    box_radius,
    extreme_rays,
    feasibility,
    is_farkas_certificate,
    make_constraint,
    membership_from_optimization,
    oracle_optimize,
    pm_separation,
    pm_system,
    solve_lp,
    solve_lp_dense,
    system_separation,
    vertices_dense,
)
from src.diamond_sfm.core.oracle import TabulatedFunction

E1 = {"n": 1, "k": 3, "values": {"0": 0, "a1": 1, "a2": 1, "a3": 1, "1": 1}}
E2 = {"n": 1, "k": 3, "values": {"0": 0, "a1": -1, "a2": -1, "a3": -1, "1": -2}}

HALF = Fraction(1, 2)


def _triangle() -> LinearSystem:
    system = LinearSystem(2)
    system.add([1, 2], 4)
    system.add([3, 1], 6)
    system.add([-1, 0], 0)
    system.add([0, -1], 0)
    return system


class TestSimplex(unittest.TestCase):
    """测试精确单纯形法"""

    def test_optimal(self) -> None:
        """测试最优解"""
        result = solve_lp_dense(_triangle(), [1, 1])
        self.assertEqual(result.status, OPTIMAL)
        self.assertEqual(result.point, (Fraction(8, 5), Fraction(6, 5)))
        self.assertEqual(result.value, Fraction(14, 5))
        self.assertEqual(result.to_json()["value"], "14/5")

    def test_equality_and_negative_rhs(self) -> None:
        """测试等式约束与负右端"""
        system = LinearSystem(2)
        system.add([1, 1], 1, "=")
        system.add([-1, 0], 0)
        system.add([0, -1], 0)
        system.add([-1, 0], "-1/4")
        result = solve_lp_dense(system, [0, 1])
        self.assertEqual(result.point, (Fraction(1, 4), Fraction(3, 4)))

    def test_infeasible(self) -> None:
        """测试不可行时的 Farkas 乘子"""
        system = LinearSystem(1)
        system.add([1], -1)
        system.add([-1], 0)
        result = feasibility(system)
        self.assertEqual(result.status, INFEASIBLE)
        self.assertTrue(is_farkas_certificate(system, result.farkas))
        self.assertFalse(is_farkas_certificate(system, [Fraction(1)]))

    def test_unbounded(self) -> None:
        """测试无界时的射线"""
        system = LinearSystem(2)
        system.add([-1, 0], 0)
        system.add([0, 1], 1)
        result = solve_lp_dense(system, [1, 0])
        self.assertEqual(result.status, UNBOUNDED)
        self.assertGreater(result.ray[0], 0)
        self.assertLessEqual(result.ray[1], 0)
        self.assertEqual(solve_lp_dense(LinearSystem(1), [1]).status, UNBOUNDED)
        self.assertEqual(solve_lp_dense(LinearSystem(1), [0]).value, 0)

    def test_validation(self) -> None:
        """测试维数与关系校验"""
        with self.assertRaises(ValidationError):
            LinearSystem(0)
        with self.assertRaises(ValidationError):
            LinearSystem(2).add([1], 0)
        with self.assertRaises(ValidationError):
            make_constraint([1], 0, ">=")
        with self.assertRaises(ValidationError):
            solve_lp_dense(_triangle(), [1])

    def test_box(self) -> None:
        """测试有界框"""
        box = LinearSystem.box(2, 3)
        self.assertEqual(len(box), 4)
        self.assertEqual(solve_lp_dense(box, [1, -1]).point, (3, -3))
        self.assertIsNotNone(system_separation(box)((4, 0)))
        self.assertIsNone(system_separation(box)((3, 0)))


class TestFloatFirstSolve(unittest.TestCase):
    """测试 HiGHS 求基、精确确认的 LP"""

    def test_matches_exact_simplex(self) -> None:
        """唯一最优解与精确单纯形完全一致"""
        result = solve_lp(_triangle(), [1, 1])
        self.assertEqual(result.status, OPTIMAL)
        self.assertEqual(result.point, (Fraction(8, 5), Fraction(6, 5)))
        self.assertEqual(result.value, Fraction(14, 5))

    def test_equality_rows(self) -> None:
        """等式行总在基中"""
        system = LinearSystem(2)
        system.add([1, 1], 1, "=")
        system.add([-1, 0], "-1/4")
        system.add([0, -1], 0)
        self.assertEqual(solve_lp(system, [0, 1]).point, (Fraction(1, 4), Fraction(3, 4)))

    def test_degenerate_vertex(self) -> None:
        """最优顶点上有多余的有效行"""
        system = LinearSystem.box(2, 1)
        system.add([1, 1], 2)
        system.add([1, 2], 3)
        result = solve_lp(system, [1, 1])
        self.assertEqual((result.point, result.value), ((1, 1), 2))

    def test_exact_fallback(self) -> None:
        """不可行与无界时退回精确单纯形，附带 Farkas 乘子与射线"""
        system = LinearSystem(1)
        system.add([1], -1)
        system.add([-1], 0)
        result = solve_lp(system, [1])
        self.assertEqual(result.status, INFEASIBLE)
        self.assertTrue(is_farkas_certificate(system, result.farkas))

        system = LinearSystem(2)
        system.add([-1, 0], 0)
        system.add([0, 1], 1)
        self.assertEqual(solve_lp(system, [1, 0]).status, UNBOUNDED)
        self.assertEqual(solve_lp(LinearSystem(1), [1]).status, UNBOUNDED)

    def test_tiny_and_huge_coefficients(self) -> None:
        """行缩放后系数量级相差很大的系统仍给出精确最优值"""
        system = LinearSystem.box(3, 1)
        system.add([10**9, 1, 0], 10**9)
        system.add([0, Fraction(1, 10**6), Fraction(1, 10**6)], Fraction(1, 10**6))
        result = solve_lp(system, [1, 1, 1])
        self.assertEqual(result.value, solve_lp_dense(system, [1, 1, 1]).value)

    @settings(max_examples=40, deadline=None)
    @given(
        rows=st.lists(
            st.tuples(st.lists(st.integers(-4, 4), min_size=3, max_size=3), st.integers(-3, 6)),
            max_size=6,
        ),
        objective=st.lists(st.integers(-3, 3), min_size=3, max_size=3),
    )
    def test_random_systems(self, rows, objective) -> None:
        """随机有界系统上与精确单纯形的状态与最优值一致"""
        system = LinearSystem.box(3, 5)
        for coefficients, rhs in rows:
            system.add(coefficients, rhs)
        fast = solve_lp(system, objective)
        exact = solve_lp_dense(system, objective)
        self.assertEqual(fast.status, exact.status)
        if exact.is_optimal:
            self.assertEqual(fast.value, exact.value)
            self.assertIsNone(system.first_violation(fast.point))

    def test_cutting_plane_notes(self) -> None:
        """割平面结果记录精确回退次数"""
        f = TabulatedFunction.from_json(E1)
        result = oracle_optimize(pm_separation(f), [1, 1, 1], box_radius(f))
        self.assertEqual(result.value, Fraction(3, 2))
        self.assertIn("exact_fallbacks", result.notes)


class TestDoubleDescription(unittest.TestCase):
    """测试顶点与极射线枚举"""

    def test_pm_vertices(self) -> None:
        """P_M(f) 的全部顶点与极射线"""
        system = pm_system(TabulatedFunction.from_json(E1))
        self.assertEqual(len(system), 7)
        self.assertEqual(
            vertices_dense(system),
            [(0, 0, 1), (0, 1, 0), (HALF, HALF, HALF), (1, 0, 0)],
        )
        self.assertEqual(extreme_rays(system), [(-1, 0, 0), (0, -1, 0), (0, 0, -1)])

    def test_square(self) -> None:
        """测试有界多面体"""
        self.assertEqual(vertices_dense(LinearSystem.box(2, 1)), [(-1, -1), (-1, 1), (1, -1), (1, 1)])
        self.assertEqual(extreme_rays(LinearSystem.box(2, 1)), [])

    def test_limits(self) -> None:
        """测试含直线的多面体与维数预算"""
        system = LinearSystem(2)
        system.add([1, 0], 1)
        with self.assertRaises(EngineError) as context:
            vertices_dense(system)
        self.assertEqual(context.exception.error_code, "ENGINE_004")
        with self.assertRaises(BudgetExceededError):
            vertices_dense(LinearSystem.box(7, 1))

    def test_empty(self) -> None:
        """测试空多面体"""
        system = LinearSystem(1)
        system.add([0], -1)
        self.assertEqual(vertices_dense(system), [])


class TestOracleOptimize(unittest.TestCase):
    """测试只依赖分离 oracle 的优化"""

    def setUp(self) -> None:
        self.f = TabulatedFunction.from_json(E1)
        self.radius = box_radius(self.f)

    def test_box_radius(self) -> None:
        """R = 4·n·k·max|f| + 1"""
        self.assertEqual(self.radius, 13)

    def test_engines_agree(self) -> None:
        """两种引擎给出相同的精确最优解"""
        for engine in ("cuttingplane", "ellipsoid"):
            with self.subTest(engine=engine):
                result = oracle_optimize(pm_separation(self.f), [1, 1, 1], self.radius, engine)
                self.assertTrue(result.is_optimal)
                self.assertEqual(result.value, Fraction(3, 2))
                self.assertEqual(result.point, (HALF, HALF, HALF))

    def test_single_atom_objective(self) -> None:
        """测试单个原子方向"""
        result = oracle_optimize(pm_separation(self.f), [1, 0, 0], self.radius)
        self.assertEqual(result.value, 1)

    def test_equalities(self) -> None:
        """测试带等式约束的优化"""
        equality = make_constraint([1, 0, 0], 0, "=")
        result = oracle_optimize(
            pm_separation(self.f), [1, 1, 1], self.radius, equalities=[equality]
        )
        self.assertEqual(result.point[0], 0)
        self.assertEqual(result.value, 1)

    def test_empty_region(self) -> None:
        """区域为空时返回 infeasible"""
        equality = make_constraint([1, 0, 0], 2, "=")
        result = oracle_optimize(pm_separation(self.f), [1, 1, 1], self.radius, equalities=[equality])
        self.assertEqual(result.status, INFEASIBLE)

    def test_unknown_engine(self) -> None:
        """测试未知引擎"""
        with self.assertRaises(ValidationError):
            oracle_optimize(pm_separation(self.f), [1, 1, 1], self.radius, "simplex")

    def test_iteration_limit(self) -> None:
        """测试割平面迭代上限"""
        limited = DEFAULT_SETTINGS.with_overrides(cut_max_iterations=1)
        with self.assertRaises(EngineError) as context:
            oracle_optimize(pm_separation(self.f), [1, 1, 1], self.radius, settings=limited)
        self.assertEqual(context.exception.error_code, "ENGINE_005")


class TestMembershipFromOptimization(unittest.TestCase):
    """测试由优化 oracle 判定成员关系"""

    @staticmethod
    def _optimizer(f: TabulatedFunction):
        separate = pm_separation(f)
        radius = box_radius(f)
        return lambda c: oracle_optimize(separate, c, radius)

    def test_origin_inside(self) -> None:
        """非负函数的 P_M(f) 含原点"""
        verdict = membership_from_optimization(self._optimizer(TabulatedFunction.from_json(E1)), 3)
        self.assertTrue(verdict)

    def test_origin_outside(self) -> None:
        """存在负值时原点不属于 P_M(f)"""
        verdict = membership_from_optimization(self._optimizer(TabulatedFunction.from_json(E2)), 3)
        self.assertFalse(verdict)
        self.assertLess(verdict.value, 0)
        self.assertTrue(all(c >= 0 for c in verdict.objective))

    def test_floor(self) -> None:
        """测试目标下界"""
        optimize = self._optimizer(TabulatedFunction.from_json(E2))
        verdict = membership_from_optimization(optimize, 3, floor=Fraction(1, 4))
        self.assertFalse(verdict)
        self.assertTrue(all(c >= Fraction(1, 4) for c in verdict.objective))
        with self.assertRaises(ValidationError) as context:
            membership_from_optimization(optimize, 3, floor=HALF)
        self.assertEqual(context.exception.error_code, "LP_005")

    def test_explicit_point(self) -> None:
        """测试给定点的成员判定"""
        optimize = self._optimizer(TabulatedFunction.from_json(E1))
        self.assertTrue(membership_from_optimization(optimize, 3, [HALF, HALF, HALF]))
        self.assertFalse(membership_from_optimization(optimize, 3, [1, 1, 0]))


if __name__ == "__main__":
    unittest.main()
