"""线性规划引擎模块 (LP Engine)

* 显式线性系统上的精确有理数单纯形法（两阶段、Bland 规则），
  不可行时给出 Farkas 乘子，无界时给出射线；
* solve_lp：scipy HiGHS 浮点求基，再精确重建顶点并检查原始、对偶可行性，
  检查不通过时退回精确单纯形；割平面与成员判定的主问题都走这条路径；
* 双描述法枚举小规模多面体的全部顶点与极射线；
* 只依赖分离 oracle 的优化：精确割平面引擎 (cuttingplane) 与
  numpy 浮点中心割椭球引擎 (ellipsoid)，后者最终总由精确引擎收尾；
* 由优化 oracle 判定点的成员关系（Kelley 支撑函数割平面）。

Example:
>>> from diamond_sfm.core.lpengine import LinearSystem, solve_lp_dense
>>> system = LinearSystem(1)
>>> system.add([1], 0)
>>> solve_lp_dense(system, [1]).value
Fraction(0, 1)
"""

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Callable, Dict, Iterator, List, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog

from ..utils.logging_utils import get_logger
from .config import DEFAULT_SETTINGS, SolverSettings
from .exceptions import BudgetExceededError, EngineError, ValidationError
from .lattice import DEFAULT_ENUMERATION_BUDGET, enumerate_tuples
from .oracle import OracleFunction
from .polytope import PVector, apply, best_selector, enumerate_ineqs
from .rational import dot, format_fraction, matrix_rank, solve_linear, to_fraction

logger = get_logger(__name__)

Point = Tuple[Fraction, ...]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

SIMPLEX_PIVOT_LIMIT = 100_000
ELLIPSOID_GRID_DENOMINATOR = 1 << 20
ACTIVE_TOLERANCE = 1e-7
RANK_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Constraint:
    """⟨coefficients, x⟩ ≤ rhs（relation 为 "=" 时取等号）"""

    coefficients: Point
    rhs: Fraction
    relation: str = "<="

    def lhs(self, point: Sequence[Fraction]) -> Fraction:
        return dot(self.coefficients, point)

    def satisfied_by(self, point: Sequence[Fraction]) -> bool:
        value = self.lhs(point)
        return value == self.rhs if self.relation == "=" else value <= self.rhs

    def to_json(self) -> Dict[str, Any]:
        return {
            "coefficients": [format_fraction(v) for v in self.coefficients],
            "relation": self.relation,
            "rhs": format_fraction(self.rhs),
        }


def make_constraint(coefficients: Sequence[Any], rhs: Any, relation: str = "<=") -> Constraint:
    if relation not in ("<=", "="):
        raise ValidationError(f"未知的约束关系: {relation}", "LP_002", actual=relation)
    return Constraint(tuple(to_fraction(v) for v in coefficients), to_fraction(rhs), relation)


class LinearSystem:
    """显式线性约束系统

    Example:
    >>> box = LinearSystem.box(2, 1)
    >>> len(box)
    4
    """

    def __init__(self, dimension: int, constraints: Sequence[Constraint] = ()) -> None:
        if dimension < 1:
            raise ValidationError("线性系统的维数至少为 1", "LP_001", actual=dimension)
        self.dimension = dimension
        self._constraints: List[Constraint] = []
        # 按最大系数归一化的浮点副本，供 HiGHS 求解
        self._scaled: List[Tuple[List[float], float]] = []
        for constraint in constraints:
            self.append(constraint)

    def append(self, constraint: Constraint) -> Constraint:
        if len(constraint.coefficients) != self.dimension:
            raise ValidationError(
                f"约束有 {len(constraint.coefficients)} 个系数，系统维数为 {self.dimension}",
                "LP_001",
                expected=self.dimension,
                actual=len(constraint.coefficients),
            )
        self._constraints.append(constraint)
        row = [float(v) for v in constraint.coefficients]
        scale = max((abs(v) for v in row), default=0.0) or 1.0
        self._scaled.append(([v / scale for v in row], float(constraint.rhs) / scale))
        return constraint

    def add(self, coefficients: Sequence[Any], rhs: Any, relation: str = "<=") -> Constraint:
        return self.append(make_constraint(coefficients, rhs, relation))

    @classmethod
    def box(cls, dimension: int, radius: Any) -> "LinearSystem":
        """−radius ≤ x_j ≤ radius"""

        system = cls(dimension)
        for j in range(dimension):
            unit = [0] * dimension
            unit[j] = 1
            system.add(unit, radius)
            system.add([-v for v in unit], radius)
        return system

    def copy(self) -> "LinearSystem":
        return LinearSystem(self.dimension, self._constraints)

    def first_violation(self, point: Sequence[Fraction]) -> Constraint | None:
        return next((c for c in self._constraints if not c.satisfied_by(point)), None)

    def scaled_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        """浮点副本 (A, b)，每行除以其最大系数绝对值"""

        return (
            np.array([row for row, _ in self._scaled], dtype=float).reshape(-1, self.dimension),
            np.array([rhs for _, rhs in self._scaled], dtype=float),
        )

    def has_equalities(self) -> bool:
        return any(c.relation == "=" for c in self._constraints)

    def __len__(self) -> int:
        return len(self._constraints)

    def __iter__(self) -> Iterator[Constraint]:
        return iter(self._constraints)

    def __repr__(self) -> str:
        return f"LinearSystem(dimension={self.dimension}, constraints={len(self)})"


@dataclass(frozen=True)
class LPResult:
    """LP 结果：optimal 带最优点与值；infeasible 带 Farkas 乘子；unbounded 带射线"""

    status: str
    point: Point | None = None
    value: Fraction | None = None
    ray: Point | None = None
    farkas: Point | None = None
    iterations: int = 0
    notes: Dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"status": self.status, "iterations": self.iterations}
        if self.point is not None:
            data["point"] = [format_fraction(v) for v in self.point]
        if self.value is not None:
            data["value"] = format_fraction(self.value)
        if self.ray is not None:
            data["ray"] = [format_fraction(v) for v in self.ray]
        return data


def _as_point(vector: Any, dimension: int) -> Point:
    values = vector.entries if isinstance(vector, PVector) else vector
    point = tuple(to_fraction(v) for v in values)
    if len(point) != dimension:
        raise ValidationError(
            f"向量长度 {len(point)} 与维数 {dimension} 不一致",
            "LP_003",
            expected=dimension,
            actual=len(point),
        )
    return point


class _Tableau:
    """标准型 A·y = b, y ≥ 0, b ≥ 0 的单纯形表，末尾 m 列为人工变量"""

    def __init__(self, matrix: List[List[Fraction]], rhs: List[Fraction], width: int) -> None:
        m = len(matrix)
        self.width = width
        self.rows = [
            row + [Fraction(1) if j == i else Fraction(0) for j in range(m)]
            for i, row in enumerate(matrix)
        ]
        self.rhs = list(rhs)
        self.basis = [width + i for i in range(m)]
        self.pivots = 0

    def objective(self, cost: Sequence[Fraction]) -> Fraction:
        return sum((cost[b] * v for b, v in zip(self.basis, self.rhs)), Fraction(0))

    def reduced_cost(self, cost: Sequence[Fraction], col: int) -> Fraction:
        return cost[col] - sum(
            (cost[b] * row[col] for b, row in zip(self.basis, self.rows) if row[col]),
            Fraction(0),
        )

    def pivot(self, r: int, col: int) -> None:
        lead = self.rows[r][col]
        self.rows[r] = [v / lead for v in self.rows[r]]
        self.rhs[r] /= lead
        for i, row in enumerate(self.rows):
            factor = row[col]
            if i != r and factor:
                self.rows[i] = [a - factor * b for a, b in zip(row, self.rows[r])]
                self.rhs[i] -= factor * self.rhs[r]
        self.basis[r] = col
        self.pivots += 1

    def drop_row(self, r: int) -> None:
        del self.rows[r]
        del self.rhs[r]
        del self.basis[r]

    def run(self, cost: Sequence[Fraction], columns: Sequence[int]) -> int | None:
        """Bland 规则最小化；返回 None 表示最优，否则返回无界的入基列"""

        while True:
            if self.pivots > SIMPLEX_PIVOT_LIMIT:
                raise EngineError(
                    f"单纯形法超过 {SIMPLEX_PIVOT_LIMIT} 次转轴",
                    "ENGINE_001",
                    engine="simplex",
                    iterations=self.pivots,
                )
            entering = next((j for j in columns if self.reduced_cost(cost, j) < 0), None)
            if entering is None:
                return None
            best: Tuple[Fraction, int, int] | None = None
            for i, row in enumerate(self.rows):
                if row[entering] > 0:
                    candidate = (self.rhs[i] / row[entering], self.basis[i], i)
                    if best is None or candidate < best:
                        best = candidate
            if best is None:
                return entering
            self.pivot(best[2], entering)


def solve_lp_dense(system: LinearSystem, objective: Any) -> LPResult:
    """在显式系统上精确求 max ⟨objective, x⟩（x 无符号限制）

    两阶段单纯形：x = x⁺ − x⁻，"≤" 行加松弛变量，全部行加人工变量。

    Raises:
        EngineError: 转轴次数超过保护上限
    """

    n = system.dimension
    c = _as_point(objective, n)
    constraints = list(system)
    slack_of: Dict[int, int] = {}
    for r, constraint in enumerate(constraints):
        if constraint.relation == "<=":
            slack_of[r] = len(slack_of)
    width = 2 * n + len(slack_of)

    matrix: List[List[Fraction]] = []
    rhs: List[Fraction] = []
    signs: List[int] = []
    for r, constraint in enumerate(constraints):
        row = list(constraint.coefficients) + [-v for v in constraint.coefficients]
        row += [Fraction(0)] * len(slack_of)
        if r in slack_of:
            row[2 * n + slack_of[r]] = Fraction(1)
        sign = -1 if constraint.rhs < 0 else 1
        matrix.append([sign * v for v in row])
        rhs.append(sign * constraint.rhs)
        signs.append(sign)

    if not constraints:
        if any(c):
            ray = tuple(Fraction(v > 0) - Fraction(v < 0) for v in c)
            return LPResult(UNBOUNDED, ray=ray)
        return LPResult(OPTIMAL, tuple([Fraction(0)] * n), Fraction(0))

    m = len(constraints)
    tableau = _Tableau(matrix, rhs, width)
    phase_one = [Fraction(0)] * width + [Fraction(1)] * m
    tableau.run(phase_one, range(width + m))
    if tableau.objective(phase_one) > 0:
        multipliers = [
            sum(
                (phase_one[b] * row[width + i] for b, row in zip(tableau.basis, tableau.rows)),
                Fraction(0),
            )
            for i in range(m)
        ]
        farkas = tuple(-p * s for p, s in zip(multipliers, signs))
        logger.debug("线性系统不可行，%s 次转轴", tableau.pivots)
        return LPResult(INFEASIBLE, farkas=farkas, iterations=tableau.pivots)

    for r in range(len(tableau.rows) - 1, -1, -1):
        if tableau.basis[r] >= width:
            col = next((j for j in range(width) if tableau.rows[r][j] != 0), None)
            if col is None:
                tableau.drop_row(r)
            else:
                tableau.pivot(r, col)

    cost = [-v for v in c] + list(c) + [Fraction(0)] * (len(slack_of) + m)
    unbounded_col = tableau.run(cost, range(width))
    if unbounded_col is not None:
        direction = [Fraction(0)] * width
        direction[unbounded_col] = Fraction(1)
        for b, row in zip(tableau.basis, tableau.rows):
            if b < width:
                direction[b] = -row[unbounded_col]
        ray = tuple(direction[j] - direction[n + j] for j in range(n))
        return LPResult(UNBOUNDED, ray=ray, iterations=tableau.pivots)

    values = [Fraction(0)] * width
    for b, v in zip(tableau.basis, tableau.rhs):
        if b < width:
            values[b] = v
    point = tuple(values[j] - values[n + j] for j in range(n))
    return LPResult(OPTIMAL, point, dot(c, point), iterations=tableau.pivots)


def feasibility(system: LinearSystem) -> LPResult:
    """可行点或不可行判定（零目标的 LP）"""

    return solve_lp_dense(system, [0] * system.dimension)


def _independent_rows(rows: np.ndarray, candidates: Sequence[int], width: int) -> List[int] | None:
    """按顺序挑出 width 个数值上线性无关的行（两遍 Gram-Schmidt）"""

    chosen: List[int] = []
    basis = np.zeros((0, width))
    for r in candidates:
        residual = rows[r].copy()
        for _ in range(2):
            residual -= basis.T @ (basis @ residual)
        norm = float(np.linalg.norm(residual))
        if norm > RANK_TOLERANCE * max(float(np.linalg.norm(rows[r])), 1.0):
            basis = np.vstack([basis, residual / norm])
            chosen.append(r)
            if len(chosen) == width:
                return chosen
    return None


def _active_rows_by_dual(
    matrix: np.ndarray, bounds: np.ndarray, upper: Sequence[int], x: np.ndarray, marginals: Any
) -> List[int]:
    """浮点解上的有效 "≤" 行，按对偶乘子绝对值从大到小"""

    slack = bounds[upper] - matrix[upper] @ x
    weight = np.abs(marginals) if marginals is not None else np.zeros(len(upper))
    active = [
        (float(weight[i]), r)
        for i, r in enumerate(upper)
        if slack[i] <= ACTIVE_TOLERANCE * max(1.0, abs(float(bounds[r])))
    ]
    return [r for _, r in sorted(active, key=lambda item: (-item[0], item[1]))]


def _float_vertex(system: LinearSystem, c: Point) -> Tuple[LPResult, List[int]] | None:
    """HiGHS 对偶单纯形求浮点最优解，再由有效行精确重建顶点

    返回精确可行的顶点及其基行；浮点求解失败、有效行不足或
    重建点不可行时返回 None，由调用方改用精确单纯形。
    """

    n = system.dimension
    constraints = list(system)
    if not constraints:
        return None
    matrix, bounds = system.scaled_arrays()
    upper = [r for r, con in enumerate(constraints) if con.relation == "<="]
    equal = [r for r, con in enumerate(constraints) if con.relation == "="]
    cost = -np.array([float(v) for v in c])
    peak = float(np.max(np.abs(cost))) if n else 0.0
    if peak > 0:
        cost /= peak
    try:
        result = linprog(
            cost,
            A_ub=matrix[upper] if upper else None,
            b_ub=bounds[upper] if upper else None,
            A_eq=matrix[equal] if equal else None,
            b_eq=bounds[equal] if equal else None,
            bounds=(None, None),
            method="highs-ds",
        )
    except ValueError as exc:
        logger.debug("HiGHS 拒绝求解: %s", exc)
        return None
    if result.status != 0 or result.x is None:
        return None

    candidates = list(equal)
    if upper:
        marginals = getattr(result.ineqlin, "marginals", None)
        candidates += _active_rows_by_dual(matrix, bounds, upper, result.x, marginals)
    basis = _independent_rows(matrix, candidates, n)
    if basis is None:
        return None
    point = solve_linear(
        [constraints[r].coefficients for r in basis], [constraints[r].rhs for r in basis]
    )
    if point is None or system.first_violation(point) is not None:
        return None
    vertex = tuple(point)
    return LPResult(OPTIMAL, vertex, dot(c, vertex), iterations=int(result.nit)), basis


def _dual_certified(system: LinearSystem, basis: Sequence[int], c: Point) -> bool:
    """基行上的对偶乘子 y 满足 Σ y_r a_r = c 且 "≤" 行 y_r ≥ 0，即顶点最优"""

    constraints = list(system)
    columns = [list(column) for column in zip(*(constraints[r].coefficients for r in basis))]
    duals = solve_linear(columns, c)
    if duals is None:
        return False
    return all(
        y >= 0 for y, r in zip(duals, basis) if constraints[r].relation == "<="
    )


def solve_lp(system: LinearSystem, objective: Any) -> LPResult:
    """与 solve_lp_dense 语义相同的精确 LP，先用 HiGHS 找基再精确确认

    浮点解对应的基经精确的原始可行性与对偶可行性检查后直接返回；
    任一检查失败（含不可行、无界）时退回精确单纯形。
    """

    c = _as_point(objective, system.dimension)
    attempt = _float_vertex(system, c)
    if attempt is not None:
        result, basis = attempt
        if _dual_certified(system, basis, c):
            return result
    return solve_lp_dense(system, c)


def is_farkas_certificate(system: LinearSystem, multipliers: Sequence[Fraction]) -> bool:
    """Σ u_i a_i = 0，Σ u_i b_i < 0，"≤" 行的 u_i ≥ 0"""

    constraints = list(system)
    if len(multipliers) != len(constraints):
        return False
    if any(u < 0 for u, c in zip(multipliers, constraints) if c.relation == "<="):
        return False
    combined = [
        sum((u * c.coefficients[j] for u, c in zip(multipliers, constraints)), Fraction(0))
        for j in range(system.dimension)
    ]
    bound = sum((u * c.rhs for u, c in zip(multipliers, constraints)), Fraction(0))
    return all(v == 0 for v in combined) and bound < 0


# P_M(f) 的显式系统与稠密分离


def pm_system(f: OracleFunction, budget: int = DEFAULT_ENUMERATION_BUDGET) -> LinearSystem:
    """P_M(f) 的全部不等式 ⟨e, x⟩ ≤ f(t)，e ∈ I(t)，去掉重复行

    Raises:
        BudgetExceededError: 元组或不等式个数超出预算
    """

    system = LinearSystem(f.n * f.k)
    seen = set()
    for t in enumerate_tuples(f.n, f.k, budget):
        bound = f(t)
        for selector in enumerate_ineqs(t, budget):
            row = selector.as_vector(f.n, f.k).entries
            if (row, bound) not in seen:
                seen.add((row, bound))
                system.append(Constraint(row, Fraction(bound)))
        if len(system) > budget:
            raise BudgetExceededError(
                f"P_M(f) 的不等式个数超出预算 {budget}", "BUDGET_006", budget=budget
            )
    return system


SeparationOracle = Callable[[Point], Constraint | None]
OptimizationOracle = Callable[[Point], LPResult]


def system_separation(system: LinearSystem) -> SeparationOracle:
    return system.first_violation


def pm_separation(f: OracleFunction, budget: int = DEFAULT_ENUMERATION_BUDGET) -> SeparationOracle:
    """P_M(f) 的稠密分离：按枚举顺序找第一个违反的元组及其最大选择子"""

    def separate(point: Point) -> Constraint | None:
        x = PVector(f.n, f.k, tuple(point))
        for t in enumerate_tuples(f.n, f.k, budget):
            bound = f(t)
            if apply(x, t) > bound:
                row = best_selector(x, t).as_vector(f.n, f.k).entries
                return Constraint(row, Fraction(bound))
        return None

    return separate


def box_radius(f: OracleFunction, budget: int = DEFAULT_ENUMERATION_BUDGET) -> int:
    """R = 4·n·k·max|f| + 1"""

    return 4 * f.n * f.k * f.max_abs(budget) + 1


# 双描述法


def _primitive(vector: Sequence[Fraction]) -> Point:
    scale = math.lcm(*(Fraction(v).denominator for v in vector))
    integers = [int(v * scale) for v in vector]
    divisor = math.gcd(*integers) or 1
    return tuple(Fraction(v // divisor) for v in integers)


def _homogenized_rows(system: LinearSystem) -> List[Point] | None:
    rows: List[Point] = []
    seen = set()
    for constraint in system:
        variants = [(constraint.coefficients, constraint.rhs)]
        if constraint.relation == "=":
            variants.append((tuple(-v for v in constraint.coefficients), -constraint.rhs))
        for coefficients, rhs in variants:
            if not any(coefficients):
                if rhs < 0:
                    return None
                continue
            row = _primitive(tuple(coefficients) + (-rhs,))
            if row not in seen:
                seen.add(row)
                rows.append(row)
    rows.append(tuple([Fraction(0)] * system.dimension) + (Fraction(-1),))
    return rows


@dataclass(frozen=True)
class VertexEnumeration:
    vertices: List[Point]
    rays: List[Point]


def _double_description(system: LinearSystem, settings: SolverSettings) -> VertexEnumeration:
    n = system.dimension
    if n > settings.dense_dimension_budget:
        raise BudgetExceededError(
            f"稠密顶点枚举最多支持 {settings.dense_dimension_budget} 维，实际 {n} 维",
            "BUDGET_007",
            budget=settings.dense_dimension_budget,
            required=n,
        )
    rows = _homogenized_rows(system)
    if rows is None:
        return VertexEnumeration([], [])
    d = n + 1

    basis: List[int] = []
    for index in range(len(rows)):
        if matrix_rank([rows[i] for i in basis + [index]]) > len(basis):
            basis.append(index)
            if len(basis) == d:
                break
    if len(basis) < d:
        raise EngineError(
            "多面体含有直线（线性空间非零），无法枚举顶点", "ENGINE_004", engine="double_description"
        )

    square = [rows[i] for i in basis]
    rays: List[Point] = []
    for j in range(d):
        target = [Fraction(-1) if i == j else Fraction(0) for i in range(d)]
        rays.append(_primitive(solve_linear(square, target)))

    processed = list(basis)
    for index in range(len(rows)):
        if index in basis:
            continue
        h = rows[index]
        values = [dot(h, r) for r in rays]
        plus = [r for r, v in zip(rays, values) if v > 0]
        minus = [(r, v) for r, v in zip(rays, values) if v < 0]
        kept = [r for r, v in zip(rays, values) if v <= 0]
        zero_sets = {r: frozenset(i for i in processed if dot(rows[i], r) == 0) for r in rays}
        for rp in plus:
            vp = dot(h, rp)
            for rm, vm in minus:
                common = zero_sets[rp] & zero_sets[rm]
                if len(common) < d - 2:
                    continue
                if matrix_rank([rows[i] for i in common]) != d - 2:
                    continue
                combined = _primitive([vp * a - vm * b for a, b in zip(rm, rp)])
                if combined not in kept:
                    kept.append(combined)
        rays = kept
        processed.append(index)
        logger.debug("双描述法: 处理第 %s 行后有 %s 条生成射线", index, len(rays))

    vertices = sorted({tuple(v / r[n] for v in r[:n]) for r in rays if r[n] > 0})
    directions = sorted({r[:n] for r in rays if r[n] == 0})
    return VertexEnumeration(vertices, directions)


def vertices_dense(system: LinearSystem, settings: SolverSettings = DEFAULT_SETTINGS) -> List[Point]:
    """小规模多面体的全部顶点（字典序）

    Raises:
        BudgetExceededError: 维数超过 dense_dimension_budget
        EngineError: 多面体含有直线
    """

    return _double_description(system, settings).vertices


def extreme_rays(system: LinearSystem, settings: SolverSettings = DEFAULT_SETTINGS) -> List[Point]:
    """特征锥的极射线（本原整数向量）"""

    return _double_description(system, settings).rays


# 分离 oracle 驱动的优化


def _master_vertex(master: LinearSystem, c: Point) -> Tuple[LPResult, List[int] | None]:
    attempt = _float_vertex(master, c)
    if attempt is None:
        return solve_lp_dense(master, c), None
    return attempt


def _cutting_plane(
    separate: SeparationOracle,
    c: Point,
    master: LinearSystem,
    max_iterations: int,
    engine: str = "cuttingplane",
) -> LPResult:
    """Kelley 割平面：主问题用 HiGHS 找顶点并精确重建，只在分离通过时精确确认最优性"""

    last: LPResult | None = None
    fallbacks = 0
    for iteration in range(1, max_iterations + 1):
        result, basis = _master_vertex(master, c)
        if result.status == INFEASIBLE:
            logger.debug("割平面: 第 %s 轮主问题不可行", iteration)
            return replace(result, iterations=iteration, notes={"cuts": len(master)})
        if result.status == UNBOUNDED:
            raise EngineError("割平面主问题无界（缺少有界框）", "ENGINE_002", engine=engine)
        cut = separate(result.point)
        if cut is None and basis is not None and not _dual_certified(master, basis, c):
            exact = solve_lp_dense(master, c)
            fallbacks += 1
            if exact.value != result.value:
                result = exact
                cut = separate(result.point)
        last = result
        if cut is None:
            notes = {"cuts": len(master), "exact_fallbacks": fallbacks}
            return replace(result, iterations=iteration, notes=notes)
        if cut.satisfied_by(result.point):
            raise EngineError(
                "分离 oracle 返回的割没有分离当前点", "ENGINE_003", engine=engine, iterations=iteration
            )
        master.append(cut)
    raise EngineError(
        f"割平面引擎超过 {max_iterations} 轮",
        "ENGINE_005",
        {"last_point": [format_fraction(v) for v in last.point] if last else None},
        engine=engine,
        iterations=max_iterations,
    )


def _round_to_grid(values: np.ndarray, grid: Fraction) -> Point:
    return tuple(grid * round(Fraction(float(v)) / grid) for v in values)


def _ellipsoid_phase(
    separate: SeparationOracle,
    c: Point,
    radius: Fraction,
    settings: SolverSettings,
    grid: Fraction,
) -> Tuple[List[Constraint], Point | None]:
    """中心割椭球法，返回遇到的全部分离割与舍入后通过精确检查的最好中心"""

    n = len(c)
    objective = np.array([float(v) for v in c])
    center = np.zeros(n)
    shape = np.eye(n) * (n * float(radius) ** 2)
    tolerance = float(settings.tolerance)
    cuts: List[Constraint] = []
    best_value: float | None = None
    best_center: np.ndarray | None = None
    factor = n * n / (n * n - 1.0)

    for iteration in range(1, settings.ellipsoid_max_iterations + 1):
        outside = int(np.argmax(np.abs(center)))
        if abs(center[outside]) > float(radius):
            normal = np.zeros(n)
            normal[outside] = math.copysign(1.0, center[outside])
        else:
            query = tuple(
                Fraction(float(v)).limit_denominator(ELLIPSOID_GRID_DENOMINATOR) for v in center
            )
            cut = separate(query)
            if cut is not None:
                cuts.append(cut)
                normal = np.array([float(v) for v in cut.coefficients])
            else:
                value = float(objective @ center)
                if best_value is None or value > best_value:
                    best_value, best_center = value, center.copy()
                normal = -objective
                width = math.sqrt(max(float(objective @ shape @ objective), 0.0))
                if width < tolerance:
                    logger.debug("椭球法第 %s 轮达到精度 %.3g", iteration, width)
                    break
        scaled = shape @ normal
        gap = float(normal @ scaled)
        if gap <= 0 or not np.isfinite(gap):
            logger.debug("椭球退化，第 %s 轮停止", iteration)
            break
        step = scaled / math.sqrt(gap)
        center = center - step / (n + 1)
        shape = factor * (shape - (2.0 / (n + 1)) * np.outer(step, step))
    else:
        logger.warning("椭球法达到迭代上限 %s，交由精确引擎收尾", settings.ellipsoid_max_iterations)

    rounded = None
    if best_center is not None:
        candidate = _round_to_grid(best_center, grid)
        if separate(candidate) is None and all(abs(v) <= radius for v in candidate):
            rounded = candidate
    return cuts, rounded


def oracle_optimize(
    separate: SeparationOracle,
    objective: Any,
    radius: Any,
    engine: str | None = None,
    settings: SolverSettings = DEFAULT_SETTINGS,
    equalities: Sequence[Constraint] = (),
    seed_cuts: Sequence[Constraint] = (),
    grid: Fraction = Fraction(1, 2),
) -> LPResult:
    """只通过分离 oracle 在 P ∩ [−R, R]^N（及给定等式）上最大化目标

    cuttingplane 为 Kelley 精确割平面；ellipsoid 先跑浮点椭球法，把最好的
    可行中心舍入到 grid 上并精确复核，再把收集到的割交给精确引擎，
    因此两种引擎返回相同的精确最优解。区域为空时返回 infeasible。

    Raises:
        EngineError: 迭代超限或分离 oracle 行为异常
    """

    engine = engine or settings.engine
    radius = to_fraction(radius)
    c = tuple(to_fraction(v) for v in objective)
    n = len(c)
    master = LinearSystem.box(n, radius)
    for constraint in list(equalities) + list(seed_cuts):
        master.append(constraint)

    if engine == "ellipsoid":
        if equalities or n < 2:
            logger.debug("含等式约束或维数过低，跳过椭球阶段")
        else:
            cuts, rounded = _ellipsoid_phase(separate, c, radius, settings, grid)
            for cut in cuts:
                master.append(cut)
            result = _cutting_plane(separate, c, master, settings.cut_max_iterations, "ellipsoid")
            if rounded is not None and result.is_optimal and dot(c, rounded) == result.value:
                logger.debug("椭球法舍入中心即为最优解")
            else:
                logger.warning("椭球法舍入中心不是最优解，已由精确引擎收尾")
            notes = {**result.notes, "ellipsoid_cuts": len(cuts)}
            return replace(result, notes=notes)
    elif engine != "cuttingplane":
        raise ValidationError(f"未知的优化引擎: {engine}", "LP_004", actual=engine)

    return _cutting_plane(separate, c, master, settings.cut_max_iterations)


@dataclass(frozen=True)
class MembershipVerdict:
    """成员判定结果；violated 时给出目标 c 与最优点 y，满足 ⟨c, y⟩ < ⟨c, point⟩"""

    inside: bool
    objective: Point | None = None
    point: Point | None = None
    value: Fraction | None = None
    rounds: int = 0
    notes: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __bool__(self) -> bool:
        return self.inside


def membership_from_optimization(
    optimize: OptimizationOracle,
    dimension: int,
    point: Sequence[Any] | None = None,
    max_rounds: int = DEFAULT_SETTINGS.separation_max_rounds,
    floor: Any = 0,
) -> MembershipVerdict:
    """只用优化 oracle 判定 point（默认原点）是否属于 P

    要求 P 的特征锥为非正象限，于是 point ∈ P 当且仅当对单纯形上
    所有 c ≥ 0 有 max⟨c, P⟩ ≥ ⟨c, point⟩。用 Kelley 割平面最小化
    h(c) = max⟨c, P⟩ − ⟨c, point⟩：主问题下界 ≥ 0 时判为属于，
    某次查询的 h(c) < 0 时判为不属于。
    floor > 0 时只在 {c ≥ floor} 上搜索，调用方负责保证该区域足以找到违反目标。

    Raises:
        EngineError: 超过 max_rounds 轮或 oracle 返回无界
    """

    p = _as_point(point if point is not None else [0] * dimension, dimension)
    lowest = to_fraction(floor)
    if lowest < 0 or lowest * dimension > 1:
        raise ValidationError("目标下界必须在 [0, 1/N] 内", "LP_005", actual=str(lowest))
    master = LinearSystem(dimension + 1)
    for j in range(dimension):
        row = [0] * (dimension + 1)
        row[j] = -1
        master.add(row, -lowest)
    master.add([1] * dimension + [0], 1, "=")
    goal = [0] * dimension + [-1]
    query: Point = tuple(Fraction(1, dimension) for _ in range(dimension))

    for round_no in range(1, max_rounds + 1):
        result = optimize(query)
        if result.status == INFEASIBLE:
            return MembershipVerdict(False, query, None, None, round_no, {"empty": True})
        if result.status == UNBOUNDED:
            raise EngineError("非负目标上的优化不应无界", "ENGINE_006", iterations=round_no)
        value = dot(query, result.point) - dot(query, p)
        if value < 0:
            logger.debug("成员判定: 第 %s 轮找到违反目标，h(c) = %s", round_no, value)
            return MembershipVerdict(False, query, result.point, value, round_no, dict(result.notes))
        shifted = [a - b for a, b in zip(result.point, p)]
        master.add(shifted + [-1], 0)
        bound = solve_lp(master, goal)
        tau = bound.point[-1]
        if tau >= 0:
            logger.debug("成员判定: 第 %s 轮下界 %s ≥ 0，点属于多面体", round_no, tau)
            return MembershipVerdict(True, rounds=round_no)
        query = bound.point[:-1]

    raise EngineError(
        f"成员判定超过 {max_rounds} 轮", "ENGINE_007", engine="kelley", iterations=max_rounds
    )


__all__ = [
    "Constraint",
    "LinearSystem",
    "LPResult",
    "MembershipVerdict",
    "VertexEnumeration",
    "OPTIMAL",
    "INFEASIBLE",
    "UNBOUNDED",
    "make_constraint",
    "solve_lp",
    "solve_lp_dense",
    "feasibility",
    "is_farkas_certificate",
    "pm_system",
    "pm_separation",
    "system_separation",
    "box_radius",
    "vertices_dense",
    "extreme_rays",
    "oracle_optimize",
    "membership_from_optimization",
]
