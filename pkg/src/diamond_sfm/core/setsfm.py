"""子模集合函数最小化模块 (Set Function SFM)

链验证与紧元组恢复都要把问题化归为子模集合函数的最小化，
本模块提供两个后端：

* exhaustive：按位掩码顺序穷举 2^|J| 个子集（|J| ≤ exhaustive_limit）；
* minnorm：精确有理数的最小范数点算法，在基多面体 B(g) 上求最小范数点 x*，
  {x* < 0} 即为最小的极小点。

以及区间 [A, B] 上的限制最小化、枚举全部极小点，和集合函数最小最大
定理的自检 (edmonds_check)。

Example:
>>> from diamond_sfm.core.setsfm import SetOracle, min_set
>>> g = SetOracle.cut([(0, 1), (1, 2)], 3)
>>> min_set(g, backend="minnorm")
SetMinimum(subset=frozenset(), value=Fraction(0, 1))
"""

import itertools
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, Iterable, List, Sequence, Tuple

import numpy as np

from ..utils.logging_utils import get_logger
from .config import DEFAULT_SETTINGS, SolverSettings
from .exceptions import BudgetExceededError, SetSFMError, ValidationError
from .rational import solve_linear, to_fraction

logger = get_logger(__name__)

Subset = FrozenSet[int]
EDMONDS_LIMIT = 12


class SetOracle:
    """基集 {0..m−1} 上的集合函数，只能求值

    求值结果按子集缓存，calls 只统计真正的求值次数。
    """

    def __init__(self, ground_size: int, fn: Callable[[Subset], object]) -> None:
        if ground_size < 0:
            raise ValidationError("基集大小不能为负", "SETSFM_001", actual=ground_size)
        self.ground_size = ground_size
        self._fn = fn
        self._cache: Dict[Subset, Fraction] = {}
        self._lock = threading.Lock()
        self.calls = 0

    def __call__(self, subset: Iterable[int]) -> Fraction:
        key = frozenset(subset)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        value = to_fraction(self._fn(key))
        with self._lock:
            self.calls += 1
            self._cache[key] = value
        return value

    @property
    def ground(self) -> Subset:
        return frozenset(range(self.ground_size))

    def restrict(self, lower: Subset, upper: Subset) -> Tuple["SetOracle", List[int]]:
        """区间 [lower, upper] 上的限制：新基集为 upper∖lower 的重新编号

        Returns:
            (限制后的函数, 新下标 → 原元素)
        """

        free = sorted(upper - lower)
        lower = frozenset(lower)

        def restricted(y: Subset) -> Fraction:
            return self(lower | {free[j] for j in y})

        return SetOracle(len(free), restricted), free

    @classmethod
    def cut(cls, edges: Sequence[Tuple[int, int]], ground_size: int, weights: Sequence[int] | None = None) -> "SetOracle":
        """无向图割函数"""

        weights = list(weights) if weights is not None else [1] * len(edges)

        def value(y: Subset) -> int:
            return sum(w for (u, v), w in zip(edges, weights) if (u in y) != (v in y))

        return cls(ground_size, value)

    @classmethod
    def modular(cls, weights: Sequence[object]) -> "SetOracle":
        values = [to_fraction(w) for w in weights]
        return cls(len(values), lambda y: sum((values[e] for e in y), Fraction(0)))


@dataclass(frozen=True)
class SetMinimum:
    subset: Subset
    value: Fraction


def _bitmask_subset(mask: int, size: int) -> Subset:
    return frozenset(e for e in range(size) if mask >> e & 1)


def _min_exhaustive(g: SetOracle, limit: int) -> SetMinimum:
    if g.ground_size > limit:
        raise BudgetExceededError(
            f"穷举后端最多支持 {limit} 个元素，实际 {g.ground_size}",
            "BUDGET_005",
            budget=limit,
            required=g.ground_size,
        )
    best: SetMinimum | None = None
    for mask in range(1 << g.ground_size):
        subset = _bitmask_subset(mask, g.ground_size)
        value = g(subset)
        if best is None or value < best.value:
            best = SetMinimum(subset, value)
    return best


def greedy_vertex(g: SetOracle, weights: Sequence[Fraction]) -> List[Fraction]:
    """按权重升序（平局取下标小者）的贪心顶点，最小化 ⟨w, q⟩ over B(g − g(∅))"""

    order = sorted(range(g.ground_size), key=lambda e: (weights[e], e))
    vertex = [Fraction(0)] * g.ground_size
    prefix: set = set()
    previous = g(frozenset())
    for e in order:
        prefix.add(e)
        current = g(frozenset(prefix))
        vertex[e] = current - previous
        previous = current
    return vertex


def _dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def _combine(points: List[List[Fraction]], weights: Sequence[Fraction]) -> List[Fraction]:
    size = len(points[0])
    return [sum((w * p[e] for w, p in zip(weights, points)), Fraction(0)) for e in range(size)]


def _affine_minimizer(points: List[List[Fraction]]) -> List[Fraction]:
    """仿射包中最小范数点的重心坐标 μ（Σμ = 1）"""

    m = len(points)
    gram = [[_dot(p, q) for q in points] for p in points]
    rows = [[Fraction(0)] + [Fraction(1)] * m]
    rows.extend([Fraction(1)] + gram[i] for i in range(m))
    rhs = [Fraction(1)] + [Fraction(0)] * m
    solution = solve_linear(rows, rhs)
    if solution is None:
        raise SetSFMError(
            "最小范数点算法的支撑点仿射相关", "SETSFM_002", backend="minnorm", ground_size=len(points[0])
        )
    return solution[1:]


def min_norm_point(g: SetOracle, max_iterations: int) -> List[Fraction]:
    """B(g − g(∅)) 中的最小范数点（精确）

    Raises:
        SetSFMError: 主循环超过 max_iterations 次
    """

    size = g.ground_size
    if size == 0:
        return []
    x = greedy_vertex(g, [Fraction(0)] * size)
    points = [x]
    lam = [Fraction(1)]

    for iteration in range(1, max_iterations + 1):
        q = greedy_vertex(g, x)
        if _dot(x, q) >= _dot(x, x):
            logger.debug("最小范数点在第 %s 轮收敛", iteration)
            return x
        points.append(q)
        lam.append(Fraction(0))

        while True:
            mu = _affine_minimizer(points)
            if all(w >= 0 for w in mu):
                keep = [i for i, w in enumerate(mu) if w > 0]
                points = [points[i] for i in keep]
                lam = [mu[i] for i in keep]
                x = _combine(points, lam)
                break
            theta = min(lam[i] / (lam[i] - mu[i]) for i, w in enumerate(mu) if w < 0)
            lam = [(1 - theta) * a + theta * b for a, b in zip(lam, mu)]
            keep = [i for i, w in enumerate(lam) if w > 0]
            points = [points[i] for i in keep]
            lam = [lam[i] for i in keep]
            x = _combine(points, lam)

    raise SetSFMError(
        f"最小范数点算法超过 {max_iterations} 轮未收敛（输入可能不是子模函数）",
        "SETSFM_003",
        backend="minnorm",
        ground_size=size,
    )


def _min_minnorm(g: SetOracle, max_iterations: int) -> SetMinimum:
    x = min_norm_point(g, max_iterations)
    subset = frozenset(e for e, v in enumerate(x) if v < 0)
    return SetMinimum(subset, g(subset))


def _pick_backend(g: SetOracle, backend: str, settings: SolverSettings) -> str:
    if backend == "auto":
        return "exhaustive" if g.ground_size <= settings.auto_exhaustive_size else "minnorm"
    if backend not in ("exhaustive", "minnorm"):
        raise ValidationError(f"未知的集合函数最小化后端: {backend}", "SETSFM_004", actual=backend)
    return backend


def min_set(
    g: SetOracle, backend: str | None = None, settings: SolverSettings = DEFAULT_SETTINGS
) -> SetMinimum:
    """集合函数的精确最小值与一个极小点

    exhaustive 返回位掩码顺序下的第一个极小点，minnorm 返回最小的极小点。

    Raises:
        BudgetExceededError: 穷举后端超出规模
        SetSFMError: 最小范数点算法不收敛
    """

    chosen = _pick_backend(g, backend or settings.sfm_backend, settings)
    if chosen == "exhaustive":
        return _min_exhaustive(g, settings.exhaustive_limit)
    return _min_minnorm(g, settings.minnorm_max_iterations)


def min_over_interval(
    g: SetOracle,
    lower: Iterable[int],
    upper: Iterable[int],
    backend: str | None = None,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> SetMinimum:
    """在 {Y : lower ⊆ Y ⊆ upper} 上最小化

    Raises:
        ValidationError: lower ⊄ upper
    """

    lower, upper = frozenset(lower), frozenset(upper)
    if not lower <= upper:
        raise ValidationError("区间下端不是上端的子集", "SETSFM_005")
    restricted, free = g.restrict(lower, upper)
    best = min_set(restricted, backend, settings)
    return SetMinimum(lower | {free[j] for j in best.subset}, best.value)


def all_minimizers(
    g: SetOracle,
    strict_bounds: Tuple[Iterable[int], Iterable[int]] | None = None,
    target: object | None = None,
    backend: str | None = None,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> List[Subset]:
    """区间 [A, B] 内取值等于 target 的全部子集

    target 缺省为区间上的最小值。对区间逐个元素二分，
    子区间最小值大于 target 时剪枝；单点区间只保留取值恰为 target 的子集，
    结果按发现顺序给出。

    Raises:
        SetSFMError: 极小点个数超过 all_minimizers_cap
    """

    lower, upper = (frozenset(), g.ground) if strict_bounds is None else (
        frozenset(strict_bounds[0]),
        frozenset(strict_bounds[1]),
    )
    goal = (
        min_over_interval(g, lower, upper, backend, settings).value
        if target is None
        else to_fraction(target)
    )
    found: List[Subset] = []
    stack = [(lower, upper)]
    while stack:
        lo, hi = stack.pop()
        best = min_over_interval(g, lo, hi, backend, settings).value
        if best > goal:
            continue
        if lo == hi:
            if best != goal:
                continue
            found.append(lo)
            if len(found) > settings.all_minimizers_cap:
                raise SetSFMError(
                    f"极小点个数超过上限 {settings.all_minimizers_cap}",
                    "SETSFM_006",
                    ground_size=g.ground_size,
                )
            continue
        e = min(hi - lo)
        stack.append((lo, hi - {e}))
        stack.append((lo | {e}, hi))
    return found


def is_set_submodular(g: SetOracle, limit: int = 14) -> bool:
    """穷举检查 g(X∩Y) + g(X∪Y) ≤ g(X) + g(Y)"""

    if g.ground_size > limit:
        raise BudgetExceededError(
            f"子模性穷举检查最多支持 {limit} 个元素", "BUDGET_005", budget=limit, required=g.ground_size
        )
    subsets = [_bitmask_subset(m, g.ground_size) for m in range(1 << g.ground_size)]
    for a, b in itertools.combinations(subsets, 2):
        if g(a & b) + g(a | b) > g(a) + g(b):
            return False
    return True


@dataclass(frozen=True)
class EdmondsReport:
    """最小最大定理自检：min g − g(∅) 与 max{x⁻(V) : x ∈ B(g')}"""

    holds: bool
    minimum: Fraction
    base_bound: Fraction
    orderings_checked: int

    def __bool__(self) -> bool:
        return self.holds


def edmonds_check(
    g: SetOracle,
    samples: int = 64,
    seed: int = 0,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> EdmondsReport:
    """验证 min_Y g'(Y) = max{x⁻(V) : x ∈ B(g')}，g' = g − g(∅)

    最大值由最小范数点 x* 取到；另外检查抽样的贪心排列给出的 x⁻(V)
    都不超过最小值（|V| ≤ 6 时穷举全部排列）。

    Raises:
        BudgetExceededError: |V| 超过 12
    """

    size = g.ground_size
    if size > EDMONDS_LIMIT:
        raise BudgetExceededError(
            f"edmonds_check 最多支持 {EDMONDS_LIMIT} 个元素",
            "BUDGET_005",
            budget=EDMONDS_LIMIT,
            required=size,
        )
    empty = g(frozenset())
    minimum = _min_exhaustive(g, EDMONDS_LIMIT).value - empty

    x_star = min_norm_point(g, settings.minnorm_max_iterations)
    bound = sum((min(Fraction(0), v) for v in x_star), Fraction(0))
    in_base = sum(x_star, Fraction(0)) == g(g.ground) - empty and all(
        sum((x_star[e] for e in _bitmask_subset(m, size)), Fraction(0))
        <= g(_bitmask_subset(m, size)) - empty
        for m in range(1 << size)
    )

    if size <= 6:
        orderings: Iterable[Tuple[int, ...]] = itertools.permutations(range(size))
    else:
        rng = np.random.default_rng(seed)
        orderings = [tuple(int(v) for v in rng.permutation(size)) for _ in range(samples)]
    checked = 0
    weak = True
    for order in orderings:
        rank = {e: pos for pos, e in enumerate(order)}
        vertex = greedy_vertex(g, [Fraction(rank[e]) for e in range(size)])
        if sum((min(Fraction(0), v) for v in vertex), Fraction(0)) > minimum:
            weak = False
        checked += 1

    holds = in_base and weak and bound == minimum
    if not holds:
        logger.warning(
            "最小最大自检失败: min=%s, x*⁻(V)=%s, x*∈B=%s, 弱对偶=%s",
            minimum, bound, in_base, weak,
        )
    return EdmondsReport(holds, minimum, bound, checked)


def random_set_submodular(ground_size: int, seed: int, bound: int = 10) -> SetOracle:
    """随机子模集合函数：带权割函数 + 基数的凹函数 + 模函数"""

    rng = np.random.default_rng(seed)
    edges = [
        (u, v)
        for u, v in itertools.combinations(range(ground_size), 2)
        if rng.random() < 0.4
    ]
    weights = [int(w) for w in rng.integers(1, bound + 1, size=len(edges))]
    modular = [int(w) for w in rng.integers(-bound, bound + 1, size=ground_size)]
    steps = sorted((int(s) for s in rng.integers(-bound, bound + 1, size=ground_size)), reverse=True)
    concave = [0]
    for step in steps:
        concave.append(concave[-1] + step)
    offset = int(rng.integers(-bound, bound + 1))

    def value(y: Subset) -> int:
        cut = sum(w for (u, v), w in zip(edges, weights) if (u in y) != (v in y))
        return offset + cut + concave[len(y)] + sum(modular[e] for e in y)

    return SetOracle(ground_size, value)
