"""最小化流水线模块 (Minimization Pipeline)

在只能求值的前提下最小化 M_k^n 上的整数值子模函数：

* chain_separate：给定 x 与一条紧元组链，把成员判定拆成链上每一段的
  子模集合函数最小化；
* improving_direction / face_optimize / improve_vertex：从一个顶点出发，
  用改进方向 LP 找到更好的面，在面上重新优化并恢复新顶点的全部紧元组；
* optimize_P：贪心起点 + 顶点改进，在 P_M(f) 上最大化线性目标；
* separate_zero：由优化得到 0 ∈ P_M(f) 的判定；
* minimize：对阈值二分，再逐坐标固定恢复最小点。

Example:
>>> from diamond_sfm.core.oracle import TabulatedFunction
>>> from diamond_sfm.core.minimize import minimize
>>> f = TabulatedFunction.from_json(
...     {"n": 1, "k": 3, "values": {"0": 0, "a1": -1, "a2": -1, "a3": -1, "1": -2}}
... )
>>> result = minimize(f)
>>> result.value, result.minimizer.text()
(-2, '1')
"""

import itertools
from concurrent.futures.thread import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Any, Dict, List, Sequence, Tuple

from ..utils.logging_utils import get_logger
from .config import DEFAULT_SETTINGS, SolverSettings
from .exceptions import FaceEmptyError, MinimizationError, ValidationError
from .greedy import dual_lower_bound, greedy_base, minmax_dual
from .lattice import LatticeTuple, changed_coordinates, is_chain, jump_coordinates, unit_tuple
from .lpengine import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    Constraint,
    LPResult,
    box_radius,
    make_constraint,
    membership_from_optimization,
    oracle_optimize,
)
from .oracle import CallableFunction, OracleFunction, RestrictedFunction, normalize, shift, strictify
from .polytope import (
    AtomPairSelector,
    PVector,
    TightChain,
    apply,
    best_selector,
    maximizing_pairs,
    pair_max,
    top_two,
)
from .rational import dot, format_fraction, lcm_denominator, null_vector, to_fraction
from .setsfm import SetOracle, all_minimizers, min_set

logger = get_logger(__name__)

Pair = Tuple[int, int]
PairSets = Tuple[Tuple[Pair, ...], ...]


def _as_objective(c: Any, n: int, k: int) -> Tuple[Fraction, ...]:
    values = c.entries if isinstance(c, PVector) else tuple(c)
    if len(values) != n * k:
        raise ValidationError(
            f"目标向量应有 {n * k} 个分量，实际 {len(values)} 个",
            "MIN_011",
            expected=n * k,
            actual=len(values),
        )
    return tuple(to_fraction(v) for v in values)


def _clamp_bottom(f: OracleFunction) -> OracleFunction:
    """把 f(0) 改为 0；f(0) > 0 时 P_M(f) 不变且仍是子模函数"""

    bottom = f.bottom()
    return CallableFunction(
        f.n, f.k, lambda t: 0 if t == bottom else f(t), is_strict=f.is_strict
    )


def _unit_values(f: OracleFunction) -> List[int]:
    """f(unit(i, a))，按向量分量顺序；是 P_M(f) 中各分量的上界"""

    return [f(unit_tuple(f.n, f.k, i, a)) for i in range(f.n) for a in range(1, f.k + 1)]


# 链上分段的集合函数化归


def _segment_parts(a: LatticeTuple, b: LatticeTuple) -> Tuple[List[int], List[int]]:
    jumps = jump_coordinates(a, b)
    others = [j for j in changed_coordinates(a, b) if j not in jumps]
    return jumps, others


def _segment_tuple(
    a: LatticeTuple,
    b: LatticeTuple,
    jumps: Sequence[int],
    others: Sequence[int],
    lifted: Sequence[int],
    subset: Any,
) -> LatticeTuple:
    """a[Y] ∨ z：others 中属于 Y 的坐标取 b 的值，跳变坐标取 z 的值"""

    positions = list(a.positions)
    for idx, j in enumerate(others):
        if idx in subset:
            positions[j] = b.positions[j]
    for i, p in zip(jumps, lifted):
        positions[i] = p
    return LatticeTuple(a.k, tuple(positions))


def _segment_oracle(
    x: PVector,
    f: OracleFunction,
    a: LatticeTuple,
    b: LatticeTuple,
    jumps: Sequence[int],
    others: Sequence[int],
    lifted: Sequence[int],
) -> SetOracle:
    def slack(subset: Any) -> Fraction:
        t = _segment_tuple(a, b, jumps, others, lifted, subset)
        return Fraction(f(t)) - apply(x, t)

    return SetOracle(len(others), slack)


def _lift_choices(k: int, jumps: Sequence[int]):
    return itertools.product(range(k + 2), repeat=len(jumps))


@dataclass(frozen=True)
class ChainSeparation:
    """链验证结果；不属于时给出违反元组、达到 x(t) 的选择子与超出量 x(t) − f(t)"""

    member: bool
    violated: LatticeTuple | None = None
    selector: AtomPairSelector | None = None
    excess: Fraction = Fraction(0)
    minimizations: int = 0

    def __bool__(self) -> bool:
        return self.member


def chain_separate(
    x: PVector,
    f: OracleFunction,
    chain: TightChain,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> ChainSeparation:
    """用一条从 0 到 1 的紧链判定 x ∈ P_M(f)

    对链上每一段 (a, b)，跳变坐标 I 上枚举 z ∈ M^I，其余变化坐标 J
    只有两个取值，于是 Y ↦ f(a[Y] ∨ z) − x(a[Y] ∨ z) 是 2^J 上的子模集合
    函数；全部最小值 ≥ 0 当且仅当 x 属于。链上元组若被 x 超过直接报告违反。

    Raises:
        ValidationError: 链不从 0 到 1、某段下端不紧或跳变坐标超过 jump_bound
        SetSFMError: 集合函数最小化失败
    """

    if (x.n, x.k) != (f.n, f.k):
        raise ValidationError(
            "向量与函数维度不一致", "MIN_011", expected=(f.n, f.k), actual=(x.n, x.k)
        )
    if not chain.spans_lattice():
        raise ValidationError("验证链必须从 0 开始、到 1 结束", "MIN_002", actual=chain.text())
    bottom = f.bottom()
    bottom_value = f(bottom)
    if bottom_value < 0:
        return ChainSeparation(False, bottom, best_selector(x, bottom), Fraction(-bottom_value))
    if bottom_value > 0:
        f = _clamp_bottom(f)

    minimizations = 0
    for a, b in chain.segments():
        slack = Fraction(f(a)) - apply(x, a)
        if slack < 0:
            return ChainSeparation(False, a, best_selector(x, a), -slack, minimizations)
        if slack > 0:
            raise ValidationError(
                f"链上的元组 {a} 对 x 不紧", "MIN_003", actual=a.text(), expected="tight"
            )
        jumps, others = _segment_parts(a, b)
        if len(jumps) > chain.jump_bound:
            raise ValidationError(
                f"段 {a} → {b} 有 {len(jumps)} 个 0→1 坐标，超过 {chain.jump_bound}",
                "MIN_004",
                expected=chain.jump_bound,
                actual=len(jumps),
            )
        for lifted in _lift_choices(f.k, jumps):
            g = _segment_oracle(x, f, a, b, jumps, others, lifted)
            best = min_set(g, settings=settings)
            minimizations += 1
            if best.value < 0:
                t = _segment_tuple(a, b, jumps, others, lifted, best.subset)
                logger.debug("链验证: 段 %s → %s 中 %s 被违反", a, b, t)
                return ChainSeparation(False, t, best_selector(x, t), -best.value, minimizations)
    return ChainSeparation(True, minimizations=minimizations)


# 改进方向


def _selector_row(choices: Sequence[Tuple[int, ...] | None], n: int, k: int) -> Tuple[Fraction, ...]:
    return AtomPairSelector(tuple(choices)).as_vector(n, k).entries


def _direction_score(
    z: Sequence[Fraction], t: LatticeTuple, pairs: PairSets
) -> Tuple[Fraction, List[Tuple[int, ...] | None]]:
    """max_{e ∈ E_x(t)} ⟨e, z⟩ 与一个取到最大值的选择子，逐坐标计算"""

    k = t.k
    total = Fraction(0)
    choices: List[Tuple[int, ...] | None] = []
    for i, p in enumerate(t.positions):
        if p == 0:
            choices.append(None)
        elif p == k + 1:
            best = max(pairs[i], key=lambda ab: z[i * k + ab[0] - 1] + z[i * k + ab[1] - 1])
            total += z[i * k + best[0] - 1] + z[i * k + best[1] - 1]
            choices.append(best)
        else:
            total += z[i * k + p - 1]
            choices.append((p,))
    return total, choices


def _active_rows(
    z: Sequence[Fraction], tuples: Sequence[LatticeTuple], pairs: PairSets, n: int, k: int
) -> List[Tuple[Fraction, ...]]:
    """在 z 处取等号的全部约束所张成空间的一组生成行

    每个取等的元组给出一个基本选择子，以及在某个顶元坐标换成另一个
    同样取到最大值的原子对后的选择子。
    """

    rows: List[Tuple[Fraction, ...]] = []
    for t in tuples:
        value, choices = _direction_score(z, t, pairs)
        if value != 0:
            continue
        rows.append(_selector_row(choices, n, k))
        for i, choice in enumerate(choices):
            if t.positions[i] != k + 1:
                continue
            best = z[i * k + choice[0] - 1] + z[i * k + choice[1] - 1]
            for pair in pairs[i]:
                if pair != choice and z[i * k + pair[0] - 1] + z[i * k + pair[1] - 1] == best:
                    swapped = list(choices)
                    swapped[i] = pair
                    rows.append(_selector_row(swapped, n, k))
    return rows


def _step_limit(
    z: Sequence[Fraction], d: Sequence[Fraction], t: LatticeTuple, pairs: PairSets
) -> Fraction | None:
    """沿 z + δ·d 前进时元组 t 的约束保持 ≤ 0 的最大 δ；一直成立时为 None

    约束值是 δ 的分段线性凸函数，断点是同一坐标上两条原子对直线的交点。
    """

    k = t.k
    const, slope = Fraction(0), Fraction(0)
    lines: List[List[Tuple[Fraction, Fraction]]] = []
    for i, p in enumerate(t.positions):
        if p == 0:
            continue
        if p == k + 1:
            lines.append(
                [
                    (z[i * k + a - 1] + z[i * k + b - 1], d[i * k + a - 1] + d[i * k + b - 1])
                    for a, b in pairs[i]
                ]
            )
        else:
            const += z[i * k + p - 1]
            slope += d[i * k + p - 1]

    def score(delta: Fraction) -> Fraction:
        return const + slope * delta + sum(max(v + s * delta for v, s in row) for row in lines)

    breaks = sorted(
        {
            (v1 - v2) / (s2 - s1)
            for row in lines
            for (v1, s1), (v2, s2) in itertools.combinations(row, 2)
            if s1 != s2 and (v1 - v2) / (s2 - s1) > 0
        }
    )
    last, last_value = Fraction(0), score(Fraction(0))
    for delta in breaks:
        value = score(delta)
        if value > 0:
            return last + (-last_value) * (delta - last) / (value - last_value)
        last, last_value = delta, value
    tail = slope + sum(max(s for _, s in row) for row in lines)
    if tail > 0:
        return last + (-last_value) / tail
    return None


def _purify(
    z: Sequence[Fraction],
    tuples: Sequence[LatticeTuple],
    pairs: PairSets,
    weights: Sequence[Fraction],
    n: int,
    k: int,
) -> List[Fraction]:
    """沿取等约束的零空间移动，直到 z 成为改进方向 LP 可行域的顶点

    每一步都让一个新的约束取等，取等行的秩严格增加，⟨c, z⟩ 保持不变。

    Raises:
        MinimizationError: 可行域含直线（x 不是顶点）
    """

    point = list(z)
    dimension = n * k
    for _ in range(dimension + 1):
        rows = [tuple(weights)] + _active_rows(point, tuples, pairs, n, k)
        d = null_vector(rows, dimension)
        if d is None:
            return point
        for direction in (d, [-v for v in d]):
            limits = [
                s
                for s in (_step_limit(point, direction, t, pairs) for t in tuples)
                if s is not None
            ]
            if limits:
                delta = min(limits)
                point = [p + delta * v for p, v in zip(point, direction)]
                break
        else:
            raise MinimizationError(
                "改进方向的可行域含有直线，起点不是顶点", "MIN_005", stage="direction"
            )
    raise MinimizationError("改进方向未能收敛到顶点", "MIN_005", stage="direction")


@dataclass(frozen=True)
class Direction:
    """改进方向 LP 的结果

    value 为 1 时 z 是 {⟨e, z⟩ ≤ 0 ∀ 紧选择子 e, ⟨c, z⟩ ≤ 1} 的最优顶点，
    kept 为 z 处仍取等的链上元组，pair_sets 为每个坐标上同时对 x 紧且
    使 z 的原子对和最大的原子对。
    """

    z: PVector | None
    value: int
    kept: Tuple[LatticeTuple, ...]
    pair_sets: PairSets
    rounds: int = 0

    def __bool__(self) -> bool:
        return self.value == 1

    def to_json(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "z": self.z.to_json() if self.z is not None else None,
            "kept": [t.text() for t in self.kept],
        }


def improving_direction(
    x: PVector,
    f_strict: OracleFunction,
    chain: TightChain,
    c: Any,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> Direction:
    """求 x 处的改进方向

    chain 必须是顶点 x 的全部紧元组。可行域是锥加上 ⟨c, z⟩ ≤ 1，
    因此在 [−1, 1]^N 中求得正的目标值后按比例放大即得值 1 的最优点；
    分离时对每个紧元组逐坐标求最大紧选择子，不枚举 I(t)。

    Raises:
        EngineError: 优化引擎失败
        MinimizationError: 最优点的紧元组之间出现超过两个 0→1 坐标
    """

    n, k = x.n, x.k
    weights = _as_objective(c, n, k)
    pairs: PairSets = tuple(tuple(maximizing_pairs(x.row(i))) for i in range(n))
    if not any(weights):
        return Direction(None, 0, tuple(chain.tuples), pairs)
    tuples = [t for t in chain if not t.is_bottom()]

    def separate(point: Sequence[Fraction]) -> Constraint | None:
        for t in tuples:
            value, choices = _direction_score(point, t, pairs)
            if value > 0:
                return Constraint(_selector_row(choices, n, k), Fraction(0))
        return None

    result = oracle_optimize(
        separate,
        weights,
        1,
        settings=settings,
        seed_cuts=[make_constraint(weights, 1)],
    )
    if not result.is_optimal or result.value <= 0:
        return Direction(None, 0, tuple(chain.tuples), pairs, result.iterations)

    scaled = [v / result.value for v in result.point]
    z = _purify(scaled, tuples, pairs, weights, n, k)
    kept = tuple(t for t in chain if _direction_score(z, t, pairs)[0] == 0)
    face = TightChain(kept, jump_bound=2)
    if not kept[-1].is_top() or face.max_jumps() > 2:
        raise MinimizationError(
            "改进方向最优点的紧元组之间出现超过两个 0→1 坐标",
            "MIN_006",
            {"kept": face.text(), "jumps": face.step_jumps()},
            stage="direction",
        )
    pair_sets: PairSets = tuple(
        tuple(
            p
            for p in pairs[i]
            if z[i * k + p[0] - 1] + z[i * k + p[1] - 1]
            == max(z[i * k + a - 1] + z[i * k + b - 1] for a, b in pairs[i])
        )
        for i in range(n)
    )
    return Direction(PVector(n, k, tuple(z)), 1, kept, pair_sets, result.iterations)


# 面上的优化


def _face_radius(weights: Sequence[Fraction], upper: Sequence[int], floor: Fraction) -> int:
    """c > 0 时面上最优点的分量界

    分量上界为 f(unit(i,a))；⟨c, y⟩ ≥ floor 再结合其他分量的上界给出下界。
    """

    total = sum((w * u for w, u in zip(weights, upper)), Fraction(0))
    bound = Fraction(max((abs(u) for u in upper), default=0))
    for w, u in zip(weights, upper):
        bound = max(bound, abs((floor - (total - w * u)) / w))
    return ceil(bound) + 1


def face_optimize(
    c: Any,
    x: PVector,
    f: OracleFunction,
    chain: TightChain,
    pair_sets: PairSets | None = None,
    settings: SolverSettings = DEFAULT_SETTINGS,
    radius: Any = None,
) -> PVector:
    """在 P_M(f) 中链上选择子全部取等的面上最大化 ⟨c, y⟩

    pair_sets[i] 是顶元坐标 i 上要求取等的原子对，缺省为 x 的最大原子对。
    分离顺序：先检查这些原子对仍是 y 的最大原子对，再用 chain_separate
    判定 y ∈ P_M(f)（链尾不是 1 时补上一个不要求紧的 1）。c = 0 时直接返回 x。
    未给出 radius 时，c > 0 用分量界，否则退回稠密的 box_radius。

    Raises:
        FaceEmptyError: 面为空
        EngineError: 优化引擎失败
    """

    n, k = f.n, f.k
    weights = _as_objective(c, n, k)
    if not any(weights):
        return x
    if pair_sets is None:
        pair_sets = tuple(tuple(maximizing_pairs(x.row(i))) for i in range(n))

    tight = [t for t in chain if not (chain.loose_top and t == chain.tuples[-1])]
    equalities: List[Constraint] = []
    for t in tight:
        choices = [
            None if p == 0 else pair_sets[i][0] if p == k + 1 else (p,)
            for i, p in enumerate(t.positions)
        ]
        value = f(t)
        if t.is_bottom() and value == 0:
            continue
        equalities.append(Constraint(_selector_row(choices, n, k), Fraction(value), "="))
    tops = sorted({i for t in tight for i, p in enumerate(t.positions) if p == k + 1})

    members = tuple(chain.tuples)
    if not members[-1].is_top():
        members += (f.top(),)
    widest = max((len(jump_coordinates(a, b)) for a, b in zip(members, members[1:])), default=0)
    check = TightChain(members, jump_bound=max(chain.jump_bound, widest), loose_top=True)

    def separate(point: Sequence[Fraction]) -> Constraint | None:
        y = PVector(n, k, tuple(point))
        for i in tops:
            row = y.row(i)
            best = pair_max(row)
            for a, b in pair_sets[i]:
                if row[a - 1] + row[b - 1] < best:
                    p, q = top_two(row)
                    coefficients = [Fraction(0)] * (n * k)
                    coefficients[i * k + p - 1] += 1
                    coefficients[i * k + q - 1] += 1
                    coefficients[i * k + a - 1] -= 1
                    coefficients[i * k + b - 1] -= 1
                    return Constraint(tuple(coefficients), Fraction(0))
        verdict = chain_separate(y, f, check, settings)
        if verdict:
            return None
        return Constraint(
            verdict.selector.as_vector(n, k).entries, Fraction(f(verdict.violated))
        )

    if radius is None:
        if all(w > 0 for w in weights):
            radius = _face_radius(weights, _unit_values(f), dot(weights, x.entries))
        else:
            radius = box_radius(f, settings.enumeration_budget)
    result = oracle_optimize(separate, weights, radius, settings=settings, equalities=equalities)
    if result.status == INFEASIBLE:
        raise FaceEmptyError(
            "链选择子取等的面为空", "ENGINE_008", {"chain": chain.text()}, engine=settings.engine
        )
    return PVector(n, k, tuple(result.point))


# 顶点改进


def recover_tight_chain(
    y: PVector,
    f: OracleFunction,
    face: TightChain,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> TightChain:
    """恢复顶点 y 的全部紧元组

    严格子模函数的紧元组构成包含 face 的链，所以都落在 face 的某一段里；
    逐段用与 chain_separate 相同的参数化收集取值为 0 的全部极小点。

    Raises:
        MinimizationError: 恢复结果不是链或含有不紧的元组
    """

    def scan(segment: Tuple[LatticeTuple, LatticeTuple]) -> List[LatticeTuple]:
        a, b = segment
        jumps, others = _segment_parts(a, b)
        hits: List[LatticeTuple] = []
        for lifted in _lift_choices(f.k, jumps):
            g = _segment_oracle(y, f, a, b, jumps, others, lifted)
            for subset in all_minimizers(g, target=0, settings=settings):
                hits.append(_segment_tuple(a, b, jumps, others, lifted, subset))
        return hits

    segments = face.segments()
    if settings.jobs > 1 and len(segments) > 1:
        with ThreadPoolExecutor(max_workers=settings.jobs) as executor:
            batches = list(executor.map(scan, segments))
    else:
        batches = [scan(segment) for segment in segments]

    found = {t.positions: t for t in face.tuples}
    for batch in batches:
        for t in batch:
            found.setdefault(t.positions, t)
    tuples = sorted(found.values(), key=lambda t: (t.rank(), t.enumeration_index()))
    loose = [t.text() for t in tuples if apply(y, t) != f(t)]
    if loose or not is_chain(tuples):
        raise MinimizationError(
            "恢复出的紧元组不是一条紧链，函数可能不是严格子模的",
            "MIN_008",
            {"tuples": [t.text() for t in tuples], "not_tight": loose},
            stage="recover",
        )
    chain = TightChain(tuple(tuples))
    return TightChain(chain.tuples, jump_bound=max(1, chain.max_jumps()))


@dataclass(frozen=True)
class ImprovementStep:
    """一次顶点改进；improved 为 False 时 vector 即为最优顶点"""

    improved: bool
    vector: PVector
    chain: TightChain
    gain: Fraction
    direction: Direction | None = None

    def to_json(self) -> Dict[str, Any]:
        return {
            "improved": self.improved,
            "vertex": self.vector.to_json(),
            "chain": self.chain.text(),
            "gain": format_fraction(self.gain),
        }


def improve_vertex(
    x: PVector,
    f_strict: OracleFunction,
    chain: TightChain,
    c: Any,
    settings: SolverSettings = DEFAULT_SETTINGS,
    upper: Sequence[int] | None = None,
) -> ImprovementStep:
    """找一个目标值更大的顶点及其全部紧元组

    Raises:
        MinimizationError: 目标值没有增加（整数目标下至少增加 1/2）
    """

    weights = _as_objective(c, x.n, x.k)
    direction = improving_direction(x, f_strict, chain, weights, settings)
    if not direction:
        return ImprovementStep(False, x, chain, Fraction(0), direction)

    face = TightChain(direction.kept, jump_bound=2)
    radius = None
    if all(w > 0 for w in weights):
        if upper is None:
            upper = _unit_values(f_strict)
        radius = _face_radius(weights, upper, dot(weights, x.entries))
    y = face_optimize(weights, x, f_strict, face, direction.pair_sets, settings, radius)
    gain = dot(weights, y.entries) - dot(weights, x.entries)
    integral = all(w.denominator == 1 for w in weights)
    if gain <= 0 or (integral and gain < Fraction(1, 2)):
        raise MinimizationError(
            f"改进步的目标增量 {gain} 不足",
            "MIN_007",
            {"from": x.to_json(), "to": y.to_json()},
            stage="improve",
        )
    new_chain = recover_tight_chain(y, f_strict, face, settings)
    logger.debug("顶点改进: 目标增加 %s，新紧链 %s", gain, new_chain.text())
    return ImprovementStep(True, y, new_chain, gain, direction)


# P_M(f) 上的优化


@dataclass(frozen=True)
class OptimizationResult:
    """max ⟨c, y⟩ over P_M(f)

    status 为 optimal 时 vector 是最优顶点，chain 为其上的一条紧链
    （严格子模时为全部紧元组）；unbounded 时 ray 为 −χ_{i,a}。
    """

    status: str
    value: Fraction | None = None
    vector: PVector | None = None
    chain: TightChain | None = None
    ray: PVector | None = None
    steps: int = 0
    scale: int | None = None

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"status": self.status, "steps": self.steps}
        if self.value is not None:
            data["value"] = format_fraction(self.value)
        if self.vector is not None:
            data["vector"] = self.vector.to_json()
        if self.chain is not None:
            data["chain"] = self.chain.text()
        if self.ray is not None:
            data["ray"] = self.ray.to_json()
        if self.scale is not None:
            data["strict_scale"] = self.scale
        return data


def _walk(
    weights: Sequence[Fraction],
    h: OracleFunction,
    settings: SolverSettings,
    warm_start: Tuple[PVector, TightChain] | None,
    trace: List[Dict[str, Any]] | None,
) -> Tuple[PVector, TightChain, int]:
    if warm_start is None:
        start = greedy_base(h)
        x, chain = start.vector, start.tight_chain
    else:
        x, chain = warm_start
    upper = _unit_values(h)
    cap = settings.walk_max_iterations
    if cap == 0:
        ceiling = sum((w * u for w, u in zip(weights, upper)), Fraction(0))
        cap = max(1, ceil(2 * (ceiling - dot(weights, x.entries)))) + 1

    steps = 0
    while True:
        step = improve_vertex(x, h, chain, weights, settings, upper)
        if trace is not None:
            trace.append(step.to_json())
        if not step.improved:
            return x, chain, steps
        steps += 1
        if steps > cap:
            raise MinimizationError(
                f"顶点改进超过 {cap} 步",
                "MIN_009",
                {"vertex": step.vector.to_json(), "chain": step.chain.text()},
                stage="walk",
            )
        x, chain = step.vector, step.chain


def _optimize_positive(
    weights: Sequence[int],
    g: OracleFunction,
    settings: SolverSettings,
    warm_start: Tuple[PVector, TightChain] | None,
    trace: List[Dict[str, Any]] | None,
) -> Tuple[PVector, TightChain, int, int | None]:
    """正整数目标；g(0) = 0"""

    if g.is_strict:
        x, chain, steps = _walk(weights, g, settings, warm_start, trace)
        return x, chain, steps, None

    n = g.n
    floor = dot(weights, greedy_base(g).vector.entries)
    radius = _face_radius(weights, _unit_values(g), floor)
    scale = n * n + 1
    for attempt in range(settings.strict_scale_retries + 1):
        x, chain, steps = _walk(weights, strictify(g, scale), settings, None, trace)
        try:
            y = face_optimize(weights, x, g, chain, None, settings, radius)
        except FaceEmptyError:
            logger.warning("严格化倍数 %s 下映射回原函数失败（第 %s 次），放大倍数重试", scale, attempt + 1)
            scale *= 4
            continue
        return y, chain, steps, scale
    raise MinimizationError(
        f"严格化倍数放大 {settings.strict_scale_retries} 次后仍无法映射回原函数",
        "MIN_010",
        stage="map_back",
    )


def optimize_P(
    c: Any,
    f: OracleFunction,
    settings: SolverSettings = DEFAULT_SETTINGS,
    warm_start: Tuple[PVector, TightChain] | None = None,
    trace: List[Dict[str, Any]] | None = None,
) -> OptimizationResult:
    """在 P_M(f) 上最大化 ⟨c, y⟩

    f(0) < 0 时多面体为空；c 有负分量时无界。有理目标先放大为整数；
    含零分量的目标换成 M·c + 1（M 由 box_radius 给出，需要稠密枚举）。
    非严格子模的 f 先在严格化函数上走顶点改进，再回到原函数的对应面上取值。
    warm_start 为严格化后函数的一个顶点及其全部紧元组，只在 f 本身严格时使用。

    Raises:
        MinimizationError: 步数超限或内部一致性失败（诊断信息含当前顶点与链）
        EngineError: 优化引擎失败
    """

    n, k = f.n, f.k
    weights = _as_objective(c, n, k)
    base = f(f.bottom())
    if base < 0:
        return OptimizationResult(INFEASIBLE)
    negative = next((j for j, w in enumerate(weights) if w < 0), None)
    if negative is not None:
        ray = tuple(Fraction(-1) if j == negative else Fraction(0) for j in range(n * k))
        return OptimizationResult(UNBOUNDED, ray=PVector(n, k, ray))
    g = _clamp_bottom(f) if base > 0 else f

    if n == 0 or not any(weights):
        start = greedy_base(g)
        return OptimizationResult(
            OPTIMAL, dot(weights, start.vector.entries), start.vector, start.tight_chain
        )

    multiplier = lcm_denominator(weights)
    integral = [int(w * multiplier) for w in weights]
    if not all(integral):
        big = 4 * n * k * box_radius(g, settings.enumeration_budget) + 1
        integral = [big * w + 1 for w in integral]
        logger.debug("目标含零分量，改用 %s·c + 1", big)

    y, chain, steps, scale = _optimize_positive(integral, g, settings, warm_start, trace)
    value = dot(weights, y.entries)
    logger.debug("P_M(f) 上的最优值 %s，改进 %s 步", value, steps)
    return OptimizationResult(OPTIMAL, value, y, chain, steps=steps, scale=scale)


# 0 的分离与最小化


@dataclass(frozen=True)
class ZeroSeparation:
    """0 ∈ P_M(f) 的判定；不属于时 violated 满足 f(t) < 0"""

    inside: bool
    violated: LatticeTuple | None = None
    rounds: int = 0

    def __bool__(self) -> bool:
        return self.inside


def separate_zero(
    f: OracleFunction,
    settings: SolverSettings = DEFAULT_SETTINGS,
    trace: List[Dict[str, Any]] | None = None,
) -> ZeroSeparation:
    """判定 min f ≥ 0

    在严格化函数 g 上做由优化到成员判定的 Kelley 迭代，目标限制在
    {c ≥ ε}，使每次优化都是正目标；违反时从最优顶点的紧链里取 g 最小的
    g(t) < 0 的元组，它对 f 同样是违反的。相邻两次优化共享顶点作为热启动。

    Raises:
        EngineError: 轮数超限
        MinimizationError: 违反时找不到负的紧元组
    """

    h = f if f.is_strict else strictify(f)
    n, k = h.n, h.k
    bottom = h.bottom()
    base = h(bottom)
    if base < 0:
        return ZeroSeparation(False, bottom)
    if n == 0:
        return ZeroSeparation(True)
    g = _clamp_bottom(h) if base > 0 else h

    dimension = n * k
    ceiling = sum(_unit_values(g))
    delta = Fraction(1, 2 * max(ceiling, 1))
    floor = delta / (2 * n + dimension)
    state: Dict[str, Any] = {}

    def optimize(query: Sequence[Fraction]) -> LPResult:
        result = optimize_P(query, g, settings, state.get("warm"), trace)
        state["warm"] = (result.vector, result.chain)
        return LPResult(
            result.status,
            result.vector.entries,
            result.value,
            iterations=result.steps,
            notes={"chain": result.chain},
        )

    verdict = membership_from_optimization(
        optimize, dimension, max_rounds=settings.separation_max_rounds, floor=floor
    )
    if verdict:
        return ZeroSeparation(True, rounds=verdict.rounds)
    chain = verdict.notes["chain"]
    witness = min(chain, key=g)
    if g(witness) >= 0:
        raise MinimizationError(
            "违反目标的最优顶点上没有取负值的紧元组",
            "MIN_012",
            {"chain": chain.text()},
            stage="separate",
        )
    return ZeroSeparation(False, witness, verdict.rounds)


@dataclass(frozen=True)
class MinimizationResult:
    """最小值、最小点以及搜索过程"""

    value: int
    minimizer: LatticeTuple
    separations: int = 0
    brackets: Tuple[Tuple[int, int], ...] = ()
    dual: PVector | None = None
    trace: Tuple[Dict[str, Any], ...] = field(default=(), compare=False)

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "min": self.value,
            "argmin": self.minimizer.text(),
            "separations": self.separations,
            "brackets": [list(b) for b in self.brackets],
        }
        if self.dual is not None:
            data["dual"] = self.dual.to_json()
        if self.trace:
            data["trace"] = list(self.trace)
        return data


def _recover_minimizer(
    f: OracleFunction,
    value: int,
    settings: SolverSettings,
    trace: List[Dict[str, Any]] | None,
    known: Sequence[LatticeTuple] = (),
) -> Tuple[LatticeTuple, int]:
    """按坐标顺序固定取值，每个坐标保留第一个不改变最小值的元素

    已知最小点的前缀直接判为保留，不再调用分离；分离给出的违反元组
    同样是最小点，记入已知集合。
    """

    n, k = f.n, f.k
    minimizers = {t.positions for t in known if f(t) == value}
    prefix: Tuple[int, ...] = ()
    separations = 0
    for i in range(n):
        chosen = k + 1
        for p in range(k + 1):
            trial = prefix + (p,)
            if any(m[: len(trial)] == trial for m in minimizers):
                keeps = True
            elif len(trial) == n:
                keeps = f(LatticeTuple(k, trial)) == value
            else:
                restricted = RestrictedFunction(f, trial)
                result = separate_zero(shift(restricted, value + 1), settings, trace)
                separations += 1
                keeps = not result
                if keeps:
                    minimizers.add(trial + result.violated.positions)
            if keeps:
                chosen = p
                break
        prefix = prefix + (chosen,)
        logger.debug("最小点恢复: 坐标 %s 取 %s", i, chosen)
    return LatticeTuple(k, prefix), separations


def minimize(
    f: OracleFunction,
    settings: SolverSettings = DEFAULT_SETTINGS,
    emit_dual: bool = False,
    trace: bool = False,
) -> MinimizationResult:
    """精确最小化整数值子模函数

    在 [dual_lower_bound + f(0), f(0)] 上对阈值 θ 二分，每次调用
    separate_zero(f − θ)；违反元组直接收紧上界。最小点按
    settings.minimizer_recovery 恢复：restrict 逐坐标固定，结果与枚举顺序下
    的第一个最小点一致；witness 直接取阈值 m+1 处的违反元组。

    Raises:
        EngineError: 引擎失败
        MinimizationError: 内部一致性失败
    """

    steps: List[Dict[str, Any]] | None = [] if trace else None
    bottom = f.bottom()
    base = f(bottom)
    dual = minmax_dual(f, settings.enumeration_budget) if emit_dual else None
    if f.n == 0:
        return MinimizationResult(base, bottom, dual=dual)

    low = dual_lower_bound(normalize(f)) + base
    high = base
    witness = bottom
    separations = 0
    brackets = [(low, high)]
    while low < high:
        theta = (low + high + 1) // 2
        result = separate_zero(shift(f, theta), settings, steps)
        separations += 1
        if result:
            low = theta
        else:
            witness = result.violated
            high = f(witness)
        brackets.append((low, high))
        logger.debug("二分: θ = %s, 区间 [%s, %s]", theta, low, high)
    value = low
    logger.info("最小值 %s，共 %s 次分离", value, separations)

    if settings.minimizer_recovery == "witness":
        if f(witness) != value:
            result = separate_zero(shift(f, value + 1), settings, steps)
            separations += 1
            witness = result.violated
        minimizer = witness
    else:
        minimizer, extra = _recover_minimizer(f, value, settings, steps, [witness])
        separations += extra

    return MinimizationResult(
        value,
        minimizer,
        separations,
        tuple(brackets),
        dual,
        tuple(steps or ()),
    )


__all__ = [
    "TightChain",
    "ChainSeparation",
    "Direction",
    "ImprovementStep",
    "OptimizationResult",
    "ZeroSeparation",
    "MinimizationResult",
    "chain_separate",
    "improving_direction",
    "face_optimize",
    "recover_tight_chain",
    "improve_vertex",
    "optimize_P",
    "separate_zero",
    "minimize",
]
