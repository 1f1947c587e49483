"""贪心基向量模块 (Greedy Base Vectors)

贪心构造：沿前缀链 v_0 ⊑ v_0[1=p_1] ⊑ v_1 ⊑ … ⊑ v_n 依次确定每个坐标的
分量，得到 B_M(f) 中的统一化整数向量；以及由它导出的对偶下界、
把 P_M(f) 中向量提升到 B_M(f) 的增量过程和取到最小值的对偶向量。

Example:
>>> from diamond_sfm.core.greedy import greedy_base, dual_lower_bound
>>> result = greedy_base(f)
>>> result.vector, result.top_atoms
>>> dual_lower_bound(f)
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple

from ..utils.logging_utils import get_logger
from .exceptions import BudgetExceededError, MinimizationError, ValidationError
from .lattice import (
    DEFAULT_ENUMERATION_BUDGET,
    LatticeTuple,
    chain_prefix,
    enumerate_tuples,
    tuple_count,
)
from .oracle import OracleFunction, monotone_closure, normalize
from .polytope import PVector, TightChain, apply, is_member_dense, is_unified, top_two

logger = get_logger(__name__)


@dataclass(frozen=True)
class GreedyResult:
    """贪心结果：向量、每个坐标的最大原子 p_i 以及 2n+1 个元组的紧链"""

    vector: PVector
    top_atoms: Tuple[int, ...]
    tight_chain: TightChain

    def to_json(self) -> dict:
        return {
            "vector": self.vector.to_json(),
            "top_atoms": [f"a{p}" for p in self.top_atoms],
            "chain": self.tight_chain.text(),
        }


def greedy_base(f: OracleFunction) -> GreedyResult:
    """贪心构造 B_M(f) 中的统一化向量

    对 i = 0..n−1，p_{i+1} 取使 f(v_i[i+1=a]) 最大的原子（编号最小者），
    x(i+1, p) = f(v_i[i+1=p]) − f(v_i)，
    其余原子 x(i+1, a) = f(v_{i+1}) − f(v_i[i+1=p])。
    f 不是子模函数时结果没有保证。
    """

    n, k = f.n, f.k
    values: List[Fraction] = []
    atoms: List[int] = []
    chain: List[LatticeTuple] = [chain_prefix(n, 0, k)]
    previous = f(chain[0])

    for i in range(n):
        base = chain_prefix(n, i, k)
        scores = [f(base.replace(i, a)) for a in range(1, k + 1)]
        best = max(scores)
        p = scores.index(best) + 1
        mid = best
        nxt = chain_prefix(n, i + 1, k)
        after = f(nxt)
        row = [Fraction(after - mid)] * k
        row[p - 1] = Fraction(mid - previous)
        values.extend(row)
        atoms.append(p)
        chain.extend([base.replace(i, p), nxt])
        previous = after

    vector = PVector(n, k, tuple(values))
    logger.debug("贪心向量: %s, 最大原子: %s", vector, atoms)
    return GreedyResult(vector, tuple(atoms), TightChain(tuple(chain), jump_bound=1))


def dual_lower_bound(f: OracleFunction) -> int:
    """x⁻(1)，x 为贪心向量；对归一化的子模 f 不超过 min f"""

    x = greedy_base(f).vector
    return int(apply(x.negative_part(), f.top()))


def minmax_dual(
    f: OracleFunction, budget: int = DEFAULT_ENUMERATION_BUDGET
) -> PVector:
    """取到最小值的对偶向量

    对 normalize(f) 的单调闭包做贪心，结果为整数、统一化、≤ 0，
    属于 P_M(normalize(f))，且在 1 上的取值等于 min f − f(0)。
    """

    closure = monotone_closure(normalize(f), budget)
    return greedy_base(closure).vector


def _slack(x: PVector, f: OracleFunction, tuples: List[LatticeTuple]) -> Fraction | None:
    if not tuples:
        return None
    return min(Fraction(f(t)) - apply(x, t) for t in tuples)


def lift_to_base(
    z: PVector, f: OracleFunction, budget: int = DEFAULT_ENUMERATION_BUDGET
) -> PVector:
    """把 z ∈ P_M(f)（z ≤ 0 且统一化）提升为 B_M(f) 中的 y ≥ z

    每个坐标 i 交替执行两步直到不动点（p 为该行最大原子）：
    沿 χ_{i,p} 增加到某个 t(i) ∈ {p, 1} 的元组变紧；
    沿 χ_i − χ_{i,p} 增加其余原子，直到某个 t(i) 为其他原子或 1 的元组变紧，
    且不超过 x(i,p)。步长用稠密比值检验求得。

    Raises:
        ValidationError: z 不满足前提
        BudgetExceededError: 轮数超出保护上限
        MinimizationError: 不动点不在 B_M(f) 中
    """

    if not z.is_nonpositive() or not is_unified(z):
        raise ValidationError("lift_to_base 需要统一化且非正的向量", "GREEDY_001")
    membership = is_member_dense(z, f, budget)
    if not membership:
        raise ValidationError(
            f"向量不属于 P_M(f)，违反元组 {membership.violated}",
            "GREEDY_002",
            actual=str(membership.violated),
        )

    n, k = f.n, f.k
    tuples = list(enumerate_tuples(n, k, budget))
    top = k + 1
    x = z
    max_rounds = n * k * tuple_count(n, k) + 1

    for round_no in range(1, max_rounds + 1):
        moved = False
        for i in range(n):
            p = top_two(x.row(i))[0]
            raise_top = [t for t in tuples if t.positions[i] in (p, top)]
            alpha = _slack(x, f, raise_top)
            if alpha:
                x = x.with_entry(i, p, x.get(i, p) + alpha)
                moved = True

            row = x.row(i)
            others = [a for a in range(1, k + 1) if a != p]
            gap = row[p - 1] - row[others[0] - 1]
            raise_rest = [
                t for t in tuples if t.positions[i] == top or t.positions[i] in others
            ]
            alpha = min(gap, _slack(x, f, raise_rest))
            if alpha > 0:
                for a in others:
                    x = x.with_entry(i, a, x.get(i, a) + alpha)
                moved = True
        if not moved:
            break
    else:
        raise BudgetExceededError(
            f"lift_to_base 超过 {max_rounds} 轮仍未收敛",
            "BUDGET_004",
            budget=max_rounds,
        )

    if apply(x, f.top()) != f(f.top()):
        raise MinimizationError(
            "提升过程的不动点不在 B_M(f) 中", "MIN_001", stage="lift_to_base"
        )
    logger.debug("lift_to_base 在第 %s 轮收敛: %s", round_no, x)
    return x
