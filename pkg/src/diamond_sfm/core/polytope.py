"""向量与子模多面体模块 (Vectors and Submodular Polyhedra)

向量定义在 [n]×A 上（每个坐标 i 对每个原子 a 有一个精确有理数分量），
元组 t 上的取值 x(t) 按坐标求和：底元贡献 0，原子 a 贡献 x(i,a)，
顶元贡献该坐标最大的两个分量之和。

P_M(f) = {x : x(t) ≤ f(t) 对所有 t}，B_M(f) 为其中 x(1) = f(1) 的面。
顶元坐标处每选一对原子就得到一个线性不等式，选法集合记作 I(t)；
这里用 AtomPairSelector 表示其中一员，只在稠密检查路径上显式枚举。

Example:
>>> from diamond_sfm.core.polytope import PVector, apply, unify
>>> from diamond_sfm.core.lattice import LatticeTuple
>>> x = PVector.from_rows([[3, 2, 1]])
>>> apply(x, LatticeTuple.top(1, 3))
Fraction(5, 1)
>>> unify(x).rows()
[(Fraction(3, 1), Fraction(1, 1), Fraction(1, 1))]
"""

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Any, Dict, Iterator, List, Sequence, Tuple

from ..utils.logging_utils import get_logger
from .exceptions import BudgetExceededError, ValidationError
from .lattice import (
    DEFAULT_ENUMERATION_BUDGET,
    LatticeTuple,
    _check_k,
    enumerate_tuples,
    jump_coordinates,
)
from .oracle import OracleFunction
from .rational import format_fraction, to_fraction

logger = get_logger(__name__)

DEFAULT_SELECTOR_BUDGET = 20000


@dataclass(frozen=True)
class PVector:
    """[n]×A 上的精确有理向量，entries 按 i*k + (a−1) 行主序存放

    坐标 i 从 0 开始，原子 a 从 1 开始。
    """

    n: int
    k: int
    entries: Tuple[Fraction, ...]

    def __post_init__(self) -> None:
        _check_k(self.k)
        if len(self.entries) != self.n * self.k:
            raise ValidationError(
                f"向量应有 n·k = {self.n * self.k} 个分量，实际 {len(self.entries)} 个",
                "POLYTOPE_001",
                expected=self.n * self.k,
                actual=len(self.entries),
            )

    @classmethod
    def zeros(cls, n: int, k: int) -> "PVector":
        return cls(n, k, (Fraction(0),) * (n * k))

    @classmethod
    def from_entries(cls, n: int, k: int, values: Sequence[Any]) -> "PVector":
        return cls(n, k, tuple(to_fraction(v) for v in values))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Any]]) -> "PVector":
        if not rows:
            raise ValidationError("向量至少需要一行", "POLYTOPE_001", actual=0)
        k = len(rows[0])
        if any(len(row) != k for row in rows):
            raise ValidationError("各坐标的原子个数不一致", "POLYTOPE_001")
        return cls(len(rows), k, tuple(to_fraction(v) for row in rows for v in row))

    @classmethod
    def unit(cls, n: int, k: int, i: int, a: int) -> "PVector":
        """χ_{i,a}"""

        values = [Fraction(0)] * (n * k)
        values[i * k + a - 1] = Fraction(1)
        return cls(n, k, tuple(values))

    @classmethod
    def coordinate_unit(cls, n: int, k: int, i: int) -> "PVector":
        """χ_i：第 i 个坐标的全部原子分量为 1"""

        values = [Fraction(0)] * (n * k)
        for a in range(k):
            values[i * k + a] = Fraction(1)
        return cls(n, k, tuple(values))

    @property
    def dimension(self) -> int:
        return self.n * self.k

    def get(self, i: int, a: int) -> Fraction:
        return self.entries[i * self.k + a - 1]

    def row(self, i: int) -> Tuple[Fraction, ...]:
        return self.entries[i * self.k : (i + 1) * self.k]

    def rows(self) -> List[Tuple[Fraction, ...]]:
        return [self.row(i) for i in range(self.n)]

    def with_entry(self, i: int, a: int, value: Any) -> "PVector":
        values = list(self.entries)
        values[i * self.k + a - 1] = to_fraction(value)
        return PVector(self.n, self.k, tuple(values))

    def _check_shape(self, other: "PVector") -> None:
        if (self.n, self.k) != (other.n, other.k):
            raise ValidationError(
                "向量维度不一致",
                "POLYTOPE_002",
                expected=(self.n, self.k),
                actual=(other.n, other.k),
            )

    def __add__(self, other: "PVector") -> "PVector":
        self._check_shape(other)
        return PVector(self.n, self.k, tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "PVector") -> "PVector":
        self._check_shape(other)
        return PVector(self.n, self.k, tuple(a - b for a, b in zip(self.entries, other.entries)))

    def scale(self, factor: Any) -> "PVector":
        q = Fraction(factor)
        return PVector(self.n, self.k, tuple(q * a for a in self.entries))

    def dot(self, other: "PVector") -> Fraction:
        """⟨x, y⟩"""

        self._check_shape(other)
        return sum((a * b for a, b in zip(self.entries, other.entries)), Fraction(0))

    def negative_part(self) -> "PVector":
        """x⁻：逐分量取 min{0, x}"""

        return PVector(self.n, self.k, tuple(min(Fraction(0), a) for a in self.entries))

    def leq(self, other: "PVector") -> bool:
        self._check_shape(other)
        return all(a <= b for a, b in zip(self.entries, other.entries))

    def is_nonpositive(self) -> bool:
        return all(a <= 0 for a in self.entries)

    def is_integral(self) -> bool:
        return all(a.denominator == 1 for a in self.entries)

    def to_json(self) -> Dict[str, Any]:
        """向量文件格式：{"n","k","entries":[[i,"a<j>","p/q"], ...]}"""

        return {
            "n": self.n,
            "k": self.k,
            "entries": [
                [i, f"a{a}", format_fraction(self.get(i, a))]
                for i in range(self.n)
                for a in range(1, self.k + 1)
            ],
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "PVector":
        """解析向量 JSON；每个 (i, a) 必须恰好出现一次

        Raises:
            ValidationError: 字段缺失、下标越界、重复或遗漏
        """

        try:
            n, k, raw = data["n"], data["k"], data["entries"]
        except (KeyError, TypeError) as error:
            raise ValidationError(
                f"向量缺少字段: {error}", "POLYTOPE_003", field_name=str(error)
            ) from error
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ValidationError("n 必须是正整数", "POLYTOPE_003", field_name="n", actual=n)
        _check_k(k)

        values: Dict[Tuple[int, int], Fraction] = {}
        for item in raw:
            try:
                i, atom_text, value = item
            except (TypeError, ValueError) as error:
                raise ValidationError(
                    f"向量分量格式错误: {item!r}", "POLYTOPE_003", actual=repr(item)
                ) from error
            if (
                isinstance(i, bool)
                or not isinstance(i, int)
                or not 0 <= i < n
                or not isinstance(atom_text, str)
                or not atom_text.startswith("a")
                or not atom_text[1:].isdigit()
                or not 1 <= int(atom_text[1:]) <= k
            ):
                raise ValidationError(
                    f"向量分量下标越界: {item!r}", "POLYTOPE_004", actual=repr(item)
                )
            key = (i, int(atom_text[1:]))
            if key in values:
                raise ValidationError(
                    f"向量分量重复: {item!r}", "POLYTOPE_004", actual=repr(item)
                )
            values[key] = to_fraction(value)
        if len(values) != n * k:
            raise ValidationError(
                f"向量应有 {n * k} 个分量，实际 {len(values)} 个",
                "POLYTOPE_001",
                expected=n * k,
                actual=len(values),
            )
        return cls(n, k, tuple(values[(i, a)] for i in range(n) for a in range(1, k + 1)))

    def __str__(self) -> str:
        rows = ["(" + ", ".join(str(v) for v in self.row(i)) + ")" for i in range(self.n)]
        return "[" + "; ".join(rows) + "]"


@dataclass(frozen=True)
class AtomPairSelector:
    """I(t) 中的一员

    choices[i] 为 None（底元坐标）、(a,)（原子坐标）或 (a, b)，a < b（顶元坐标）。
    """

    choices: Tuple[Tuple[int, ...] | None, ...]

    def value(self, x: PVector) -> Fraction:
        """⟨e, x⟩"""

        total = Fraction(0)
        for i, choice in enumerate(self.choices):
            if choice:
                total += sum(x.get(i, a) for a in choice)
        return total

    def as_vector(self, n: int, k: int) -> PVector:
        """选择子对应的 0/1 向量 e"""

        values = [Fraction(0)] * (n * k)
        for i, choice in enumerate(self.choices):
            for a in choice or ():
                values[i * k + a - 1] = Fraction(1)
        return PVector(n, k, tuple(values))

    def to_json(self) -> List[Any]:
        return [None if c is None else [f"a{a}" for a in c] for c in self.choices]


def _check_dims(x: PVector, t: LatticeTuple) -> None:
    if x.n != t.n or x.k != t.k:
        raise ValidationError(
            f"向量 (n={x.n}, k={x.k}) 与元组 {t} 维度不一致",
            "POLYTOPE_002",
            expected=(x.n, x.k),
            actual=(t.n, t.k),
        )


def top_two(row: Sequence[Fraction]) -> Tuple[int, int]:
    """一行中最大的两个分量的原子编号（1 起），平局取编号小者"""

    order = sorted(range(len(row)), key=lambda a: (-row[a], a))
    return order[0] + 1, order[1] + 1


def pair_max(row: Sequence[Fraction]) -> Fraction:
    first, second = top_two(row)
    return row[first - 1] + row[second - 1]


def maximizing_pairs(row: Sequence[Fraction]) -> List[Tuple[int, int]]:
    """达到最大原子对和的全部原子对 (a, b)，a < b"""

    best = pair_max(row)
    return [
        (a + 1, b + 1)
        for a, b in itertools.combinations(range(len(row)), 2)
        if row[a] + row[b] == best
    ]


def apply(x: PVector, t: LatticeTuple) -> Fraction:
    """x(t)：底元 0、原子取分量、顶元取最大原子对和"""

    _check_dims(x, t)
    k = x.k
    total = Fraction(0)
    for i, p in enumerate(t.positions):
        if p == 0:
            continue
        if p == k + 1:
            total += pair_max(x.row(i))
        else:
            total += x.entries[i * k + p - 1]
    return total


def best_selector(x: PVector, t: LatticeTuple) -> AtomPairSelector:
    """使 ⟨e, x⟩ = x(t) 的选择子（每个顶元坐标取编号最小的最大对）"""

    _check_dims(x, t)
    k = x.k
    choices: List[Tuple[int, ...] | None] = []
    for i, p in enumerate(t.positions):
        if p == 0:
            choices.append(None)
        elif p == k + 1:
            choices.append(tuple(sorted(top_two(x.row(i)))))
        else:
            choices.append((p,))
    return AtomPairSelector(tuple(choices))


def selector_count(t: LatticeTuple) -> int:
    tops = sum(1 for p in t.positions if p == t.k + 1)
    return comb(t.k, 2) ** tops


def enumerate_ineqs(
    t: LatticeTuple, budget: int = DEFAULT_SELECTOR_BUDGET
) -> Iterator[AtomPairSelector]:
    """逐个产生 I(t) 的全部成员，共 C(k,2)^(顶元个数) 个

    Raises:
        BudgetExceededError: 成员个数超出预算
    """

    required = selector_count(t)
    if required > budget:
        raise BudgetExceededError(
            f"I(t) 有 {required} 个成员，超出预算 {budget}",
            "BUDGET_003",
            budget=budget,
            required=required,
        )
    k = t.k
    options: List[List[Tuple[int, ...] | None]] = []
    for p in t.positions:
        if p == 0:
            options.append([None])
        elif p == k + 1:
            options.append(list(itertools.combinations(range(1, k + 1), 2)))
        else:
            options.append([(p,)])
    for choices in itertools.product(*options):
        yield AtomPairSelector(tuple(choices))


@dataclass(frozen=True)
class MembershipResult:
    """稠密成员检查结果；不属于时给出一个违反的元组"""

    member: bool
    violated: LatticeTuple | None = None

    def __bool__(self) -> bool:
        return self.member


def is_member_dense(
    x: PVector, f: OracleFunction, budget: int = DEFAULT_ENUMERATION_BUDGET
) -> MembershipResult:
    """x ∈ P_M(f)？逐个枚举元组，返回第一个 x(t) > f(t) 的元组"""

    for t in enumerate_tuples(f.n, f.k, budget):
        if apply(x, t) > f(t):
            return MembershipResult(False, t)
    return MembershipResult(True)


def is_base_dense(
    x: PVector, f: OracleFunction, budget: int = DEFAULT_ENUMERATION_BUDGET
) -> bool:
    """x ∈ B_M(f)？"""

    return is_member_dense(x, f, budget).member and apply(x, f.top()) == f(f.top())


def tight_tuples_dense(
    x: PVector, f: OracleFunction, budget: int = DEFAULT_ENUMERATION_BUDGET
) -> List[LatticeTuple]:
    """全部 x-紧元组（枚举顺序）

    Raises:
        ValidationError: x 不属于 P_M(f)
    """

    tight: List[LatticeTuple] = []
    for t in enumerate_tuples(f.n, f.k, budget):
        value, bound = apply(x, t), f(t)
        if value > bound:
            raise ValidationError(
                f"向量不属于 P_M(f)，在 {t} 处 {value} > {bound}",
                "POLYTOPE_005",
                actual=t.text(),
            )
        if value == bound:
            tight.append(t)
    return tight


def _row_is_unified(row: Sequence[Fraction]) -> bool:
    rest = list(row)
    rest.remove(max(rest))
    return len(set(rest)) <= 1


def is_unified(x: PVector) -> bool:
    """每个坐标除一个取最大值的原子外，其余分量全相等"""

    return all(_row_is_unified(x.row(i)) for i in range(x.n))


def unify(x: PVector) -> PVector:
    """保留每行最大分量（编号最小者），其余降为该行最小值"""

    values: List[Fraction] = []
    for i in range(x.n):
        row = x.row(i)
        low = min(row)
        keep = top_two(row)[0]
        values.extend(row[a - 1] if a == keep else low for a in range(1, x.k + 1))
    return PVector(x.n, x.k, tuple(values))


def s_value(x: PVector) -> Fraction:
    """S(x) = Σ_i (min_a x(i,a) + max_a x(i,a))"""

    return sum((min(x.row(i)) + max(x.row(i)) for i in range(x.n)), Fraction(0))


def vertex_pattern(row: Sequence[Fraction]) -> str | None:
    """顶点每个坐标可能的三种形态

    "equal"：全部相等；"one_above"：恰有一个严格大于其余（其余相等）；
    "one_below"：恰有一个严格小于其余（其余相等）；都不是时为 None。
    """

    values = list(row)
    distinct = set(values)
    if len(distinct) == 1:
        return "equal"
    if len(distinct) == 2:
        high, low = max(distinct), min(distinct)
        if values.count(high) == 1:
            return "one_above"
        if values.count(low) == 1:
            return "one_below"
    return None


@dataclass(frozen=True)
class TightChain:
    """弱递增的紧元组链 t_1 ⊑ … ⊑ t_m

    jump_bound 为相邻两元组之间允许的 底元→顶元 坐标个数上限；
    loose_top 为 True 时最后一个元组不要求是紧的。
    """

    tuples: Tuple[LatticeTuple, ...]
    jump_bound: int = 2
    loose_top: bool = False
    notes: Dict[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self) -> None:
        if not self.tuples:
            raise ValidationError("链不能为空", "POLYTOPE_006")
        for j in range(len(self.tuples) - 1):
            if not self.tuples[j].leq(self.tuples[j + 1]):
                raise ValidationError(
                    f"链不是递增的: {self.tuples[j]} ≰ {self.tuples[j + 1]}",
                    "POLYTOPE_006",
                    actual=[str(self.tuples[j]), str(self.tuples[j + 1])],
                )

    def __len__(self) -> int:
        return len(self.tuples)

    def __iter__(self) -> Iterator[LatticeTuple]:
        return iter(self.tuples)

    def segments(self) -> List[Tuple[LatticeTuple, LatticeTuple]]:
        return list(zip(self.tuples, self.tuples[1:]))

    def step_jumps(self) -> List[int]:
        return [len(jump_coordinates(a, b)) for a, b in self.segments()]

    def max_jumps(self) -> int:
        return max(self.step_jumps(), default=0)

    def spans_lattice(self) -> bool:
        """首为 0、尾为 1"""

        return self.tuples[0].is_bottom() and self.tuples[-1].is_top()

    def text(self) -> List[str]:
        return [t.text() for t in self.tuples]
