"""菱形格模块 (Diamond Lattice)

菱形格 M_k 由底元 0、顶元 1 和 k (k ≥ 3) 个两两不可比的原子组成，
本模块实现 M_k 及其 n 次直积 M_k^n 上的序、交、并、秩、覆盖关系与枚举。

内部表示：每个坐标用整数位置编码，0 为底元，1..k 为原子 a1..ak，
k+1 为顶元。枚举顺序按坐标主序（第一个坐标变化最慢），
每个坐标内的顺序为 0 < a1 < ... < ak < 1。

文本编码："0"、"1"、"a1".."ak"，元组以逗号连接，如 "a1,0,1"。

Example:
>>> from diamond_sfm.core.lattice import DiamondElement, LatticeTuple, meet
>>> meet(DiamondElement.atom(3, 1), DiamondElement.atom(3, 2))
DiamondElement('0', k=3)
>>> t = LatticeTuple.parse("1,a2,0", k=3)
>>> t.rank()
3
"""

import itertools
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

from ..utils.logging_utils import get_logger
from .exceptions import BudgetExceededError, LatticeError

logger = get_logger(__name__)

MIN_ATOMS = 3
DEFAULT_ENUMERATION_BUDGET = 20000


def _check_k(k: int) -> None:
    if isinstance(k, bool) or not isinstance(k, int) or k < MIN_ATOMS:
        raise LatticeError(
            f"原子个数 k 必须是不小于 {MIN_ATOMS} 的整数", "LATTICE_001", actual=k
        )


def _same_k(k1: int, k2: int) -> None:
    if k1 != k2:
        raise LatticeError(
            f"不能混用不同 k 的格元素: {k1} 与 {k2}",
            "LATTICE_002",
            expected_k=k1,
            actual_k=k2,
        )


def position_leq(p: int, q: int, k: int) -> bool:
    """单坐标偏序：相等、p 为底元或 q 为顶元"""

    return p == q or p == 0 or q == k + 1


def position_meet(p: int, q: int, k: int) -> int:
    if position_leq(p, q, k):
        return p
    if position_leq(q, p, k):
        return q
    return 0


def position_join(p: int, q: int, k: int) -> int:
    if position_leq(p, q, k):
        return q
    if position_leq(q, p, k):
        return p
    return k + 1


def position_rank(p: int, k: int) -> int:
    if p == 0:
        return 0
    return 2 if p == k + 1 else 1


def position_text(p: int, k: int) -> str:
    if p == 0:
        return "0"
    if p == k + 1:
        return "1"
    return f"a{p}"


def parse_position(text: str, k: int) -> int:
    """解析单个元素的文本编码

    Raises:
        LatticeError: 编码不合法或原子编号越界
    """

    token = text.strip()
    if token == "0":
        return 0
    if token == "1":
        return k + 1
    if token.startswith("a") and token[1:].isdigit():
        index = int(token[1:])
        if 1 <= index <= k:
            return index
        raise LatticeError(
            f"原子编号越界: {token} (k={k})", "LATTICE_003", actual=token
        )
    raise LatticeError(f"无法识别的格元素编码: {text!r}", "LATTICE_004", actual=text)


@dataclass(frozen=True)
class DiamondElement:
    """M_k 中的一个元素"""

    k: int
    position: int

    def __post_init__(self) -> None:
        _check_k(self.k)
        if not 0 <= self.position <= self.k + 1:
            raise LatticeError(
                f"元素位置越界: {self.position}", "LATTICE_003", actual=self.position
            )

    @classmethod
    def bottom(cls, k: int) -> "DiamondElement":
        return cls(k, 0)

    @classmethod
    def top(cls, k: int) -> "DiamondElement":
        return cls(k, k + 1)

    @classmethod
    def atom(cls, k: int, index: int) -> "DiamondElement":
        if not 1 <= index <= k:
            raise LatticeError(
                f"原子编号越界: {index} (k={k})", "LATTICE_003", actual=index
            )
        return cls(k, index)

    @classmethod
    def parse(cls, text: str, k: int) -> "DiamondElement":
        _check_k(k)
        return cls(k, parse_position(text, k))

    @property
    def kind(self) -> str:
        """"bottom"、"atom" 或 "top" """

        if self.position == 0:
            return "bottom"
        return "top" if self.position == self.k + 1 else "atom"

    @property
    def index(self) -> int | None:
        """原子编号；非原子为 None"""

        return self.position if self.kind == "atom" else None

    def rank(self) -> int:
        return position_rank(self.position, self.k)

    def leq(self, other: "DiamondElement") -> bool:
        _same_k(self.k, other.k)
        return position_leq(self.position, other.position, self.k)

    def __str__(self) -> str:
        return position_text(self.position, self.k)

    def __repr__(self) -> str:
        return f"DiamondElement('{self}', k={self.k})"


def meet(x: DiamondElement, y: DiamondElement) -> DiamondElement:
    """M_k 中的交；不同原子的交为底元"""

    _same_k(x.k, y.k)
    return DiamondElement(x.k, position_meet(x.position, y.position, x.k))


def join(x: DiamondElement, y: DiamondElement) -> DiamondElement:
    """M_k 中的并；不同原子的并为顶元"""

    _same_k(x.k, y.k)
    return DiamondElement(x.k, position_join(x.position, y.position, x.k))


@dataclass(frozen=True)
class LatticeTuple:
    """M_k^n 中的一个点，逐坐标运算"""

    k: int
    positions: Tuple[int, ...]

    def __post_init__(self) -> None:
        _check_k(self.k)
        if len(self.positions) < 1:
            raise LatticeError("元组长度 n 必须至少为 1", "LATTICE_005", actual=0)
        top = self.k + 1
        for p in self.positions:
            if isinstance(p, bool) or not isinstance(p, int) or not 0 <= p <= top:
                raise LatticeError(
                    f"元组中的位置越界: {p}", "LATTICE_003", actual=p
                )

    @classmethod
    def of(cls, elements: Sequence[DiamondElement]) -> "LatticeTuple":
        if not elements:
            raise LatticeError("元组长度 n 必须至少为 1", "LATTICE_005", actual=0)
        k = elements[0].k
        for element in elements:
            _same_k(k, element.k)
        return cls(k, tuple(e.position for e in elements))

    @classmethod
    def parse(cls, text: str, k: int) -> "LatticeTuple":
        """解析逗号连接的文本编码，如 "a1,0,1" """

        _check_k(k)
        return cls(k, tuple(parse_position(token, k) for token in text.split(",")))

    @classmethod
    def bottom(cls, n: int, k: int) -> "LatticeTuple":
        return cls(k, (0,) * n)

    @classmethod
    def top(cls, n: int, k: int) -> "LatticeTuple":
        return cls(k, (k + 1,) * n)

    @property
    def n(self) -> int:
        return len(self.positions)

    def __len__(self) -> int:
        return len(self.positions)

    def __getitem__(self, i: int) -> DiamondElement:
        return DiamondElement(self.k, self.positions[i])

    def elements(self) -> List[DiamondElement]:
        return [DiamondElement(self.k, p) for p in self.positions]

    def _compatible(self, other: "LatticeTuple") -> None:
        _same_k(self.k, other.k)
        if self.n != other.n:
            raise LatticeError(
                f"元组长度不一致: {self.n} 与 {other.n}",
                "LATTICE_006",
                expected=self.n,
                actual=other.n,
            )

    def leq(self, other: "LatticeTuple") -> bool:
        self._compatible(other)
        k = self.k
        return all(position_leq(p, q, k) for p, q in zip(self.positions, other.positions))

    def meet(self, other: "LatticeTuple") -> "LatticeTuple":
        self._compatible(other)
        k = self.k
        return LatticeTuple(
            k, tuple(position_meet(p, q, k) for p, q in zip(self.positions, other.positions))
        )

    def join(self, other: "LatticeTuple") -> "LatticeTuple":
        self._compatible(other)
        k = self.k
        return LatticeTuple(
            k, tuple(position_join(p, q, k) for p, q in zip(self.positions, other.positions))
        )

    def rank(self) -> int:
        """秩：底元 0、原子 1、顶元 2 逐坐标求和，取值范围 [0, 2n]"""

        top = self.k + 1
        return sum(0 if p == 0 else 2 if p == top else 1 for p in self.positions)

    def replace(self, i: int, position: int) -> "LatticeTuple":
        """返回第 i 个坐标被替换后的新元组 t[i=p]"""

        positions = list(self.positions)
        positions[i] = position
        return LatticeTuple(self.k, tuple(positions))

    def is_bottom(self) -> bool:
        return all(p == 0 for p in self.positions)

    def is_top(self) -> bool:
        top = self.k + 1
        return all(p == top for p in self.positions)

    def enumeration_index(self) -> int:
        """在 enumerate_tuples 顺序中的下标"""

        index = 0
        for p in self.positions:
            index = index * (self.k + 2) + p
        return index

    def text(self) -> str:
        return ",".join(position_text(p, self.k) for p in self.positions)

    def __str__(self) -> str:
        return self.text()

    def __repr__(self) -> str:
        return f"LatticeTuple('{self.text()}', k={self.k})"


def rank(t: LatticeTuple) -> int:
    return t.rank()


def chain_prefix(n: int, i: int, k: int) -> LatticeTuple:
    """前 i 个坐标为顶元、其余为底元的元组 v_i

    Raises:
        LatticeError: i 不在 [0, n] 内
    """

    if not 0 <= i <= n:
        raise LatticeError(
            f"前缀长度越界: i={i}, n={n}", "LATTICE_007", expected=f"0..{n}", actual=i
        )
    return LatticeTuple(k, (k + 1,) * i + (0,) * (n - i))


def unit_tuple(n: int, k: int, i: int, atom: int) -> LatticeTuple:
    """只有第 i 个坐标为原子 atom、其余为底元的元组"""

    positions = [0] * n
    positions[i] = atom
    return LatticeTuple(k, tuple(positions))


def tuple_count(n: int, k: int) -> int:
    return (k + 2) ** n


def check_enumeration_budget(n: int, k: int, budget: int) -> None:
    """(k+2)^n 超过预算时抛出 BudgetExceededError"""

    required = tuple_count(n, k)
    if required > budget:
        raise BudgetExceededError(
            f"枚举 {required} 个元组超出预算 {budget}",
            "BUDGET_001",
            budget=budget,
            required=required,
        )


def enumerate_tuples(
    n: int, k: int, budget: int = DEFAULT_ENUMERATION_BUDGET
) -> Iterator[LatticeTuple]:
    """按坐标主序逐个产生 M_k^n 的全部 (k+2)^n 个元组

    Raises:
        BudgetExceededError: (k+2)^n 超出预算
    """

    _check_k(k)
    if n < 1:
        raise LatticeError("元组长度 n 必须至少为 1", "LATTICE_005", actual=n)
    check_enumeration_budget(n, k, budget)
    for positions in itertools.product(range(k + 2), repeat=n):
        yield LatticeTuple(k, positions)


def _coordinate_interval(p: int, q: int, k: int) -> List[int]:
    if p == q:
        return [p]
    if p == 0 and q == k + 1:
        return list(range(k + 2))
    return [p, q]


def interval(a: LatticeTuple, b: LatticeTuple) -> Iterator[LatticeTuple]:
    """产生区间 [a, b] 中的全部元组（按枚举顺序）

    Raises:
        LatticeError: a ≰ b
    """

    if not a.leq(b):
        raise LatticeError(
            f"区间端点不满足 a ≤ b: {a} / {b}", "LATTICE_008", actual=[str(a), str(b)]
        )
    k = a.k
    choices = [_coordinate_interval(p, q, k) for p, q in zip(a.positions, b.positions)]
    for positions in itertools.product(*choices):
        yield LatticeTuple(k, positions)


def upper_covers(t: LatticeTuple) -> List[LatticeTuple]:
    """t 的全部上覆盖：某一坐标 底元→原子 或 原子→顶元"""

    k = t.k
    covers: List[LatticeTuple] = []
    for i, p in enumerate(t.positions):
        if p == 0:
            covers.extend(t.replace(i, a) for a in range(1, k + 1))
        elif p != k + 1:
            covers.append(t.replace(i, k + 1))
    return covers


def lower_covers(t: LatticeTuple) -> List[LatticeTuple]:
    """t 的全部下覆盖：某一坐标 顶元→原子 或 原子→底元"""

    k = t.k
    covers: List[LatticeTuple] = []
    for i, p in enumerate(t.positions):
        if p == k + 1:
            covers.extend(t.replace(i, a) for a in range(1, k + 1))
        elif p != 0:
            covers.append(t.replace(i, 0))
    return covers


def jump_coordinates(a: LatticeTuple, b: LatticeTuple) -> List[int]:
    """a ≤ b 之间由底元直接跳到顶元的坐标"""

    a._compatible(b)
    top = a.k + 1
    return [
        i for i, (p, q) in enumerate(zip(a.positions, b.positions)) if p == 0 and q == top
    ]


def changed_coordinates(a: LatticeTuple, b: LatticeTuple) -> List[int]:
    a._compatible(b)
    return [i for i, (p, q) in enumerate(zip(a.positions, b.positions)) if p != q]


def is_chain(tuples: Sequence[LatticeTuple]) -> bool:
    """序列是否按给定顺序弱递增"""

    return all(tuples[j].leq(tuples[j + 1]) for j in range(len(tuples) - 1))
