"""子模函数 oracle 模块 (Oracle Functions)

M_k^n 上整数值函数的"只能求值"接口、常用变换（归一化、平移、严格化、
限制、单调闭包）、随机子模实例生成器以及暴力参考实现。

Example:
>>> from diamond_sfm.core.oracle import TabulatedFunction, brute_min, strictify
>>> f = TabulatedFunction.from_json(
...     {"n": 1, "k": 3, "values": {"0": 0, "a1": -1, "a2": -1, "a3": -1, "1": -2}}
... )
>>> brute_min(f)
(-2, LatticeTuple('1', k=3))
>>> strictify(f).is_strict
True
"""

import hashlib
import json
import threading
from abc import ABC, abstractmethod
from concurrent.futures import as_completed
from concurrent.futures.thread import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Tuple

import numpy as np

from ..utils.logging_utils import get_logger
from .exceptions import BudgetExceededError, OracleError, ValidationError
from .lattice import (
    DEFAULT_ENUMERATION_BUDGET,
    LatticeTuple,
    _check_k,
    check_enumeration_budget,
    enumerate_tuples,
    lower_covers,
    position_join,
    position_meet,
    tuple_count,
)

logger = get_logger(__name__)

INT64_LIMIT = 2**63
DEFAULT_PAIR_BUDGET = 1_000_000
DEFAULT_SAMPLE_COUNT = 20000


class OracleFunction(ABC):
    """M_k^n 上的整数值函数，只能通过求值访问

    Attributes:
        n (int): 坐标个数
        k (int): 原子个数
        is_strict (bool): 已知是严格子模函数（由 strictify 产生）
    """

    def __init__(self, n: int, k: int, is_strict: bool = False) -> None:
        _check_k(k)
        if isinstance(n, bool) or not isinstance(n, int) or n < 0:
            raise ValidationError("n 必须是非负整数", "ORACLE_001", actual=n)
        self.n = n
        self.k = k
        self.is_strict = is_strict
        self._calls = 0
        self._lock = threading.Lock()
        self._max_abs: int | None = None

    def __call__(self, t: LatticeTuple) -> int:
        if t.k != self.k or len(t.positions) != self.n:
            raise ValidationError(
                f"元组 {t} 与函数维度 (n={self.n}, k={self.k}) 不一致",
                "ORACLE_002",
                expected=(self.n, self.k),
                actual=(len(t.positions), t.k),
            )
        with self._lock:
            self._calls += 1
        return self._evaluate(t)

    @abstractmethod
    def _evaluate(self, t: LatticeTuple) -> int:
        """不计数的求值"""

    @property
    def call_count(self) -> int:
        return self._calls

    def reset_calls(self) -> None:
        with self._lock:
            self._calls = 0

    def bottom(self) -> LatticeTuple:
        return LatticeTuple.bottom(self.n, self.k)

    def top(self) -> LatticeTuple:
        return LatticeTuple.top(self.n, self.k)

    def max_abs(self, budget: int = DEFAULT_ENUMERATION_BUDGET) -> int:
        """max |f|，首次调用时枚举计算并缓存"""

        if self._max_abs is None:
            self._max_abs = max(
                abs(self(t)) for t in enumerate_tuples(self.n, self.k, budget)
            )
        return self._max_abs

    def table(self, budget: int = DEFAULT_ENUMERATION_BUDGET) -> Dict[Tuple[int, ...], int]:
        """按枚举顺序求出全部取值"""

        return {t.positions: self(t) for t in enumerate_tuples(self.n, self.k, budget)}

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(n={self.n}, k={self.k})"


class TabulatedFunction(OracleFunction):
    """完整取值表给出的函数（实例文件格式）"""

    def __init__(self, n: int, k: int, values: Dict[Tuple[int, ...], int]) -> None:
        super().__init__(n, k)
        expected = tuple_count(n, k)
        if len(values) != expected:
            raise ValidationError(
                f"取值表应包含 {expected} 个元组，实际 {len(values)} 个",
                "ORACLE_004",
                expected=expected,
                actual=len(values),
            )
        for positions, value in values.items():
            if isinstance(value, bool) or not isinstance(value, int):
                raise ValidationError(
                    f"函数值必须是整数: {value!r}", "ORACLE_005", actual=repr(value)
                )
            if abs(value) >= INT64_LIMIT:
                raise OracleError(
                    "函数值超出 64 位整数范围",
                    "ORACLE_003",
                    tuple_text=LatticeTuple(k, positions).text(),
                )
        self._values = dict(values)

    def _evaluate(self, t: LatticeTuple) -> int:
        return self._values[t.positions]

    @classmethod
    def from_callable(
        cls,
        n: int,
        k: int,
        fn: Callable[[LatticeTuple], int],
        budget: int = DEFAULT_ENUMERATION_BUDGET,
    ) -> "TabulatedFunction":
        return cls(n, k, {t.positions: int(fn(t)) for t in enumerate_tuples(n, k, budget)})

    @classmethod
    def from_function(
        cls, f: OracleFunction, budget: int = DEFAULT_ENUMERATION_BUDGET
    ) -> "TabulatedFunction":
        return cls(f.n, f.k, f.table(budget))

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "TabulatedFunction":
        """从实例 JSON 对象构造

        Raises:
            ValidationError: 缺少字段、键重复或取值不完整
        """

        try:
            n, k, raw_values = data["n"], data["k"], data["values"]
        except (KeyError, TypeError) as error:
            raise ValidationError(
                f"实例缺少字段: {error}", "ORACLE_006", field_name=str(error)
            ) from error
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ValidationError("n 必须是正整数", "ORACLE_001", field_name="n", actual=n)
        _check_k(k)
        if not isinstance(raw_values, dict):
            raise ValidationError("values 必须是对象", "ORACLE_006", field_name="values")

        values: Dict[Tuple[int, ...], int] = {}
        for text, value in raw_values.items():
            t = LatticeTuple.parse(text, k)
            if t.n != n:
                raise ValidationError(
                    f"元组 {text} 的长度与 n={n} 不一致",
                    "ORACLE_002",
                    expected=n,
                    actual=t.n,
                )
            if t.positions in values:
                raise ValidationError(f"元组重复: {text}", "ORACLE_007", actual=text)
            values[t.positions] = value
        return cls(n, k, values)

    def to_json(self) -> Dict[str, Any]:
        """实例 JSON 对象（键按枚举顺序）"""

        ordered = sorted(self._values.items())
        return {
            "n": self.n,
            "k": self.k,
            "values": {LatticeTuple(self.k, p).text(): v for p, v in ordered},
        }

    def digest(self) -> str:
        """规范化实例 JSON 的 sha256"""

        canonical = json.dumps(self.to_json(), separators=(",", ":"), ensure_ascii=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class CallableFunction(OracleFunction):
    """由 Python 可调用对象给出的函数"""

    def __init__(
        self, n: int, k: int, fn: Callable[[LatticeTuple], int], is_strict: bool = False
    ) -> None:
        super().__init__(n, k, is_strict)
        self._fn = fn

    def _evaluate(self, t: LatticeTuple) -> int:
        return int(self._fn(t))


class ShiftedFunction(OracleFunction):
    """f − θ"""

    def __init__(self, base: OracleFunction, theta: int) -> None:
        super().__init__(base.n, base.k, base.is_strict)
        self.base = base
        self.theta = theta

    def _evaluate(self, t: LatticeTuple) -> int:
        return self.base(t) - self.theta


class StrictifiedFunction(OracleFunction):
    """scale·f(t) + ρ(t)(2n − ρ(t))，结果严格子模"""

    def __init__(self, base: OracleFunction, scale: int) -> None:
        super().__init__(base.n, base.k, is_strict=True)
        if scale < 1:
            raise ValidationError("严格化倍数必须为正", "ORACLE_008", actual=scale)
        self.base = base
        self.scale = scale

    def _evaluate(self, t: LatticeTuple) -> int:
        rho = t.rank()
        value = self.scale * self.base(t) + rho * (2 * self.n - rho)
        if abs(value) >= INT64_LIMIT:
            raise OracleError(
                f"严格化后的值超出 64 位整数范围 (scale={self.scale})",
                "ORACLE_003",
                tuple_text=t.text(),
            )
        return value


class RestrictedFunction(OracleFunction):
    """固定前若干坐标后得到的 M_k^(n−m) 上的函数 t ↦ f(prefix + t)"""

    def __init__(self, base: OracleFunction, prefix: Tuple[int, ...]) -> None:
        if len(prefix) > base.n:
            raise ValidationError(
                "固定的坐标个数超过 n", "ORACLE_009", expected=base.n, actual=len(prefix)
            )
        super().__init__(base.n - len(prefix), base.k, base.is_strict)
        self.base = base
        self.prefix = tuple(prefix)

    def _evaluate(self, t: LatticeTuple) -> int:
        return self.base(LatticeTuple(self.k, self.prefix + t.positions))

    def full_value(self) -> int:
        """所有坐标都已固定时的函数值 (n = 0)"""

        with self._lock:
            self._calls += 1
        return self.base(LatticeTuple(self.k, self.prefix))


class MonotoneClosure(OracleFunction):
    """f'(x) = min_{y ≤ x} f(y)，按秩递推（下覆盖的闭包值与 f(x) 取最小）"""

    def __init__(self, base: OracleFunction, budget: int = DEFAULT_ENUMERATION_BUDGET) -> None:
        super().__init__(base.n, base.k)
        self.base = base
        check_enumeration_budget(base.n, base.k, budget)
        ordered = sorted(enumerate_tuples(base.n, base.k, budget), key=LatticeTuple.rank)
        closure: Dict[Tuple[int, ...], int] = {}
        for t in ordered:
            value = base(t)
            for cover in lower_covers(t):
                value = min(value, closure[cover.positions])
            closure[t.positions] = value
        self._values = closure

    def _evaluate(self, t: LatticeTuple) -> int:
        return self._values[t.positions]


def normalize(f: OracleFunction) -> OracleFunction:
    """f − f(0)，使底元处取值为 0；已归一化时原样返回"""

    offset = f(f.bottom())
    if offset == 0:
        return f
    return ShiftedFunction(f, offset)


def shift(f: OracleFunction, theta: int) -> OracleFunction:
    return f if theta == 0 else ShiftedFunction(f, theta)


def strictify(f: OracleFunction, scale: int | None = None) -> StrictifiedFunction:
    """(n²+1)·f + ρ(2n−ρ)；可指定更大的倍数

    Raises:
        OracleError: 已知取值表时倍数会导致 64 位溢出
    """

    multiplier = f.n * f.n + 1 if scale is None else scale
    if isinstance(f, TabulatedFunction):
        bound = multiplier * f.max_abs() + f.n * f.n
        if bound >= INT64_LIMIT:
            raise OracleError(
                f"严格化倍数 {multiplier} 会导致 64 位溢出", "ORACLE_003"
            )
    return StrictifiedFunction(f, multiplier)


def monotone_closure(
    f: OracleFunction, budget: int = DEFAULT_ENUMERATION_BUDGET
) -> MonotoneClosure:
    return MonotoneClosure(f, budget)


@dataclass(frozen=True)
class SubmodularityReport:
    """子模性检查结果；违反时 witness 给出一对元组"""

    submodular: bool
    witness: Tuple[LatticeTuple, LatticeTuple] | None
    pairs_checked: int
    exhaustive: bool

    def __bool__(self) -> bool:
        return self.submodular


def _pair_slack(
    values: Dict[Tuple[int, ...], int], s: Tuple[int, ...], t: Tuple[int, ...], k: int
) -> int:
    lo = tuple(position_meet(p, q, k) for p, q in zip(s, t))
    hi = tuple(position_join(p, q, k) for p, q in zip(s, t))
    return values[s] + values[t] - values[lo] - values[hi]


class _LazyTable(dict):
    """按需求值并缓存的取值表"""

    def __init__(self, f: OracleFunction) -> None:
        super().__init__()
        self._f = f

    def __missing__(self, key: Tuple[int, ...]) -> int:
        value = self._f(LatticeTuple(self._f.k, key))
        self[key] = value
        return value


def _incomparable(s: Tuple[int, ...], t: Tuple[int, ...], k: int) -> bool:
    return s != t and any(position_meet(p, q, k) not in (p, q) for p, q in zip(s, t))


def _check_pairs(
    f: OracleFunction,
    strict: bool,
    budget: int,
    samples: int | None,
    seed: int,
) -> SubmodularityReport:
    k = f.k
    count = tuple_count(f.n, k)

    if samples is None:
        if count * count > budget:
            raise BudgetExceededError(
                f"穷举 {count * count} 对元组超出预算 {budget}",
                "BUDGET_002",
                budget=budget,
                required=count * count,
            )
        values = f.table(count)
        keys = list(values)
        checked = 0
        for a, s in enumerate(keys):
            for t in keys[a + 1 :]:
                if not _incomparable(s, t, k):
                    continue
                checked += 1
                slack = _pair_slack(values, s, t, k)
                if slack < 0 or (strict and slack == 0):
                    return SubmodularityReport(
                        False, (LatticeTuple(k, s), LatticeTuple(k, t)), checked, True
                    )
        return SubmodularityReport(True, None, checked, True)

    rng = np.random.default_rng(seed)
    values = _LazyTable(f)
    checked = 0
    for _ in range(samples):
        s = tuple(int(v) for v in rng.integers(0, k + 2, size=f.n))
        t = tuple(int(v) for v in rng.integers(0, k + 2, size=f.n))
        if not _incomparable(s, t, k):
            continue
        checked += 1
        slack = _pair_slack(values, s, t, k)
        if slack < 0 or (strict and slack == 0):
            return SubmodularityReport(
                False, (LatticeTuple(k, s), LatticeTuple(k, t)), checked, False
            )
    return SubmodularityReport(True, None, checked, False)


def is_submodular(
    f: OracleFunction,
    budget: int = DEFAULT_PAIR_BUDGET,
    samples: int | None = None,
    seed: int = 0,
) -> SubmodularityReport:
    """检查 f(s∧t) + f(s∨t) ≤ f(s) + f(t)

    samples 为 None 时穷举全部不可比元组对（受 budget 限制），
    否则随机抽样 samples 对。

    Raises:
        BudgetExceededError: 穷举模式下元组对数超出预算
    """

    return _check_pairs(f, False, budget, samples, seed)


def is_strictly_submodular(
    f: OracleFunction, budget: int = DEFAULT_PAIR_BUDGET
) -> SubmodularityReport:
    """对全部不可比元组对检查严格不等式"""

    return _check_pairs(f, True, budget, None, 0)


def brute_min(
    f: OracleFunction, budget: int = DEFAULT_ENUMERATION_BUDGET, jobs: int = 1
) -> Tuple[int, LatticeTuple]:
    """暴力求最小值与枚举顺序下的第一个最小点

    jobs > 1 时按第一个坐标分块并发扫描。

    Raises:
        BudgetExceededError: (k+2)^n 超出预算
    """

    check_enumeration_budget(f.n, f.k, budget)
    if jobs <= 1 or f.n < 2:
        best: Tuple[int, LatticeTuple] | None = None
        for t in enumerate_tuples(f.n, f.k, budget):
            value = f(t)
            if best is None or value < best[0]:
                best = (value, t)
        return best

    def scan_block(first: int) -> Tuple[int, int, LatticeTuple]:
        rest = RestrictedFunction(f, (first,))
        value, t = brute_min(rest, budget)
        return value, first, LatticeTuple(f.k, (first,) + t.positions)

    results: List[Tuple[int, int, LatticeTuple]] = []
    with ThreadPoolExecutor(max_workers=jobs) as executor:
        futures = {executor.submit(scan_block, p): p for p in range(f.k + 2)}
        for future in as_completed(futures):
            results.append(future.result())
    value, _, t = min(results, key=lambda r: (r[0], r[1]))
    logger.debug("并发暴力扫描完成: %s 个分块, 最小值 %s", len(results), value)
    return value, t


def _concave_rank_term(n: int, rng: np.random.Generator, weight: int) -> List[int]:
    increments = sorted(rng.integers(-weight, weight + 1, size=2 * n).tolist(), reverse=True)
    values = [0]
    for step in increments:
        values.append(values[-1] + step)
    return values


def _draw_terms(
    n: int, k: int, value_bound: int, rng: np.random.Generator
) -> List[Callable[[Tuple[int, ...]], int]]:
    """抽取若干个子模基本项"""

    top = k + 1
    weight = max(1, value_bound // max(1, n))
    terms: List[Callable[[Tuple[int, ...]], int]] = []
    for _ in range(int(rng.integers(1, 2 * n + 3))):
        kind = int(rng.integers(0, 4))
        if kind == 0:
            i = int(rng.integers(0, n))
            u_top = int(rng.integers(-weight, weight + 1))
            floor = -((-u_top) // 2)
            table = [0] + [floor + int(rng.integers(0, weight + 1)) for _ in range(k)] + [u_top]
            terms.append(lambda p, i=i, table=table: table[p[i]])
        elif kind in (1, 2):
            anchor = tuple(int(v) for v in rng.integers(0, top + 1, size=n))
            w = int(rng.integers(1, weight + 1))
            if kind == 1:
                terms.append(
                    lambda p, u=anchor, w=w: -w
                    if all(q == a or a == 0 or q == top for q, a in zip(p, u))
                    else 0
                )
            else:
                terms.append(
                    lambda p, u=anchor, w=w: -w
                    if all(q == a or q == 0 or a == top for q, a in zip(p, u))
                    else 0
                )
        else:
            profile = _concave_rank_term(n, rng, weight)
            terms.append(
                lambda p, profile=profile: profile[
                    sum(0 if q == 0 else 2 if q == top else 1 for q in p)
                ]
            )
    return terms


def random_submodular(
    n: int,
    k: int,
    value_bound: int,
    seed: int,
    retries: int = 5,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> TabulatedFunction:
    """按种子确定地生成 |f| ≤ value_bound 的随机子模函数

    函数是若干子模基本项（单坐标项、主滤子/主理想指示函数的负倍数、
    秩的凹函数）的和；值域过宽时丢弃后加入的项，然后居中。

    Raises:
        BudgetExceededError: (k+2)^n 超出预算
        OracleError: retries 次抽取后仍未通过子模性检查
    """

    _check_k(k)
    if value_bound < 0:
        raise ValidationError("value_bound 不能为负", "ORACLE_010", actual=value_bound)
    check_enumeration_budget(n, k, budget)
    rng = np.random.default_rng(seed)
    points = [t.positions for t in enumerate_tuples(n, k, budget)]

    for attempt in range(1, retries + 1):
        terms = _draw_terms(n, k, value_bound, rng)
        columns = [[term(p) for p in points] for term in terms]
        while columns:
            totals = [sum(col[j] for col in columns) for j in range(len(points))]
            if max(totals) - min(totals) <= 2 * value_bound:
                break
            columns.pop()
        if not columns:
            totals = [0] * len(points)
        centre = (max(totals) + min(totals)) // 2
        f = TabulatedFunction(n, k, {p: v - centre for p, v in zip(points, totals)})

        pairs = len(points) ** 2
        report = (
            is_submodular(f)
            if pairs <= DEFAULT_PAIR_BUDGET
            else is_submodular(f, samples=DEFAULT_SAMPLE_COUNT, seed=seed)
        )
        if report.submodular:
            logger.debug(
                "随机实例生成: n=%s, k=%s, seed=%s, 项数=%s, 尝试=%s",
                n, k, seed, len(columns), attempt,
            )
            return f
        logger.warning("随机实例第 %s 次抽取未通过子模检查，重试", attempt)

    raise OracleError(
        f"{retries} 次抽取后仍未得到子模实例", "ORACLE_011", details={"seed": seed}
    )
