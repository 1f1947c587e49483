"""最小值证书模块 (Minimum Certificates)

证书断言 min f = m，内容包括：取到 m 的元组 m̂、N+1 个向量 x_i
（N = n·k）及每个向量上的 2n 元紧链、以及统一化的非正整数对偶向量 c。

验证器按固定顺序检查，第一个失败的检查决定拒绝原因：

====  ========================  ==========================================
编号  原因码                    内容
====  ========================  ==========================================
2     CHAIN_SHAPE               链从 0 到 1、弱递增、每步至多一个 0→1 坐标
3     NOT_TIGHT                 链上元组对对应向量是紧的
4     NOT_MEMBER                x_i ∈ P_M(f)（按链做集合函数最小化）
1     INFEASIBLE_DECOMPOSITION  存在 λ ≥ 0, Σλ = 1, y ≤ 0 使 Σλ_i x_i + y = c
5     DUAL_MISMATCH             c ≤ 0、统一化、c(1) = f(m̂) = m
====  ========================  ==========================================

结构问题（缺字段、版本未知、维度不符）报告为 MALFORMED，检查编号为 0。
证明器只适用于稠密规模：需要暴力最小化与顶点枚举。

Example:
>>> from diamond_sfm.core.oracle import TabulatedFunction
>>> from diamond_sfm.core.certify import prove, verify
>>> f = TabulatedFunction.from_json(
...     {"n": 1, "k": 3, "values": {"0": 0, "a1": -1, "a2": -1, "a3": -1, "1": -2}}
... )
>>> verify(prove(f), f).accepted
True
"""

import json
from concurrent.futures.thread import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

from ..utils.logging_utils import get_logger
from .config import DEFAULT_SETTINGS, SolverSettings
from .exceptions import CertificateError, SFMError
from .greedy import minmax_dual
from .lattice import LatticeTuple, jump_coordinates
from .lpengine import INFEASIBLE, LinearSystem, feasibility, pm_system, solve_lp_dense, vertices_dense
from .minimize import chain_separate
from .oracle import OracleFunction, brute_min, normalize
from .polytope import PVector, TightChain, apply, is_unified, tight_tuples_dense
from .rational import format_fraction

logger = get_logger(__name__)

CERTIFICATE_VERSION = 1

CHAIN_SHAPE = "CHAIN_SHAPE"
NOT_TIGHT = "NOT_TIGHT"
NOT_MEMBER = "NOT_MEMBER"
INFEASIBLE_DECOMPOSITION = "INFEASIBLE_DECOMPOSITION"
DUAL_MISMATCH = "DUAL_MISMATCH"
MALFORMED = "MALFORMED"


@dataclass(frozen=True)
class Certificate:
    """min f = claimed_min 的证书"""

    n: int
    k: int
    claimed_min: int
    witness: LatticeTuple
    vectors: Tuple[PVector, ...]
    chains: Tuple[Tuple[LatticeTuple, ...], ...]
    dual: PVector

    def to_json(self) -> Dict[str, Any]:
        return {
            "version": CERTIFICATE_VERSION,
            "n": self.n,
            "k": self.k,
            "claimed_min": self.claimed_min,
            "witness": self.witness.text(),
            "vectors": [x.to_json() for x in self.vectors],
            "chains": [[t.text() for t in chain] for chain in self.chains],
            "dual": self.dual.to_json(),
        }

    @classmethod
    def from_json(cls, data: Any) -> "Certificate":
        """逐字段校验并解析

        Raises:
            CertificateError: 版本未知或结构不合法，problems 逐项列出
        """

        if not isinstance(data, dict):
            raise CertificateError("证书必须是 JSON 对象", "CERT_001", problems=["根节点不是对象"])
        version = data.get("version")
        if version != CERTIFICATE_VERSION:
            raise CertificateError(
                f"不支持的证书版本: {version!r}（当前版本 {CERTIFICATE_VERSION}）",
                "CERT_002",
                problems=[f"version: {version!r}"],
            )

        problems: List[str] = []
        for name in ("n", "k", "claimed_min"):
            value = data.get(name)
            if isinstance(value, bool) or not isinstance(value, int):
                problems.append(f"{name}: 必须是整数")
        for name, kind in (("witness", str), ("vectors", list), ("chains", list), ("dual", dict)):
            if not isinstance(data.get(name), kind):
                problems.append(f"{name}: 缺失或类型错误")
        if problems:
            raise CertificateError("证书结构不合法", "CERT_003", problems=problems)

        n, k = data["n"], data["k"]
        witness = _parse_field(problems, "witness", lambda: LatticeTuple.parse(data["witness"], k))
        dual = _parse_field(problems, "dual", lambda: PVector.from_json(data["dual"]))
        vectors = [
            _parse_field(problems, f"vectors[{j}]", lambda raw=raw: PVector.from_json(raw))
            for j, raw in enumerate(data["vectors"])
        ]
        chains: List[Tuple[LatticeTuple, ...]] = []
        for j, raw in enumerate(data["chains"]):
            if not isinstance(raw, list):
                problems.append(f"chains[{j}]: 必须是元组文本列表")
                continue
            chains.append(
                tuple(
                    _parse_field(problems, f"chains[{j}][{m}]", lambda text=text: LatticeTuple.parse(text, k))
                    for m, text in enumerate(raw)
                )
            )

        dimension = n * k
        if len(vectors) != dimension + 1:
            problems.append(f"vectors: 应有 N+1 = {dimension + 1} 个，实际 {len(vectors)} 个")
        if len(chains) != len(vectors):
            problems.append(f"chains: 个数 {len(chains)} 与向量个数 {len(vectors)} 不一致")
        for name, item in [("witness", witness), ("dual", dual)] + [
            (f"vectors[{j}]", v) for j, v in enumerate(vectors)
        ]:
            if isinstance(item, LatticeTuple) and len(item) != n:
                problems.append(f"{name}: 长度应为 {n}")
            if isinstance(item, PVector) and (item.n, item.k) != (n, k):
                problems.append(f"{name}: 维度应为 (n={n}, k={k})")
        for j, chain in enumerate(chains):
            if any(isinstance(t, LatticeTuple) and len(t) != n for t in chain):
                problems.append(f"chains[{j}]: 元组长度应为 {n}")
        if problems:
            raise CertificateError("证书结构不合法", "CERT_003", problems=problems)
        return cls(n, k, data["claimed_min"], witness, tuple(vectors), tuple(chains), dual)


def _parse_field(problems: List[str], name: str, parse) -> Any:
    try:
        return parse()
    except SFMError as error:
        problems.append(f"{name}: {error.message}")
    except (TypeError, ValueError, AttributeError) as error:
        problems.append(f"{name}: {error}")
    return None


def serialize(cert: Certificate) -> str:
    return json.dumps(cert.to_json(), ensure_ascii=False, indent=2)


def deserialize(payload: str | bytes) -> Certificate:
    """从 JSON 文本解析证书

    Raises:
        CertificateError: JSON 损坏、版本未知或结构不合法
    """

    try:
        data = json.loads(payload)
    except (json.JSONDecodeError, UnicodeDecodeError) as error:
        raise CertificateError(
            f"证书不是合法的 JSON: {error}", "CERT_001", problems=[str(error)]
        ) from error
    return Certificate.from_json(data)


@dataclass(frozen=True)
class Verdict:
    """验证结果；拒绝时 check 为第一个失败的检查编号"""

    accepted: bool
    check: int | None = None
    reason: str | None = None
    message: str = ""
    details: Dict[str, Any] = field(default_factory=dict, compare=False)
    oracle_calls: int = 0

    def __bool__(self) -> bool:
        return self.accepted

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"accepted": self.accepted, "oracle_calls": self.oracle_calls}
        if not self.accepted:
            data.update(check=self.check, reason=self.reason, message=self.message, details=self.details)
        return data


def _reject(check: int, reason: str, message: str, **details: Any) -> Verdict:
    return Verdict(False, check, reason, message, details)


def _check_shape(cert: Certificate) -> Verdict | None:
    length = 2 * cert.n
    for j, chain in enumerate(cert.chains):
        if len(chain) != length:
            return _reject(2, CHAIN_SHAPE, f"第 {j} 条链应有 {length} 个元组", chain=j)
        if not (chain[0].is_bottom() and chain[-1].is_top()):
            return _reject(2, CHAIN_SHAPE, f"第 {j} 条链必须从 0 开始、到 1 结束", chain=j)
        for m, (a, b) in enumerate(zip(chain, chain[1:])):
            if not a.leq(b):
                return _reject(2, CHAIN_SHAPE, f"第 {j} 条链在第 {m} 步不递增", chain=j, step=m)
            if len(jump_coordinates(a, b)) > 1:
                return _reject(2, CHAIN_SHAPE, f"第 {j} 条链在第 {m} 步有多个 0→1 坐标", chain=j, step=m)
    return None


def _check_tight(cert: Certificate, g: OracleFunction) -> Verdict | None:
    for j, (x, chain) in enumerate(zip(cert.vectors, cert.chains)):
        for t in chain:
            if apply(x, t) != g(t):
                return _reject(
                    3,
                    NOT_TIGHT,
                    f"第 {j} 个向量在 {t} 上不紧",
                    vector=j,
                    tuple=t.text(),
                    value=format_fraction(apply(x, t)),
                    bound=g(t),
                )
    return None


def _check_members(cert: Certificate, g: OracleFunction, settings: SolverSettings) -> Verdict | None:
    def check(item: Tuple[PVector, Tuple[LatticeTuple, ...]]):
        x, chain = item
        return chain_separate(x, g, TightChain(chain, jump_bound=1), settings)

    items = list(zip(cert.vectors, cert.chains))
    if settings.jobs > 1:
        with ThreadPoolExecutor(max_workers=settings.jobs) as executor:
            results = list(executor.map(check, items))
    else:
        results = [check(item) for item in items]
    for j, result in enumerate(results):
        if not result:
            return _reject(
                4, NOT_MEMBER, f"第 {j} 个向量不属于 P_M(f)", vector=j, tuple=result.violated.text()
            )
    return None


def _decomposition_system(vectors: Sequence[PVector], c: PVector) -> LinearSystem:
    """λ ≥ 0, Σλ = 1, Σλ_i x_i ≥ c（y = c − Σλ_i x_i ≤ 0）"""

    count = len(vectors)
    system = LinearSystem(count)
    for j in range(count):
        row = [0] * count
        row[j] = -1
        system.add(row, 0)
    system.add([1] * count, 1, "=")
    for position, target in enumerate(c.entries):
        system.add([-x.entries[position] for x in vectors], -target)
    return system


def _check_decomposition(cert: Certificate) -> Verdict | None:
    result = feasibility(_decomposition_system(cert.vectors, cert.dual))
    if result.status == INFEASIBLE:
        farkas = [format_fraction(u) for u in result.farkas] if result.farkas else None
        return _reject(1, INFEASIBLE_DECOMPOSITION, "c 不能写成 Σλ_i x_i + y (y ≤ 0)", farkas=farkas)
    return None


def _check_dual(cert: Certificate, f: OracleFunction, offset: int) -> Verdict | None:
    c = cert.dual
    if not c.is_nonpositive():
        return _reject(5, DUAL_MISMATCH, "对偶向量不是非正的")
    if not c.is_integral() or not is_unified(c):
        return _reject(5, DUAL_MISMATCH, "对偶向量必须是统一化的整数向量")
    attained = f(cert.witness)
    if attained != cert.claimed_min:
        return _reject(
            5, DUAL_MISMATCH, f"f(m̂) = {attained} 与声明的最小值 {cert.claimed_min} 不符"
        )
    dual_value = apply(c, LatticeTuple.top(cert.n, cert.k)) + offset
    if dual_value != cert.claimed_min:
        return _reject(
            5,
            DUAL_MISMATCH,
            f"c(1) + f(0) = {format_fraction(dual_value)} 与声明的最小值 {cert.claimed_min} 不符",
        )
    return None


def verify(
    cert: Certificate, f: OracleFunction, settings: SolverSettings = DEFAULT_SETTINGS
) -> Verdict:
    """验证证书；接受时 claimed_min 就是 min f

    f(0) ≠ 0 时对 f − f(0) 检查向量与链，对偶值加回 f(0) 后比较。
    λ 与 y 由验证器重新求解，不随证书传输。
    """

    if (cert.n, cert.k) != (f.n, f.k):
        return _reject(
            0, MALFORMED, "证书维度与实例不一致", expected=[f.n, f.k], actual=[cert.n, cert.k]
        )
    if len(cert.vectors) != cert.n * cert.k + 1 or len(cert.chains) != len(cert.vectors):
        return _reject(0, MALFORMED, "向量或链的个数不是 N+1")

    start = f.call_count
    offset = f(f.bottom())
    g = normalize(f)
    for run in (
        _check_shape,
        lambda cert: _check_tight(cert, g),
        lambda cert: _check_members(cert, g, settings),
        _check_decomposition,
        lambda cert: _check_dual(cert, f, offset),
    ):
        verdict = run(cert)
        if verdict is not None:
            logger.info("证书被拒绝: 检查 %s (%s) %s", verdict.check, verdict.reason, verdict.message)
            return Verdict(
                False,
                verdict.check,
                verdict.reason,
                verdict.message,
                verdict.details,
                f.call_count - start,
            )
    calls = f.call_count - start
    logger.info("证书通过验证，最小值 %s，oracle 调用 %s 次", cert.claimed_min, calls)
    return Verdict(True, oracle_calls=calls)


# 证明器


def _maximal_tight_chain(tight: Sequence[LatticeTuple]) -> List[LatticeTuple]:
    """在紧元组格中从 0 逐次取最小的严格上界，得到一条极大链"""

    ordered = sorted(tight, key=lambda t: (t.rank(), t.enumeration_index()))
    chain = [ordered[0]]
    while True:
        current = chain[-1]
        above = [t for t in ordered if current.leq(t) and t != current]
        if not above:
            return chain
        chain.append(above[0])


def _compress_chain(chain: Sequence[LatticeTuple], length: int) -> Tuple[LatticeTuple, ...]:
    """保留首尾，每步跳到最远的、0→1 坐标不超过一个的元组，再重复 1 补足长度

    Raises:
        CertificateError: 极大链上相邻两元组已有多个 0→1 坐标，或压缩后仍然过长
    """

    kept = [chain[0]]
    j = 0
    while j < len(chain) - 1:
        reach = j + 1
        while reach + 1 < len(chain) and len(jump_coordinates(chain[j], chain[reach + 1])) <= 1:
            reach += 1
        if len(jump_coordinates(chain[j], chain[reach])) > 1:
            raise CertificateError(
                "紧链相邻元组之间有多个 0→1 坐标", "CERT_004", problems=[t.text() for t in chain]
            )
        kept.append(chain[reach])
        j = reach
    if len(kept) > length:
        raise CertificateError(
            f"紧链无法压缩到 {length} 个元组", "CERT_004", problems=[t.text() for t in kept]
        )
    return tuple(kept + [kept[-1]] * (length - len(kept)))


def prove(f: OracleFunction, settings: SolverSettings = DEFAULT_SETTINGS) -> Certificate:
    """为 min f 构造证书（稠密规模）

    c = minmax_dual(f)；在 P_M(f − f(0)) 的顶点中取 1 为紧的那些，
    用 Carathéodory LP 选出至多 N+1 个凸组合权为正的顶点（重复补足 N+1 个），
    再为每个顶点构造每步至多一个 0→1 坐标的 2n 元紧链。

    Raises:
        BudgetExceededError: 枚举或顶点维数超出预算
        CertificateError: 证明器内部一致性失败
    """

    if f.n < 1:
        raise CertificateError("证书要求 n ≥ 1", "CERT_005", problems=["n"])
    budget = settings.enumeration_budget
    value, witness = brute_min(f, budget, settings.jobs)
    g = normalize(f)
    c = minmax_dual(f, budget)
    top = g.top()

    vertices = [
        PVector(f.n, f.k, v)
        for v in vertices_dense(pm_system(g, budget), settings)
        if apply(PVector(f.n, f.k, v), top) == g(top)
    ]
    result = solve_lp_dense(_decomposition_system(vertices, c), [0] * len(vertices))
    if not result.is_optimal:
        raise CertificateError(
            "对偶向量无法由基顶点分解", "CERT_006", problems=[str(c)]
        )
    chosen = [v for v, weight in zip(vertices, result.point) if weight > 0]
    dimension = f.n * f.k
    if len(chosen) > dimension + 1:
        raise CertificateError(
            f"分解用到 {len(chosen)} 个顶点，超过 N+1", "CERT_006", problems=[len(chosen)]
        )
    chosen += [chosen[0]] * (dimension + 1 - len(chosen))

    chains = tuple(
        _compress_chain(_maximal_tight_chain(tight_tuples_dense(x, g, budget)), 2 * f.n)
        for x in chosen
    )
    logger.info("证书已生成: 最小值 %s，%s 个顶点", value, len(set(chosen)))
    return Certificate(f.n, f.k, value, witness, tuple(chosen), chains, c)


__all__ = [
    "CERTIFICATE_VERSION",
    "Certificate",
    "Verdict",
    "verify",
    "prove",
    "serialize",
    "deserialize",
    "CHAIN_SHAPE",
    "NOT_TIGHT",
    "NOT_MEMBER",
    "INFEASIBLE_DECOMPOSITION",
    "DUAL_MISMATCH",
    "MALFORMED",
]
