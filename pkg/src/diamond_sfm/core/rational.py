"""精确有理数辅助模块 (Rational Helpers)

多面体相关计算全部使用 fractions.Fraction，本模块提供解析、格式化
以及小规模的精确线性代数（高斯-约当消元、秩）。

Example:
>>> from diamond_sfm.core.rational import to_fraction, format_fraction
>>> format_fraction(to_fraction("3/6"))
'1/2'
"""

from fractions import Fraction
from math import lcm
from typing import Iterable, List, Sequence

from .exceptions import ValidationError

Number = int | Fraction


def to_fraction(value: int | Fraction | str) -> Fraction:
    """把 int、Fraction 或 "p/q" / "p" 字符串转换为 Fraction

    浮点数和布尔值被拒绝，避免隐式精度损失。

    Raises:
        ValidationError: 类型或格式不合法
    """

    if isinstance(value, bool) or isinstance(value, float):
        raise ValidationError(
            f"不接受的数值类型: {type(value).__name__}",
            "RATIONAL_001",
            field_name="value",
            actual=repr(value),
        )
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "." in text or "e" in text.lower():
            raise ValidationError(
                f"有理数必须写成 p/q 形式: {value!r}", "RATIONAL_002", actual=value
            )
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as error:
            raise ValidationError(
                f"无法解析有理数: {value!r}", "RATIONAL_002", actual=value
            ) from error
    raise ValidationError(
        f"不接受的数值类型: {type(value).__name__}",
        "RATIONAL_001",
        field_name="value",
        actual=repr(value),
    )


def format_fraction(value: Number) -> str:
    """格式化为 "p/q"，整数也带分母 1"""

    q = Fraction(value)
    return f"{q.numerator}/{q.denominator}"


def lcm_denominator(values: Iterable[Number]) -> int:
    """所有值分母的最小公倍数（空序列为 1）"""

    result = 1
    for value in values:
        result = lcm(result, Fraction(value).denominator)
    return result


def is_half_integral(value: Number) -> bool:
    return (2 * Fraction(value)).denominator == 1


def _reduce(matrix: List[List[Fraction]], columns: int) -> List[int]:
    """原地化为简化行阶梯形，返回主元列"""

    pivots: List[int] = []
    row = 0
    for col in range(columns):
        pivot = next((r for r in range(row, len(matrix)) if matrix[r][col] != 0), None)
        if pivot is None:
            continue
        matrix[row], matrix[pivot] = matrix[pivot], matrix[row]
        lead = matrix[row][col]
        matrix[row] = [entry / lead for entry in matrix[row]]
        for other in range(len(matrix)):
            if other != row and matrix[other][col] != 0:
                factor = matrix[other][col]
                matrix[other] = [
                    a - factor * b for a, b in zip(matrix[other], matrix[row])
                ]
        pivots.append(col)
        row += 1
        if row == len(matrix):
            break
    return pivots


def matrix_rank(rows: Sequence[Sequence[Number]]) -> int:
    """精确秩"""

    if not rows:
        return 0
    matrix = [[Fraction(v) for v in r] for r in rows]
    return len(_reduce(matrix, len(matrix[0])))


def solve_linear(
    rows: Sequence[Sequence[Number]], rhs: Sequence[Number]
) -> List[Fraction] | None:
    """精确求解方阵或超定方程组 A·x = b

    解唯一时返回解；奇异（解不唯一）或矛盾时返回 None。
    """

    if not rows:
        return None
    width = len(rows[0])
    matrix = [[Fraction(v) for v in r] + [Fraction(b)] for r, b in zip(rows, rhs)]
    pivots = _reduce(matrix, width + 1)
    if width in pivots or len(pivots) < width:
        return None
    solution = [Fraction(0)] * width
    for r, col in enumerate(pivots):
        solution[col] = matrix[r][width]
    return solution


def dot(a: Sequence[Number], b: Sequence[Number]) -> Fraction:
    return sum((Fraction(x) * y for x, y in zip(a, b)), Fraction(0))


def null_vector(rows: Sequence[Sequence[Number]], width: int) -> List[Fraction] | None:
    """A·d = 0 的一个非零解（取编号最小的自由列为 1），满秩时返回 None"""

    if not rows:
        return [Fraction(1)] + [Fraction(0)] * (width - 1) if width else None
    matrix = [[Fraction(v) for v in r] for r in rows]
    pivots = _reduce(matrix, width)
    free = next((col for col in range(width) if col not in pivots), None)
    if free is None:
        return None
    vector = [Fraction(0)] * width
    vector[free] = Fraction(1)
    for r, col in enumerate(pivots):
        vector[col] = -matrix[r][free]
    return vector
