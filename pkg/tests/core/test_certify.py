import json
import unittest
from dataclasses import replace

from hypothesis import given, settings
from hypothesis import strategies as st

from src.diamond_sfm.core.certify import (
    CERTIFICATE_VERSION,
    CHAIN_SHAPE,
    DUAL_MISMATCH,
    INFEASIBLE_DECOMPOSITION,
    MALFORMED,
    NOT_MEMBER,
    NOT_TIGHT,
    Certificate,
    deserialize,
    prove,
    serialize,
    verify,
)
from src.diamond_sfm.core.config import DEFAULT_SETTINGS
from src.diamond_sfm.core.exceptions import CertificateError
from src.diamond_sfm.core.lattice import LatticeTuple
from src.diamond_sfm.core.oracle import TabulatedFunction, brute_min, random_submodular
from src.diamond_sfm.core.polytope import PVector

E1 = {"n": 1, "k": 3, "values": {"0": 0, "a1": 1, "a2": 1, "a3": 1, "1": 1}}
E2 = {"n": 1, "k": 3, "values": {"0": 0, "a1": -1, "a2": -1, "a3": -1, "1": -2}}


def _tuple(text: str) -> LatticeTuple:
    return LatticeTuple.parse(text, 3)


class TestProveAndVerify(unittest.TestCase):
    """测试证书的生成与验证"""

    def setUp(self) -> None:
        self.f = TabulatedFunction.from_json(E2)
        self.cert = prove(self.f)

    def test_example_certificate(self) -> None:
        """E2 的证书内容"""
        self.assertEqual(self.cert.claimed_min, -2)
        self.assertEqual(self.cert.witness.text(), "1")
        self.assertEqual(self.cert.dual.rows(), [(-1, -1, -1)])
        self.assertEqual(len(self.cert.vectors), 4)
        self.assertTrue(all(x.rows() == [(-1, -1, -1)] for x in self.cert.vectors))
        self.assertTrue(all([t.text() for t in chain] == ["0", "1"] for chain in self.cert.chains))

    def test_accepted(self) -> None:
        """正确的证书被接受"""
        verdict = verify(self.cert, self.f)
        self.assertTrue(verdict)
        self.assertIsNone(verdict.reason)
        self.assertGreater(verdict.oracle_calls, 0)
        self.assertEqual(verdict.to_json(), {"accepted": True, "oracle_calls": verdict.oracle_calls})

    def test_nonnegative_instance(self) -> None:
        """最小值为 0 的实例"""
        f = TabulatedFunction.from_json(E1)
        cert = prove(f)
        self.assertEqual((cert.claimed_min, cert.witness.text()), (0, "0"))
        self.assertTrue(verify(cert, f))

    def test_tampered_certificates(self) -> None:
        """篡改后由第一个失败的检查给出拒绝原因"""
        chains = list(self.cert.chains)
        vectors = list(self.cert.vectors)
        cases = [
            (
                replace(self.cert, chains=tuple([(_tuple("a1"), _tuple("1"))] + chains[1:])),
                2,
                CHAIN_SHAPE,
            ),
            (
                replace(self.cert, vectors=tuple([PVector.from_rows([[-2, -2, -2]])] + vectors[1:])),
                3,
                NOT_TIGHT,
            ),
            (
                replace(self.cert, vectors=tuple([PVector.from_rows([[0, -2, -2]])] + vectors[1:])),
                4,
                NOT_MEMBER,
            ),
            (
                replace(self.cert, vectors=tuple([PVector.from_rows([[0, -1, -1]])] + vectors[1:])),
                3,
                NOT_TIGHT,
            ),
            (replace(self.cert, dual=PVector.zeros(1, 3)), 1, INFEASIBLE_DECOMPOSITION),
            (replace(self.cert, dual=PVector.from_rows([[-2, -1, -1]])), 5, DUAL_MISMATCH),
            (replace(self.cert, claimed_min=-1), 5, DUAL_MISMATCH),
            (replace(self.cert, claimed_min=-1, witness=_tuple("a1")), 5, DUAL_MISMATCH),
            (replace(self.cert, vectors=tuple(vectors[:2])), 0, MALFORMED),
        ]
        for cert, check, reason in cases:
            with self.subTest(reason=reason, check=check):
                verdict = verify(cert, self.f)
                self.assertFalse(verdict)
                self.assertEqual((verdict.check, verdict.reason), (check, reason))
                self.assertEqual(verdict.to_json()["reason"], reason)

    def test_not_member_reports_tuple(self) -> None:
        """成员检查失败时给出违反的元组"""
        vectors = (PVector.from_rows([[0, -2, -2]]),) + self.cert.vectors[1:]
        verdict = verify(replace(self.cert, vectors=vectors), self.f)
        self.assertEqual(verdict.details["tuple"], "a1")

    def test_dimension_mismatch(self) -> None:
        """证书与实例维度不一致"""
        other = random_submodular(2, 3, 5, seed=1)
        verdict = verify(self.cert, other)
        self.assertEqual((verdict.check, verdict.reason), (0, MALFORMED))

    def test_parallel_members(self) -> None:
        """并行检查成员关系结果一致"""
        verdict = verify(self.cert, self.f, DEFAULT_SETTINGS.with_overrides(jobs=3))
        self.assertTrue(verdict)

    @settings(max_examples=10, deadline=None)
    @given(k=st.integers(3, 4), bound=st.integers(0, 10), seed=st.integers(0, 10_000))
    def test_random_instances(self, k: int, bound: int, seed: int) -> None:
        """随机实例的证书声明暴力最小值并被接受；抬高任一向量分量或破坏对偶向量的统一化都被拒绝"""
        f = random_submodular(1, k, bound, seed)
        cert = prove(f)
        self.assertEqual(cert.claimed_min, brute_min(f)[0])
        self.assertTrue(verify(cert, f))

        for j, x in enumerate(cert.vectors):
            entries = list(x.entries)
            entries[entries.index(max(entries))] += 1
            raised = cert.vectors[:j] + (PVector(1, k, tuple(entries)),) + cert.vectors[j + 1 :]
            self.assertEqual(verify(replace(cert, vectors=raised), f).reason, NOT_TIGHT)

        entries = list(cert.dual.entries)
        entries[entries.index(min(entries))] -= 1
        deunified = replace(cert, dual=PVector(1, k, tuple(entries)))
        self.assertEqual(verify(deunified, f).reason, DUAL_MISMATCH)


class TestSerialization(unittest.TestCase):
    """测试证书文本格式"""

    def setUp(self) -> None:
        self.cert = prove(TabulatedFunction.from_json(E2))
        self.data = json.loads(serialize(self.cert))

    def test_round_trip(self) -> None:
        """序列化后再解析得到相同证书"""
        self.assertEqual(self.data["version"], CERTIFICATE_VERSION)
        self.assertEqual(self.data["witness"], "1")
        self.assertEqual(self.data["chains"][0], ["0", "1"])
        self.assertEqual(deserialize(serialize(self.cert)), self.cert)
        self.assertEqual(deserialize(serialize(self.cert).encode("utf-8")), self.cert)

    def test_errors(self) -> None:
        """测试结构错误的错误码"""
        without_dual = {key: value for key, value in self.data.items() if key != "dual"}
        cases = [
            ("not json", "CERT_001"),
            ("[1, 2]", "CERT_001"),
            (json.dumps({**self.data, "version": 99}), "CERT_002"),
            (json.dumps(without_dual), "CERT_003"),
            (json.dumps({**self.data, "vectors": self.data["vectors"][:1]}), "CERT_003"),
            (json.dumps({**self.data, "witness": "a9"}), "CERT_003"),
            (json.dumps({**self.data, "claimed_min": "x"}), "CERT_003"),
        ]
        for payload, code in cases:
            with self.subTest(code=code, payload=payload[:30]):
                with self.assertRaises(CertificateError) as context:
                    deserialize(payload)
                self.assertEqual(context.exception.error_code, code)

    def test_problems_listed(self) -> None:
        """结构错误逐项列出问题"""
        with self.assertRaises(CertificateError) as context:
            Certificate.from_json({"version": CERTIFICATE_VERSION, "n": 1})
        self.assertGreaterEqual(len(context.exception.problems), 5)


if __name__ == "__main__":
    unittest.main()
