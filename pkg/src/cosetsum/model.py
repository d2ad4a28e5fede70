"""Problem instances: source pairs, MACs, test channels, builtins and text I/O.

The decoder's target is Z = c1*S1 + c2*S2 over F_q. Weighted targets are
normalized by relabeling each source (and the matching test-channel V axis)
through the field automorphism s -> c*s, so that all downstream rate and
codec computations work with the plain sum. The relabeling is a bijection of
the alphabet and leaves every entropy in the problem unchanged.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, ParseError, ValidationError
from .galois import PrimeField
from .probability import SUM_TOL, ConditionalPmf, JointPmf


@dataclass(frozen=True)
class SourcePair:
    """Pair of F_q-valued sources with target Z = c1*S1 + c2*S2 (mod q)."""

    q: int
    joint: JointPmf
    coeffs: tuple[int, int] = (1, 1)

    def __post_init__(self):
        PrimeField(self.q)
        if self.joint.names != ("s1", "s2"):
            raise ValidationError(f"source axes must be ('s1','s2'), got {self.joint.names}")
        if self.joint.axes[0][1] != self.q or self.joint.axes[1][1] != self.q:
            raise ValidationError("source alphabets must both have size q")
        c1, c2 = self.coeffs
        if c1 % self.q == 0 or c2 % self.q == 0:
            raise ValidationError("target coefficients must be nonzero field elements")
        object.__setattr__(self, "coeffs", (c1 % self.q, c2 % self.q))

    def normalized(self) -> "SourcePair":
        """Equivalent pair with coeffs (1,1), via the s -> c*s relabeling."""
        c1, c2 = self.coeffs
        if (c1, c2) == (1, 1):
            return self
        t = np.zeros_like(self.joint.table)
        for s1 in range(self.q):
            for s2 in range(self.q):
                t[(c1 * s1) % self.q, (c2 * s2) % self.q] = self.joint.table[s1, s2]
        return SourcePair(self.q, JointPmf(self.joint.axes, t), (1, 1))

    def sum_pmf(self) -> np.ndarray:
        """Distribution of Z = c1*S1 + c2*S2 on F_q."""
        norm = self.normalized()
        pz = np.zeros(self.q)
        for s1 in range(self.q):
            for s2 in range(self.q):
                pz[(s1 + s2) % self.q] += norm.joint.table[s1, s2]
        return pz

    def sum_entropy(self) -> float:
        from .probability import entropy_bits

        return entropy_bits(self.sum_pmf())

    def is_independent(self, tol: float = 1e-9) -> bool:
        p1 = self.joint.table.sum(axis=1)
        p2 = self.joint.table.sum(axis=0)
        return bool(np.allclose(self.joint.table, np.outer(p1, p2), rtol=0.0, atol=tol))


@dataclass(frozen=True)
class Mac:
    """Two-sender memoryless channel W(y | x1, x2); alphabets are index sets."""

    x1_size: int
    x2_size: int
    y_size: int
    w: ConditionalPmf

    def __post_init__(self):
        expected_given = (("x1", self.x1_size), ("x2", self.x2_size))
        expected_target = (("y", self.y_size),)
        if self.w.given_axes != expected_given or self.w.target_axes != expected_target:
            raise ValidationError(
                f"channel axes {self.w.given_axes}->{self.w.target_axes} do not match sizes"
            )

    @property
    def table(self) -> np.ndarray:
        return self.w.table


@dataclass(frozen=True)
class TestChannel:
    """Product-form auxiliary input distribution p(v1,x1) p(v2,x2), V over F_q."""

    __test__ = False  # not a pytest class, despite the name

    p1: JointPmf
    p2: JointPmf

    def __post_init__(self):
        if self.p1.names != ("v1", "x1") or self.p2.names != ("v2", "x2"):
            raise ValidationError("test channel axes must be (v1,x1) and (v2,x2)")
        if self.p1.axes[0][1] != self.p2.axes[0][1]:
            raise ValidationError("V alphabets must have equal size")
        PrimeField(self.q)

    @property
    def q(self) -> int:
        return self.p1.axes[0][1]

    def joint(self) -> JointPmf:
        return self.p1.product(self.p2)

    def relabeled(self, c1: int, c2: int) -> "TestChannel":
        """Relabel v_j -> c_j * v_j; mirrors SourcePair.normalized()."""
        q = self.q
        if (c1 % q, c2 % q) == (1, 1):
            return self

        def relab(p: JointPmf, c: int) -> JointPmf:
            t = np.zeros_like(p.table)
            for v in range(q):
                t[(c * v) % q] = p.table[v]
            return JointPmf(p.axes, t)

        return TestChannel(relab(self.p1, c1), relab(self.p2, c2))


def normalize_instance(src: SourcePair, tc: TestChannel | None):
    """Apply the coefficient-normalizing relabeling to sources and V axes."""
    c1, c2 = src.coeffs
    nsrc = src.normalized()
    ntc = tc.relabeled(c1, c2) if tc is not None else None
    return nsrc, ntc


@dataclass(frozen=True)
class LayeredSourceTest:
    """Joint pmf over (T1, T2, S1, S2) for the two-layer source region."""

    p: JointPmf

    def __post_init__(self):
        if self.p.names != ("t1", "t2", "s1", "s2"):
            raise ValidationError("layered source axes must be (t1,t2,s1,s2)")
        # conditional independence T1 - S1 - S2 - T2:
        # p(t1,t2|s1,s2) = p(t1|s1) p(t2|s2)
        ps = self.p.marginal_array(["s1", "s2"])
        pt1s1 = self.p.marginal_array(["t1", "s1"])
        pt2s2 = self.p.marginal_array(["t2", "s2"])
        ps1 = ps.sum(axis=1)
        ps2 = ps.sum(axis=0)
        t = self.p.table
        recon = np.zeros_like(t)
        for t1 in range(self.p.size("t1")):
            for t2 in range(self.p.size("t2")):
                for s1 in range(self.p.size("s1")):
                    for s2 in range(self.p.size("s2")):
                        if ps1[s1] > 0 and ps2[s2] > 0:
                            recon[t1, t2, s1, s2] = (
                                ps[s1, s2] * pt1s1[t1, s1] / ps1[s1] * pt2s2[t2, s2] / ps2[s2]
                            )
        if not np.allclose(recon, t, rtol=0.0, atol=1e-9):
            raise ValidationError("T1 - S1 - S2 - T2 Markov condition violated")

    @classmethod
    def from_conditionals(cls, src: SourcePair, t1_given_s1: np.ndarray, t2_given_s2: np.ndarray):
        """Build p(t1,t2,s1,s2) = W(s1,s2) p(t1|s1) p(t2|s2)."""
        ws = src.normalized().joint.table
        a1 = np.asarray(t1_given_s1, dtype=float)  # shape (|T1|, q): p(t1|s1) indexed [t1, s1]
        a2 = np.asarray(t2_given_s2, dtype=float)
        t = np.einsum("ab,ia,jb->ijab", ws, a1, a2)
        axes = (("t1", a1.shape[0]), ("t2", a2.shape[0]), ("s1", ws.shape[0]), ("s2", ws.shape[1]))
        return cls(JointPmf(axes, t))

    @classmethod
    def degenerate(cls, src: SourcePair):
        """Single-point T1, T2 (no first-layer source coding)."""
        q = src.q
        return cls.from_conditionals(src, np.ones((1, q)), np.ones((1, q)))

    @classmethod
    def identity(cls, src: SourcePair):
        """T1 = S1, T2 = S2 (full first-layer reconstruction)."""
        q = src.q
        return cls.from_conditionals(src, np.eye(q), np.eye(q))


@dataclass(frozen=True)
class LayeredChannelTest:
    """Product-form pmf over (U1,V1,X1) x (U2,V2,X2), V axes over F_q."""

    p1: JointPmf
    p2: JointPmf

    def __post_init__(self):
        if self.p1.names != ("u1", "v1", "x1") or self.p2.names != ("u2", "v2", "x2"):
            raise ValidationError("layered channel axes must be (u1,v1,x1) and (u2,v2,x2)")
        if self.p1.axes[1][1] != self.p2.axes[1][1]:
            raise ValidationError("V alphabets must have equal size")
        PrimeField(self.q)

    @property
    def q(self) -> int:
        return self.p1.axes[1][1]

    def joint(self) -> JointPmf:
        return self.p1.product(self.p2)

    @classmethod
    def from_test_channel(cls, tc: TestChannel):
        """Degenerate U layer on top of a plain test channel."""
        p1 = JointPmf((("u1", 1),) + tc.p1.axes, tc.p1.table[None, ...])
        p2 = JointPmf((("u2", 1),) + tc.p2.axes, tc.p2.table[None, ...])
        return cls(p1, p2)

    @classmethod
    def from_inputs(cls, q: int, px1: np.ndarray, px2: np.ndarray):
        """Degenerate V layer: U_j = X_j with the given input distributions."""
        px1 = np.asarray(px1, dtype=float)
        px2 = np.asarray(px2, dtype=float)

        def build(px, unames):
            nx = len(px)
            t = np.zeros((nx, q, nx))
            for x in range(nx):
                t[x, 0, x] = px[x]
            uax, vax, xax = unames
            return JointPmf(((uax, nx), (vax, q), (xax, nx)), t)

        return cls(build(px1, ("u1", "v1", "x1")), build(px2, ("u2", "v2", "x2")))


# ---------------------------------------------------------------------------
# Builtin worked examples
# ---------------------------------------------------------------------------


def _uniform_source(q: int, coeffs=(1, 1)) -> SourcePair:
    t = np.full((q, q), 1.0 / (q * q))
    return SourcePair(q, JointPmf((("s1", q), ("s2", q)), t), coeffs)


def _mac_from_w(q: int, y_size: int, row_of_w) -> Mac:
    """MAC whose output law depends on x1, x2 only through w = x1 + x2 mod q."""
    t = np.zeros((q, q, y_size))
    for x1 in range(q):
        for x2 in range(q):
            t[x1, x2] = row_of_w((x1 + x2) % q)
    w = ConditionalPmf((("x1", q), ("x2", q)), (("y", y_size),), t)
    return Mac(q, q, y_size, w)


def _diag_test_channel(q: int, x_size: int, support) -> TestChannel:
    """V uniform on `support`, X = V (supports must be channel-input symbols)."""
    p = np.zeros((q, x_size))
    for v in support:
        p[v, v] = 1.0 / len(support)
    return TestChannel(
        JointPmf((("v1", q), ("x1", x_size)), p),
        JointPmf((("v2", q), ("x2", x_size)), p),
    )


def _example_1():
    # Five-ary sources; Y = {0,2,4} indexed 0,1,2. Even sums pass through
    # noiselessly, odd sums scatter uniformly.
    src = _uniform_source(5)
    even_index = {0: 0, 2: 1, 4: 2}

    def row(w):
        if w in even_index:
            r = np.zeros(3)
            r[even_index[w]] = 1.0
            return r
        return np.full(3, 1.0 / 3.0)

    mac = _mac_from_w(5, 3, row)
    tc = _diag_test_channel(5, 5, (0, 2))
    return src, mac, tc


def _example_2():
    # Same geometry as example 1, but the even symbols are noisy (0.90/0.05).
    src = _uniform_source(5)
    even_index = {0: 0, 2: 1, 4: 2}

    def row(w):
        if w in even_index:
            r = np.full(3, 0.05)
            r[even_index[w]] = 0.90
            return r
        return np.full(3, 1.0 / 3.0)

    mac = _mac_from_w(5, 3, row)
    tc = _diag_test_channel(5, 5, (0, 2))
    return src, mac, tc


def _example_3():
    # Ternary sources, target S1 + 2*S2; Y is the inequality indicator of the
    # inputs passed through a BSC(0.1).
    src = _uniform_source(3, coeffs=(1, 2))
    t = np.zeros((3, 3, 2))
    for x1 in range(3):
        for x2 in range(3):
            w = 0 if x1 == x2 else 1
            t[x1, x2, w] = 0.9
            t[x1, x2, 1 - w] = 0.1
    mac = Mac(3, 3, 2, ConditionalPmf((("x1", 3), ("x2", 3)), (("y", 2),), t))
    tc = _diag_test_channel(3, 3, (0, 1, 2))
    return src, mac, tc


def _example_4():
    # Binary MAC that is deliberately not additive: the two equal-input rows
    # differ, so no function of x1 + x2 reproduces the table.
    src = _uniform_source(2)
    t = np.zeros((2, 2, 2))
    t[0, 0] = (0.8, 0.2)
    t[1, 1] = (0.9, 0.1)
    t[0, 1] = (0.1, 0.9)
    t[1, 0] = (0.1, 0.9)
    mac = Mac(2, 2, 2, ConditionalPmf((("x1", 2), ("x2", 2)), (("y", 2),), t))
    tc = _diag_test_channel(2, 2, (0, 1))
    return src, mac, tc


_BUILTINS = {1: _example_1, 2: _example_2, 3: _example_3, 4: _example_4}


def builtin_example(example_id: int):
    """Source pair, MAC and test channel for worked examples 1..4."""
    try:
        builder = _BUILTINS[example_id]
    except (KeyError, TypeError):
        raise ArgumentError(f"unknown builtin example {example_id!r}; valid ids are 1..4")
    return builder()


# ---------------------------------------------------------------------------
# Simulation presets (not part of the published examples)
# ---------------------------------------------------------------------------


def adder_mac(q: int = 2, flip: float = 0.0) -> Mac:
    """Additive MAC Y = X1 + X2 (mod q), optionally through a symmetric
    q-ary error channel with total flip probability `flip`."""
    def row(w):
        r = np.full(q, flip / (q - 1) if q > 1 else 0.0)
        r[w] = 1.0 - flip
        return r

    return _mac_from_w(q, q, row)


def integer_adder_mac(q: int = 2) -> Mac:
    """Noiseless real-sum MAC Y = X1 + X2 with 2q-1 output symbols."""
    y_size = 2 * q - 1
    t = np.zeros((q, q, y_size))
    for x1 in range(q):
        for x2 in range(q):
            t[x1, x2, x1 + x2] = 1.0
    return Mac(q, q, y_size, ConditionalPmf((("x1", q), ("x2", q)), (("y", y_size),), t))


def uniform_test_channel(q: int) -> TestChannel:
    return _diag_test_channel(q, q, tuple(range(q)))


PRESETS = {
    "adder": lambda: (_uniform_source(2), adder_mac(2, 0.0), uniform_test_channel(2)),
    "bsc01-adder": lambda: (_uniform_source(2), adder_mac(2, 0.1), uniform_test_channel(2)),
}


def preset_instance(name: str):
    try:
        return PRESETS[name]()
    except KeyError:
        raise ArgumentError(f"unknown preset {name!r}; valid presets: {sorted(PRESETS)}")


# ---------------------------------------------------------------------------
# Text interchange format
# ---------------------------------------------------------------------------
#
# Sections: [source] (q, coeffs, q x q joint rows), [mac] (x1_size, x2_size,
# y_size, one row per (x1,x2) pair in lexicographic order), optional
# [test_channel] (p1_row / p2_row tables over (v, x)). '#' starts a comment.
# Numbers are decimal or exact fractions a/b.


def _format_number(x: float) -> str:
    return f"{x:.17g}"


def save_instance(src: SourcePair, mac: Mac, tc: TestChannel | None = None) -> str:
    out = io.StringIO()
    out.write("[source]\n")
    out.write(f"q = {src.q}\n")
    out.write(f"coeffs = {src.coeffs[0]} {src.coeffs[1]}\n")
    for row in src.joint.table:
        out.write("row = " + " ".join(_format_number(x) for x in row) + "\n")
    out.write("[mac]\n")
    out.write(f"x1_size = {mac.x1_size}\n")
    out.write(f"x2_size = {mac.x2_size}\n")
    out.write(f"y_size = {mac.y_size}\n")
    for x1 in range(mac.x1_size):
        for x2 in range(mac.x2_size):
            out.write("row = " + " ".join(_format_number(x) for x in mac.table[x1, x2]) + "\n")
    if tc is not None:
        out.write("[test_channel]\n")
        for row in tc.p1.table:
            out.write("p1_row = " + " ".join(_format_number(x) for x in row) + "\n")
        for row in tc.p2.table:
            out.write("p2_row = " + " ".join(_format_number(x) for x in row) + "\n")
    return out.getvalue()


def _parse_value(token: str, lineno: int, col: int) -> float:
    if "/" in token:
        num, _, den = token.partition("/")
        try:
            return int(num) / int(den)
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad fraction {token!r}", lineno, col)
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"bad number {token!r}", lineno, col)


_SECTION_KEYS = {
    "source": {"q", "coeffs", "row"},
    "mac": {"x1_size", "x2_size", "y_size", "row"},
    "test_channel": {"p1_row", "p2_row"},
}


def load_instance(text: str):
    """Parse the instance format; returns (SourcePair, Mac, TestChannel | None)."""
    section = None
    data: dict[str, dict] = {"source": {"rows": []}, "mac": {"rows": []},
                             "test_channel": {"p1": [], "p2": []}}
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            name = line.strip("[]").strip()
            if name not in _SECTION_KEYS:
                raise ParseError(f"unknown section [{name}]", lineno)
            section = name
            seen.add(name)
            continue
        if section is None:
            raise ParseError("content before any section header", lineno)
        if "=" not in line:
            raise ParseError("expected 'key = values'", lineno)
        key, _, rest = line.partition("=")
        key = key.strip()
        tokens = rest.split()
        if key not in _SECTION_KEYS[section]:
            col = raw.index(key) + 1
            raise ParseError(f"unknown key {key!r} in section [{section}]", lineno, col)
        values = [_parse_value(t, lineno, raw.index(t) + 1) for t in tokens]
        sec = data[section]
        if key == "row":
            sec["rows"].append((values, lineno))
        elif key == "p1_row":
            sec["p1"].append((values, lineno))
        elif key == "p2_row":
            sec["p2"].append((values, lineno))
        else:
            if len(values) != (2 if key == "coeffs" else 1):
                raise ParseError(f"key {key!r} expects {'two values' if key=='coeffs' else 'one value'}", lineno)
            sec[key] = [int(v) for v in values]
    for required in ("source", "mac"):
        if required not in seen:
            raise ParseError(f"missing [{required}] section", len(text.splitlines()) + 1)

    src_sec = data["source"]
    if "q" not in src_sec:
        raise ParseError("missing q in [source]", 1)
    q = src_sec["q"][0]
    coeffs = tuple(src_sec.get("coeffs", [1, 1]))
    rows = src_sec["rows"]
    if len(rows) != q:
        raise ValidationError(f"[source] needs {q} rows, found {len(rows)}")
    table = np.array([r for r, _ in rows], dtype=float)
    if table.shape != (q, q):
        raise ValidationError(f"[source] rows must each have {q} entries")
    try:
        src = SourcePair(q, JointPmf((("s1", q), ("s2", q)), table), coeffs)
    except ValidationError as e:
        raise ValidationError(f"[source]: {e}") from None

    mac_sec = data["mac"]
    for key in ("x1_size", "x2_size", "y_size"):
        if key not in mac_sec:
            raise ParseError(f"missing {key} in [mac]", 1)
    nx1, nx2, ny = (mac_sec[k][0] for k in ("x1_size", "x2_size", "y_size"))
    mrows = mac_sec["rows"]
    if len(mrows) != nx1 * nx2:
        raise ValidationError(f"[mac] needs {nx1 * nx2} rows, found {len(mrows)}")
    wt = np.zeros((nx1, nx2, ny))
    for i, (vals, lineno) in enumerate(mrows):
        if len(vals) != ny:
            raise ValidationError(f"[mac] row at line {lineno} has {len(vals)} entries, expected {ny}")
        if abs(sum(vals) - 1.0) > SUM_TOL:
            raise ValidationError(
                f"[mac] row at line {lineno} (x1={i // nx2}, x2={i % nx2}) sums to {sum(vals)!r}"
            )
        wt[i // nx2, i % nx2] = vals
    mac = Mac(nx1, nx2, ny, ConditionalPmf((("x1", nx1), ("x2", nx2)), (("y", ny),), wt))

    tc = None
    if "test_channel" in seen:
        tsec = data["test_channel"]
        p1 = np.array([r for r, _ in tsec["p1"]], dtype=float)
        p2 = np.array([r for r, _ in tsec["p2"]], dtype=float)
        if p1.shape != (q, nx1) or p2.shape != (q, nx2):
            raise ValidationError(
                f"[test_channel] tables must be {q}x{nx1} and {q}x{nx2}, got {p1.shape} and {p2.shape}"
            )
        try:
            tc = TestChannel(
                JointPmf((("v1", q), ("x1", nx1)), p1),
                JointPmf((("v2", q), ("x2", nx2)), p2),
            )
        except ValidationError as e:
            raise ValidationError(f"[test_channel]: {e}") from None
    return src, mac, tc
