"""Phase-tracked Pauli strings and Clifford gates.

A Pauli is stored as bit masks over qubits (x, z) plus a 2-bit phase counting
powers of i relative to the Hermitian string, with Y = iXZ on any qubit where
both bits are set. Physically valid stabilizer generators carry phase 0 or 2.
"""

from __future__ import annotations

import numpy as np

WORD = 64

_PAULI_MATS = {
    (0, 0): np.eye(2, dtype=complex),
    (1, 0): np.array([[0, 1], [1, 0]], dtype=complex),
    (0, 1): np.array([[1, 0], [0, -1]], dtype=complex),
    (1, 1): np.array([[0, -1j], [1j, 0]], dtype=complex),
}

_PHASE_STR = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_CHAR_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_CHAR = {v: k for k, v in _CHAR_BITS.items()}


def n_words(n: int) -> int:
    return (n + WORD - 1) // WORD


def _popcount_words(a: np.ndarray) -> int:
    return int(np.bitwise_count(a).sum())


def unpack_bits(words: np.ndarray, n: int) -> np.ndarray:
    """First n bits of a little-endian uint64 mask as a uint8 array."""
    return np.unpackbits(words.view(np.uint8), bitorder="little")[:n]


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """uint8 bit array to little-endian uint64 mask words."""
    bits = np.asarray(bits, np.uint8)
    pad = (-bits.size) % WORD
    if pad:
        bits = np.concatenate([bits, np.zeros(pad, np.uint8)])
    return np.packbits(bits, bitorder="little").view(np.uint64).copy()


class PauliOperator:
    """n-qubit Pauli with bit masks and an i^phase prefactor."""

    __slots__ = ("n", "x", "z", "phase")

    def __init__(self, n: int, x: np.ndarray | None = None,
                 z: np.ndarray | None = None, phase: int = 0):
        self.n = n
        nw = n_words(n)
        self.x = np.zeros(nw, np.uint64) if x is None else np.asarray(x, np.uint64)
        self.z = np.zeros(nw, np.uint64) if z is None else np.asarray(z, np.uint64)
        self.phase = phase & 3

    # -- constructors -------------------------------------------------------
    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(n)

    @classmethod
    def single(cls, n: int, qubit: int, kind: str, sign: int = 0) -> "PauliOperator":
        op = cls(n)
        bx, bz = _CHAR_BITS[kind.upper()]
        if bx:
            op.set_x(qubit, 1)
        if bz:
            op.set_z(qubit, 1)
        op.phase = (2 * sign) & 3
        return op

    @classmethod
    def from_string(cls, s: str) -> "PauliOperator":
        s = s.strip()
        phase = 0
        for pre, ph in (("-i", 3), ("+i", 1), ("i", 1), ("-", 2), ("+", 0)):
            if s.startswith(pre):
                phase = ph
                s = s[len(pre):]
                break
        op = cls(len(s), phase=phase)
        for q, ch in enumerate(s):
            bx, bz = _CHAR_BITS[ch.upper()]
            if bx:
                op.set_x(q, 1)
            if bz:
                op.set_z(q, 1)
        return op

    # -- bit access ---------------------------------------------------------
    def get_x(self, q: int) -> int:
        return int((self.x[q // WORD] >> np.uint64(q % WORD)) & np.uint64(1))

    def get_z(self, q: int) -> int:
        return int((self.z[q // WORD] >> np.uint64(q % WORD)) & np.uint64(1))

    def set_x(self, q: int, v: int) -> None:
        m = np.uint64(1) << np.uint64(q % WORD)
        if v:
            self.x[q // WORD] |= m
        else:
            self.x[q // WORD] &= ~m

    def set_z(self, q: int, v: int) -> None:
        m = np.uint64(1) << np.uint64(q % WORD)
        if v:
            self.z[q // WORD] |= m
        else:
            self.z[q // WORD] &= ~m

    def x_bits(self) -> np.ndarray:
        return unpack_bits(self.x, self.n)

    def z_bits(self) -> np.ndarray:
        return unpack_bits(self.z, self.n)

    def support(self) -> list[int]:
        return list(np.nonzero(self.x_bits() | self.z_bits())[0])

    def is_identity(self) -> bool:
        return not self.x.any() and not self.z.any()

    def is_hermitian(self) -> bool:
        return self.phase in (0, 2)

    def copy(self) -> "PauliOperator":
        return PauliOperator(self.n, self.x.copy(), self.z.copy(), self.phase)

    # -- algebra ------------------------------------------------------------
    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        return pauli_product(self, other)

    def commutes_with(self, other: "PauliOperator") -> bool:
        return commutes(self, other)

    def __eq__(self, other) -> bool:
        return (isinstance(other, PauliOperator) and self.n == other.n
                and self.phase == other.phase
                and np.array_equal(self.x, other.x)
                and np.array_equal(self.z, other.z))

    def __hash__(self):
        return hash((self.n, self.phase, self.x.tobytes(), self.z.tobytes()))

    def __repr__(self) -> str:
        return f"PauliOperator({self.to_string()!r})"

    def to_string(self) -> str:
        body = "".join(_BITS_CHAR[(self.get_x(q), self.get_z(q))]
                       for q in range(self.n))
        return _PHASE_STR[self.phase] + body

    def to_matrix(self) -> np.ndarray:
        """Dense matrix; qubit 0 is the leftmost tensor factor."""
        m = np.array([[1]], dtype=complex)
        for q in range(self.n):
            m = np.kron(m, _PAULI_MATS[(self.get_x(q), self.get_z(q))])
        return (1j ** self.phase) * m


def pauli_product(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    """Phase-tracked product a*b."""
    if a.n != b.n:
        raise ValueError(f"width mismatch: {a.n} vs {b.n}")
    x = a.x ^ b.x
    z = a.z ^ b.z
    g = (_popcount_words(a.x & a.z) + _popcount_words(b.x & b.z)
         + 2 * _popcount_words(a.z & b.x) - _popcount_words(x & z))
    return PauliOperator(a.n, x, z, (a.phase + b.phase + g) & 3)


def commutes(a: PauliOperator, b: PauliOperator) -> bool:
    """Symplectic inner product: true iff a and b commute."""
    if a.n != b.n:
        raise ValueError(f"width mismatch: {a.n} vs {b.n}")
    s = _popcount_words(a.x & b.z) + _popcount_words(a.z & b.x)
    return s % 2 == 0


# ---------------------------------------------------------------------------
# Clifford gates

class CliffordGate:
    """Clifford gate given by the images of the single-qubit Paulis.

    images = [U X1 U^dag, U Z1 U^dag] for arity 1, plus [U X2 U^dag, U Z2 U^dag]
    for arity 2. Each image must be Hermitian (phase 0 or 2) and the set must
    preserve the commutation relations of its preimages.
    """

    __slots__ = ("arity", "images", "cls_index", "sign_bits")

    def __init__(self, images: list[PauliOperator],
                 cls_index: int | None = None, sign_bits: int | None = None):
        if len(images) not in (2, 4):
            raise ValueError("need images of X1,Z1[,X2,Z2]")
        self.arity = len(images) // 2
        self.images = [im.copy() for im in images]
        self.cls_index = cls_index
        self.sign_bits = sign_bits
        for im in self.images:
            if im.n != self.arity:
                raise ValueError("image width must equal gate arity")
            if not im.is_hermitian():
                raise ValueError("gate images must be Hermitian Paulis")
        basis = _basis_paulis(self.arity)
        for i in range(len(images)):
            for j in range(i + 1, len(images)):
                if commutes(basis[i], basis[j]) != commutes(self.images[i], self.images[j]):
                    raise ValueError("images violate the symplectic condition")

    # -- named gates --------------------------------------------------------
    @classmethod
    def h(cls) -> "CliffordGate":
        return cls([PauliOperator.from_string("Z"), PauliOperator.from_string("X")])

    @classmethod
    def s(cls) -> "CliffordGate":
        # phase gate: X -> Y, Z -> Z
        return cls([PauliOperator.from_string("Y"), PauliOperator.from_string("Z")])

    @classmethod
    def x(cls) -> "CliffordGate":
        return cls([PauliOperator.from_string("X"), PauliOperator.from_string("-Z")])

    @classmethod
    def z(cls) -> "CliffordGate":
        return cls([PauliOperator.from_string("-X"), PauliOperator.from_string("Z")])

    @classmethod
    def cnot(cls) -> "CliffordGate":
        return cls([PauliOperator.from_string(s) for s in ("XX", "ZI", "IX", "ZZ")])

    @classmethod
    def swap(cls) -> "CliffordGate":
        return cls([PauliOperator.from_string(s) for s in ("IX", "IZ", "XI", "ZI")])

    @classmethod
    def cz(cls) -> "CliffordGate":
        return cls([PauliOperator.from_string(s) for s in ("XZ", "ZI", "ZX", "IZ")])

    @classmethod
    def two_qubit_from_class(cls, cls_index: int, sign_bits: int) -> "CliffordGate":
        cols = symplectic_classes()[cls_index]
        images = []
        for i in range(4):
            v = int(cols[i])
            im = PauliOperator(2)
            for j in range(4):
                if (v >> j) & 1:
                    if j % 2 == 0:
                        im.set_x(j // 2, 1)
                    else:
                        im.set_z(j // 2, 1)
            im.phase = 2 * ((sign_bits >> i) & 1)
            images.append(im)
        return cls(images, cls_index=cls_index, sign_bits=sign_bits)

    def conjugation_table(self) -> tuple[np.ndarray, np.ndarray]:
        """Lookup table over input bit patterns idx = sum_i (x_i<<2i | z_i<<(2i+1)).

        Returns (out_mask, delta): new target bits and phase increment.
        """
        k = 2 * self.arity
        size = 1 << k
        out_mask = np.zeros(size, np.uint8)
        delta = np.zeros(size, np.uint8)
        for idx in range(size):
            acc = PauliOperator.identity(self.arity)
            y = 0
            for i in range(2 * self.arity):
                if (idx >> i) & 1:
                    acc = pauli_product(acc, self.images[i])
            for q in range(self.arity):
                if (idx >> (2 * q)) & 1 and (idx >> (2 * q + 1)) & 1:
                    y += 1
            m = 0
            for q in range(self.arity):
                if acc.get_x(q):
                    m |= 1 << (2 * q)
                if acc.get_z(q):
                    m |= 1 << (2 * q + 1)
            d = (y + acc.phase) & 3
            if d & 1:
                raise AssertionError("conjugation produced a non-Hermitian image")
            out_mask[idx] = m
            delta[idx] = d
        return out_mask, delta


def _basis_paulis(arity: int) -> list[PauliOperator]:
    out = []
    for q in range(arity):
        out.append(PauliOperator.single(arity, q, "X"))
        out.append(PauliOperator.single(arity, q, "Z"))
    return out


# ---------------------------------------------------------------------------
# The two-qubit Clifford group: 720 symplectic classes x 16 sign choices

_SYMPLECTIC = None
_CLASS_LOOKUP = None
_CLASS_TABLES = None
_MATRIX_CACHE = None

_POPC4 = np.array([bin(i).count("1") for i in range(16)], np.uint8)


def _pair_swap(v: np.ndarray | int):
    return ((v & 0b0101) << 1) | ((v & 0b1010) >> 1)


def symplectic_classes() -> np.ndarray:
    """All 720 elements of Sp(4,2), each as 4 image columns over (x1,z1,x2,z2).

    Row order is by ascending 16-bit encoding c0 | c1<<4 | c2<<8 | c3<<12,
    giving a stable class index.
    """
    global _SYMPLECTIC, _CLASS_LOOKUP
    if _SYMPLECTIC is not None:
        return _SYMPLECTIC
    codes = np.arange(1 << 16, dtype=np.int64)
    c = [(codes >> (4 * i)) & 15 for i in range(4)]

    def omega(u, v):
        return _POPC4[u & _pair_swap(v)] & 1

    ok = (omega(c[0], c[1]) == 1) & (omega(c[2], c[3]) == 1)
    for i, j in ((0, 2), (0, 3), (1, 2), (1, 3)):
        ok &= omega(c[i], c[j]) == 0
    sel = codes[ok]
    if sel.size != 720:
        raise AssertionError(f"Sp(4,2) enumeration found {sel.size} != 720")
    mats = np.empty((720, 4), np.uint8)
    for i in range(4):
        mats[:, i] = (sel >> (4 * i)) & 15
    _SYMPLECTIC = mats
    _CLASS_LOOKUP = {int(code): k for k, code in enumerate(sel)}
    return _SYMPLECTIC


def class_index_of(cols: tuple[int, int, int, int]) -> int:
    symplectic_classes()
    code = cols[0] | (cols[1] << 4) | (cols[2] << 8) | (cols[3] << 12)
    return _CLASS_LOOKUP[code]


def class_tables() -> tuple[np.ndarray, np.ndarray]:
    """Kernel tables: (symrows[720,4], danf[720]).

    symrows[cls, j] bit i: output plane j accumulates input plane i.
    danf[cls]: ANF (over monomials of the 4 input bits) of the high bit of the
    conjugation phase for the all-positive-sign representative.
    """
    global _CLASS_TABLES
    if _CLASS_TABLES is not None:
        return _CLASS_TABLES
    mats = symplectic_classes()
    symrows = np.zeros((720, 4), np.uint8)
    danf = np.zeros(720, np.uint16)
    for cls in range(720):
        cols = mats[cls]
        for j in range(4):
            r = 0
            for i in range(4):
                if (int(cols[i]) >> j) & 1:
                    r |= 1 << i
            symrows[cls, j] = r
        gate = CliffordGate.two_qubit_from_class(cls, 0)
        _, delta = gate.conjugation_table()
        f = (delta >> 1) & 1
        anf = f.astype(np.uint16).copy()
        for i in range(4):  # Moebius transform over the 4-cube
            step = 1 << i
            for m in range(16):
                if m & step:
                    anf[m] ^= anf[m ^ step]
        if anf[0]:
            raise AssertionError("constant term in conjugation phase ANF")
        code = 0
        for m in range(16):
            if anf[m]:
                code |= 1 << m
        danf[cls] = code
    _CLASS_TABLES = (symrows, danf)
    return _CLASS_TABLES


def random_two_qubit_clifford(rng: np.random.Generator) -> CliffordGate:
    """Uniform draw from the 11520 two-qubit Cliffords modulo global phase."""
    cls = int(rng.integers(0, 720))
    signs = int(rng.integers(0, 16))
    return CliffordGate.two_qubit_from_class(cls, signs)


def random_gate_draws(rng: np.random.Generator, shape) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (class, sign) draws for gate layers."""
    cls = rng.integers(0, 720, size=shape, dtype=np.int32)
    sgn = rng.integers(0, 16, size=shape, dtype=np.uint8)
    return cls, sgn


# ---------------------------------------------------------------------------
# Dense matrices for two-qubit Cliffords (oracle support)

def _gen_matrices():
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    s = np.array([[1, 0], [0, 1j]], dtype=complex)
    eye = np.eye(2, dtype=complex)
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0],
                     [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    # qubit 0 = leftmost factor; cnot above has control on qubit 0
    rev = np.array([[1, 0, 0, 0], [0, 0, 0, 1],
                    [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex)
    return [np.kron(h, eye), np.kron(eye, h),
            np.kron(s, eye), np.kron(eye, s), cnot, rev]


def _pauli16_matrices() -> list[np.ndarray]:
    out = []
    for idx in range(16):
        p = PauliOperator(2)
        for j in range(4):
            if (idx >> j) & 1:
                if j % 2 == 0:
                    p.set_x(j // 2, 1)
                else:
                    p.set_z(j // 2, 1)
        out.append(p.to_matrix())
    return out


def _matrix_table(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Conjugation table (out_mask, sign_bit) of a dense Clifford matrix."""
    pauli16 = _pauli16_matrices()
    out_mask = np.zeros(16, np.uint8)
    out_sign = np.zeros(16, np.uint8)
    for idx in range(16):
        m = u @ pauli16[idx] @ u.conj().T
        found = False
        for jdx in range(16):
            tr = np.trace(pauli16[jdx].conj().T @ m) / 4.0
            if abs(abs(tr) - 1.0) < 1e-9:
                if abs(tr.imag) > 1e-9:
                    raise AssertionError("non-Hermitian conjugation image")
                out_mask[idx] = jdx
                out_sign[idx] = 0 if tr.real > 0 else 1
                found = True
                break
        if not found:
            raise AssertionError("conjugation image is not a Pauli")
    return out_mask, out_sign


def two_qubit_clifford_matrix(cls_index: int, sign_bits: int) -> np.ndarray:
    """4x4 unitary (up to global phase) realizing the given class and signs.

    Built once by closing the group over {H, S, CNOT} products. The closure
    walks symplectic keys (image masks and signs of the four basis Paulis),
    so only one matrix product is spent per group element.
    """
    global _MATRIX_CACHE
    if _MATRIX_CACHE is None:
        gens = _gen_matrices()
        gen_tables = [_matrix_table(g) for g in gens]
        eye_key = ((1, 2, 4, 8), 0)
        cache = {}
        keyed = {eye_key: np.eye(4, dtype=complex)}
        frontier = [eye_key]
        while frontier:
            nxt = []
            for key in frontier:
                u = keyed[key]
                cols, signs = key
                for g, (gm, gs) in zip(gens, gen_tables):
                    ncols = tuple(int(gm[c]) for c in cols)
                    nsigns = 0
                    for i in range(4):
                        nsigns |= (((signs >> i) & 1) ^ int(gs[cols[i]])) << i
                    nkey = (ncols, nsigns)
                    if nkey not in keyed:
                        keyed[nkey] = g @ u
                        nxt.append(nkey)
            frontier = nxt
        if len(keyed) != 11520:
            raise AssertionError(f"Clifford closure found {len(keyed)} != 11520")
        for (cols, signs), u in keyed.items():
            cache[(class_index_of(cols), signs)] = u
        _MATRIX_CACHE = cache
    return _MATRIX_CACHE[(cls_index, sign_bits)]
