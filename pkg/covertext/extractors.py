"""
Randomness extractors: the greater-than same-source extractor, a seeded
polynomial hash over GF(2^64), and an inner-product two-source extractor over
small binary fields.

>>> from .core import BitStr
>>> gt(BitStr.FromInt(5, 3), BitStr.FromInt(3, 3))
1
>>> seed = HashSeed(A=1, B=0x0123456789abcdef)
>>> extSeeded(seed, BitStr.FromInt(0, 64), 8).ToInt() == 0xef
True
"""

import functools
import hashlib
import typing

from . import core
from . import errors

BitStr = core.BitStr

# x^64 + x^4 + x^3 + x + 1
GF64_POLY = (1 << 64) | 0b11011
GF64_MASK = (1 << 64) - 1

# Irreducible polynomials for the small fields used by the inner-product extractor.
SMALL_FIELD_POLYS: typing.Dict[int, int] = {
	2: 0b111,
	4: 0b10011,
	8: 0x11b,
	16: 0x1002b,
	32: (1 << 32) | 0b10001101,
}

MAX_V = 32
SEED_BITS = 128

def gt(x: BitStr, y: BitStr) -> int:
	"""
	The greater-than extractor: 1 iff x >= y as big-endian integers.

	>>> gt(BitStr.FromInt(5, 3), BitStr.FromInt(3, 3))
	1
	>>> x = BitStr.FromInt(6, 3)
	>>> gt(x, x)
	1
	>>> gt(BitStr.FromInt(2, 3), BitStr.FromInt(7, 3))
	0

	Over all 16 pairs of 2-bit strings, GT=1 exactly 10 times:

	>>> sum(gt(BitStr.FromInt(a, 2), BitStr.FromInt(b, 2)) for a in range(4) for b in range(4))
	10
	"""
	return 1 if core.bitstrCmp(x, y) is not core.Ordering.LESS else 0

#### carry-less arithmetic ####
def xmul(a: int, b: int) -> int:
	"""Carry-less product of two polynomials over GF(2)."""
	x = 0
	while a:
		if a & 1:
			x ^= b
		a >>= 1
		b <<= 1
	return x

def xmod(a: int, p: int) -> int:
	"""Carry-less remainder of a modulo p."""
	plen = p.bit_length()
	while a.bit_length() >= plen:
		a ^= p << (a.bit_length() - plen)
	return a

def reduce64(r: int) -> int:
	# x^64 == x^4 + x^3 + x + 1; two folds clear a 128-bit product
	hi = r >> 64
	r = (r & GF64_MASK) ^ hi ^ (hi << 1) ^ (hi << 3) ^ (hi << 4)
	hi = r >> 64
	return (r & GF64_MASK) ^ hi ^ (hi << 1) ^ (hi << 3) ^ (hi << 4)

def gfMulNaive(a: int, b: int) -> int:
	"""
	Slow bit-by-bit reference multiplier in GF(2^64).

	>>> gfMulNaive(1 << 63, 2) == 0b11011
	True
	"""
	return xmod(xmul(a, b), GF64_POLY)

def gfMulInt(a: int, b: int) -> int:
	"""
	Multiplies two GF(2^64) elements given as 64-bit words, 4 bits of a at a time.
	"""
	if not a or not b:
		return 0
	window = [0] * 16
	for i in range(1, 16):
		window[i] = window[i & (i - 1)] ^ (b << ((i & -i).bit_length() - 1))
	acc = 0
	for shift in range(60, -4, -4):
		acc = (acc << 4) ^ window[(a >> shift) & 0xf]
	return reduce64(acc)

class Gf64():
	"""
	An element of GF(2^64) = GF(2)[x] / (x^64 + x^4 + x^3 + x + 1).

	>>> X = Gf64(Value=2)
	>>> X * X
	Gf64(0x4)
	>>> a = Gf64(Value=0xdeadbeefcafef00d)
	>>> a * Gf64(Value=1) == a
	True
	>>> a + a
	Gf64(0x0)
	"""
	__slots__ = ("Value",)

	def __init__(self, Value: int = 0):
		if Value < 0 or Value > GF64_MASK:
			raise errors.newError(errors.BadLength, f"{Value:#x} is not a 64-bit word")
		self.Value = Value

	def __mul__(self, other: 'Gf64') -> 'Gf64':
		return gfMul(self, other)

	def __add__(self, other: 'Gf64') -> 'Gf64':
		return Gf64(Value=self.Value ^ other.Value)

	def __eq__(self, other) -> bool:
		return isinstance(other, Gf64) and self.Value == other.Value

	def __hash__(self) -> int:
		return hash(self.Value)

	def __repr__(self) -> str:
		return f"Gf64({self.Value:#x})"

def gfMul(a: Gf64, b: Gf64) -> Gf64:
	"""
	Carry-less product reduced modulo the pentanomial.

	>>> gfMul(Gf64(Value=0x1234), Gf64(Value=1))
	Gf64(0x1234)
	>>> gfMul(Gf64(Value=2), Gf64(Value=2))
	Gf64(0x4)
	>>> gfMul(Gf64(Value=1 << 63), Gf64(Value=2)) == Gf64(Value=0b11011)
	True
	>>> import random
	>>> rng = random.Random(64)
	>>> pairs = [(rng.getrandbits(64), rng.getrandbits(64)) for _ in range(300)]
	>>> all(gfMul(Gf64(Value=a), Gf64(Value=b)).Value == gfMulNaive(a, b) for a, b in pairs)
	True
	"""
	return Gf64(Value=gfMulInt(a.Value, b.Value))

#### seeded extractor ####
class HashSeed():
	"""
	Seed of the polynomial hash h(x) = b + sum x_i * a^i. A is never zero.

	>>> HashSeed(A=0, B=1)
	Traceback (most recent call last):
	...
	covertext.errors.InvalidParams: hash seed with a = 0 collapses the hash
	>>> import random
	>>> HashSeed.Random(random.Random(1)).A != 0
	True
	"""
	__slots__ = ("A", "B", "_table")

	def __init__(self, A: int = 1, B: int = 0):
		if not A:
			raise errors.newError(errors.InvalidParams, "hash seed with a = 0 collapses the hash")
		self.A = A & GF64_MASK
		self.B = B & GF64_MASK
		self._table = None

	@classmethod
	def Random(cls, rng) -> 'HashSeed':
		a = 0
		while not a:
			a = rng.getrandbits(64)
		return cls(A=a, B=rng.getrandbits(64))

	def mulA(self, x: int) -> int:
		if self._table is None:
			self._table = buildMulTable(self.A)
		acc = 0
		table = self._table
		k = 0
		while x:
			acc ^= table[k][x & 0xf]
			x >>= 4
			k += 1
		return acc

	def ToBits(self) -> BitStr:
		return BitStr.FromInt(self.A, 64) + BitStr.FromInt(self.B, 64)

	def __eq__(self, other) -> bool:
		return isinstance(other, HashSeed) and (self.A, self.B) == (other.A, other.B)

	def __hash__(self) -> int:
		return hash((self.A, self.B))

	def __repr__(self) -> str:
		return f"HashSeed(a={self.A:#018x}, b={self.B:#018x})"

def buildMulTable(a: int) -> typing.List[typing.List[int]]:
	# powers[i] = a * x^i, then 4-bit windows over them
	powers = [a]
	for _ in range(63):
		p = powers[-1] << 1
		if p >> 64:
			p = (p & GF64_MASK) ^ 0b11011
		powers.append(p)
	table = []
	for k in range(16):
		row = [0] * 16
		for nib in range(1, 16):
			low = nib & -nib
			row[nib] = row[nib ^ low] ^ powers[4 * k + low.bit_length() - 1]
		table.append(row)
	return table

def checkV(v: int) -> None:
	if v < 1 or v > MAX_V:
		raise errors.newError(errors.BadV, f"v must be in [1, {MAX_V}], got {v}")

def hashBlocks(seed: HashSeed, x: BitStr) -> int:
	acc = 0
	for block in reversed(x.Chunks(64)):
		acc = seed.mulA(acc ^ block.ToInt())
	return acc ^ seed.B

def extSeeded(seed: HashSeed, x: BitStr, v: int) -> BitStr:
	"""
	Strong seeded extractor: the low v bits of b + sum_{i=1..t} x_i * a^i over
	GF(2^64), where x_1..x_t are the 64-bit blocks of x (last one zero-padded).

	>>> s = HashSeed(A=0x9e3779b97f4a7c15, B=0xf0f0f0f0f0f0f0f3)
	>>> extSeeded(s, BitStr.Zeros(1024), 4).ToInt() == 0x3
	True
	>>> x = BitStr.FromInt(0x1122334455667788, 64)
	>>> extSeeded(HashSeed(A=1, B=0xff), x, 32).ToInt() == (0x55667788 ^ 0xff)
	True
	>>> extSeeded(s, x, 33)
	Traceback (most recent call last):
	...
	covertext.errors.BadV: v must be in [1, 32], got 33
	>>> x2 = BitStr.FromInt(0xabc, 12) + BitStr.Random(__import__("random").Random(3), 200)
	>>> extSeeded(s, x2, 8) == extSeeded(s, x2, 8)
	True

	The table multiplier agrees with the naive one through Horner's rule:

	>>> blocks = [0x1122334455667788, 0x99aabbccddeeff00]
	>>> want = gfMulNaive(blocks[0], s.A) ^ gfMulNaive(blocks[1], gfMulNaive(s.A, s.A)) ^ s.B
	>>> extSeeded(s, BitStr.FromInt(blocks[0], 64) + BitStr.FromInt(blocks[1], 64), 32).ToInt() == want & 0xffffffff
	True
	"""
	checkV(v)
	if not x.LenBits:
		raise errors.newError(errors.BadLength, "cannot extract from an empty string")
	return BitStr.FromInt(hashBlocks(seed, x) & ((1 << v) - 1), v)

def seedFromBits(bits: BitStr) -> HashSeed:
	"""
	Reinterprets 128 shared bits as a hash seed: a is the first 64 bits, b the
	last 64. A zero a is replaced by 1.

	>>> seedFromBits(BitStr.Zeros(128))
	HashSeed(a=0x0000000000000001, b=0x0000000000000000)
	>>> s = seedFromBits(BitStr.FromInt(2 ** 128 - 1, 128))
	>>> s.A == s.B == 2 ** 64 - 1
	True
	>>> seedFromBits(BitStr.Zeros(130))
	Traceback (most recent call last):
	...
	covertext.errors.BadLength: seed needs exactly 128 bits, got 130
	"""
	if bits.LenBits != SEED_BITS:
		raise errors.newError(errors.BadLength, f"seed needs exactly {SEED_BITS} bits, got {bits.LenBits}")
	a = bits.Slice(0, 64).ToInt()
	b = bits.Slice(64, 128).ToInt()
	return HashSeed(A=a or 1, B=b)

def expandSeedBits(bits: BitStr) -> BitStr:
	"""
	Stretches a short shared seed to 128 bits with SHAKE-256; 128-bit seeds pass
	through untouched.

	>>> x = BitStr.Random(__import__("random").Random(1), 128)
	>>> expandSeedBits(x) == x
	True
	>>> expandSeedBits(BitStr.FromInt(0b10110001, 8)).LenBits
	128
	>>> expandSeedBits(BitStr.FromInt(1, 8)) == expandSeedBits(BitStr.FromInt(1, 9))
	False
	"""
	if bits.LenBits == SEED_BITS:
		return bits
	if bits.LenBits <= 0 or bits.LenBits > SEED_BITS:
		raise errors.newError(errors.BadLength, f"cannot expand a {bits.LenBits}-bit seed")
	return BitStr.FromBytes(hashlib.shake_256(bits.Hex().encode()).digest(SEED_BITS // 8))

#### inner-product two-source extractor ####
@functools.lru_cache(maxsize=None)
def smallFieldTable(v: int) -> typing.Optional[typing.Tuple[typing.Tuple[int, ...], ...]]:
	if v > 8:
		return None
	poly = SMALL_FIELD_POLYS[v]
	size = 1 << v
	return tuple(tuple(xmod(xmul(a, b), poly) for b in range(size)) for a in range(size))

def fieldMul(a: int, b: int, v: int) -> int:
	"""
	Product in GF(2^v) for the supported small widths.

	>>> fieldMul(0x53, 0xca, 8)
	1
	>>> fieldMul(3, 3, 2)
	2
	"""
	table = smallFieldTable(v)
	if table is not None:
		return table[a][b]
	return xmod(xmul(a, b), SMALL_FIELD_POLYS[v])

def ip2Ext(x: BitStr, y: BitStr, v: int) -> BitStr:
	"""
	Inner product of x and y seen as vectors over GF(2^v).

	>>> ip2Ext(BitStr.FromInt(0b1011, 4), BitStr.Zeros(4), 4).ToInt()
	0
	>>> ip2Ext(BitStr.FromInt(0b1011, 4), BitStr.FromInt(1, 4), 4).ToInt()
	11
	>>> ip2Ext(BitStr.FromInt(0b0110, 4), BitStr.FromInt(0b1011, 4), 2).ToInt() == fieldMul(1, 2, 2) ^ fieldMul(2, 3, 2)
	True
	>>> ip2Ext(BitStr.Zeros(4), BitStr.Zeros(6), 2)
	Traceback (most recent call last):
	...
	covertext.errors.LengthMismatch: sources have 4 and 6 bits
	>>> ip2Ext(BitStr.Zeros(6), BitStr.Zeros(6), 4)
	Traceback (most recent call last):
	...
	covertext.errors.LengthMismatch: source length 6 is not a multiple of v=4
	>>> ip2Ext(BitStr.Zeros(6), BitStr.Zeros(6), 3)
	Traceback (most recent call last):
	...
	covertext.errors.BadV: no field table for v=3; supported: [2, 4, 8, 16, 32]
	"""
	if v not in SMALL_FIELD_POLYS:
		raise errors.newError(errors.BadV, f"no field table for v={v}; supported: {sorted(SMALL_FIELD_POLYS)}")
	if x.LenBits != y.LenBits:
		raise errors.newError(errors.LengthMismatch, f"sources have {x.LenBits} and {y.LenBits} bits")
	if x.LenBits % v:
		raise errors.newError(errors.LengthMismatch, f"source length {x.LenBits} is not a multiple of v={v}")
	acc = 0
	for xi, yi in zip(x.Chunks(v), y.Chunks(v)):
		a, b = xi.ToInt(), yi.ToInt()
		if a and b:
			acc ^= fieldMul(a, b, v)
	return BitStr.FromInt(acc, v)
