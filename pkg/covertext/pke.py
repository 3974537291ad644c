"""
The mandated public-key encryption scheme E and its instantiations.

Every scheme is perfectly correct:

>>> import random
>>> rng = random.Random(0)
>>> s = tinyScheme()
>>> keys = s.Gen(rng)
>>> all(s.Dec(keys.Sk, s.Enc(keys.Pk, core.BitStr.FromInt(m, 2), rng)).ToInt() == m for m in range(4))
True
"""

import functools
import hashlib
import logging
import math
import os
import typing

from Crypto.Util import number

from . import core
from . import errors

BitStr = core.BitStr

log = logging.getLogger(__name__)

class KeyPair(typing.NamedTuple):
	Pk: BitStr
	Sk: BitStr

class Scheme():
	"""
	A public-key encryption scheme: Gen, Enc and Dec over fixed-width bit strings.
	Enumerable schemes also expose the exact ciphertext pmf of each message.
	"""
	def __init__(self, *args, Id: str = "", CtBits: int = 0, MsgBits: int = 0, Enumerable: bool = False, **kwargs):
		super().__init__(*args, **kwargs)
		self.Id = Id
		self.CtBits = CtBits
		self.MsgBits = MsgBits
		self.Enumerable = Enumerable

	def Gen(self, rng) -> KeyPair:
		raise NotImplementedError

	def Enc(self, pk: BitStr, m: BitStr, rng) -> BitStr:
		raise NotImplementedError

	def Dec(self, sk: BitStr, c: BitStr) -> BitStr:
		raise NotImplementedError

	def Support(self, pk: BitStr, m: BitStr) -> typing.Dict[BitStr, float]:
		"""Exact distribution of Enc(pk, m); only for enumerable schemes."""
		raise NotImplementedError(f"scheme {self.Id} is not enumerable")

	def Messages(self) -> typing.Iterator[BitStr]:
		for m in range(2 ** self.MsgBits):
			yield BitStr.FromInt(m, self.MsgBits)

	def checkMessage(self, m: BitStr):
		if m.LenBits > self.MsgBits:
			raise errors.newError(errors.MessageTooLong, f"{self.Id} encrypts {self.MsgBits}-bit messages, got {m.LenBits} bits")

	def __repr__(self) -> str:
		return f"Scheme({self.Id}, n_ct={self.CtBits}, msg_bits={self.MsgBits})"

#### groups ####
class GroupParams(typing.NamedTuple):
	P: int
	Q: int
	G: int
	Ell: int

	def Validate(self) -> 'GroupParams':
		"""
		>>> TINY_GROUP.Validate().Ell
		5
		>>> GroupParams(P=29, Q=14, G=2, Ell=5).Validate()
		Traceback (most recent call last):
		...
		covertext.errors.InvalidParams: q=14 is not prime; p=29 is not 3 mod 4; g=2 does not have order q
		"""
		p, q, g, ell = self
		problems = []
		if not number.isPrime(p):
			problems.append(f"p={p} is not prime")
		if not number.isPrime(q):
			problems.append(f"q={q} is not prime")
		if p != 2 * q + 1:
			problems.append("p != 2q + 1")
		if p % 4 != 3:
			problems.append(f"p={p} is not 3 mod 4")
		if g in (0, 1) or pow(g, q, p) != 1:
			problems.append(f"g={g} does not have order q")
		if p.bit_length() != ell:
			problems.append(f"p has {p.bit_length()} bits, not ell={ell}")
		# encoding slack is only meaningful for real sizes
		if ell >= 64 and 2 ** ell - p > 2 ** (ell - 40):
			problems.append("2^ell - p exceeds 2^(ell-40)")
		if problems:
			raise errors.newError(errors.InvalidParams, "; ".join(problems))
		return self

	def Encode(self, value: int) -> BitStr:
		return BitStr.FromInt(value, self.Ell)

TINY_GROUP = GroupParams(P=23, Q=11, G=2, Ell=5)

SIEVE_PRIMES = [p for p in range(5, 2000) if number.isPrime(p)]

@functools.lru_cache(maxsize=None)
def safePrimeGroup(ell: int) -> GroupParams:
	"""
	The largest safe prime p < 2^ell with p = 7 (mod 8), with generator g = 2 of
	its order-q subgroup. Deterministic, so both parties and every rerun agree.

	>>> g = safePrimeGroup(16)
	>>> g.P == 2 * g.Q + 1 and g.P % 8 == 7 and g.Ell == 16
	True
	>>> pow(2, g.Q, g.P)
	1
	"""
	if ell < 8:
		raise errors.newError(errors.InvalidParams, f"no safe-prime search below 8 bits, got ell={ell}")
	# q = 11 (mod 12) makes p = 23 (mod 24): p = 7 (mod 8) and 3 does not divide p
	q = (2 ** (ell - 1) - 1) - ((2 ** (ell - 1) - 1 - 11) % 12)
	tried = 0
	while q > 2 ** (ell - 2):
		tried += 1
		p = 2 * q + 1
		if all(q % r and p % r for r in SIEVE_PRIMES if r < q) and number.isPrime(q) and number.isPrime(p):
			log.debug("safe prime for ell=%d found after %d candidates: 2^ell - p = %d", ell, tried, 2 ** ell - p)
			return GroupParams(P=p, Q=q, G=2, Ell=ell).Validate()
		q -= 12
	raise errors.newError(errors.InvalidParams, f"no safe prime of {ell} bits")

def checkWitness(group: GroupParams, a: int):
	"""
	Pocklington's criterion for p = 2q + 1 with q prime: p is prime when
	a^(p-1) = 1 and gcd(a^2 - 1, p) = 1.

	>>> checkWitness(TINY_GROUP, 3)
	>>> checkWitness(GroupParams(P=35, Q=17, G=2, Ell=6), 3)
	Traceback (most recent call last):
	...
	covertext.errors.InvalidParams: witness 3 does not certify p=35
	"""
	p = group.P
	if pow(a, p - 1, p) != 1 or math.gcd(a * a - 1, p) != 1:
		raise errors.newError(errors.InvalidParams, f"witness {a} does not certify p={p}")

def readGroup(path: str) -> GroupParams:
	"""
	Reads a `p=...\\nq=...\\ng=...` group file (decimal or 0x hex) and validates
	it. An optional `witness=a` line is checked as a primality certificate for p.

	>>> g = readGroup(DESK_GROUP_PATH)
	>>> number.isPrime(g.P), number.isPrime(g.Q), g.P % 8, g.Ell, g.G
	(True, True, 7, 512, 2)
	>>> 2 ** 512 - g.P
	235937
	"""
	values = {}
	try:
		with open(path) as f:
			for line in f:
				line = line.strip()
				if not line or line.startswith("#"):
					continue
				key, _, val = line.partition("=")
				values[key.strip()] = int(val.strip(), 0)
	except OSError as e:
		raise errors.newError(errors.ConfigError, f"cannot read group file {path}: {e.strerror}") from None
	except ValueError:
		raise errors.newError(errors.ConfigError, f"group file {path} holds a value that is not an integer") from None
	try:
		p, q, g = values["p"], values["q"], values["g"]
	except KeyError as e:
		raise errors.newError(errors.ConfigError, f"group file {path} lacks {e}") from None
	group = GroupParams(P=p, Q=q, G=g, Ell=p.bit_length()).Validate()
	if "witness" in values:
		checkWitness(group, values["witness"])
	return group

DESK_GROUP_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data", "desk.grp")
DESK_GROUP_BITS = 512

@functools.lru_cache(maxsize=None)
def deskGroup() -> GroupParams:
	return readGroup(DESK_GROUP_PATH)

def standardGroup(ell: int) -> GroupParams:
	"""
	The group both parties use for ell-bit elements: the committed Desk group at
	512 bits, the descending search otherwise.

	>>> standardGroup(512) is deskGroup()
	True
	>>> standardGroup(16) == safePrimeGroup(16)
	True
	"""
	if ell == DESK_GROUP_BITS:
		return deskGroup()
	return safePrimeGroup(ell)

#### sign-randomized ElGamal ####
def defaultMsgBits(group: GroupParams) -> int:
	limit = group.Ell // 2 - 1
	return limit - limit % 8 if limit >= 8 else limit

def elgGen(params: GroupParams, rng) -> KeyPair:
	"""
	sk = x uniform in [1, q-1], pk = g^x mod p.

	>>> import random
	>>> k = elgGen(TINY_GROUP, random.Random(0))
	>>> pow(TINY_GROUP.G, k.Sk.ToInt(), TINY_GROUP.P) == k.Pk.ToInt()
	True
	>>> 1 <= k.Sk.ToInt() <= TINY_GROUP.Q - 1
	True
	"""
	x = rng.randint(1, params.Q - 1)
	return KeyPair(Pk=params.Encode(pow(params.G, x, params.P)), Sk=params.Encode(x))

def encodeMessage(params: GroupParams, m: BitStr) -> int:
	return pow(m.ToInt() + 1, 2, params.P)

def elgEnc(params: GroupParams, pk: BitStr, m: BitStr, rng, msgBits: typing.Optional[int] = None) -> BitStr:
	"""
	Encrypts m as ((-1)^b1 g^r, (-1)^b2 (m+1)^2 pk^r) mod p, two ell-bit halves.

	>>> import random
	>>> rng = random.Random(5)
	>>> k = elgGen(TINY_GROUP, rng)
	>>> c = elgEnc(TINY_GROUP, k.Pk, BitStr.FromInt(1, 1), rng)
	>>> c.LenBits
	10
	>>> elgDec(TINY_GROUP, k.Sk, c).ToInt()
	1
	>>> elgEnc(TINY_GROUP, k.Pk, BitStr.FromInt(1, 2), rng)
	Traceback (most recent call last):
	...
	covertext.errors.MessageTooLong: message of 2 bits exceeds 1 bits for a 5-bit group
	"""
	width = defaultMsgBits(params) if msgBits is None else msgBits
	if m.LenBits > width:
		raise errors.newError(errors.MessageTooLong, f"message of {m.LenBits} bits exceeds {width} bits for a {params.Ell}-bit group")
	p = params.P
	r = rng.randint(1, params.Q - 1)
	c1 = pow(params.G, r, p)
	c2 = encodeMessage(params, m) * pow(pk.ToInt(), r, p) % p
	if rng.getrandbits(1):
		c1 = p - c1
	if rng.getrandbits(1):
		c2 = p - c2
	return params.Encode(c1) + params.Encode(c2)

def elgDec(params: GroupParams, sk: BitStr, c: BitStr, msgBits: typing.Optional[int] = None) -> BitStr:
	"""
	Squares away both signs, divides out g^(2rx) and takes the quadratic-residue
	square root twice to undo the (m+1)^2 encoding.

	>>> import random
	>>> rng = random.Random(9)
	>>> k = elgGen(TINY_GROUP, rng)
	>>> c = elgEnc(TINY_GROUP, k.Pk, BitStr.FromInt(0, 1), rng)
	>>> elgDec(TINY_GROUP, k.Sk, c).ToInt()
	0
	>>> elgDec(TINY_GROUP, k.Sk, BitStr.Zeros(10))
	Traceback (most recent call last):
	...
	covertext.errors.DecodeFailure: ciphertext component outside Z_p*
	"""
	width = defaultMsgBits(params) if msgBits is None else msgBits
	p, ell = params.P, params.Ell
	if c.LenBits != 2 * ell:
		raise errors.newError(errors.DecodeFailure, f"expected {2 * ell}-bit ciphertext, got {c.LenBits}")
	c1, c2 = c.Slice(0, ell).ToInt(), c.Slice(ell, 2 * ell).ToInt()
	if not (0 < c1 < p and 0 < c2 < p):
		raise errors.newError(errors.DecodeFailure, "ciphertext component outside Z_p*")
	s = pow(c1, 2 * sk.ToInt(), p)
	mhatSq = c2 * c2 * pow(s, -1, p) % p
	e = (p + 1) // 4
	root = pow(pow(mhatSq, e, p), e, p)
	m = min(root, p - root) - 1
	if m < 0 or m >> width:
		raise errors.newError(errors.DecodeFailure, "recovered residue is not an encoded message")
	return BitStr.FromInt(m, width)

class ElGamal(Scheme):
	"""
	Sign-randomized ElGamal over a safe-prime group. Both ciphertext halves are
	uniform over Z_p*, so their squares are always quadratic residues:

	>>> import random
	>>> rng = random.Random(2)
	>>> s = ElGamal(Group=TINY_GROUP)
	>>> k = s.Gen(rng)
	>>> c = s.Enc(k.Pk, BitStr.FromInt(1, 1), rng)
	>>> c1, c2 = c.Slice(0, 5).ToInt(), c.Slice(5, 10).ToInt()
	>>> pow(c1 * c1, 11, 23) == pow(c2 * c2, 11, 23) == 1
	True
	>>> all(s.Dec(k.Sk, c) == m for m in s.Messages() for c in s.Support(k.Pk, m))
	True
	>>> len(s.Support(k.Pk, BitStr.FromInt(0, 1)))
	40
	"""
	def __init__(self, *args, Group: GroupParams = TINY_GROUP, MsgBits: typing.Optional[int] = None, **kwargs):
		width = defaultMsgBits(Group) if MsgBits is None else MsgBits
		if width > Group.Ell // 2 - 1 or width < 1:
			raise errors.newError(errors.InvalidParams, f"msg_bits={width} must be in [1, {Group.Ell // 2 - 1}]")
		super().__init__(*args, Id=f"elg{Group.Ell}", CtBits=2 * Group.Ell, MsgBits=width, Enumerable=Group.Ell <= 8, **kwargs)
		self.Group = Group

	def Gen(self, rng) -> KeyPair:
		return elgGen(self.Group, rng)

	def Enc(self, pk: BitStr, m: BitStr, rng) -> BitStr:
		return elgEnc(self.Group, pk, m, rng, self.MsgBits)

	def Dec(self, sk: BitStr, c: BitStr) -> BitStr:
		return elgDec(self.Group, sk, c, self.MsgBits)

	def Support(self, pk: BitStr, m: BitStr) -> typing.Dict[BitStr, float]:
		if not self.Enumerable:
			return super().Support(pk, m)
		self.checkMessage(m)
		p, g = self.Group.P, self.Group.G
		weight = 1.0 / (4 * (self.Group.Q - 1))
		pmf: typing.Dict[BitStr, float] = {}
		for r in range(1, self.Group.Q):
			base1 = pow(g, r, p)
			base2 = encodeMessage(self.Group, m) * pow(pk.ToInt(), r, p) % p
			for c1 in (base1, p - base1):
				for c2 in (base2, p - base2):
					c = self.Group.Encode(c1) + self.Group.Encode(c2)
					pmf[c] = pmf.get(c, 0.0) + weight
		return pmf

#### test-only schemes ####
class LowEntropy(Scheme):
	"""
	enc(pk, m) = m || nonce || pad with a k-bit uniform nonce and a pad that is a
	keyed hash of the rest: every message has exactly 2^k equiprobable ciphertexts.
	Not semantically secure.
	"""
	def __init__(self, *args, K: int = 0, MsgBits: int = 8, CtBits: typing.Optional[int] = None, **kwargs):
		ct = MsgBits + K + 16 if CtBits is None else CtBits
		if K < 0 or K > ct - MsgBits:
			raise errors.newError(errors.BadK, f"k={K} must be in [0, {ct - MsgBits}]")
		super().__init__(*args, Id=f"lowent{K}", CtBits=ct, MsgBits=MsgBits, Enumerable=K <= 16, **kwargs)
		self.K = K

	def Gen(self, rng) -> KeyPair:
		key = BitStr.Random(rng, 128)
		return KeyPair(Pk=key, Sk=key)

	def pad(self, pk: BitStr, head: BitStr) -> BitStr:
		padBits = self.CtBits - head.LenBits
		if not padBits:
			return BitStr()
		digest = hashlib.shake_256(pk.Payload + head.Hex().encode()).digest((padBits + 7) // 8)
		return BitStr.FromBytes(digest).Slice(0, padBits)

	def Enc(self, pk: BitStr, m: BitStr, rng) -> BitStr:
		self.checkMessage(m)
		head = m.PadTo(self.MsgBits) + BitStr.Random(rng, self.K)
		return head + self.pad(pk, head)

	def Dec(self, sk: BitStr, c: BitStr) -> BitStr:
		if c.LenBits != self.CtBits:
			raise errors.newError(errors.DecodeFailure, f"expected {self.CtBits}-bit ciphertext, got {c.LenBits}")
		return c.Slice(0, self.MsgBits)

	def Support(self, pk: BitStr, m: BitStr) -> typing.Dict[BitStr, float]:
		if not self.Enumerable:
			return super().Support(pk, m)
		self.checkMessage(m)
		weight = 2.0 ** -self.K
		pmf = {}
		for nonce in range(2 ** self.K):
			head = m.PadTo(self.MsgBits) + BitStr.FromInt(nonce, self.K)
			pmf[head + self.pad(pk, head)] = weight
		return pmf

def lowentScheme(k: int, msgBits: int = 8, ctBits: typing.Optional[int] = None) -> Scheme:
	"""
	A scheme whose ciphertexts have min-entropy exactly k.

	>>> import random
	>>> s = lowentScheme(3)
	>>> k = s.Gen(random.Random(1))
	>>> pmf = s.Support(k.Pk, BitStr.FromInt(7, 8))
	>>> (len(pmf), set(pmf.values()))
	(8, {0.125})
	>>> lowentScheme(30, msgBits=8, ctBits=32)
	Traceback (most recent call last):
	...
	covertext.errors.BadK: k=30 must be in [0, 24]
	"""
	return LowEntropy(K=k, MsgBits=msgBits, CtBits=ctBits)

class Tiny(Scheme):
	"""
	2-bit messages, 8-bit ciphertexts: enc(pk, m) is uniform over the 64 strings c
	with c mod 4 == m XOR offset, where the offset is the key.
	"""
	def __init__(self, *args, **kwargs):
		super().__init__(*args, Id="tiny", CtBits=8, MsgBits=2, Enumerable=True, **kwargs)

	def Gen(self, rng) -> KeyPair:
		offset = BitStr.Random(rng, 2)
		return KeyPair(Pk=offset, Sk=offset)

	def Enc(self, pk: BitStr, m: BitStr, rng) -> BitStr:
		self.checkMessage(m)
		return BitStr.FromInt((rng.getrandbits(6) << 2) | (m.ToInt() ^ pk.ToInt()), 8)

	def Dec(self, sk: BitStr, c: BitStr) -> BitStr:
		if c.LenBits != 8:
			raise errors.newError(errors.DecodeFailure, f"expected 8-bit ciphertext, got {c.LenBits}")
		return BitStr.FromInt((c.ToInt() & 3) ^ sk.ToInt(), 2)

	def Support(self, pk: BitStr, m: BitStr) -> typing.Dict[BitStr, float]:
		self.checkMessage(m)
		low = m.ToInt() ^ pk.ToInt()
		return {BitStr.FromInt((j << 2) | low, 8): 1.0 / 64 for j in range(64)}

def tinyScheme() -> Scheme:
	"""
	>>> s = tinyScheme()
	>>> pk = BitStr.FromInt(2, 2)
	>>> pmf = s.Support(pk, BitStr.FromInt(1, 2))
	>>> len(pmf), all(c.ToInt() % 4 == 3 for c in pmf)
	(64, True)
	"""
	return Tiny()

#### the biasing adversary ####
def lsbDecoder(c: BitStr) -> int:
	"""A locally decodable strawman: the hidden bit is the last ciphertext bit."""
	return c.ToInt() & 1 if c.LenBits else 0

class Biasing(Scheme):
	"""
	E': re-encrypts with the base scheme up to t more times until f(c) = 1 and
	returns the first hit, or the last sample. Decryption is the base scheme's.
	"""
	def __init__(self, *args, Base: Scheme = None, F: typing.Callable[[BitStr], int] = lsbDecoder, T: int = 1, **kwargs):
		if T < 1:
			raise errors.newError(errors.InvalidParams, f"t must be at least 1, got {T}")
		super().__init__(*args, Id=f"biased({Base.Id},t={T})", CtBits=Base.CtBits, MsgBits=Base.MsgBits, Enumerable=Base.Enumerable, **kwargs)
		self.Base = Base
		self.F = F
		self.T = T

	def Gen(self, rng) -> KeyPair:
		return self.Base.Gen(rng)

	def Enc(self, pk: BitStr, m: BitStr, rng) -> BitStr:
		c = self.Base.Enc(pk, m, rng)
		for _ in range(self.T):
			if self.F(c) == 1:
				return c
			c = self.Base.Enc(pk, m, rng)
		return c

	def Dec(self, sk: BitStr, c: BitStr) -> BitStr:
		return self.Base.Dec(sk, c)

	def Support(self, pk: BitStr, m: BitStr) -> typing.Dict[BitStr, float]:
		base = self.Base.Support(pk, m)
		hit = sum(p for c, p in base.items() if self.F(c) == 1)
		miss = 1.0 - hit
		draws = self.T + 1
		pmf = {}
		for c, p in base.items():
			if self.F(c) == 1:
				# geometric sum over the attempt that first hits
				pmf[c] = p * sum(miss ** i for i in range(draws))
			else:
				pmf[c] = p * miss ** (draws - 1)
		return pmf

def biasingWrap(base: Scheme, f: typing.Callable[[BitStr], int] = lsbDecoder, t: int = 1) -> Scheme:
	"""
	Biases the decoder f toward 1 without touching decryptability.

	With t=1 the hit probability is 1 - (1-p)^2 for a base hit probability p:

	>>> import random
	>>> s = biasingWrap(tinyScheme(), lambda c: 1 if c.ToInt() >= 192 else 0, t=1)
	>>> k = s.Gen(random.Random(3))
	>>> pmf = s.Support(k.Pk, BitStr.FromInt(0, 2))
	>>> round(sum(p for c, p in pmf.items() if c.ToInt() >= 192), 10)
	0.4375
	>>> set(pmf) == set(tinyScheme().Support(k.Pk, BitStr.FromInt(0, 2)))
	True
	"""
	return Biasing(Base=base, F=f, T=t)

#### registry and key files ####
def makeScheme(schemeId: str, params: core.SecurityParams, group: typing.Optional[GroupParams] = None) -> Scheme:
	"""
	Builds a scheme by id and checks its ciphertext width against the profile.

	>>> makeScheme("tiny", core.resolveProfile("tiny")).CtBits
	8
	>>> makeScheme("lowent:4", core.resolveProfile("tiny")).MsgBits
	4
	>>> makeScheme("elg", core.resolveProfile("tiny"))
	Traceback (most recent call last):
	...
	covertext.errors.InvalidParams: scheme elg5 has 10-bit ciphertexts but the profile wants n_ct=8
	"""
	kind, _, arg = schemeId.partition(":")
	if kind == "tiny":
		scheme = tinyScheme()
	elif kind == "elg":
		if group is None:
			group = standardGroup(params.NCt // 2) if params.NCt // 2 >= 8 else TINY_GROUP
		scheme = ElGamal(Group=group)
	elif kind == "lowent":
		k = int(arg or 8)
		if k >= params.NCt:
			raise errors.newError(errors.BadK, f"k={k} leaves no message bits in {params.NCt}-bit ciphertexts")
		scheme = lowentScheme(k, msgBits=min(8, params.NCt - k), ctBits=params.NCt)
	else:
		raise errors.newError(errors.ConfigError, f"unknown scheme: {schemeId}")
	if scheme.CtBits != params.NCt:
		raise errors.newError(errors.InvalidParams, f"scheme {scheme.Id} has {scheme.CtBits}-bit ciphertexts but the profile wants n_ct={params.NCt}")
	return scheme

def saveKeys(directory: str, schemeId: str, keys: KeyPair):
	os.makedirs(directory, exist_ok=True)
	for name, key in (("pk.hex", keys.Pk), ("sk.hex", keys.Sk)):
		with open(os.path.join(directory, name), "w") as f:
			f.write(f"scheme={schemeId}\n{key.Hex()}\n")
	log.info("wrote key pair for %s to %s", schemeId, directory)
