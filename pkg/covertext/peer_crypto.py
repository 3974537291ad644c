"""
The hidden-layer primitives: a key exchange whose messages look like uniform
bit strings, and a secret-key encryption scheme whose ciphertexts do too.

>>> import random
>>> from . import pke
>>> group = pke.safePrimeGroup(16)
>>> params = core.resolveProfile("tiny")
>>> s0, m0 = kexRound1(params, group, random.Random("a"))
>>> s1, m1 = kexRound1(params, group, random.Random("b"))
>>> k0, k1 = kexFinish(s0, m1), kexFinish(s1, m0)
>>> k0 == k1 and k0.Key.LenBits == 256
True
>>> key = skeGen(k0)
>>> c = skeEnc(key, core.BitStr.FromInt(0x5a, 8), random.Random(1), nonceBits=8)
>>> skeDec(key, c).ToInt() == 0x5a
True
"""

import hashlib
import logging
import typing

from Crypto.Cipher import ChaCha20

from . import core
from . import errors
from . import extractors
from . import pke

BitStr = core.BitStr

log = logging.getLogger(__name__)

KEY_BITS = 256
MAX_STREAM_BITS = 2 ** 20

def fixedSeed(label: str) -> extractors.HashSeed:
	digest = hashlib.sha256(f"covertext/kex/{label}".encode()).digest()
	a = int.from_bytes(digest[:8], "big") or 1
	return extractors.HashSeed(A=a, B=int.from_bytes(digest[8:16], "big"))

# public domain-separation seeds, one per 32-bit slice of the derived key
KEY_SEEDS = [fixedSeed(str(i)) for i in range(KEY_BITS // 32)]

class KexState(typing.NamedTuple):
	Exponent: int
	Sign: int
	Sent: BitStr
	Group: pke.GroupParams

class SharedKey(typing.NamedTuple):
	Key: BitStr
	Degenerate: bool = False

SkeKey = BitStr

class SkeCiphertext(typing.NamedTuple):
	Nonce: BitStr
	Body: BitStr

	def ToBits(self) -> BitStr:
		return self.Nonce + self.Body

	@classmethod
	def FromBits(cls, bits: BitStr, kappa: int) -> 'SkeCiphertext':
		if bits.LenBits <= kappa:
			raise errors.newError(errors.BadLength, f"{bits.LenBits}-bit SKE ciphertext cannot carry a {kappa}-bit body and a nonce")
		split = bits.LenBits - kappa
		return cls(Nonce=bits.Slice(0, split), Body=bits.Slice(split, bits.LenBits))

def fingerprint(key: BitStr) -> str:
	return hashlib.blake2b(key.Payload, digest_size=4).hexdigest()

def kexFromExponent(group: pke.GroupParams, exponent: int, sign: int) -> KexState:
	"""
	>>> kexFromExponent(pke.TINY_GROUP, 1, 0).Sent.ToInt()
	2
	>>> kexFromExponent(pke.TINY_GROUP, 1, 1).Sent.ToInt()
	21
	"""
	element = pow(group.G, exponent, group.P)
	if sign:
		element = group.P - element
	return KexState(Exponent=exponent, Sign=sign, Sent=group.Encode(element), Group=group)

def kexRound1(params: core.SecurityParams, group: pke.GroupParams, rng) -> typing.Tuple[KexState, BitStr]:
	"""
	Samples x and a sign bit and returns the state together with the outgoing
	message (-1)^b g^x mod p as an ell_kex-bit string.

	>>> import random
	>>> kexRound1(core.resolveProfile("desk"), pke.TINY_GROUP, random.Random(0))
	Traceback (most recent call last):
	...
	covertext.errors.InvalidParams: ell_kex=512 does not match the 5-bit key-exchange group
	"""
	if params.EllKex != group.Ell:
		raise errors.newError(errors.InvalidParams, f"ell_kex={params.EllKex} does not match the {group.Ell}-bit key-exchange group")
	state = kexFromExponent(group, rng.randint(1, group.Q - 1), rng.getrandbits(1))
	return state, state.Sent

def deriveKey(element: BitStr) -> BitStr:
	return core.concat(extractors.extSeeded(seed, element, 32) for seed in KEY_SEEDS)

def kexFinish(state: KexState, peerMsg: BitStr) -> SharedKey:
	"""
	Squares the peer's element to cancel its sign and raises it to our exponent,
	giving g^(2xx') on both sides, then hashes it down to a 256-bit key.

	Agreement over every exponent and sign of the tiny group:

	>>> g = pke.TINY_GROUP
	>>> states = [kexFromExponent(g, x, b) for x in range(1, g.Q) for b in (0, 1)]
	>>> all(kexFinish(a, b.Sent) == kexFinish(b, a.Sent) for a in states for b in states)
	True
	>>> kexFinish(states[0], g.Encode(1)).Degenerate
	True
	>>> kexFinish(states[0], g.Encode(23))
	Traceback (most recent call last):
	...
	covertext.errors.BadElement: peer key-exchange message 23 is not in Z_23*
	"""
	group = state.Group
	y = peerMsg.ToInt()
	if peerMsg.LenBits != group.Ell or y == 0 or y >= group.P:
		raise errors.newError(errors.BadElement, f"peer key-exchange message {y} is not in Z_{group.P}*")
	shared = pow(y * y % group.P, state.Exponent, group.P)
	degenerate = shared == 1
	if degenerate:
		log.warning("key exchange produced the identity element")
	key = deriveKey(group.Encode(shared))
	log.debug("derived shared key with fingerprint %s", fingerprint(key))
	return SharedKey(Key=key, Degenerate=degenerate)

def skeGen(coins: SharedKey) -> SkeKey:
	return coins.Key

def chachaNonce(nonce: BitStr) -> bytes:
	if nonce.LenBits == 96:
		return nonce.Payload
	return hashlib.blake2b(nonce.Hex().encode(), digest_size=12).digest()

def prfStream(key: BitStr, nonce: BitStr, lenBits: int) -> BitStr:
	"""
	ChaCha20 keystream with the block counter starting at 0. Nonces other than
	96 bits are compressed with BLAKE2b first.

	The second block reproduces the published block-function vector:

	>>> key = BitStr.FromBytes(bytes(range(32)))
	>>> nonce = BitStr.FromHex("000000090000004a00000000")
	>>> prfStream(key, nonce, 1024).Slice(512, 1024).Payload.hex()
	'10f1e7e4d13b5915500fdd1fa32071c4c7d1f4c733c068030422aa9ac3d46c4ed2826446079faa0914c2d705d98b02a2b5129cd1de164eb9cbd083e8a2503c4e'
	>>> prfStream(key, nonce, 0)
	BitStr(0:)
	>>> prfStream(key, nonce, 2 ** 21)
	Traceback (most recent call last):
	...
	covertext.errors.TooLong: keystream of 2097152 bits exceeds 2^20
	"""
	if lenBits > MAX_STREAM_BITS:
		raise errors.newError(errors.TooLong, f"keystream of {lenBits} bits exceeds 2^20")
	if key.LenBits != KEY_BITS:
		raise errors.newError(errors.BadLength, f"stream key must be {KEY_BITS} bits, got {key.LenBits}")
	if lenBits <= 0:
		return BitStr()
	cipher = ChaCha20.new(key=key.Payload, nonce=chachaNonce(nonce))
	stream = cipher.encrypt(bytes((lenBits + 7) // 8))
	return BitStr.FromBytes(stream).Slice(0, lenBits)

def skeEnc(key: SkeKey, msg: BitStr, rng, nonceBits: int = 128, kappa: typing.Optional[int] = None) -> SkeCiphertext:
	"""
	>>> import random
	>>> key = BitStr.Random(random.Random(0), 256)
	>>> rng = random.Random(1)
	>>> a = skeEnc(key, BitStr.Zeros(128), rng)
	>>> b = skeEnc(key, BitStr.Zeros(128), rng)
	>>> a.Nonce.LenBits, a.Body.LenBits, a != b
	(128, 128, True)
	>>> a.Body == prfStream(key, a.Nonce, 128)
	True
	>>> skeEnc(key, BitStr.Zeros(7), rng, kappa=8)
	Traceback (most recent call last):
	...
	covertext.errors.BadLength: SKE message must be 8 bits, got 7
	"""
	if kappa is not None and msg.LenBits != kappa:
		raise errors.newError(errors.BadLength, f"SKE message must be {kappa} bits, got {msg.LenBits}")
	nonce = BitStr.Random(rng, nonceBits)
	return SkeCiphertext(Nonce=nonce, Body=msg.Xor(prfStream(key, nonce, msg.LenBits)))

def skeDec(key: SkeKey, c: SkeCiphertext) -> BitStr:
	"""
	A wrong key decrypts to garbage rather than failing:

	>>> import random
	>>> rng = random.Random(4)
	>>> key, other = BitStr.Random(rng, 256), BitStr.Random(rng, 256)
	>>> msg = BitStr.Random(rng, 128)
	>>> c = skeEnc(key, msg, rng)
	>>> skeDec(key, c) == msg, skeDec(other, c) == msg
	(True, False)
	"""
	return c.Body.Xor(prfStream(key, c.Nonce, c.Body.LenBits))
