"""
Shared domain types: bit strings, security parameters, parameter profiles and
transcript frames.

>>> x = BitStr.FromInt(5, 3)
>>> x
BitStr(3:a0)
>>> x.ToInt()
5
>>> bitstrCmp(BitStr.FromInt(5, 3), BitStr.FromInt(3, 3))
<Ordering.GREATER: 1>
>>> resolveProfile("tiny").NCt
8
"""

import enum
import functools
import typing

from . import errors

class Ordering(enum.Enum):
	LESS = -1
	EQUAL = 0
	GREATER = 1

class Party(enum.Enum):
	P0 = 0
	P1 = 1

	@property
	def Peer(self) -> 'Party':
		return Party.P1 if self is Party.P0 else Party.P0

	def __str__(self) -> str:
		return self.name

class Phase(enum.Enum):
	SEED = "SeedPhase"
	KEX = "KexPhase"
	COMM = "CommPhase"
	IDLE = "Idle"

	def __str__(self) -> str:
		return self.value

@functools.total_ordering
class BitStr():
	"""
	A fixed-length bit string, most significant bit first, packed into bytes with
	zeroed trailing bits.

	>>> BitStr.FromBits([1, 0, 1, 1]).Payload
	b'\\xb0'
	>>> BitStr.FromHex("12:abc0").ToInt() == 0xabc
	True
	>>> BitStr.FromInt(0xabc, 12).Hex()
	'12:abc0'
	>>> BitStr(LenBits=4, Payload=b'\\xb1')
	Traceback (most recent call last):
	...
	covertext.errors.BadLength: trailing bits of the last byte must be zero
	>>> BitStr.FromInt(0b1011, 4).Slice(1, 3).Bits()
	[0, 1]
	>>> (BitStr.FromInt(1, 2) + BitStr.FromInt(2, 2)).Bits()
	[0, 1, 1, 0]
	>>> BitStr.FromInt(0b1100, 4).Xor(BitStr.FromInt(0b1010, 4)).ToInt()
	6
	>>> [b.ToInt() for b in BitStr.FromInt(0b110110, 6).Chunks(4)]
	[13, 8]
	>>> len(BitStr())
	0
	"""
	__slots__ = ("LenBits", "Payload", "_value")

	def __init__(self, LenBits: int = 0, Payload: bytes = b""):
		if LenBits < 0:
			raise errors.newError(errors.BadLength, f"negative bit length {LenBits}")
		if len(Payload) != (LenBits + 7) // 8:
			raise errors.newError(errors.BadLength, f"{len(Payload)} payload bytes cannot hold exactly {LenBits} bits")
		value = int.from_bytes(Payload, "big")
		slack = 8 * len(Payload) - LenBits
		if value & ((1 << slack) - 1):
			raise errors.newError(errors.BadLength, "trailing bits of the last byte must be zero")
		object.__setattr__(self, "LenBits", LenBits)
		object.__setattr__(self, "Payload", bytes(Payload))
		object.__setattr__(self, "_value", value >> slack)

	def __setattr__(self, name, value):
		raise AttributeError("BitStr is immutable")

	@classmethod
	def FromInt(cls, value: int, lenBits: int) -> 'BitStr':
		if value < 0 or value >> lenBits:
			raise errors.newError(errors.BadLength, f"{value} does not fit in {lenBits} bits")
		nbytes = (lenBits + 7) // 8
		return cls(LenBits=lenBits, Payload=(value << (8 * nbytes - lenBits)).to_bytes(nbytes, "big"))

	@classmethod
	def FromBits(cls, bits: typing.Iterable[int]) -> 'BitStr':
		value, n = 0, 0
		for b in bits:
			value = (value << 1) | (1 if b else 0)
			n += 1
		return cls.FromInt(value, n)

	@classmethod
	def FromBytes(cls, data: bytes) -> 'BitStr':
		return cls(LenBits=8 * len(data), Payload=data)

	@classmethod
	def FromHex(cls, text: str) -> 'BitStr':
		"""
		Parses the `len:hex` log form. A bare hex string is taken as whole bytes.

		>>> BitStr.FromHex("ff").LenBits
		8
		"""
		text = text.strip()
		if ":" in text:
			length, hexPart = text.split(":", 1)
			return cls(LenBits=int(length), Payload=bytes.fromhex(hexPart))
		return cls.FromBytes(bytes.fromhex(text))

	@classmethod
	def Random(cls, rng, lenBits: int) -> 'BitStr':
		return cls.FromInt(rng.getrandbits(lenBits) if lenBits else 0, lenBits)

	@classmethod
	def Zeros(cls, lenBits: int) -> 'BitStr':
		return cls.FromInt(0, lenBits)

	def ToInt(self) -> int:
		return self._value

	def Hex(self) -> str:
		return f"{self.LenBits}:{self.Payload.hex()}"

	def Bit(self, i: int) -> int:
		if i < 0 or i >= self.LenBits:
			raise IndexError(f"bit {i} out of range for {self.LenBits}-bit string")
		return (self._value >> (self.LenBits - 1 - i)) & 1

	def Bits(self) -> typing.List[int]:
		return [self.Bit(i) for i in range(self.LenBits)]

	def Slice(self, start: int, stop: int) -> 'BitStr':
		start, stop = max(0, start), min(self.LenBits, stop)
		if stop <= start:
			return BitStr()
		width = stop - start
		return BitStr.FromInt((self._value >> (self.LenBits - stop)) & ((1 << width) - 1), width)

	def PadTo(self, lenBits: int) -> 'BitStr':
		"""Appends zero bits on the right up to lenBits."""
		if lenBits < self.LenBits:
			raise errors.newError(errors.BadLength, f"cannot pad {self.LenBits} bits down to {lenBits}")
		return BitStr.FromInt(self._value << (lenBits - self.LenBits), lenBits)

	def Chunks(self, size: int) -> typing.List['BitStr']:
		"""Splits into size-bit blocks; the last block is zero-padded on the right."""
		if size <= 0:
			raise errors.newError(errors.BadLength, f"chunk size must be positive, got {size}")
		return [self.Slice(i, i + size).PadTo(size) for i in range(0, self.LenBits, size)]

	def Xor(self, other: 'BitStr') -> 'BitStr':
		if other.LenBits != self.LenBits:
			raise errors.newError(errors.LengthMismatch, f"cannot xor {self.LenBits} and {other.LenBits} bits")
		return BitStr.FromInt(self._value ^ other._value, self.LenBits)

	def __add__(self, other: 'BitStr') -> 'BitStr':
		return BitStr.FromInt((self._value << other.LenBits) | other._value, self.LenBits + other.LenBits)

	def __len__(self) -> int:
		return self.LenBits

	def __eq__(self, other) -> bool:
		if not isinstance(other, BitStr):
			return NotImplemented
		return self.LenBits == other.LenBits and self._value == other._value

	def __lt__(self, other: 'BitStr') -> bool:
		return bitstrCmp(self, other) is Ordering.LESS

	def __hash__(self) -> int:
		return hash((self.LenBits, self._value))

	def __repr__(self) -> str:
		return f"BitStr({self.Hex()})"

def concat(parts: typing.Iterable[BitStr]) -> BitStr:
	value, n = 0, 0
	for p in parts:
		value = (value << p.LenBits) | p.ToInt()
		n += p.LenBits
	return BitStr.FromInt(value, n)

def bitstrCmp(x: BitStr, y: BitStr) -> Ordering:
	"""
	Compares two equal-length bit strings as big-endian unsigned integers.

	>>> bitstrCmp(BitStr.FromInt(0b101, 3), BitStr.FromInt(0b011, 3))
	<Ordering.GREATER: 1>
	>>> x = BitStr.FromInt(9, 4)
	>>> bitstrCmp(x, x)
	<Ordering.EQUAL: 0>
	>>> bitstrCmp(BitStr.FromInt(0, 4), BitStr.FromInt(1, 4))
	<Ordering.LESS: -1>
	>>> bitstrCmp(BitStr.FromInt(0, 4), BitStr.FromInt(0, 5))
	Traceback (most recent call last):
	...
	covertext.errors.LengthMismatch: cannot compare 4-bit and 5-bit strings

	Exhaustive consistency with integer order for every pair of 6-bit strings:

	>>> all((bitstrCmp(BitStr.FromInt(a, 6), BitStr.FromInt(b, 6)).value == (a > b) - (a < b))
	...     for a in range(64) for b in range(64))
	True
	"""
	if x.LenBits != y.LenBits:
		raise errors.newError(errors.LengthMismatch, f"cannot compare {x.LenBits}-bit and {y.LenBits}-bit strings")
	a, b = x.ToInt(), y.ToInt()
	if a > b:
		return Ordering.GREATER
	if a < b:
		return Ordering.LESS
	return Ordering.EQUAL

class SecurityParams(typing.NamedTuple):
	"""
	Concrete lengths of one protocol instance.

	Kappa: hidden message bits per communication window; NCt: ciphertext bits;
	V: extractor output bits per ciphertext; D: seed bits; EllKex: key-exchange
	message bits; XiSke: secret-key ciphertext bits; MaxAttempts: rejection
	sampling budget per ciphertext.
	"""
	Kappa: int
	NCt: int
	V: int
	D: int
	EllKex: int
	XiSke: int
	MaxAttempts: int

	@property
	def KexBlocks(self) -> int:
		return self.EllKex // self.V

	@property
	def CommBlocks(self) -> int:
		return self.XiSke // self.V

	@property
	def NonceBits(self) -> int:
		return self.XiSke - self.Kappa

	@property
	def SetupRounds(self) -> int:
		return self.D + self.KexBlocks

	def Validate(self) -> 'SecurityParams':
		"""
		>>> SecurityParams(8, 8, 2, 8, 16, 16, 3).Validate()
		Traceback (most recent call last):
		...
		covertext.errors.InvalidParams: max_attempts=3 is below 2^v=4
		"""
		problems = []
		if self.V < 1 or self.V > 32:
			problems.append(f"v={self.V} must be in [1, 32]")
		if self.D <= 0 or self.D % 2:
			problems.append(f"d={self.D} must be a positive multiple of 2")
		if self.D > 128:
			problems.append(f"d={self.D} exceeds the 128-bit hash seed")
		if self.V >= 1 and self.EllKex % self.V:
			problems.append(f"ell_kex={self.EllKex} is not a multiple of v={self.V}")
		if self.V >= 1 and self.XiSke % self.V:
			problems.append(f"xi_ske={self.XiSke} is not a multiple of v={self.V}")
		if self.XiSke <= self.Kappa:
			problems.append(f"xi_ske={self.XiSke} leaves no room for a nonce after kappa={self.Kappa}")
		if 1 <= self.V <= 32 and self.MaxAttempts < 2 ** self.V:
			problems.append(f"max_attempts={self.MaxAttempts} is below 2^v={2 ** self.V}")
		if problems:
			raise errors.newError(errors.InvalidParams, "; ".join(problems))
		return self

class ProfileName(enum.Enum):
	DESK = "desk"
	TINY = "tiny"
	BENCH = "bench"

class ParamProfile(typing.NamedTuple):
	Name: ProfileName
	Resolved: SecurityParams

def budgetFor(v: int) -> int:
	# per-block failure probability (1 - 2^-v)^(64 * 2^v) <= e^-64
	return 64 * 2 ** v

DESK = SecurityParams(Kappa=128, NCt=1024, V=4, D=128, EllKex=512, XiSke=256, MaxAttempts=budgetFor(4))

profiles: typing.Dict[ProfileName, SecurityParams] = {
	ProfileName.DESK: DESK,
	ProfileName.TINY: SecurityParams(Kappa=8, NCt=8, V=2, D=8, EllKex=16, XiSke=16, MaxAttempts=64),
	ProfileName.BENCH: DESK._replace(V=8, MaxAttempts=budgetFor(8)),
}

def resolveProfile(name) -> SecurityParams:
	"""
	Resolves a profile name to its security parameters.

	>>> p = resolveProfile("desk")
	>>> (p.V, p.MaxAttempts, p.KexBlocks)
	(4, 1024, 128)
	>>> resolveProfile(ProfileName.TINY)
	SecurityParams(Kappa=8, NCt=8, V=2, D=8, EllKex=16, XiSke=16, MaxAttempts=64)
	>>> resolveProfile("bench")[:4]
	(128, 1024, 8, 128)
	>>> resolveProfile("huge")
	Traceback (most recent call last):
	...
	covertext.errors.UnknownProfile: unknown profile: huge
	"""
	try:
		key = name if isinstance(name, ProfileName) else ProfileName(str(name).lower())
	except ValueError:
		raise errors.newError(errors.UnknownProfile, f"unknown profile: {name}") from None
	return profiles[key].Validate()

def profile(name) -> ParamProfile:
	"""
	>>> p = profile("TINY")
	>>> p.Name, p.Resolved.MaxAttempts
	(<ProfileName.TINY: 'tiny'>, 64)
	"""
	params = resolveProfile(name)
	key = name if isinstance(name, ProfileName) else ProfileName(str(name).lower())
	return ParamProfile(Name=key, Resolved=params)

class TranscriptFrame(typing.NamedTuple):
	Party: Party
	Round: int
	Phase: Phase
	Ciphertext: BitStr

	def __repr__(self) -> str:
		return f"TranscriptFrame({self.Party} r{self.Round} {self.Phase} {self.Ciphertext.Hex()})"

def checkTranscript(frames: typing.Sequence[TranscriptFrame]) -> None:
	"""
	Checks that (party, round) pairs are unique and rounds are contiguous from 1.

	>>> c = BitStr.FromInt(0, 8)
	>>> checkTranscript([TranscriptFrame(Party.P0, 1, Phase.SEED, c), TranscriptFrame(Party.P1, 1, Phase.SEED, c)])
	>>> checkTranscript([TranscriptFrame(Party.P0, 2, Phase.SEED, c)])
	Traceback (most recent call last):
	...
	covertext.errors.ProtocolDesync: rounds of P0 are not contiguous from 1: [2]
	"""
	seen = set()
	rounds = {Party.P0: [], Party.P1: []}
	for f in frames:
		if (f.Party, f.Round) in seen:
			raise errors.newError(errors.ProtocolDesync, f"duplicate frame for {f.Party} round {f.Round}")
		seen.add((f.Party, f.Round))
		rounds[f.Party].append(f.Round)
	for party, rs in rounds.items():
		if sorted(rs) != list(range(1, len(rs) + 1)):
			raise errors.newError(errors.ProtocolDesync, f"rounds of {party} are not contiguous from 1: {sorted(rs)}")
