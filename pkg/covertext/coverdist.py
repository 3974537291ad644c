"""
The next-message oracle that produces the innocent plaintext conversation.

>>> import random
>>> d = uniformFlat(3, 8)
>>> sorted({nextMessage(d, [], random.Random(i)).ToInt() for i in range(200)})
[0, 1, 2, 3, 4, 5, 6, 7]
>>> minEntropyOf(d)
EntropyBound(Bits=3, Exact=True)
"""

import collections
import enum
import logging
import os
import re
import typing

from . import core
from . import errors

BitStr = core.BitStr

log = logging.getLogger(__name__)

DEFAULT_CORPUS = os.path.join(os.path.dirname(__file__), "data", "corpus.txt")

TOKEN_RE = re.compile(r"[a-z']+")

class CoverKind(enum.Enum):
	CONSTANT = "constant"
	UNIFORM = "uniform"
	NGRAM = "ngram"

class EntropyBound(typing.NamedTuple):
	Bits: float
	Exact: bool

class NgramModel():
	"""
	Bigram counts over a lowercased word corpus.

	>>> m = NgramModel.FromText("the cat sat on the mat")
	>>> sorted(m.Successors("the").items())
	[('cat', 1), ('mat', 1)]
	>>> m.Allows(["on", "the", "cat"]), m.Allows(["cat", "the"])
	(True, False)
	"""
	def __init__(self, *args, Bigrams: typing.Dict[str, collections.Counter] = None, Unigrams: collections.Counter = None, **kwargs):
		super().__init__(*args, **kwargs)
		self.Bigrams = Bigrams if Bigrams is not None else {}
		self.Unigrams = Unigrams if Unigrams is not None else collections.Counter()

	@classmethod
	def FromText(cls, text: str) -> 'NgramModel':
		tokens = TOKEN_RE.findall(text.lower())
		bigrams: typing.Dict[str, collections.Counter] = collections.defaultdict(collections.Counter)
		for a, b in zip(tokens, tokens[1:]):
			bigrams[a][b] += 1
		return cls(Bigrams=dict(bigrams), Unigrams=collections.Counter(tokens))

	@classmethod
	def Load(cls, path: str = DEFAULT_CORPUS) -> 'NgramModel':
		try:
			with open(path, encoding="utf-8") as f:
				model = cls.FromText(f.read())
		except OSError as e:
			raise errors.newError(errors.ConfigError, f"cannot read corpus {path}: {e.strerror}") from None
		if not model.Unigrams:
			raise errors.newError(errors.ConfigError, f"corpus {path} has no words")
		log.debug("loaded bigram model from %s: %d words", path, len(model.Unigrams))
		return model

	def Successors(self, token: str) -> collections.Counter:
		return self.Bigrams.get(token, collections.Counter())

	def Allows(self, tokens: typing.Sequence[str]) -> bool:
		if any(t not in self.Unigrams for t in tokens):
			return False
		return all(self.Successors(a)[b] > 0 for a, b in zip(tokens, tokens[1:]))

	def Next(self, prev: typing.Optional[str], rng) -> str:
		counts = self.Successors(prev) if prev else collections.Counter()
		if not counts:
			counts = self.Unigrams
		words = sorted(counts)
		return rng.choices(words, weights=[counts[w] for w in words])[0]

class CoverDist():
	"""
	An immutable plaintext distribution over fixed-width messages.
	"""
	def __init__(self, *args, Kind: CoverKind = CoverKind.CONSTANT, MsgBits: int = 0, Value: typing.Optional[BitStr] = None, K: int = 0, Model: typing.Optional[NgramModel] = None, **kwargs):
		super().__init__(*args, **kwargs)
		self.Kind = Kind
		self.MsgBits = MsgBits
		self.Value = Value
		self.K = K
		self.Model = Model

	def InSupport(self, m: BitStr) -> bool:
		"""
		>>> d = uniformFlat(2, 4)
		>>> d.InSupport(BitStr.FromInt(3, 4)), d.InSupport(BitStr.FromInt(4, 4))
		(True, False)
		"""
		if m.LenBits != self.MsgBits:
			return False
		if self.Kind is CoverKind.CONSTANT:
			return m == self.Value
		if self.Kind is CoverKind.UNIFORM:
			return m.ToInt() < 2 ** self.K
		return self.Model.Allows(textTokens(m))

	def Support(self) -> typing.List[BitStr]:
		"""The whole support of a flat distribution, in lexicographic order."""
		if self.Kind is CoverKind.CONSTANT:
			return [self.Value]
		if self.Kind is CoverKind.UNIFORM:
			return [BitStr.FromInt(i, self.MsgBits) for i in range(2 ** self.K)]
		raise errors.newError(errors.ConfigError, "an n-gram cover has no enumerable support")

	def __repr__(self) -> str:
		if self.Kind is CoverKind.CONSTANT:
			return f"CoverDist(constant:{self.Value.Hex()})"
		if self.Kind is CoverKind.UNIFORM:
			return f"CoverDist(uniform:{self.K}, msg_bits={self.MsgBits})"
		return f"CoverDist(ngram, msg_bits={self.MsgBits})"

def constantDist(m: BitStr) -> CoverDist:
	return CoverDist(Kind=CoverKind.CONSTANT, MsgBits=m.LenBits, Value=m)

def uniformFlat(k: int, msgBits: int) -> CoverDist:
	"""
	A flat distribution on the 2^k lexicographically first messages.

	>>> uniformFlat(9, 8)
	Traceback (most recent call last):
	...
	covertext.errors.ConfigError: uniform cover needs 0 <= k <= 8, got k=9
	"""
	if k < 0 or k > msgBits:
		raise errors.newError(errors.ConfigError, f"uniform cover needs 0 <= k <= {msgBits}, got k={k}")
	return CoverDist(Kind=CoverKind.UNIFORM, MsgBits=msgBits, K=k)

def ngramText(model: NgramModel, msgBits: int) -> CoverDist:
	if msgBits < 8:
		raise errors.newError(errors.ConfigError, f"an n-gram cover needs at least 8 message bits, got {msgBits}")
	return CoverDist(Kind=CoverKind.NGRAM, MsgBits=msgBits, Model=model)

def textTokens(m: BitStr) -> typing.List[str]:
	raw = m.Slice(0, m.LenBits - m.LenBits % 8).Payload.rstrip(b"\x00")
	return TOKEN_RE.findall(raw.decode("utf-8", errors="replace"))

def encodeText(text: str, msgBits: int) -> BitStr:
	"""
	>>> encodeText("hi", 24).Hex()
	'24:686900'
	"""
	raw = text.encode("utf-8")[:msgBits // 8]
	return BitStr.FromBytes(raw + bytes(msgBits // 8 - len(raw))).PadTo(msgBits)

def sampleText(model: NgramModel, prev: typing.Optional[str], budget: int, rng) -> str:
	words: typing.List[str] = []
	while True:
		nxt = model.Next(prev, rng)
		if len(" ".join(words + [nxt]).encode("utf-8")) > budget:
			break
		words.append(nxt)
		prev = nxt
	return " ".join(words)

def nextMessage(dist: CoverDist, transcript: typing.Sequence[BitStr], rng) -> BitStr:
	"""
	Samples the next plaintext. Only the n-gram model looks at the history: it
	continues from the last word of the previous message.

	>>> import random
	>>> m = BitStr.FromInt(0xab, 8)
	>>> nextMessage(constantDist(m), [], random.Random(0)) == m
	True
	>>> model = NgramModel.Load()
	>>> d = ngramText(model, 8 * 24)
	>>> prev = encodeText("in the", 8 * 24)
	>>> first = textTokens(nextMessage(d, [prev], random.Random(2)))[0]
	>>> model.Successors("the")[first] > 0
	True
	"""
	if dist.Kind is CoverKind.CONSTANT:
		return dist.Value
	if dist.Kind is CoverKind.UNIFORM:
		return BitStr.FromInt(rng.getrandbits(dist.K) if dist.K else 0, dist.MsgBits)
	prev = None
	if transcript:
		tokens = textTokens(transcript[-1])
		prev = tokens[-1] if tokens else None
	return encodeText(sampleText(dist.Model, prev, dist.MsgBits // 8, rng), dist.MsgBits)

def minEntropyOf(dist: CoverDist) -> EntropyBound:
	"""
	Exact for flat kinds; the n-gram model only declares the trivial bound.

	>>> minEntropyOf(constantDist(BitStr.Zeros(8)))
	EntropyBound(Bits=0, Exact=True)
	>>> minEntropyOf(ngramText(NgramModel.FromText("a b"), 8))
	EntropyBound(Bits=0, Exact=False)
	"""
	if dist.Kind is CoverKind.CONSTANT:
		return EntropyBound(Bits=0, Exact=True)
	if dist.Kind is CoverKind.UNIFORM:
		return EntropyBound(Bits=dist.K, Exact=True)
	return EntropyBound(Bits=0, Exact=False)

def parseCoverSpec(spec: str, msgBits: int, corpus: typing.Optional[str] = None) -> CoverDist:
	"""
	Parses `constant:<hex>`, `uniform:<k>` or `ngram[:<path>]`.

	>>> parseCoverSpec("uniform:2", 2)
	CoverDist(uniform:2, msg_bits=2)
	>>> parseCoverSpec("constant:2:c0", 2)
	CoverDist(constant:2:c0)
	>>> parseCoverSpec("zipf:3", 8)
	Traceback (most recent call last):
	...
	covertext.errors.ConfigError: unknown cover distribution: zipf:3
	"""
	kind, _, arg = spec.partition(":")
	if kind == CoverKind.CONSTANT.value:
		value = BitStr.FromHex(arg) if ":" in arg else BitStr.FromInt(int(arg or "0", 16), msgBits)
		if value.LenBits != msgBits:
			raise errors.newError(errors.ConfigError, f"constant cover has {value.LenBits} bits, the scheme takes {msgBits}")
		return constantDist(value)
	if kind == CoverKind.UNIFORM.value:
		return uniformFlat(int(arg) if arg else msgBits, msgBits)
	if kind == CoverKind.NGRAM.value:
		return ngramText(NgramModel.Load(arg or corpus or DEFAULT_CORPUS), msgBits)
	raise errors.newError(errors.ConfigError, f"unknown cover distribution: {spec}")
