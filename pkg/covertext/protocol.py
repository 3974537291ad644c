"""
Rejection sampling, seed establishment, the hidden key exchange and the
communication windows, driven by one PartyEngine per party.

A whole subliminal session between two in-process engines:

>>> params = core.resolveProfile("tiny")._replace(NCt=24)
>>> scheme = pke.lowentScheme(8, msgBits=8, ctBits=24)
>>> cover = coverdist.uniformFlat(8, 8)
>>> secret = BitStr.FromInt(0xa5, 8)
>>> session = Session(Params=params, Scheme=scheme, Cover=cover, Messages=[secret])
>>> session.SetupRounds, session.Rounds
(16, 24)
>>> report = session.Run("7")
>>> report.RecoveredMsg == secret
True
>>> len(report.Frames), len(report.AttemptsHistogram)
(48, 24)

Every frame is a genuine encryption of a cover message under the peer's key:

>>> keys = session.Keys("7")
>>> all(cover.InSupport(scheme.Dec(keys[f.Party.Peer].Sk, f.Ciphertext)) for f in report.Frames)
True

The same session in honest mode only encrypts:

>>> honest = Session(Params=params, Scheme=scheme, Cover=cover, Messages=[secret], Mode=Mode.HONEST).Run("7")
>>> honest.Recovered, honest.AttemptsHistogram, len(honest.Frames)
([], [], 48)
"""

import collections
import enum
import logging
import random
import typing

from . import core
from . import coverdist
from . import errors
from . import extractors
from . import peer_crypto
from . import pke

BitStr = core.BitStr
Party = core.Party
Phase = core.Phase

log = logging.getLogger(__name__)

class Mode(enum.Enum):
	HONEST = "honest"
	SUBLIMINAL = "subliminal"
	# strawman: embeds the raw message bits with no key exchange or encryption
	NAIVE = "naive"

class SeedMethod(enum.Enum):
	GT = "gt"
	MINENTROPY = "minentropy"

class EventKind(enum.Enum):
	SEED = "seed"
	KEY = "key"
	SENT = "sent"
	RECOVERED = "recovered"

class Event(typing.NamedTuple):
	Kind: EventKind
	Round: int
	Party: Party
	Data: typing.Any = None

class Seed(typing.NamedTuple):
	Bits: BitStr
	Hash: extractors.HashSeed
	Provenance: typing.List[typing.Tuple[Party, typing.Tuple[int, int]]]

class Window(typing.NamedTuple):
	Start: int
	Sender: Party

def asCiphertext(frame) -> BitStr:
	return frame.Ciphertext if isinstance(frame, core.TranscriptFrame) else frame

#### the rejection sampler ####
def rejectionSample(scheme: pke.Scheme, pk: BitStr, m: BitStr, hashSeed: extractors.HashSeed, target: BitStr, budget: int, rng) -> typing.Tuple[BitStr, int]:
	"""
	Re-encrypts m until the seeded extractor of the ciphertext equals target.

	With a = x^6 the six free bits of a tiny ciphertext reach the low output
	bits, so every target is reachable:

	>>> import random
	>>> s = pke.tinyScheme()
	>>> keys = s.Gen(random.Random(0))
	>>> seed = extractors.HashSeed(A=1 << 6, B=0)
	>>> m = BitStr.FromInt(2, 2)
	>>> rng = random.Random(1)
	>>> outs = [rejectionSample(s, keys.Pk, m, seed, BitStr.FromInt(t, 2), 256, rng)[0] for t in range(4)]
	>>> [extractors.extSeeded(seed, c, 2).ToInt() for c in outs]
	[0, 1, 2, 3]
	>>> all(s.Dec(keys.Sk, c) == m for c in outs)
	True

	A seed with a = 1 leaves the output constant on every tiny ciphertext, which is
	what an exhausted budget signals:

	>>> flat = extractors.HashSeed(A=1, B=0)
	>>> target = BitStr.FromInt(1, 2).Xor(extractors.extSeeded(flat, outs[0], 2))
	>>> rejectionSample(s, keys.Pk, m, flat, target, 64, rng)
	Traceback (most recent call last):
	...
	covertext.errors.BudgetExhausted: no ciphertext hashed to 2:40 in 64 attempts
	"""
	v = target.LenBits
	extractors.checkV(v)
	if budget < 1:
		raise errors.newError(errors.InvalidParams, f"rejection budget must be at least 1, got {budget}")
	for attempt in range(1, budget + 1):
		c = scheme.Enc(pk, m, rng)
		if extractors.extSeeded(hashSeed, c, v) == target:
			return c, attempt
	log.warning("rejection sampler gave up after %d attempts toward %s", budget, target.Hex())
	raise errors.newError(errors.BudgetExhausted, f"no ciphertext hashed to {target.Hex()} in {budget} attempts", Attempts=budget)

def recombine(hashSeed: extractors.HashSeed, frames: typing.Sequence, v: int) -> BitStr:
	"""
	>>> import random
	>>> s = pke.tinyScheme()
	>>> keys = s.Gen(random.Random(0))
	>>> seed = extractors.HashSeed(A=1 << 6, B=0x5)
	>>> rng = random.Random(2)
	>>> secret = BitStr.FromInt(0b10011100, 8)
	>>> frames = [rejectionSample(s, keys.Pk, BitStr.Zeros(2), seed, block, 256, rng)[0] for block in secret.Chunks(2)]
	>>> recombine(seed, frames, 2) == secret
	True
	>>> recombine(seed, [], 2)
	BitStr(0:)
	"""
	return core.concat(extractors.extSeeded(hashSeed, asCiphertext(f), v) for f in frames)

def naiveEmbed(scheme: pke.Scheme, pk: BitStr, plaintexts: typing.Sequence[BitStr], hashSeed: extractors.HashSeed, secret: BitStr, v: int, budget: int, rng) -> typing.Tuple[typing.List[BitStr], typing.List[int]]:
	"""
	The strawman: steers the extractor straight onto the raw secret bits,
	cycling through them, one block per plaintext. Correct, but the extracted
	stream is as structured as the secret.

	>>> import random
	>>> s = pke.tinyScheme()
	>>> keys = s.Gen(random.Random(0))
	>>> seed = extractors.HashSeed(A=1 << 6, B=0)
	>>> cts, _ = naiveEmbed(s, keys.Pk, [BitStr.Zeros(2)] * 5, seed, BitStr.FromInt(0b1101, 4), 2, 256, random.Random(3))
	>>> [extractors.extSeeded(seed, c, 2).ToInt() for c in cts]
	[3, 1, 3, 1, 3]
	"""
	cts, attempts = [], []
	for i, m in enumerate(plaintexts):
		start = (i * v) % secret.LenBits
		block = BitStr.FromBits(secret.Bit((start + j) % secret.LenBits) for j in range(v))
		c, n = rejectionSample(scheme, pk, m, hashSeed, block, budget, rng)
		cts.append(c)
		attempts.append(n)
	return cts, attempts

#### seedless two-ciphertext embedding ####
def twoPartWidth(ctBits: int, v: int) -> int:
	return ctBits - ctBits % v

def twoPartHide1(scheme: pke.Scheme, pk: BitStr, m: BitStr, rng) -> BitStr:
	"""The first ciphertext is a plain encryption; it acts as the second source."""
	return scheme.Enc(pk, m, rng)

def twoPartHide2(scheme: pke.Scheme, pk: BitStr, m: BitStr, first: BitStr, target: BitStr, budget: int, rng) -> typing.Tuple[BitStr, int]:
	"""
	Re-encrypts m until the inner-product extractor of (first, second) hits the
	target, with no shared seed at all.

	>>> import random
	>>> s = pke.tinyScheme()
	>>> keys = s.Gen(random.Random(0))
	>>> m = BitStr.FromInt(1, 2)
	>>> rng = random.Random(4)
	>>> first = twoPartHide1(s, keys.Pk, m, rng)
	>>> while first.ToInt() >> 2 == 0:
	...     first = twoPartHide1(s, keys.Pk, m, rng)
	>>> seconds = [twoPartHide2(s, keys.Pk, m, first, BitStr.FromInt(t, 2), 256, rng)[0] for t in range(4)]
	>>> [twoPartSeek(first, c, 2).ToInt() for c in seconds]
	[0, 1, 2, 3]
	>>> all(s.Dec(keys.Sk, c) == m for c in seconds)
	True
	"""
	v = target.LenBits
	width = twoPartWidth(first.LenBits, v)
	x = first.Slice(0, width)
	for attempt in range(1, budget + 1):
		c = scheme.Enc(pk, m, rng)
		if extractors.ip2Ext(x, c.Slice(0, width), v) == target:
			return c, attempt
	raise errors.newError(errors.BudgetExhausted, f"no second ciphertext reached {target.Hex()} in {budget} attempts", Attempts=budget)

def twoPartSeek(first: BitStr, second: BitStr, v: int) -> BitStr:
	width = twoPartWidth(min(first.LenBits, second.LenBits), v)
	return extractors.ip2Ext(first.Slice(0, width), second.Slice(0, width), v)

#### seed establishment ####
def seedRoundsByParty(frames: typing.Sequence[core.TranscriptFrame], rounds: int) -> typing.Dict[Party, typing.Dict[int, BitStr]]:
	byParty: typing.Dict[Party, typing.Dict[int, BitStr]] = {Party.P0: {}, Party.P1: {}}
	for f in frames:
		if f.Round <= rounds:
			byParty[f.Party][f.Round] = f.Ciphertext
	return byParty

def computeSeedBits(frames: typing.Sequence[core.TranscriptFrame], d: int) -> BitStr:
	"""
	One greater-than bit per party from each pair of consecutive rounds
	(1,2), (3,4), ...: P0's bit first, then P1's.

	>>> f = lambda p, r, v: core.TranscriptFrame(p, r, Phase.SEED, BitStr.FromInt(v, 3))
	>>> computeSeedBits([f(Party.P0, 1, 5), f(Party.P1, 1, 2), f(Party.P0, 2, 3), f(Party.P1, 2, 7)], 2).Bits()
	[1, 0]
	>>> computeSeedBits([f(Party.P0, 1, 4), f(Party.P1, 1, 6), f(Party.P0, 2, 4), f(Party.P1, 2, 6)], 2).Bits()
	[1, 1]
	>>> computeSeedBits([f(Party.P0, 1, 5), f(Party.P1, 1, 2)], 2)
	Traceback (most recent call last):
	...
	covertext.errors.NotEnoughFrames: need 2 seed rounds from P0, have 1

	The seed of the committed tiny transcript:

	>>> import os
	>>> from . import wire
	>>> golden = wire.readTranscript(os.path.join(os.path.dirname(os.path.abspath(__file__)), "data", "tiny-seed.tx"))
	>>> computeSeedBits(golden.Frames, 8)
	BitStr(8:39)
	"""
	if d <= 0 or d % 2:
		raise errors.newError(errors.InvalidParams, f"d={d} must be a positive multiple of 2")
	byParty = seedRoundsByParty(frames, d)
	for party in (Party.P0, Party.P1):
		have = len(byParty[party])
		if have < d:
			raise errors.newError(errors.NotEnoughFrames, f"need {d} seed rounds from {party}, have {have}")
	bits = []
	for j in range(d // 2):
		for party in (Party.P0, Party.P1):
			bits.append(extractors.gt(byParty[party][2 * j + 1], byParty[party][2 * j + 2]))
	return BitStr.FromBits(bits)

def minEntropySeed(frames: typing.Sequence, plaintexts: typing.Sequence[BitStr], k1: float, v: int, cover: coverdist.CoverDist) -> BitStr:
	"""
	Extracts v bits from each (plaintext, ciphertext) pair with the
	inner-product extractor; the ciphertext is cut or padded to the plaintext
	length rounded up to a multiple of v.

	>>> cover = coverdist.uniformFlat(2, 2)
	>>> minEntropySeed([BitStr.FromInt(0xff, 8)], [BitStr.Zeros(2)], 2, 2, cover)
	BitStr(2:00)
	>>> minEntropySeed([BitStr.FromInt(0x80, 8)], [BitStr.FromInt(1, 2)], 2, 2, cover)
	BitStr(2:80)
	>>> minEntropySeed([], [], 1, 2, coverdist.constantDist(BitStr.Zeros(2)))
	Traceback (most recent call last):
	...
	covertext.errors.EntropyTooLow: cover declares min-entropy 0 below k1=1
	"""
	declared = coverdist.minEntropyOf(cover)
	if declared.Bits < k1:
		raise errors.newError(errors.EntropyTooLow, f"cover declares min-entropy {declared.Bits} below k1={k1}")
	if len(frames) != len(plaintexts):
		raise errors.newError(errors.LengthMismatch, f"{len(frames)} ciphertexts but {len(plaintexts)} plaintexts")
	blocks = []
	for frame, m in zip(frames, plaintexts):
		width = -(-m.LenBits // v) * v
		x = m.PadTo(width)
		if not x.ToInt():
			log.warning("zero plaintext contributes a zero seed block")
		blocks.append(extractors.ip2Ext(x, asCiphertext(frame).Slice(0, width).PadTo(width), v))
	return core.concat(blocks)

#### schedules ####
def backToBack(senders: typing.Sequence[Party], start: int, length: int) -> typing.List[Window]:
	"""
	>>> backToBack([Party.P0, Party.P1], 17, 8)
	[Window(Start=17, Sender=<Party.P0: 0>), Window(Start=25, Sender=<Party.P1: 1>)]
	"""
	return [Window(Start=start + i * length, Sender=s) for i, s in enumerate(senders)]

def checkSchedule(schedule: typing.Sequence[Window], setupRounds: int, length: int):
	"""
	>>> checkSchedule([Window(10, Party.P0)], 16, 8)
	Traceback (most recent call last):
	...
	covertext.errors.InvalidParams: window at round 10 opens before setup ends at round 16
	"""
	last = setupRounds
	for w in sorted(schedule, key=lambda w: w.Start):
		if w.Start <= setupRounds:
			raise errors.newError(errors.InvalidParams, f"window at round {w.Start} opens before setup ends at round {setupRounds}")
		if w.Start <= last:
			raise errors.newError(errors.InvalidParams, f"window at round {w.Start} overlaps the previous one")
		last = w.Start + length - 1

#### the party engine ####
class PartyEngine():
	"""
	One party's side of the protocol. Within exchange-round r, P0 speaks first
	and P1 answers; Step() takes the peer's last frame and returns our next one.

	>>> import random
	>>> params = core.resolveProfile("tiny")
	>>> s = pke.tinyScheme()
	>>> e = PartyEngine(Role=Party.P0, Params=params, Scheme=s, MyKeys=s.Gen(random.Random(1)),
	...     PeerPk=BitStr.Zeros(2), Cover=coverdist.uniformFlat(2, 2), Rng=random.Random(2))
	>>> e.Embed(BitStr.Zeros(8))
	Traceback (most recent call last):
	...
	covertext.errors.NotReady: P0 cannot embed in SeedPhase before the hidden key exchange completes
	>>> frame, events = e.Step(None)
	>>> frame.Party, frame.Round, frame.Phase
	(<Party.P0: 0>, 1, <Phase.SEED: 'SeedPhase'>)
	>>> e.Step(None)
	Traceback (most recent call last):
	...
	covertext.errors.ProtocolDesync: P0 cannot send round 2 before receiving the peer's round 1
	"""
	def __init__(self, *args, Role: Party = Party.P0, Params: core.SecurityParams = core.DESK, Scheme: pke.Scheme = None,
			MyKeys: pke.KeyPair = None, PeerPk: BitStr = None, Cover: coverdist.CoverDist = None, Mode: Mode = Mode.SUBLIMINAL,
			Schedule: typing.Sequence[Window] = (), Messages: typing.Sequence[BitStr] = (), SeedMethod: SeedMethod = SeedMethod.GT,
			KexGroup: typing.Optional[pke.GroupParams] = None, K1: typing.Optional[float] = None, Rng=None, **kwargs):
		super().__init__(*args, **kwargs)
		self.Role = Role
		self.Params = Params
		self.Scheme = Scheme
		self.MyKeys = MyKeys
		self.PeerPk = PeerPk
		self.Cover = Cover
		self.Mode = Mode
		self.Schedule = {w.Start: w for w in Schedule}
		self.SeedMethod = SeedMethod
		self.KexGroup = KexGroup
		self.K1 = Scheme.MsgBits // 2 + 1 if K1 is None else K1
		self.Rng = Rng

		self.Phase = Phase.SEED
		self.Sending = False
		self.Round = 0
		self.PeerRound = 0
		self.entered = 0
		self.claimed = 0

		self.Frames: typing.List[core.TranscriptFrame] = []
		self.Plaintexts: typing.List[BitStr] = []
		self.Seed: typing.Optional[Seed] = None
		self.Kex: typing.Optional[peer_crypto.KexState] = None
		self.SkStar: typing.Optional[peer_crypto.SkeKey] = None

		self.sendQueue: typing.List[BitStr] = []
		self.sentBlocks = 0
		self.recvBlocks: typing.List[BitStr] = []
		self.Outbox = collections.deque(Messages)
		self.naiveBits = Messages[0] if Messages else BitStr.FromInt(2 ** Params.Kappa - 1, Params.Kappa)
		self.naivePos = 0

		self.Recovered: typing.List[BitStr] = []
		self.Attempts: typing.List[int] = []
		self.Diagnostics: typing.List[str] = []

	@property
	def SeedRounds(self) -> int:
		return self.Params.D if self.SeedMethod is SeedMethod.GT else 2

	@property
	def SetupRounds(self) -> int:
		return self.SeedRounds + self.Params.KexBlocks

	def setPhase(self, phase: Phase, sending: bool = False):
		if phase is not self.Phase or sending != self.Sending:
			log.info("%s: %s -> %s%s after round %d", self.Role, self.Phase, phase, " (sending)" if sending else "", self.Round)
		self.Phase = phase
		self.Sending = sending

	def diagnose(self, msg: str):
		log.warning("%s: %s", self.Role, msg)
		self.Diagnostics.append(f"{self.Role}: {msg}")

	#### public operations ####
	def Step(self, incoming: typing.Optional[core.TranscriptFrame], rng=None) -> typing.Tuple[core.TranscriptFrame, typing.List[Event]]:
		rng = rng or self.Rng
		events = self.Receive(incoming, rng) if incoming is not None else []
		frame, more = self.Send(rng)
		return frame, events + more

	def Send(self, rng=None) -> typing.Tuple[core.TranscriptFrame, typing.List[Event]]:
		rng = rng or self.Rng
		r = self.Round + 1
		expected = r - 1 if self.Role is Party.P0 else r
		if self.PeerRound != expected:
			raise errors.newError(errors.ProtocolDesync, f"{self.Role} cannot send round {r} before receiving the peer's round {expected}")
		self.enterRound(r, rng)
		m = coverdist.nextMessage(self.Cover, self.Plaintexts, rng)
		target = self.nextTarget()
		if target is None:
			c = self.Scheme.Enc(self.PeerPk, m, rng)
		else:
			try:
				c, attempts = rejectionSample(self.Scheme, self.PeerPk, m, self.Seed.Hash, target, self.Params.MaxAttempts, rng)
			except errors.BudgetExhausted as e:
				e.Round = r
				self.diagnose(f"round {r}: {e.Message}")
				raise
			self.Attempts.append(attempts)
		frame = core.TranscriptFrame(self.Role, r, self.Phase, c)
		self.Frames.append(frame)
		self.Plaintexts.append(m)
		self.Round = r
		return frame, self.progress(rng)

	def Receive(self, frame: core.TranscriptFrame, rng=None) -> typing.List[Event]:
		rng = rng or self.Rng
		if frame.Party is not self.Role.Peer:
			raise errors.newError(errors.ProtocolDesync, f"{self.Role} received a frame from {frame.Party}")
		expected = self.Round if self.Role is Party.P0 else self.Round + 1
		if frame.Round != expected or frame.Round <= self.PeerRound:
			raise errors.newError(errors.ProtocolDesync, f"{self.Role} expected the peer's round {expected}, got round {frame.Round}")
		if frame.Ciphertext.LenBits != self.Scheme.CtBits:
			raise errors.newError(errors.ProtocolDesync, f"round {frame.Round} carries {frame.Ciphertext.LenBits} bits, expected {self.Scheme.CtBits}")
		self.enterRound(frame.Round, rng)
		m = self.Scheme.Dec(self.MyKeys.Sk, frame.Ciphertext)
		self.Frames.append(frame._replace(Phase=self.Phase))
		self.Plaintexts.append(m)
		self.PeerRound = frame.Round
		if self.Mode is Mode.SUBLIMINAL and (self.Phase is Phase.KEX or (self.Phase is Phase.COMM and not self.Sending)):
			self.recvBlocks.append(extractors.extSeeded(self.Seed.Hash, frame.Ciphertext, self.Params.V))
		return self.progress(rng)

	def Embed(self, msg: BitStr, rng=None):
		"""
		Claims our window that opens at the next round for msg, ahead of the Outbox.
		"""
		if self.Phase is not Phase.IDLE or self.SkStar is None:
			raise errors.newError(errors.NotReady, f"{self.Role} cannot embed in {self.Phase} before the hidden key exchange completes")
		r = self.Round + 1
		window = self.Schedule.get(r)
		if window is None or window.Sender is not self.Role or r <= self.entered or self.Mode is not Mode.SUBLIMINAL:
			raise errors.newError(errors.ProtocolDesync, f"no window for {self.Role} opens at round {r}")
		self.claimed = r
		self.startSending(msg, rng)

	def Expect(self):
		self.recvBlocks = []
		self.setPhase(Phase.COMM, sending=False)

	#### internals ####
	def startSending(self, msg: BitStr, rng):
		c = peer_crypto.skeEnc(self.SkStar, msg, rng or self.Rng, nonceBits=self.Params.NonceBits, kappa=self.Params.Kappa)
		self.sendQueue = c.ToBits().Chunks(self.Params.V)
		self.sentBlocks = 0
		self.setPhase(Phase.COMM, sending=True)

	def enterRound(self, r: int, rng):
		if r <= self.entered:
			return
		self.entered = r
		window = self.Schedule.get(r)
		if window is None or self.Mode is not Mode.SUBLIMINAL or r == self.claimed:
			return
		if self.Phase is not Phase.IDLE:
			raise errors.newError(errors.ProtocolDesync, f"window at round {r} opens while {self.Role} is in {self.Phase}")
		if window.Sender is self.Role:
			if not self.Outbox:
				raise errors.newError(errors.NotReady, f"{self.Role} has no message for the window at round {r}")
			self.startSending(self.Outbox.popleft(), rng)
		else:
			self.Expect()

	def nextTarget(self) -> typing.Optional[BitStr]:
		if self.Mode is Mode.HONEST or self.Seed is None:
			return None
		if self.Mode is Mode.NAIVE:
			bits, v = self.naiveBits, self.Params.V
			block = BitStr.FromBits(bits.Bit((self.naivePos + j) % bits.LenBits) for j in range(v))
			self.naivePos = (self.naivePos + v) % bits.LenBits
			return block
		if (self.Phase is Phase.KEX or (self.Phase is Phase.COMM and self.Sending)) and self.sendQueue:
			self.sentBlocks += 1
			return self.sendQueue.pop(0)
		return None

	def seedReady(self) -> bool:
		byParty = seedRoundsByParty(self.Frames, self.SeedRounds)
		return all(len(rounds) == self.SeedRounds for rounds in byParty.values())

	def establishSeed(self, rng) -> typing.List[Event]:
		n = self.SeedRounds
		if self.SeedMethod is SeedMethod.GT:
			bits = computeSeedBits(self.Frames, self.Params.D)
			provenance = [(p, (2 * j + 1, 2 * j + 2)) for j in range(n // 2) for p in (Party.P0, Party.P1)]
		else:
			pairs = [(f, m) for f, m in zip(self.Frames, self.Plaintexts) if f.Round <= n]
			bits = minEntropySeed([f for f, _ in pairs], [m for _, m in pairs], self.K1, self.Params.D // 4, self.Cover)
			provenance = [(f.Party, (f.Round, f.Round)) for f, _ in pairs]
			if any(not m.ToInt() for _, m in pairs):
				self.diagnose("zero plaintext in the seed rounds gave a zero seed block")
		self.Seed = Seed(Bits=bits, Hash=extractors.seedFromBits(extractors.expandSeedBits(bits)), Provenance=provenance)
		log.info("%s established seed %s after round %d", self.Role, bits.Hex(), self.Round)
		events = [Event(EventKind.SEED, self.Round, self.Role, self.Seed)]
		if self.Mode is Mode.HONEST:
			self.setPhase(Phase.IDLE)
		elif self.Mode is Mode.NAIVE:
			self.setPhase(Phase.COMM, sending=True)
		else:
			group = self.KexGroup or pke.standardGroup(self.Params.EllKex)
			self.Kex, msg = peer_crypto.kexRound1(self.Params, group, rng)
			self.sendQueue = msg.Chunks(self.Params.V)
			self.sentBlocks = 0
			self.recvBlocks = []
			self.setPhase(Phase.KEX)
		return events

	def finishKex(self) -> typing.List[Event]:
		shared = peer_crypto.kexFinish(self.Kex, core.concat(self.recvBlocks))
		if shared.Degenerate:
			self.diagnose("key exchange produced the identity element")
		self.SkStar = peer_crypto.skeGen(shared)
		self.recvBlocks = []
		self.setPhase(Phase.IDLE)
		return [Event(EventKind.KEY, self.Round, self.Role, peer_crypto.fingerprint(self.SkStar))]

	def recover(self) -> typing.List[Event]:
		c = peer_crypto.SkeCiphertext.FromBits(core.concat(self.recvBlocks), self.Params.Kappa)
		msg = peer_crypto.skeDec(self.SkStar, c)
		self.Recovered.append(msg)
		self.recvBlocks = []
		log.info("%s recovered a %d-bit message after round %d", self.Role, msg.LenBits, max(self.Round, self.PeerRound))
		self.setPhase(Phase.IDLE)
		return [Event(EventKind.RECOVERED, self.PeerRound, self.Role, msg)]

	def progress(self, rng) -> typing.List[Event]:
		events: typing.List[Event] = []
		if self.Phase is Phase.SEED and self.seedReady():
			events += self.establishSeed(rng)
		if self.Mode is not Mode.SUBLIMINAL:
			return events
		blocks = self.Params.KexBlocks
		if self.Phase is Phase.KEX and self.sentBlocks == blocks and len(self.recvBlocks) == blocks:
			events += self.finishKex()
		elif self.Phase is Phase.COMM and self.Sending and not self.sendQueue:
			self.setPhase(Phase.IDLE)
			events.append(Event(EventKind.SENT, self.Round, self.Role))
		elif self.Phase is Phase.COMM and not self.Sending and len(self.recvBlocks) == self.Params.CommBlocks:
			events += self.recover()
		return events

def engineStep(engine: PartyEngine, incoming: typing.Optional[core.TranscriptFrame], rng) -> typing.Tuple[core.TranscriptFrame, typing.List[Event]]:
	return engine.Step(incoming, rng)

def embed(engine: PartyEngine, msg: BitStr):
	"""
	Hands msg to engine for the window of its own that opens next.

	>>> params = core.resolveProfile("tiny")._replace(NCt=24)
	>>> scheme = pke.lowentScheme(8, msgBits=8, ctBits=24)
	>>> s = Session(Params=params, Scheme=scheme, Cover=coverdist.uniformFlat(8, 8), Messages=[BitStr.FromInt(0x11, 8)], Senders=[Party.P1])
	>>> e0, e1 = s.Engines("3")
	>>> incoming, events = None, []
	>>> for _ in range(s.SetupRounds):
	...     f0, _ = engineStep(e0, incoming, e0.Rng)
	...     incoming, _ = engineStep(e1, f0, e1.Rng)
	>>> embed(e1, BitStr.FromInt(0x5a, 8))
	>>> for _ in range(params.CommBlocks):
	...     f0, ev = engineStep(e0, incoming, e0.Rng)
	...     events += ev
	...     incoming, ev = engineStep(e1, f0, e1.Rng)
	...     events += ev
	>>> events += e0.Receive(incoming)
	>>> [e.Data for e in events if e.Kind is EventKind.RECOVERED]
	[BitStr(8:5a)]
	>>> embed(e1, BitStr.FromInt(0x5a, 8))
	Traceback (most recent call last):
	...
	covertext.errors.ProtocolDesync: no window for P1 opens at round 25
	"""
	engine.Embed(msg)

#### sessions ####
class RunReport(typing.NamedTuple):
	Recovered: typing.List[BitStr]
	Frames: typing.List[core.TranscriptFrame]
	AttemptsHistogram: typing.List[int]
	Seed: typing.Optional[Seed]
	Diagnostics: typing.List[str]
	Events: typing.List[Event]

	@property
	def RecoveredMsg(self) -> typing.Optional[BitStr]:
		return self.Recovered[0] if self.Recovered else None

	def Histogram(self) -> typing.Dict[int, int]:
		return dict(sorted(collections.Counter(self.AttemptsHistogram).items()))

	def Render(self) -> str:
		"""
		>>> print(RunReport([BitStr.FromHex("beef")], [], [3, 5, 3], None, ["P1: odd"], []).Render())
		frames=0
		attempts=3 mean=3.67 max=5
		recovered=beef
		diagnostic=P1: odd
		"""
		lines = [f"frames={len(self.Frames)}"]
		if self.Seed is not None:
			lines.append(f"seed={self.Seed.Bits.Hex()}")
		if self.AttemptsHistogram:
			mean = sum(self.AttemptsHistogram) / len(self.AttemptsHistogram)
			lines.append(f"attempts={len(self.AttemptsHistogram)} mean={mean:.2f} max={max(self.AttemptsHistogram)}")
		lines += [f"recovered={hexOf(m)}" for m in self.Recovered]
		lines += [f"diagnostic={d}" for d in self.Diagnostics]
		return "\n".join(lines)

def hexOf(m: BitStr) -> str:
	return m.Payload.hex() if m.LenBits % 8 == 0 else m.Hex()

def partyRng(rngSeed, label: str):
	return random.Random(f"{rngSeed}/{label}")

class Session():
	"""
	Two engines sharing one configuration: setup, then one communication window
	per message (back to back), then any idle rounds.

	>>> params = core.resolveProfile("tiny")._replace(NCt=24)
	>>> scheme = pke.lowentScheme(8, msgBits=8, ctBits=24)
	>>> a, b = BitStr.FromInt(0x11, 8), BitStr.FromInt(0xfe, 8)
	>>> s = Session(Params=params, Scheme=scheme, Cover=coverdist.uniformFlat(8, 8), Messages=[a, b], Senders=[Party.P0, Party.P1])
	>>> s.Rounds
	32
	>>> s.Run("2").Recovered == [a, b]
	True
	>>> Session(Params=params, Scheme=scheme, Cover=coverdist.uniformFlat(8, 8), Messages=[BitStr.Zeros(4)])
	Traceback (most recent call last):
	...
	covertext.errors.BadLength: hidden messages must be 8 bits, got 4
	"""
	def __init__(self, *args, Params: core.SecurityParams = core.DESK, Scheme: pke.Scheme = None, Cover: coverdist.CoverDist = None,
			Mode: Mode = Mode.SUBLIMINAL, Messages: typing.Sequence[BitStr] = (), Senders: typing.Optional[typing.Sequence[Party]] = None,
			SeedMethod: SeedMethod = SeedMethod.GT, KexGroup: typing.Optional[pke.GroupParams] = None, IdleRounds: int = 0,
			K1: typing.Optional[float] = None, **kwargs):
		super().__init__(*args, **kwargs)
		for m in Messages:
			if m.LenBits != Params.Kappa:
				raise errors.newError(errors.BadLength, f"hidden messages must be {Params.Kappa} bits, got {m.LenBits}")
		senders = list(Senders) if Senders is not None else [Party.P0] * len(Messages)
		if len(senders) != len(Messages):
			raise errors.newError(errors.InvalidParams, f"{len(senders)} senders for {len(Messages)} messages")
		if Scheme.CtBits != Params.NCt:
			raise errors.newError(errors.InvalidParams, f"scheme {Scheme.Id} has {Scheme.CtBits}-bit ciphertexts, the profile wants {Params.NCt}")
		self.Params = Params
		self.Scheme = Scheme
		self.Cover = Cover
		self.Mode = Mode
		self.Messages = list(Messages)
		self.Senders = senders
		self.SeedMethod = SeedMethod
		self.KexGroup = KexGroup
		self.IdleRounds = IdleRounds
		self.K1 = Scheme.MsgBits // 2 + 1 if K1 is None else K1
		self.checkSeeding()
		self.Schedule = backToBack(senders, self.SetupRounds + 1, Params.CommBlocks)
		checkSchedule(self.Schedule, self.SetupRounds, Params.CommBlocks)

	def checkSeeding(self):
		if self.SeedMethod is not SeedMethod.MINENTROPY:
			return
		v = self.Params.D // 4
		if self.Params.D % 4 or v not in extractors.SMALL_FIELD_POLYS:
			raise errors.newError(errors.InvalidParams, f"min-entropy seeding needs d/4 in {sorted(extractors.SMALL_FIELD_POLYS)}, got d={self.Params.D}")
		declared = coverdist.minEntropyOf(self.Cover)
		if declared.Bits < self.K1:
			raise errors.newError(errors.EntropyTooLow, f"cover declares min-entropy {declared.Bits} below k1={self.K1}")

	@property
	def SeedRounds(self) -> int:
		return self.Params.D if self.SeedMethod is SeedMethod.GT else 2

	@property
	def SetupRounds(self) -> int:
		return self.SeedRounds + self.Params.KexBlocks

	@property
	def Rounds(self) -> int:
		return self.SetupRounds + len(self.Messages) * self.Params.CommBlocks + self.IdleRounds

	def Keys(self, rngSeed) -> typing.Dict[Party, pke.KeyPair]:
		return {p: self.Scheme.Gen(partyRng(rngSeed, f"keys/{p}")) for p in (Party.P0, Party.P1)}

	def Engine(self, role: Party, rngSeed, keys: typing.Optional[typing.Dict[Party, pke.KeyPair]] = None) -> PartyEngine:
		keys = keys or self.Keys(rngSeed)
		mine = [m for m, s in zip(self.Messages, self.Senders) if s is role]
		return PartyEngine(Role=role, Params=self.Params, Scheme=self.Scheme, MyKeys=keys[role], PeerPk=keys[role.Peer].Pk,
			Cover=self.Cover, Mode=self.Mode, Schedule=self.Schedule, Messages=mine, SeedMethod=self.SeedMethod,
			KexGroup=self.KexGroup, K1=self.K1, Rng=partyRng(rngSeed, str(role)))

	def Engines(self, rngSeed) -> typing.Tuple[PartyEngine, PartyEngine]:
		keys = self.Keys(rngSeed)
		return self.Engine(Party.P0, rngSeed, keys), self.Engine(Party.P1, rngSeed, keys)

	def Run(self, rngSeed) -> RunReport:
		"""
		An exhausted rejection budget carries the run up to that point:

		>>> params = core.resolveProfile("tiny")._replace(NCt=24, MaxAttempts=1)
		>>> s = Session(Params=params, Scheme=pke.lowentScheme(8, msgBits=8, ctBits=24), Cover=coverdist.uniformFlat(8, 8),
		...     Messages=[BitStr.FromInt(0x11, 8)])
		>>> try:
		...     s.Run("2")
		... except errors.BudgetExhausted as e:
		...     partial = e.Report
		>>> len(partial.Frames) > s.SeedRounds, partial.Seed is not None
		(True, True)
		>>> partial.Diagnostics
		['P... round ...: no ciphertext hashed to ... in 1 attempts']
		"""
		e0, e1 = self.Engines(rngSeed)
		frames: typing.List[core.TranscriptFrame] = []
		events: typing.List[Event] = []
		incoming = None
		try:
			for _ in range(self.Rounds):
				f0, ev = engineStep(e0, incoming, e0.Rng)
				frames.append(f0)
				events += ev
				incoming, ev = engineStep(e1, f0, e1.Rng)
				frames.append(incoming)
				events += ev
			if incoming is not None:
				events += e0.Receive(incoming)
		except errors.BudgetExhausted as e:
			e.Report = report(frames, events, e0, e1)
			raise
		return report(frames, events, e0, e1)

def report(frames: typing.List[core.TranscriptFrame], events: typing.List[Event], *engines: PartyEngine) -> RunReport:
	recovered = [e.Data for e in events if e.Kind is EventKind.RECOVERED]
	attempts = [n for engine in engines for n in engine.Attempts]
	diagnostics = [d for engine in engines for d in engine.Diagnostics]
	seed = next((engine.Seed for engine in engines if engine.Seed is not None), None)
	return RunReport(Recovered=recovered, Frames=frames, AttemptsHistogram=attempts, Seed=seed, Diagnostics=diagnostics, Events=events)
