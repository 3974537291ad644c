"""
Bit-exact framing of ciphertexts on the wire and the transcript file format.

A frame is a 12-byte big-endian header (magic "SC", version, direction, round,
payload length) followed by the ciphertext bytes. Nothing else is sent: the
phase of a round is never on the wire.

>>> frame = frameEncode(core.Party.P0, 1, BitStr.FromInt(0x2c, 8))
>>> len(frame), frame.hex()
(13, '5343010000000001000000012c')
>>> frameDecode(frame)
WireFrame(Direction=<Party.P0: 0>, Round=1, Payload=b',')
"""

import io
import logging
import struct
import typing

from . import config
from . import core
from . import errors

BitStr = core.BitStr
Party = core.Party

log = logging.getLogger(__name__)

MAGIC = 0x5343
VERSION = 0x01
HEADER = struct.Struct(">HBBII")
MAX_PAYLOAD = 1 << 20

class WireFrame(typing.NamedTuple):
	Direction: Party
	Round: int
	Payload: bytes

	def Encode(self) -> bytes:
		return HEADER.pack(MAGIC, VERSION, self.Direction.value, self.Round, len(self.Payload)) + self.Payload

	def ToTranscript(self, ctBits: int) -> core.TranscriptFrame:
		"""The transcript view of a frame; decoded frames carry no phase."""
		if len(self.Payload) != (ctBits + 7) // 8:
			raise errors.newError(errors.BadLength, f"{len(self.Payload)}-byte payload cannot hold a {ctBits}-bit ciphertext")
		c = BitStr.FromBytes(self.Payload).Slice(0, ctBits)
		return core.TranscriptFrame(self.Direction, self.Round, None, c)

def frameEncode(direction: Party, round: int, ciphertext: BitStr) -> bytes:
	"""
	>>> frameEncode(core.Party.P1, 0, BitStr.Zeros(8))
	Traceback (most recent call last):
	...
	covertext.errors.InvalidParams: frame rounds start at 1, got 0
	"""
	if round < 1:
		raise errors.newError(errors.InvalidParams, f"frame rounds start at 1, got {round}")
	payload = ciphertext.Payload
	return HEADER.pack(MAGIC, VERSION, direction.value, round, len(payload)) + payload

def decodeHeader(header: bytes) -> typing.Tuple[Party, int, int]:
	if len(header) < HEADER.size:
		raise errors.newError(errors.Truncated, f"frame header needs {HEADER.size} bytes, got {len(header)}")
	magic, version, direction, round, length = HEADER.unpack(header[:HEADER.size])
	if magic != MAGIC:
		raise errors.newError(errors.BadMagic, f"bad frame magic {magic:#06x}")
	if version != VERSION:
		raise errors.newError(errors.BadVersion, f"unsupported frame version {version}")
	if direction not in (0, 1):
		raise errors.newError(errors.DecodeFailure, f"unknown direction byte {direction:#04x}")
	if round < 1:
		raise errors.newError(errors.DecodeFailure, "frame round 0")
	if length > MAX_PAYLOAD:
		raise errors.newError(errors.TooLong, f"frame payload of {length} bytes")
	return Party(direction), round, length

def frameDecode(data: bytes) -> WireFrame:
	"""
	Decodes exactly one frame.

	>>> good = frameEncode(core.Party.P1, 7, BitStr.FromHex("beef"))
	>>> frameDecode(good).Round
	7
	>>> frameDecode(b"XX" + good[2:])
	Traceback (most recent call last):
	...
	covertext.errors.BadMagic: bad frame magic 0x5858
	>>> frameDecode(good[:2] + b"\\x02" + good[3:])
	Traceback (most recent call last):
	...
	covertext.errors.BadVersion: unsupported frame version 2
	>>> frameDecode(good[:-1])
	Traceback (most recent call last):
	...
	covertext.errors.Truncated: frame promises 2 payload bytes, has 1
	>>> frameDecode(good + b"\\x00")
	Traceback (most recent call last):
	...
	covertext.errors.BadLength: 1 bytes after the frame
	"""
	direction, round, length = decodeHeader(data)
	payload = data[HEADER.size:]
	if len(payload) < length:
		raise errors.newError(errors.Truncated, f"frame promises {length} payload bytes, has {len(payload)}")
	if len(payload) > length:
		raise errors.newError(errors.BadLength, f"{len(payload) - length} bytes after the frame")
	return WireFrame(Direction=direction, Round=round, Payload=bytes(payload))

def readFrame(readExact: typing.Callable[[int], bytes]) -> typing.Optional[WireFrame]:
	"""
	Reads one frame through readExact(n), which returns n bytes or fewer at end
	of stream. Returns None on a clean end of stream.

	>>> buf = io.BytesIO(frameEncode(core.Party.P0, 1, BitStr.FromInt(1, 8)) + frameEncode(core.Party.P1, 1, BitStr.FromInt(2, 8)))
	>>> [f.Direction for f in iter(lambda: readFrame(buf.read), None)]
	[<Party.P0: 0>, <Party.P1: 1>]
	"""
	header = readExact(HEADER.size)
	if not header:
		return None
	direction, round, length = decodeHeader(header)
	payload = readExact(length) if length else b""
	if len(payload) < length:
		raise errors.newError(errors.Truncated, f"stream ended {length - len(payload)} bytes into a frame payload")
	return WireFrame(Direction=direction, Round=round, Payload=payload)

#### transcript files ####
class Transcript(typing.NamedTuple):
	Header: typing.Dict[str, typing.List[str]]
	Frames: typing.List[core.TranscriptFrame]

	@property
	def CtBits(self) -> int:
		return int(self.Header["ctbits"][0])

class TranscriptWriter():
	"""
	Appends frames to a transcript file as they happen: one header line, then the
	hex of every wire frame in order.

	>>> out = io.StringIO()
	>>> w = TranscriptWriter(out, {"profile": ["tiny"], "ctbits": ["8"]})
	>>> w.Write(core.TranscriptFrame(core.Party.P0, 1, core.Phase.SEED, BitStr.FromInt(0x2c, 8)))
	>>> print(out.getvalue().strip())
	profile=tiny, ctbits=8
	5343010000000001000000012c
	>>> readTranscriptText(out.getvalue()).Frames
	[TranscriptFrame(P0 r1 None 8:2c)]
	"""
	def __init__(self, stream: typing.TextIO, header: typing.Dict[str, typing.Sequence[str]]):
		if "ctbits" not in header:
			raise errors.newError(errors.ConfigError, "a transcript header needs ctbits")
		self.stream = stream
		self.count = 0
		stream.write(config.renderPairs(header) + "\n")
		stream.flush()

	def Write(self, frame: core.TranscriptFrame):
		self.WriteRaw(frameEncode(frame.Party, frame.Round, frame.Ciphertext))

	def WriteRaw(self, encoded: bytes):
		self.stream.write(encoded.hex() + "\n")
		self.stream.flush()
		self.count += 1

def writeTranscript(path: str, header: typing.Dict[str, typing.Sequence[str]], frames: typing.Iterable[core.TranscriptFrame]):
	with open(path, "w") as f:
		w = TranscriptWriter(f, header)
		for frame in frames:
			w.Write(frame)
	log.info("wrote %d frames to %s", w.count, path)

def readTranscriptText(text: str) -> Transcript:
	"""
	>>> readTranscriptText("profile=tiny\\n")
	Traceback (most recent call last):
	...
	covertext.errors.ConfigError: bad transcript header: missing ctbits
	>>> readTranscriptText("ctbits=8\\nzz\\n")
	Traceback (most recent call last):
	...
	covertext.errors.DecodeFailure: transcript line 2 is not hex
	"""
	lines = text.splitlines()
	if not lines:
		raise errors.newError(errors.ConfigError, "empty transcript")
	header, problems = config.parseText(lines[0])
	if "ctbits" not in header:
		problems.append("missing ctbits")
	if problems:
		raise errors.newError(errors.ConfigError, f"bad transcript header: {'; '.join(problems)}")
	ctBits = int(header["ctbits"][0])
	frames = []
	for n, line in enumerate(lines[1:], start=2):
		line = line.strip()
		if not line:
			continue
		try:
			raw = bytes.fromhex(line)
		except ValueError:
			raise errors.newError(errors.DecodeFailure, f"transcript line {n} is not hex") from None
		frames.append(frameDecode(raw).ToTranscript(ctBits))
	return Transcript(Header=header, Frames=frames)

def readTranscript(path: str) -> Transcript:
	"""
	The committed tiny seed-phase transcript re-renders to the same text:

	>>> import os
	>>> path = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data", "tiny-seed.tx")
	>>> t = readTranscript(path)
	>>> len(t.Frames), t.CtBits, t.Header["seedmethod"]
	(16, 8, ['gt'])
	>>> out = io.StringIO()
	>>> w = TranscriptWriter(out, t.Header)
	>>> for frame in t.Frames:
	...     w.Write(frame)
	>>> with open(path) as f:
	...     golden = f.read()
	>>> out.getvalue() == golden
	True
	"""
	try:
		with open(path) as f:
			text = f.read()
	except OSError as e:
		raise errors.newError(errors.ConfigError, f"cannot read transcript {path}: {e.strerror}") from None
	transcript = readTranscriptText(text)
	log.debug("read %d frames from %s", len(transcript.Frames), path)
	return transcript
