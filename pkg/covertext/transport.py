"""
Moving frames between the two engines: an in-process duplex channel, TCP, and a
passive eavesdropper that records every frame it sees.

An in-process session through the channel produces the same frames as the
direct driver:

>>> from . import coverdist, pke, protocol
>>> params = core.resolveProfile("tiny")._replace(NCt=24)
>>> scheme = pke.lowentScheme(8, msgBits=8, ctBits=24)
>>> secret = core.BitStr.FromInt(0x3c, 8)
>>> session = protocol.Session(Params=params, Scheme=scheme, Cover=coverdist.uniformFlat(8, 8), Messages=[secret])
>>> a, b = channelPair()
>>> t = threading.Thread(target=Drive, args=(session.Engine(core.Party.P1, "5"), ChannelLink(b, 24), session.Rounds))
>>> t.start()
>>> frames, events = Drive(session.Engine(core.Party.P0, "5"), ChannelLink(a, 24), session.Rounds)
>>> t.join()
>>> [f.Ciphertext for f in frames] == [f.Ciphertext for f in session.Run("5").Frames]
True
>>> [e.Data for e in events if e.Kind is protocol.EventKind.SENT], len(frames)
([None], 48)
"""

import logging
import queue
import socket
import threading
import typing

from . import core
from . import errors
from . import protocol
from . import wire

Party = core.Party

log = logging.getLogger(__name__)

CHANNEL_DEPTH = 64
CONNECT_TIMEOUT = 10.0

#### in-process channel ####
CLOSED = object()

class Endpoint():
	"""
	One end of a lossless, ordered duplex byte channel. A bounded queue in each
	direction makes a fast sender block.

	>>> a, b = channelPair()
	>>> a.Send(b"hello")
	>>> b.Recv()
	b'hello'
	>>> a.Close()
	>>> b.Recv() is None
	True
	>>> a.Send(b"late")
	Traceback (most recent call last):
	...
	covertext.errors.TransportError: send on a closed channel
	"""
	def __init__(self, *args, Inbox: queue.Queue = None, Outbox: queue.Queue = None, **kwargs):
		super().__init__(*args, **kwargs)
		self.Inbox = Inbox
		self.Outbox = Outbox
		self.closed = False

	def Send(self, data: bytes):
		if self.closed:
			raise errors.newError(errors.TransportError, "send on a closed channel")
		self.Outbox.put(bytes(data))

	def Recv(self, timeout: typing.Optional[float] = None) -> typing.Optional[bytes]:
		try:
			item = self.Inbox.get(timeout=timeout)
		except queue.Empty:
			raise errors.newError(errors.TransportError, f"no data within {timeout}s") from None
		if item is CLOSED:
			self.Inbox.put(CLOSED)
			return None
		return item

	def Close(self):
		if not self.closed:
			self.closed = True
			self.Outbox.put(CLOSED)

def channelPair(depth: int = CHANNEL_DEPTH) -> typing.Tuple[Endpoint, Endpoint]:
	ab, ba = queue.Queue(maxsize=depth), queue.Queue(maxsize=depth)
	return Endpoint(Inbox=ba, Outbox=ab), Endpoint(Inbox=ab, Outbox=ba)

#### frame links ####
class Link():
	"""Sends and receives whole frames; subclasses move the bytes."""
	def __init__(self, *args, CtBits: int = 0, Tap: typing.Optional['Tap'] = None, **kwargs):
		super().__init__(*args, **kwargs)
		self.CtBits = CtBits
		self.Tap = Tap

	def SendFrame(self, frame: core.TranscriptFrame):
		encoded = wire.frameEncode(frame.Party, frame.Round, frame.Ciphertext)
		if self.Tap is not None:
			self.Tap.Record(encoded)
		self.sendBytes(encoded)

	def RecvFrame(self) -> core.TranscriptFrame:
		frame = self.recvFrame()
		if frame is None:
			raise errors.newError(errors.TransportError, f"{self.Describe()} closed mid-session")
		return frame.ToTranscript(self.CtBits)

	def Describe(self) -> str:
		return "link"

	def sendBytes(self, data: bytes):
		raise NotImplementedError

	def recvFrame(self) -> typing.Optional[wire.WireFrame]:
		raise NotImplementedError

	def Close(self):
		pass

class ChannelLink(Link):
	def __init__(self, endpoint: Endpoint, ctBits: int, tap: typing.Optional['Tap'] = None):
		super().__init__(CtBits=ctBits, Tap=tap)
		self.endpoint = endpoint

	def Describe(self) -> str:
		return "in-process channel"

	def sendBytes(self, data: bytes):
		self.endpoint.Send(data)

	def recvFrame(self) -> typing.Optional[wire.WireFrame]:
		data = self.endpoint.Recv()
		return None if data is None else wire.frameDecode(data)

	def Close(self):
		self.endpoint.Close()

def recvExactly(sock: socket.socket, n: int) -> bytes:
	chunks, have = [], 0
	while have < n:
		chunk = sock.recv(n - have)
		if not chunk:
			break
		chunks.append(chunk)
		have += len(chunk)
	return b"".join(chunks)

class SocketLink(Link):
	def __init__(self, sock: socket.socket, peer: str, ctBits: int, tap: typing.Optional['Tap'] = None):
		super().__init__(CtBits=ctBits, Tap=tap)
		self.sock = sock
		self.peer = peer

	def Describe(self) -> str:
		return f"connection to {self.peer}"

	def sendBytes(self, data: bytes):
		try:
			self.sock.sendall(data)
		except OSError as e:
			raise errors.newError(errors.TransportError, f"send to {self.peer} failed: {e}") from None

	def recvFrame(self) -> typing.Optional[wire.WireFrame]:
		try:
			return wire.readFrame(lambda n: recvExactly(self.sock, n))
		except OSError as e:
			raise errors.newError(errors.TransportError, f"receive from {self.peer} failed: {e}") from None

	def Close(self):
		self.sock.close()

#### tcp ####
def parseAddress(address: str) -> typing.Tuple[str, int]:
	"""
	>>> parseAddress("127.0.0.1:7000")
	('127.0.0.1', 7000)
	>>> parseAddress("localhost")
	Traceback (most recent call last):
	...
	covertext.errors.ConfigError: address localhost is not host:port
	"""
	host, sep, port = address.rpartition(":")
	if not sep or not port.isdigit():
		raise errors.newError(errors.ConfigError, f"address {address} is not host:port")
	return host or "0.0.0.0", int(port)

def listen(address: str) -> socket.socket:
	host, port = parseAddress(address)
	sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
	sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
	try:
		sock.bind((host, port))
		sock.listen(1)
	except OSError as e:
		sock.close()
		raise errors.newError(errors.TransportError, f"cannot listen on {address}: {e}") from None
	log.info("listening on %s:%d", *sock.getsockname()[:2])
	return sock

def acceptOne(listener: socket.socket) -> typing.Tuple[socket.socket, str]:
	# one session per listener; later connections are refused
	try:
		conn, addr = listener.accept()
	finally:
		listener.close()
	conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
	peer = f"{addr[0]}:{addr[1]}"
	log.info("accepted %s", peer)
	return conn, peer

def tcpServe(address: str, ctBits: int, listener: typing.Optional[socket.socket] = None) -> SocketLink:
	"""
	Waits for the single peer of this session.

	>>> lsock = listen("127.0.0.1:0")
	>>> addr = "127.0.0.1:%d" % lsock.getsockname()[1]
	>>> box = []
	>>> t = threading.Thread(target=lambda: box.append(tcpServe(addr, 8, listener=lsock)))
	>>> t.start()
	>>> client = tcpConnect(addr, 8)
	>>> t.join()
	>>> server = box[0]
	>>> client.SendFrame(core.TranscriptFrame(Party.P0, 1, core.Phase.SEED, core.BitStr.FromInt(0x2c, 8)))
	>>> server.RecvFrame()
	TranscriptFrame(P0 r1 None 8:2c)
	>>> client.Close()
	>>> try:
	...     server.RecvFrame()
	... except errors.TransportError as e:
	...     print(e.Message.endswith("closed mid-session"))
	True
	>>> server.Close()
	"""
	conn, peer = acceptOne(listener if listener is not None else listen(address))
	return SocketLink(conn, peer, ctBits)

def tcpConnect(address: str, ctBits: int, timeout: float = CONNECT_TIMEOUT) -> SocketLink:
	host, port = parseAddress(address)
	try:
		sock = socket.create_connection((host, port), timeout=timeout)
	except OSError as e:
		raise errors.newError(errors.TransportError, f"cannot connect to {address}: {e}") from None
	sock.settimeout(None)
	sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
	log.info("connected to %s", address)
	return SocketLink(sock, address, ctBits)

#### the eavesdropper ####
class Tap():
	"""
	A passive observer: every frame, in order, goes to a transcript writer. As a
	relay it sits between a client and the real server and copies frames both
	ways unchanged.
	"""
	def __init__(self, *args, Writer: wire.TranscriptWriter = None, **kwargs):
		super().__init__(*args, **kwargs)
		self.Writer = Writer
		self.lock = threading.Lock()

	def Record(self, encoded: bytes):
		with self.lock:
			self.Writer.WriteRaw(encoded)

	def Close(self):
		self.Writer.stream.close()

	def pump(self, src: socket.socket, dst: socket.socket, label: str):
		try:
			while True:
				frame = wire.readFrame(lambda n: recvExactly(src, n))
				if frame is None:
					break
				encoded = frame.Encode()
				# record before forwarding so the file order is the protocol order
				self.Record(encoded)
				dst.sendall(encoded)
		except (OSError, errors.Error) as e:
			log.warning("tap %s stopped: %s", label, e)
		finally:
			try:
				dst.shutdown(socket.SHUT_WR)
			except OSError:
				pass

	def Relay(self, listenAddress: str, upstream: str, listener: typing.Optional[socket.socket] = None) -> int:
		"""
		Relays one session and returns the number of frames recorded. What the tap
		records between two TCP peers is byte for byte the in-process run:

		>>> import io
		>>> from . import coverdist, pke
		>>> params = core.resolveProfile("tiny")._replace(NCt=24)
		>>> session = protocol.Session(Params=params, Scheme=pke.lowentScheme(8, msgBits=8, ctBits=24),
		...     Cover=coverdist.uniformFlat(8, 8), Messages=[core.BitStr.FromInt(0x3c, 8)])
		>>> header = {"profile": ["tiny"], "ctbits": ["24"], "rngseed": ["7"]}
		>>> direct = io.StringIO()
		>>> w = wire.TranscriptWriter(direct, header)
		>>> for frame in session.Run("7").Frames:
		...     w.Write(frame)
		>>> lsock, tsock = listen("127.0.0.1:0"), listen("127.0.0.1:0")
		>>> serverAddr = "127.0.0.1:%d" % lsock.getsockname()[1]
		>>> tapAddr = "127.0.0.1:%d" % tsock.getsockname()[1]
		>>> tapped = io.StringIO()
		>>> relay = threading.Thread(target=Tap(Writer=wire.TranscriptWriter(tapped, header)).Relay, args=(tapAddr, serverAddr), kwargs={"listener": tsock})
		>>> server = threading.Thread(target=lambda: Drive(session.Engine(Party.P1, "7"), tcpServe(serverAddr, 24, listener=lsock), session.Rounds))
		>>> relay.start(); server.start()
		>>> frames, _ = Drive(session.Engine(Party.P0, "7"), tcpConnect(tapAddr, 24), session.Rounds)
		>>> relay.join(); server.join()
		>>> tapped.getvalue() == direct.getvalue(), len(frames)
		(True, 48)
		"""
		client, peer = acceptOne(listener if listener is not None else listen(listenAddress))
		host, port = parseAddress(upstream)
		try:
			server = socket.create_connection((host, port), timeout=CONNECT_TIMEOUT)
		except OSError as e:
			client.close()
			raise errors.newError(errors.TransportError, f"tap cannot reach {upstream}: {e}") from None
		server.settimeout(None)
		log.info("tapping %s <-> %s", peer, upstream)
		threads = [
			threading.Thread(target=self.pump, args=(client, server, f"{peer}->{upstream}")),
			threading.Thread(target=self.pump, args=(server, client, f"{upstream}->{peer}")),
		]
		for t in threads:
			t.start()
		for t in threads:
			t.join()
		client.close()
		server.close()
		return self.Writer.count

def tap(recordPath: str, header: typing.Dict[str, typing.Sequence[str]]) -> Tap:
	"""
	A tap on an in-process link records both directions into one file:

	>>> import io
	>>> out = io.StringIO()
	>>> t = Tap(Writer=wire.TranscriptWriter(out, {"ctbits": ["8"]}))
	>>> a, b = channelPair()
	>>> la, lb = ChannelLink(a, 8, t), ChannelLink(b, 8, t)
	>>> la.SendFrame(core.TranscriptFrame(Party.P0, 1, core.Phase.SEED, core.BitStr.FromInt(1, 8)))
	>>> lb.SendFrame(core.TranscriptFrame(Party.P1, 1, core.Phase.SEED, core.BitStr.FromInt(2, 8)))
	>>> [f.Party for f in wire.readTranscriptText(out.getvalue()).Frames]
	[<Party.P0: 0>, <Party.P1: 1>]
	"""
	try:
		stream = open(recordPath, "w")
	except OSError as e:
		raise errors.newError(errors.TransportError, f"cannot record to {recordPath}: {e.strerror}") from None
	return Tap(Writer=wire.TranscriptWriter(stream, header))

#### driving an engine over a link ####
def Drive(engine: protocol.PartyEngine, link: Link, rounds: int) -> typing.Tuple[typing.List[core.TranscriptFrame], typing.List[protocol.Event]]:
	"""
	Runs one party for the given number of exchange-rounds. P0 opens every round
	and finally consumes P1's last frame; P1 answers.
	"""
	frames: typing.List[core.TranscriptFrame] = []
	events: typing.List[protocol.Event] = []
	incoming = None
	try:
		for _ in range(rounds):
			if engine.Role is Party.P1:
				incoming = link.RecvFrame()
				frames.append(incoming)
			frame, ev = protocol.engineStep(engine, incoming, engine.Rng)
			events += ev
			link.SendFrame(frame)
			frames.append(frame)
			if engine.Role is Party.P0:
				incoming = link.RecvFrame()
				frames.append(incoming)
		if engine.Role is Party.P0 and incoming is not None:
			events += engine.Receive(incoming)
	finally:
		link.Close()
	return frames, events
