"""
The command-line front end.

Usage errors exit 2, errors raised by a run exit 1, success exits 0.

>>> main(["frobnicate"])
2
>>> buf = io.StringIO()
>>> main(["run-local", "--profile", "tiny", "--scheme", "tiny", "--mode", "honest", "--idle", "2"], out=buf)
0
>>> buf.getvalue().splitlines()[0].startswith("frames="), "seed=" in buf.getvalue()
(True, True)
>>> main(["run-local", "--profile", "tiny", "--scheme", "lowent:8"])
ERROR: k=8 leaves no message bits in 8-bit ciphertexts
1
>>> main(["run-local", "--profile", "huge"])
Woops! The configuration does not add up:
	unknown profile: huge
2
"""

import argparse
import io
import logging
import os
import sys
import traceback
import typing

from . import config
from . import core
from . import coverdist
from . import errors
from . import pke
from . import protocol
from . import selftest
from . import stats
from . import transport
from . import wire

log = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

USAGE_ERROR = 2
RUN_ERROR = 1

class UsageError(Exception):
	"""Raised by the argument parser instead of exiting."""

class ArgumentParser(argparse.ArgumentParser):
	def error(self, message: str):
		raise UsageError(f"{self.prog}: {message}")

def configureLogging(verbose: bool):
	level = logging.DEBUG if verbose else os.environ.get("COVERTEXT_LOG", "WARNING").upper()
	logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)

def printConfigErrors(out: io.TextIOBase, problems: typing.List[str]):
	out.write("Woops! The configuration does not add up:\n")
	for msg in problems:
		out.write(f"\t{msg}\n")

#### argument parsing ####
def addRunFlags(p: argparse.ArgumentParser):
	p.add_argument("--config", help="key=value file read before the flags")
	p.add_argument("--profile", help="desk, tiny or bench")
	p.add_argument("--scheme", help="tiny, elg or lowent:<k>")
	p.add_argument("--cover", help="constant:<hex>, uniform:<k> or ngram[:<path>]")
	p.add_argument("--mode", choices=["honest", "subliminal", "naive"])
	p.add_argument("--msg", action="append", help="hidden message as hex; repeat for more windows")
	p.add_argument("--senders", help="comma separated sender of each window, e.g. P0,P1")
	p.add_argument("--rng-seed", dest="rngseed")
	p.add_argument("--seed-method", dest="seedmethod", choices=["gt", "minentropy"])
	p.add_argument("--idle", help="idle rounds after the last window")
	p.add_argument("--transcript", help="write the transcript file here")
	p.add_argument("--report", help="write the run report here")
	p.add_argument("--keys", help="write both key pairs under this directory")
	p.add_argument("--group", help="p=/q=/g= file for the ElGamal group")
	p.add_argument("--corpus", help="text corpus of the n-gram cover")

def buildParser() -> argparse.ArgumentParser:
	parser = ArgumentParser(prog="covertext", description="Subliminal messages inside mandated public-key ciphertexts.")
	parser.add_argument("-v", "--verbose", action="store_true")
	sub = parser.add_subparsers(dest="command", parser_class=ArgumentParser)

	p = sub.add_parser("run-local", help="run both parties in-process")
	addRunFlags(p)

	p = sub.add_parser("serve", help="wait for the peer on a TCP address")
	addRunFlags(p)
	p.add_argument("--listen", required=True, help="host:port")
	p.add_argument("--role", help="P0 or P1; P1 unless configured")

	p = sub.add_parser("connect", help="dial the peer at a TCP address")
	addRunFlags(p)
	p.add_argument("--peer", help="host:port; also the peer key of a config file")
	p.add_argument("--role", help="P0 or P1; P0 unless configured")

	p = sub.add_parser("eavesdrop", help="relay one session and record every frame")
	addRunFlags(p)
	p.add_argument("--listen", required=True)
	p.add_argument("--upstream", required=True)
	p.add_argument("--record", required=True)

	p = sub.add_parser("attack-demo", help="bias a locally decodable strawman through the mandated scheme")
	p.add_argument("--t", type=int, default=10)
	p.add_argument("--encryptions", type=int, default=10 ** 5)
	p.add_argument("--trials", type=int, default=1000)

	p = sub.add_parser("battery", help="compare two transcript files")
	p.add_argument("a")
	p.add_argument("b")
	p.add_argument("--alpha", type=float, default=stats.DEFAULT_ALPHA)
	p.add_argument("--format", choices=["text", "kv", "json"], default="text")

	p = sub.add_parser("selftest", help="run the acceptance checks")
	p.add_argument("--scale", type=float, default=1.0)
	p.add_argument("--profile", choices=["desk", "tiny"], default="desk")

	p = sub.add_parser("bench", help="time the rejection sampler")
	p.add_argument("--profile", default="desk")
	p.add_argument("--scheme", default="elg")
	p.add_argument("--embeds", type=int, default=200)
	return parser

def flagLayer(args: argparse.Namespace, outer: config.Environment) -> config.Environment:
	env = config.Environment(outer)
	for key in config.KNOWN_KEYS:
		value = getattr(args, key, None)
		if value is None:
			continue
		if key == "msg":
			env.Set(key, list(value))
		elif key == "senders":
			env.Set(key, [s.strip() for s in value.split(",") if s.strip()])
		else:
			env.Set(key, [str(value)])
	return env

COMMAND_DEFAULTS = {
	"serve": {"role": ["P1"]},
}

def runConfig(args: argparse.Namespace, environ=None) -> typing.Tuple[typing.Optional[config.RunConfig], typing.List[str]]:
	"""
	Layers defaults, the command's own defaults, the config file, the
	environment and the flags.

	>>> import tempfile
	>>> with tempfile.NamedTemporaryFile("w", suffix=".conf", delete=False) as f:
	...     _ = f.write("role = P0\\npeer = 10.0.0.2:7000\\n")
	>>> cfg, _ = runConfig(buildParser().parse_args(["serve", "--listen", ":7000", "--config", f.name]), {})
	>>> cfg.Role, cfg.Peer
	(<Party.P0: 0>, '10.0.0.2:7000')
	>>> cfg, _ = runConfig(buildParser().parse_args(["serve", "--listen", ":7000"]), {})
	>>> cfg.Role
	<Party.P1: 1>
	>>> cfg, _ = runConfig(buildParser().parse_args(["connect", "--config", f.name, "--peer", "h:1", "--role", "P1"]), {})
	>>> cfg.Role, cfg.Peer
	(<Party.P1: 1>, 'h:1')
	>>> os.remove(f.name)
	"""
	layer = config.defaultsLayer()
	if args.command in COMMAND_DEFAULTS:
		layer = config.Environment(layer).Update(COMMAND_DEFAULTS[args.command])
	problems: typing.List[str] = []
	if getattr(args, "config", None):
		layer, problems = config.loadFile(args.config, layer)
	layer = flagLayer(args, config.environLayer(layer, environ))
	cfg, more = config.resolve(layer)
	return (cfg if not problems else None), problems + more

#### building a session ####
class Built(typing.NamedTuple):
	Config: config.RunConfig
	Scheme: pke.Scheme
	Cover: coverdist.CoverDist
	Session: protocol.Session

def build(cfg: config.RunConfig) -> Built:
	group = pke.readGroup(cfg.Group) if cfg.Group else None
	scheme = pke.makeScheme(cfg.Scheme, cfg.Params, group)
	cover = coverdist.parseCoverSpec(cfg.Cover, scheme.MsgBits, cfg.Corpus)
	session = protocol.Session(
		Params=cfg.Params,
		Scheme=scheme,
		Cover=cover,
		Mode=protocol.Mode(cfg.Mode),
		Messages=cfg.Messages,
		Senders=cfg.Senders,
		SeedMethod=protocol.SeedMethod(cfg.SeedMethod),
		IdleRounds=cfg.IdleRounds,
	)
	return Built(Config=cfg, Scheme=scheme, Cover=cover, Session=session)

def transcriptHeader(cfg: config.RunConfig) -> typing.Dict[str, typing.List[str]]:
	header = cfg.Header()
	header["cover"] = [cfg.Cover]
	header["seedmethod"] = [cfg.SeedMethod]
	return header

def emit(out: io.TextIOBase, cfg: config.RunConfig, rep: protocol.RunReport):
	text = rep.Render()
	out.write(text + "\n")
	if cfg.Report:
		with open(cfg.Report, "w") as f:
			f.write(text + "\n")
	if cfg.Transcript:
		wire.writeTranscript(cfg.Transcript, transcriptHeader(cfg), rep.Frames)

#### subcommands ####
def cmdRunLocal(cfg: config.RunConfig, out: io.TextIOBase) -> int:
	built = build(cfg)
	if cfg.Keys:
		for party, keys in built.Session.Keys(cfg.RngSeed).items():
			pke.saveKeys(os.path.join(cfg.Keys, str(party)), built.Scheme.Id, keys)
	try:
		rep = built.Session.Run(cfg.RngSeed)
	except errors.BudgetExhausted as e:
		if e.Report is not None:
			emit(out, cfg, e.Report)
		raise
	emit(out, cfg, rep)
	return 0

def cmdPeer(cfg: config.RunConfig, args: argparse.Namespace, out: io.TextIOBase) -> int:
	if args.command == "connect" and not cfg.Peer:
		raise errors.newError(errors.ConfigError, "connect needs a peer address (--peer or peer = host:port)")
	built = build(cfg)
	ctBits = built.Scheme.CtBits
	if args.command == "serve":
		link = transport.tcpServe(args.listen, ctBits)
	else:
		link = transport.tcpConnect(cfg.Peer, ctBits)
	engine = built.Session.Engine(cfg.Role, cfg.RngSeed)
	frames, events = transport.Drive(engine, link, built.Session.Rounds)
	emit(out, cfg, protocol.report(frames, events, engine))
	return 0

def cmdEavesdrop(cfg: config.RunConfig, args: argparse.Namespace, out: io.TextIOBase) -> int:
	tap = transport.tap(args.record, transcriptHeader(cfg))
	try:
		count = tap.Relay(args.listen, args.upstream)
	finally:
		tap.Close()
	out.write(f"recorded={count}\n")
	return 0

def cmdAttack(args: argparse.Namespace, out: io.TextIOBase) -> int:
	rep = selftest.attackDemo(t=args.t, encryptions=args.encryptions, trials=args.trials)
	out.write(rep.Render() + "\n")
	return 0

def observerKeys(transcript: wire.Transcript) -> typing.Tuple[pke.Scheme, typing.Optional[coverdist.CoverDist], typing.Dict[core.Party, core.BitStr], core.SecurityParams, typing.Optional[int]]:
	"""Rebuilds the published key directory a transcript was produced under."""
	h = transcript.Header
	params = core.resolveProfile(h.get("profile", ["desk"])[0])._replace(NCt=transcript.CtBits)
	scheme = pke.makeScheme(h.get("scheme", ["elg"])[0], params)
	cover = coverdist.parseCoverSpec(h["cover"][0], scheme.MsgBits) if "cover" in h else None
	session = protocol.Session(Params=params, Scheme=scheme, Cover=cover)
	keys = {p: k.Sk for p, k in session.Keys(h.get("rngseed", ["0"])[0]).items()}
	d = params.D if h.get("seedmethod", ["gt"])[0] == "gt" else None
	return scheme, cover, keys, params, d

def cmdBattery(args: argparse.Namespace, out: io.TextIOBase) -> int:
	a, b = wire.readTranscript(args.a), wire.readTranscript(args.b)
	scheme, cover, keysA, params, d = observerKeys(a)
	_, _, keysB, _, _ = observerKeys(b)
	rep = stats.battery(a.Frames, b.Frames, keysA, scheme=scheme, cover=cover, observerSkB=keysB, v=params.V, d=d, alpha=args.alpha)
	if args.format == "json":
		out.write(rep.Json() + "\n")
	elif args.format == "kv":
		out.write(rep.KeyValues() + "\n")
	else:
		out.write(rep.Render() + "\n")
	return 0 if rep.Verdict else RUN_ERROR

def cmdSelftest(args: argparse.Namespace, out: io.TextIOBase) -> int:
	setup = selftest.deskSetup() if args.profile == "desk" else selftest.tinySetup()
	results = selftest.runAll(scale=args.scale, setup=setup)
	for r in results:
		out.write(r.Render() + "\n")
	return 0 if all(r.Passed for r in results) else RUN_ERROR

def cmdBench(args: argparse.Namespace, out: io.TextIOBase) -> int:
	params = core.resolveProfile(args.profile)
	scheme = pke.makeScheme(args.scheme, params)
	setup = selftest.Setup(Params=params, Scheme=scheme, Cover=coverdist.uniformFlat(scheme.MsgBits, scheme.MsgBits))
	out.write(selftest.bench(setup, embeds=args.embeds).Render() + "\n")
	return 0

RUN_COMMANDS = {"run-local", "serve", "connect", "eavesdrop"}

def dispatch(args: argparse.Namespace, out: io.TextIOBase, environ=None) -> int:
	if args.command in RUN_COMMANDS:
		cfg, problems = runConfig(args, environ)
		if problems:
			printConfigErrors(out, problems)
			return USAGE_ERROR
		if args.command == "run-local":
			return cmdRunLocal(cfg, out)
		if args.command == "eavesdrop":
			return cmdEavesdrop(cfg, args, out)
		return cmdPeer(cfg, args, out)
	if args.command == "attack-demo":
		return cmdAttack(args, out)
	if args.command == "battery":
		return cmdBattery(args, out)
	if args.command == "selftest":
		return cmdSelftest(args, out)
	return cmdBench(args, out)

def main(argv: typing.Optional[typing.Sequence[str]] = None, out: typing.Optional[io.TextIOBase] = None, environ=None) -> int:
	out = out or sys.stdout
	parser = buildParser()
	try:
		args = parser.parse_args(argv)
	except UsageError as e:
		sys.stderr.write(f"{e}\n")
		return USAGE_ERROR
	if not args.command:
		parser.print_usage(sys.stderr)
		return USAGE_ERROR
	configureLogging(args.verbose)
	try:
		return dispatch(args, out, environ)
	except errors.Error as e:
		out.write(e.Inspect() + "\n")
		return RUN_ERROR
	except Exception:
		sys.stderr.write(traceback.format_exc())
		return RUN_ERROR
