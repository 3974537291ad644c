"""
Run configuration: a tiny `key = value` language, scoped lookup and the
RunConfig it resolves to.

A config file holds one pair per line; `#` starts a comment. Values are single
words (anything but whitespace, `=`, `,` and `#`) and a value list is written
with commas. Transcript headers use the same grammar on one line, with commas
between the pairs.

>>> p = Parser(Lexer("profile = tiny\\nmsg = aa, bb  # two messages\\n"))
>>> p.ParsePairs()
{'profile': ['tiny'], 'msg': ['aa', 'bb']}
>>> p.Errors()
[]
"""

import enum
import os
import typing

from . import core
from . import errors

#### tokens ####
class TokenType(enum.Enum):
	ILLEGAL = "ILLEGAL"
	EOF = "EOF"
	NEWLINE = "NEWLINE"

	WORD = "WORD"

	ASSIGN = "="
	COMMA = ","

class Token():
	def __init__(self, Type: TokenType = TokenType.ILLEGAL, Literal: str = "", Line: int = 1):
		self.Type = Type
		self.Literal = Literal
		self.Line = Line

	def __repr__(self) -> str:
		return f"Token(Type='{self.Type}', Literal='{self.Literal}')"

WORD_STOP = " \t\r\n=,#"
EOF_CHAR = ""

class Lexer():
	"""
	>>> l = Lexer("cover=uniform:4, peer = 127.0.0.1:7000")
	>>> [l.NextToken() for _ in range(8)]
	[Token(Type='TokenType.WORD', Literal='cover'), Token(Type='TokenType.ASSIGN', Literal='='), Token(Type='TokenType.WORD', Literal='uniform:4'), Token(Type='TokenType.COMMA', Literal=','), Token(Type='TokenType.WORD', Literal='peer'), Token(Type='TokenType.ASSIGN', Literal='='), Token(Type='TokenType.WORD', Literal='127.0.0.1:7000'), Token(Type='TokenType.EOF', Literal='')]
	"""
	def __init__(self, input: str):
		self.input = input
		self.position = 0
		self.readPosition = 0
		self.line = 1
		self.ch = EOF_CHAR
		self.readChar()

	def readChar(self):
		if self.readPosition >= len(self.input):
			self.ch = EOF_CHAR
		else:
			self.ch = self.input[self.readPosition]
		self.position = self.readPosition
		self.readPosition += 1

	def skipBlanks(self):
		while self.ch and self.ch in " \t\r":
			self.readChar()

	def skipComment(self):
		while self.ch and self.ch != "\n":
			self.readChar()

	def readWord(self) -> str:
		pos = self.position
		while self.ch and self.ch not in WORD_STOP:
			self.readChar()
		return self.input[pos:self.position]

	def NextToken(self) -> Token:
		self.skipBlanks()
		if self.ch == "#":
			self.skipComment()
		line = self.line
		if self.ch == EOF_CHAR:
			return Token(TokenType.EOF, "", line)
		if self.ch == "\n":
			self.line += 1
			self.readChar()
			return Token(TokenType.NEWLINE, "\\n", line)
		if self.ch == "=":
			self.readChar()
			return Token(TokenType.ASSIGN, "=", line)
		if self.ch == ",":
			self.readChar()
			return Token(TokenType.COMMA, ",", line)
		return Token(TokenType.WORD, self.readWord(), line)

	def Tokens(self) -> typing.List[Token]:
		out = []
		while True:
			tok = self.NextToken()
			out.append(tok)
			if tok.Type is TokenType.EOF:
				return out

#### parsing ####
class Parser():
	"""
	Parses pairs and collects every problem instead of stopping at the first.

	>>> p = Parser(Lexer("profile=desk, mode=honest, rngseed=7"))
	>>> p.ParsePairs()
	{'profile': ['desk'], 'mode': ['honest'], 'rngseed': ['7']}
	>>> p = Parser(Lexer("= tiny\\nprofile tiny\\nmode=\\n"))
	>>> p.ParsePairs()
	{}
	>>> for e in p.Errors(): print(e)
	line 1: expected a key, got '='
	line 2: expected '=' after profile, got 'tiny'
	line 3: mode has no value
	"""
	def __init__(self, l: Lexer):
		self.tokens = l.Tokens()
		self.pos = 0
		self.errors: typing.List[str] = []

	@property
	def curToken(self) -> Token:
		return self.tokens[self.pos]

	@property
	def peekToken(self) -> Token:
		return self.tokens[min(self.pos + 1, len(self.tokens) - 1)]

	def tokenAt(self, offset: int) -> Token:
		return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

	def nextToken(self):
		if self.pos < len(self.tokens) - 1:
			self.pos += 1

	def curTokenIs(self, t: TokenType) -> bool:
		return self.curToken.Type is t

	def peekTokenIs(self, t: TokenType) -> bool:
		return self.peekToken.Type is t

	def Errors(self) -> typing.List[str]:
		return self.errors

	def error(self, msg: str):
		self.errors.append(f"line {self.curToken.Line}: {msg}")

	def skipLine(self):
		while not (self.curTokenIs(TokenType.NEWLINE) or self.curTokenIs(TokenType.EOF)):
			self.nextToken()

	def startsPair(self, offset: int) -> bool:
		return self.tokenAt(offset).Type is TokenType.WORD and self.tokenAt(offset + 1).Type is TokenType.ASSIGN

	def ParsePairs(self) -> typing.Dict[str, typing.List[str]]:
		pairs: typing.Dict[str, typing.List[str]] = {}
		while not self.curTokenIs(TokenType.EOF):
			if self.curTokenIs(TokenType.NEWLINE) or self.curTokenIs(TokenType.COMMA):
				self.nextToken()
				continue
			parsed = self.parsePair()
			if parsed is None:
				self.skipLine()
				continue
			key, values = parsed
			pairs.setdefault(key, []).extend(values)
		return pairs

	def parsePair(self) -> typing.Optional[typing.Tuple[str, typing.List[str]]]:
		if not self.curTokenIs(TokenType.WORD):
			self.error(f"expected a key, got '{self.curToken.Literal}'")
			return None
		key = self.curToken.Literal
		if not self.peekTokenIs(TokenType.ASSIGN):
			self.nextToken()
			self.error(f"expected '=' after {key}, got '{self.curToken.Literal}'")
			return None
		self.nextToken()
		self.nextToken()
		if not self.curTokenIs(TokenType.WORD):
			self.error(f"{key} has no value")
			return None
		values = [self.curToken.Literal]
		self.nextToken()
		# a comma continues the list unless it introduces the next pair
		while self.curTokenIs(TokenType.COMMA) and self.peekTokenIs(TokenType.WORD) and not self.startsPair(1):
			self.nextToken()
			values.append(self.curToken.Literal)
			self.nextToken()
		return key, values

def parseText(text: str) -> typing.Tuple[typing.Dict[str, typing.List[str]], typing.List[str]]:
	p = Parser(Lexer(text))
	pairs = p.ParsePairs()
	return pairs, p.Errors()

def renderPairs(pairs: typing.Dict[str, typing.Sequence[str]], sep: str = ", ") -> str:
	"""
	>>> renderPairs({"profile": ["tiny"], "msg": ["aa", "bb"]})
	'profile=tiny, msg=aa,bb'
	"""
	return sep.join(f"{k}={','.join(v)}" for k, v in pairs.items())

#### scoped lookup ####
class Environment():
	"""
	One configuration layer. Lookups fall through to the outer layer.

	>>> defaults = Environment()
	>>> _ = defaults.Set("profile", ["desk"])
	>>> flags = Environment(defaults)
	>>> _ = flags.Set("profile", ["tiny"])
	>>> flags.Get("profile"), Environment(defaults).Get("mode")
	((['tiny'], True), (None, False))
	"""
	def __init__(self, outer: 'Environment' = None):
		self.store: typing.Dict[str, typing.List[str]] = {}
		self.outer: Environment = outer

	def Get(self, name: str) -> typing.Tuple[typing.Optional[typing.List[str]], bool]:
		if name in self.store:
			return self.store[name], True
		if self.outer:
			return self.outer.Get(name)
		return None, False

	def Set(self, name: str, val: typing.List[str]) -> typing.List[str]:
		self.store[name] = val
		return val

	def Update(self, pairs: typing.Dict[str, typing.Sequence[str]]) -> 'Environment':
		for k, v in pairs.items():
			self.Set(k, list(v))
		return self

	def Value(self, name: str, default: typing.Optional[str] = None) -> typing.Optional[str]:
		vals, ok = self.Get(name)
		return vals[-1] if ok and vals else default

	def Values(self, name: str) -> typing.List[str]:
		vals, ok = self.Get(name)
		return list(vals) if ok else []

ENV_PREFIX = "COVERTEXT_"
ENV_KEYS = {"RNG_SEED": "rngseed", "PROFILE": "profile", "CORPUS": "corpus"}

def environLayer(outer: Environment, environ: typing.Optional[typing.Mapping[str, str]] = None) -> Environment:
	"""
	Overrides from COVERTEXT_RNG_SEED and friends. Command-line flags sit above
	this layer.

	>>> base = Environment().Update({"rngseed": ["1"]})
	>>> environLayer(base, {"COVERTEXT_RNG_SEED": "99"}).Value("rngseed")
	'99'
	>>> environLayer(base, {}).Value("rngseed")
	'1'
	"""
	environ = os.environ if environ is None else environ
	env = Environment(outer)
	for suffix, key in ENV_KEYS.items():
		if ENV_PREFIX + suffix in environ:
			env.Set(key, [environ[ENV_PREFIX + suffix]])
	return env

#### the resolved configuration ####
KNOWN_KEYS = {
	"profile", "scheme", "cover", "mode", "rngseed", "role", "peer", "msg", "senders",
	"seedmethod", "idle", "transcript", "report", "keys", "group", "corpus",
}

DEFAULTS = {
	"profile": ["desk"],
	"scheme": ["elg"],
	"cover": ["uniform"],
	"mode": ["subliminal"],
	"rngseed": ["0"],
	"role": ["P0"],
	"seedmethod": ["gt"],
	"idle": ["0"],
}

class RunConfig(typing.NamedTuple):
	Profile: str
	Params: core.SecurityParams
	Scheme: str
	Cover: str
	Mode: str
	RngSeed: str
	Role: core.Party
	Peer: str
	Messages: typing.List[core.BitStr]
	Senders: typing.List[core.Party]
	SeedMethod: str
	IdleRounds: int
	Transcript: typing.Optional[str]
	Report: typing.Optional[str]
	Keys: typing.Optional[str]
	Group: typing.Optional[str]
	Corpus: typing.Optional[str]

	def Header(self) -> typing.Dict[str, typing.List[str]]:
		"""The pairs written at the top of a transcript file."""
		return {
			"profile": [self.Profile],
			"scheme": [self.Scheme],
			"mode": [self.Mode],
			"rngseed": [self.RngSeed],
			"ctbits": [str(self.Params.NCt)],
		}

def defaultsLayer() -> Environment:
	return Environment().Update(DEFAULTS)

def loadFile(path: str, outer: Environment) -> typing.Tuple[Environment, typing.List[str]]:
	try:
		with open(path, encoding="utf-8") as f:
			text = f.read()
	except OSError as e:
		return Environment(outer), [f"{path}: {e.strerror}"]
	pairs, problems = parseText(text)
	return Environment(outer).Update(pairs), [f"{path}: {p}" for p in problems]

def parseParty(name: str) -> core.Party:
	try:
		return core.Party[name.upper()]
	except KeyError:
		raise errors.newError(errors.ConfigError, f"unknown party: {name}") from None

def resolve(env: Environment) -> typing.Tuple[typing.Optional[RunConfig], typing.List[str]]:
	"""
	Validates every layer at once and returns the RunConfig, or None with the
	list of problems.

	>>> env = defaultsLayer().Update({"profile": ["tiny"], "msg": ["aa", "bb"], "senders": ["P0", "P1"]})
	>>> cfg, problems = resolve(env)
	>>> cfg.Params.NCt, [m.Hex() for m in cfg.Messages], cfg.Senders, problems
	(8, ['8:aa', '8:bb'], [<Party.P0: 0>, <Party.P1: 1>], [])
	>>> cfg, problems = resolve(defaultsLayer().Update({"profile": ["huge"], "msg": ["abc"], "colour": ["red"]}))
	>>> cfg is None
	True
	>>> for p in problems: print(p)
	unknown key: colour
	unknown profile: huge
	"""
	problems: typing.List[str] = []
	keys: typing.Set[str] = set()
	layer = env
	while layer is not None:
		keys |= set(layer.store)
		layer = layer.outer
	problems += [f"unknown key: {k}" for k in sorted(keys - KNOWN_KEYS)]

	try:
		prof = core.profile(env.Value("profile"))
	except errors.Error as e:
		problems.append(e.Message)
		return None, problems
	params = prof.Resolved

	messages: typing.List[core.BitStr] = []
	for text in env.Values("msg"):
		try:
			m = core.BitStr.FromHex(text)
		except (ValueError, errors.Error):
			problems.append(f"message {text} is not hex")
			continue
		if m.LenBits != params.Kappa:
			problems.append(f"message {text} has {m.LenBits} bits, the profile hides {params.Kappa}")
		messages.append(m)

	senders: typing.List[core.Party] = []
	try:
		role = parseParty(env.Value("role", "P0"))
		senders = [parseParty(s) for s in env.Values("senders")] or [core.Party.P0] * len(messages)
	except errors.Error as e:
		problems.append(e.Message)
		role = core.Party.P0
	if messages and len(senders) != len(messages):
		problems.append(f"{len(senders)} senders for {len(messages)} messages")

	mode = env.Value("mode")
	if mode not in ("honest", "subliminal", "naive"):
		problems.append(f"unknown mode: {mode}")
	seedMethod = env.Value("seedmethod")
	if seedMethod not in ("gt", "minentropy"):
		problems.append(f"unknown seed method: {seedMethod}")
	idle = env.Value("idle", "0")
	if not idle.isdigit():
		problems.append(f"idle rounds must be a non-negative integer, got {idle}")

	if problems:
		return None, problems
	return RunConfig(
		Profile=prof.Name.value,
		Params=params,
		Scheme=env.Value("scheme"),
		Cover=env.Value("cover"),
		Mode=mode,
		RngSeed=env.Value("rngseed"),
		Role=role,
		Peer=env.Value("peer"),
		Messages=messages,
		Senders=senders,
		SeedMethod=seedMethod,
		IdleRounds=int(idle),
		Transcript=env.Value("transcript"),
		Report=env.Value("report"),
		Keys=env.Value("keys"),
		Group=env.Value("group"),
		Corpus=env.Value("corpus"),
	), []
