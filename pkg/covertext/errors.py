"""
Error types raised by every covertext module.

>>> e = LengthMismatch(Message="lengths differ: 3 != 4")
>>> e.Inspect()
'ERROR: lengths differ: 3 != 4'
>>> isinstance(e, Error)
True
>>> BudgetExhausted(Attempts=16).Attempts
16
"""

import typing

class Error(Exception):
	def __init__(self, *args, Message: str = "", **kwargs):
		super().__init__(Message, *args)
		self.Message = Message

	def Inspect(self) -> str:
		return f"ERROR: {self.Message}"

	def __str__(self) -> str:
		return self.Message

#### core ####
class LengthMismatch(Error):
	pass

class UnknownProfile(Error):
	pass

class InvalidParams(Error):
	pass

class BadLength(Error):
	pass

#### pke ####
class MessageTooLong(Error):
	pass

class DecodeFailure(Error):
	pass

class BadK(Error):
	pass

#### extractors ####
class BadV(Error):
	pass

#### peer_crypto ####
class BadElement(Error):
	pass

class TooLong(Error):
	pass

#### protocol ####
class BudgetExhausted(Error):
	def __init__(self, *args, Attempts: int = 0, Round: typing.Optional[int] = None, Report: typing.Any = None, **kwargs):
		super().__init__(*args, **kwargs)
		self.Attempts = Attempts
		self.Round = Round
		# the run so far, when a whole session was being driven
		self.Report = Report

class NotEnoughFrames(Error):
	pass

class ProtocolDesync(Error):
	pass

class NotReady(Error):
	pass

class EntropyTooLow(Error):
	pass

#### stats ####
class DomainMismatch(Error):
	pass

class TooFewSamples(Error):
	pass

class ShapeMismatch(Error):
	pass

#### wire / transport / config ####
class BadMagic(Error):
	pass

class BadVersion(Error):
	pass

class Truncated(Error):
	pass

class TransportError(Error):
	pass

class ConfigError(Error):
	pass

def newError(cls: typing.Type[Error], msg: str, **kwargs) -> Error:
	"""
	Constructs a new error of the given kind with the given message.

	>>> newError(BadV, "v must be in [1, 32], got 40")
	BadV('v must be in [1, 32], got 40')
	"""
	return cls(Message=msg, **kwargs)
