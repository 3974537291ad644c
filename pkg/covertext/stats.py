"""
Estimators and the distinguisher battery behind every statistical claim.

>>> half = Pmf.Bernoulli(0.5)
>>> statDistance(half, Pmf.Bernoulli(0.625))
0.125
>>> gtBiasExact(flatSupport(2, 2))
0.125
"""

import collections
import json
import logging
import math
import typing

import numpy as np
from scipy.stats import chi2_contingency, chisquare, norm

from . import core
from . import coverdist
from . import errors
from . import extractors
from . import pke
from . import protocol

BitStr = core.BitStr
Party = core.Party

log = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-12
DEFAULT_ALPHA = 0.001

def valueOf(x) -> int:
	return x.ToInt() if isinstance(x, BitStr) else int(x)

#### distributions ####
class Pmf():
	"""
	A probability mass function over DomainBits-bit values, stored sparsely.

	>>> Pmf(DomainBits=1, Probs={0: 0.5, 1: 0.25})
	Traceback (most recent call last):
	...
	covertext.errors.InvalidParams: probabilities sum to 0.75, not 1
	"""
	def __init__(self, *args, DomainBits: int = 0, Probs: typing.Dict[int, float] = None, **kwargs):
		super().__init__(*args, **kwargs)
		probs = {k: float(p) for k, p in (Probs or {}).items() if p}
		if any(p < 0 for p in probs.values()):
			raise errors.newError(errors.InvalidParams, "negative probability")
		if any(k < 0 or k >> DomainBits for k in probs):
			raise errors.newError(errors.InvalidParams, f"value outside the {DomainBits}-bit domain")
		total = math.fsum(probs.values())
		if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
			raise errors.newError(errors.InvalidParams, f"probabilities sum to {total:g}, not 1")
		self.DomainBits = DomainBits
		self.Probs = probs

	@classmethod
	def FromDict(cls, mapping: typing.Dict, domainBits: int) -> 'Pmf':
		probs: typing.Dict[int, float] = collections.defaultdict(float)
		for k, p in mapping.items():
			probs[valueOf(k)] += p
		return cls(DomainBits=domainBits, Probs=dict(probs))

	@classmethod
	def FromSamples(cls, samples: typing.Iterable, domainBits: int) -> 'Pmf':
		counts = collections.Counter(valueOf(s) for s in samples)
		n = sum(counts.values())
		return cls(DomainBits=domainBits, Probs={k: c / n for k, c in counts.items()})

	@classmethod
	def Uniform(cls, domainBits: int) -> 'Pmf':
		return cls(DomainBits=domainBits, Probs={k: 2.0 ** -domainBits for k in range(2 ** domainBits)})

	@classmethod
	def Bernoulli(cls, p: float) -> 'Pmf':
		return cls(DomainBits=1, Probs={0: 1.0 - p, 1: p})

	def P(self, value) -> float:
		return self.Probs.get(valueOf(value), 0.0)

	def __repr__(self) -> str:
		return f"Pmf({self.DomainBits} bits, support={len(self.Probs)})"

def schemePmf(scheme: pke.Scheme, pk: BitStr, m: BitStr) -> Pmf:
	return Pmf.FromDict(scheme.Support(pk, m), scheme.CtBits)

def statDistance(p: Pmf, q: Pmf) -> float:
	"""
	Half the L1 distance.

	>>> u = Pmf.Uniform(2)
	>>> statDistance(u, u)
	0.0
	>>> statDistance(u, Pmf.Bernoulli(0.5))
	Traceback (most recent call last):
	...
	covertext.errors.DomainMismatch: cannot compare a 2-bit and a 1-bit distribution
	"""
	if p.DomainBits != q.DomainBits:
		raise errors.newError(errors.DomainMismatch, f"cannot compare a {p.DomainBits}-bit and a {q.DomainBits}-bit distribution")
	keys = set(p.Probs) | set(q.Probs)
	return 0.5 * math.fsum(abs(p.P(k) - q.P(k)) for k in keys)

def minEntropy(pmf: Pmf) -> float:
	"""
	>>> minEntropy(Pmf.Uniform(3))
	3.0
	"""
	return -math.log2(max(pmf.Probs.values()))

def renyi2(cp: float) -> float:
	"""Collision entropy -log2 CP; an upper bound on min-entropy, never a lower one."""
	return -math.log2(cp)

def flatSupport(k: int, m: int) -> typing.List[BitStr]:
	"""The 2^k lexicographically first m-bit strings."""
	return [BitStr.FromInt(i, m) for i in range(2 ** k)]

#### estimators ####
class CollisionEstimate(typing.NamedTuple):
	Value: float
	Variance: float

def collisionProb(samples: typing.Iterable) -> CollisionEstimate:
	"""
	Unbiased pair-counting estimate of sum_x Pr[X=x]^2 with the variance of the
	U-statistic.

	>>> collisionProb([7] * 50)
	CollisionEstimate(Value=1.0, Variance=0.0)
	>>> collisionProb([1, 2, 1, 2]).Value
	0.3333333333333333
	>>> collisionProb([1])
	Traceback (most recent call last):
	...
	covertext.errors.TooFewSamples: need at least 2 samples, got 1
	"""
	counts = np.array(list(collections.Counter(valueOf(s) for s in samples).values()), dtype=np.float64)
	n = counts.sum()
	if n < 2:
		raise errors.newError(errors.TooFewSamples, f"need at least 2 samples, got {int(n)}")
	cp = float((counts * (counts - 1)).sum() / (n * (n - 1)))
	p3 = float((counts * (counts - 1) * (counts - 2)).sum() / (n * (n - 1) * (n - 2))) if n >= 3 else cp * cp
	variance = (4 * (n - 2) * (p3 - cp * cp) + 2 * (cp - cp * cp)) / (n * (n - 1))
	return CollisionEstimate(Value=cp, Variance=max(0.0, float(variance)))

def gtBiasExact(support: typing.Sequence[BitStr]) -> float:
	"""
	|Pr[X >= Y] - 1/2| for X, Y i.i.d. uniform over support, which equals CP/2.

	>>> gtBiasExact([BitStr.FromInt(5, 3)])
	0.5
	>>> all(gtBiasExact(flatSupport(k, 6)) == 2.0 ** (-k - 1) for k in range(7))
	True
	"""
	if not support:
		raise errors.newError(errors.TooFewSamples, "empty support")
	values = np.sort(np.array([s.ToInt() for s in support], dtype=np.int64))
	n = len(values)
	atLeast = int(np.searchsorted(values, values, side="right").sum())
	return abs(atLeast / (n * n) - 0.5)

def bucketOf(sample, bits: int) -> int:
	if isinstance(sample, BitStr):
		return sample.Slice(0, bits).PadTo(bits).ToInt() if sample.LenBits >= bits else sample.ToInt()
	return int(sample) & ((1 << bits) - 1)

def bucketCounts(samples: typing.Sequence, bits: int) -> np.ndarray:
	return np.bincount(np.array([bucketOf(s, bits) for s in samples], dtype=np.int64), minlength=2 ** bits)

def chiSquare(samples: typing.Sequence, bucketBits: int) -> float:
	"""
	Pearson goodness of fit of the leading bucketBits bits against uniform.

	>>> chiSquare([BitStr.FromInt(3, 4)] * 200, 4) < 1e-12
	True
	>>> chiSquare(list(range(16)) * 10, 4)
	1.0
	>>> chiSquare([1, 2, 3], 4)
	Traceback (most recent call last):
	...
	covertext.errors.TooFewSamples: chi-square over 16 buckets needs 80 samples, got 3
	"""
	need = 5 * 2 ** bucketBits
	if len(samples) < need:
		raise errors.newError(errors.TooFewSamples, f"chi-square over {2 ** bucketBits} buckets needs {need} samples, got {len(samples)}")
	return float(chisquare(bucketCounts(samples, bucketBits)).pvalue)

def bitMatrix(values: typing.Sequence[BitStr]) -> np.ndarray:
	"""
	>>> bitMatrix([BitStr.FromInt(0b101, 3), BitStr.FromInt(0b011, 3)]).tolist()
	[[1, 0, 1], [0, 1, 1]]
	"""
	width = values[0].LenBits
	if any(v.LenBits != width for v in values):
		raise errors.newError(errors.ShapeMismatch, "bit strings of different widths")
	raw = np.frombuffer(b"".join(v.Payload for v in values), dtype=np.uint8).reshape(len(values), -1)
	return np.unpackbits(raw, axis=1)[:, :width]

def positionZ(bits: np.ndarray) -> np.ndarray:
	"""
	Per-column z-scores of the ones count against Binomial(n, 1/2).

	>>> positionZ(np.array([[1, 0], [1, 1], [1, 0], [1, 1]])).tolist()
	[2.0, 0.0]
	"""
	n = bits.shape[0]
	return (bits.sum(axis=0) - n / 2) / math.sqrt(n / 4)

def maxCorrelation(bits: np.ndarray) -> float:
	"""
	Largest |rho| between two distinct columns; constant columns count as 0.

	>>> round(maxCorrelation(np.array([[0, 0, 1], [1, 1, 1], [0, 0, 1], [1, 1, 1]])), 12)
	1.0
	"""
	with np.errstate(invalid="ignore", divide="ignore"):
		rho = np.corrcoef(bits.astype(np.float64), rowvar=False)
	rho = np.nan_to_num(rho)
	np.fill_diagonal(rho, 0.0)
	return float(np.max(np.abs(rho)))

#### exact hiding ####
def hidingDistance(scheme: pke.Scheme, pk: BitStr, m: BitStr, hashSeed: extractors.HashSeed, v: int, target: str = "uniform") -> float:
	"""
	Distance between plain encryption of m and the rejection sampler's output,
	both computed exactly from the scheme's ciphertext pmf. With target="fresh"
	the target is the extractor of an independent encryption, which reproduces
	the plain distribution for every seed; with target="uniform" it does so
	whenever the extractor is balanced on the ciphertexts of m.

	>>> import random
	>>> s = pke.tinyScheme()
	>>> keys = s.Gen(random.Random(0))
	>>> seed = extractors.HashSeed(A=1 << 6, B=3)
	>>> hidingDistance(s, keys.Pk, BitStr.FromInt(1, 2), seed, 2)
	0.0
	>>> hidingDistance(s, keys.Pk, BitStr.FromInt(1, 2), extractors.HashSeed(A=1, B=0), 2, target="fresh")
	0.0
	>>> hidingDistance(s, keys.Pk, BitStr.FromInt(1, 2), extractors.HashSeed(A=1, B=0), 2)
	Traceback (most recent call last):
	...
	covertext.errors.BudgetExhausted: 3 of 4 targets have no ciphertext
	"""
	base = scheme.Support(pk, m)
	fibers: typing.Dict[int, typing.Dict[BitStr, float]] = collections.defaultdict(dict)
	for c, p in base.items():
		fibers[extractors.extSeeded(hashSeed, c, v).ToInt()][c] = p
	mass = {t: math.fsum(f.values()) for t, f in fibers.items()}
	if target == "fresh":
		weights = mass
	else:
		missing = 2 ** v - len(fibers)
		if missing:
			raise errors.newError(errors.BudgetExhausted, f"{missing} of {2 ** v} targets have no ciphertext")
		weights = {t: 2.0 ** -v for t in fibers}
	out: typing.Dict[BitStr, float] = {}
	for t, fiber in fibers.items():
		for c, p in fiber.items():
			out[c] = weights[t] * p / mass[t]
	return statDistance(Pmf.FromDict(base, scheme.CtBits), Pmf.FromDict(out, scheme.CtBits))

#### the battery ####
class TestResult(typing.NamedTuple):
	Name: str
	Statistic: typing.Optional[float]
	PValue: typing.Optional[float]
	Note: str = ""

	def Passed(self, threshold: float) -> bool:
		return self.PValue is None or self.PValue > threshold

class BatteryReport(typing.NamedTuple):
	Tests: typing.List[TestResult]
	Alpha: float

	@property
	def Threshold(self) -> float:
		run = sum(1 for t in self.Tests if t.PValue is not None)
		return self.Alpha / max(1, run)

	@property
	def Verdict(self) -> bool:
		return all(t.Passed(self.Threshold) for t in self.Tests)

	def Test(self, name: str) -> TestResult:
		for t in self.Tests:
			if t.Name == name:
				return t
		raise KeyError(name)

	def Render(self) -> str:
		lines = []
		for t in self.Tests:
			if t.PValue is None:
				lines.append(f"{t.Name:<24} skipped {t.Note}".rstrip())
				continue
			verdict = "pass" if t.Passed(self.Threshold) else "FAIL"
			lines.append(f"{t.Name:<24} stat={t.Statistic:.4g} p={t.PValue:.3g} {verdict} {t.Note}".rstrip())
		lines.append(f"verdict={'pass' if self.Verdict else 'fail'} alpha={self.Alpha:g} threshold={self.Threshold:.3g}")
		return "\n".join(lines)

	def KeyValues(self) -> str:
		lines = [f"alpha={self.Alpha:g}", f"threshold={self.Threshold:g}", f"verdict={'pass' if self.Verdict else 'fail'}"]
		for t in self.Tests:
			lines.append(f"{t.Name}.statistic={'' if t.Statistic is None else repr(t.Statistic)}")
			lines.append(f"{t.Name}.p={'' if t.PValue is None else repr(t.PValue)}")
		return "\n".join(lines)

	def Json(self) -> str:
		return json.dumps({
			"alpha": self.Alpha,
			"threshold": self.Threshold,
			"verdict": "pass" if self.Verdict else "fail",
			"tests": [{"name": t.Name, "statistic": t.Statistic, "p": t.PValue, "passed": t.Passed(self.Threshold), "note": t.Note} for t in self.Tests],
		}, indent=2)

def twoProportionZ(onesA: np.ndarray, nA: int, onesB: np.ndarray, nB: int) -> np.ndarray:
	pooled = (onesA + onesB) / (nA + nB)
	spread = np.sqrt(pooled * (1 - pooled) * (1 / nA + 1 / nB))
	with np.errstate(invalid="ignore", divide="ignore"):
		z = np.where(spread > 0, (onesA / nA - onesB / nB) / np.where(spread > 0, spread, 1), 0.0)
	return z

def homogeneity(countsA: np.ndarray, countsB: np.ndarray) -> typing.Tuple[float, float]:
	table = np.vstack([countsA, countsB])
	table = table[:, table.sum(axis=0) > 0]
	if table.shape[1] < 2:
		return 0.0, 1.0
	stat, p, _, _ = chi2_contingency(table)
	return float(stat), float(p)

def decryptCheck(frames: typing.Sequence[core.TranscriptFrame], scheme: pke.Scheme, cover: typing.Optional[coverdist.CoverDist], keys: typing.Dict[Party, BitStr]) -> int:
	bad = 0
	for f in frames:
		try:
			m = scheme.Dec(keys[f.Party.Peer], f.Ciphertext)
		except errors.DecodeFailure:
			bad += 1
			continue
		if cover is not None and not cover.InSupport(m):
			bad += 1
	return bad

def transcriptSeed(frames: typing.Sequence[core.TranscriptFrame], seedHint: typing.Optional[extractors.HashSeed], d: typing.Optional[int]) -> typing.Optional[extractors.HashSeed]:
	if seedHint is not None:
		return seedHint
	if d is None:
		return None
	return extractors.seedFromBits(extractors.expandSeedBits(protocol.computeSeedBits(frames, d)))

def lagCorrelation(values: typing.Sequence[int]) -> typing.Tuple[float, int]:
	x = np.array(values, dtype=np.float64)
	if len(x) < 4 or x[:-1].std() == 0 or x[1:].std() == 0:
		return 0.0, len(x) - 1
	return float(np.corrcoef(x[:-1], x[1:])[0, 1]), len(x) - 1

def gtPairBits(frames: typing.Sequence[core.TranscriptFrame]) -> np.ndarray:
	bits = []
	for party in (Party.P0, Party.P1):
		cts = [f.Ciphertext for f in sorted(frames, key=lambda f: f.Round) if f.Party is party]
		bits += [extractors.gt(cts[i], cts[i + 1]) for i in range(0, len(cts) - 1, 2)]
	return np.array(bits, dtype=np.int64)

def battery(transcriptA: typing.Sequence[core.TranscriptFrame], transcriptB: typing.Sequence[core.TranscriptFrame],
		observerSk: typing.Optional[typing.Dict[Party, BitStr]] = None, seedHint: typing.Optional[extractors.HashSeed] = None, *,
		scheme: typing.Optional[pke.Scheme] = None, cover: typing.Optional[coverdist.CoverDist] = None,
		observerSkB: typing.Optional[typing.Dict[Party, BitStr]] = None, v: int = 4, d: typing.Optional[int] = None,
		alpha: float = DEFAULT_ALPHA) -> BatteryReport:
	"""
	Compares two transcripts with a fixed family of two-sample tests and a
	Bonferroni-corrected threshold. observerSk maps each party to the secret
	key that decrypts the frames sent to it; observerSkB does the same for the
	second transcript when it ran under other keys. Without a seed hint the
	extractor seed of each transcript is recomputed from its own seed rounds
	when d is given.

	The naive strawman is caught by the extractor test:

	>>> params = core.resolveProfile("tiny")._replace(NCt=24)
	>>> scheme = pke.lowentScheme(8, msgBits=8, ctBits=24)
	>>> cover = coverdist.uniformFlat(8, 8)
	>>> run = lambda mode: protocol.Session(Params=params, Scheme=scheme, Cover=cover, Mode=mode, IdleRounds=48)
	>>> honest, naive = run(protocol.Mode.HONEST), run(protocol.Mode.NAIVE)
	>>> keysH = {p: k.Sk for p, k in honest.Keys("h").items()}
	>>> keysN = {p: k.Sk for p, k in naive.Keys("n").items()}
	>>> r = battery(honest.Run("h").Frames, naive.Run("n").Frames, keysH, scheme=scheme, cover=cover, observerSkB=keysN, v=2, d=8)
	>>> [t.Name for t in r.Tests]
	['decrypt', 'bit-frequency', 'prefix', 'extractor', 'gt-pairs', 'extractor-correlation']
	>>> r.Test("decrypt").PValue, r.Test("extractor").PValue < 1e-9, r.Verdict
	(1.0, True, False)
	"""
	if len(transcriptA) != len(transcriptB):
		raise errors.newError(errors.ShapeMismatch, f"transcripts have {len(transcriptA)} and {len(transcriptB)} frames")
	if not transcriptA:
		raise errors.newError(errors.ShapeMismatch, "empty transcripts")
	width = transcriptA[0].Ciphertext.LenBits
	if any(f.Ciphertext.LenBits != width for f in list(transcriptA) + list(transcriptB)):
		raise errors.newError(errors.ShapeMismatch, "transcripts mix ciphertext widths")
	n = len(transcriptA)
	tests: typing.List[TestResult] = []

	if scheme is not None and observerSk is not None:
		bad = decryptCheck(transcriptA, scheme, cover, observerSk) + decryptCheck(transcriptB, scheme, cover, observerSkB or observerSk)
		tests.append(TestResult("decrypt", float(bad), 1.0 if bad == 0 else 0.0, f"{bad} frames off the cover support"))
	else:
		tests.append(TestResult("decrypt", None, None, "no observer keys"))

	bitsA = bitMatrix([f.Ciphertext for f in transcriptA])
	bitsB = bitMatrix([f.Ciphertext for f in transcriptB])
	z = twoProportionZ(bitsA.sum(axis=0), n, bitsB.sum(axis=0), n)
	worst = float(np.max(np.abs(z)))
	tests.append(TestResult("bit-frequency", worst, min(1.0, width * 2 * float(norm.sf(worst))), f"max |z| over {width} positions"))

	prefixBits = min(8, width)
	stat, p = homogeneity(bucketCounts([f.Ciphertext for f in transcriptA], prefixBits), bucketCounts([f.Ciphertext for f in transcriptB], prefixBits))
	tests.append(TestResult("prefix", stat, p, f"leading {prefixBits} bits"))

	seedA, seedB = transcriptSeed(transcriptA, seedHint, d), transcriptSeed(transcriptB, seedHint, d)
	if seedA is None or seedB is None:
		tests.append(TestResult("extractor", None, None, "no seed"))
	else:
		extA = [extractors.extSeeded(seedA, f.Ciphertext, v).ToInt() for f in transcriptA]
		extB = [extractors.extSeeded(seedB, f.Ciphertext, v).ToInt() for f in transcriptB]
		stat, p = homogeneity(np.bincount(extA, minlength=2 ** v), np.bincount(extB, minlength=2 ** v))
		tests.append(TestResult("extractor", stat, p, f"v={v}"))

	gtA, gtB = gtPairBits(transcriptA), gtPairBits(transcriptB)
	zgt = float(twoProportionZ(np.array(gtA.sum()), len(gtA), np.array(gtB.sum()), len(gtB))) if len(gtA) and len(gtB) else 0.0
	tests.append(TestResult("gt-pairs", zgt, float(2 * norm.sf(abs(zgt))), f"{len(gtA)} pairs each"))

	if seedA is None or seedB is None:
		tests.append(TestResult("extractor-correlation", None, None, "no seed"))
	else:
		rhos = []
		for frames, seed in ((transcriptA, seedA), (transcriptB, seedB)):
			parts = [lagCorrelation([extractors.extSeeded(seed, f.Ciphertext, v).ToInt() for f in frames if f.Party is party]) for party in (Party.P0, Party.P1)]
			rhos.append(parts)
		zs = []
		for (ra, na), (rb, nb) in zip(rhos[0], rhos[1]):
			if na > 3 and nb > 3:
				zs.append((math.atanh(max(-0.999999, min(0.999999, ra))) - math.atanh(max(-0.999999, min(0.999999, rb)))) / math.sqrt(1 / (na - 3) + 1 / (nb - 3)))
		zc = max((abs(x) for x in zs), default=0.0)
		tests.append(TestResult("extractor-correlation", zc, min(1.0, 2 * len(zs) * float(norm.sf(zc))), "lag-1, per party"))

	report = BatteryReport(Tests=tests, Alpha=alpha)
	log.info("battery over %d frames: %s", n, "pass" if report.Verdict else "fail")
	return report
