"""
The acceptance checks, each scaled by a factor so that doctests run them small
and the `selftest` subcommand runs them at full size.

>>> [r.Passed for r in (checkGtBound(maxM=6), checkExactHiding(seeds=8), checkPrimitives(scale=0.001))]
[True, True, True]
"""

import logging
import math
import random
import time
import typing

import numpy as np
from scipy.stats import norm

from . import core
from . import coverdist
from . import errors
from . import extractors
from . import peer_crypto
from . import pke
from . import protocol
from . import stats

BitStr = core.BitStr
Party = core.Party

log = logging.getLogger(__name__)

# per-position threshold for seed bits; 4 sigma keeps 128 positions quiet
BIT_SIGMAS = 4.0

class CheckResult(typing.NamedTuple):
	Name: str
	Passed: bool
	Detail: str

	def Render(self) -> str:
		return f"{'ok  ' if self.Passed else 'FAIL'} {self.Name}: {self.Detail}"

class Setup(typing.NamedTuple):
	"""A profile with a matching scheme and cover distribution."""
	Params: core.SecurityParams
	Scheme: pke.Scheme
	Cover: coverdist.CoverDist

def deskSetup() -> Setup:
	params = core.resolveProfile("desk")
	scheme = pke.makeScheme("elg", params)
	return Setup(Params=params, Scheme=scheme, Cover=coverdist.uniformFlat(scheme.MsgBits, scheme.MsgBits))

def tinySetup() -> Setup:
	"""The tiny profile widened to 24-bit ciphertexts of an 8-bit-nonce scheme."""
	params = core.resolveProfile("tiny")._replace(NCt=24)
	return Setup(Params=params, Scheme=pke.lowentScheme(8, msgBits=8, ctBits=24), Cover=coverdist.uniformFlat(8, 8))

def scaled(n: int, scale: float, floor: int = 1) -> int:
	return max(floor, int(round(n * scale)))

#### exact oracles ####
def checkGtBound(maxM: int = 10, randomSupports: int = 4, rngSeed: str = "gt") -> CheckResult:
	"""Every flat support of size 2^k has GT bias exactly 2^(-k-1)."""
	rng = random.Random(rngSeed)
	bad = []
	for m in range(1, maxM + 1):
		for k in range(m + 1):
			supports = [stats.flatSupport(k, m)]
			supports += [[BitStr.FromInt(x, m) for x in rng.sample(range(2 ** m), 2 ** k)] for _ in range(randomSupports)]
			for support in supports:
				if stats.gtBiasExact(support) != 2.0 ** (-k - 1):
					bad.append((m, k))
	return CheckResult("gt-bound", not bad, f"m <= {maxM}, {len(bad)} supports off the bound")

def checkCorrectness(trials: int = 10 ** 4, rngSeed: str = "sigma", budget: int = 1024) -> CheckResult:
	"""
	recombine inverts the rejection sampler and every output decrypts to its
	cover message.

	>>> checkCorrectness(trials=40).Passed
	True
	"""
	rng = random.Random(rngSeed)
	scheme = pke.lowentScheme(16, msgBits=8, ctBits=40)
	keys = scheme.Gen(rng)
	failures = 0
	for i in range(trials):
		v = (2, 4)[i % 2]
		seed = extractors.HashSeed.Random(rng)
		secret = BitStr.Random(rng, 16)
		frames, plaintexts = [], []
		try:
			for block in secret.Chunks(v):
				m = BitStr.Random(rng, 8)
				c, _ = protocol.rejectionSample(scheme, keys.Pk, m, seed, block, budget, rng)
				frames.append(c)
				plaintexts.append(m)
		except errors.BudgetExhausted:
			failures += 1
			continue
		if protocol.recombine(seed, frames, v) != secret or any(scheme.Dec(keys.Sk, c) != m for c, m in zip(frames, plaintexts)):
			failures += 1
	return CheckResult("sigma-correctness", failures == 0, f"{trials} trials at v in {{2, 4}}, {failures} failures")

def checkExactHiding(seeds: int = 64, rngSeed: str = "hiding") -> CheckResult:
	"""
	On the tiny scheme the rejection sampler reproduces plain encryption exactly
	whenever every target is reachable; a fresh-encryption target does so for
	every seed.
	"""
	rng = random.Random(rngSeed)
	scheme = pke.tinyScheme()
	keys = scheme.Gen(rng)
	worst, skipped = 0.0, 0
	hashSeeds = [extractors.HashSeed(A=1 << 6, B=rng.getrandbits(64))] + [extractors.HashSeed.Random(rng) for _ in range(seeds - 1)]
	for seed in hashSeeds:
		for m in scheme.Messages():
			worst = max(worst, stats.hidingDistance(scheme, keys.Pk, m, seed, 2, target="fresh"))
			try:
				worst = max(worst, stats.hidingDistance(scheme, keys.Pk, m, seed, 2))
			except errors.BudgetExhausted:
				skipped += 1
	return CheckResult("exact-hiding", worst <= 1e-12, f"max distance {worst:.3g} over {len(hashSeeds)} seeds, {skipped} rank-deficient fibers skipped")

def checkTinyPmf(samples: int = 10 ** 4, rngSeed: str = "pmf") -> CheckResult:
	"""
	Sampled tiny-scheme ciphertexts against the exact pmf of every message: the
	statistical distance, the collision probability estimate, and collision
	entropy bounding min-entropy from above.

	>>> checkTinyPmf(samples=2000).Passed
	True
	"""
	rng = random.Random(rngSeed)
	scheme = pke.tinyScheme()
	keys = scheme.Gen(rng)
	worstDistance, worstZ, bounded, support = 0.0, 0.0, True, 0
	for m in scheme.Messages():
		exact = stats.schemePmf(scheme, keys.Pk, m)
		support = max(support, len(exact.Probs))
		sampled = [scheme.Enc(keys.Pk, m, rng) for _ in range(samples)]
		worstDistance = max(worstDistance, stats.statDistance(exact, stats.Pmf.FromSamples(sampled, scheme.CtBits)))
		cp = math.fsum(p * p for p in exact.Probs.values())
		p3 = math.fsum(p ** 3 for p in exact.Probs.values())
		sd = math.sqrt((4 * (samples - 2) * (p3 - cp * cp) + 2 * (cp - cp * cp)) / (samples * (samples - 1)))
		worstZ = max(worstZ, abs(stats.collisionProb(sampled).Value - cp) / sd)
		bounded = bounded and stats.renyi2(cp) >= stats.minEntropy(exact)
	limit = math.sqrt(support / samples)
	passed = worstDistance <= limit and worstZ <= 5 and bounded
	return CheckResult("tiny-pmf", passed, f"max distance {worstDistance:.4f} (limit {limit:.4f}), collision max |z| {worstZ:.2f}, over {samples} samples per message")

#### statistical checks ####
def checkRejectionCost(embeds: int = 10 ** 4, v: int = 4, budget: int = 1024, rngSeed: str = "cost") -> CheckResult:
	"""
	Mean attempts within 10% of 2^v, widened to four standard errors for small runs.

	>>> checkRejectionCost(embeds=300).Passed
	True
	"""
	rng = random.Random(rngSeed)
	scheme = pke.lowentScheme(16, msgBits=8, ctBits=40)
	keys = scheme.Gen(rng)
	attempts, exhausted = [], 0
	for _ in range(embeds):
		seed = extractors.HashSeed.Random(rng)
		try:
			_, n = protocol.rejectionSample(scheme, keys.Pk, BitStr.Random(rng, 8), seed, BitStr.Random(rng, v), budget, rng)
			attempts.append(n)
		except errors.BudgetExhausted:
			exhausted += 1
	expected = 2 ** v
	tolerance = max(0.1 * expected, 4 * math.sqrt(expected * (expected - 1) / max(1, len(attempts))))
	mean = float(np.mean(attempts)) if attempts else float("inf")
	passed = exhausted == 0 and abs(mean - expected) <= tolerance
	return CheckResult("rejection-cost", passed, f"mean {mean:.2f} over {len(attempts)} embeds (want {expected} +- {tolerance:.2f}), {exhausted} exhausted")

def elgSeedMatrix(group: pke.GroupParams, samples: int, d: int, rng: np.random.Generator, batch: int = 2000) -> np.ndarray:
	"""
	GT seed bits of many independent transcripts under sign-randomized ElGamal,
	vectorized through power tables of the group: row i holds the d bits one
	seed computation produces, P0's bit and P1's bit for each round pair.

	>>> bits = elgSeedMatrix(pke.safePrimeGroup(16), 64, 8, np.random.default_rng(0))
	>>> bits.shape, set(bits.ravel().tolist()) <= {0, 1}
	((64, 8), True)
	"""
	p, q, ell = group.P, group.Q, group.Ell
	powG = np.array([pow(group.G, r, p) for r in range(q)], dtype=np.int64)
	x = int(rng.integers(1, q))
	powPk = np.array([pow(group.G, x * r % q, p) for r in range(q)], dtype=np.int64)
	msgBits = pke.defaultMsgBits(group)
	out = []
	for start in range(0, samples, batch):
		n = min(batch, samples - start)
		shape = (n, d, 2)
		r = rng.integers(1, q, size=shape)
		m = rng.integers(0, 2 ** msgBits, size=shape)
		c1 = powG[r]
		c2 = (m + 1) * (m + 1) % p * powPk[r] % p
		c1 = np.where(rng.integers(0, 2, size=shape) == 1, p - c1, c1)
		c2 = np.where(rng.integers(0, 2, size=shape) == 1, p - c2, c2)
		ct = (c1 << ell) | c2
		out.append((ct[:, :, 0] >= ct[:, :, 1]).astype(np.uint8))
	return np.concatenate(out, axis=0)

def bitQuality(bits: np.ndarray) -> typing.Tuple[bool, str]:
	n = bits.shape[0]
	z = float(np.max(np.abs(stats.positionZ(bits))))
	rho = stats.maxCorrelation(bits)
	rhoLimit = max(0.02, 5 / math.sqrt(n))
	return z <= BIT_SIGMAS and rho < rhoLimit, f"max |z| {z:.2f} (limit {BIT_SIGMAS}), max |rho| {rho:.4f} (limit {rhoLimit:.4f}) over {n} seeds"

def checkSeedQuality(samples: int = 10 ** 5, d: int = 128, ell: int = 16, rngSeed: int = 5) -> CheckResult:
	"""
	>>> checkSeedQuality(samples=4000, d=16).Passed
	True
	"""
	passed, detail = bitQuality(elgSeedMatrix(pke.safePrimeGroup(ell), samples, d, np.random.default_rng(rngSeed)))
	return CheckResult("seed-quality", passed, f"d={d}, elg{ell}: {detail}")

def onesFraction(p: int, ell: int) -> np.ndarray:
	"""
	Fraction of the integers 1..p-1 with each of ell bits set, most significant
	first.

	>>> onesFraction(11, 4).tolist()
	[0.3, 0.4, 0.5, 0.5]
	"""
	fractions = []
	for b in range(ell - 1, -1, -1):
		period = 1 << (b + 1)
		ones = (p // period) * (period >> 1) + max(0, p % period - (period >> 1))
		fractions.append(ones / (p - 1))
	return np.array(fractions)

def checkElgBits(samples: int = 10 ** 4, ell: int = 16, alpha: float = stats.DEFAULT_ALPHA, rngSeed: str = "elgbits") -> CheckResult:
	"""
	Every ciphertext bit of elgEnc against its frequency under a uniform element
	of Z_p*, at a Bonferroni-corrected z limit.

	>>> checkElgBits(samples=3000).Passed
	True
	"""
	rng = random.Random(rngSeed)
	group = pke.standardGroup(ell)
	keys = pke.elgGen(group, rng)
	width = pke.defaultMsgBits(group)
	bits = stats.bitMatrix([pke.elgEnc(group, keys.Pk, BitStr.Random(rng, width), rng) for _ in range(samples)])
	f = np.tile(onesFraction(group.P, group.Ell), 2)
	z = (bits.sum(axis=0) - samples * f) / np.sqrt(samples * f * (1 - f))
	limit = float(norm.isf(alpha / (2 * bits.shape[1])))
	worst = float(np.max(np.abs(z)))
	return CheckResult("elg-bits", worst <= limit, f"elg{ell}: max |z| {worst:.2f} (limit {limit:.2f}) over {samples} ciphertexts")

def checkMinEntropySeed(samples: int = 2 * 10 ** 4, setup: typing.Optional[Setup] = None, k: typing.Optional[int] = None, rngSeed: str = "minent") -> CheckResult:
	"""
	Seeds from two exchange-rounds of a flat cover above rate 1/2 pass the same
	bit tests; a constant cover is refused.

	>>> checkMinEntropySeed(samples=10, setup=tinySetup()).Passed
	True
	"""
	setup = setup or deskSetup()
	rng = random.Random(rngSeed)
	scheme, params = setup.Scheme, setup.Params
	v = params.D // 4
	k = k if k is not None else (3 * scheme.MsgBits) // 4
	cover = coverdist.uniformFlat(k, scheme.MsgBits)
	k1 = scheme.MsgBits // 2 + 1
	try:
		protocol.minEntropySeed([], [], k1, v, coverdist.constantDist(BitStr.Zeros(scheme.MsgBits)))
		return CheckResult("minentropy-seed", False, "constant cover was accepted")
	except errors.EntropyTooLow:
		pass
	keys = {p: scheme.Gen(rng) for p in (Party.P0, Party.P1)}
	rows = []
	for _ in range(samples):
		plaintexts = [coverdist.nextMessage(cover, [], rng) for _ in range(4)]
		# rounds 1 and 2, P0 then P1, each encrypting to its peer
		senders = [Party.P0, Party.P1, Party.P0, Party.P1]
		cts = [scheme.Enc(keys[s.Peer].Pk, m, rng) for s, m in zip(senders, plaintexts)]
		rows.append(protocol.minEntropySeed(cts, plaintexts, k1, v, cover))
	if samples < 50:
		widths = {r.LenBits for r in rows}
		return CheckResult("minentropy-seed", widths == {4 * v}, f"{samples} seeds of {sorted(widths)} bits; constant cover refused")
	passed, detail = bitQuality(stats.bitMatrix(rows))
	return CheckResult("minentropy-seed", passed, f"k={k}, v={v}: {detail}; constant cover refused")

#### end to end ####
def checkEndToEnd(runs: int = 1000, setup: typing.Optional[Setup] = None, messages: int = 2, rngSeed: str = "e2e") -> CheckResult:
	"""
	>>> checkEndToEnd(runs=2, setup=tinySetup()).Passed
	True
	"""
	setup = setup or deskSetup()
	rng = random.Random(rngSeed)
	recovered, failures = 0, []
	for i in range(runs):
		secrets = [BitStr.Random(rng, setup.Params.Kappa) for _ in range(messages)]
		senders = [Party.P0 if j % 2 == 0 else Party.P1 for j in range(messages)]
		session = protocol.Session(Params=setup.Params, Scheme=setup.Scheme, Cover=setup.Cover, Messages=secrets, Senders=senders)
		try:
			report = session.Run(f"{rngSeed}/{i}")
		except errors.Error as e:
			failures.append(f"run {i}: {e.Message}")
			continue
		if report.Recovered == secrets:
			recovered += 1
		else:
			failures.append(f"run {i}: recovered {[m.Hex() for m in report.Recovered]}")
	for f in failures[:3]:
		log.warning("end-to-end %s", f)
	return CheckResult("end-to-end", recovered == runs, f"{recovered}/{runs} sessions recovered {messages} messages exactly")

def batteryPair(setup: Setup, frames: int, mode: protocol.Mode, label: str) -> typing.Tuple[typing.List[core.TranscriptFrame], typing.Dict[Party, BitStr]]:
	rounds = frames // 2
	rng = random.Random(label)
	messages = []
	if mode is protocol.Mode.SUBLIMINAL:
		sizing = protocol.Session(Params=setup.Params, Scheme=setup.Scheme, Cover=setup.Cover)
		fit = max(0, (rounds - sizing.SetupRounds) // setup.Params.CommBlocks)
		messages = [BitStr.Random(rng, setup.Params.Kappa) for _ in range(fit)]
	session = protocol.Session(Params=setup.Params, Scheme=setup.Scheme, Cover=setup.Cover, Mode=mode, Messages=messages,
		Senders=[Party.P0 if j % 2 == 0 else Party.P1 for j in range(len(messages))])
	session.IdleRounds = rounds - session.Rounds
	report = session.Run(label)
	return report.Frames, {p: k.Sk for p, k in session.Keys(label).items()}

def checkBattery(frames: int = 10 ** 4, setup: typing.Optional[Setup] = None, alpha: float = stats.DEFAULT_ALPHA) -> CheckResult:
	"""
	Honest and subliminal transcripts pass the battery; the naive strawman is
	caught by the extractor test.

	>>> checkBattery(frames=256, setup=tinySetup()).Passed
	True
	"""
	setup = setup or deskSetup()
	params = setup.Params
	honest, keysH = batteryPair(setup, frames, protocol.Mode.HONEST, "battery/honest")
	subliminal, keysS = batteryPair(setup, frames, protocol.Mode.SUBLIMINAL, "battery/subliminal")
	naive, keysN = batteryPair(setup, frames, protocol.Mode.NAIVE, "battery/naive")
	common = dict(scheme=setup.Scheme, cover=setup.Cover, v=params.V, d=params.D, alpha=alpha)
	clean = stats.battery(honest, subliminal, keysH, observerSkB=keysS, **common)
	caught = stats.battery(honest, naive, keysH, observerSkB=keysN, **common)
	pNaive = caught.Test("extractor").PValue
	passed = clean.Verdict and pNaive is not None and pNaive < 1e-9
	failing = [t.Name for t in clean.Tests if not t.Passed(clean.Threshold)]
	return CheckResult("battery", passed, f"{len(honest)} frames each; honest vs subliminal rejects {failing or 'nothing'}; naive extractor p={pNaive:.3g}")

#### the attack ####
class AttackReport(typing.NamedTuple):
	T: int
	DecoderBias: float
	Bound: float
	Sigma: float
	ErrorRates: typing.Dict[int, float]

	def Render(self) -> str:
		lines = [
			f"t={self.T}",
			f"decoder_bias={self.DecoderBias:.6f}",
			f"bound={self.Bound:.6f}",
		]
		lines += [f"strawman_error[bit={b}]={e:.4f}" for b, e in sorted(self.ErrorRates.items())]
		return "\n".join(lines)

def attackDemo(t: int = 10, encryptions: int = 10 ** 5, trials: int = 1000, budget: int = 16, rngSeed: str = "attack") -> AttackReport:
	"""
	Wraps a mandated scheme so that it re-encrypts until the last ciphertext
	bit is 1, then measures that bit and the error rate of a strawman that hides
	one bit per ciphertext in it by resampling up to `budget` times.

	>>> r = attackDemo(t=10, encryptions=2000, trials=20)
	>>> r.DecoderBias > 0.99, r.ErrorRates[0] > 0.49, r.ErrorRates[1]
	(True, True, 0.0)
	"""
	rng = random.Random(rngSeed)
	base = pke.lowentScheme(16, msgBits=8, ctBits=40)
	biased = pke.biasingWrap(base, pke.lsbDecoder, t)
	keys = biased.Gen(rng)
	ones = sum(pke.lsbDecoder(biased.Enc(keys.Pk, BitStr.Random(rng, 8), rng)) for _ in range(encryptions))
	freq = ones / encryptions
	errorRates = {}
	for bit in (0, 1):
		wrong = 0
		for _ in range(trials):
			m = BitStr.Random(rng, 8)
			for _ in range(budget):
				c = biased.Enc(keys.Pk, m, rng)
				if pke.lsbDecoder(c) == bit:
					break
			wrong += pke.lsbDecoder(c) != bit
		errorRates[bit] = wrong / trials
	bound = 1 - 2.0 ** -t
	sigma = math.sqrt(max(freq * (1 - freq), 1e-12) / encryptions)
	log.info("decoder bias %.6f after %d encryptions at t=%d", freq, encryptions, t)
	return AttackReport(T=t, DecoderBias=freq, Bound=bound, Sigma=sigma, ErrorRates=errorRates)

def checkAttack(encryptions: int = 10 ** 5, trials: int = 1000, t: int = 10) -> CheckResult:
	r = attackDemo(t=t, encryptions=encryptions, trials=trials)
	passed = r.DecoderBias >= r.Bound - 3 * r.Sigma and max(r.ErrorRates.values()) >= 0.49
	return CheckResult("attack", passed, f"decoder bias {r.DecoderBias:.5f} (bound {r.Bound:.5f} - 3 sigma), strawman error rates {r.ErrorRates}")

#### primitives ####
RFC8439_KEY = bytes(range(32))
RFC8439_NONCE = "000000090000004a00000000"
RFC8439_BLOCK1 = (
	"10f1e7e4d13b5915500fdd1fa32071c4c7d1f4c733c068030422aa9ac3d46c4e"
	"d2826446079faa0914c2d705d98b02a2b5129cd1de164eb9cbd083e8a2503c4e"
)

def checkPrimitives(scale: float = 1.0, rngSeed: str = "fields") -> CheckResult:
	rng = random.Random(rngSeed)
	pairs = scaled(10 ** 5, scale)
	mismatches = 0
	for _ in range(pairs):
		a, b = rng.getrandbits(64), rng.getrandbits(64)
		if extractors.gfMul(extractors.Gf64(Value=a), extractors.Gf64(Value=b)).Value != extractors.gfMulNaive(a, b):
			mismatches += 1
	block = peer_crypto.prfStream(BitStr.FromBytes(RFC8439_KEY), BitStr.FromHex(RFC8439_NONCE), 1024).Slice(512, 1024)
	vector = block.Payload.hex() == RFC8439_BLOCK1
	return CheckResult("primitives", mismatches == 0 and vector, f"{pairs} GF(2^64) products, {mismatches} mismatches; keystream vector {'matches' if vector else 'differs'}")

#### everything ####
def runAll(scale: float = 1.0, setup: typing.Optional[Setup] = None) -> typing.List[CheckResult]:
	"""Runs every check; scale multiplies every sample count."""
	setup = setup or deskSetup()
	checks: typing.List[typing.Callable[[], CheckResult]] = [
		lambda: checkGtBound(),
		lambda: checkCorrectness(trials=scaled(10 ** 4, scale)),
		lambda: checkExactHiding(),
		lambda: checkTinyPmf(samples=scaled(10 ** 4, scale, 1000)),
		lambda: checkElgBits(samples=scaled(10 ** 4, scale, 1000)),
		lambda: checkRejectionCost(embeds=scaled(10 ** 4, scale)),
		lambda: checkSeedQuality(samples=scaled(10 ** 5, scale, 100)),
		lambda: checkEndToEnd(runs=scaled(1000, scale), setup=setup),
		lambda: checkBattery(frames=scaled(10 ** 4, scale, 256), setup=setup),
		lambda: checkAttack(encryptions=scaled(10 ** 5, scale, 100), trials=scaled(1000, scale, 10)),
		lambda: checkMinEntropySeed(samples=scaled(2 * 10 ** 4, scale), setup=setup),
		lambda: checkPrimitives(scale=scale),
	]
	results = []
	for check in checks:
		started = time.perf_counter()
		result = check()
		log.info("%s in %.1fs", result.Render(), time.perf_counter() - started)
		results.append(result)
	return results

#### throughput ####
class BenchReport(typing.NamedTuple):
	Embeds: int
	Attempts: int
	Seconds: float
	V: int
	Kappa: int
	CommBlocks: int

	def Render(self) -> str:
		rate = self.Attempts / self.Seconds if self.Seconds else float("inf")
		return "\n".join([
			f"embeds={self.Embeds}",
			f"attempts={self.Attempts} mean={self.Attempts / max(1, self.Embeds):.2f}",
			f"attempts_per_sec={rate:.1f}",
			f"bits_per_ciphertext={self.V}",
			f"message_bits_per_ciphertext={self.Kappa / self.CommBlocks:.3f}",
		])

def bench(setup: Setup, embeds: int = 200, rngSeed: str = "bench") -> BenchReport:
	"""
	Times the rejection sampler at the profile's v.

	>>> r = bench(tinySetup(), embeds=20)
	>>> r.Embeds, r.Attempts >= 20, r.V
	(20, True, 2)
	"""
	rng = random.Random(rngSeed)
	keys = setup.Scheme.Gen(rng)
	seed = extractors.HashSeed.Random(rng)
	v = setup.Params.V
	total = 0
	started = time.perf_counter()
	for _ in range(embeds):
		m = coverdist.nextMessage(setup.Cover, [], rng)
		_, n = protocol.rejectionSample(setup.Scheme, keys.Pk, m, seed, BitStr.Random(rng, v), setup.Params.MaxAttempts, rng)
		total += n
	elapsed = time.perf_counter() - started
	return BenchReport(Embeds=embeds, Attempts=total, Seconds=elapsed, V=v, Kappa=setup.Params.Kappa, CommBlocks=setup.Params.CommBlocks)
