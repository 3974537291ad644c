#!/usr/bin/python3

if __name__ == "__main__":
	from covertext import cli, config, core, coverdist, errors, extractors, peer_crypto, pke, protocol, selftest, stats, transport, wire
	import doctest
	failed = 0
	for module in (errors, core, config, extractors, pke, peer_crypto, coverdist, protocol, wire, transport, stats, selftest, cli):
		failed += doctest.testmod(module, optionflags=doctest.ELLIPSIS).failed
	exit(1 if failed else 0)
