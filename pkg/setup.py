#!/usr/bin/python3

import os
from setuptools import setup

here = os.path.abspath(os.path.dirname(__file__))
with open(os.path.join(here, 'README.md')) as f:
	long_description = f.read()

setup(
	name="covertext",
	version="0.0.1",
	description='Subliminal messages carried inside mandated public-key ciphertexts',
	long_description=long_description,
	long_description_content_type='text/markdown',
	classifiers=[
		'Development Status :: 3 - Alpha',
		'Intended Audience :: Science/Research',
		'Intended Audience :: Developers',
		'Topic :: Security :: Cryptography',
		'Environment :: Console',
		'Operating System :: POSIX :: Linux',
		'Programming Language :: Python :: Implementation :: CPython',
		'Programming Language :: Python :: 3 :: Only',
		'Programming Language :: Python :: 3.8',
		'Programming Language :: Python :: 3.9',
		'Programming Language :: Python :: 3.10',
		'Programming Language :: Python :: 3.11'
	],
	keywords='subliminal channel steganography encryption',
	packages=["covertext"],
	package_data={"covertext": ["data/corpus.txt", "data/desk.grp", "data/tiny-seed.tx"]},
	install_requires=['setuptools', 'pycryptodome', 'numpy', 'scipy'],
	entry_points={
		'console_scripts': [
			'covertext=covertext.__init__:main',
		],
	},
	python_requires='>=3.8'
)
