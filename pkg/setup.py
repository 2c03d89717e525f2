import os
import sys

from setuptools import setup

if sys.version_info < (3, 7):
    sys.exit("Only Python 3.7 and greater is supported")

setup(
    name='hcm_modem',
    version="0.1.0",
    packages=['hcm_modem', 'hcm_modem.schemes'],
    license='Apache License, Version 2.0',
    description='Hadamard coded modulation and ACO-OFDM modems with a Monte Carlo BER simulator',
    long_description=open(os.path.join(os.path.dirname(__file__), 'README.md')).read(),
    long_description_content_type="text/markdown",
    install_requires=[
        'numpy>=1.17',
        'scipy>=1.3',
    ],
    entry_points={
        'console_scripts': ['hcm-modem=hcm_modem.cli:main'],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Framework :: AsyncIO",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: Apache Software License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering",
    ],
)
