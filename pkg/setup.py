import os
import sys

from setuptools import setup

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
from build import build  # noqa: E402

global setup_kwargs

setup_kwargs = {
    'name': 'pvasym',
    'packages': ['pvasym'],
    'package_data': {
        'pvasym': ['defaults.json']
    },
    'entry_points': {
        'console_scripts': ['pvasym = pvasym.cli:main']
    },
}

build(setup_kwargs)
setup(**setup_kwargs)
