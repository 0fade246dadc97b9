#!/usr/bin/env python

from os import path
from setuptools import setup, find_packages

VERSION = "0.1"

README_FILE = path.join(path.dirname(__file__), 'README.pypi')
LONG_DESCRIPTION = open(README_FILE).read()


ENTRY_POINTS = {
    'console_scripts': (
        'synaptic = synaptic.cli:main',
    ),
}


def _discover_tests():
    import unittest
    return unittest.defaultTestLoader.discover('synaptic',
                                               pattern='test_*.py',
                                               top_level_dir='.')


if __name__ == '__main__':
    setup(
        name='Synaptic',
        version=VERSION,
        description="Projections, effects, CBS decompositions and commutators "
                    "in synaptic algebras of symmetric matrices.",
        long_description=LONG_DESCRIPTION,
        long_description_content_type='text/markdown',
        license='GPL-3.0',
        packages=find_packages(),
        package_data={
            'synaptic': ['golden/*.json'],
        },
        include_package_data=True,
        python_requires='>=3.8',
        install_requires=[
            'numpy>=1.22',
            'scipy>=1.8',
            'pandas',
            'simplejson',
        ],
        extras_require = {
            'test': ['coverage'],
            'doc': ['sphinx', 'recommonmark', 'sphinx_rtd_theme'],
        },
        entry_points=ENTRY_POINTS,
        keywords=(
            'synaptic algebra',
            'effect algebra',
            'orthomodular lattice',
            'projection',
            'commutator',
            'symmetric matrix',
            'spectral resolution',
            'property-based verification',
        ),
        test_suite="setup._discover_tests",
        zip_safe=False,
        classifiers=[
            'Development Status :: 4 - Beta',
            'Environment :: Console',
            'Programming Language :: Python',
            'Programming Language :: Python :: 3',
            'License :: OSI Approved :: GNU General Public License v3 or later (GPLv3+)',
            'Operating System :: OS Independent',
            'Topic :: Scientific/Engineering :: Mathematics',
            'Topic :: Software Development :: Libraries :: Python Modules',
            'Intended Audience :: Education',
            'Intended Audience :: Science/Research',
            'Intended Audience :: Developers',
        ],
    )
