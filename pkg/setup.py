#!/usr/bin/env python
# -*- coding: utf-8 -*-

from setuptools import setup

with open('README.rst') as readme_file:
    readme = readme_file.read()

with open('HISTORY.rst') as history_file:
    history = history_file.read()

requirements = [
    'numpy>=1.13',
    'scipy>=1.7',
    'PyYAML>=3.12',
]

test_requirements = [
    # the test suite only needs the package requirements
]

setup(
    name='segrank',
    version='0.2.0',
    description="query segmentation by re-ranking WBN candidates, and document ranking with segmented queries",
    long_description=readme + '\n\n' + history,
    author="segrank developers",
    author_email='segrank-dev@googlegroups.com',
    packages=[
        'segrank',
        'segrank.relevance',
    ],
    package_dir={'segrank':
                 'segrank'},
    include_package_data=True,
    install_requires=requirements,
    extras_require={
        'json': ['simplejson'],
    },
    entry_points={
        'console_scripts': [
            'segrank=segrank.cli:main',
        ],
    },
    license="BSD license",
    zip_safe=False,
    keywords='segrank query segmentation ranking',
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: BSD License',
        'Natural Language :: English',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Topic :: Text Processing :: Linguistic',
    ],
    test_suite='tests',
    tests_require=test_requirements
)
