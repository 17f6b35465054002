# -*- coding: utf-8 -*-

__author__ = 'segrank developers'
__email__ = 'segrank-dev@googlegroups.com'
__version__ = '0.2.0'

from segrank.errors import (Error,
                            ConfigError,
                            DataError,
                            InvariantError)
