from . import studies, synth, utils
from .aggregate import *
from .classify import *
from .config import *
from .decorators import *
from .econ import *
from .exceptions import *
from .mdio import *
from .panel import *


__version__ = '0.1.0'
