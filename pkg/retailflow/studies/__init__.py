from .base import *
from .decomposition import *
from .determinants import *
from .driver import *
from .eventstudy import *
from .horizon import *
from .longshort import *
from .prediction import *
from .subgroups import *
