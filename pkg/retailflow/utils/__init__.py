from .exporting import *
from .importing import *
from .mathy import *
from .validation import *
