from .accuracy import *
from .market import *
from .oracles import *
from .panel import *
from .verification import *
