from .command import *
