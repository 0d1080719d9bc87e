from .core import *