from .base import *