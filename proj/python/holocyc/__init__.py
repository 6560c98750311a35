from ._holocyc import *  # noqa: F401,F403
from ._holocyc import __doc__  # noqa: F401
