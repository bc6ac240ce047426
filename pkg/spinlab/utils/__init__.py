from . import bessel
from . import config
from . import misc
from . import output
