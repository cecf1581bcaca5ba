from pyliouville.util import *             # NOQA
from pyliouville.report import *           # NOQA
from pyliouville.graph import *            # NOQA
from pyliouville.metric import *           # NOQA
from pyliouville.calculus import *         # NOQA
from pyliouville.weighted_spaces import *  # NOQA
from pyliouville.schrodinger import *      # NOQA
from pyliouville.estimates import *        # NOQA
from pyliouville.provenance import *       # NOQA
from pyliouville.config import *           # NOQA
from pyliouville._version import pyliouville_version as __version__
