"""gridsec: encryptionless grid security toolkit.

MAC-based winnowing-and-chaffing data transfer, two split-distribution
key-exchange schemes (threshold shares over disjoint paths; temporal split
with polynomial-root recovery under a pre-shared prime), an operation-count
cost model against an AES baseline, a deterministic grid simulator with
eavesdropper adversaries, and a file-integrity sentinel.
"""

from .keys import SecretKey
from .opcount import OpCount

__version__ = "0.1.0"

__all__ = ["OpCount", "SecretKey", "__version__"]
