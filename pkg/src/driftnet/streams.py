"""Counter-based random streams.

Every replica draws from its own Philox generator keyed by
(seed : 64 bits | domain : 8 bits | index : 56 bits), so results never
depend on scheduling or worker count. Domains keep the S.D.E. replicas,
bridge draws and jump-process draws out of each other's streams.
"""

import numpy as np

MASK64 = (1 << 64) - 1
MASK56 = (1 << 56) - 1

DOMAIN_SDE = 0
DOMAIN_BRIDGE = 1
DOMAIN_VRJP = 2
DOMAIN_JUMP = 3
DOMAIN_MISC = 4


def substream(seed: int, domain: int, index: int) -> np.random.Generator:
    if index > MASK56:
        raise ValueError("replica index exceeds 2^56")
    key = ((seed & MASK64) << 64) | ((domain & 0xFF) << 56) | (index & MASK56)
    return np.random.Generator(np.random.Philox(key=key))
