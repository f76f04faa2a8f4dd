import numpy as np


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic 63-bit sub-seed for (seed, *keys), independent of call order."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *[int(k) for k in keys]])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
