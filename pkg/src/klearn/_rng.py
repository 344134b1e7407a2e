import numpy as np


def derive_seed(*keys: int) -> int:
    """Stable 63-bit sub-seed from a tuple of non-negative integer keys."""
    state = np.random.SeedSequence([int(key) for key in keys]).generate_state(2, np.uint32)
    return (int(state[0]) << 31) ^ int(state[1])


def make_rng(*keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(key) for key in keys])))
