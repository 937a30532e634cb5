"""Stable seed fan-out so every random draw traces back to one master seed."""

import hashlib

import numpy as np


def derive_seed(master: int, component: str, index: int = 0) -> int:
    """64-bit child seed from ``(master, component, index)``.

    Uses blake2b so the value is identical across processes, platforms and
    Python hash randomization.
    """
    payload = f"{int(master)}\x1f{component}\x1f{int(index)}".encode()
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


def child_rng(master: int, component: str, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, component, index))
