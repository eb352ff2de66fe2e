"""Seed derivation for reproducible trial fan-out.

Each trial gets its own 64-bit seed ``trial_seed(master, index)``, computed
with the splitmix64 finalizer (Steele, Lea & Flood 2014)::

    z  = (master + (index + 1) * 0x9E3779B97F4A7C15) mod 2**64
    z  = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2**64
    z  = (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2**64
    z ^= z >> 31

The seed then initialises numpy's PCG64 bit generator (through its
SeedSequence), whose output is identical across platforms.
"""
from __future__ import annotations

import os

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB

SEED_ENV = "COBRA_LAB_SEED"


def splitmix64(x: int) -> int:
    z = x & MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def trial_seed(master: int, index: int) -> int:
    return splitmix64((master + (index + 1) * GOLDEN_GAMMA) & MASK64)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed & MASK64))


def default_seed(fallback: int = 0) -> int:
    """Master seed from $COBRA_LAB_SEED, else ``fallback``."""
    raw = os.environ.get(SEED_ENV)
    return int(raw, 0) if raw else fallback
