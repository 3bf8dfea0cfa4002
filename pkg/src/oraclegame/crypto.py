"""Keys, verifiable random values and price commitments.

Two VRF constructions share one key format (32-byte Ed25519 seed / 32-byte
Ed25519 public key):

``"simulation"`` (default)
    value = SHA-256(sk || seed) / 2**256, proof = Ed25519 signature over
    (seed, value). Fast enough for thousands of tasks per second.
``"ecvrf"``
    ECVRF-EDWARDS25519-SHA512-TAI; value is the first 32 bytes of the VRF
    output read as a 256-bit integer over 2**256. Roughly 10 ms per call.

The 256-bit integer is truncated to its top 53 bits before conversion so the
float is exactly representable and strictly below 1.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass
from functools import lru_cache

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from . import ecvrf
from .errors import InputError

HASH_NAME = "sha256"
VRF_BACKENDS = ("simulation", "ecvrf")
DEFAULT_BACKEND = "simulation"

_SIM_TAG = b"oraclegame/vrf-sim/v1"
_KEYGEN_TAG = b"oraclegame/keygen/v1"


@dataclass(frozen=True)
class KeyPair:
    secret_key: bytes
    public_key: bytes

    def __repr__(self) -> str:
        return f"KeyPair(public_key={self.public_key.hex()[:16]}...)"


@dataclass(frozen=True)
class VrfOutput:
    value: float
    proof: bytes


def digest(data: bytes) -> bytes:
    """The build's fixed 256-bit hash primitive."""
    return hashlib.sha256(data).digest()


def digest_to_unit(raw: bytes) -> float:
    """Map a 256-bit digest to [0, 1) as raw / 2**256 (top 53 bits kept)."""
    if len(raw) < 32:
        raise InputError("digest must have at least 32 bytes")
    n = int.from_bytes(raw[:32], "big")
    return (n >> 203) / float(1 << 53)


def encode_price(price: float) -> bytes:
    """Canonical 8-byte big-endian IEEE-754 binary64 encoding."""
    return struct.pack(">d", price)


@lru_cache(maxsize=4096)
def _signer(secret_key: bytes) -> Ed25519PrivateKey:
    return Ed25519PrivateKey.from_private_bytes(secret_key)


@lru_cache(maxsize=4096)
def _verifier(public_key: bytes) -> Ed25519PublicKey:
    return Ed25519PublicKey.from_public_bytes(public_key)


def keypair_from_secret(secret_key: bytes) -> KeyPair:
    if len(secret_key) != 32:
        raise InputError("secret key must be 32 bytes")
    pk = _signer(secret_key).public_key().public_bytes(
        serialization.Encoding.Raw, serialization.PublicFormat.Raw
    )
    return KeyPair(secret_key, pk)


def keygen(rng_seed: int) -> KeyPair:
    """Deterministic key pair for a 64-bit seed."""
    if not 0 <= rng_seed < 2**64:
        raise InputError(f"rng_seed must fit in 64 unsigned bits, got {rng_seed}")
    sk = digest(_KEYGEN_TAG + rng_seed.to_bytes(8, "big"))
    return keypair_from_secret(sk)


def _check_backend(backend: str) -> None:
    if backend not in VRF_BACKENDS:
        raise InputError(f"unknown VRF backend {backend!r}; expected one of {VRF_BACKENDS}")


def vrf_value(seed: bytes, key: KeyPair, backend: str = DEFAULT_BACKEND) -> float:
    """Only the random value of :func:`vrf_evaluate`.

    For the simulation backend this skips the signature, which an
    unselected node never needs to publish.
    """
    if not seed:
        raise InputError("VRF seed must be non-empty")
    _check_backend(backend)
    if backend == "simulation":
        return digest_to_unit(digest(_SIM_TAG + key.secret_key + seed))
    return vrf_evaluate(seed, key, backend).value


def vrf_evaluate(seed: bytes, key: KeyPair, backend: str = DEFAULT_BACKEND) -> VrfOutput:
    if not seed:
        raise InputError("VRF seed must be non-empty")
    _check_backend(backend)
    if backend == "simulation":
        value = digest_to_unit(digest(_SIM_TAG + key.secret_key + seed))
        proof = _signer(key.secret_key).sign(_sim_message(seed, value))
        return VrfOutput(value, proof)
    pi = ecvrf.prove(key.secret_key, seed)
    beta = ecvrf.proof_to_hash(pi)
    return VrfOutput(digest_to_unit(beta), pi)


def _sim_message(seed: bytes, value: float) -> bytes:
    return _SIM_TAG + len(seed).to_bytes(4, "big") + seed + encode_price(value)


def vrf_verify(
    value: float,
    proof: bytes,
    seed: bytes,
    public_key: bytes,
    backend: str = DEFAULT_BACKEND,
) -> bool:
    """True iff ``(value, proof)`` came from ``vrf_evaluate(seed, key)`` for the
    key owning ``public_key``. Malformed inputs give ``False``."""
    _check_backend(backend)
    try:
        value = float(value)
    except (TypeError, ValueError):
        return False
    if not (0.0 <= value < 1.0) or not seed:
        return False
    if backend == "simulation":
        try:
            _verifier(bytes(public_key)).verify(bytes(proof), _sim_message(seed, value))
        except (InvalidSignature, ValueError, TypeError):
            return False
        return True
    beta = ecvrf.verify(bytes(public_key), bytes(proof), seed)
    return beta is not None and digest_to_unit(beta) == value


def commit(price: float, public_key: bytes) -> bytes:
    """Digest binding a price to the submitting node's public key."""
    if not math.isfinite(price):
        raise InputError(f"price must be finite, got {price}")
    return digest(encode_price(float(price)) + public_key)
