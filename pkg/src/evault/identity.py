"""Digital identities: key pairs, UID derivation, roles, signatures.

One fixed signature scheme for the whole system: Ed25519 (deterministic,
32-byte seeds, 32-byte verification keys, 64-byte signatures).  A user's
UID is the Keccak-256 digest of their canonical registration details; the
verification key is bound to the UID by the Registrar's signed
RegisterIdentity transaction, not baked into the UID itself.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from evault.encoding import ByteWriter
from evault.hashchain.keccak import Hash256, keccak256

SEED_LEN = 32
VERIFY_KEY_LEN = 32
SIGNATURE_LEN = 64

# A 32-byte derived identifier (see derive_uid).
UID = Hash256


class Role(enum.Enum):
    JUDGE = "Judge"
    LAWYER = "Lawyer"
    CITIZEN = "Citizen"
    REGISTRAR = "Registrar"

    @property
    def tag(self) -> int:
        return _ROLE_TAGS[self]


_ROLE_TAGS = {Role.JUDGE: 0, Role.LAWYER: 1, Role.CITIZEN: 2, Role.REGISTRAR: 3}
_ROLE_BY_TAG = {tag: role for role, tag in _ROLE_TAGS.items()}


def role_from_tag(tag: int) -> Role:
    try:
        return _ROLE_BY_TAG[tag]
    except KeyError:
        raise ValueError(f"unknown role tag {tag}") from None


class EmptyField(ValueError):
    """full_name and national_id must be non-empty."""


class BadSeedLength(ValueError):
    pass


@dataclass(frozen=True)
class IdentityDetails:
    """Registration details.  national_id is an opaque string (the national
    identity linkage is modeled, never validated)."""

    full_name: str
    national_id: str
    role: Role
    contact: str = ""

    def validate(self) -> None:
        if not self.full_name:
            raise EmptyField("full_name must be non-empty")
        if not self.national_id:
            raise EmptyField("national_id must be non-empty")

    def encode(self) -> bytes:
        w = ByteWriter()
        w.str(self.full_name)
        w.str(self.national_id)
        w.u8(self.role.tag)
        w.str(self.contact)
        return w.getvalue()


@dataclass(frozen=True)
class Identity:
    """A registered participant as recorded in world state."""

    uid: UID
    role: Role
    public_key: bytes  # 32-byte Ed25519 verification key
    registered_at: int  # block height


def derive_uid(details: IdentityDetails) -> UID:
    """UID = keccak256(canonical encoding of the registration details)."""
    details.validate()
    return keccak256(details.encode())


def generate_keypair(seed: bytes) -> tuple[bytes, bytes]:
    """Deterministic Ed25519 keypair from a 32-byte seed.

    Returns (signing_key, verification_key) as raw byte strings; the signing
    key is the seed itself so key files stay a single 32-byte secret.
    """
    if len(seed) != SEED_LEN:
        raise BadSeedLength(f"seed must be {SEED_LEN} bytes, got {len(seed)}")
    sk = Ed25519PrivateKey.from_private_bytes(seed)
    vk = sk.public_key().public_bytes_raw()
    return seed, vk


def sign(key: bytes, message: bytes) -> bytes:
    """Ed25519 signature (64 bytes, deterministic) of ``message``."""
    if len(key) != SEED_LEN:
        raise BadSeedLength(f"signing key must be {SEED_LEN} bytes, got {len(key)}")
    return Ed25519PrivateKey.from_private_bytes(key).sign(message)


def verify(key: bytes, message: bytes, sig: bytes) -> bool:
    """True iff ``sig`` is valid for ``message`` under verification key ``key``.

    Never raises: malformed keys or signatures return False.
    """
    if not isinstance(key, (bytes, bytearray)) or len(key) != VERIFY_KEY_LEN:
        return False
    if not isinstance(sig, (bytes, bytearray)):
        return False
    try:
        Ed25519PublicKey.from_public_bytes(bytes(key)).verify(bytes(sig), message)
        return True
    except (InvalidSignature, ValueError):
        return False
