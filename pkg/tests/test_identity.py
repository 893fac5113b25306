"""Identity: deterministic keypairs, signature round trips, forgery
rejection, UID derivation."""

import random

import pytest

from evault.identity import (
    BadSeedLength,
    EmptyField,
    IdentityDetails,
    Role,
    derive_uid,
    generate_keypair,
    sign,
    verify,
)


def details(**overrides) -> IdentityDetails:
    base = dict(
        full_name="Kiran Citizen",
        national_id="1234-5678-9012",
        role=Role.CITIZEN,
        contact="kiran@example.org",
    )
    base.update(overrides)
    return IdentityDetails(**base)


def test_uid_deterministic():
    assert derive_uid(details()) == derive_uid(details())
    assert len(derive_uid(details())) == 32


def test_uid_distinguishes_national_id():
    assert derive_uid(details()) != derive_uid(details(national_id="0000-0000-0000"))


def test_uid_distinguishes_role():
    assert derive_uid(details()) != derive_uid(details(role=Role.LAWYER))


def test_empty_fields_rejected():
    with pytest.raises(EmptyField):
        derive_uid(details(full_name=""))
    with pytest.raises(EmptyField):
        derive_uid(details(national_id=""))


def test_keypair_deterministic():
    seed = bytes(range(32))
    _, vk1 = generate_keypair(seed)
    _, vk2 = generate_keypair(seed)
    assert vk1 == vk2
    assert len(vk1) == 32


def test_distinct_seeds_distinct_keys():
    _, vk1 = generate_keypair(bytes(32))
    _, vk2 = generate_keypair(bytes(31) + b"\x01")
    assert vk1 != vk2


def test_bad_seed_length():
    with pytest.raises(BadSeedLength):
        generate_keypair(b"\x00" * 16)


def test_sign_verify_round_trip():
    sk, vk = generate_keypair(bytes(range(32)))
    message = b"exhibit A"
    sig = sign(sk, message)
    assert len(sig) == 64
    assert verify(vk, message, sig)


def test_wrong_key_fails():
    sk, _ = generate_keypair(bytes(range(32)))
    _, other_vk = generate_keypair(bytes(32))
    assert not verify(other_vk, b"m", sign(sk, b"m"))


def test_altered_message_fails():
    sk, vk = generate_keypair(bytes(range(32)))
    sig = sign(sk, b"m")
    assert not verify(vk, b"m\x00", sig)


def test_truncated_signature_fails():
    sk, vk = generate_keypair(bytes(range(32)))
    sig = sign(sk, b"m")
    assert not verify(vk, b"m", sig[:40])
    assert not verify(vk, b"m", b"")


def test_empty_message_round_trip():
    sk, vk = generate_keypair(bytes(range(32)))
    assert verify(vk, b"", sign(sk, b""))


def test_round_trip_and_forgery_corpus():
    """500 random (seed, message) pairs: valid triples verify; a single-bit
    mutation of message or signature never does."""
    rng = random.Random(99)
    for _ in range(500):
        seed = rng.randbytes(32)
        message = rng.randbytes(rng.randint(0, 64))
        sk, vk = generate_keypair(seed)
        sig = sign(sk, message)
        assert verify(vk, message, sig)
        if rng.random() < 0.5 and message:
            mutated = bytearray(message)
            mutated[rng.randrange(len(mutated))] ^= 1 << rng.randrange(8)
            assert not verify(vk, bytes(mutated), sig)
        else:
            bad_sig = bytearray(sig)
            bad_sig[rng.randrange(len(bad_sig))] ^= 1 << rng.randrange(8)
            assert not verify(vk, message, bytes(bad_sig))
