"""Permissioned blockchain eVault for legal records.

An append-only, hash-chained ledger whose transactions register identities,
file cases, notarize documents, manage access, record chain-of-custody
transfers and collect digital signatures.  Large files live off-chain in a
deduplicating content-addressed store; a proof-of-authority simulator
demonstrates multi-node convergence.
"""

__version__ = "0.1.0"
