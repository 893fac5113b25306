"""vaultd: the backend service hosting one ledger node behind an HTTP/JSON
API, with durable append-only persistence."""
