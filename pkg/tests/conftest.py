import pytest

from rawebs.model import KeyPair


@pytest.fixture(scope="session")
def keypair_pool() -> list[KeyPair]:
    """Shared RSA keys; generation is slow, so the suite draws from a pool."""
    return [KeyPair.generate() for _ in range(4)]
