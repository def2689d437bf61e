"""Remote attestation for web services at desk scale.

A verifier service, mock TEE and CA/CT-log stack, TA-side agent, and a
deterministic scenario harness, all sharing one protocol model.
"""

__version__ = "0.1.0"
