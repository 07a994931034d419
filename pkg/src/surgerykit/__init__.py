"""surgerykit: chain-level algebraic surgery over the integers."""

SIGN_LEDGER_VERSION = "1"

__all__ = ["SIGN_LEDGER_VERSION"]
