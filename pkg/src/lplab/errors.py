"""Shared exception types."""


class Refusal(Exception):
    """An operation's hypotheses are not met; refuse rather than guess."""
