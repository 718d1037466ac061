"""Failure modes of the plotting layer."""


class SchemaMismatch(Exception):
    """Input file exists but does not match its documented schema.

    The message names the offending column or key so the producing run
    can be diagnosed without opening the file.
    """
