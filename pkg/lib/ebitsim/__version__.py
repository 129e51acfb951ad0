"""
Defines the ebitsim version as ``__version__``.

ebitsim uses calendar versioning (http://calver.org).  The library, the CLI
and the report formats it writes are released together, so one date-based
version describes all of them.

The scheme is YYYY.N where YYYY is the full four-digit year and N is the
release number within that year.
"""
__version__ = '2026.1'
