"""
Global process setup for this package.
"""
import ebitsim.logging


if not __debug__:
    raise Exception("Asserts are used for numerical integrity checks.  Please turn off optimization!")


ebitsim.logging.configure()
