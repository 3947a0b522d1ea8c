"""Exact arithmetic for Fibonacci sequences of words and of 2x2 integer
matrices, and certified continued fractions of the numbers they define."""

import sys

# matrix entries run to tens of thousands of digits and are serialized in decimal
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)

__version__ = "0.1.0"
