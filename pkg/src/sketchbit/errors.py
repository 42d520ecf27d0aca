#!/usr/bin/env python3
"""
Exception categories shared by every sketchbit module.

Module exceptions subclass one of the three categories below; the CLI maps
the category onto the process exit code.
"""

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_NUMERIC = 3


class SketchBitException(Exception):
    """Base exception for sketchbit operations"""

    exit_code = EXIT_USAGE


class SketchBitUsageError(SketchBitException, ValueError):
    """Invalid arguments or inconsistent inputs"""

    exit_code = EXIT_USAGE


class SketchBitIOError(SketchBitException):
    """Unreadable or malformed files"""

    exit_code = EXIT_IO


class SketchBitNumericError(SketchBitException, ArithmeticError):
    """Numeric or fitting failure"""

    exit_code = EXIT_NUMERIC
