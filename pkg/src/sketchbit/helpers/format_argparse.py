#!/usr/bin/env python3
import re
import sys
import logging
import argparse
from typing import Never

from sketchbit.errors import EXIT_USAGE

logger = logging.getLogger("sketchbit.helpers.format")


class Colors:
    """ANSI color codes for terminal output"""

    RESET = "\033[0m"
    BOLD = "\033[1m"
    DIM = "\033[2m"

    RED = "\033[31m"
    GREEN = "\033[32m"
    YELLOW = "\033[33m"
    ORANGE = "\033[38;5;214m"
    BLUE = "\033[34m"
    CYAN = "\033[36m"
    PINK = "\033[38;5;213m"
    GRAY = "\033[38;5;250m"

    BRIGHT_BLUE = "\033[94m"
    BRIGHT_GREEN = "\033[92m"


_FLAG_PATTERN = re.compile(r"(--?[\w-]+)")


class ColorHelpFormatter(argparse.RawTextHelpFormatter):
    """Help formatter that highlights flags and shows defaults"""

    def _format_action_invocation(self, action: argparse.Action) -> str:
        if action.option_strings:
            opts = ", ".join(
                f"{Colors.GREEN}{opt}{Colors.RESET}" for opt in action.option_strings
            )
            if action.nargs != 0:
                metavar = self._metavar_formatter(action, action.dest)(1)
                if metavar and metavar[0]:
                    opts += f" {metavar[0]}"
            return opts
        if action.dest == "subparser_command":
            return ""
        return f"{Colors.GREEN}{action.dest}{Colors.RESET}"

    def _get_help_string(self, action: argparse.Action) -> str | None:
        text = action.help or ""
        if (
            action.default not in (None, False, argparse.SUPPRESS)
            and "%(default)" not in text
            and action.option_strings
        ):
            text += f" {Colors.DIM}(default: %(default)s){Colors.RESET}"
        return text

    def _format_actions_usage(self, actions, groups):
        usage = super()._format_actions_usage(actions, groups)
        return _FLAG_PATTERN.sub(rf"{Colors.GREEN}\1{Colors.RESET}", usage)


class ErrorFriendlyArgumentParser(argparse.ArgumentParser):
    """Argument parser printing a highlighted error plus help, exiting with the usage code"""

    def error(self, message: str) -> Never:
        logger.debug(f"Argument error in {self.prog}: {message}")
        print(f"\n{Colors.RED}❌ Error: {message}{Colors.RESET}\n", file=sys.stderr)
        self.print_help(sys.stderr)
        sys.exit(EXIT_USAGE)
