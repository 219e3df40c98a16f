# Status lines for the toolchain, written to stderr so stdout only carries reports
# NO_COLOR (any non-empty value) drops the emoji prefixes

import os
import sys

_quiet = False


def set_quiet(quiet: bool) -> None:
    global _quiet
    _quiet = quiet


def styled() -> bool:
    return not os.getenv("NO_COLOR")


def status(icon: str, message: str, always: bool = False) -> None:
    """Print one status line such as '✅ Model parsed'"""
    if _quiet and not always:
        return
    line = f"{icon} {message}" if styled() else message
    print(line, file=sys.stderr)


def banner(title: str) -> None:
    if _quiet:
        return
    status("🚀", title)
    print("=" * 60, file=sys.stderr)


def step(message: str) -> None:
    status("🔍", message)


def success(message: str) -> None:
    status("✅", message)


def warning(message: str) -> None:
    status("⚠️", message)


def failure(message: str) -> None:
    status("❌", message, always=True)


def artifact(path: str) -> None:
    status("📄", f"Wrote {path}")
