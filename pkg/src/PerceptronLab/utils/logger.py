import os
import sys
import datetime

# Colour per tag
COLOR = {
    "system": "\033[32m", "info": "\033[0m", "result": "\033[34m",
    "warn": "\033[33m", "error": "\033[31m", "debug": "\033[36m",
}

_state = {
    "history_file": None,
    "quiet": False,
    "use_color": None,
}


def configure(history_file=None, quiet=False, use_color=None):
    """
    Configure process-wide logging.

    Parameters:
        history_file (str): File receiving every log line untruncated (optional).
        quiet (bool): Suppress INFO and DEBUG lines on the console.
        use_color (bool): Force colours on/off; defaults to isatty(stderr).
    """
    _state["history_file"] = history_file
    _state["quiet"] = quiet
    _state["use_color"] = use_color
    if history_file:
        os.makedirs(os.path.dirname(os.path.abspath(history_file)), exist_ok=True)


def log_print(component, level, text, truncate=1_000):
    """Terminal colour + history file without truncation. Console output goes to stderr."""
    level = level.lower()
    tag = level.upper()
    prefix = f"[{component}] " if component else ""

    if not (_state["quiet"] and level in ("info", "debug")):
        use_color = _state["use_color"]
        if use_color is None:
            use_color = sys.stderr.isatty()
        show = text if len(text) <= truncate else text[:truncate] + "...(truncated)"
        if use_color:
            color = COLOR.get(level, "\033[0m")
            print(f"{color}[{tag}] {prefix}{show}\033[0m", file=sys.stderr)
        else:
            print(f"[{tag}] {prefix}{show}", file=sys.stderr)

    history_file = _state["history_file"]
    if history_file:
        try:
            ts = datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%d %H:%M:%S")
            with open(history_file, "a", encoding="utf-8") as f:
                f.write(f"[{ts}] [{tag}] {prefix}{text}\n")
        except OSError as e:
            print(f"[ERROR] write log failed: {e}", file=sys.stderr)


class ComponentLogger:
    """Binds a component name so engines can write `self.log.info(...)`."""

    def __init__(self, component):
        self.component = component

    def info(self, text):
        log_print(self.component, "info", text)

    def warn(self, text):
        log_print(self.component, "warn", text)

    def error(self, text):
        log_print(self.component, "error", text)

    def debug(self, text):
        log_print(self.component, "debug", text)

    def system(self, text):
        log_print(self.component, "system", text)


def get_logger(component):
    return ComponentLogger(component)
