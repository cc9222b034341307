import os
import json
import datetime

from src.PerceptronLab import __version__


def _now():
    return datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def manifest_path_for(output_path):
    return f"{output_path}.manifest.json"


class RunManifest:
    """
    Record of one command run: what was asked, with which seed, and what it wrote.

    Saved next to the primary output as `<output>.manifest.json`. Timestamps live
    here and nowhere else, so the data files themselves stay byte-reproducible.
    """

    def __init__(self, command, parameters=None, master_seed=None):
        self.command = command
        self.parameters = dict(parameters or {})
        self.master_seed = master_seed
        self.artifact_version = __version__
        self.started = _now()
        self.finished = None
        self.outputs = []
        self.context = {}
        self.path = None

    def add_output(self, path):
        if path not in self.outputs:
            self.outputs.append(path)

    def add_context(self, key, value):
        self.context[key] = value

    def finish(self):
        self.finished = _now()

    def to_dict(self):
        return {
            "command": self.command,
            "parameters": self.parameters,
            "master_seed": self.master_seed,
            "artifact_version": self.artifact_version,
            "started": self.started,
            "finished": self.finished,
            "outputs": list(self.outputs),
            "context": self.context,
        }

    def save(self, path):
        if self.finished is None:
            self.finish()
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(self.to_dict(), f, indent=4, ensure_ascii=False, sort_keys=True)
            f.write("\n")
        return path
