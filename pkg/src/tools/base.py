import os
import traceback

from src.PerceptronLab.engines.quadrature import QuadratureSpec
from src.PerceptronLab.utils import io
from src.PerceptronLab.utils.config import resolve_workers, section
from src.PerceptronLab.utils.errors import EXIT_OK, PerceptronLabError, exit_code_for
from src.PerceptronLab.utils.logger import get_logger
from src.PerceptronLab.utils.shared_context import RunManifest, manifest_path_for

SUMMARY_SCHEMA = "summary/v1"


class BaseTool:
    """
    A base class for the command tools: one tool per subcommand, each wrapping
    library operations and reporting a result dict instead of raising.
    """

    def __init__(self, tool_name=None, tool_description=None, tool_version=None, input_types=None, output_type=None, demo_commands=None, output_dir=None, user_metadata=None, config=None):
        """
        Initialize the base tool with optional metadata.

        Parameters:
            tool_name (str): The name of the tool.
            tool_description (str): A description of the tool.
            tool_version (str): The version of the tool.
            input_types (dict): The expected input types for the tool.
            output_type (str): The expected output type for the tool.
            demo_commands (list): A list of example commands for using the tool.
            output_dir (str): The directory where the tool should save its output (optional).
            user_metadata (dict): Additional metadata specific to user needs (optional).
            config (dict): Loaded configuration; sections are read with in-code fallbacks.
        """
        self.config = config or {}
        self.tool_name = tool_name
        self.tool_description = tool_description
        self.tool_version = tool_version
        self.input_types = input_types
        self.output_type = output_type
        self.demo_commands = demo_commands
        self.output_dir = output_dir
        self.user_metadata = user_metadata
        if self.output_dir is None:
            self.output_dir = section(self.config, "output").get("out_dir", "runs")
        self.log = get_logger(tool_name or type(self).__name__)

    def get_metadata(self):
        """
        Returns the metadata for the tool.

        Returns:
            dict: A dictionary containing the tool's metadata.
        """
        metadata = {
            "tool_name": self.tool_name,
            "tool_description": self.tool_description,
            "tool_version": self.tool_version,
            "input_types": self.input_types,
            "output_type": self.output_type,
            "demo_commands": self.demo_commands,
        }
        if self.user_metadata:
            metadata["user_metadata"] = self.user_metadata
        return metadata

    def setting(self, section_name, key, value=None, default=None):
        """Flag value if given, else the config entry, else the in-code default."""
        if value is not None:
            return value
        return section(self.config, section_name).get(key, default)

    def quadrature_spec(self, **overrides):
        return QuadratureSpec.from_config(self.config, **overrides)

    def workers(self, requested=None):
        return resolve_workers(self.config, requested)

    def output_path(self, out, default_name):
        return out or os.path.join(self.output_dir, default_name)

    def write_summary(self, path, manifest, results):
        """Summary JSON in the summary/v1 schema; references the manifest by file name."""
        payload = {
            "schema": SUMMARY_SCHEMA,
            "command": manifest.command,
            "artifact_version": manifest.artifact_version,
            "manifest": os.path.basename(manifest.path),
            "parameters": manifest.parameters,
            "master_seed": manifest.master_seed,
            "results": results,
        }
        io.write_json(path, payload)
        manifest.add_output(path)
        return path

    def write_csv(self, path, schema, rows, manifest):
        version = int(section(self.config, "output").get("csv_schema_version", 1))
        io.write_csv(path, schema, rows, os.path.basename(manifest.path), version)
        manifest.add_output(path)
        return path

    def start_manifest(self, command, primary_output, parameters, master_seed=None):
        """One manifest per run, saved as `<primary output>.manifest.json`."""
        manifest = RunManifest(command, parameters, master_seed)
        manifest.path = manifest_path_for(primary_output)
        return manifest

    def close_manifest(self, manifest):
        manifest.finish()
        manifest.save(manifest.path)
        self.log.info(f"manifest written to {manifest.path}")
        return manifest.path

    def run(self, **kwargs):
        """
        The tool's main functionality. Returns (message, payload). Subclasses override.

        Raises:
            NotImplementedError: If the subclass does not implement this method.
        """
        raise NotImplementedError("Subclasses must implement the run method.")

    def execute(self, **kwargs):
        """
        Run the tool and report the outcome.

        Returns:
            dict: {"success": bool, "message": str, "exit_code": int, "payload": dict or None}
        """
        try:
            message, payload = self.run(**kwargs)
        except (PerceptronLabError, OSError) as e:
            self.log.error(f"{type(e).__name__}: {e}")
            return {"success": False, "message": f"Error: {e}", "exit_code": exit_code_for(e), "payload": None}
        except Exception as e:
            self.log.error(f"unexpected {type(e).__name__}: {e!r}")
            traceback.print_exc()
            return {"success": False, "message": f"Error: {e}", "exit_code": exit_code_for(e), "payload": None}
        return {"success": True, "message": message, "exit_code": EXIT_OK, "payload": payload}
