from src.tools.capacity_bound import Capacity_Bound_Tool
from src.tools.feasibility import Feasibility_Tool
from src.tools.gd_eval import GD_Eval_Tool
from src.tools.gd_min import GD_Min_Tool
from src.tools.proposition import Proposition_Tool
from src.tools.simulate_binary import Simulate_Binary_Tool
from src.tools.simulate_sphere import Simulate_Sphere_Tool
from src.tools.sweep import Sweep_Tool

from src.PerceptronLab.utils.errors import EXIT_DOMAIN
from src.PerceptronLab.utils.logger import get_logger

TOOL_CLASSES = {
    "gd-eval": GD_Eval_Tool,
    "gd-min": GD_Min_Tool,
    "sweep": Sweep_Tool,
    "capacity-bound": Capacity_Bound_Tool,
    "proposition": Proposition_Tool,
    "simulate-binary": Simulate_Binary_Tool,
    "simulate-sphere": Simulate_Sphere_Tool,
    "feasibility": Feasibility_Tool,
}


class ToolHandler:
    """
    Builds one tool per subcommand and dispatches calls to them.
    """

    def __init__(self, config):
        self.config = config
        self.log = get_logger("ToolHandler")
        self.tool_map = {name: cls(config=config) for name, cls in TOOL_CLASSES.items()}

    def metadata(self):
        return {name: tool.get_metadata() for name, tool in self.tool_map.items()}

    def handle_call(self, command, params):
        """
        Execute `command` with keyword `params`.

        Return format:
        {
            "success": bool,
            "message": str,
            "exit_code": int,
            "payload": dict or None
        }
        """
        tool = self.tool_map.get(command)
        if tool is None:
            self.log.warn(f"unknown command {command!r}")
            return {"success": False, "message": f"Unknown command: {command}", "exit_code": EXIT_DOMAIN, "payload": None}
        self.log.debug(f"{tool.tool_name} <= {params}")
        return tool.execute(**params)
