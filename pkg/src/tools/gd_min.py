from .base import BaseTool

from src.PerceptronLab.engines import gardner_derrida as gd


class GD_Min_Tool(BaseTool):

    def __init__(self, config=None):
        super().__init__(
            tool_name="GD_Min_Tool",
            tool_description="Minimises GD(alpha, q) over the overlap q and reports q*, GD(alpha) and the margin against -ln 2.",
            tool_version="1.0.0",
            input_types={
                "alpha": "float - constraint density in (0, 2).",
                "bits": "bool - also report values in bits.",
                "opt_tol": "float - tolerance on q* (optional).",
            },
            output_type="dict - { success, message, exit_code, payload: GdEvaluation fields }",
            demo_commands=[
                {
                    "command": "tool.execute(alpha=0.847)",
                    "description": "Minimiser near q = .504 and GD just below -ln 2.",
                }
            ],
            config=config,
        )

    def run(self, alpha, bits=False, opt_tol=None, rule=None, node_count=None, abs_tol=None):
        spec = self.quadrature_spec(rule=rule, node_count=node_count, abs_tol=abs_tol)
        opt_tol = float(self.setting("optimizer", "opt_tol", opt_tol, 1e-8))
        step = float(self.setting("optimizer", "q_grid_step", None, 0.01))
        evaluation = gd.gd_min(alpha, spec, opt_tol, step)

        lines = [
            f"alpha={evaluation.alpha:g} q*={evaluation.q_star:.8f} GD={evaluation.value:.10f} nats",
            f"GD + ln 2 = {evaluation.margin_vs_log2:.6e}",
        ]
        if bits:
            lines.append(f"GD = {evaluation.value_bits:.10f} bits")
        if evaluation.boundary_minimum:
            lines.append("minimum on the q upper bound: outside the formula's regime")
        payload = evaluation.to_dict()
        payload["quadrature"] = spec.to_dict()
        return "\n".join(lines), payload
