from .base import BaseTool

from src.PerceptronLab.engines import gardner_derrida as gd
from src.PerceptronLab.engines.quadrature import expected_log_tail


class GD_Eval_Tool(BaseTool):

    def __init__(self, config=None):
        super().__init__(
            tool_name="GD_Eval_Tool",
            tool_description="Evaluates the Gardner-Derrida functional GD(alpha, q) at one point.",
            tool_version="1.0.0",
            input_types={
                "alpha": "float - constraint density in (0, 2).",
                "q": "float - overlap in [0, 1).",
                "bits": "bool - also report the value divided by ln 2.",
                "rule": "str - quadrature rule, gauss_hermite or adaptive_interval (optional).",
                "node_count": "int - starting Gauss-Hermite nodes (optional).",
                "abs_tol": "float - quadrature tolerance (optional).",
            },
            output_type="dict - { success, message, exit_code, payload: {alpha, q, gd_nats, gd_bits, error_estimate} }",
            demo_commands=[
                {
                    "command": "tool.execute(alpha=0.847, q=0.5)",
                    "description": "GD at the closed-form overlap; -0.693574 nats.",
                },
                {
                    "command": "tool.execute(alpha=0.847, q=0.5, bits=True)",
                    "description": "Same value in bits, -1.000615.",
                },
            ],
            config=config,
        )

    def run(self, alpha, q, bits=False, rule=None, node_count=None, abs_tol=None):
        spec = self.quadrature_spec(rule=rule, node_count=node_count, abs_tol=abs_tol)
        point = gd.GdPoint(alpha, q)
        value = gd.gd_at(point, spec)
        error = alpha * expected_log_tail(point.q, spec).error_estimate
        payload = {
            "alpha": point.alpha,
            "q": point.q,
            "gd_nats": value,
            "gd_bits": value / gd.LN2,
            "error_estimate": error,
            "quadrature": spec.to_dict(),
        }
        message = f"GD(alpha={point.alpha:g}, q={point.q:g}) = {value:.6f} nats"
        if bits:
            message += f"\nGD(alpha={point.alpha:g}, q={point.q:g}) = {value / gd.LN2:.6f} bits"
        return message, payload
