from .base import BaseTool

from src.PerceptronLab.engines import moment_bounds


class Capacity_Bound_Tool(BaseTool):

    def __init__(self, config=None):
        super().__init__(
            tool_name="Capacity_Bound_Tool",
            tool_description="Locates the smallest alpha whose conditional first moment rate ln 2 + GD(alpha) + slack is negative.",
            tool_version="1.0.0",
            input_types={
                "slack": "float - concentration slack epsilon >= 0 (default from config, 1e-4).",
                "root_tol": "float - bisection tolerance on alpha (optional).",
                "bits": "bool - add the rate in bits.",
                "out": "str - write the certificate JSON here (optional).",
            },
            output_type="dict - { success, message, exit_code, payload: {alpha_star, certificate, annealed} }",
            demo_commands=[
                {
                    "command": "tool.execute(slack=0.0)",
                    "description": "alpha* close to .84655.",
                }
            ],
            config=config,
        )

    def run(self, slack=None, root_tol=None, bits=False, out=None, rule=None, node_count=None, abs_tol=None):
        spec = self.quadrature_spec(rule=rule, node_count=node_count, abs_tol=abs_tol)
        slack = float(self.setting("bounds", "slack_epsilon", slack, moment_bounds.DEFAULT_SLACK))
        root_tol = float(self.setting("optimizer", "root_tol", root_tol, 1e-6))
        bracket = tuple(self.setting("optimizer", "alpha_bracket", None, (0.8, 0.9)))

        alpha_star = moment_bounds.capacity_upper_bound(slack, spec, root_tol, bracket)
        # The root is known to root_tol; the certificate is taken just above it.
        certificate = moment_bounds.conditional_rate(alpha_star + root_tol, slack, spec)
        annealed = moment_bounds.annealed_certificate(alpha_star + root_tol)
        payload = {
            "alpha_star": alpha_star,
            "root_tol": root_tol,
            "certificate": certificate.to_dict(bits=bits),
            "annealed": annealed.to_dict(bits=bits),
            "quadrature": spec.to_dict(),
        }
        message = (
            f"alpha* = {alpha_star:.8f} (slack {slack:g}, tol {root_tol:g})\n"
            f"rate at alpha*+tol: {certificate.rate:.3e} nats ({certificate.conclusion.value})"
        )
        if out:
            manifest = self.start_manifest("capacity-bound", out, {"slack": slack, "root_tol": root_tol,
                                                                   "quadrature": spec.to_dict()})
            self.write_summary(out, manifest, payload)
            self.close_manifest(manifest)
            payload["outputs"] = [out]
        return message, payload
