from .base import BaseTool

from src.PerceptronLab.engines import gardner_derrida as gd


class Proposition_Tool(BaseTool):

    def __init__(self, config=None):
        super().__init__(
            tool_name="Proposition_Tool",
            tool_description="Reports the margin -(GD(alpha) + ln 2) at alpha = .847, the q = 1/2 closed form, and how the quoted .002 constant compares.",
            tool_version="1.0.0",
            input_types={
                "alpha": "float - density to report at (default .847).",
                "stated_margin": "float - the constant to compare against (default .002).",
            },
            output_type="dict - { success, message, exit_code, payload: PropositionReport fields }",
            demo_commands=[
                {
                    "command": "tool.execute()",
                    "description": "Closed-form margin 4.2641e-4 and a note that .002 exceeds it.",
                }
            ],
            config=config,
        )

    def run(self, alpha=gd.PROPOSITION_ALPHA, stated_margin=gd.STATED_PROPOSITION_MARGIN, bits=False,
            rule=None, node_count=None, abs_tol=None):
        spec = self.quadrature_spec(rule=rule, node_count=node_count, abs_tol=abs_tol)
        report = gd.proposition_margin(spec, alpha, stated_margin)
        lines = [
            f"alpha={report.alpha:g}: q*={report.q_star:.6f} GD={report.gd_value:.10f} margin={report.margin:.6e}",
            f"q=1/2 closed form: GD={report.closed_form_value:.10f} margin={report.closed_form_margin:.6e}",
            f"stated margin {report.stated_margin:g} supported: {report.stated_margin_supported}",
        ]
        if bits:
            lines.append(f"margin in bits: {report.margin / gd.LN2:.6e} (closed form {report.closed_form_margin / gd.LN2:.6e})")
        lines.extend(f"note: {n}" for n in report.notes)
        return "\n".join(lines), report.to_dict()
