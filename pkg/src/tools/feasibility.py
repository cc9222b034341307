from .base import BaseTool

from src.PerceptronLab.engines import spherical_experiment as sphere


class Feasibility_Tool(BaseTool):

    def __init__(self, config=None):
        super().__init__(
            tool_name="Feasibility_Tool",
            tool_description="Searches perceptron witnesses for A sigma > 0 over a list of densities and reports the witness rate per alpha.",
            tool_version="1.0.0",
            input_types={
                "n_dim": "int - N.",
                "alpha_values": "list - densities to check.",
                "trials": "int - instances per alpha.",
                "master_seed": "int - seed all per-trial seeds derive from.",
                "max_iters": "int - perceptron update budget (optional).",
                "out": "str - CSV of alpha,trials,found,rate (default <out_dir>/feasibility.csv).",
            },
            output_type="dict - { success, message, exit_code, payload: {rows, outputs} }",
            demo_commands=[
                {
                    "command": "tool.execute(n_dim=40, alpha_values=[1.0, 3.0], trials=50)",
                    "description": "Witnesses almost always at alpha = 1, almost never at alpha = 3.",
                }
            ],
            config=config,
        )

    def run(self, n_dim, alpha_values, trials, master_seed=0, max_iters=None, out=None, workers=None):
        max_iters = int(self.setting("simulation", "max_iters", max_iters, sphere.DEFAULT_MAX_ITERS))
        workers = self.workers(workers)
        out = self.output_path(out, "feasibility.csv")

        rows = sphere.feasibility_sweep(n_dim, alpha_values, trials, master_seed, max_iters, workers)
        manifest = self.start_manifest("feasibility", out, {
            "n_dim": n_dim, "alpha_values": list(alpha_values), "trials": trials, "max_iters": max_iters,
        }, master_seed)
        self.write_csv(out, "feasibility", [(r["alpha"], r["trials"], r["found"], r["rate"]) for r in rows], manifest)
        manifest.add_context("cover_rates", {str(r["alpha"]): r["cover_rate"] for r in rows})
        self.close_manifest(manifest)

        message = "\n".join(
            f"alpha={r['alpha']:g}: {r['found']}/{r['trials']} witnesses (Cover {r['cover_rate']:.3f})" for r in rows
        )
        return message, {"rows": rows, "outputs": [out], "manifest": manifest.path}
