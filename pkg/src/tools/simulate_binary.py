import os

from .base import BaseTool

from src.PerceptronLab.engines import binary_experiment


class Simulate_Binary_Tool(BaseTool):

    def __init__(self, config=None):
        super().__init__(
            tool_name="Simulate_Binary_Tool",
            tool_description="Counts |Z_t| exactly on independent Gaussian instances and compares the mean counts with 2^(N - t).",
            tool_version="1.0.0",
            input_types={
                "n_dim": "int - N, at most 30.",
                "alpha": "float - constraint density; M = ceil(alpha N).",
                "trials": "int - number of instances.",
                "master_seed": "int - seed all per-trial seeds derive from.",
                "out": "str - CSV of seed,t,count (default <out_dir>/binary.csv); summary at <stem>.summary.json.",
                "workers": "int - process count (capped by PERCEPTRON_LAB_THREADS).",
            },
            output_type="dict - { success, message, exit_code, payload: {summary, outputs} }",
            demo_commands=[
                {
                    "command": "tool.execute(n_dim=12, alpha=1.0, trials=500, master_seed=1)",
                    "description": "Mean counts within a few standard errors of 2^(12 - t).",
                }
            ],
            config=config,
        )

    def run(self, n_dim, alpha, trials, master_seed=0, out=None, workers=None):
        workers = self.workers(workers)
        out = self.output_path(out, "binary.csv")
        summary_out = f"{os.path.splitext(out)[0]}.summary.json"

        result = binary_experiment.run_binary_trials(n_dim, alpha, trials, master_seed, workers)
        rows = [
            (report.seed, t, int(count))
            for report in result.reports
            for t, count in enumerate(report.counts)
        ]
        parameters = {"n_dim": n_dim, "alpha": alpha, "n_constraints": result.n_constraints, "trials": trials}
        manifest = self.start_manifest("simulate-binary", out, parameters, master_seed)
        self.write_csv(out, "binary_counts", rows, manifest)
        self.write_summary(summary_out, manifest, result.summary)
        manifest.add_context("workers", workers)
        self.close_manifest(manifest)

        max_z = result.summary["max_abs_z"]
        message = f"N={n_dim} M={result.n_constraints} trials={trials}"
        if max_z is not None:
            message += f": max |z| = {max_z:.3f}"
        message += f", mean empirical capacity {result.summary['capacity_mean']:.4f}"
        return message, {"summary": result.summary, "outputs": [out, summary_out], "manifest": manifest.path}
