import os

from .base import BaseTool

from src.PerceptronLab.engines import spherical_experiment as sphere


class Simulate_Sphere_Tool(BaseTool):

    def __init__(self, config=None):
        super().__init__(
            tool_name="Simulate_Sphere_Tool",
            tool_description="Estimates the spherical free energy F(A) on independent instances, by direct Gaussian sampling or sequential hit-and-run conditioning.",
            tool_version="1.0.0",
            input_types={
                "n_dim": "int - N.",
                "alpha": "float - constraint density; M = ceil(alpha N).",
                "method": "str - direct or sequential.",
                "samples": "int - directions per instance (direct) or per constraint (sequential).",
                "trials": "int - number of instances.",
                "master_seed": "int - seed all per-trial seeds derive from.",
                "out": "str - CSV of seed,f_hat,stderr,truncated (default <out_dir>/sphere.csv).",
                "workers": "int - process count (capped by PERCEPTRON_LAB_THREADS).",
            },
            output_type="dict - { success, message, exit_code, payload: {summary, outputs} }",
            demo_commands=[
                {
                    "command": "tool.execute(n_dim=20, alpha=0.5, method='direct', samples=10**7, trials=20, master_seed=3)",
                    "description": "Mean f_hat near GD(.5).",
                },
                {
                    "command": "tool.execute(n_dim=25, alpha=1.5, method='sequential', samples=2000, trials=5)",
                    "description": "Far below the reach of direct sampling.",
                },
            ],
            config=config,
        )

    def run(self, n_dim, alpha, method="direct", samples=None, trials=1, master_seed=0, out=None, workers=None):
        method = sphere.EstimatorMethod.parse(method)
        workers = self.workers(workers)
        out = self.output_path(out, "sphere.csv")
        summary_out = f"{os.path.splitext(out)[0]}.summary.json"

        options = {}
        if method is sphere.EstimatorMethod.DIRECT_GAUSSIAN:
            samples = int(self.setting("simulation", "samples", samples, 1_000_000))
        else:
            samples = int(self.setting("simulation", "samples_per_step", samples, 2000))
            options = {
                "burn_in": int(self.setting("simulation", "burn_in", None, sphere.DEFAULT_BURN_IN)),
                "thinning": int(self.setting("simulation", "thinning", None, sphere.DEFAULT_THINNING)),
                "chains": int(self.setting("simulation", "chains", None, sphere.DEFAULT_CHAINS)),
                "max_iters": int(self.setting("simulation", "max_iters", None, sphere.DEFAULT_MAX_ITERS)),
                "retries": int(self.setting("simulation", "feasibility_retries", None, sphere.DEFAULT_RETRIES)),
            }

        result = sphere.run_sphere_trials(n_dim, alpha, method, samples, trials, master_seed, workers,
                                         spec=self.quadrature_spec(), **options)
        rows = [(e.seed, e.f_hat, e.stderr, e.truncated) for e in result.estimates]
        parameters = {
            "n_dim": n_dim, "alpha": alpha, "n_constraints": result.n_constraints, "method": method.value,
            "samples": samples, "trials": trials, **options,
        }
        manifest = self.start_manifest("simulate-sphere", out, parameters, master_seed)
        self.write_csv(out, "sphere_estimates", rows, manifest)
        self.write_summary(summary_out, manifest, result.summary)
        manifest.add_context("workers", workers)
        self.close_manifest(manifest)

        s = result.summary
        message = f"{method.value}: N={n_dim} M={result.n_constraints} mean f_hat={s['mean']:.6f}"
        if s["variance"] is not None:
            message += f" variance={s['variance']:.3e}"
        if s["gd_reference"] is not None:
            message += f" GD={s['gd_reference']:.6f}"
        if s["truncated_runs"]:
            message += f" truncated={s['truncated_runs']}"
        return message, {"summary": s, "outputs": [out, summary_out], "manifest": manifest.path}
