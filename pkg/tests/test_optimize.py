import math

import numpy as np
import pytest

from czpulse.errors import ConfigError
from czpulse.io import write_csv
from czpulse.optimize import OptimizerOptions, SweepJob, nelder_mead, run_sweep


class TestNelderMead:
    def test_quadratic(self):
        x, f, evals = nelder_mead(lambda v: (v[0] - 3.0) ** 2,
                                  [0.0], OptimizerOptions(tol=1e-14))
        assert abs(x[0] - 3.0) < 1e-6
        assert evals <= 200

    def test_rosenbrock(self):
        def rosen(v):
            return (1 - v[0]) ** 2 + 100 * (v[1] - v[0] ** 2) ** 2

        opts = OptimizerOptions(max_evals=2000, restarts=4, simplex_scale=0.5, tol=1e-14)
        x, f, evals = nelder_mead(rosen, [-1.0, 1.0], opts)
        assert f < 1e-6
        assert evals <= 2000

    def test_never_worse_than_start(self):
        def bumpy(v):
            return math.sin(5 * v[0]) + 0.1 * v[0] ** 2

        x0 = np.array([0.3])
        _, f, _ = nelder_mead(bumpy, x0, OptimizerOptions())
        assert f <= bumpy(x0)

    def test_restart_dominance(self):
        def bumpy(v):
            return math.cos(7 * v[0]) + 0.05 * (v[0] - 1.0) ** 2

        f1 = nelder_mead(bumpy, [0.0], OptimizerOptions(restarts=1, seed=5))[1]
        f5 = nelder_mead(bumpy, [0.0], OptimizerOptions(restarts=5, seed=5))[1]
        assert f5 <= f1 + 1e-12

    def test_non_finite_rejected(self):
        def partial(v):
            if v[0] < 0:
                return math.nan
            return (v[0] - 0.5) ** 2

        x, f, _ = nelder_mead(partial, [0.4], OptimizerOptions())
        assert abs(x[0] - 0.5) < 1e-4

    def test_deterministic(self):
        def noisyish(v):
            return (v[0] - 1.0) ** 2 + 0.3 * math.sin(20 * v[0])

        a = nelder_mead(noisyish, [0.0], OptimizerOptions(seed=42))
        b = nelder_mead(noisyish, [0.0], OptimizerOptions(seed=42))
        assert a[0] == pytest.approx(b[0], abs=0.0)
        assert a[1] == b[1]

    def test_options_validation(self):
        with pytest.raises(ConfigError):
            OptimizerOptions(max_evals=10)
        with pytest.raises(ConfigError):
            OptimizerOptions(tol=0.0)


class TestSweep:
    def test_empty_grid(self, tmp_path):
        job = SweepJob("x", {"a": ()})
        rows = run_sweep(job, lambda pt, s: {"y": pt["a"]}, ["y"])
        assert rows == []
        path = tmp_path / "empty.csv"
        write_csv(path, ["a", "y", "error"], rows)
        assert path.read_text().splitlines() == ["a,y,error"]

    def test_rows_in_grid_order(self):
        job = SweepJob("x", {"a": (1, 2), "b": (10, 20)})
        rows = run_sweep(job, lambda pt, s: {"y": pt["a"] * pt["b"]}, ["y"])
        assert [(r["a"], r["b"]) for r in rows] == [(1, 10), (1, 20), (2, 10), (2, 20)]

    def test_deterministic_given_seed(self, tmp_path):
        def row(pt, seed):
            rng = np.random.default_rng(seed)
            return {"y": float(rng.standard_normal())}

        job = SweepJob("x", {"a": tuple(range(5))}, seed=123, workers=2)
        r1 = run_sweep(job, row, ["y"])
        r2 = run_sweep(job, row, ["y"])
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_csv(p1, ["a", "y", "error"], r1)
        write_csv(p2, ["a", "y", "error"], r2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_failures_tagged_not_raised(self):
        from czpulse.errors import DomainError

        def row(pt, seed):
            if pt["a"] == 2:
                raise DomainError("boom")
            return {"y": pt["a"]}

        rows = run_sweep(SweepJob("x", {"a": (1, 2, 3)}), row, ["y"])
        assert rows[0]["error"] == "" and rows[2]["error"] == ""
        assert "DomainError" in rows[1]["error"]
        assert math.isnan(rows[1]["y"])
