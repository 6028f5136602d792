"""Experiment driver: metrics, references, config parsing, CSV traces."""

import json
import os

import numpy as np
import pytest

from apdpro.bench import (
    CSV_HEADER,
    ExperimentConfig,
    InstanceSpec,
    _fmt,
    active_set_accuracy,
    build_instance,
    compute_metrics,
    get_reference,
    load_experiment_config,
    make_recorder,
    reference_solution,
    run_comparison,
    run_experiment,
    write_csv,
)
from apdpro.pagerank import make_synthetic_instance
from apdpro.problem import BlockNormObjective, derive_constants, feasible_ball, kkt_residual
from apdpro.solvers import IterateRecord, RecordInputs, SolverConfig, rapdpro
from helpers import write_edge_list


def _record_inputs(x_last, x_bar=None, **kw):
    defaults = dict(iter=1, epoch=0, y=np.zeros(1), rho=0.0, tau=0.25,
                    sigma=0.25, elapsed_s=0.0)
    defaults.update(kw)
    x_last = np.asarray(x_last, dtype=float)
    x_bar = x_last if x_bar is None else np.asarray(x_bar, dtype=float)
    return RecordInputs(x_last=x_last, x_bar=x_bar, **defaults)


def _synthetic_config(**overrides):
    kw = dict(
        instance=InstanceSpec(kind="synthetic", n=1, center=2.0, level=1.0),
        solver=SolverConfig(variant="apdpro", max_iters=2000),
        reference_mode="oracle",
    )
    kw.update(overrides)
    return ExperimentConfig(**kw)


def test_active_set_accuracy_examples():
    assert active_set_accuracy([0.0, 1.0, 0.0], [0.0, 2.0, 0.0]) == 1.0
    assert active_set_accuracy([1e-9, 1.0, 0.0], [0.0, 2.0, 0.0]) == 1.0
    assert active_set_accuracy([0.5, 1.0, 0.0], [0.0, 2.0, 0.0]) == pytest.approx(2.0 / 3.0)
    with pytest.raises(ValueError):
        active_set_accuracy([0.0], [0.0], threshold=0.0)


def test_active_set_accuracy_blockwise():
    obj = BlockNormObjective(blocks=((0, 2), (2, 1)), weights=(1.0, 1.0))
    # first block is nonzero through its second coordinate only
    acc = active_set_accuracy([0.0, 0.3, 0.0], [1.0, 0.0, 0.0], objective=obj)
    assert acc == 1.0
    acc = active_set_accuracy([0.0, 0.3, 0.0], [0.0, 0.0, 2.0], objective=obj)
    assert acc == 0.0


def test_compute_metrics_values(canonical):
    problem, _, x_star, _ = canonical
    ri = _record_inputs([1.1])
    rec = compute_metrics(problem, ri, metric="last", reference=(x_star, 1.0))
    assert rec.objective == pytest.approx(1.1)
    assert rec.rel_gap == pytest.approx(0.1)
    assert rec.feas_violation == 0.0  # g(1.1) < 0
    assert rec.active_set_acc == 1.0
    infeasible = compute_metrics(problem, _record_inputs([5.0]), metric="last")
    assert infeasible.feas_violation == pytest.approx(0.5 * 9.0 - 1.0)


def test_compute_metrics_without_reference(canonical):
    problem = canonical[0]
    rec = compute_metrics(problem, _record_inputs([1.0]))
    assert rec.rel_gap is None and rec.active_set_acc is None
    assert rec.objective == pytest.approx(1.0)


def test_compute_metrics_metric_switch(canonical):
    problem = canonical[0]
    ri = _record_inputs([1.0], x_bar=[0.5])
    assert compute_metrics(problem, ri, metric="last").objective == pytest.approx(1.0)
    assert compute_metrics(problem, ri, metric="ergodic").objective == pytest.approx(0.5)


def test_fmt_reproduces_floats_exactly():
    rng = np.random.default_rng(21)
    for v in rng.normal(scale=1e3, size=200):
        assert float(_fmt(float(v))) == float(v)
    assert _fmt(None) == ""
    assert _fmt(7) == "7"


def test_write_csv_layout(tmp_path):
    rows = [
        IterateRecord(iter=1, epoch=0, objective=1.5, rel_gap=None,
                      feas_violation=0.0, rho=0.1, tau=0.25, sigma=0.25,
                      active_set_acc=None, elapsed_s=0.01),
        IterateRecord(iter=2, epoch=0, objective=1.25, rel_gap=0.25,
                      feas_violation=0.0, rho=0.2, tau=0.2, sigma=0.3125,
                      active_set_acc=1.0, elapsed_s=0.02),
    ]
    path = tmp_path / "trace.csv"
    write_csv(str(path), rows)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 3
    first = lines[1].split(",")
    assert first[0] == "1" and first[3] == "" and first[8] == ""
    second = lines[2].split(",")
    assert float(second[3]) == 0.25 and float(second[8]) == 1.0


def test_reference_solution_oracle_matches_closed_form():
    bundle = build_instance(InstanceSpec(kind="synthetic", n=1, center=2.0, level=1.0))
    x, y, f = reference_solution(bundle, "oracle")
    assert x[0] == pytest.approx(2.0 - np.sqrt(2.0), abs=1e-14)
    assert y[0] == pytest.approx(1.0 / np.sqrt(2.0), abs=1e-14)
    assert f == pytest.approx(2.0 - np.sqrt(2.0), abs=1e-14)


def test_reference_solution_oracle_rejects_graphs(tmp_path):
    path = write_edge_list(tmp_path / "p2.txt", [(0, 1)])
    bundle = build_instance(InstanceSpec(kind="graph", path=path, alpha=0.5, b=-0.05))
    with pytest.raises(ValueError, match="synthetic"):
        reference_solution(bundle, "oracle")


def test_reference_solution_long_run_hits_kkt_target(tmp_path):
    path = write_edge_list(tmp_path / "p2.txt", [(0, 1)])
    bundle = build_instance(InstanceSpec(kind="graph", path=path, alpha=0.5, b=-0.05))
    x, y, f = reference_solution(bundle, "long-run")
    assert kkt_residual(bundle.problem, x, y).max() <= 1e-10
    assert f == pytest.approx(bundle.problem.f(x))


def test_get_reference_long_run_cache_roundtrip(tmp_path):
    path = write_edge_list(tmp_path / "p2c.txt", [(0, 1)])
    spec = InstanceSpec(kind="graph", path=path, alpha=0.5, b=-0.05)
    bundle = build_instance(spec)
    config = ExperimentConfig(instance=spec, solver=SolverConfig(variant="rapdpro"),
                              reference_mode="long-run")
    x1, y1, f1 = get_reference(bundle, config)
    caches = [p for p in os.listdir(tmp_path) if p.startswith(".ref-")]
    assert len(caches) == 1
    cache = tmp_path / caches[0]
    payload = json.loads(cache.read_text(encoding="utf-8"))
    assert payload["identity"] == bundle.identity
    # poison the stored primal point; a second call must read it back verbatim
    payload["x"] = [42.0] * len(payload["x"])
    cache.write_text(json.dumps(payload), encoding="utf-8")
    x2, _, _ = get_reference(bundle, config)
    assert np.array_equal(x2, 42.0 * np.ones_like(x1))
    # an identity mismatch invalidates the cache and recomputes
    payload["identity"] = "something else"
    cache.write_text(json.dumps(payload), encoding="utf-8")
    x3, _, f3 = get_reference(bundle, config)
    assert np.allclose(x3, x1, atol=1e-9) and f3 == pytest.approx(f1, abs=1e-12)


def test_get_reference_unconverged_warns_and_returns_none(tmp_path):
    path = write_edge_list(tmp_path / "p2u.txt", [(0, 1)])
    spec = InstanceSpec(kind="graph", path=path, alpha=0.5, b=-0.05)
    bundle = build_instance(spec)
    config = ExperimentConfig(instance=spec, solver=SolverConfig(variant="rapdpro"),
                              reference_mode="long-run", budget_iters=5, budget_epochs=1)
    with pytest.warns(UserWarning, match="reference unavailable"):
        assert get_reference(bundle, config) is None


def test_get_reference_file_mode(tmp_path, canonical):
    _, _, x_star, y_star = canonical
    ref_path = tmp_path / "ref.json"
    ref_path.write_text(json.dumps({"x": list(x_star), "y": list(y_star)}), encoding="utf-8")
    spec = InstanceSpec(kind="synthetic", n=1, center=2.0, level=1.0)
    config = ExperimentConfig(instance=spec, solver=SolverConfig(variant="apdpro"),
                              reference_mode="file", reference_path=str(ref_path))
    bundle = build_instance(spec)
    x, y, f = get_reference(bundle, config)
    assert np.array_equal(x, x_star) and f == pytest.approx(bundle.problem.f(x_star))
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"x": [1.0, 2.0]}), encoding="utf-8")
    with pytest.raises(ValueError, match="primal"):
        get_reference(bundle, ExperimentConfig(
            instance=spec, solver=SolverConfig(variant="apdpro"),
            reference_mode="file", reference_path=str(bad)))


def test_load_experiment_config_full(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text(
        "[instance]\nkind = synthetic\nn = 2\ncenter = 1.5\nlevel = 0.5\n"
        "[solver]\nvariant = rapdpro\nvariants = apdpro, apd\nmax_iters = 300\n"
        "max_epochs = 4\ntau0 = 0.1\nrestart_period = inf\ndisable_estimator = no\n"
        "record_every = 2\nmetric_iterate = ergodic\nx0 = strict\n"
        "[reference]\nmode = oracle\nbudget_iters = 50\ntruncation = 1e-6\n"
        "[output]\npath = out.csv\n",
        encoding="utf-8",
    )
    cfg = load_experiment_config(str(path))
    assert cfg.instance.kind == "synthetic" and cfg.instance.n == 2
    assert cfg.instance.center == 1.5 and cfg.instance.level == 0.5
    assert cfg.solver.variant == "rapdpro" and cfg.solver.max_iters == 300
    assert cfg.solver.max_epochs == 4 and cfg.solver.tau0 == 0.1
    assert cfg.solver.restart_period == float("inf")
    assert cfg.solver.disable_estimator is False
    assert cfg.solver.record_every == 2 and cfg.solver.metric_iterate == "ergodic"
    assert cfg.variants == ("apdpro", "apd")
    assert cfg.reference_mode == "oracle" and cfg.budget_iters == 50
    assert cfg.truncation == 1e-6
    assert cfg.output_path == "out.csv" and cfg.x0_rule == "strict"


def test_load_experiment_config_rejects_typos(tmp_path):
    def load(text):
        p = tmp_path / "bad.ini"
        p.write_text(text, encoding="utf-8")
        return load_experiment_config(str(p))

    with pytest.raises(ValueError, match="unknown key"):
        load("[instance]\nkind = synthetic\nnn = 3\n")
    with pytest.raises(ValueError, match=r"unknown section \[solvers\]"):
        load("[instance]\nkind = synthetic\n[solvers]\nvariant = apd\n")
    with pytest.raises(ValueError, match=r"missing \[instance\]"):
        load("[solver]\nvariant = apd\n")
    with pytest.raises(ValueError, match="boolean"):
        load("[instance]\nkind = synthetic\n[solver]\ndisable_estimator = maybe\n")


def test_run_experiment_is_deterministic(tmp_path):
    out1, out2 = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    res1 = run_experiment(_synthetic_config(
        solver=SolverConfig(variant="apdpro", max_iters=400), output_path=out1))
    res2 = run_experiment(_synthetic_config(
        solver=SolverConfig(variant="apdpro", max_iters=400), output_path=out2))
    assert len(res1.trace) == len(res2.trace) == 400
    for a, b in zip(res1.trace, res2.trace):
        assert (a.iter, a.epoch, a.objective, a.rel_gap, a.feas_violation,
                a.rho, a.tau, a.sigma, a.active_set_acc) == \
               (b.iter, b.epoch, b.objective, b.rel_gap, b.feas_violation,
                b.rho, b.tau, b.sigma, b.active_set_acc)


def test_canonical_long_trace_reaches_tiny_gap(tmp_path):
    out = str(tmp_path / "run.csv")
    run_experiment(_synthetic_config(output_path=out))
    lines = open(out, encoding="utf-8").read().splitlines()
    assert len(lines) == 2001
    final = lines[-1].split(",")
    assert float(final[3]) <= 1e-6


def test_rapdpro_gap_windows_soft_nonincreasing():
    res = run_experiment(_synthetic_config(
        solver=SolverConfig(variant="rapdpro", max_iters=2000, max_epochs=12)))
    gaps = np.array([r.rel_gap for r in res.trace])
    w = 50
    means = [max(float(gaps[i:i + w].mean()), 1e-14)
             for i in range(0, len(gaps) - w + 1, w)]
    assert len(means) >= 5
    for prev, cur in zip(means, means[1:]):
        assert cur <= 10.0 * prev


def test_rapdpro_active_set_reaches_one_and_keeps_it():
    problem, x_star, y_star = make_synthetic_instance(3, np.array([2.0, 0.05, 1.5]), 1.0)
    constants = derive_constants(problem, feasible_ball(problem, [problem.strict_point]))
    cfg = SolverConfig(variant="rapdpro", max_iters=2000, max_epochs=8)
    recorder = make_recorder(problem, "rapdpro", cfg, (x_star, y_star, problem.f(x_star)))
    res = rapdpro(problem, constants, cfg, np.zeros(3), np.zeros(1), recorder=recorder)
    accs = np.array([r.active_set_acc for r in res.trace])
    hits = np.nonzero(accs >= 1.0)[0]
    assert hits.size > 0
    assert np.all(accs[hits[0]:] >= 1.0)


def test_comparison_estimated_steps_beat_constant_steps(tmp_path):
    out = str(tmp_path / "cmp.csv")
    config = _synthetic_config(
        solver=SolverConfig(variant="apdpro", max_iters=2000),
        variants=("apdpro", "apd"),
        output_path=out,
    )
    results = run_comparison(config)
    assert set(results) == {"apdpro", "apd"}
    assert os.path.exists(tmp_path / "cmp-apdpro.csv")
    assert os.path.exists(tmp_path / "cmp-apd.csv")

    def first_hit(trace):
        for r in trace:
            if r.rel_gap is not None and r.rel_gap <= 1e-6:
                return r.iter
        return None

    fast = first_hit(results["apdpro"].trace)
    slow = first_hit(results["apd"].trace)
    assert fast is not None
    assert slow is None or fast < slow
