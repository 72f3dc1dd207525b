import math

import numpy as np
import pytest

from sparse_gp.assembly import plan_assembly
from sparse_gp.bench.synthetic import make_synthetic_dataset
from sparse_gp.errors import ConfigError, HyperparameterError, InputError, StaleCheckpointError
from sparse_gp.gp import (
    Dataset,
    MeanFunction,
    MeanKind,
    NoiseKind,
    NoiseModel,
    SolverSettings,
    VarianceKind,
    clamp_variances,
    dense_log_marginal_likelihood,
    dense_reference_fit_predict,
    fit_cache,
    load_checkpoint,
    log_marginal_likelihood,
    posterior_predict,
    read_predictions,
    restore_model,
    save_checkpoint,
    write_predictions,
)
from sparse_gp.kernels import FieldKind, FieldRole, HyperparameterSlot, KernelSpec, ParametricField, Scale, Wendland
from sparse_gp.kernels import build_preset
from sparse_gp.mcmc.models import HyperparameterVector
from sparse_gp.monitoring import Monitor, RecordingNotifier

TIGHT = SolverSettings(tol=1e-11, predict_tol=1e-11)


def _nonstat_problem(n: int = 300, seed: int = 0):
    dataset = make_synthetic_dataset(n, 0.1, seed).dataset
    spec = build_preset("nonstat_wendland", centers_per_axis=4)
    noise = NoiseModel.constant("noise_var", (1e-6, 1.0))
    mean = MeanFunction()
    theta = HyperparameterVector((*spec.slots, *noise.slots)).initial()
    theta.update({"length_log": math.log(0.04), "signal_w1": 0.4, "length_w2": -0.5, "noise_var": 0.01})
    return dataset, spec, noise, mean, theta


def test_lml_unit_scalar_case():
    dataset = Dataset.from_arrays(np.array([[0.0]]), np.array([0.0]))
    spec = KernelSpec(root=Wendland(1.0))
    evaluation = log_marginal_likelihood(
        spec, {}, dataset, NoiseModel.constant(0.0), MeanFunction(), plan_assembly(1)
    )
    assert evaluation.valid
    assert evaluation.value == pytest.approx(-0.5 * math.log(2 * math.pi), rel=1e-12)
    assert evaluation.value == pytest.approx(-0.9189385, abs=1e-7)


def test_lml_identity_covariance():
    dataset = Dataset.from_arrays(np.array([[0.0], [5.0]]), np.array([1.0, 0.0]))
    spec = KernelSpec(root=Wendland(1.0))
    evaluation = log_marginal_likelihood(
        spec, {}, dataset, NoiseModel.constant(0.0), MeanFunction(), plan_assembly(2)
    )
    assert evaluation.value == pytest.approx(-0.5 - math.log(2 * math.pi), rel=1e-12)
    assert evaluation.value == pytest.approx(-2.3378771, abs=1e-7)


def test_lml_matches_dense_oracle():
    dataset, spec, noise, mean, theta = _nonstat_problem()
    evaluation = log_marginal_likelihood(
        spec, theta, dataset, noise, mean, plan_assembly(dataset.n, block_size=64, workers=2), TIGHT
    )
    expected = dense_log_marginal_likelihood(spec, theta, dataset, noise, mean)
    assert evaluation.valid
    assert evaluation.value == pytest.approx(expected, rel=1e-6)
    assert evaluation.assembly.density < 0.5
    assert set(evaluation.timings()) == {"covariance_s", "solve_s", "logdet_s", "total_s"}


def test_lml_with_constant_mean_and_per_point_noise():
    dataset, spec, _, _, theta = _nonstat_problem(n=120, seed=3)
    theta.pop("noise_var")
    rng = np.random.default_rng(1)
    noise = NoiseModel(NoiseKind.PER_POINT, per_point=rng.uniform(0.005, 0.05, size=dataset.n))
    mean = MeanFunction(
        MeanKind.CONSTANT, slots=(HyperparameterSlot("mean_value", -2.0, 2.0, block="mean"),), value="mean_value"
    )
    theta["mean_value"] = 0.3
    evaluation = log_marginal_likelihood(spec, theta, dataset, noise, mean, plan_assembly(dataset.n, 50), TIGHT)
    expected = dense_log_marginal_likelihood(spec, theta, dataset, noise, mean)
    assert evaluation.value == pytest.approx(expected, rel=1e-6)


def test_lml_with_parametric_noise_field():
    dataset, spec, _, mean, theta = _nonstat_problem(n=80, seed=4)
    theta.pop("noise_var")
    noise = NoiseModel(
        NoiseKind.PARAMETRIC,
        slots=(
            HyperparameterSlot("noise_log", -6.0, 0.0, block="noise"),
            HyperparameterSlot("noise_slope", -3.0, 3.0, block="noise"),
        ),
        std_field=ParametricField(
            kind=FieldKind.AXIS_LINEAR, role=FieldRole.NOISE_STD, intercept="noise_log", slopes=("noise_slope",)
        ),
    )
    theta.update({"noise_log": -2.5, "noise_slope": 1.0})
    evaluation = log_marginal_likelihood(spec, theta, dataset, noise, mean, plan_assembly(dataset.n, 32), TIGHT)
    expected = dense_log_marginal_likelihood(spec, theta, dataset, noise, mean)
    assert evaluation.value == pytest.approx(expected, rel=1e-6)


def test_lml_rejects_out_of_bounds_theta():
    dataset, spec, noise, mean, theta = _nonstat_problem(n=20)
    theta["noise_var"] = 5.0
    with pytest.raises(HyperparameterError):
        log_marginal_likelihood(spec, theta, dataset, noise, mean, plan_assembly(dataset.n))


def test_lml_solver_stall_is_an_invalid_evaluation():
    dataset, spec, noise, mean, theta = _nonstat_problem(n=100)
    notifier = RecordingNotifier()
    evaluation = log_marginal_likelihood(
        spec,
        theta,
        dataset,
        noise,
        mean,
        plan_assembly(dataset.n),
        SolverSettings(tol=1e-14, maxiter=1),
        monitor=Monitor(notifier),
    )
    assert not evaluation.valid
    assert evaluation.value == -math.inf
    assert evaluation.reason == "minres"
    assert notifier.messages[0][0] == "MINRES"


def test_posterior_matches_dense_oracle():
    dataset, spec, noise, mean, theta = _nonstat_problem()
    model = fit_cache(spec, theta, dataset, noise, mean, plan_assembly(dataset.n, 64), TIGHT)
    test = np.linspace(0.0, 1.0, 40)[:, None]
    sparse_post = posterior_predict(model, test)
    dense_post = dense_reference_fit_predict(dataset, spec, theta, test, noise, mean)
    assert np.allclose(sparse_post.mean, dense_post.mean, rtol=0, atol=1e-6)
    assert np.allclose(sparse_post.variance, dense_post.variance, rtol=0, atol=1e-6)
    assert not sparse_post.failed.any()
    assert sparse_post.kind == VarianceKind.LATENT


def test_observed_variance_adds_noise():
    dataset, spec, noise, mean, theta = _nonstat_problem(n=100)
    model = fit_cache(spec, theta, dataset, noise, mean, plan_assembly(dataset.n), TIGHT)
    test = np.array([[0.2], [0.7]])
    latent = posterior_predict(model, test, VarianceKind.LATENT)
    observed = posterior_predict(model, test, VarianceKind.OBSERVED)
    assert np.allclose(observed.variance - latent.variance, theta["noise_var"])
    assert np.array_equal(observed.mean, latent.mean)


def test_per_point_noise_needs_test_variances_for_observed_predictions():
    dataset = Dataset.from_arrays(np.array([[0.0], [1.0]]), np.array([0.5, -0.5]))
    spec = KernelSpec(root=Wendland(0.2))
    noise = NoiseModel(NoiseKind.PER_POINT, per_point=np.array([0.1, 0.2]))
    model = fit_cache(spec, {}, dataset, noise, MeanFunction(), plan_assembly(2))
    with pytest.raises(InputError):
        posterior_predict(model, np.array([[0.5]]), VarianceKind.OBSERVED)
    observed = posterior_predict(model, np.array([[0.5]]), VarianceKind.OBSERVED, test_noise=np.array([0.3]))
    assert observed.variance[0] == pytest.approx(1.3)


def test_noiseless_interpolation_reproduces_training_targets():
    dataset = Dataset.from_arrays(np.array([[0.0], [1.0], [2.0]]), np.array([0.4, -1.2, 2.5]))
    spec = KernelSpec(root=Scale(2.0, Wendland(0.1)))
    model = fit_cache(spec, {}, dataset, NoiseModel.constant(0.0), MeanFunction(), plan_assembly(3))
    post = posterior_predict(model, dataset.x)
    assert np.allclose(post.mean, dataset.y)
    assert np.all(np.abs(post.variance) <= 1e-8 * 2.0)


def test_far_test_point_recovers_the_prior():
    dataset = Dataset.from_arrays(np.array([[0.0], [0.05]]), np.array([1.0, 2.0]))
    spec = KernelSpec(root=Scale(1.5, Wendland(0.2)))
    mean = MeanFunction(MeanKind.CONSTANT, value=0.5)
    model = fit_cache(spec, {}, dataset, NoiseModel.constant(0.01), mean, plan_assembly(2))
    post = posterior_predict(model, np.array([[10.0]]))
    assert post.mean[0] == 0.5
    assert post.variance[0] == pytest.approx(1.5)


def test_dense_reference_single_point():
    dataset = Dataset.from_arrays(np.array([[0.3]]), np.array([1.7]))
    spec = KernelSpec(root=Wendland(1.0))
    post = dense_reference_fit_predict(dataset, spec, {}, np.array([[0.3]]), NoiseModel.constant(0.0))
    assert post.mean[0] == pytest.approx(1.7)
    assert post.variance[0] == pytest.approx(0.0, abs=1e-12)


def test_prediction_dimension_mismatch():
    dataset, spec, noise, mean, theta = _nonstat_problem(n=30)
    model = fit_cache(spec, theta, dataset, noise, mean, plan_assembly(dataset.n))
    with pytest.raises(InputError):
        posterior_predict(model, np.zeros((2, 2)))


def test_clamp_variances_reports_only_large_negatives():
    notifier = RecordingNotifier()
    variance, clamped, warned = clamp_variances(
        np.array([-1e-12, -0.5, 0.25]), np.array([1.0, 1.0, 1.0]), monitor=Monitor(notifier)
    )
    assert variance.tolist() == [0.0, 0.0, 0.25]
    assert clamped == 2
    assert warned == 1
    assert [event for event, _ in notifier.messages] == ["NEGATIVE_VARIANCE"]


def test_clamp_variances_is_silent_for_rounding_noise():
    notifier = RecordingNotifier()
    _, clamped, warned = clamp_variances(np.array([-1e-10]), np.array([1.0]), monitor=Monitor(notifier))
    assert (clamped, warned) == (1, 0)
    assert notifier.messages == []


def test_mean_plugin_must_resolve():
    mean = MeanFunction(MeanKind.PLUGIN, plugin="no_such_module:offset")
    with pytest.raises(ConfigError):
        mean.evaluate(np.zeros((2, 1)), {})


def test_checkpoint_restores_the_same_predictions(tmp_path):
    dataset, spec, noise, mean, theta = _nonstat_problem(n=150)
    model = fit_cache(spec, theta, dataset, noise, mean, plan_assembly(dataset.n, 40), TIGHT)
    path = save_checkpoint(tmp_path / "model.json", model, data_source={"source": "test"}, log_posterior=-12.5)

    checkpoint = load_checkpoint(path)
    assert checkpoint.fingerprint == dataset.fingerprint()
    assert checkpoint.theta == model.theta
    assert checkpoint.log_posterior == -12.5
    assert checkpoint.data_source == {"source": "test"}

    restored = restore_model(checkpoint, dataset, workers=3)
    assert restored.matrix.digest() == model.matrix.digest()
    test = np.linspace(0.0, 1.0, 15)[:, None]
    first = posterior_predict(model, test)
    second = posterior_predict(restored, test)
    assert np.allclose(first.mean, second.mean, rtol=0, atol=1e-12)
    assert np.allclose(first.variance, second.variance, rtol=0, atol=1e-12)


def test_checkpoint_refuses_changed_training_data(tmp_path):
    dataset, spec, noise, mean, theta = _nonstat_problem(n=40)
    model = fit_cache(spec, theta, dataset, noise, mean, plan_assembly(dataset.n))
    checkpoint = load_checkpoint(save_checkpoint(tmp_path / "model.json", model))
    changed_y = dataset.y.copy()
    changed_y[0] += 1e-9
    with pytest.raises(StaleCheckpointError):
        restore_model(checkpoint, Dataset(dataset.points, changed_y))


def test_unreadable_checkpoint_is_a_config_error(tmp_path):
    path = tmp_path / "model.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_checkpoint(path)
    path.write_text('{"schema_version": 99}', encoding="utf-8")
    with pytest.raises(ConfigError):
        load_checkpoint(path)


def test_prediction_file_format(tmp_path):
    dataset, spec, noise, mean, theta = _nonstat_problem(n=40)
    model = fit_cache(spec, theta, dataset, noise, mean, plan_assembly(dataset.n))
    post = posterior_predict(model, np.array([[0.1], [0.9]]), VarianceKind.OBSERVED)
    path = write_predictions(tmp_path / "predictions.csv", post)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "index,mean,variance,variance_kind"
    table = read_predictions(path)
    assert table["index"].tolist() == [0, 1]
    assert table["mean"].tolist() == post.mean.tolist()
    assert table["variance_kind"].tolist() == ["y", "y"]


def test_prediction_file_header_is_checked(tmp_path):
    path = tmp_path / "predictions.csv"
    path.write_text("idx,mu\n0,1.0\n", encoding="utf-8")
    with pytest.raises(InputError):
        read_predictions(path)


def _random_problem(seed: int):
    rng = np.random.default_rng(seed)
    dim = 1 + seed % 2
    x = rng.uniform(0.0, 1.0, size=(300, dim))
    y = np.sin(6.0 * x).sum(axis=1) + rng.normal(0.0, 0.1, size=300)
    spec = build_preset("nonstat_wendland", dim=dim, centers_per_axis=3 if dim == 1 else 2)
    noise = NoiseModel.constant("noise_var", (1e-6, 1.0))
    theta = {}
    for slot in spec.slots:
        if slot.name == "length_log":
            theta[slot.name] = rng.uniform(math.log(0.01), math.log(0.2))
        else:
            theta[slot.name] = rng.uniform(-1.0, 1.0)
    theta["noise_var"] = 10.0 ** rng.uniform(-3.0, -1.0)
    return Dataset.from_arrays(x, y), spec, noise, theta, rng.uniform(0.0, 1.0, size=(50, dim))


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(20))
def test_sparse_pipeline_matches_dense_oracle_on_random_problems(seed):
    dataset, spec, noise, theta, test = _random_problem(seed)
    mean = MeanFunction()
    plan = plan_assembly(dataset.n, block_size=77, workers=4)
    evaluation = log_marginal_likelihood(spec, theta, dataset, noise, mean, plan, TIGHT)
    assert evaluation.valid
    assert evaluation.value == pytest.approx(dense_log_marginal_likelihood(spec, theta, dataset, noise, mean), rel=1e-6)

    model = fit_cache(spec, theta, dataset, noise, mean, plan, TIGHT)
    sparse_post = posterior_predict(model, test)
    dense_post = dense_reference_fit_predict(dataset, spec, theta, test, noise, mean)
    np.testing.assert_allclose(sparse_post.mean, dense_post.mean, rtol=1e-6, atol=1e-9)
    np.testing.assert_allclose(sparse_post.variance, dense_post.variance, rtol=1e-6, atol=1e-9)


@pytest.mark.parametrize("seed", [12, 14])
def test_lml_stays_valid_at_tight_tolerance_on_ill_conditioned_problems(seed):
    dataset, spec, noise, theta, _ = _random_problem(seed)
    evaluation = log_marginal_likelihood(
        spec, theta, dataset, noise, MeanFunction(), plan_assembly(dataset.n, block_size=77, workers=4), TIGHT
    )
    assert evaluation.valid, evaluation.error
    assert evaluation.solve.residual <= TIGHT.tol
    assert evaluation.value == pytest.approx(
        dense_log_marginal_likelihood(spec, theta, dataset, noise, MeanFunction()), rel=1e-6
    )


def test_lml_is_invariant_to_permuting_the_dataset():
    dataset, spec, noise, mean, theta = _nonstat_problem(n=150, seed=5)
    order = np.random.default_rng(6).permutation(dataset.n)
    plan = plan_assembly(dataset.n, block_size=40, workers=2)
    original = log_marginal_likelihood(spec, theta, dataset, noise, mean, plan, TIGHT)
    shuffled = log_marginal_likelihood(spec, theta, dataset.subset(order), noise, mean, plan, TIGHT)
    assert original.valid and shuffled.valid
    assert shuffled.value == pytest.approx(original.value, rel=1e-9)


def test_removing_training_points_never_shrinks_the_posterior_variance():
    dataset, spec, noise, mean, theta = _nonstat_problem(n=120, seed=7)
    test = np.linspace(0.0, 1.0, 25)[:, None]
    full = posterior_predict(fit_cache(spec, theta, dataset, noise, mean, plan_assembly(dataset.n, 40), TIGHT), test)
    kept = np.arange(0, dataset.n, 2)
    reduced_data = dataset.subset(kept)
    reduced = posterior_predict(
        fit_cache(spec, theta, reduced_data, noise, mean, plan_assembly(reduced_data.n, 40), TIGHT), test
    )
    assert np.all(reduced.variance >= full.variance - 1e-10)
    assert np.any(reduced.variance > full.variance + 1e-6)
