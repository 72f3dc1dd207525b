import math

import numpy as np
import pytest

from sparse_gp.errors import ConfigError, HyperparameterError, InputError
from sparse_gp.kernels import (
    BumpFarfield,
    BumpFunction,
    BumpGroup,
    DeltaGroup,
    DistanceMetric,
    FieldKind,
    FieldRole,
    KernelContext,
    KernelSpec,
    MetricTag,
    NonstatWendland,
    ParametricField,
    Point,
    PointSet,
    Product,
    Scale,
    Sum,
    Wendland,
    WendlandForm,
    build_preset,
    bump_eval,
    bump_farfield,
    delta_farfield,
    distance,
    dumps,
    eval_kernel,
    gram_block,
    loads,
    matern32,
    nonstat_wendland,
    wendland,
)
from sparse_gp.kernels.functions import convolution_terms
from sparse_gp.linalg import sparse_logdet
from sparse_gp.mcmc.models import HyperparameterVector


def _constant(role: FieldRole, value: float) -> ParametricField:
    return ParametricField(kind=FieldKind.CONSTANT, role=role, intercept=math.log(value))


def _draw_theta(spec: KernelSpec, rng: np.random.Generator) -> dict[str, float]:
    return {slot.name: float(rng.uniform(slot.lower, slot.upper)) for slot in spec.slots}


def _indexed(coords: np.ndarray) -> PointSet:
    return PointSet(coords, np.arange(coords.shape[0]))


def test_distance_examples():
    assert distance(Point((0.0, 0.0)), Point((3.0, 4.0))) == pytest.approx(5.0)
    assert distance(Point((1.0, 1.0)), Point((1.0, 1.0)), DistanceMetric(MetricTag.L1)) == 0.0
    metric = DistanceMetric(MetricTag.L1, ard_scales=(1.0, 2.0))
    assert distance(Point((0.0, 0.0)), Point((3.0, 4.0)), metric) == pytest.approx(5.0)


def test_distance_dimension_mismatch():
    with pytest.raises(InputError):
        distance(Point((0.0,)), Point((0.0, 1.0)))


def test_ard_scales_must_be_positive():
    with pytest.raises(InputError):
        DistanceMetric(ard_scales=(1.0, 0.0))


def test_wendland_values():
    assert wendland(0.0, 0.3) == 1.0
    assert wendland(0.3, 0.3) == 0.0
    assert wendland(0.5, 1.0) == pytest.approx(0.06103515625, rel=1e-12)
    assert wendland(2.0, 1.0) == 0.0


def test_wendland_classical_form():
    # (1 - 0.5)^8 * (32/8 + 25/4 + 4 + 1)
    assert wendland(0.5, 1.0, WendlandForm.CLASSICAL) == pytest.approx(0.00390625 * 15.25, rel=1e-12)


def test_wendland_rejects_nonpositive_radius():
    with pytest.raises(HyperparameterError):
        wendland(0.1, 0.0)


def test_matern32_values():
    assert matern32(0.0, 0.7, 1.5) == pytest.approx(2.25)
    assert matern32(1.0, 1.0, 1.0) == pytest.approx((1 + math.sqrt(3)) * math.exp(-math.sqrt(3)), rel=1e-12)
    assert matern32(1.0, 1.0, 1.0) == pytest.approx(0.4833577, abs=1e-7)
    assert matern32(100 * 0.2, 0.2, 2.0) < 1e-60 * 4.0


def test_matern32_rejects_bad_parameters():
    with pytest.raises(HyperparameterError):
        matern32(0.1, 0.0, 1.0)
    with pytest.raises(HyperparameterError):
        matern32(0.1, 1.0, -1.0)


def test_bump_eval():
    bump = BumpFunction(center=(0.0,), amplitude=1.0, shape=1.0, radius=1.0)
    assert bump_eval(bump, Point((0.0,))) == pytest.approx(1.0)
    assert bump_eval(bump, Point((1.0,))) == 0.0
    assert bump_eval(bump, Point((math.sqrt(0.5),))) == pytest.approx(math.exp(-1.0), rel=1e-12)
    scaled = BumpFunction(center=(0.2, 0.2), amplitude=0.4, shape=2.0, radius=0.5)
    assert bump_eval(scaled, Point((0.2, 0.2))) == pytest.approx(0.4)


def test_bump_vanishes_continuously_at_boundary():
    bump = BumpFunction(center=(0.0,), amplitude=1.0, shape=1.0, radius=1.0)
    assert bump_eval(bump, Point((1.0 - 1e-9,))) < 1e-100
    assert bump_eval(bump, Point((1.5,))) == 0.0


def test_nonstat_constant_field_reduction():
    signal = _constant(FieldRole.SIGNAL_STD, 1.7)
    length = (_constant(FieldRole.LENGTH_SIGMA, 0.25),)
    x_i, x_j = Point((0.1,)), Point((0.3,))
    value = nonstat_wendland(x_i, x_j, signal, length, r0=1.0)
    assert value == pytest.approx(1.7**2 * wendland(0.2 / 0.25, 1.0), rel=1e-12)


def test_nonstat_diagonal_is_signal_variance():
    signal = ParametricField(
        kind=FieldKind.AXIS_LINEAR, role=FieldRole.SIGNAL_STD, intercept=0.1, slopes=(0.5, -0.2)
    )
    length = (
        ParametricField(kind=FieldKind.AXIS_LINEAR, role=FieldRole.LENGTH_SIGMA, intercept=-2.0, slopes=(1.0, 0.0)),
        _constant(FieldRole.LENGTH_SIGMA, 0.3),
    )
    x = Point((0.4, 0.8))
    expected = math.exp(0.1 + 0.5 * 0.4 - 0.2 * 0.8) ** 2
    assert nonstat_wendland(x, x, signal, length, r0=1.0) == pytest.approx(expected, rel=1e-12)


def test_convolution_prefactor():
    a = np.array([[0.5]])
    prefactor, root_q = convolution_terms(a, a, np.array([[1.0]]), np.array([[9.0]]))
    assert prefactor[0, 0] == pytest.approx(9**0.25 / math.sqrt(5.0), rel=1e-12)
    assert prefactor[0, 0] == pytest.approx(0.7745967, abs=1e-7)
    assert root_q[0, 0] == 0.0


def test_nonstat_length_field_count_must_match_dimension():
    signal = _constant(FieldRole.SIGNAL_STD, 1.0)
    length = tuple(_constant(FieldRole.LENGTH_SIGMA, 0.2) for _ in range(2))
    with pytest.raises(InputError):
        nonstat_wendland(Point((0.0, 0.0, 0.0)), Point((0.1, 0.0, 0.0)), signal, length, r0=1.0)


def test_bump_farfield_examples():
    off = BumpGroup(centers=((0.3,),), amplitudes=(0.0,), shape=1.0, radius=0.2)
    assert bump_farfield(Point((0.3,)), Point((0.35,)), [off]) == 0.0
    single = BumpGroup(centers=((0.3,),), amplitudes=(0.7,), shape=1.0, radius=0.2)
    assert bump_farfield(Point((0.3,)), Point((0.3,)), [single]) == pytest.approx(0.49)
    twin = BumpGroup(centers=((0.3,), (0.3,)), amplitudes=(0.7, 0.7), shape=1.0, radius=0.2)
    assert bump_farfield(Point((0.3,)), Point((0.3,)), [twin]) == pytest.approx(4 * 0.49)


def test_bump_farfield_links_distant_points():
    group = BumpGroup(centers=((0.1,), (0.9,)), amplitudes=(2.0, 3.0), shape=1.0, radius=0.05)
    assert bump_farfield(Point((0.1,)), Point((0.9,)), [group]) == pytest.approx(6.0)


def test_delta_farfield_examples():
    groups = [DeltaGroup(frozenset({1, 2}))]
    assert delta_farfield(Point((0.0,), index=1), Point((0.5,), index=2), groups) == 1.0
    assert delta_farfield(Point((0.0,), index=1), Point((0.9,), index=3), groups) == 0.0
    doubled = [DeltaGroup(frozenset({1})), DeltaGroup(frozenset({1}))]
    assert delta_farfield(Point((0.0,), index=1), Point((0.0,), index=1), doubled) == 2.0


def test_delta_is_zero_for_points_outside_the_dataset():
    groups = [DeltaGroup(frozenset({0, 1}))]
    assert delta_farfield(Point((0.0,), index=0), Point((0.2,)), groups) == 0.0


def test_eval_kernel_examples():
    product = KernelSpec(root=Product((Wendland(0.3), Scale(5.0, Wendland(10.0)))))
    assert eval_kernel(product, {}, Point((0.0,)), Point((0.3,))) == 0.0
    assert eval_kernel(product, {}, Point((0.0,)), Point((0.45,))) == 0.0

    disabled = BumpFarfield((BumpGroup(centers=((0.2,),), amplitudes=(0.0,), shape=1.0, radius=0.5),))
    summed = KernelSpec(root=Sum((disabled, Scale(1.5, Wendland(1.0)))))
    assert eval_kernel(summed, {}, Point((0.1,)), Point((0.6,))) == pytest.approx(1.5 * 0.06103515625)

    scaled = KernelSpec(root=Scale(2.0, Wendland(1.0)))
    assert eval_kernel(scaled, {}, Point((0.0,)), Point((0.5,))) == pytest.approx(0.1220703125, rel=1e-12)


def test_eval_kernel_checks_bounds():
    spec = build_preset("wendland")
    theta = HyperparameterVector(spec.slots).initial()
    theta["r0"] = 10.0
    with pytest.raises(HyperparameterError):
        eval_kernel(spec, theta, Point((0.0,)), Point((0.1,)))
    with pytest.raises(HyperparameterError):
        eval_kernel(spec, {"signal_var": 1.0}, Point((0.0,)), Point((0.1,)))


def test_undeclared_reference_is_rejected():
    with pytest.raises(HyperparameterError):
        KernelSpec(root=Wendland("r0"))


def test_gram_block_examples():
    spec = KernelSpec(root=Wendland(1.0))
    single = PointSet(np.array([[0.25]]))
    assert gram_block(spec, {}, single, single).tolist() == [[1.0]]

    points = PointSet(np.array([0.0, 0.5, 2.0]))
    block = gram_block(spec, {}, points, points)
    assert np.allclose(np.diag(block), 1.0)
    assert block[0, 1] == pytest.approx(0.06103515625, rel=1e-12)
    assert block[0, 2] == 0.0
    assert block[1, 2] == 0.0
    assert np.array_equal(block, block.T)


def test_gram_block_dimension_mismatch():
    spec = KernelSpec(root=Wendland(1.0))
    with pytest.raises(InputError):
        gram_block(spec, {}, PointSet(np.zeros((2, 1))), PointSet(np.zeros((2, 2))))


@pytest.mark.parametrize("preset", ["wendland", "matern32", "nonstat_wendland", "bump", "delta", "combination"])
def test_gram_block_is_exactly_symmetric(preset):
    rng = np.random.default_rng(11)
    spec = build_preset(preset, dim=2, centers_per_axis=2, bumps_per_axis=2)
    points = _indexed(rng.uniform(0.0, 1.0, size=(25, 2)))
    context = KernelContext(anchors=points)
    theta = _draw_theta(spec, rng)
    block = gram_block(spec, theta, points, points, context)
    assert np.array_equal(block, block.T)


def test_gram_block_matches_pairwise_evaluation():
    rng = np.random.default_rng(3)
    spec = build_preset("bump", bumps_per_axis=3)
    theta = _draw_theta(spec, rng)
    coords = rng.uniform(0.0, 1.0, size=6)
    block = gram_block(spec, theta, PointSet(coords), PointSet(coords))
    for i in range(6):
        for j in range(6):
            value = eval_kernel(spec, theta, Point((coords[i],)), Point((coords[j],)))
            assert block[i, j] == pytest.approx(value, rel=1e-12, abs=1e-15)


def test_radius_rule_delta_groups_points_near_each_other():
    spec = build_preset("delta")
    coords = np.array([0.0, 0.05, 0.5])
    points = _indexed(coords)
    context = KernelContext(anchors=points)
    theta = {"core_length": 1.0, "core_sigma": 1.0, "r0": 0.001, "delta_radius": 0.06}
    block = gram_block(spec, theta, points, points, context)
    # the far pair shares no anchor ball and sits outside the Wendland support
    assert block[0, 2] == 0.0
    assert block[0, 1] > 0.0


def test_bump_farfield_rank_is_bounded_by_group_count():
    rng = np.random.default_rng(5)
    groups = tuple(
        BumpGroup(
            centers=tuple((float(c),) for c in rng.uniform(0, 1, size=4)),
            amplitudes=tuple(float(a) for a in rng.uniform(0.1, 1.0, size=4)),
            shape=1.0,
            radius=0.4,
        )
        for _ in range(2)
    )
    spec = KernelSpec(root=BumpFarfield(groups))
    points = PointSet(rng.uniform(0.0, 1.0, size=60))
    block = gram_block(spec, {}, points, points)
    assert np.linalg.matrix_rank(block, tol=1e-10 * np.abs(block).max()) <= 2


def test_diagonal_rescaling_preserves_psd():
    rng = np.random.default_rng(8)
    spec = KernelSpec(root=Wendland(0.3, WendlandForm.CLASSICAL))
    points = PointSet(rng.uniform(0.0, 1.0, size=40))
    base = gram_block(spec, {}, points, points)
    f = rng.uniform(-2.0, 2.0, size=40)
    rescaled = f[:, None] * base * f[None, :]
    assert np.linalg.eigvalsh(rescaled).min() >= -1e-8 * np.abs(rescaled).max()


def _assert_psd_draws(name: str, draws: int, n: int, seed: int, **options) -> None:
    rng = np.random.default_rng(seed)
    spec = build_preset(name, form=WendlandForm.CLASSICAL, **options)
    for _ in range(draws):
        points = _indexed(rng.uniform(0.0, 1.0, size=n))
        theta = _draw_theta(spec, rng)
        block = gram_block(spec, theta, points, points, KernelContext(anchors=points))
        scale = max(float(np.abs(np.diag(block)).max()), 1e-300)
        assert np.linalg.eigvalsh(block).min() >= -1e-8 * scale, theta


def _assert_psd_after_jitter(name: str, draws: int, n: int, seed: int, **options) -> None:
    # the factorization either succeeds as is or after the escalating diagonal jitter
    rng = np.random.default_rng(seed)
    spec = build_preset(name, form=WendlandForm.CLASSICAL, **options)
    for _ in range(draws):
        points = _indexed(rng.uniform(0.0, 1.0, size=n))
        theta = _draw_theta(spec, rng)
        block = gram_block(spec, theta, points, points, KernelContext(anchors=points))
        report = sparse_logdet(block, method="splu")
        assert report.jitter <= 1e-4 * float(np.mean(np.diag(block))), theta
        shifted = block + report.jitter * np.eye(n)
        scale = max(float(np.abs(np.diag(shifted)).max()), 1e-300)
        assert np.linalg.eigvalsh(shifted).min() >= -1e-8 * scale, theta


@pytest.mark.parametrize("preset", ["wendland", "matern32", "nonstat_matern", "bump", "delta"])
def test_stationary_and_separable_families_are_psd(preset):
    _assert_psd_draws(preset, draws=25, n=40, seed=17)


def test_nonstat_wendland_factorizes_with_bounded_jitter():
    _assert_psd_after_jitter("nonstat_wendland", draws=25, n=40, seed=17)


@pytest.mark.slow
@pytest.mark.parametrize("preset", ["wendland", "matern32", "bump", "delta", "combination"])
def test_psd_acceptance_draws(preset):
    _assert_psd_draws(preset, draws=200, n=50, seed=23)


@pytest.mark.slow
def test_nonstat_wendland_acceptance_draws_after_jitter():
    _assert_psd_after_jitter("nonstat_wendland", draws=200, n=50, seed=23)


def test_nonstat_wendland_is_sparse_where_lengths_are_short():
    spec = KernelSpec(
        root=NonstatWendland(
            signal=_constant(FieldRole.SIGNAL_STD, 1.0),
            length=(_constant(FieldRole.LENGTH_SIGMA, 0.01),),
            r0=1.0,
        )
    )
    points = PointSet(np.linspace(0.0, 1.0, 50))
    block = gram_block(spec, {}, points, points)
    assert np.count_nonzero(block) == 50


def test_preset_lookup():
    with pytest.raises(ConfigError):
        build_preset("no_such_kernel")


def test_spec_text_round_trip_keeps_values():
    rng = np.random.default_rng(2)
    spec = build_preset("combination", bumps_per_axis=3)
    restored = loads(dumps(spec))
    assert restored.slot_names == spec.slot_names
    theta = _draw_theta(spec, rng)
    points = PointSet(rng.uniform(0.0, 1.0, size=12))
    assert np.array_equal(gram_block(restored, theta, points, points), gram_block(spec, theta, points, points))
