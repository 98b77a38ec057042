import numpy as np
import pytest

from corrlearn.envgen import generate_environment
from corrlearn.envs import (
    DENOMINATOR_FLOOR,
    Environment,
    GroundTruth,
    Obstacle,
    cost,
    feature_gradients,
    features,
    from_json,
    normalized_cost,
    to_json,
    to_json_dict,
    true_cost,
)
from corrlearn.planner import straight_line
from corrlearn.trajectory import Trajectory

from oracles import central_difference_feature_grad, naive_features


def make_env(positions, type_ids, num_types, radius=1.0, w=None):
    obstacles = tuple(
        Obstacle(position=p, type_id=k, radius=radius) for p, k in zip(positions, type_ids)
    )
    return Environment(
        start=(0.0, 5.0),
        goal=(10.0, 5.0),
        obstacles=obstacles,
        num_types=num_types,
        ground_truth_w=w if w is not None else np.zeros(num_types),
    )


def random_env(rng, num_types=3, count=6):
    positions = rng.uniform(0, 10, size=(count, 2))
    type_ids = rng.integers(0, num_types, size=count)
    w = rng.uniform(-1, 1, size=num_types)
    return make_env(positions, type_ids, num_types, w=w)


class TestFeatures:
    def test_matches_naive_double_sum(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            env = random_env(rng)
            xi = Trajectory(rng.uniform(0, 10, size=(rng.integers(3, 40), 2)))
            assert np.max(np.abs(features(xi, env) - naive_features(xi, env))) < 1e-12

    def test_distant_trajectory_has_negligible_feature(self):
        env = make_env([[5.0, 5.0]], [0], 1, radius=0.3)
        xi = Trajectory(np.linspace([0.0, 100.0], [10.0, 100.0], 11))
        assert features(xi, env)[0] < 1e-20

    def test_waypoint_on_obstacle_contributes_inverse_count(self):
        # One waypoint sits exactly on the obstacle; all others are far away.
        points = np.linspace([0.0, 500.0], [10.0, 500.0], 9)
        points[4] = [5.0, 5.0]
        env = make_env([[5.0, 5.0]], [0], 1)
        xi = Trajectory(points)
        assert features(xi, env)[0] == pytest.approx(1.0 / 9.0, abs=1e-15)

    def test_permutation_invariant_within_type(self):
        rng = np.random.default_rng(4)
        positions = rng.uniform(0, 10, size=(6, 2))
        xi = Trajectory(rng.uniform(0, 10, size=(12, 2)))
        forward = make_env(positions, [0, 0, 1, 1, 2, 2], 3)
        shuffled = make_env(positions[[1, 0, 3, 2, 5, 4]], [0, 0, 1, 1, 2, 2], 3)
        assert np.allclose(features(xi, forward), features(xi, shuffled), atol=1e-15)

    def test_values_nonnegative_and_finite(self):
        rng = np.random.default_rng(9)
        env = random_env(rng)
        xi = Trajectory(rng.uniform(-5, 15, size=(21, 2)))
        phi = features(xi, env)
        assert np.all(phi >= 0) and np.all(np.isfinite(phi))

    def test_dimension_mismatch_rejected(self):
        env = make_env([[5.0, 5.0]], [0], 1)
        with pytest.raises(ValueError, match="dimension"):
            features(Trajectory(np.zeros((5, 3))), env)


class TestFeatureGradients:
    def test_matches_central_differences(self):
        rng = np.random.default_rng(12)
        for _ in range(5):
            env = random_env(rng)
            xi = Trajectory(rng.uniform(0, 10, size=(9, 2)))
            analytic = feature_gradients(xi, env)
            numeric = central_difference_feature_grad(xi, env, step=1e-5)
            # Denominator floor: where the true gradient vanishes, central
            # differences are pure roundoff (~1e-11 at this step size).
            scale = np.maximum(np.abs(numeric), 1e-6)
            assert np.max(np.abs(analytic - numeric) / scale) < 1e-4


class TestCost:
    def test_zero_weights_zero_cost(self, small_env):
        xi = straight_line(small_env, 10)
        assert cost(xi, small_env, np.zeros(2)) == 0.0

    def test_basis_weight_selects_feature(self):
        rng = np.random.default_rng(2)
        env = random_env(rng)
        xi = Trajectory(rng.uniform(0, 10, size=(15, 2)))
        phi = features(xi, env)
        for k in range(3):
            e_k = np.zeros(3)
            e_k[k] = 1.0
            assert cost(xi, env, e_k) == pytest.approx(phi[k], abs=1e-15)

    def test_all_ones_matches_naive_sum(self):
        rng = np.random.default_rng(3)
        env = random_env(rng)
        xi = Trajectory(rng.uniform(0, 10, size=(15, 2)))
        assert cost(xi, env, np.ones(3)) == pytest.approx(naive_features(xi, env).sum(), abs=1e-12)

    def test_length_mismatch_rejected(self, small_env):
        xi = straight_line(small_env, 5)
        with pytest.raises(ValueError, match="weight vector"):
            cost(xi, small_env, np.zeros(5))


class TestNormalizedCost:
    def test_anchors_are_exact(self, small_env):
        gt = small_env.ground_truth
        assert normalized_cost(gt.optimal, small_env) == 0.0
        assert normalized_cost(gt.straight, small_env) == 1.0

    def test_linear_interpolation_between_anchors(self):
        # Synthetic anchors: optimal cost 3, straight-line cost 5, query 4.
        env = make_env([[5.0, 4.0]], [0], 1, w=np.array([1.0]))
        anchors = GroundTruth(
            optimal=straight_line(env, 4),
            straight=straight_line(env, 4),
            cost_optimal=3.0,
            cost_straight=5.0,
        )
        env = env.with_ground_truth(anchors)
        xi = straight_line(env, 4)
        value = (4.0 - anchors.cost_optimal) / anchors.denominator
        assert value == pytest.approx(0.5)
        got = (true_cost(xi, env) - anchors.cost_optimal) / anchors.denominator
        assert normalized_cost(xi, env) == got

    def test_missing_ground_truth_rejected(self):
        env = make_env([[5.0, 5.0]], [0], 1)
        with pytest.raises(ValueError, match="no cached ground-truth"):
            normalized_cost(straight_line(env, 4), env)

    def test_degenerate_denominator_rejected(self):
        env = make_env([[5.0, 4.0]], [0], 1, w=np.array([1.0]))
        anchors = GroundTruth(
            optimal=straight_line(env, 4),
            straight=straight_line(env, 4),
            cost_optimal=1.0,
            cost_straight=1.0 + 1e-10,
        )
        env = env.with_ground_truth(anchors)
        with pytest.raises(ValueError, match="degenerate"):
            normalized_cost(straight_line(env, 4), env)


class TestEnvironmentInvariants:
    def test_start_equals_goal_rejected(self):
        with pytest.raises(ValueError, match="must differ"):
            Environment(
                start=(1.0, 1.0),
                goal=(1.0, 1.0),
                obstacles=(),
                num_types=1,
                ground_truth_w=np.zeros(1),
            )

    def test_type_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="outside"):
            make_env([[1.0, 1.0]], [3], 2)

    def test_radius_must_be_positive(self):
        with pytest.raises(ValueError, match="radius"):
            Obstacle(position=[1.0, 1.0], type_id=0, radius=0.0)


class TestGeneration:
    def test_counts_per_type(self, fast_gen):
        env = generate_environment(5, 2, seed=11, config=fast_gen)
        assert len(env.obstacles) == 10
        per_type = np.bincount([ob.type_id for ob in env.obstacles], minlength=5)
        assert np.array_equal(per_type, np.full(5, 2))

    def test_single_obstacle_case(self, fast_gen):
        env = generate_environment(1, 1, seed=3, config=fast_gen)
        assert len(env.obstacles) == 1

    def test_deterministic_in_seed(self, fast_gen):
        a = generate_environment(3, 2, seed=77, config=fast_gen)
        b = generate_environment(3, 2, seed=77, config=fast_gen)
        assert to_json(a) == to_json(b)
        assert np.array_equal(a.ground_truth.optimal.waypoints, b.ground_truth.optimal.waypoints)
        assert a.ground_truth.cost_optimal == b.ground_truth.cost_optimal

    def test_different_seeds_differ(self, fast_gen):
        a = generate_environment(3, 2, seed=77, config=fast_gen)
        b = generate_environment(3, 2, seed=78, config=fast_gen)
        assert to_json(a) != to_json(b)

    def test_anchors_satisfy_floor(self, fast_gen):
        env = generate_environment(2, 2, seed=5, config=fast_gen)
        assert env.ground_truth.denominator >= DENOMINATOR_FLOOR

    def test_weights_within_unit_box(self, fast_gen):
        env = generate_environment(4, 1, seed=13, config=fast_gen)
        assert np.all(np.abs(env.ground_truth_w) <= 1.0)

    def test_positions_within_workspace(self, fast_gen):
        env = generate_environment(3, 3, seed=21, config=fast_gen)
        for ob in env.obstacles:
            assert np.all(ob.position >= 0.0) and np.all(ob.position <= 10.0)

    def test_invalid_counts_rejected(self, fast_gen):
        with pytest.raises(ValueError):
            generate_environment(0, 1, seed=1, config=fast_gen)


class TestSerialization:
    def test_round_trip_bit_exact(self, small_env):
        text = to_json(small_env)
        loaded = from_json(text)
        assert to_json(loaded) == text
        assert np.array_equal(loaded.ground_truth_w, small_env.ground_truth_w)
        assert loaded.instances_per_type == small_env.instances_per_type
        for a, b in zip(loaded.obstacles, small_env.obstacles):
            assert np.array_equal(a.position, b.position)
            assert a.type_id == b.type_id and a.radius == b.radius

    def test_canonical_field_order(self, small_env):
        keys = list(to_json_dict(small_env).keys())
        assert keys == [
            "dim",
            "start",
            "goal",
            "obstacles",
            "num_types",
            "ground_truth_w",
            "seed",
        ]
