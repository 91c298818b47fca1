import math

import numpy as np
import pytest

from ratecost.bounds import rho_covering
from ratecost.quantizer import (
    DpcmCodec,
    IndexStream,
    a_star_lattice,
    empirical_entropy,
    integer_lattice,
    lattice_for_dimension,
)

HAND_ENTROPY_QUARTER = 0.5623351446188083  # -(0.25 ln 0.25 + 0.75 ln 0.75)


class TestIntegerLattice:
    def test_rounding(self):
        lat = integer_lattice()
        assert lat.nearest(np.array([0.4]))[0] == 0.0
        assert lat.nearest(np.array([-1.4]))[0] == -1.0

    def test_half_ties_go_even(self):
        lat = integer_lattice()
        assert lat.nearest(np.array([0.5]))[0] == 0.0
        assert lat.nearest(np.array([1.5]))[0] == 2.0
        assert lat.nearest(np.array([-0.5]))[0] == 0.0

    def test_geometry(self):
        lat = integer_lattice()
        assert lat.covering_radius == 0.5
        assert lat.cell_volume == 1.0
        assert math.isclose(lat.rho, 1.0, rel_tol=1e-12)

    def test_scale_to_distortion(self):
        lat = integer_lattice().scale_to_distortion(0.25)
        assert math.isclose(lat.covering_radius, 0.5, rel_tol=1e-12)
        assert math.isclose(lat.scale, 1.0, rel_tol=1e-12)  # cell width 1
        lat2 = integer_lattice().scale_to_distortion(1.0)
        assert math.isclose(lat2.covering_radius ** 2, 1.0, rel_tol=1e-12)
        assert math.isclose(lat2.rho, lat.rho, rel_tol=1e-12)


class TestAStarLattice:
    @pytest.mark.parametrize("n", range(2, 9))
    def test_cell_volume(self, n):
        lat = a_star_lattice(n)
        assert math.isclose(lat.cell_volume, 1.0 / math.sqrt(n + 1.0),
                            rel_tol=1e-12)

    @pytest.mark.parametrize("n", range(2, 9))
    def test_rho_matches_closed_form(self, n):
        assert math.isclose(a_star_lattice(n).rho, rho_covering(n),
                            rel_tol=1e-12)

    def test_rho_at_least_one(self):
        for n in range(2, 9):
            assert a_star_lattice(n).rho >= 1.0

    def test_dimension_menu(self):
        assert lattice_for_dimension(1).family == "integer_Z"
        assert lattice_for_dimension(4).family == "a_n_star"
        with pytest.raises(ValueError):
            a_star_lattice(9)

    @pytest.mark.parametrize("n", range(2, 9))
    def test_deep_hole_attains_covering_radius(self, n):
        # Voronoi-cell vertex: the permutohedron corner at
        # (n/2, n/2-1, ..., -n/2) / (n+1) in hyperplane coordinates.
        lat = a_star_lattice(n)
        hole_hyper = (n / 2.0 - np.arange(n + 1)) / (n + 1.0)
        hole = hole_hyper @ lat.lift.T
        dist = np.linalg.norm(hole - lat.nearest(hole))
        assert math.isclose(dist, lat.covering_radius, abs_tol=1e-9)

    @pytest.mark.parametrize("n", [2, 3])
    def test_nearest_agrees_with_brute_force(self, n):
        lat = a_star_lattice(n)
        rng = np.random.default_rng(7)
        pts = rng.uniform(-2.0, 2.0, size=(300, n))
        dec = lat.nearest(pts)
        base = lat.index_of(dec)
        offsets = np.array(np.meshgrid(*[np.arange(-2, 3)] * n)).reshape(n, -1).T
        for x, d, z in zip(pts, dec, base):
            cand = lat.point_of(z[None] + offsets)
            best = np.min(np.linalg.norm(cand - x, axis=1))
            assert np.linalg.norm(x - d) <= best + 1e-10

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_covering_property(self, n):
        lat = lattice_for_dimension(n).scale_to_distortion(0.7)
        rng = np.random.default_rng(n)
        frac = rng.uniform(0.0, 1.0, size=(100_000, n))
        pts = frac @ lat.basis.T
        err = np.linalg.norm(pts - lat.nearest(pts), axis=1)
        assert np.max(err) <= lat.covering_radius + 1e-12

    def test_index_round_trip(self):
        lat = a_star_lattice(3).scale_to_distortion(2.0)
        rng = np.random.default_rng(11)
        z = rng.integers(-5, 6, size=(200, 3))
        pts = lat.point_of(z)
        assert np.array_equal(lat.index_of(pts), z)
        assert np.allclose(lat.point_of(lat.index_of(pts)), pts, atol=1e-12)

    def test_index_rejects_non_lattice_points(self):
        lat = a_star_lattice(2)
        with pytest.raises(ValueError, match="not lattice"):
            lat.index_of(np.array([0.3, 0.4]))

    def test_decoded_points_are_lattice_points(self):
        lat = a_star_lattice(4)
        rng = np.random.default_rng(3)
        dec = lat.nearest(rng.normal(size=(500, 4)) * 3.0)
        lat.index_of(dec)  # raises if the coset decode left the lattice


class TestDpcmCodec:
    def test_hand_traced_step(self):
        lat = integer_lattice()  # cell width 1
        codec = DpcmCodec(lat, np.eye(1), np.eye(1))
        index, corr = codec.encode_step(np.array([0.4]))
        assert tuple(index) == (0,)
        assert codec.s_hat[0] == 0.0
        assert corr[0] == 0.0

    def test_noiseless_loop_emits_origin(self):
        lat = integer_lattice().scale_to_distortion(0.1)
        a = np.array([[2.0]])
        codec = DpcmCodec(lat, np.eye(1), a, s0=np.array([0.7]))
        s = np.array([0.7])
        for _ in range(50):
            s = a @ s
            index, _ = codec.encode_step(s)
            assert tuple(index) == (0,)
            assert np.allclose(codec.s_hat, s)

    def test_weighted_distortion_guarantee(self):
        d = 0.3
        w = np.array([[4.0]])
        a = np.array([[0.9]])
        lat = integer_lattice().scale_to_distortion(d)
        codec = DpcmCodec(lat, w, a)
        rng = np.random.default_rng(0)
        s = np.zeros(1)
        for _ in range(2000):
            s = a @ s + rng.normal(size=1)
            codec.encode_step(s)
            err = s - codec.s_hat
            assert err @ w @ err <= d + 1e-12

    def test_encoder_decoder_synchronism(self):
        n = 2
        d = 0.5
        a = np.array([[0.8, 0.4], [0.0, 0.7]])
        b = np.array([[0.0], [1.0]])
        w = np.array([[2.0, 0.3], [0.3, 1.0]])
        lat = a_star_lattice(n).scale_to_distortion(d)
        enc = DpcmCodec(lat, w, a, b_mat=b)
        dec = DpcmCodec(lat, w, a, b_mat=b)
        rng = np.random.default_rng(12)
        s = np.zeros(n)
        u = np.zeros(1)
        steps = 100_000
        for i in range(steps):
            s = a @ s + b @ u + 0.3 * rng.normal(size=n)
            index, _ = enc.encode_step(s, u_prev=u)
            dec.decode_step(index, u_prev=u)
            u = np.array([-0.4 * dec.s_hat[1]])
            if i % 20_000 == 0:
                assert enc.state_digest() == dec.state_digest()
        assert enc.state_digest() == dec.state_digest()
        assert enc.step == dec.step == steps

    def test_desync_detected_by_digest(self):
        lat = integer_lattice()
        enc = DpcmCodec(lat, np.eye(1), np.eye(1))
        dec = DpcmCodec(lat, np.eye(1), np.eye(1))
        index, _ = enc.encode_step(np.array([3.2]))
        dec.decode_step(index)
        assert enc.state_digest() == dec.state_digest()
        dec.s_hat = dec.s_hat + 1e-9
        assert enc.state_digest() != dec.state_digest()

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            DpcmCodec(integer_lattice(), np.eye(2), np.eye(2))


class TestIndexStream:
    def test_histogram_totals(self):
        stream = IndexStream(1)
        rng = np.random.default_rng(5)
        for _ in range(500):
            stream.append(rng.integers(-3, 4, size=1))
        hist = stream.histogram()
        assert sum(hist.values()) == len(stream) == 500

    def test_csv_round_trip(self, tmp_path):
        stream = IndexStream(2)
        stream.append(np.array([1, -2]))
        stream.append(np.array([0, 3]))
        path = tmp_path / "stream.csv"
        stream.to_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "step,z0,z1"
        assert lines[1] == "0,1,-2"
        assert lines[2] == "1,0,3"


class TestEmpiricalEntropy:
    def test_constant_stream(self):
        est = empirical_entropy(np.zeros(5000, dtype=np.int64))
        assert est.plug_in == 0.0
        assert est.support == 1

    def test_uniform_four_symbols(self):
        rng = np.random.default_rng(21)
        est = empirical_entropy(rng.integers(0, 4, size=1_000_000))
        assert abs(est.plug_in - math.log(4.0)) < 0.01
        assert est.support == 4

    def test_hand_computed_binary(self):
        rng = np.random.default_rng(8)
        data = (rng.uniform(size=200_000) < 0.75).astype(np.int64)
        est = empirical_entropy(data)
        assert abs(est.plug_in - HAND_ENTROPY_QUARTER) < 0.01

    def test_within_three_standard_errors(self):
        p = np.array([0.1, 0.2, 0.3, 0.4])
        rng = np.random.default_rng(33)
        n = 50_000
        draws = rng.choice(4, size=n, p=p)
        est = empirical_entropy(draws)
        truth = float(-(p * np.log(p)).sum())
        se = math.sqrt(float(np.var(-np.log(p[draws]))) / n)
        assert abs(est.plug_in - truth) <= 3.0 * se + (4 - 1) / (2.0 * n)

    def test_miller_madow_exceeds_plug_in(self):
        rng = np.random.default_rng(2)
        est = empirical_entropy(rng.integers(0, 10, size=2000))
        assert est.miller_madow > est.plug_in

    def test_burn_in_and_length_guard(self):
        data = np.zeros(1500, dtype=np.int64)
        with pytest.raises(ValueError, match="samples"):
            empirical_entropy(data, burn_in=1000)
        est = empirical_entropy(data, burn_in=100)
        assert est.samples == 1400
