import numpy as np
import pytest

from logconfem import sym2
from logconfem.errors import NotSPDError, SpectralRangeError
from logconfem.params import PhysicalParams
from logconfem.verification import kernel_equivalence


def random_rotation(rng, n):
    th = rng.uniform(0, 2 * np.pi, n)
    return np.cos(th), np.sin(th)


def rotate(t, c, s):
    """Q t Q^T for Q = [[c, -s], [s, c]] applied to (..., 3) tensors."""
    return sym2._rotate_out(*(np.moveaxis(t, -1, 0)), c, s)


class TestEigh2:
    def test_already_diagonal(self):
        spec = sym2.eigh2(np.array([3.0, 0.0, 1.0]))
        assert spec.eig1 == pytest.approx(3.0)
        assert spec.eig2 == pytest.approx(1.0)
        assert abs(spec.c) == pytest.approx(1.0)
        assert spec.s == pytest.approx(0.0, abs=1e-15)

    def test_pure_offdiagonal(self):
        spec = sym2.eigh2(np.array([0.0, 1.0, 0.0]))
        assert spec.eig1 == pytest.approx(1.0)
        assert spec.eig2 == pytest.approx(-1.0)
        # eigenvectors at +-45 degrees
        assert abs(spec.c) == pytest.approx(np.sqrt(0.5))
        assert abs(spec.s) == pytest.approx(np.sqrt(0.5))

    def test_reconstruction_property(self):
        rng = np.random.default_rng(0)
        t = rng.standard_normal((10_000, 3)) * rng.lognormal(0, 2, (10_000, 1))
        spec = sym2.eigh2(t)
        rebuilt = sym2._recombine(spec, spec.eig1, spec.eig2)
        err = sym2.frobenius(rebuilt - t)
        assert np.all(err <= 1e-12 * np.maximum(1.0, sym2.frobenius(t)))
        assert np.all(spec.eig1 >= spec.eig2)
        assert np.all(np.abs(spec.c**2 + spec.s**2 - 1.0) < 1e-12)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            sym2.eigh2(np.array([np.nan, 0.0, 1.0]))


class TestExpLog:
    def test_exp_of_zero(self):
        assert sym2.sym_expm(np.zeros(3)) == pytest.approx([1.0, 0.0, 1.0])

    def test_exp_diagonal(self):
        out = sym2.sym_expm(np.array([np.log(2.0), 0.0, np.log(3.0)]))
        assert out == pytest.approx([2.0, 0.0, 3.0])

    def test_exp_log_roundtrip(self):
        rng = np.random.default_rng(1)
        t = rng.standard_normal((2000, 3))
        back = sym2.spd_logm(sym2.sym_expm(t))
        assert np.max(sym2.frobenius(back - t)) < 1e-10

    def test_log_identity(self):
        assert sym2.spd_logm(sym2.identity()) == pytest.approx([0.0, 0.0, 0.0])

    def test_log_diagonal(self):
        out = sym2.spd_logm(np.array([np.e, 0.0, np.e**2]))
        assert out == pytest.approx([1.0, 0.0, 2.0])

    def test_log_near_defective(self):
        # SPD with eigenvalue gap ~1e-14: must stay finite, close to log of
        # the scalar matrix
        t = np.array([1.0 + 1e-14, 1e-15, 1.0])
        out = sym2.spd_logm(t)
        assert np.all(np.isfinite(out))
        assert np.max(np.abs(out)) < 1e-13

    def test_log_rejects_non_spd(self):
        with pytest.raises(NotSPDError) as exc:
            sym2.spd_logm(np.array([1.0, 0.0, -2.0]))
        assert exc.value.eigenvalue == pytest.approx(-2.0)

    def test_exp_overflow(self):
        with pytest.raises(SpectralRangeError):
            sym2.sym_expm(np.array([800.0, 0.0, 0.0]))


class TestExpRemainder:
    def test_zero_tensor(self):
        for a in (0.0, 0.3, 2.0):
            assert sym2.exp_remainder(a, np.zeros(3)) == pytest.approx([0, 0, 0])

    def test_zero_scale(self):
        rng = np.random.default_rng(2)
        chi = rng.standard_normal((50, 3))
        assert np.all(sym2.exp_remainder(0.0, chi) == 0.0)

    def test_scalar_formula_on_eigenvalues(self):
        out = sym2.exp_remainder(1.0, np.array([np.log(2.0), 0.0, np.log(3.0)]))
        assert out == pytest.approx([1.0 - np.log(2.0), 0.0, 2.0 - np.log(3.0)])

    def test_orthogonal_equivariance(self):
        rng = np.random.default_rng(3)
        chi = rng.standard_normal((500, 3))
        c, s = random_rotation(rng, 500)
        lhs = sym2.exp_remainder(0.7, rotate(chi, c, s))
        rhs = rotate(sym2.exp_remainder(0.7, chi), c, s)
        assert np.max(sym2.frobenius(lhs - rhs)) < 1e-12

    def test_overflow_raises(self):
        with pytest.raises(SpectralRangeError):
            sym2.exp_remainder(1.0, np.array([800.0, 0.0, 0.0]))

    def test_negative_scale_rejected(self):
        with pytest.raises(ValueError):
            sym2.exp_remainder(-1.0, np.zeros(3))


class TestStretchCoupling:
    def test_isotropic_first_argument(self):
        rng = np.random.default_rng(4)
        d = rng.standard_normal((100, 3))
        out = sym2.stretch_coupling(np.zeros(3), d)
        assert np.max(np.abs(out)) == 0.0

    def test_codiagonal_arguments(self):
        # d diagonal in the eigenbasis of b gives zero
        out = sym2.stretch_coupling(
            np.array([2.0, 0.0, -1.0]), np.array([0.5, 0.0, 3.0])
        )
        assert np.max(np.abs(out)) < 1e-14

    def test_scalar_value(self):
        out = sym2.stretch_coupling(np.array([2.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]))
        assert out[1] == pytest.approx(1.0 - 1.0 / np.tanh(1.0), abs=1e-12)
        assert out[0] == pytest.approx(0.0, abs=1e-15)
        assert out[2] == pytest.approx(0.0, abs=1e-15)

    def test_linear_in_second_argument(self):
        rng = np.random.default_rng(5)
        b = rng.standard_normal((200, 3))
        d1 = rng.standard_normal((200, 3))
        d2 = rng.standard_normal((200, 3))
        lhs = sym2.stretch_coupling(b, 2.0 * d1 - 0.5 * d2)
        rhs = 2.0 * sym2.stretch_coupling(b, d1) - 0.5 * sym2.stretch_coupling(b, d2)
        assert np.max(sym2.frobenius(lhs - rhs)) < 1e-12

    def test_orthogonal_equivariance(self):
        rng = np.random.default_rng(6)
        b = rng.standard_normal((500, 3))
        d = rng.standard_normal((500, 3))
        c, s = random_rotation(rng, 500)
        lhs = sym2.stretch_coupling(rotate(b, c, s), rotate(d, c, s))
        rhs = rotate(sym2.stretch_coupling(b, d), c, s)
        assert np.max(sym2.frobenius(lhs - rhs)) < 1e-12


class TestDerivatives:
    def test_d_exp_remainder_zero_scale(self):
        rng = np.random.default_rng(7)
        out = sym2.d_exp_remainder(
            0.0, rng.standard_normal((10, 3)), rng.standard_normal((10, 3))
        )
        assert np.all(out == 0.0)

    def test_d_exp_remainder_at_origin(self):
        rng = np.random.default_rng(8)
        out = sym2.d_exp_remainder(0.8, np.zeros(3), rng.standard_normal((10, 3)))
        assert np.max(np.abs(out)) < 1e-15

    def test_d_exp_remainder_matches_fd(self):
        rng = np.random.default_rng(9)
        n, h = 1000, 1e-6
        t = rng.standard_normal((n, 3))
        dirn = rng.standard_normal((n, 3))
        for a in (0.25, 1.0, 3.0):
            fd = (
                sym2.exp_remainder(a, t + h * dirn)
                - sym2.exp_remainder(a, t - h * dirn)
            ) / (2 * h)
            an = sym2.d_exp_remainder(a, t, dirn)
            rel = sym2.frobenius(an - fd) / np.maximum(1.0, sym2.frobenius(fd))
            assert np.max(rel) < 1e-6

    def test_d_stretch_coupling_zero_direction(self):
        rng = np.random.default_rng(10)
        out = sym2.d_stretch_coupling(
            rng.standard_normal((10, 3)), rng.standard_normal((10, 3)), np.zeros(3)
        )
        assert np.max(np.abs(out)) == 0.0

    def test_d_stretch_coupling_matches_fd(self):
        rng = np.random.default_rng(11)
        n, h = 1000, 1e-6
        b = rng.standard_normal((n, 3))
        d = rng.standard_normal((n, 3))
        dirn = rng.standard_normal((n, 3))
        fd = (
            sym2.stretch_coupling(b + h * dirn, d)
            - sym2.stretch_coupling(b - h * dirn, d)
        ) / (2 * h)
        an = sym2.d_stretch_coupling(b, d, dirn)
        rel = sym2.frobenius(an - fd) / np.maximum(1.0, sym2.frobenius(fd))
        assert np.max(rel) < 1e-5

    def test_d_stretch_coupling_at_degenerate_point(self):
        # at an isotropic first argument the derivative vanishes; FD agrees
        rng = np.random.default_rng(12)
        d = rng.standard_normal((20, 3))
        dirn = rng.standard_normal((20, 3))
        h = 1e-6
        fd = (
            sym2.stretch_coupling(h * dirn, d) - sym2.stretch_coupling(-h * dirn, d)
        ) / (2 * h)
        an = sym2.d_stretch_coupling(np.zeros(3), d, dirn)
        assert np.max(sym2.frobenius(an - fd)) < 1e-6

    def test_continuity_across_series_switch(self):
        # bracket each closed-form/series switch tightly; the evaluated
        # coupling and both derivatives must not jump there. The gap sweep
        # below additionally guards against NaNs anywhere in [0, 1e-3].
        d = np.array([0.3, 0.7, -0.2])
        dirn = np.array([0.1, -0.4, 0.9])

        def b_of(gaps):
            b = np.zeros((np.size(gaps), 3))
            b[:, 0] = 0.5 * np.asarray(gaps)
            b[:, 2] = -0.5 * np.asarray(gaps)
            return b

        # coupling coefficient switches at half-gap 1e-5, derivative kernel
        # of the exponential remainder at gap 1e-7
        for gaps, funcs in [
            (2e-5 * np.array([1 - 1e-4, 1 + 1e-4]), ("kap", "dkap")),
            (1e-7 * np.array([1 - 1e-4, 1 + 1e-4]), ("dfr",)),
        ]:
            b = b_of(gaps)
            series = {
                "kap": sym2.stretch_coupling(b, d + 0 * b),
                "dkap": sym2.d_stretch_coupling(b, d + 0 * b, dirn + 0 * b),
                "dfr": sym2.d_exp_remainder(1.3, b, dirn + 0 * b),
            }
            for name in funcs:
                jump = np.max(np.abs(series[name][1] - series[name][0]))
                assert jump < 1e-8, (name, jump)

        b = b_of(np.concatenate([[0.0], np.logspace(-9, -3, 200)]))
        for arr in (
            sym2.stretch_coupling(b, d + 0 * b),
            sym2.d_stretch_coupling(b, d + 0 * b, dirn + 0 * b),
            sym2.d_exp_remainder(1.3, b, dirn + 0 * b),
        ):
            assert np.all(np.isfinite(arr))


class TestStressTransforms:
    def params(self, lam):
        return PhysicalParams(rho=0.0, eta_total=1.0, beta=0.59, relaxation_time=lam)

    def test_zero_maps_to_zero(self):
        p = self.params(0.7)
        assert sym2.stress_from_logconf(p, np.zeros(3)) == pytest.approx([0, 0, 0])
        assert sym2.logconf_from_stress(p, np.zeros(3)) == pytest.approx([0, 0, 0])

    def test_newtonian_identity_map(self):
        p = self.params(0.0)
        t = np.array([1.2, -0.3, 0.4])
        assert sym2.stress_from_logconf(p, t) == pytest.approx(list(t))
        assert sym2.logconf_from_stress(p, t) == pytest.approx(list(t))

    def test_roundtrip(self):
        # the transform pair is exp/log conditioned: the roundtrip error
        # grows with the conformation eigenvalue ratio, so the property is
        # asserted on states whose scaled eigenvalue spread stays moderate
        # (which admissible flow states do)
        rng = np.random.default_rng(13)
        p = self.params(1.1)
        chi = 0.5 * rng.standard_normal((2000, 3))
        back = sym2.logconf_from_stress(p, sym2.stress_from_logconf(p, chi))
        assert np.max(sym2.frobenius(back - chi)) < 1e-10

    def test_consistency_with_exp_remainder(self):
        rng = np.random.default_rng(14)
        p = self.params(0.8)
        chi = rng.standard_normal((100, 3))
        direct = sym2.stress_from_logconf(p, chi)
        composed = chi + sym2.exp_remainder(p.elastic_scale, chi)
        assert np.max(sym2.frobenius(direct - composed)) < 1e-12

    def test_inadmissible_stress_rejected(self):
        p = self.params(2.0)
        # a*sigma + I with a negative unit eigenvalue
        sigma = np.array([-5.0, 0.0, 0.0])
        with pytest.raises(NotSPDError):
            sym2.logconf_from_stress(p, sigma)


def test_kernel_equivalence_oracle_quick():
    rows = kernel_equivalence(n_samples=2000, seed=42)
    assert all(r.passed for r in rows), [str(r) for r in rows]
