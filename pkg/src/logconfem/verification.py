"""Self-contained verification suites.

These are the oracle checks the test suite and the ``verify`` CLI subcommand
share. Each suite returns a list of ``CheckResult`` rows; a suite passes when
every row does.

The kernel-equivalence oracle is deliberately independent of the fast kernel
implementation: it builds the conformation-tensor form of the constitutive
law with dense 2x2 matrices and ``np.linalg.eigh``, transforms its advection
image with divided differences of the logarithm, and compares against the
log-form operator assembled from the package kernels. Passing it pins the
adopted nonlinear functions to the original (untransformed) law.
"""

from dataclasses import dataclass

import numpy as np

from . import sym2
from .params import PhysicalParams


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    threshold: float
    note: str = ""

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return (
            f"[{status}] {self.name}: measured {self.measured:.3e}"
            f" (threshold {self.threshold:.3e}) {self.note}"
        )


def _random_spd(rng, n):
    a = rng.standard_normal((n, 2, 2))
    mats = a @ np.swapaxes(a, 1, 2)
    mats[:, 0, 0] += 0.05
    mats[:, 1, 1] += 0.05
    return mats


def _log_derivative(mats, direction):
    """Daleckii-Krein derivative of the matrix logarithm, batched 2x2 SPD."""
    mu, vec = np.linalg.eigh(mats)
    h = np.swapaxes(vec, 1, 2) @ direction @ vec
    gap = mu[:, 1] - mu[:, 0]
    safe = np.where(np.abs(gap) < 1e-12, 1.0, gap)
    off = np.where(
        np.abs(gap) < 1e-12,
        1.0 / mu[:, 0],
        (np.log(mu[:, 1]) - np.log(mu[:, 0])) / safe,
    )
    phi = np.empty_like(h)
    phi[:, 0, 0] = 1.0 / mu[:, 0]
    phi[:, 1, 1] = 1.0 / mu[:, 1]
    phi[:, 0, 1] = off
    phi[:, 1, 0] = off
    return vec @ (h * phi) @ np.swapaxes(vec, 1, 2)


def kernel_equivalence(n_samples=10_000, seed=2024, tol=1e-9):
    """Equivalence of the log-form and conformation-form constitutive laws.

    For random admissible states the advection image of the conformation
    equation, pushed through the derivative of the log transformation, must
    equal the advection image implied by the log-form operator built from
    ``exp_remainder`` and ``stretch_coupling``.
    """
    rng = np.random.default_rng(seed)
    group = 250
    n_groups = max(1, n_samples // group)
    worst = 0.0
    eye = np.eye(2)
    for _ in range(n_groups):
        beta = rng.uniform(0.1, 0.9)
        eta_t = rng.uniform(0.5, 2.0)
        lam = rng.uniform(0.05, 2.0)
        p = PhysicalParams(rho=0.0, eta_total=eta_t, beta=beta, relaxation_time=lam)
        a = p.elastic_scale
        eta_p = p.eta_polymer

        c = _random_spd(rng, group)
        grad_u = rng.standard_normal((group, 2, 2))

        # conformation form: advection image of c from the untransformed law
        adv_c = (
            grad_u @ c
            + c @ np.swapaxes(grad_u, 1, 2)
            + ((eta_p / lam) * eye - c) / lam
        )
        # push through the transformation chi = log(a c) / a (its derivative
        # in direction H is exactly Dlog(a c)[H])
        adv_chi_from_c = _log_derivative(a * c, adv_c)

        # log form: advection image predicted by the transformed operator,
        # using the kernels under test
        mu, vec = np.linalg.eigh(a * c)
        chi_mat = (vec * (np.log(mu) / a)[:, None, :]) @ np.swapaxes(vec, 1, 2)
        chi = sym2.from_matrix(chi_mat)
        eps = sym2.from_matrix(0.5 * (grad_u + np.swapaxes(grad_u, 1, 2)))
        spin = 0.5 * (grad_u[:, 0, 1] - grad_u[:, 1, 0])
        f_minus = sym2.exp_remainder(a, -chi)
        kap = sym2.stretch_coupling(a * chi, eps)
        rot = sym2.sym2(
            2.0 * spin * chi[:, 1],
            spin * (chi[:, 2] - chi[:, 0]),
            -2.0 * spin * chi[:, 1],
        )
        adv_chi = rot + (2.0 * eta_p * eps - chi + f_minus - 2.0 * eta_p * kap) / lam

        diff = sym2.frobenius(adv_chi - sym2.from_matrix(adv_chi_from_c))
        scale = np.maximum(1.0, sym2.frobenius(sym2.from_matrix(adv_chi_from_c)))
        worst = max(worst, float(np.max(diff / scale)))

    return [
        CheckResult(
            name="constitutive-law equivalence (log form vs conformation form)",
            passed=worst < tol,
            measured=worst,
            threshold=tol,
            note=f"over {n_groups * group} random states",
        )
    ]


def derivative_checks(n_samples=1000, seed=7, tol_f=1e-6, tol_k=1e-5):
    """Directional derivatives against central finite differences."""
    rng = np.random.default_rng(seed)
    h = 1e-6

    t = rng.standard_normal((n_samples, 3))
    direction = rng.standard_normal((n_samples, 3))
    a = 0.9
    fd = (
        sym2.exp_remainder(a, t + h * direction)
        - sym2.exp_remainder(a, t - h * direction)
    ) / (2.0 * h)
    an = sym2.d_exp_remainder(a, t, direction)
    scale = np.maximum(1.0, sym2.frobenius(fd))
    err_f = float(np.max(sym2.frobenius(an - fd) / scale))

    b = rng.standard_normal((n_samples, 3))
    d = rng.standard_normal((n_samples, 3))
    fd_k = (
        sym2.stretch_coupling(b + h * direction, d)
        - sym2.stretch_coupling(b - h * direction, d)
    ) / (2.0 * h)
    an_k = sym2.d_stretch_coupling(b, d, direction)
    scale_k = np.maximum(1.0, sym2.frobenius(fd_k))
    err_k = float(np.max(sym2.frobenius(an_k - fd_k) / scale_k))

    return [
        CheckResult(
            "exp_remainder derivative vs central FD", err_f < tol_f, err_f, tol_f
        ),
        CheckResult(
            "stretch_coupling derivative vs central FD", err_k < tol_k, err_k, tol_k
        ),
    ]


def jacobian_order(seed=11):
    """Observed Taylor order of the element finite-difference Jacobian."""
    # imported here to keep the kernel suite free of mesh/solver dependencies
    from .assembly import element_jacobian_order_probe

    order = element_jacobian_order_probe(seed=seed)
    return [
        CheckResult(
            "element FD Jacobian Taylor order", order >= 1.9, order, 1.9,
            note="(higher is better)",
        )
    ]


def newtonian_identity():
    """Residual identities of the Newtonian (zero relaxation time) limit."""
    from .benchmarks import periodic_box_case
    from .newton import NewtonConfig, newton_solve
    from .assembly import assemble_residual

    case = periodic_box_case(n_per_side=8)
    cfg = NewtonConfig(epsilon=1e-11, max_iters=10)
    result = newton_solve(case, "asgs", None, cfg)
    rows = []
    rows.append(
        CheckResult(
            "Newtonian periodic-box Newton convergence",
            result.converged and result.n_iters <= 2,
            float(result.n_iters),
            2.0,
            note="iterations to converge a (near-)linear problem",
        )
    )
    # with zero relaxation time the nonlinear kernels must contribute nothing:
    # the residual of the full operator equals the residual with the
    # nonlinear terms (exp remainder, stretch coupling) hard-disabled
    res_full = assemble_residual(case, "asgs", result.state)
    res_newt = assemble_residual(case, "asgs", result.state, newtonian_only=True)
    gap = float(
        np.linalg.norm(res_full - res_newt) / np.sqrt(res_full.size)
    )
    rows.append(
        CheckResult(
            "Newtonian limit: nonlinear kernels inert at lambda = 0",
            gap < 1e-13,
            gap,
            1e-13,
        )
    )
    return rows


SUITES = {
    "kernels": lambda: kernel_equivalence() + derivative_checks(),
    "jacobian": jacobian_order,
    "newtonian": newtonian_identity,
}


def run_suite(name):
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; available: {sorted(SUITES)}")
    return SUITES[name]()
