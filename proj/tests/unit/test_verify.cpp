#include "seeopt/presets.hpp"
#include "seeopt/verify.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace seeopt;

namespace {

ProblemDefinition with_phi(const ProblemDefinition& base,
                           std::function<double(const SpectralVector&)> phi,
                           std::function<SpectralVector(const SpectralVector&)> grad) {
    CoefficientBundle c = base.coeffs;
    c.phi = std::move(phi);
    c.phi_grad = std::move(grad);
    return ProblemDefinition(base.basis, c, base.control_set);
}

} // namespace

TEST_CASE("phi convexity: quadratic passes, concave fails with witness", "[verify]") {
    const auto preset = make_lq_diagonal();
    ConvexitySamplerConfig cfg;
    cfg.n_pairs = 5000;
    cfg.seed = 3;

    const auto good = check_phi_convexity(preset.problem, cfg, 1e-10);
    REQUIRE(good.pass());
    REQUIRE(good.worst_violation <= 1e-12);

    const auto concave =
        with_phi(preset.problem,
                 [](const SpectralVector& x) { return -x.squaredNorm(); },
                 [](const SpectralVector& x) { return SpectralVector(-2.0 * x); });
    const auto bad = check_phi_convexity(concave, cfg, 1e-10);
    REQUIRE_FALSE(bad.pass());
    REQUIRE(bad.worst_violation > 1e-3);
    REQUIRE(bad.witness_a.size() == 8);
    // the witness reproduces the reported violation
    const double fa = concave.coeffs.phi(bad.witness_a);
    const double fb = concave.coeffs.phi(bad.witness_b);
    const double fm = concave.coeffs.phi(0.5 * (bad.witness_a + bad.witness_b));
    REQUIRE(fm - 0.5 * (fa + fb) == Catch::Approx(bad.worst_violation));
}

TEST_CASE("phi convexity: quartic passes at 1e-10 over ten thousand pairs", "[verify]") {
    const auto preset = make_lq_diagonal();
    const auto quartic =
        with_phi(preset.problem,
                 [](const SpectralVector& x) {
                     return 0.25 * x.array().square().square().sum();
                 },
                 [](const SpectralVector& x) {
                     return SpectralVector(x.array().cube().matrix());
                 });
    ConvexitySamplerConfig cfg;
    cfg.n_pairs = 10000;
    cfg.seed = 4;
    const auto res = check_phi_convexity(quartic, cfg, 1e-10);
    REQUIRE(res.pass());
}

TEST_CASE("phi convexity detects a 1e-3 concave perturbation", "[verify]") {
    // curvature along the first coordinate pushed just past zero:
    // the Hessian becomes diag(-1e-3, 1, ..., 1)
    const auto preset = make_lq_diagonal();
    const auto perturbed =
        with_phi(preset.problem,
                 [](const SpectralVector& x) {
                     return 0.5 * x.squaredNorm() - 0.5 * (1.0 + 1e-3) * x[0] * x[0];
                 },
                 [](const SpectralVector& x) {
                     SpectralVector g = x;
                     g[0] -= (1.0 + 1e-3) * x[0];
                     return g;
                 });
    ConvexitySamplerConfig cfg;
    cfg.n_pairs = 10000;
    cfg.seed = 5;
    const auto res = check_phi_convexity(perturbed, cfg, 1e-10);
    REQUIRE_FALSE(res.pass());
    REQUIRE(res.worst_violation > 1e-10);
    REQUIRE(res.witness_a.size() > 0);
}

TEST_CASE("Hamiltonian convexity on the LQ problem, with engineered failure",
          "[verify]") {
    const auto preset = make_lq_diagonal();
    const TimeGrid grid = uniform_grid(1.0, 10);
    const auto cand = preset_candidate(preset, grid);
    const auto fwd = simulate_forward(preset.problem, cand, preset.x0, 128, 6);
    const auto adj = solve_bsee_riccati_lq(*preset.lq, fwd);

    ConvexitySamplerConfig cfg;
    cfg.n_pairs = 4000;
    cfg.seed = 6;
    const auto good =
        check_hamiltonian_convexity(preset.problem, adj, fwd, cand, cfg, 1e-10);
    REQUIRE(good.pass());

    // concave control cost breaks joint convexity
    CoefficientBundle badc = preset.problem.coeffs;
    badc.ell = [](const SpectralVector& x, const ControlPoint& nu) {
        return 0.5 * x.squaredNorm() - nu.squaredNorm();
    };
    badc.ell_nu = [](const SpectralVector&, const ControlPoint& nu, const ControlPoint& h) {
        return -2.0 * nu.dot(h);
    };
    const ProblemDefinition bad(preset.problem.basis, badc, preset.problem.control_set);
    const auto res = check_hamiltonian_convexity(bad, adj, fwd, cand, cfg, 1e-10);
    REQUIRE_FALSE(res.pass());
    REQUIRE(res.witness_nu_a.size() == 8);
}

TEST_CASE("affine Hamiltonians pass convexity with zero slack", "[verify]") {
    const int n = 3;
    CoefficientBundle c;
    c.b = [](const SpectralVector& x, const ControlPoint& nu) -> SpectralVector {
        return 0.5 * x + SpectralVector(nu);
    };
    c.sigma = [n](const SpectralVector&, const ControlPoint&) -> HSMatrix {
        return 0.3 * HSMatrix::Identity(n, n);
    };
    c.ell = [](const SpectralVector& x, const ControlPoint& nu) {
        return x.sum() - 2.0 * nu.sum();
    };
    c.phi = [](const SpectralVector& x) { return x.sum(); };
    c.b_x = [](const SpectralVector&, const ControlPoint&, const SpectralVector& h)
        -> SpectralVector { return 0.5 * h; };
    c.b_nu = [](const SpectralVector&, const ControlPoint&, const ControlPoint& h)
        -> SpectralVector { return SpectralVector(h); };
    c.sigma_x = [n](const SpectralVector&, const ControlPoint&, const SpectralVector&) {
        return HSMatrix::Zero(n, n);
    };
    c.sigma_nu = [n](const SpectralVector&, const ControlPoint&, const ControlPoint&) {
        return HSMatrix::Zero(n, n);
    };
    c.ell_x = [](const SpectralVector&, const ControlPoint&, const SpectralVector& h) {
        return h.sum();
    };
    c.ell_nu = [](const SpectralVector&, const ControlPoint&, const ControlPoint& h) {
        return -2.0 * h.sum();
    };
    c.phi_grad = [n](const SpectralVector&) -> SpectralVector {
        return SpectralVector::Ones(n);
    };
    const ProblemDefinition problem(SpectralBasis::dirichlet_laplacian(n, 0.05), c,
                                    ControlSet::centered_box(n, 1.0));
    const TimeGrid grid = uniform_grid(1.0, 5);
    const auto cand = ControlProcess::constant(grid, problem.control_set,
                                               ControlPoint::Zero(n));
    const auto fwd = simulate_forward(problem, cand, SpectralVector::Ones(n), 128, 7);
    const auto adj = solve_bsee_regression(problem, fwd, cand, RegressionConfig{});
    ConvexitySamplerConfig cfg;
    cfg.n_pairs = 2000;
    cfg.seed = 8;
    const auto res = check_hamiltonian_convexity(problem, adj, fwd, cand, cfg, 1e-10);
    REQUIRE(res.pass());
    REQUIRE(std::abs(res.worst_violation) < 1e-12);
}

TEST_CASE("minimum condition holds for the Riccati candidate and fails for zero",
          "[verify]") {
    const auto preset = make_lq_diagonal();
    const TimeGrid grid = uniform_grid(1.0, 20);
    VerifierConfig cfg;
    cfg.seed = 9;

    const auto cand = preset_candidate(preset, grid);
    const auto fwd = simulate_forward(preset.problem, cand, preset.x0, 256, cfg.seed);
    const auto adj = solve_bsee_riccati_lq(*preset.lq, fwd);
    const auto res = check_minimum_condition(preset.problem, fwd, adj, cand, cfg);
    REQUIRE(res.pass());
    REQUIRE(res.max_gap <= cfg.tol_gap);
    REQUIRE(res.variational_residual <= cfg.tol_var);

    const auto zero = ControlProcess::constant(grid, preset.problem.control_set,
                                               ControlPoint::Zero(8));
    const auto fwd0 = simulate_forward(preset.problem, zero, preset.x0, 256, cfg.seed);
    const auto adj0 = solve_bsee_riccati_lq(*preset.lq, fwd0);
    const auto res0 = check_minimum_condition(preset.problem, fwd0, adj0, zero, cfg);
    REQUIRE_FALSE(res0.pass());
    REQUIRE(res0.max_gap > 10.0 * cfg.tol_gap);
    REQUIRE(res0.witness_step >= 0);
}

TEST_CASE("minimum condition is trivial when H ignores the control", "[verify]") {
    const int n = 2;
    // B = 0 and (practically) no control cost: H is constant in nu
    LqSpec lq{SpectralBasis::dirichlet_laplacian(n, 0.05),
              Eigen::VectorXd::Zero(n),
              Eigen::VectorXd::Zero(n),
              Eigen::VectorXd::Ones(n),
              Eigen::VectorXd::Ones(n),
              1e-30,
              0.2 * HSMatrix::Identity(n, n)};
    const auto problem = lq_problem(lq, ControlSet::centered_box(n, 1.0));
    const TimeGrid grid = uniform_grid(1.0, 6);
    const auto cand =
        ControlProcess::constant(grid, problem.control_set, ControlPoint::Zero(n));
    VerifierConfig cfg;
    cfg.seed = 10;
    const auto fwd = simulate_forward(problem, cand, SpectralVector::Ones(n), 64, cfg.seed);
    const auto adj = solve_bsee_riccati_lq(lq, fwd);
    const auto res = check_minimum_condition(problem, fwd, adj, cand, cfg);
    REQUIRE(res.pass());
    REQUIRE(std::abs(res.max_gap) < 1e-12);
}

TEST_CASE("derivative bounds: linear stays flat, quadratic growth is flagged",
          "[verify]") {
    const auto preset = make_lq_diagonal();
    VerifierConfig cfg;
    cfg.seed = 11;
    cfg.n_bound_samples = 60;
    const auto rep = check_derivative_bounds(preset.problem, cfg);
    REQUIRE_FALSE(rep.flagged.at("b_x"));
    REQUIRE_FALSE(rep.flagged.at("b_nu"));
    REQUIRE(rep.phi_growth_ratio <= 1.0 + 1e-12); // |x| / (1 + |x|) < 1

    CoefficientBundle quad = preset.problem.coeffs;
    quad.b = [](const SpectralVector& x, const ControlPoint& nu) -> SpectralVector {
        return (x.array().square() + nu.array()).matrix();
    };
    quad.b_x = [](const SpectralVector& x, const ControlPoint&, const SpectralVector& h)
        -> SpectralVector { return (2.0 * x.array() * h.array()).matrix(); };
    const ProblemDefinition p2(preset.problem.basis, quad, preset.problem.control_set);
    const auto rep2 = check_derivative_bounds(p2, cfg);
    REQUIRE(rep2.flagged.at("b_x"));
    REQUIRE(rep2.growth_factor.at("b_x") > 1.5);
}

TEST_CASE("duality gap is identically zero when the alternative is the candidate",
          "[verify]") {
    const auto preset = make_control_diffusion();
    const TimeGrid grid = uniform_grid(1.0, 10);
    const auto cand = ControlProcess::constant(grid, preset.problem.control_set,
                                               ControlPoint::Constant(8, 0.25));
    VerifierConfig cfg;
    cfg.seed = 12;
    const auto res = check_duality_identity(preset.problem, preset.x0, cand, cand,
                                            512, cfg.seed, cfg);
    REQUIRE(res.lhs == 0.0);
    REQUIRE(res.rhs == 0.0);
    REQUIRE(res.gap == 0.0);
    REQUIRE(res.pass());
}

TEST_CASE("duality is exact for control-free dynamics", "[verify]") {
    // b = 0 and constant sigma: trajectories ignore the control entirely,
    // so every term of the identity vanishes path by path
    const int n = 3;
    CoefficientBundle c;
    SpectralVector a(n);
    a << 1.0, -0.5, 0.25;
    c.b = [n](const SpectralVector&, const ControlPoint&) { return SpectralVector::Zero(n); };
    c.sigma = [n](const SpectralVector&, const ControlPoint&) -> HSMatrix {
        return 0.4 * HSMatrix::Identity(n, n);
    };
    c.ell = [](const SpectralVector&, const ControlPoint& nu) { return 0.5 * nu.squaredNorm(); };
    c.phi = [a](const SpectralVector& x) { return a.dot(x); };
    c.b_x = [n](const SpectralVector&, const ControlPoint&, const SpectralVector&) {
        return SpectralVector::Zero(n);
    };
    c.b_nu = [n](const SpectralVector&, const ControlPoint&, const ControlPoint&) {
        return SpectralVector::Zero(n);
    };
    c.sigma_x = [n](const SpectralVector&, const ControlPoint&, const SpectralVector&) {
        return HSMatrix::Zero(n, n);
    };
    c.sigma_nu = [n](const SpectralVector&, const ControlPoint&, const ControlPoint&) {
        return HSMatrix::Zero(n, n);
    };
    c.ell_x = [](const SpectralVector&, const ControlPoint&, const SpectralVector&) {
        return 0.0;
    };
    c.ell_nu = [](const SpectralVector&, const ControlPoint& nu, const ControlPoint& h) {
        return nu.dot(h);
    };
    c.phi_grad = [a](const SpectralVector&) { return a; };
    const ProblemDefinition problem(SpectralBasis::dirichlet_laplacian(n, 0.05), c,
                                    ControlSet::centered_box(n, 1.0));
    const TimeGrid grid = uniform_grid(1.0, 8);
    const auto star = ControlProcess::constant(grid, problem.control_set,
                                               ControlPoint::Constant(n, 0.5));
    const auto alt = ControlProcess::constant(grid, problem.control_set,
                                              ControlPoint::Constant(n, -0.5));
    VerifierConfig cfg;
    cfg.seed = 13;
    const auto res = check_duality_identity(problem, SpectralVector::Ones(n), star, alt,
                                            256, cfg.seed, cfg);
    REQUIRE(res.lhs == 0.0);
    REQUIRE(res.rhs == 0.0);
    REQUIRE(res.gap == 0.0);
}

TEST_CASE("duality holds on the LQ benchmark within tolerance", "[verify]") {
    const auto preset = make_lq_diagonal();
    const TimeGrid grid = uniform_grid(1.0, 20);
    const auto cand = preset_candidate(preset, grid);
    VerifierConfig cfg;
    cfg.seed = 14;
    cfg.bias_tol = 0.01;
    const auto alt = perturbed_control(cand, preset.problem.control_set, 0.25,
                                       rng::derive_key(cfg.seed, rng::Stream::alt_control));
    const auto res = check_duality_identity(preset.problem, preset.x0, cand, alt, 1024,
                                            cfg.seed, cfg, preset.lq);
    REQUIRE(res.pass());
    REQUIRE(res.combined_stderr > 0.0);
}

TEST_CASE("compare_costs: identical alternative gives exactly zero difference",
          "[verify]") {
    const auto preset = make_control_diffusion();
    const TimeGrid grid = uniform_grid(1.0, 8);
    const auto cand = preset_candidate(preset, grid);
    const auto cmp = compare_costs(preset.problem, preset.x0, cand, {cand}, 128, 15);
    REQUIRE(cmp.rows.size() == 1);
    REQUIRE(cmp.rows[0].diff == 0.0);
    REQUIRE(cmp.rows[0].diff_stderr == 0.0);
    REQUIRE_FALSE(cmp.rows[0].better);
}

TEST_CASE("compare_costs flags the Riccati feedback against the zero control",
          "[verify]") {
    const auto preset = make_lq_diagonal();
    const TimeGrid grid = uniform_grid(1.0, 20);
    const int n_paths = 2048;
    const auto zero = ControlProcess::constant(grid, preset.problem.control_set,
                                               ControlPoint::Zero(8));
    const auto riccati = preset_candidate(preset, grid);
    const auto cmp =
        compare_costs(preset.problem, preset.x0, zero, {riccati}, n_paths, 16);
    REQUIRE(cmp.rows[0].better);
    REQUIRE(cmp.rows[0].diff < 0.0);

    // J of the uncontrolled diagonal system against the per-mode moment ODE:
    // m_k' = 2 lambda_k m_k + (sigma0^2)_kk, J = 1/2 sum_k (Q int m_k + G m_k(T))
    const auto& lq = *preset.lq;
    double j_oracle = 0.0;
    const int fine = 4000;
    const double h = 1.0 / fine;
    for (int k = 0; k < 8; ++k) {
        double m = preset.x0[k] * preset.x0[k], integral = 0.0;
        const double lam = lq.basis.eigenvalues[k];
        const double s2 = lq.sigma0(k, k) * lq.sigma0(k, k);
        const auto f = [&](double mm) { return 2.0 * lam * mm + s2; };
        for (int i = 0; i < fine; ++i) {
            const double m_old = m;
            const double k1 = f(m), k2 = f(m + 0.5 * h * k1), k3 = f(m + 0.5 * h * k2),
                         k4 = f(m + h * k3);
            m += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
            integral += 0.5 * h * (m_old + m);
        }
        j_oracle += 0.5 * (lq.Q[k] * integral + lq.G[k] * m);
    }
    REQUIRE(std::abs(cmp.j_candidate - j_oracle) <
            3.0 * cmp.j_candidate_stderr + 0.01);
}

TEST_CASE("verified candidates are never beaten on cost (theorem consistency)",
          "[verify]") {
    // randomized LQ variants: whenever the verifier passes the Riccati
    // candidate, no sampled admissible alternative may improve the cost
    // beyond three paired standard errors
    rng::StreamRng gen(2718);
    for (int variant = 0; variant < 3; ++variant) {
        PresetParams pp;
        pp.n_modes = 4;
        pp.kappa = 0.02 + 0.08 * gen.uniform();
        pp.sigma0 = 0.1 + 0.3 * gen.uniform();
        pp.r_control = 0.5 + gen.uniform();
        pp.q_weight = 0.5 + gen.uniform();
        pp.g_weight = 0.5 + gen.uniform();
        const auto preset = make_lq_diagonal(pp);
        const TimeGrid grid = uniform_grid(1.0, 16);
        const auto cand = preset_candidate(preset, grid);

        VerifierConfig cfg;
        cfg.seed = 1000 + variant;
        cfg.n_convexity_pairs = 1500;
        cfg.n_alt = 1;
        cfg.bias_tol = 0.01;
        const auto rep = verify_sufficient_conditions(preset.problem, preset.x0, cand,
                                                      512, cfg, preset.lq);
        INFO("variant " << variant);
        REQUIRE(rep.overall);

        std::vector<ControlProcess> alternatives;
        for (int a = 0; a < 8; ++a)
            alternatives.push_back(perturbed_control(
                cand, preset.problem.control_set, 0.3,
                rng::derive_key(cfg.seed, rng::Stream::cost_compare, a)));
        const auto cmp = compare_costs(preset.problem, preset.x0, cand, alternatives,
                                       1024, cfg.seed);
        REQUIRE_FALSE(cmp.any_better());
    }
}

TEST_CASE("full verification passes for the Riccati candidate and localizes failures",
          "[verify]") {
    const auto preset = make_lq_diagonal();
    const TimeGrid grid = uniform_grid(1.0, 20);
    VerifierConfig cfg;
    cfg.seed = 17;
    cfg.n_convexity_pairs = 2000;
    cfg.n_alt = 2;
    cfg.bias_tol = 0.01;

    const auto cand = preset_candidate(preset, grid);
    const auto rep = verify_sufficient_conditions(preset.problem, preset.x0, cand, 512,
                                                  cfg, preset.lq);
    REQUIRE(rep.overall);
    REQUIRE(rep.issues.empty());

    const auto zero = ControlProcess::constant(grid, preset.problem.control_set,
                                               ControlPoint::Zero(8));
    const auto rep0 = verify_sufficient_conditions(preset.problem, preset.x0, zero, 512,
                                                   cfg, preset.lq);
    REQUIRE_FALSE(rep0.overall);
    REQUIRE(rep0.pass_i);
    REQUIRE(rep0.pass_ii);
    REQUIRE(rep0.pass_iii);
    REQUIRE_FALSE(rep0.pass_iv);

    const auto concave =
        with_phi(preset.problem,
                 [](const SpectralVector& x) { return -0.5 * x.squaredNorm(); },
                 [](const SpectralVector& x) { return SpectralVector(-x); });
    VerifierConfig rcfg = cfg;
    rcfg.adjoint = AdjointSolver::regression;
    const auto repc = verify_sufficient_conditions(concave, preset.x0, zero, 512, rcfg);
    REQUIRE_FALSE(repc.overall);
    REQUIRE_FALSE(repc.pass_i);
}
