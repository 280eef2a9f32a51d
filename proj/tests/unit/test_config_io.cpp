#include "seeopt/config.hpp"
#include "seeopt/io.hpp"
#include "seeopt/presets.hpp"
#include "seeopt/report.hpp"
#include "seeopt/runner.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace seeopt;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string temp_dir(const char* name) {
    const auto dir = std::filesystem::temp_directory_path() / "seeopt_tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

} // namespace

TEST_CASE("config parses known keys and rejects unknown ones", "[config_io]") {
    const auto cfg = ExperimentConfig::parse(
        "# comment\n"
        "preset = control_diffusion\n"
        "n_modes = 4\n"
        "T = 2.0\n"
        "n_steps = 10   # trailing comment\n"
        "n_paths = 128\n"
        "seed = 7\n"
        "verifier.n_alt = 3\n"
        "candidate = feedback\n");
    REQUIRE(cfg.preset == "control_diffusion");
    REQUIRE(cfg.params.n_modes == 4);
    REQUIRE(cfg.T == 2.0);
    REQUIRE(cfg.n_steps == 10);
    REQUIRE(cfg.n_paths == 128);
    REQUIRE(cfg.seed == 7);
    REQUIRE(cfg.verifier.n_alt == 3);
    REQUIRE(cfg.candidate == CandidateKind::feedback);

    REQUIRE_THROWS_AS(ExperimentConfig::parse("presett = lq_diagonal\n"), ConfigError);
    REQUIRE_THROWS_AS(ExperimentConfig::parse("n_paths = 16\nn_paths = 32\n"), ConfigError);
    REQUIRE_THROWS_AS(ExperimentConfig::parse("n_paths\n"), ConfigError);
}

TEST_CASE("config validates values", "[config_io]") {
    REQUIRE_THROWS_AS(ExperimentConfig::parse("n_paths = -5\n"), ConfigError);
    REQUIRE_THROWS_AS(ExperimentConfig::parse("n_paths = abc\n"), ConfigError);
    REQUIRE_THROWS_AS(ExperimentConfig::parse("T = 0\n"), ConfigError);
    REQUIRE_THROWS_AS(ExperimentConfig::parse("preset = unknown\n"), ConfigError);
    REQUIRE_THROWS_AS(ExperimentConfig::parse("kappa = -1\n"), ConfigError);
    REQUIRE_THROWS_AS(ExperimentConfig::parse("candidate = sideways\n"), ConfigError);
    REQUIRE_THROWS_AS(ExperimentConfig::parse("regression.degree = 3\n"), ConfigError);
    REQUIRE_THROWS_AS(ExperimentConfig::parse("dump.forward = maybe\n"), ConfigError);
}

TEST_CASE("config hash tracks the effective configuration", "[config_io]") {
    const auto a = ExperimentConfig::parse("preset = lq_diagonal\nseed = 1\n");
    const auto b = ExperimentConfig::parse("seed = 1\npreset = lq_diagonal\n");
    const auto c = ExperimentConfig::parse("preset = lq_diagonal\nseed = 2\n");
    REQUIRE(a.hash() == b.hash());
    REQUIRE(a.hash() != c.hash());
    REQUIRE(a.hash().size() == 16);
}

TEST_CASE("emit_report writes deterministic JSON and text", "[config_io]") {
    VerificationReport rep;
    rep.fd.tol = 1e-6;
    rep.fd.n_samples = 10;
    rep.fd.max_rel_error["b_x"] = 1e-9;
    rep.cond_i.n_tests = 100;
    rep.cond_i.tol = 1e-10;
    rep.cond_i.worst_violation = -1.0;
    rep.cond_i.worst_gradient_violation = -1.0;
    rep.cond_iii = rep.cond_i;
    rep.cond_iv.tol_gap = 1e-6;
    rep.cond_iv.max_gap = 0.0;
    rep.pass_i = rep.pass_ii = rep.pass_iii = rep.pass_iv = rep.pass_duality = true;
    rep.overall = true;

    const std::string dir = temp_dir("emit");
    const auto files1 = emit_report(rep, {"json", "txt"}, dir);
    REQUIRE(files1.size() == 2);
    const std::string j1 = slurp(files1[0]);
    const std::string t1 = slurp(files1[1]);
    emit_report(rep, {"json", "txt"}, dir);
    REQUIRE(slurp(files1[0]) == j1);
    REQUIRE(slurp(files1[1]) == t1);

    // empty duality list serializes as an empty array
    REQUIRE(j1.find("\"duality\": []") != std::string::npos);

    // a failing convexity check carries its witness coordinates
    VerificationReport bad = rep;
    bad.cond_i.worst_violation = 0.5;
    bad.cond_i.witness_a = (SpectralVector(2) << 1.0, 2.0).finished();
    bad.cond_i.witness_b = (SpectralVector(2) << -1.0, 0.5).finished();
    bad.pass_i = false;
    bad.overall = false;
    emit_report(bad, {"json"}, dir);
    const std::string j2 = slurp(files1[0]);
    REQUIRE(j2.find("witness") != std::string::npos);
    REQUIRE(j2.find("2.0") != std::string::npos);

    REQUIRE_THROWS_AS(emit_report(rep, {"yaml"}, dir), std::invalid_argument);
}

TEST_CASE("control CSV round-trips through the documented schema", "[config_io]") {
    const auto preset = make_control_diffusion(PresetParams{.n_modes = 3});
    const TimeGrid grid = uniform_grid(1.0, 5);
    const auto cand = preset_candidate(preset, grid);
    const auto ens = simulate_forward(preset.problem, cand, preset.x0, 4, 99);

    const std::string dir = temp_dir("control_csv");
    const std::string path = dir + "/control.csv";
    write_control_csv(path, ens);

    const auto back = read_control_csv(path, grid, preset.problem.control_set, 4);
    REQUIRE(back.n_stored_paths() == 4);
    for (int p = 0; p < 4; ++p)
        for (int i = 0; i < 5; ++i)
            REQUIRE((back.value(p, i) - ens.control(p, i)).norm() < 1e-14);

    // wrong path count
    REQUIRE_THROWS_WITH(read_control_csv(path, grid, preset.problem.control_set, 5),
                        Catch::Matchers::ContainsSubstring("rows"));

    // a value outside U names its row
    {
        std::ofstream out(path, std::ios::app);
        out << "3,4,9.0,0.0,0.0\n"; // beyond the box
    }
    REQUIRE_THROWS_WITH(read_control_csv(path, grid, preset.problem.control_set, 4),
                        Catch::Matchers::ContainsSubstring("outside U") &&
                            Catch::Matchers::ContainsSubstring("row"));
}

TEST_CASE("ensemble CSV dumps have the documented shape", "[config_io]") {
    const auto preset = make_lq_diagonal(PresetParams{.n_modes = 2});
    const TimeGrid grid = uniform_grid(1.0, 3);
    const auto cand = preset_candidate(preset, grid);
    const auto ens = simulate_forward(preset.problem, cand, preset.x0, 2, 1);
    const auto adj = solve_bsee_riccati_lq(*preset.lq, ens);

    const std::string dir = temp_dir("dumps");
    write_forward_csv(dir + "/forward.csv", ens);
    write_adjoint_csv(dir + "/adjoint.csv", adj);

    const std::string fwd = slurp(dir + "/forward.csv");
    REQUIRE(fwd.rfind("path,t,x_1,x_2\n", 0) == 0);
    REQUIRE(std::count(fwd.begin(), fwd.end(), '\n') == 1 + 2 * 4);

    const std::string ad = slurp(dir + "/adjoint.csv");
    REQUIRE(ad.rfind("path,t,y_1,y_2,z_11,z_12,z_21,z_22\n", 0) == 0);
    REQUIRE(std::count(ad.begin(), ad.end(), '\n') == 1 + 2 * 4);
}

TEST_CASE("duality and cost CSV writers emit one row per alternative", "[config_io]") {
    std::vector<DualityCheckResult> rows(2);
    rows[0].lhs = 0.5;
    rows[0].rhs = 0.49;
    rows[0].gap = 0.01;
    rows[0].combined_stderr = 0.02;
    rows[0].bias_tol = 0.01;
    rows[0].n_paths = 10;
    rows[1] = rows[0];
    const std::string dir = temp_dir("csv");
    write_duality_csv(dir + "/duality.csv", rows);
    const std::string d = slurp(dir + "/duality.csv");
    REQUIRE(std::count(d.begin(), d.end(), '\n') == 3);
    REQUIRE(d.find("alt,lhs,lhs_stderr,rhs,rhs_stderr,gap,combined_stderr,tolerance,pass") == 0);

    CostComparison cmp;
    cmp.j_candidate = 1.0;
    cmp.j_candidate_stderr = 0.1;
    cmp.rows.resize(2);
    cmp.rows[0].j_alt = 1.2;
    cmp.rows[1].j_alt = 0.7;
    cmp.rows[1].better = true;
    write_costs_csv(dir + "/costs.csv", cmp, {"a", "b"});
    const std::string c = slurp(dir + "/costs.csv");
    REQUIRE(std::count(c.begin(), c.end(), '\n') == 4);
    REQUIRE(c.find(",1\n") != std::string::npos); // flagged row
}
