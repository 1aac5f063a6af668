#include "dpgfem/convergence.hpp"

#include "support/test_problems.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace dpgfem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    std::filesystem::path dir;
    TempDir() {
        dir = std::filesystem::temp_directory_path() / "dpgfem_test";
        std::filesystem::create_directories(dir);
    }
    std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

} // namespace

TEST_CASE("defaults and flag parsing", "[convergence]") {
    const auto cfg = parse_config({"run", "--experiment", "1", "--levels", "5"});
    REQUIRE(cfg.has_value());
    CHECK(cfg->experiment == 1);
    CHECK(cfg->levels == 5);
    CHECK(cfg->base_n == 2);
    CHECK(cfg->kappa == 1.0);
    CHECK(cfg->coupling == CouplingMode::Weak);
    CHECK(cfg->quad_degree == 6);
    CHECK(cfg->out_csv == "results.csv");
    CHECK(cfg->jump_out == "jump.dat");
}

TEST_CASE("invalid values are usage errors", "[convergence]") {
    CHECK_THROWS_AS(parse_config({"run", "--kappa", "0"}), UsageError);
    CHECK_THROWS_AS(parse_config({"run", "--kappa", "-1"}), UsageError);
    CHECK_THROWS_AS(parse_config({"run", "--levels", "0"}), UsageError);
    CHECK_THROWS_AS(parse_config({"run", "--experiment", "3"}), UsageError);
    CHECK_THROWS_AS(parse_config({"run", "--coupling", "sideways"}), UsageError);
    CHECK_THROWS_AS(parse_config({"run", "--no-such-flag"}), UsageError);
    CHECK_THROWS_AS(parse_config({}), UsageError);
    // the offending token is named
    try {
        parse_config({"run", "--coupling", "sideways"});
        FAIL("expected UsageError");
    } catch (const UsageError& e) {
        CHECK(std::string(e.what()).find("sideways") != std::string::npos);
    }
}

TEST_CASE("help is printed on request", "[convergence]") {
    std::ostringstream help;
    const auto cfg = parse_config({"--help"}, help);
    CHECK_FALSE(cfg.has_value());
    CHECK(help.str().find("run") != std::string::npos);
}

TEST_CASE("config file values lose against flags", "[convergence]") {
    const TempDir tmp;
    const std::string path = tmp / "config.txt";
    {
        std::ofstream out(path);
        out << "# study configuration\n";
        out << "coupling=strong\n";
        out << "levels = 4\n";
    }
    const auto file_only = parse_config({"run", "--config", path});
    REQUIRE(file_only.has_value());
    CHECK(file_only->coupling == CouplingMode::Strong);
    CHECK(file_only->levels == 4);

    const auto overridden = parse_config({"run", "--config", path, "--coupling", "weak"});
    REQUIRE(overridden.has_value());
    CHECK(overridden->coupling == CouplingMode::Weak);
    CHECK(overridden->levels == 4);
}

TEST_CASE("unknown config keys are rejected", "[convergence]") {
    const TempDir tmp;
    const std::string path = tmp / "bad.txt";
    {
        std::ofstream out(path);
        out << "couplings=strong\n";
    }
    try {
        parse_config({"run", "--config", path});
        FAIL("expected UsageError");
    } catch (const UsageError& e) {
        CHECK(std::string(e.what()).find("couplings") != std::string::npos);
    }
}

TEST_CASE("convergence run emits the documented CSV", "[convergence]") {
    const TempDir tmp;
    RunConfig cfg;
    cfg.experiment = 1;
    cfg.levels = 3;
    cfg.base_n = 2;
    cfg.out_csv = tmp / "results.csv";
    cfg.jump_out = tmp / "jump.dat";
    const ConvergenceResult result = run_convergence(cfg);

    REQUIRE(result.levels.size() == 3);
    CHECK(result.levels[0].n == 2);
    CHECK(result.levels[1].n == 4);
    CHECK(result.levels[2].n == 8);
    CHECK(result.levels[0].report.N < result.levels[1].report.N);
    CHECK(result.levels[1].report.N < result.levels[2].report.N);

    std::ifstream csv(cfg.out_csv);
    std::string header;
    REQUIRE(std::getline(csv, header));
    CHECK(header == kCsvHeader);
    int rows = 0;
    std::string line;
    while (std::getline(csv, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 3);

    // jump trace: 16 samples per interface edge on the finest level
    CHECK(result.jump.size() == 16u * 8u);
    std::ifstream jf(cfg.jump_out);
    int jump_rows = 0;
    while (std::getline(jf, line))
        if (!line.empty() && line[0] != '#') ++jump_rows;
    CHECK(jump_rows == 16 * 8);
}

TEST_CASE("identical configurations produce byte-identical output", "[convergence]") {
    const TempDir tmp;
    RunConfig cfg;
    cfg.experiment = 2;
    cfg.levels = 2;
    cfg.base_n = 2;
    cfg.out_csv = tmp / "a.csv";
    cfg.jump_out = tmp / "a_jump.dat";
    run_convergence(cfg);
    RunConfig cfg2 = cfg;
    cfg2.out_csv = tmp / "b.csv";
    cfg2.jump_out = tmp / "b_jump.dat";
    run_convergence(cfg2);
    CHECK(slurp(tmp / "a.csv") == slurp(tmp / "b.csv"));
    CHECK(slurp(tmp / "a_jump.dat") == slurp(tmp / "b_jump.dat"));
}

TEST_CASE("custom zero problem reports undefined rates as empty cells", "[convergence]") {
    const TempDir tmp;
    RunConfig cfg;
    cfg.experiment = 0;
    cfg.custom_problem = std::make_shared<ProblemDef>(testsupport::zero_problem());
    cfg.levels = 2;
    cfg.base_n = 2;
    cfg.out_csv = tmp / "zero.csv";
    cfg.jump_out = tmp / "zero_jump.dat";
    const ConvergenceResult result = run_convergence(cfg);
    CHECK_FALSE(result.rates.front().u1.has_value());
    std::ifstream csv(cfg.out_csv);
    std::string header, row0, row1;
    std::getline(csv, header);
    std::getline(csv, row0);
    std::getline(csv, row1);
    auto count_commas = [](const std::string& s) {
        return std::count(s.begin(), s.end(), ',');
    };
    CHECK(count_commas(header) == 16); // 17 columns
    CHECK(count_commas(row1) == 16);
    // the seven rate cells of the zero-error run are empty
    CHECK(row1.substr(row1.size() - 7) == std::string(7, ','));
}

TEST_CASE("rates are insensitive to raising the quadrature degree", "[convergence]") {
    const TempDir tmp;
    RunConfig cfg;
    cfg.experiment = 1;
    cfg.levels = 3;
    cfg.base_n = 2;
    cfg.out_csv = tmp / "q6.csv";
    cfg.jump_out = tmp / "q6_jump.dat";
    const ConvergenceResult q6 = run_convergence(cfg);
    cfg.quad_degree = 8;
    cfg.out_csv = tmp / "q8.csv";
    cfg.jump_out = tmp / "q8_jump.dat";
    const ConvergenceResult q8 = run_convergence(cfg);
    auto close = [](const std::optional<double>& a, const std::optional<double>& b) {
        return a && b && std::abs(*a - *b) < 0.02;
    };
    const EocRow& r6 = q6.rates.back();
    const EocRow& r8 = q8.rates.back();
    CHECK(close(r6.u1, r8.u1));
    CHECK(close(r6.sigma, r8.sigma));
    CHECK(close(r6.u2, r8.u2));
    CHECK(close(r6.uhat, r8.uhat));
    CHECK(close(r6.sighat, r8.sighat));
    CHECK(close(r6.energy, r8.energy));
}

TEST_CASE("unwritable output paths fail at startup", "[convergence]") {
    RunConfig cfg;
    cfg.out_csv = "/nonexistent-dir/results.csv";
    CHECK_THROWS_AS(run_convergence(cfg), UsageError);
}

TEST_CASE("optional dumps are written at level zero", "[convergence]") {
    const TempDir tmp;
    RunConfig cfg;
    cfg.experiment = 1;
    cfg.levels = 1;
    cfg.base_n = 2;
    cfg.out_csv = tmp / "d.csv";
    cfg.jump_out = tmp / "d_jump.dat";
    cfg.dump_mesh_prefix = tmp / "mesh";
    cfg.dump_matrix_path = tmp / "matrix.txt";
    run_convergence(cfg);
    CHECK(std::filesystem::exists(tmp / "mesh_omega1.txt"));
    CHECK(std::filesystem::exists(tmp / "mesh_omega2.txt"));
    const std::string m = slurp(tmp / "matrix.txt");
    CHECK(m.find("Gamma") == std::string::npos); // coordinate triples only
    CHECK_FALSE(m.empty());
}
