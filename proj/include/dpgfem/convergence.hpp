#pragma once

#include "dpgfem/assembly.hpp"
#include "dpgfem/dofmap.hpp"
#include "dpgfem/io.hpp"
#include "dpgfem/mesh.hpp"
#include "dpgfem/problem.hpp"
#include "dpgfem/solver_post.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dpgfem {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    int experiment = 1; // 1 or 2; 0 selects `custom_problem` (library use only)
    int levels = 5;
    int base_n = 2;
    double kappa = 1.0;
    CouplingMode coupling = CouplingMode::Weak;
    int quad_degree = 6;
    int edge_points = 4;
    std::string out_csv = "results.csv";
    std::string jump_out = "jump.dat";
    std::string dump_mesh_prefix; // level-0 mesh listing when set
    std::string dump_matrix_path; // level-0 matrix dump when set
    std::shared_ptr<const ProblemDef> custom_problem;
};

namespace detail {

struct ParsedFlags {
    RunConfig values;
    std::string coupling_str = "weak";
    std::string config_path;
    bool has_experiment = false, has_levels = false, has_base_n = false, has_kappa = false,
         has_coupling = false, has_quad = false, has_out = false, has_jump = false,
         has_dump_mesh = false, has_dump_matrix = false;
};

inline void validate_config(const RunConfig& cfg) {
    if (cfg.experiment != 1 && cfg.experiment != 2 && !(cfg.experiment == 0 && cfg.custom_problem))
        throw UsageError("experiment must be 1 or 2");
    if (cfg.levels < 1) throw UsageError("levels must be >= 1");
    if (cfg.base_n < 1) throw UsageError("base-n must be >= 1");
    if (!(cfg.kappa > 0.0)) throw UsageError("kappa must be positive");
    if (cfg.quad_degree < 1 || cfg.quad_degree > 10)
        throw UsageError("quad-degree must be in [1,10]");
}

inline CouplingMode parse_coupling(const std::string& s) {
    if (s == "weak") return CouplingMode::Weak;
    if (s == "strong") return CouplingMode::Strong;
    throw UsageError("coupling must be 'weak' or 'strong' (got '" + s + "')");
}

// plain key=value file, '#' starts a comment; file values lose against flags
inline void apply_config_file(const std::string& path, ParsedFlags& flags) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto to_int = [&](const std::string& v) {
            try {
                std::size_t pos = 0;
                const int out = std::stoi(v, &pos);
                if (pos != v.size()) throw std::invalid_argument(v);
                return out;
            } catch (...) {
                throw UsageError("config key '" + key + "': invalid integer '" + v + "'");
            }
        };
        auto to_double = [&](const std::string& v) {
            try {
                std::size_t pos = 0;
                const double out = std::stod(v, &pos);
                if (pos != v.size()) throw std::invalid_argument(v);
                return out;
            } catch (...) {
                throw UsageError("config key '" + key + "': invalid number '" + v + "'");
            }
        };
        if (key == "experiment") {
            if (!flags.has_experiment) flags.values.experiment = to_int(value);
        } else if (key == "levels") {
            if (!flags.has_levels) flags.values.levels = to_int(value);
        } else if (key == "base-n") {
            if (!flags.has_base_n) flags.values.base_n = to_int(value);
        } else if (key == "kappa") {
            if (!flags.has_kappa) flags.values.kappa = to_double(value);
        } else if (key == "coupling") {
            if (!flags.has_coupling) flags.coupling_str = value;
        } else if (key == "quad-degree") {
            if (!flags.has_quad) flags.values.quad_degree = to_int(value);
        } else if (key == "out") {
            if (!flags.has_out) flags.values.out_csv = value;
        } else if (key == "jump-out") {
            if (!flags.has_jump) flags.values.jump_out = value;
        } else if (key == "dump-mesh") {
            if (!flags.has_dump_mesh) flags.values.dump_mesh_prefix = value;
        } else if (key == "dump-matrix") {
            if (!flags.has_dump_matrix) flags.values.dump_matrix_path = value;
        } else {
            throw UsageError("config key '" + key + "' is not recognized");
        }
    }
}

} // namespace detail

/// Parse `run ...` command-line tokens (without the program name). Flags
/// override config-file values, which override defaults. Returns nullopt when
/// help was requested; throws UsageError on invalid input.
inline std::optional<RunConfig> parse_config(const std::vector<std::string>& args,
                                             std::ostream& help_out = std::cout) {
    detail::ParsedFlags flags;
    CLI::App app{"Coupled DPG-FEM convergence studies"};
    app.require_subcommand(1);
    CLI::App* run = app.add_subcommand("run", "run a convergence study");
    auto* o_exp = run->add_option("--experiment", flags.values.experiment,
                                  "experiment preset (1 or 2)");
    auto* o_lvl = run->add_option("--levels", flags.values.levels,
                                  "number of uniform refinement levels");
    auto* o_bn = run->add_option("--base-n", flags.values.base_n,
                                 "cells per side on the coarsest level");
    auto* o_kap = run->add_option("--kappa", flags.values.kappa,
                                  "scaling of the trial-to-test operator");
    auto* o_cpl = run->add_option("--coupling", flags.coupling_str,
                                  "interface coupling: weak or strong");
    auto* o_qd = run->add_option("--quad-degree", flags.values.quad_degree,
                                 "volume quadrature degree");
    auto* o_out = run->add_option("--out", flags.values.out_csv, "CSV output path");
    auto* o_jmp = run->add_option("--jump-out", flags.values.jump_out,
                                  "interface jump trace output path");
    auto* o_dm = run->add_option("--dump-mesh", flags.values.dump_mesh_prefix,
                                 "write level-0 mesh listings to <prefix>_omega{1,2}.txt");
    auto* o_dx = run->add_option("--dump-matrix", flags.values.dump_matrix_path,
                                 "write the level-0 system matrix in coordinate format");
    run->add_option("--config", flags.config_path, "key=value config file");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        help_out << app.help();
        return std::nullopt;
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    flags.has_experiment = o_exp->count() > 0;
    flags.has_levels = o_lvl->count() > 0;
    flags.has_base_n = o_bn->count() > 0;
    flags.has_kappa = o_kap->count() > 0;
    flags.has_coupling = o_cpl->count() > 0;
    flags.has_quad = o_qd->count() > 0;
    flags.has_out = o_out->count() > 0;
    flags.has_jump = o_jmp->count() > 0;
    flags.has_dump_mesh = o_dm->count() > 0;
    flags.has_dump_matrix = o_dx->count() > 0;

    if (!flags.config_path.empty()) detail::apply_config_file(flags.config_path, flags);
    flags.values.coupling = detail::parse_coupling(flags.coupling_str);
    detail::validate_config(flags.values);
    return flags.values;
}

struct LevelResult {
    int level = 0;
    int n = 0; // cells along the first subdomain's width
    ErrorReport report;
    double seconds = 0.0;
};

struct ConvergenceResult {
    std::vector<LevelResult> levels;
    std::vector<EocRow> rates; // between consecutive levels
    std::vector<JumpSample> jump; // finest level
};

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.11e", v);
    return buf;
}

inline std::string fmt(const std::optional<double>& v) {
    return v ? fmt(*v) : std::string();
}

} // namespace detail

inline constexpr const char* kCsvHeader =
    "level,h,N,err_u1,err_sigma,err_u2,err_uhat,err_sighat,err_energy,jump_L2,"
    "eoc_u1,eoc_sigma,eoc_u2,eoc_uhat,eoc_sighat,eoc_energy,eoc_jump";

/// Run the full refinement study: level l uses n = base_n * 2^l cells along
/// the first subdomain's width (cell counts of both rectangles follow their
/// aspect ratios, so the meshes stay compatible and shape-regular). Writes the
/// CSV table and the finest-level interface jump trace.
inline ConvergenceResult run_convergence(const RunConfig& cfg, std::ostream* log = nullptr) {
    detail::validate_config(cfg);
    const ProblemDef problem = cfg.experiment == 1   ? experiment1()
                               : cfg.experiment == 2 ? experiment2()
                                                     : *cfg.custom_problem;

    std::ofstream csv(cfg.out_csv);
    if (!csv) throw UsageError("cannot open output file '" + cfg.out_csv + "'");
    std::ofstream jump_file(cfg.jump_out);
    if (!jump_file) throw UsageError("cannot open output file '" + cfg.jump_out + "'");
    csv << kCsvHeader << "\n";

    const QuadOptions quad{cfg.quad_degree, cfg.edge_points};
    ConvergenceResult result;
    std::vector<ErrorReport> reports;

    for (int level = 0; level < cfg.levels; ++level) {
        const auto t0 = std::chrono::steady_clock::now();
        const int n = cfg.base_n * (1 << level);
        const double cell = problem.domain1.width() / n;
        auto cells = [cell](double extent) {
            return std::max(1, static_cast<int>(std::lround(extent / cell)));
        };
        const Mesh mesh1 = build_rect_mesh(problem.domain1, n, cells(problem.domain1.height()));
        const Mesh mesh2 = build_rect_mesh(problem.domain2, cells(problem.domain2.width()),
                                           cells(problem.domain2.height()));
        const Skeleton skeleton = extract_skeleton(mesh1);
        const BoundaryTags tags =
            classify_boundary(mesh1, mesh2, problem.domain1, problem.domain2);
        const DofMap dofs = build_dof_map(
            mesh1, skeleton, tags, mesh2, cfg.coupling,
            problem.homogeneous_dirichlet ? ScalarField() : problem.exact.u);
        const SparseSystem system = assemble(mesh1, skeleton, tags, mesh2, dofs, problem,
                                             cfg.kappa, cfg.coupling, quad);

        if (level == 0 && !cfg.dump_mesh_prefix.empty()) {
            std::ofstream m1(cfg.dump_mesh_prefix + "_omega1.txt");
            std::ofstream m2(cfg.dump_mesh_prefix + "_omega2.txt");
            dump_mesh(m1, mesh1, &tags.edge1, &tags.vertex1);
            dump_mesh(m2, mesh2, &tags.edge2, &tags.vertex2);
        }
        if (level == 0 && !cfg.dump_matrix_path.empty()) {
            std::ofstream mx(cfg.dump_matrix_path);
            dump_matrix(mx, system.A);
        }

        SolutionVector sol;
        ErrorReport rep;
        try {
            sol = solve(system);
            rep = compute_errors(sol, problem, mesh1, skeleton, tags, mesh2, dofs, quad,
                                 cfg.kappa);
        } catch (const std::exception& e) {
            throw std::runtime_error("level " + std::to_string(level) + ": " + e.what());
        }
        reports.push_back(rep);

        if (level == cfg.levels - 1)
            result.jump = sample_interface_jump(sol, mesh1, mesh2, tags, 16);

        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.levels.push_back({level, n, rep, seconds});
        if (log) {
            char line[128];
            std::snprintf(line, sizeof(line), "level %d: n=%d N=%d (%.3f s)\n", level, n,
                          rep.N, seconds);
            *log << line;
        }

        csv << level << "," << detail::fmt(rep.h) << "," << rep.N << ","
            << detail::fmt(rep.err_u1) << "," << detail::fmt(rep.err_sigma) << ","
            << detail::fmt(rep.err_u2) << "," << detail::fmt(rep.err_uhat) << ","
            << detail::fmt(rep.err_sighat) << "," << detail::fmt(rep.err_energy) << ","
            << detail::fmt(rep.jump_L2);
        if (level == 0) {
            for (int k = 0; k < 7; ++k) csv << ",";
        } else {
            const EocRow row = eoc({reports[level - 1], reports[level]}).front();
            csv << "," << detail::fmt(row.u1) << "," << detail::fmt(row.sigma) << ","
                << detail::fmt(row.u2) << "," << detail::fmt(row.uhat) << ","
                << detail::fmt(row.sighat) << "," << detail::fmt(row.energy) << ","
                << detail::fmt(row.jump);
        }
        csv << "\n";
        csv.flush();
    }
    if (reports.size() >= 2) result.rates = eoc(reports);

    jump_file << "# interface jump uhat - u2, finest level: arc-length value\n";
    for (const auto& s : result.jump)
        jump_file << detail::fmt(s.s) << " " << detail::fmt(s.value) << "\n";
    return result;
}

} // namespace dpgfem
