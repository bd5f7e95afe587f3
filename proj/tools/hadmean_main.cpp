// Command-line front end: insulation level sweeps, critical-coefficient
// bisection, mixed-boundary eigenmodes, and mesh export, each with a JSON
// run manifest. Exit codes: 0 ok, 1 usage error, 2 numerical failure.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hadmean/hadmean.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string iso_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

std::string join_args(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

json solver_settings_json(const hadmean::MinEigOptions& opt) {
    return {{"tol", opt.tol},
            {"dense_cutoff", opt.dense_cutoff},
            {"lanczos_block", opt.lanczos_block},
            {"max_restarts", opt.max_restarts}};
}

void write_manifest(const fs::path& dir, json manifest, std::vector<std::string> outputs) {
    manifest["outputs"] = outputs;
    manifest["timestamp"] = iso_timestamp();
    std::ofstream out(dir / "run_manifest.json", std::ios::binary);
    out << manifest.dump(2) << "\n";
}

int run_insulation(const std::string& cmdline, double c, int levels, const fs::path& dir) {
    const hadmean::MinEigOptions opt;
    const auto rows = hadmean::run_insulation_sweep(c, levels, opt);
    hadmean::write_sweep_csv(rows, (dir / "insulation.csv").string());

    const auto dom = hadmean::build_preset("canonical", {{"c", c}});
    const auto mesh = hadmean::triangulate(dom, levels);
    json manifest = {{"command_line", cmdline},
                     {"subcommand", "insulation"},
                     {"domain", hadmean::to_json(mesh.domain)},
                     {"levels", levels},
                     {"mesh_stats_finest", hadmean::mesh_stats_json(mesh)},
                     {"solver", solver_settings_json(opt)}};
    write_manifest(dir, manifest, {"insulation.csv"});

    for (const auto& r : rows)
        if (!r.converged) return 2;
    return 0;
}

int run_bisect(const std::string& cmdline, const std::vector<int>& ks, int level, double tol,
               const fs::path& dir) {
    const hadmean::MinEigOptions opt;
    std::vector<hadmean::BisectionTrace> traces;
    for (int k : ks) traces.push_back(hadmean::bisect_critical_M(k, level, tol, opt));
    hadmean::write_bisect_csv(traces, (dir / "bisect.csv").string());
    hadmean::write_bisect_probes_csv(traces, (dir / "bisect_probes.csv").string());

    json per_k = json::array();
    for (const auto& t : traces)
        per_k.push_back({{"k", t.k},
                         {"delta_snapped", t.delta},
                         {"M_num", t.M_num},
                         {"bracket", {t.bracket_lo, t.bracket_hi}},
                         {"probes", t.probes.size()}});
    json manifest = {{"command_line", cmdline}, {"subcommand", "bisect"},  {"level", level},
                     {"tol_M", tol},           {"runs", per_k},           {"solver", solver_settings_json(opt)}};
    write_manifest(dir, manifest, {"bisect.csv", "bisect_probes.csv"});
    return 0;
}

int run_neumann_cmd(const std::string& cmdline, double c, double delta, int level, int layers,
                    const fs::path& dir) {
    const hadmean::MinEigOptions opt;
    const auto res = hadmean::run_neumann(c, delta, level, layers, opt);

    hadmean::write_mode_csv(res.mesh, res.mode, (dir / "mode.csv").string());
    hadmean::write_layers_csv(res.layers, (dir / "layers.csv").string());
    hadmean::VtkFields fields;
    fields.point_vectors = &res.mode;
    fields.cell_scalars = {{"det_grad_phi", &res.det_field},
                           {"grad_phi_sq", &res.grad_sq_field}};
    hadmean::write_vtk(res.mesh, (dir / "mode.vtk").string(), fields);

    json manifest = {{"command_line", cmdline},
                     {"subcommand", "neumann"},
                     {"domain", hadmean::to_json(res.mesh.domain)},
                     {"mesh_stats", hadmean::mesh_stats_json(res.mesh)},
                     {"n_layers", layers},
                     {"lambda_min", res.eig.lambda_min},
                     {"residual", res.eig.residual},
                     {"eig_method", res.eig.method},
                     {"solver", solver_settings_json(opt)}};
    write_manifest(dir, manifest, {"mode.csv", "layers.csv", "mode.vtk"});
    return res.eig.converged ? 0 : 2;
}

int run_export_mesh(const std::string& cmdline, const std::string& preset,
                    const hadmean::ParamMap& params, int level, bool dump_matrices,
                    const fs::path& dir) {
    const auto dom = hadmean::build_preset(preset, params);
    const auto mesh = hadmean::triangulate(dom, level);
    hadmean::write_nodes_csv(mesh, (dir / "nodes.csv").string());
    hadmean::write_triangles_csv(mesh, (dir / "triangles.csv").string());
    hadmean::write_vtk(mesh, (dir / "mesh.vtk").string());

    std::vector<std::string> outputs = {"nodes.csv", "triangles.csv", "mesh.vtk"};
    if (dump_matrices) {
        const auto ops = hadmean::assemble(mesh, dom);
        hadmean::write_matrix_market(ops.K1, (dir / "K1.mtx").string());
        hadmean::write_matrix_market(ops.K2, (dir / "K2.mtx").string());
        hadmean::write_matrix_market(ops.A, (dir / "A.mtx").string());
        outputs.insert(outputs.end(), {"K1.mtx", "K2.mtx", "A.mtx"});
    }

    json manifest = {{"command_line", cmdline},
                     {"subcommand", "export-mesh"},
                     {"domain", hadmean::to_json(mesh.domain)},
                     {"mesh_stats", hadmean::mesh_stats_json(mesh)}};
    write_manifest(dir, manifest, outputs);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonnegativity certification for |grad phi|^2 + f det(grad phi) functionals"};
    app.require_subcommand(1);
    const std::string cmdline = join_args(argc, argv);

    double c = 4.0, delta = 1.0, tol = 1e-3;
    int levels = 5, level = 4, layers = 64;
    std::string out_dir = ".", preset = "canonical";
    std::vector<int> ks;
    double M = 4.0, k_param = 1.0;

    auto* ins = app.add_subcommand("insulation", "Minimal-eigenvalue sweep over refinement levels");
    ins->add_option("--c", c, "insulation coefficient")->required();
    ins->add_option("--levels", levels, "number of refinement levels")->check(CLI::PositiveNumber);
    ins->add_option("--out", out_dir, "output directory")->required();

    auto* bis = app.add_subcommand("bisect", "Critical-coefficient bisection on the thin preset");
    bis->add_option("--k", ks, "insulation width parameters (delta = 1/2k)")
        ->required()
        ->check(CLI::PositiveNumber);
    bis->add_option("--level", level, "mesh refinement level")->check(CLI::PositiveNumber);
    bis->add_option("--tol", tol, "bracket width tolerance")->check(CLI::PositiveNumber);
    bis->add_option("--out", out_dir, "output directory")->required();

    auto* neu = app.add_subcommand("neumann", "Mixed Dirichlet/Neumann eigenmode and layer energies");
    neu->add_option("--c", c, "weight on the left region")->required();
    neu->add_option("--delta", delta, "width of the zero strip (>= 0)")
        ->check(CLI::NonNegativeNumber);
    neu->add_option("--level", level, "mesh refinement level")->check(CLI::PositiveNumber);
    neu->add_option("--layers", layers, "number of x1-layers")->check(CLI::PositiveNumber);
    neu->add_option("--out", out_dir, "output directory")->required();

    bool dump_matrices = false;
    auto* exp = app.add_subcommand("export-mesh", "Write mesh as CSV pair and legacy VTK");
    exp->add_option("--preset", preset, "canonical|half|thin|neumann")->required();
    exp->add_option("--level", level, "mesh refinement level")->check(CLI::PositiveNumber);
    exp->add_option("--c", c, "coefficient (canonical/neumann)");
    exp->add_option("--M", M, "coefficient (half/thin)");
    exp->add_option("--k", k_param, "thin preset width parameter");
    exp->add_option("--delta", delta, "strip width (thin/neumann)");
    exp->add_flag("--dump-matrices", dump_matrices,
                  "also write K1/K2/A in MatrixMarket symmetric format");
    exp->add_option("--out", out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        const fs::path dir(out_dir);
        fs::create_directories(dir);
        if (ins->parsed()) return run_insulation(cmdline, c, levels, dir);
        if (bis->parsed()) return run_bisect(cmdline, ks, level, tol, dir);
        if (neu->parsed()) return run_neumann_cmd(cmdline, c, delta, level, layers, dir);
        if (exp->parsed()) {
            hadmean::ParamMap params;
            if (preset == "canonical") params = {{"c", c}};
            else if (preset == "half") params = {{"M", M}};
            else if (preset == "thin")
                params = exp->count("--delta") ? hadmean::ParamMap{{"delta", delta}, {"M", M}}
                                               : hadmean::ParamMap{{"k", k_param}, {"M", M}};
            else params = {{"c", c}, {"delta", delta}};
            return run_export_mesh(cmdline, preset, params, level, dump_matrices, dir);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
