#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(HADMEAN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (char ch : s)
        if (ch == '\n') ++n;
    return n;
}

}  // namespace

TEST(Cli, InsulationWritesTableAndManifest) {
    const auto dir = fresh_dir("hadmean_cli_ins");
    ASSERT_EQ(run_cli("insulation --c 0 --levels 1 --out " + dir.string()), 0);
    const std::string csv = slurp(dir / "insulation.csv");
    EXPECT_EQ(count_lines(csv), 2u);  // header + one row
    EXPECT_NE(csv.find("true"), std::string::npos);

    const auto manifest = nlohmann::json::parse(slurp(dir / "run_manifest.json"));
    EXPECT_EQ(manifest["subcommand"], "insulation");
    for (const auto& f : manifest["outputs"])
        EXPECT_TRUE(fs::exists(dir / f.get<std::string>())) << f;
}

TEST(Cli, UsageErrorsExitOne) {
    const auto dir = fresh_dir("hadmean_cli_usage");
    EXPECT_EQ(run_cli("insulation --levels 1 --out " + dir.string()), 1);  // missing --c
    EXPECT_EQ(run_cli("frobnicate"), 1);
    EXPECT_EQ(run_cli("neumann --c -4 --delta -1 --out " + dir.string()), 1);
}

TEST(Cli, ReRunIsByteIdentical) {
    const auto a = fresh_dir("hadmean_cli_rerun_a");
    const auto b = fresh_dir("hadmean_cli_rerun_b");
    const std::string flags = "bisect --k 1 --level 1 --tol 0.25 --out ";
    ASSERT_EQ(run_cli(flags + a.string()), 0);
    ASSERT_EQ(run_cli(flags + b.string()), 0);
    EXPECT_EQ(slurp(a / "bisect.csv"), slurp(b / "bisect.csv"));
    EXPECT_EQ(slurp(a / "bisect_probes.csv"), slurp(b / "bisect_probes.csv"));
}

TEST(Cli, NeumannSingleLayer) {
    const auto dir = fresh_dir("hadmean_cli_neu");
    ASSERT_EQ(run_cli("neumann --c -4 --delta 0 --level 1 --layers 1 --out " + dir.string()), 0);
    const std::string layers = slurp(dir / "layers.csv");
    EXPECT_EQ(layers,
              "layer,x1_lo,x1_hi,energy\n"
              "0,-1,0,1.00000e+00\n");
    EXPECT_TRUE(fs::exists(dir / "mode.vtk"));
    EXPECT_TRUE(fs::exists(dir / "mode.csv"));

    const auto manifest = nlohmann::json::parse(slurp(dir / "run_manifest.json"));
    // numeric flags are echoed post-snapping
    EXPECT_EQ(manifest["domain"]["preset"], "neumann");
    EXPECT_DOUBLE_EQ(manifest["domain"]["parameters"]["delta"].get<double>(), 0.0);
}

TEST(Cli, ExportMeshSnapsAndRecords) {
    const auto dir = fresh_dir("hadmean_cli_mesh");
    ASSERT_EQ(run_cli("export-mesh --preset thin --k 3 --level 1 --out " + dir.string()), 0);
    EXPECT_TRUE(fs::exists(dir / "nodes.csv"));
    EXPECT_TRUE(fs::exists(dir / "triangles.csv"));
    EXPECT_TRUE(fs::exists(dir / "mesh.vtk"));
    const auto manifest = nlohmann::json::parse(slurp(dir / "run_manifest.json"));
    EXPECT_DOUBLE_EQ(manifest["domain"]["parameters"]["delta"].get<double>(), 0.25);
    EXPECT_NEAR(manifest["domain"]["parameters"]["delta_requested"].get<double>(), 1.0 / 6.0,
                1e-15);
}

TEST(Cli, ExportMeshDumpsMatrices) {
    const auto dir = fresh_dir("hadmean_cli_mtx");
    ASSERT_EQ(run_cli("export-mesh --preset half --M 4 --level 1 --dump-matrices --out " +
                      dir.string()),
              0);
    for (const char* f : {"K1.mtx", "K2.mtx", "A.mtx"}) {
        ASSERT_TRUE(fs::exists(dir / f)) << f;
        std::ifstream in(dir / f);
        std::string header;
        std::getline(in, header);
        EXPECT_EQ(header, "%%MatrixMarket matrix coordinate real symmetric");
    }
}
