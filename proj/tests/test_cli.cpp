#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ackgnn/graph.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kConfigs = ACKGNN_CONFIGS;

fs::path workdir(const std::string& name) {
  auto dir = fs::temp_directory_path() / "ackgnn_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + ACKGNN_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

std::vector<std::vector<double>> csv_rows(const fs::path& p) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    std::getline(cells, cell, ',');  // sweep name
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST(Cli, InferWritesBatchEmbeddings) {
  auto dir = workdir("infer");
  ASSERT_EQ(run("infer --model " + (kConfigs / "gcn.json").string() + " -C 32 --out " + dir.string(), dir / "log"),
            0)
      << slurp(dir / "log");
  auto m = ackgnn::graph::read_matrix(dir / "embeddings.bin");
  EXPECT_EQ(m.rows(), 32u);
  EXPECT_EQ(m.cols(), 256u);
  auto report = load(dir / "report.json");
  EXPECT_EQ(report["embedding_rows"], 32);
  EXPECT_EQ(report["config"]["model"]["model_kind"], "gcn");
  EXPECT_EQ(report["config"]["targets"].size(), 32u);
}

TEST(Cli, InferIsDeterministic) {
  auto a = workdir("det_a");
  auto b = workdir("det_b");
  const std::string base = "infer --model " + (kConfigs / "sage.json").string() + " -C 16 --seed 5 ";
  ASSERT_EQ(run(base + "--threads 3 --out " + a.string(), a / "log"), 0);
  ASSERT_EQ(run(base + "--threads 1 --out " + b.string(), b / "log"), 0);
  EXPECT_EQ(slurp(a / "embeddings.bin"), slurp(b / "embeddings.bin"));
}

TEST(Cli, EdgeListInput) {
  auto dir = workdir("edges");
  std::ofstream(dir / "g.txt") << "# ring\n10 11\n11 12\n12 13\n13 10\n";
  ASSERT_EQ(run("infer --model " + (kConfigs / "sage.json").string() + " --graph " + (dir / "g.txt").string() +
                    " --compact-ids --targets 0,2 --out " + dir.string(),
                dir / "log"),
            0)
      << slurp(dir / "log");
  EXPECT_EQ(ackgnn::graph::read_matrix(dir / "embeddings.bin").rows(), 2u);
  EXPECT_TRUE(fs::exists(dir / "id_map.txt"));
}

TEST(Cli, MissingModelFails) {
  auto dir = workdir("missing");
  EXPECT_NE(run("infer --model " + (dir / "nope.json").string() + " --out " + dir.string(), dir / "log"), 0);
  EXPECT_NE(slurp(dir / "log").find("error"), std::string::npos);
}

TEST(Cli, MalformedGraphFails) {
  auto dir = workdir("badgraph");
  std::ofstream(dir / "g.txt") << "0 1\n1 x\n";
  EXPECT_NE(run("infer --model " + (kConfigs / "sage.json").string() + " --graph " + (dir / "g.txt").string() +
                    " --out " + dir.string(),
                dir / "log"),
            0);
  EXPECT_NE(slurp(dir / "log").find("line 2"), std::string::npos) << slurp(dir / "log");
}

TEST(Cli, DseOnU250) {
  auto dir = workdir("dse");
  ASSERT_EQ(run("dse --platform " + (kConfigs / "u250.json").string() + " --models " +
                    (kConfigs / "gnn_models.json").string() + " --out " + (dir / "accel.json").string(),
                dir / "log"),
            0)
      << slurp(dir / "log");
  auto j = load(dir / "accel.json");
  EXPECT_EQ(j["accelerator"]["p_sys"], 16);
  EXPECT_EQ(j["accelerator"]["num_pes"], 8);
}

TEST(Cli, DseRejectsMalformedPlatform) {
  auto dir = workdir("dse_bad");
  std::ofstream(dir / "p.json") << R"({"name": "broken", "slr_dsp_counts": "lots"})";
  EXPECT_NE(run("dse --platform " + (dir / "p.json").string() + " --models " +
                    (kConfigs / "gnn_models.json").string(),
                dir / "log"),
            0);
}

TEST(Cli, SimulateMatchesInferAndAccounts) {
  auto dir = workdir("simulate");
  ASSERT_EQ(run("dse --platform " + (kConfigs / "u250.json").string() + " --models " +
                    (kConfigs / "gnn_models.json").string() + " --out " + (dir / "accel.json").string(),
                dir / "log"),
            0);
  const std::string common = " --model " + (kConfigs / "gat.json").string() + " -C 16 --seed 3 ";
  ASSERT_EQ(run("simulate" + common + "--accel " + (dir / "accel.json").string() + " --out " + (dir / "sim").string(),
                dir / "log"),
            0)
      << slurp(dir / "log");
  ASSERT_EQ(run("infer" + common + "--out " + (dir / "inf").string(), dir / "log"), 0);
  EXPECT_EQ(slurp(dir / "sim" / "embeddings.bin"), slurp(dir / "inf" / "embeddings.bin"));

  auto r = load(dir / "sim" / "report.json");
  double total = 0;
  for (auto& [k, v] : r["kernel_shares"].items()) total += v.get<double>();
  EXPECT_NEAR(total, 1.0, 1e-6);
  EXPECT_LE(r["max_relative_error_vs_reference"].get<double>(), 1e-5);
  EXPECT_EQ(r["config"]["accelerator"]["num_pes"], 8);
  EXPECT_TRUE(fs::exists(dir / "sim" / "timeline.csv"));
  EXPECT_TRUE(fs::exists(dir / "sim" / "traces.csv"));
}

TEST(Cli, LayerSweepIsMonotone) {
  auto dir = workdir("sweep_layers");
  ASSERT_EQ(run("bench --sweep layers -N 32 -f 64 -C 16 --synth-vertices 600 --threads 4 --out " +
                    (dir / "s.csv").string(),
                dir / "log"),
            0)
      << slurp(dir / "log");
  auto rows = csv_rows(dir / "s.csv");
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GT(rows[i][1], rows[i - 1][1]);
}

TEST(Cli, BatchSweepTurnsLinear) {
  auto dir = workdir("sweep_batch");
  ASSERT_EQ(run("bench --sweep batch -N 32 -f 64 -L 2 --synth-vertices 1000 --threads 4 --out " +
                    (dir / "s.csv").string(),
                dir / "log"),
            0)
      << slurp(dir / "log");
  auto rows = csv_rows(dir / "s.csv");
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GT(rows[i][1], rows[i - 1][1]);
  EXPECT_LT(rows[1][1] / rows[0][1], 2.0);
  EXPECT_NEAR(rows[4][1] / rows[3][1], 2.0, 0.2);
}

TEST(Cli, AnalysisGrid) {
  auto dir = workdir("analysis");
  ASSERT_EQ(run("bench --analysis --out " + (dir / "grid.csv").string(), dir / "log"), 0);
  auto text = slurp(dir / "grid.csv");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 5 * 8 * 3 * 3);
}

TEST(Cli, UnknownSubcommandFails) {
  auto dir = workdir("unknown");
  EXPECT_NE(run("frobnicate", dir / "log"), 0);
  EXPECT_NE(run("", dir / "log"), 0);
}
