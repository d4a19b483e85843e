#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <tuple>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "qstab/pipeline.hpp"

namespace {

using namespace qstab;
namespace fs = std::filesystem;
namespace pl = qstab::pipeline;
using io::json;

const fs::path kData = QSTAB_DATA_DIR;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qstab_pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(io::read_text(path));
  std::string line;
  while (std::getline(in, line)) rows.push_back(io::split_csv_line(line));
  return rows;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(QSTAB_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void run_all(const pl::PipelineConfig& cfg, const fs::path& out) {
  pl::cmd_simulate(cfg, out);
  pl::cmd_stabilize(cfg, out);
  pl::cmd_learn(cfg, out);
  pl::cmd_classify(cfg, out);
  pl::cmd_metrics(cfg, out);
}

class Pipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    out_ = fresh_dir("shared");
    cfg_ = pl::load_config(kData / "config.json");
    run_all(cfg_, out_);
  }
  static fs::path out_;
  static pl::PipelineConfig cfg_;
};

fs::path Pipeline::out_;
pl::PipelineConfig Pipeline::cfg_;

// --- config -----------------------------------------------------------------

TEST(Config, DefaultsAndResolution) {
  const auto cfg = pl::parse_config(json::parse(R"({"circuit": "c.json"})"), "/base");
  EXPECT_EQ(*cfg.circuit_path, fs::path("/base/c.json"));
  EXPECT_EQ(cfg.run.runs, 10u);
  EXPECT_EQ(cfg.stabilizer.kappa, 2u);
  EXPECT_FALSE(cfg.stabilizer.zeta.has_value());
  EXPECT_EQ(cfg.classes, 3u);
  EXPECT_EQ(cfg.learner_q, 64u);
}

TEST(Config, InvalidValuesAreConfigErrors) {
  for (const char* text : {R"([])", R"({"run": {"R": 2}})", R"({"stabilizer": {"zeta": "fast"}})",
                           R"({"stabilizer": {"zeta": -1}})", R"({"classifier": {"K": 1}})",
                           R"({"classifier": {"nu_mode": "other"}})", R"({"metrics": {"panels": 101}})",
                           R"({"run": {"R": "ten"}})", R"({"figures": {"amplitude_mode": "big"}})"}) {
    try {
      pl::parse_config(json::parse(text));
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::Config) << text;
    }
  }
}

// --- stages -----------------------------------------------------------------

TEST_F(Pipeline, SimulateShapeAndObjective) {
  const auto alpha = io::read_gate_params(out_ / "alpha.csv");
  EXPECT_EQ(alpha.runs(), cfg_.run.runs);
  EXPECT_EQ(alpha.gates(), 6u);
  const auto circuit = pl::load_circuit(cfg_);
  const auto rows = read_csv(out_ / "objective.csv");
  ASSERT_EQ(rows.size(), alpha.runs() + 1);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"r", "objective"}));
  for (std::size_t r = 0; r < alpha.runs(); ++r)
    EXPECT_EQ(std::stod(rows[r + 1][1]), evaluate_objective(circuit, alpha.run(r), StateVector::basis(4)));
}

TEST_F(Pipeline, StabilizeManifestAndBeta) {
  const auto alpha = io::read_gate_params(out_ / "alpha.csv");
  const auto beta = io::read_gate_params(out_ / "beta.csv");
  const json sol = io::read_json(out_ / "solution.json");
  const Matrix s = io::stabilizer_matrix_from_json(sol);
  EXPECT_LE(max_abs_diff(beta.matrix(), s.transpose() * alpha.matrix()), 1e-12);
  EXPECT_LE(max_abs_diff(s.transpose() * s, Matrix::identity(6)), 1e-10);
  for (const char* key : {"F_star", "chi", "tau", "Omega", "eigenvalues", "flags", "objective_gap"})
    EXPECT_TRUE(sol.contains(key)) << key;
  EXPECT_EQ(sol["objective_gap"].size(), alpha.runs());
  EXPECT_TRUE(io::read_gate_params(out_ / "beta_clamped.csv").within_gate_range());
}

TEST_F(Pipeline, LearnerOutputShape) {
  const json j = io::read_json(out_ / "learner.json");
  EXPECT_EQ(j["z"].size(), cfg_.learner_q);
  EXPECT_EQ(j["b"].size(), cfg_.learner_q);
  EXPECT_EQ(j["y_tilde"].size(), cfg_.run.runs);
  EXPECT_EQ(j["delta_y"][0].size(), 5u);
}

TEST_F(Pipeline, ClassifyRowsMatchLibrary) {
  const auto rows = read_csv(out_ / "assignments.csv");
  ASSERT_EQ(rows.size(), cfg_.run.runs + 1);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"r", "p", "q", "xi", "ell"}));
  const auto model = io::class_model_from_json(io::read_json(out_ / "class_model.json"));
  const auto beta = io::read_gate_params(out_ / "beta_clamped.csv");
  for (std::size_t r : {0u, 4u, 9u}) {
    const auto a = classify_sequence(model, beta.run(r));
    EXPECT_EQ(std::stoul(rows[r + 1][0]), r + 1);
    EXPECT_EQ(std::stoul(rows[r + 1][1]), a.p + 1);
    EXPECT_EQ(std::stoul(rows[r + 1][2]), a.q + 1);
    EXPECT_EQ(std::stod(rows[r + 1][3]), a.xi);
    EXPECT_EQ(std::stod(rows[r + 1][4]), a.ell);
  }
}

TEST_F(Pipeline, ClassifyDuplicatedRunsGetIdenticalRows) {
  const fs::path dir = fresh_dir("dup");
  auto beta = io::read_gate_params(out_ / "beta_clamped.csv");
  GateParamMatrix dup(beta.gates(), 4);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t l = 0; l < beta.gates(); ++l) dup(l, r) = beta(l, r < 2 ? 0 : 1);
  io::write_gate_params(dir / "dup.csv", dup);
  pl::cmd_classify(cfg_, dir, dir / "dup.csv");
  const auto rows = read_csv(dir / "assignments.csv");
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(std::vector<std::string>(rows[1].begin() + 1, rows[1].end()),
            std::vector<std::string>(rows[2].begin() + 1, rows[2].end()));
  EXPECT_EQ(std::vector<std::string>(rows[3].begin() + 1, rows[3].end()),
            std::vector<std::string>(rows[4].begin() + 1, rows[4].end()));
}

TEST_F(Pipeline, MetricsReport) {
  const json rep = io::read_json(out_ / "report.json");
  ASSERT_EQ(rep["per_run"].size(), cfg_.run.runs);
  double total = 0.0;
  for (const auto& row : rep["per_run"]) {
    EXPECT_GE(row["f_D"].get<double>(), -1e-12);
    total += row["f_D"].get<double>();
  }
  EXPECT_NEAR(rep["D_total"].get<double>(), total, 1e-12);
  const double numeric = rep["mu_numeric"].get<double>();
  EXPECT_GE(numeric, 0.0);
  EXPECT_LE(numeric, 1.0 + 1e-9);
  EXPECT_NEAR(rep["discrepancy"].get<double>(), std::abs(rep["mu_closed_form"].get<double>() - numeric), 1e-15);
}

TEST_F(Pipeline, EveryStageIsBytewiseDeterministic) {
  const fs::path again = fresh_dir("again");
  run_all(cfg_, again);
  for (const char* name : {"alpha.csv", "objective.csv", "solution.json", "beta.csv", "learner.json",
                           "assignments.csv", "class_model.json", "report.json"})
    EXPECT_EQ(io::read_text(out_ / name), io::read_text(again / name)) << name;
}

TEST(Figures, TablesAndSymmetry) {
  auto cfg = pl::load_config(kData / "config.json");
  cfg.figures.grid_step = 0.05;
  const fs::path dir = fresh_dir("figures");
  const json manifest = pl::cmd_figures(cfg, dir);
  // A.1: δ = 1/N under the √2 amplitude
  for (const auto& row : manifest["a1"]) {
    const double n = row["N"].get<double>();
    EXPECT_NEAR(row["delta"].get<double>(), 1.0 / n, 0.01 / n);
  }
  // A.2: every curve starts at its amplitude X
  const auto curves = read_csv(dir / "fig_a2_curves.csv");
  ASSERT_GT(curves.size(), 2u);
  EXPECT_EQ(std::stod(curves[1][0]), 0.0);
  for (std::size_t i = 0; i < cfg.figures.pairs.size(); ++i) {
    const auto& p = cfg.figures.pairs[i];
    EXPECT_DOUBLE_EQ(std::stod(curves[1][1 + 2 * i]), CosSqModel::make(10.0, p.oscillations, p.c).x);
    EXPECT_DOUBLE_EQ(std::stod(curves[1][2 + 2 * i]), CosSqModel::make(10.0, p.oscillations, p.c_star).x);
  }
  EXPECT_EQ(manifest["a2"].size(), 3u);
  // A.3: μ symmetric under (C, C*) swap, masked cells empty
  std::map<std::tuple<std::string, std::string, std::string>, std::string> grid;
  for (const auto& row : read_csv(dir / "fig_a3_grid.csv")) {
    if (row[0] == "N") continue;
    grid[{row[0], row[1], row[2]}] = row[3];
  }
  for (const auto& [key, value] : grid) {
    const auto& [n, c, cs] = key;
    const std::string& mirrored = grid.at({n, cs, c});
    if (value.empty()) {
      EXPECT_TRUE(mirrored.empty());
      EXPECT_TRUE(std::stod(c) == 0.0 || std::stod(cs) == 0.0);
    } else {
      EXPECT_NEAR(std::stod(value), std::stod(mirrored), 1e-12);
      EXPECT_LE(std::stod(value), 1.0 + 1e-9);
    }
  }
}

// --- command-line tool ------------------------------------------------------

TEST(Cli, ExitCodes) {
  const fs::path dir = fresh_dir("cli");
  const std::string config = (kData / "config.json").string();
  EXPECT_EQ(run_cli("simulate --config " + config + " --out " + dir.string()), 0);
  EXPECT_EQ(run_cli("stabilize --config " + config + " --out " + dir.string()), 0);
  // missing config file, unknown subcommand, malformed config
  EXPECT_EQ(run_cli("simulate --config /nonexistent.json --out " + dir.string()), 1);
  EXPECT_EQ(run_cli("explode --config " + config), 1);
  io::write_text(dir / "bad.json", R"({"classifier": {"K": 0}})");
  EXPECT_EQ(run_cli("classify --config " + (dir / "bad.json").string() + " --out " + dir.string()), 1);
  // numeric failure: every gate parameter identical
  io::write_gate_params(dir / "flat.csv", GateParamMatrix(3, 5, 1.0));
  EXPECT_EQ(run_cli("classify --config " + config + " --out " + dir.string() + " --input " +
                    (dir / "flat.csv").string()),
            2);
  // too few runs for the stabilizer
  io::write_gate_params(dir / "short.csv", GateParamMatrix(Matrix{{0.1, 0.2}, {0.3, 0.1}}));
  EXPECT_EQ(run_cli("stabilize --config " + config + " --out " + dir.string() + " --input " +
                    (dir / "short.csv").string()),
            2);
}

TEST(Cli, SeedOverrideChangesAlpha) {
  const fs::path a = fresh_dir("seed_a");
  const fs::path b = fresh_dir("seed_b");
  const std::string config = (kData / "config.json").string();
  ASSERT_EQ(run_cli("simulate --config " + config + " --out " + a.string() + " --seed 1"), 0);
  ASSERT_EQ(run_cli("simulate --config " + config + " --out " + b.string() + " --seed 2"), 0);
  EXPECT_NE(io::read_text(a / "alpha.csv"), io::read_text(b / "alpha.csv"));
}

}  // namespace
