// End-to-end exercises of the command-line interface in a scratch directory.

#include <gtest/gtest.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "springrod/io/dataset.hpp"
#include "springrod/systems.hpp"
#include "test_util.hpp"

using namespace springrod;
namespace fs = std::filesystem;

namespace {

class CliFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const char* cli = std::getenv("SPRINGROD_CLI");
    ASSERT_NE(cli, nullptr) << "SPRINGROD_CLI must point at the binary";
    cli_ = cli;
    dir_ = fs::temp_directory_path() /
           ("springrod_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
    // write configs the commands below consume
    const SystemSetup ico = make_icosahedron();
    io::save_json_file((dir_ / "ico.json").string(),
                       io::topology_to_json(ico.topology, ico.nominal_states));
    io::save_json_file((dir_ / "ico_params.json").string(),
                       io::params_to_json(icosahedron_true_params()));
    const SystemSetup ctl =
        make_icosahedron(1.04, 1e-3, {0, 0, -9.81}, /*with_controls=*/true);
    io::save_json_file((dir_ / "ctl.json").string(),
                       io::topology_to_json(ctl.topology, ctl.nominal_states));
    io::save_json_file((dir_ / "ctl_params.json").string(),
                       io::params_to_json(icosahedron_true_params(1.04, true)));
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static int run(const std::string& args) {
    const std::string cmd = cli_ + " " + args + " > " +
                            (dir_ / "last_out.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string last_output() {
    std::ifstream in(dir_ / "last_out.txt");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  static std::string cli_;
  static fs::path dir_;
};

std::string CliFixture::cli_;
fs::path CliFixture::dir_;

TEST_F(CliFixture, GenerateIdentifyEvaluatePipeline) {
  ASSERT_EQ(run("generate --config " + (dir_ / "ico.json").string() +
                " --params " + (dir_ / "ico_params.json").string() +
                " --n-traj 4 --n-test 2 --steps 40 --seed 3 --out " +
                (dir_ / "data").string()),
            0)
      << last_output();
  ASSERT_TRUE(fs::exists(dir_ / "data" / "manifest.json"));
  ASSERT_TRUE(fs::exists(dir_ / "data" / "train" / "traj_000003.jsonl"));

  // identify at full fraction
  ASSERT_EQ(run("identify --data " + (dir_ / "data").string() +
                " --fraction 1.0 --seed 7 --report " +
                (dir_ / "report.json").string()),
            0)
      << last_output();
  const sysid::IdentifiedParams id = io::identified_from_json(
      io::load_json_file((dir_ / "report.json").string()));
  const SystemSetup ico = make_icosahedron();
  const auto truth = sysid::composites_to_map(
      ico.topology,
      sysid::composites_from_params(ico.topology, icosahedron_true_params()));
  EXPECT_LE(sysid::max_relative_composite_error(id.composites, truth), 1e-9);

  // identical reruns produce identical bytes
  ASSERT_EQ(run("identify --data " + (dir_ / "data").string() +
                " --fraction 0.5 --seed 9 --report " +
                (dir_ / "r1.json").string()),
            0);
  ASSERT_EQ(run("identify --data " + (dir_ / "data").string() +
                " --fraction 0.5 --seed 9 --report " +
                (dir_ / "r2.json").string()),
            0);
  EXPECT_EQ(slurp(dir_ / "r1.json"), slurp(dir_ / "r2.json"));

  // evaluate the identified report on the test split
  ASSERT_EQ(run("evaluate --data " + (dir_ / "data").string() + " --params " +
                (dir_ / "report.json").string() + " --horizon 10 --out " +
                (dir_ / "eval.csv").string()),
            0)
      << last_output();
  std::ifstream csv(dir_ / "eval.csv");
  std::string header, first;
  std::getline(csv, header);
  EXPECT_EQ(header, "step,mse_p,mse_v,mse_q,mse_w");
  std::getline(csv, first);
  EXPECT_EQ(first.substr(0, 2), "1,");

  // evaluating with the true parameter file gives ~zero error
  ASSERT_EQ(run("evaluate --data " + (dir_ / "data").string() + " --params " +
                (dir_ / "ico_params.json").string() + " --horizon 5 --out " +
                (dir_ / "eval_true.csv").string()),
            0)
      << last_output();
  std::ifstream csv_true(dir_ / "eval_true.csv");
  std::getline(csv_true, header);
  double max_mse = 0.0;
  for (std::string line; std::getline(csv_true, line);) {
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    while (std::getline(row, cell, ','))
      max_mse = std::max(max_mse, std::stod(cell));
  }
  EXPECT_LE(max_mse, 1e-20);

  // sweep over two fractions
  ASSERT_EQ(run("sweep-efficiency --data " + (dir_ / "data").string() +
                " --fractions 1.0,0.5 --seeds 2 --out " +
                (dir_ / "sweep.csv").string()),
            0)
      << last_output();
  std::ifstream sweep(dir_ / "sweep.csv");
  std::getline(sweep, header);
  EXPECT_EQ(header, "fraction,samples,mean_rel_err,std_rel_err");
  int rows = 0;
  for (std::string line; std::getline(sweep, line);) ++rows;
  EXPECT_EQ(rows, 2);
}

TEST_F(CliFixture, SimulateWritesReadableTrajectory) {
  ASSERT_EQ(run("simulate --config " + (dir_ / "ico.json").string() +
                " --params " + (dir_ / "ico_params.json").string() +
                " --steps 25 --out " + (dir_ / "sim.jsonl").string()),
            0)
      << last_output();
  const Trajectory traj = io::read_trajectory(dir_ / "sim.jsonl");
  EXPECT_EQ(traj.states.size(), 26u);
}

TEST_F(CliFixture, FinetuneAndKoopman) {
  ASSERT_EQ(run("generate --config " + (dir_ / "ctl.json").string() +
                " --params " + (dir_ / "ctl_params.json").string() +
                " --n-traj 2 --n-test 1 --steps 200 --seed 5 --perturb "
                "--perturb-mag 1.0 --hold 25 --out " +
                (dir_ / "pdata").string()),
            0)
      << last_output();

  // frozen identification with an anchor so h itself is recoverable
  ASSERT_EQ(run("identify --data " + (dir_ / "pdata").string() +
                " --fraction 1.0 --anchor mass=1.2 --report " +
                (dir_ / "frozen.json").string()),
            0)
      << last_output();
  ASSERT_EQ(run("finetune-control --data " + (dir_ / "pdata").string() +
                " --frozen " + (dir_ / "frozen.json").string() + " --report " +
                (dir_ / "control.json").string()),
            0)
      << last_output();
  const io::json ctl = io::load_json_file((dir_ / "control.json").string());
  ASSERT_TRUE(ctl.contains("h"));
  EXPECT_NEAR(ctl["h"][0].get<double>(), 2.5, 1e-5);

  ASSERT_EQ(run("koopman --data " + (dir_ / "pdata").string() +
                " --degree 1 --fraction 1.0 --report " +
                (dir_ / "koopman.json").string()),
            0)
      << last_output();
  const io::json ko = io::load_json_file((dir_ / "koopman.json").string());
  EXPECT_TRUE(ko.contains("one_step_test_mse"));
}

TEST_F(CliFixture, UsageErrors) {
  EXPECT_NE(run("identify --data /nonexistent --fraction 0 --report x.json"),
            0);  // fraction out of range
  EXPECT_NE(run("identify --data /nonexistent --fraction 0.5 --report " +
                (dir_ / "x.json").string()),
            0);  // missing dataset
  EXPECT_NE(run("frobnicate"), 0);  // unknown subcommand
  EXPECT_NE(run(""), 0);            // subcommand required
}

}  // namespace
