// Copyright 2026 The mpsgan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include "json.hpp"
#include <sstream>
#include <string>
#include <vector>

#include "mpsgan/data.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("mpsgan_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Runs the binary with `args`; returns its exit code.
  int run(const std::string& args, const std::string& env = "") const {
    const std::string cmd = env + (env.empty() ? "" : " ") + "'" + MPSGAN_CLI_PATH + "' " + args + " > '" +
                            path("stdout.txt") + "' 2> '" + path("stderr.txt") + "'";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string stderr_text() const { return read(path("stderr.txt")); }

  static std::string read(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static std::size_t line_count(const std::string& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) ++n;
    return n;
  }

  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  // Small moons data set plus a briefly trained Fourier model.
  void trained_moons(const std::string& model = "moons.mps") {
    ASSERT_EQ(run("gen-data --dataset moons --n 300 --seed 3 --out " + path("moons.csv")), 0);
    ASSERT_EQ(run("train --data " + path("moons.csv") + " --d 6 --D 3 --epochs 40 --seed 1 --out-model " +
                  path(model)),
              0)
        << stderr_text();
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenDataSpiralRowCount) {
  ASSERT_EQ(run("gen-data --dataset spiral --n 8000 --seed 1 --out " + path("spiral.csv")), 0);
  EXPECT_EQ(line_count(path("spiral.csv")), 16001u);
  const auto ds = mpsgan::read_csv(path("spiral.csv"));
  EXPECT_EQ(ds.size(), 16000u);
  EXPECT_EQ(ds.classes, 2u);
}

TEST_F(Cli, GenDataIris) {
  ASSERT_EQ(run("gen-data --dataset iris --out " + path("iris.csv")), 0);
  EXPECT_EQ(line_count(path("iris.csv")), 151u);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("gen-data --dataset spiral"), 1);
  EXPECT_EQ(run("gen-data --dataset circles --out " + path("x.csv")), 1);
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("experiment --kind nope --out-csv " + path("x.csv")), 1);
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, SinCosWithWrongDimensionFailsBeforeTraining) {
  ASSERT_EQ(run("gen-data --dataset moons --n 50 --out " + path("m.csv")), 0);
  EXPECT_EQ(run("train --data " + path("m.csv") + " --embedding sincos --d 5 --out-model " + path("m.mps")), 1);
  EXPECT_FALSE(fs::exists(path("m.mps")));
}

TEST_F(Cli, IoErrors) {
  EXPECT_EQ(run("train --data " + path("missing.csv") + " --out-model " + path("m.mps")), 3);
  write("bad.csv", "x0,x1,label\n0.1,zz,0\n");
  EXPECT_EQ(run("train --data " + path("bad.csv") + " --out-model " + path("m.mps")), 3);
  EXPECT_NE(stderr_text().find("row 1"), std::string::npos);
  EXPECT_EQ(run("gen-data --dataset moons --n 10 --out /nonexistent-dir/x.csv"), 3);
}

TEST_F(Cli, OutOfRangeFeaturesRejected) {
  write("wide.csv", "x0,x1,label\n0.1,1.5,0\n0.2,0.3,1\n");
  EXPECT_EQ(run("train --data " + path("wide.csv") + " --out-model " + path("m.mps")), 1);
}

TEST_F(Cli, SeedDeterminism) {
  for (const char* name : {"a", "b"}) {
    ASSERT_EQ(run(std::string("gen-data --dataset moons --n 200 --seed 9 --out ") + path(std::string(name) + ".csv")), 0);
  }
  EXPECT_EQ(read(path("a.csv")), read(path("b.csv")));
  trained_moons("m1.mps");
  trained_moons("m2.mps");
  EXPECT_EQ(read(path("m1.mps")), read(path("m2.mps")));
  for (const char* name : {"s1", "s2"}) {
    ASSERT_EQ(run("sample --model " + path("m1.mps") + " --class 1 --count 50 --bins 200 --seed 4 --out " +
                  path(std::string(name) + ".csv")),
              0);
  }
  EXPECT_EQ(read(path("s1.csv")), read(path("s2.csv")));
  EXPECT_EQ(line_count(path("s1.csv")), 51u);
}

TEST_F(Cli, UniformModelSamplesEqualQuantiles) {
  write("flat.csv", "x0,x1,x2,label\n0.1,0.2,0.3,0\n0.4,0.5,0.6,1\n0.7,0.8,0.9,0\n0.3,0.2,0.1,1\n"
                    "0.5,0.5,0.5,0\n0.6,0.6,0.6,1\n");
  ASSERT_EQ(run("train --data " + path("flat.csv") + " --d 1 --D 2 --sigma 0 --epochs 0 --out-model " +
                path("u.mps")),
            0)
      << stderr_text();
  write("nu.csv", "n0,n1,n2\n0.25,0.5,0.75\n0.1,0.9,0.33\n");
  ASSERT_EQ(run("sample --model " + path("u.mps") + " --class 0 --nu-file " + path("nu.csv") + " --out " +
                path("s.csv")),
            0)
      << stderr_text();
  const auto s = mpsgan::read_csv(path("s.csv"));
  const std::vector<double> nu{0.25, 0.5, 0.75, 0.1, 0.9, 0.33};
  ASSERT_EQ(s.size(), 2u);
  for (std::size_t k = 0; k < nu.size(); ++k) EXPECT_NEAR(s.features.data()[k], nu[k], 1e-12);
  EXPECT_EQ(run("sample --model " + path("u.mps") + " --class 2 --count 3 --out " + path("s.csv")), 1);
  EXPECT_EQ(run("sample --model " + path("u.mps") + " --class 0 --seed 2 --nu-file " + path("nu.csv") +
                " --out " + path("s.csv")),
            1);
}

TEST_F(Cli, EvalWithTrainingSetAsSamples) {
  trained_moons();
  ASSERT_EQ(run("eval --model " + path("moons.mps") + " --data " + path("moons.csv") + " --samples " +
                path("moons.csv") + " --out-json " + path("r.json")),
            0)
      << stderr_text();
  const auto r = json::parse(read(path("r.json")));
  EXPECT_GT(r["accuracy"].get<double>(), 0.9);
  EXPECT_NEAR(r["fid_like"].get<double>(), 0.0, 1e-10);
  EXPECT_EQ(r["outlier_rate"].get<double>(), 0.0);
  EXPECT_EQ(r["per_class"].size(), 2u);

  ASSERT_EQ(run("eval --model " + path("moons.mps") + " --data " + path("moons.csv") + " --out-json " +
                path("a.json")),
            0);
  const auto a = json::parse(read(path("a.json")));
  EXPECT_TRUE(a.contains("accuracy"));
  EXPECT_FALSE(a.contains("fid_like"));
  EXPECT_FALSE(a.contains("outlier_rate"));

  ASSERT_EQ(run("gen-data --dataset iris --out " + path("iris.csv")), 0);
  EXPECT_EQ(run("eval --model " + path("moons.mps") + " --data " + path("iris.csv")), 1);
}

TEST_F(Cli, TrainWritesHistory) {
  ASSERT_EQ(run("gen-data --dataset moons --n 200 --seed 3 --out " + path("m.csv")), 0);
  ASSERT_EQ(run("train --data " + path("m.csv") + " --embedding legendre --d 4 --D 2 --epochs 3 --patience 0 "
                "--out-model " + path("m.mps") + " --history " + path("h.jsonl")),
            0);
  std::ifstream in(path("h.jsonl"));
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    const auto rec = json::parse(line);
    EXPECT_EQ(rec["epoch"].get<std::size_t>(), ++n);
    for (const char* key : {"train_loss", "val_loss", "train_accuracy", "val_accuracy", "learning_rate"})
      EXPECT_TRUE(rec.contains(key)) << key;
  }
  EXPECT_EQ(n, 3u);
}

TEST_F(Cli, GanZeroEpochsCopiesModel) {
  trained_moons();
  ASSERT_EQ(run("train-gan --model " + path("moons.mps") + " --data " + path("moons.csv") +
                " --epochs 0 --out-model " + path("g.mps")),
            0)
      << stderr_text();
  EXPECT_EQ(read(path("g.mps")), read(path("moons.mps")));
}

TEST_F(Cli, GanShortRunKeepsFloor) {
  trained_moons();
  ASSERT_EQ(run("train-gan --model " + path("moons.mps") + " --data " + path("moons.csv") +
                " --epochs 2 --disc-epochs 1 --batches-per-epoch 1 --batch-size 32 --bins 200 --seed 2"
                " --disc-hidden 16,16 --out-model " + path("g.mps") + " --history " + path("g.jsonl")),
            0)
      << stderr_text();
  EXPECT_EQ(line_count(path("g.jsonl")), 2u);
  EXPECT_NE(read(path("g.mps")), read(path("moons.mps")));
  EXPECT_EQ(run("train-gan --model " + path("moons.mps") + " --data " + path("moons.csv") +
                " --acc-floor 1.5 --out-model " + path("g.mps")),
            1);
}

TEST_F(Cli, GanRefusesSpinCoherent) {
  ASSERT_EQ(run("gen-data --dataset moons --n 100 --out " + path("m.csv")), 0);
  ASSERT_EQ(run("train --data " + path("m.csv") + " --embedding spin-coherent --d 3 --D 2 --epochs 1 --out-model " +
                path("s.mps")),
            0);
  EXPECT_EQ(run("train-gan --model " + path("s.mps") + " --data " + path("m.csv") + " --out-model " +
                path("g.mps")),
            1);
  EXPECT_NE(stderr_text().find("generation-capable"), std::string::npos);
  EXPECT_EQ(run("sample --model " + path("s.mps") + " --class 0 --out " + path("x.csv")), 1);
}

TEST_F(Cli, BinningExperimentBand) {
  ASSERT_EQ(run("experiment --kind binning --bins-list 10,1000 --reps 3 --out-csv " + path("b.csv")), 0);
  std::ifstream in(path("b.csv"));
  std::string header, row10, row1000;
  std::getline(in, header);
  std::getline(in, row10);
  std::getline(in, row1000);
  EXPECT_EQ(header, "bins,x,squared_error,seconds");
  std::stringstream ss(row1000);
  std::string bins, x, err;
  std::getline(ss, bins, ',');
  std::getline(ss, x, ',');
  std::getline(ss, err, ',');
  EXPECT_EQ(bins, "1000");
  EXPECT_GE(std::stod(err), 2.5e-8);
  EXPECT_LE(std::stod(err), 2.5e-6);
}

TEST_F(Cli, RobustnessAtZeroSigmaMatchesCleanAccuracy) {
  const std::string common = " --spiral-n 150 --d 4 --D 2 --epochs 5 --seeds 1 --seed 7";
  ASSERT_EQ(run("experiment --kind robustness --mode eval-noise --sigmas 0" + common + " --out-csv " + path("r.csv")),
            0)
      << stderr_text();
  ASSERT_EQ(run("experiment --kind bond-dim --bonds 2" + common + " --out-csv " + path("b.csv")), 0);
  EXPECT_EQ(line_count(path("r.csv")), 2u);
  std::ifstream r(path("r.csv")), b(path("b.csv"));
  std::string line;
  std::getline(r, line);
  std::getline(r, line);
  const std::string r_acc = line.substr(line.rfind(',') + 1);
  std::getline(b, line);
  std::getline(b, line);
  EXPECT_EQ(r_acc, line.substr(line.rfind(',') + 1));
}

TEST_F(Cli, LatentExperiment) {
  trained_moons();
  ASSERT_EQ(run("experiment --kind latent --model " + path("moons.mps") + " --steps 5 --bins 200 --seed 1 "
                "--out-csv " + path("l.csv")),
            0)
      << stderr_text();
  EXPECT_EQ(line_count(path("l.csv")), 11u);
}

TEST_F(Cli, ConfigFileAndPrecedence) {
  write("cfg.ini", "# defaults\ndataset = moons\nn = 40\nseed = 5\n");
  ASSERT_EQ(run("gen-data --config " + path("cfg.ini") + " --out " + path("a.csv")), 0) << stderr_text();
  EXPECT_EQ(line_count(path("a.csv")), 41u);
  ASSERT_EQ(run("gen-data --config " + path("cfg.ini") + " --n 60 --out " + path("b.csv")), 0);
  EXPECT_EQ(line_count(path("b.csv")), 61u);
  write("broken.ini", "dataset moons\n");
  EXPECT_NE(run("gen-data --config " + path("broken.ini") + " --out " + path("c.csv")), 0);
}

TEST_F(Cli, OutputDirectoryFromEnvironment) {
  const std::string env = "MPSGAN_OUTPUT_DIR='" + path("outdir") + "'";
  ASSERT_EQ(run("gen-data --dataset moons --n 20 --out rel.csv", env), 0) << stderr_text();
  EXPECT_TRUE(fs::exists(path("outdir/rel.csv")));
  ASSERT_EQ(run("gen-data --dataset moons --n 20 --out " + path("abs.csv"), env), 0);
  EXPECT_TRUE(fs::exists(path("abs.csv")));
}
