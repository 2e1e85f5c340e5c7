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

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mpsgan/mpsgan.hpp"

namespace {

using namespace mpsgan;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitIo = 3;

constexpr const char* kOutputDirEnv = "MPSGAN_OUTPUT_DIR";

// Relative output paths resolve under $MPSGAN_OUTPUT_DIR when it is set.
std::string output_path(const std::string& path) {
  const char* dir = std::getenv(kOutputDirEnv);
  if (!dir || !*dir || std::filesystem::path(path).is_absolute()) return path;
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / path).string();
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(output_path(path), std::ios::trunc);
  if (!out) throw std::ios_base::failure("cannot open '" + path + "' for writing");
  out.precision(17);
  return out;
}

template <class T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::stringstream cell(item);
    T v{};
    if (!(cell >> v) || !(cell >> std::ws).eof()) {
      throw ArgumentError(std::string("invalid ") + what + " list '" + text + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ArgumentError(std::string("empty ") + what + " list");
  return out;
}

// Flat key=value config: entries become `--key=value` tokens placed right
// after the subcommand, so flags given on the command line win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      file = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!file) return args;
  std::ifstream in(*file);
  if (!in) throw std::ios_base::failure("cannot open config file '" + *file + "'");
  std::vector<std::string> injected;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(*file + ": line " + std::to_string(lineno) + " is not key=value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw FormatError(*file + ": line " + std::to_string(lineno) + " has an empty key");
    injected.push_back("--" + key + "=" + value);
  }
  const auto sub = std::find_if(args.begin(), args.end(), [](const std::string& a) { return a.rfind('-', 0) != 0; });
  const auto at = sub == args.end() ? args.begin() : sub + 1;
  args.insert(at, injected.begin(), injected.end());
  return args;
}

Dataset read_unit_data(const std::string& path) {
  Dataset ds = read_csv(path);
  check_unit_range(ds);
  return ds;
}

// ---------------------------------------------------------------------------

struct GenDataArgs {
  std::string dataset;
  std::size_t n = 8000;
  double noise = 0.1;
  std::uint64_t seed = 0;
  std::string out;
  std::string iris_path = MPSGAN_DATA_DIR "/iris.csv";
};

int cmd_gen_data(const GenDataArgs& a) {
  RngStream rng(a.seed);
  Dataset ds;
  if (a.dataset == "spiral") {
    ds = gen_spiral(a.n, rng);
  } else if (a.dataset == "moons") {
    ds = gen_moons(a.n, a.noise, rng);
  } else if (a.dataset == "iris") {
    ds = load_iris(a.iris_path);
  } else {
    throw ArgumentError("unknown dataset '" + a.dataset + "'");
  }
  write_csv(ds, output_path(a.out));
  std::cout << "rows=" << ds.size() << " features=" << ds.dim() << " classes=" << ds.classes
            << " raw_range=[" << ds.range_min << ", " << ds.range_max << "]\n";
  return kExitOk;
}

struct TrainArgs {
  std::string data;
  std::string embedding = "fourier";
  std::size_t d = 10;
  std::size_t bond = 4;
  double sigma = 0.1;
  double lr = 0.01;
  std::size_t epochs = 200;
  double weight_decay = 0.0;
  std::size_t batch_size = 128;
  std::string optimizer = "adam";
  double embed_noise = 0.0;
  std::size_t patience = 30;
  std::uint64_t seed = 0;
  std::string out_model;
  std::string history;
};

TrainConfig train_config(const TrainArgs& a) {
  TrainConfig cfg;
  cfg.learning_rate = a.lr;
  cfg.epochs = a.epochs;
  cfg.weight_decay = a.weight_decay;
  cfg.batch_size = a.batch_size;
  cfg.sigma_init = a.sigma;
  cfg.embed_noise = a.embed_noise;
  cfg.early_stop_patience = a.patience;
  cfg.seed = a.seed;
  if (a.optimizer == "adam") {
    cfg.optimizer = OptimizerKind::Adam;
  } else if (a.optimizer == "sgd") {
    cfg.optimizer = OptimizerKind::Sgd;
  } else {
    throw ArgumentError("unknown optimizer '" + a.optimizer + "'");
  }
  return cfg;
}

// Seeded 80/20 stratified split mapped onto the embedding support.
Split support_split(const Dataset& data, const Embedding& e, std::uint64_t seed) {
  RngStream rng = RngStream(seed).derive(0x5b1);
  auto split = stratified_split(data, rng);
  return {to_support(split.train, e), to_support(split.validation, e)};
}

int cmd_train(const TrainArgs& a) {
  const Embedding e(parse_embedding_kind(a.embedding), a.d);
  const TrainConfig cfg = train_config(a);
  const Dataset data = read_unit_data(a.data);
  const Split split = support_split(data, e, a.seed);
  auto model = make_model(split.train, {e.kind(), a.d, a.bond}, a.sigma, a.seed);
  std::optional<std::ofstream> hist;
  if (!a.history.empty()) hist = open_output(a.history);
  const auto result = train_classifier(std::move(model), split.train, split.validation, cfg,
                                       [&](const EpochRecord& r) {
                                         if (!hist) return;
                                         *hist << json{{"epoch", r.epoch},
                                                       {"train_loss", r.train_loss},
                                                       {"val_loss", r.val_loss},
                                                       {"train_accuracy", r.train_accuracy},
                                                       {"val_accuracy", r.val_accuracy},
                                                       {"learning_rate", r.learning_rate}}
                                                      .dump()
                                               << '\n';
                                       });
  save_model(result.model, output_path(a.out_model));
  std::cout << "val_accuracy=" << result.best_val_accuracy << " epochs=" << result.history.size() << '\n';
  return kExitOk;
}

struct TrainGanArgs {
  std::string model;
  std::string data;
  std::size_t epochs = 10;
  std::size_t disc_epochs = 2;
  std::string disc_hidden = "64,64";
  double gen_lr = GanConfig{}.gen_lr;
  double disc_lr = GanConfig{}.disc_lr;
  double retrain_lr = GanConfig{}.retrain_lr;
  std::string acc_floor = "auto";
  std::size_t retrain_budget = 50;
  std::size_t batch_size = 128;
  std::size_t batches_per_epoch = 0;
  std::size_t bins = kDefaultBins;
  std::uint64_t seed = 0;
  std::string out_model;
  std::string history;
};

int cmd_train_gan(const TrainGanArgs& a) {
  MpsEnsemble model = load_model(a.model);
  GanConfig cfg;
  cfg.adversarial_epochs = a.epochs;
  cfg.disc_pretrain_epochs = a.disc_epochs;
  cfg.disc_hidden = parse_list<std::size_t>(a.disc_hidden, "hidden layer");
  cfg.gen_lr = a.gen_lr;
  cfg.disc_lr = a.disc_lr;
  cfg.retrain_lr = a.retrain_lr;
  cfg.retrain_budget = a.retrain_budget;
  cfg.batch_size = a.batch_size;
  cfg.batches_per_epoch = a.batches_per_epoch;
  cfg.bins = a.bins;
  cfg.seed = a.seed;
  if (a.acc_floor != "auto") {
    const double floor = parse_list<double>(a.acc_floor, "accuracy floor").front();
    if (!(floor >= 0.0 && floor <= 1.0)) throw ArgumentError("--acc-floor must be 'auto' or in [0, 1]");
    cfg.accuracy_floor = floor;
  }
  if (!gram_matrix(model.embedding()).generation_capable) {
    throw CapabilityError(std::string("embedding '") + std::string(to_string(model.embedding().kind())) +
                          "' is not generation-capable");
  }
  const Dataset data = read_unit_data(a.data);
  if (data.dim() != model.sites()) throw ArgumentError("data feature count does not match the model");
  const Split split = support_split(data, model.embedding(), a.seed);
  TrainConfig cls;
  cls.seed = a.seed;

  std::optional<std::ofstream> hist;
  if (!a.history.empty()) hist = open_output(a.history);
  auto log = [&](const GanEpochRecord& r) {
    if (!hist) return;
    *hist << json{{"epoch", r.epoch},
                  {"gen_loss", r.gen_loss},
                  {"disc_loss", r.disc_loss},
                  {"val_accuracy", r.val_accuracy},
                  {"retrain_epochs", r.retrain_epochs}}
                 .dump()
          << '\n';
  };
  try {
    const auto result = train_gan(std::move(model), split.train, split.validation, cfg, cls, log);
    save_model(result.model, output_path(a.out_model));
    std::cout << "accuracy_floor=" << result.accuracy_floor << " epochs=" << result.history.size() << '\n';
  } catch (const TrainingFailed& err) {
    save_model(err.checkpoint(), output_path(a.out_model));
    throw;
  }
  return kExitOk;
}

struct SampleArgs {
  std::string model;
  std::size_t cls = 0;
  std::size_t count = 100;
  std::size_t bins = kDefaultBins;
  std::uint64_t seed = 0;
  std::string nu_file;
  std::string out;
};

int cmd_sample(const SampleArgs& a) {
  const MpsEnsemble model = load_model(a.model);
  if (a.cls >= model.classes()) {
    throw ArgumentError("--class " + std::to_string(a.cls) + " out of range (model has " +
                        std::to_string(model.classes()) + " classes)");
  }
  const GramMatrix gram = gram_matrix(model.embedding());
  const Sampler sampler(model, a.cls, gram, a.bins);
  Matrix nu;
  if (!a.nu_file.empty()) {
    nu = read_csv(a.nu_file).features;
    if (nu.cols() != model.sites()) throw ArgumentError("nu file column count does not match the model");
  } else {
    RngStream rng(a.seed);
    nu = Matrix(a.count, model.sites());
    for (double& v : nu.data()) v = rng.uniform();
  }
  Dataset out{Matrix(nu.rows(), model.sites()), std::vector<std::size_t>(nu.rows(), a.cls), model.classes()};
  for (std::size_t i = 0; i < nu.rows(); ++i) {
    const auto x = sampler.sample(nu.row(i));
    std::copy(x.begin(), x.end(), out.features.row(i).begin());
  }
  write_csv(to_unit(std::move(out), model.embedding()), output_path(a.out));
  std::cout << "samples=" << nu.rows() << '\n';
  return kExitOk;
}

struct EvalArgs {
  std::string model;
  std::string data;
  std::string samples;
  std::size_t k = kDefaultOutlierK;
  std::string out_json;
};

int cmd_eval(const EvalArgs& a) {
  const MpsEnsemble model = load_model(a.model);
  const Dataset data = read_unit_data(a.data);
  if (data.dim() != model.sites()) {
    throw ArgumentError("data has " + std::to_string(data.dim()) + " features, model has " +
                        std::to_string(model.sites()) + " sites");
  }
  for (auto l : data.labels)
    if (l >= model.classes()) throw ArgumentError("data label out of range for the model");
  json report{{"accuracy", accuracy(model, to_support(data, model.embedding()))}};
  if (!a.samples.empty()) {
    const Dataset samples = read_unit_data(a.samples);
    if (samples.dim() != data.dim()) throw ArgumentError("samples and data have different dimensions");
    report["k"] = a.k;
    report["fid_like"] = fid_like(data.features, samples.features);
    report["outlier_rate"] = outlier_rate(data.features, samples.features, a.k);
    json per_class = json::array();
    for (std::size_t c = 0; c < std::min(data.classes, samples.classes); ++c) {
      const Matrix real = data.class_points(c);
      const Matrix gen = samples.class_points(c);
      if (real.rows() <= a.k || gen.rows() < 2) continue;
      per_class.push_back(
          {{"class", c}, {"fid_like", fid_like(real, gen)}, {"outlier_rate", outlier_rate(real, gen, a.k)}});
    }
    report["per_class"] = per_class;
  }
  const std::string text = report.dump(2);
  if (!a.out_json.empty()) {
    open_output(a.out_json) << text << '\n';
  }
  std::cout << text << '\n';
  return kExitOk;
}

struct ExperimentArgs {
  std::string kind;
  std::string out_csv;
  std::uint64_t seed = 0;
  // binning
  std::string bins_list = "10,100,1000,10000,100000,1000000,10000000";
  std::size_t reps = 100;
  // bond-dim and robustness
  std::string data;
  std::size_t spiral_n = 8000;
  std::string embedding = "fourier";
  std::size_t d = 10;
  std::size_t bond = 4;
  std::string bonds = "2,4,10,30";
  std::string seeds = "1,2,3";
  std::size_t epochs = 200;
  std::string sigmas = "0,0.05,0.1,0.2,0.5,1";
  std::string mode = "both";
  // latent
  std::string model;
  std::size_t steps = 20;
  std::size_t bins = kDefaultBins;
};

Dataset experiment_data(const ExperimentArgs& a) {
  if (!a.data.empty()) return read_unit_data(a.data);
  RngStream rng(a.seed);
  return gen_spiral(a.spiral_n, rng);
}

int cmd_experiment(const ExperimentArgs& a) {
  if (a.kind == "binning") {
    const auto rows = binning_experiment(parse_list<std::size_t>(a.bins_list, "bins"), a.reps);
    auto out = open_output(a.out_csv);
    out << "bins,x,squared_error,seconds\n";
    for (const auto& r : rows) out << r.bins << ',' << r.x << ',' << r.squared_error << ',' << r.seconds << '\n';
  } else if (a.kind == "bond-dim" || a.kind == "robustness") {
    const Dataset data = experiment_data(a);
    RngStream split_rng = RngStream(a.seed).derive(0x5b1);
    const Split split = stratified_split(data, split_rng);
    const ModelConfig mc{parse_embedding_kind(a.embedding), a.d, a.bond};
    const Embedding validated(mc.embedding, mc.phys);  // rejects bad (kind, d) before training
    static_cast<void>(validated);
    TrainConfig cfg;
    cfg.epochs = a.epochs;
    const auto seeds = parse_list<std::uint64_t>(a.seeds, "seed");
    auto out = open_output(a.out_csv);
    if (a.kind == "bond-dim") {
      const auto rows = bond_dim_sweep(split, parse_list<std::size_t>(a.bonds, "bond"), seeds, mc, cfg);
      out << "bond,seed,val_accuracy\n";
      for (const auto& r : rows) out << r.bond << ',' << r.seed << ',' << r.val_accuracy << '\n';
    } else {
      std::vector<NoiseMode> modes;
      if (a.mode == "eval-noise" || a.mode == "both") modes.push_back(NoiseMode::EvalNoise);
      if (a.mode == "train-noise" || a.mode == "both") modes.push_back(NoiseMode::TrainNoise);
      if (modes.empty()) throw ArgumentError("unknown --mode '" + a.mode + "'");
      const auto rows = robustness_sweep(split, parse_list<double>(a.sigmas, "sigma"), seeds, modes, mc, cfg);
      out << "mode,sigma,seed,accuracy\n";
      for (const auto& r : rows) out << to_string(r.mode) << ',' << r.sigma << ',' << r.seed << ',' << r.accuracy << '\n';
    }
  } else if (a.kind == "latent") {
    if (a.model.empty()) throw ArgumentError("--model is required for the latent experiment");
    const MpsEnsemble model = load_model(a.model);
    RngStream rng(a.seed);
    const auto points = latent_trajectories(model, a.steps, rng, a.bins);
    auto out = open_output(a.out_csv);
    out << "class,step,t";
    for (std::size_t j = 0; j < model.sites(); ++j) out << ",x" << j;
    out << '\n';
    for (const auto& p : points) {
      out << p.cls << ',' << p.step << ',' << p.t;
      for (double x : p.x) out << ',' << model.embedding().to_unit(x);
      out << '\n';
    }
  } else {
    throw ArgumentError("unknown experiment kind '" + a.kind + "'");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MPS ensemble classifier and exact sampler"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  const char* config_help = "Flat key=value file; command-line flags take precedence";
  std::string config_unused;

  GenDataArgs gen;
  auto* s_gen = app.add_subcommand("gen-data", "Generate or export a dataset as CSV");
  s_gen->add_option("--config", config_unused, config_help);
  s_gen->add_option("--dataset", gen.dataset, "spiral | moons | iris")->required();
  s_gen->add_option("--n", gen.n, "Points per arm (spiral) or total points (moons)");
  s_gen->add_option("--noise", gen.noise, "Gaussian noise for moons");
  s_gen->add_option("--seed", gen.seed);
  s_gen->add_option("--iris-path", gen.iris_path, "Bundled Iris CSV");
  s_gen->add_option("--out", gen.out, "Output CSV")->required();

  TrainArgs tr;
  auto* s_train = app.add_subcommand("train", "Train the classifier on cross-entropy");
  s_train->add_option("--config", config_unused, config_help);
  s_train->add_option("--data", tr.data, "CSV with features in [0,1] and a label column")->required();
  s_train->add_option("--embedding", tr.embedding, "sincos | spin-coherent | fourier | legendre");
  s_train->add_option("--d", tr.d, "Physical dimension");
  s_train->add_option("--D", tr.bond, "Bond dimension");
  s_train->add_option("--sigma", tr.sigma, "Initial noise on the identity tensors");
  s_train->add_option("--lr", tr.lr);
  s_train->add_option("--epochs", tr.epochs);
  s_train->add_option("--weight-decay", tr.weight_decay);
  s_train->add_option("--batch-size", tr.batch_size);
  s_train->add_option("--optimizer", tr.optimizer, "adam | sgd");
  s_train->add_option("--embed-noise", tr.embed_noise, "Noise on embedded training inputs");
  s_train->add_option("--patience", tr.patience, "Early-stopping patience in epochs");
  s_train->add_option("--seed", tr.seed);
  s_train->add_option("--out-model", tr.out_model)->required();
  s_train->add_option("--history", tr.history, "JSON-lines history");

  TrainGanArgs gan;
  auto* s_gan = app.add_subcommand("train-gan", "Adversarial refinement of a trained model");
  s_gan->add_option("--config", config_unused, config_help);
  s_gan->add_option("--model", gan.model)->required();
  s_gan->add_option("--data", gan.data)->required();
  s_gan->add_option("--epochs", gan.epochs, "Adversarial epochs");
  s_gan->add_option("--disc-epochs", gan.disc_epochs, "Discriminator pretraining epochs");
  s_gan->add_option("--disc-hidden", gan.disc_hidden, "Comma-separated hidden layer sizes");
  s_gan->add_option("--gen-lr", gan.gen_lr);
  s_gan->add_option("--disc-lr", gan.disc_lr);
  s_gan->add_option("--acc-floor", gan.acc_floor, "auto | value in [0,1]");
  s_gan->add_option("--retrain-lr", gan.retrain_lr, "Learning rate for accuracy-floor retraining");
  s_gan->add_option("--retrain-budget", gan.retrain_budget, "Max retraining epochs per accuracy drop");
  s_gan->add_option("--batch-size", gan.batch_size);
  s_gan->add_option("--batches-per-epoch", gan.batches_per_epoch, "0 = full pass");
  s_gan->add_option("--bins", gan.bins);
  s_gan->add_option("--seed", gan.seed);
  s_gan->add_option("--out-model", gan.out_model)->required();
  s_gan->add_option("--history", gan.history, "JSON-lines history");

  SampleArgs smp;
  auto* s_sample = app.add_subcommand("sample", "Draw exact samples from one class");
  s_sample->add_option("--config", config_unused, config_help);
  s_sample->add_option("--model", smp.model)->required();
  s_sample->add_option("--class", smp.cls)->required();
  auto* count_opt = s_sample->add_option("--count", smp.count);
  s_sample->add_option("--bins", smp.bins);
  auto* seed_opt = s_sample->add_option("--seed", smp.seed);
  auto* nu_opt = s_sample->add_option("--nu-file", smp.nu_file, "CSV of quantile vectors");
  nu_opt->excludes(seed_opt)->excludes(count_opt);
  s_sample->add_option("--out", smp.out)->required();

  EvalArgs ev;
  auto* s_eval = app.add_subcommand("eval", "Accuracy and sample-quality metrics");
  s_eval->add_option("--config", config_unused, config_help);
  s_eval->add_option("--model", ev.model)->required();
  s_eval->add_option("--data", ev.data)->required();
  s_eval->add_option("--samples", ev.samples, "Generated samples CSV");
  s_eval->add_option("--k", ev.k, "Neighbours for the outlier test");
  s_eval->add_option("--out-json", ev.out_json);

  ExperimentArgs ex;
  auto* s_exp = app.add_subcommand("experiment", "Parameter sweeps");
  s_exp->add_option("--config", config_unused, config_help);
  s_exp->add_option("--kind", ex.kind, "binning | bond-dim | robustness | latent")->required();
  s_exp->add_option("--out-csv", ex.out_csv)->required();
  s_exp->add_option("--seed", ex.seed);
  s_exp->add_option("--bins-list", ex.bins_list);
  s_exp->add_option("--reps", ex.reps);
  s_exp->add_option("--data", ex.data, "Dataset CSV (default: generated spiral)");
  s_exp->add_option("--spiral-n", ex.spiral_n);
  s_exp->add_option("--embedding", ex.embedding);
  s_exp->add_option("--d", ex.d);
  s_exp->add_option("--D", ex.bond);
  s_exp->add_option("--bonds", ex.bonds);
  s_exp->add_option("--seeds", ex.seeds);
  s_exp->add_option("--epochs", ex.epochs);
  s_exp->add_option("--sigmas", ex.sigmas);
  s_exp->add_option("--mode", ex.mode, "eval-noise | train-noise | both");
  s_exp->add_option("--model", ex.model);
  s_exp->add_option("--steps", ex.steps);
  s_exp->add_option("--bins", ex.bins);

  try {
    std::vector<std::string> args = expand_config(std::vector<std::string>(argv + 1, argv + argc));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (s_gen->parsed()) return cmd_gen_data(gen);
    if (s_train->parsed()) return cmd_train(tr);
    if (s_gan->parsed()) return cmd_train_gan(gan);
    if (s_sample->parsed()) return cmd_sample(smp);
    if (s_eval->parsed()) return cmd_eval(ev);
    if (s_exp->parsed()) return cmd_experiment(ex);
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const TrainingFailed& e) {
    std::cerr << "error: " << e.what() << " (last good model written)\n";
    return kExitNumerical;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const DegenerateError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
