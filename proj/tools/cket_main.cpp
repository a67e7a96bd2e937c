// Command-line harness: single tests, type I calibration, the (p, lambda)
// grid and consistency curves. Every subcommand writes CSV to stdout or to
// --out.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cket/cket.hpp"

namespace {

struct CommonOptions {
  std::size_t n = 50;
  std::size_t m = 40;
  std::optional<std::size_t> q;
  std::size_t p_lo = 1;
  std::string estimator = "pet";
  double sigma = 0.5;
  std::optional<double> lambda;
  std::optional<std::size_t> k;
  double cand_p = 0.5;
  double cand_lambda = 1.0;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--n", o.n, "sample size")->capture_default_str();
  cmd->add_option("--m", o.m, "number of datasets including the original")->capture_default_str();
  cmd->add_option("--q", o.q, "upper acceptance bound q (default m - 2)");
  cmd->add_option("--p-lo", o.p_lo, "lower acceptance bound p")->capture_default_str();
  cmd->add_option("--estimator", o.estimator, "vvkt or pet")
      ->check(CLI::IsMember({"vvkt", "pet"}))
      ->capture_default_str();
  cmd->add_option("--sigma", o.sigma, "Gaussian kernel bandwidth (vvkt)")->capture_default_str();
  cmd->add_option("--lambda", o.lambda, "regularization (vvkt, default n^-1/4)");
  cmd->add_option("--k", o.k, "kNN neighbours (pet, default floor(sqrt(n)))");
  cmd->add_option("--cand-p", o.cand_p, "candidate mixture weight p")->capture_default_str();
  cmd->add_option("--cand-lambda", o.cand_lambda, "candidate scale lambda")->capture_default_str();
  cmd->add_option("--seed", o.seed, "master seed")->capture_default_str();
  cmd->add_option("--threads", o.threads, "worker threads (0 = all cores); output is identical")
      ->capture_default_str();
  cmd->add_option("--out", o.out, "write CSV here instead of stdout");
}

cket::TestConfig make_config(const CommonOptions& o) {
  cket::TestConfig cfg;
  cfg.m = o.m;
  cfg.p_lo = o.p_lo;
  cfg.q_hi = o.q.value_or(o.m >= 3 ? o.m - 2 : 1);
  cfg.estimator = cket::parse_estimator(o.estimator);
  cfg.kernel.sigma = o.sigma;
  cfg.lambda = o.lambda;
  cfg.k_neighbors = o.k;
  cfg.seed = o.seed;
  cfg.validate();
  return cfg;
}

std::pair<double, double> parse_range(const std::string& text, const char* what) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw cket::ConfigError(std::string(what) + " must be given as lo:hi");
  }
  try {
    return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw cket::ConfigError(std::string(what) + " is not a numeric range: " + text);
  }
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> sizes;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v <= 0) throw std::invalid_argument(item);
      sizes.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw cket::ConfigError("--sizes expects positive integers separated by commas, got '" +
                              text + "'");
    }
  }
  if (sizes.empty()) throw cket::ConfigError("--sizes is empty");
  return sizes;
}

void emit(const std::string& path, const std::string& csv) {
  if (path.empty()) {
    std::cout << csv;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + path + " for writing");
  file << csv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distribution-free kernel mean embedding tests for binary classification"};
  app.require_subcommand(1);

  CommonOptions test_opts;
  auto* test_cmd = app.add_subcommand("test", "run one test on a dataset drawn from the model");
  add_common(test_cmd, test_opts);

  CommonOptions cal_opts;
  std::size_t trials = 1000;
  auto* cal_cmd = app.add_subcommand("calibrate", "Monte Carlo type I error calibration under H0");
  add_common(cal_cmd, cal_opts);
  cal_cmd->add_option("--trials", trials, "number of H0 trials")->capture_default_str();

  CommonOptions grid_opts;
  std::string grid_p = "0.2:0.8";
  std::string grid_lambda = "0.5:1.5";
  double step = 0.01;
  bool shared_data = true;
  auto* grid_cmd = app.add_subcommand("grid", "rank statistic over a (p, lambda) candidate grid");
  add_common(grid_cmd, grid_opts);
  grid_cmd->add_option("--grid-p", grid_p, "p range lo:hi")->capture_default_str();
  grid_cmd->add_option("--grid-lambda", grid_lambda, "lambda range lo:hi")->capture_default_str();
  grid_cmd->add_option("--step", step, "grid step")->capture_default_str();
  grid_cmd->add_flag("--shared-data,!--fresh-data", shared_data,
                     "reuse one dataset for every cell (default) or draw one per cell");

  CommonOptions con_opts;
  std::string sizes = "50,100,200,400";
  std::size_t repeats = 20;
  auto* con_cmd =
      app.add_subcommand("consistency", "mean rank of a candidate across sample sizes");
  con_opts.cand_p = 0.3;
  con_opts.cand_lambda = 1.3;
  add_common(con_cmd, con_opts);
  con_cmd->add_option("--sizes", sizes, "comma-separated sample sizes")->capture_default_str();
  con_cmd->add_option("--repeats", repeats, "datasets per sample size")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const cket::MixtureParams truth{};
    std::ostringstream csv;
    if (*test_cmd) {
      const auto cfg = make_config(test_opts);
      if (test_opts.n == 0) throw cket::ConfigError("--n must be at least 1");
      const auto outcome =
          cket::single_test(cfg, truth, cket::candidate_params(test_opts.cand_p, test_opts.cand_lambda),
                            test_opts.n, cfg.seed);
      cket::write_test_csv(csv, cfg, outcome);
      emit(test_opts.out, csv.str());
    } else if (*cal_cmd) {
      const auto cfg = make_config(cal_opts);
      const auto report = cket::calibrate_type1(cfg, truth, cal_opts.n, trials, cal_opts.threads);
      cket::write_calibration_csv(csv, cfg, report);
      emit(cal_opts.out, csv.str());
    } else if (*grid_cmd) {
      const auto cfg = make_config(grid_opts);
      const auto [p_lo, p_hi] = parse_range(grid_p, "--grid-p");
      const auto [l_lo, l_hi] = parse_range(grid_lambda, "--grid-lambda");
      const cket::GridSpec spec{p_lo, p_hi, l_lo, l_hi, step};
      const auto rows =
          cket::grid_experiment(spec, cfg, truth, grid_opts.n, shared_data, grid_opts.threads);
      cket::write_grid_csv(csv, rows);
      emit(grid_opts.out, csv.str());
    } else if (*con_cmd) {
      const auto cfg = make_config(con_opts);
      const auto rows = cket::consistency_curve(con_opts.cand_p, con_opts.cand_lambda, cfg, truth,
                                                parse_sizes(sizes), repeats, con_opts.threads);
      cket::write_consistency_csv(csv, rows);
      emit(con_opts.out, csv.str());
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
