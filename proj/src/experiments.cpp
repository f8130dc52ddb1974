#include "wlmf/experiments.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "wlmf/cnn.hpp"
#include "wlmf/error.hpp"
#include "wlmf/impropriety.hpp"
#include "wlmf/matched_filter.hpp"
#include "wlmf/noise.hpp"
#include "wlmf/rng.hpp"

namespace wlmf::experiments {
namespace {

using nlohmann::json;

// Stream reserved for the deterministic input signal of gain-surface.
constexpr std::uint64_t kSignalStream = 0x5167'6e61'6cULL;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

void fail(const std::string& msg) { throw Error(ErrorKind::InvalidConfig, msg); }

/// Runs fn(0..count-1) on `threads` workers. Each index writes only its own
/// result slot, so the merge order is fixed by index, not by scheduling.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<double> default_bias_grid() { return {0.04, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8}; }

std::vector<double> default_surface_grid() {
  std::vector<double> g;
  for (int k = 1; k <= 20; ++k) g.push_back(0.04 * k);
  return g;
}

CovariancePair noise_statistics(const NoiseModel& model, Eigen::Index len, bool empirical,
                                int noise_len, std::uint64_t seed) {
  if (!empirical) return analytic_covariances(model, len);
  return empirical_covariances(model.generate(static_cast<std::size_t>(noise_len), seed), len);
}

json complex_array(const CVector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back({v(i).real(), v(i).imag()});
  return arr;
}

json real_array(const RVector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace

ExperimentSpec ExperimentSpec::with_defaults() const {
  ExperimentSpec s = *this;
  const std::string& e = s.experiment;
  if (e == "gain-bias") {
    if (s.rho_u.empty()) s.rho_u = default_bias_grid();
    if (s.filter_len.empty()) s.filter_len = {4, 6, 8};
    if (s.signal_len == 0) s.signal_len = 10000;
    if (s.trials == 0) s.trials = 5;
    if (s.mode.empty()) s.mode = "analytic";
  } else if (e == "gain-surface") {
    if (s.rho_u.empty()) s.rho_u = default_surface_grid();
    if (s.filter_len.empty()) s.filter_len = {6};
    if (s.signal_len == 0) s.signal_len = 100;
    if (s.trials == 0) s.trials = 200;
    if (s.mode.empty()) s.mode = "empirical";
  } else if (e == "mf-demo") {
    if (s.filter_len.empty()) s.filter_len = {3};
    if (s.signal_len == 0) s.signal_len = 8;
    if (s.trials == 0) s.trials = 1;
    if (s.mode.empty()) s.mode = "analytic";
  } else if (e == "cnn-train") {
    if (s.filter_len.empty()) s.filter_len = {3};
    if (s.signal_len == 0) s.signal_len = 8;
    if (s.trials == 0) s.trials = 1;
    if (s.mode.empty()) s.mode = "analytic";
  } else if (e == "design-sequence") {
    if (s.rho_u.empty()) s.rho_u = {0.5};
    if (s.filter_len.empty()) s.filter_len = {6};
    if (s.trials == 0) s.trials = 1;
    if (s.mode.empty()) s.mode = "analytic";
  } else {
    fail("unknown experiment '" + e + "'");
  }

  for (double r : s.rho_u) {
    if (!(r >= 0.0 && r < 1.0)) fail("rho-u values must lie in [0, 1), got " + num(r));
  }
  for (int l : s.filter_len) {
    if (l < 1 || l > 64) fail("filter-len values must lie in [1, 64]");
  }
  if (s.trials < 1) fail("trials must be >= 1");
  if (s.threads < 1) fail("threads must be >= 1");
  if (s.mode != "analytic" && s.mode != "empirical") fail("mode must be analytic or empirical");
  const int max_len = *std::max_element(s.filter_len.begin(), s.filter_len.end());
  if (e == "gain-bias" && s.signal_len < 10 * max_len) {
    fail("gain-bias needs signal-len >= 10 * max(filter-len)");
  }
  if (s.mode == "empirical" && s.noise_len < 10 * max_len) {
    fail("noise-len must be >= 10 * max(filter-len) in empirical mode");
  }
  if (e == "gain-surface" && s.filter_len.size() != 1) fail("gain-surface takes a single filter-len");
  if (e == "mf-demo" && (s.filter_len.front() != 3 || s.signal_len != 8)) {
    fail("mf-demo is defined for filter-len 3 and signal-len 8");
  }
  if (e == "cnn-train" && (s.epochs < 0 || s.realizations < 1 || !(s.learning_rate >= 0.0))) {
    fail("cnn-train needs epochs >= 0, realizations >= 1, learning-rate >= 0");
  }
  if (s.noise_std < 0.0) fail("noise-std must be >= 0");
  return s;
}

json ExperimentSpec::to_json() const {
  return {{"experiment", experiment}, {"rho_u", rho_u},           {"filter_len", filter_len},
          {"signal_len", signal_len}, {"trials", trials},         {"seed", seed},
          {"mode", mode},             {"out_dir", out_dir},       {"threads", threads},
          {"noise_len", noise_len},   {"noise_std", noise_std},   {"learning_rate", learning_rate},
          {"epochs", epochs},         {"realizations", realizations}};
}

ExperimentResult run_gain_bias(const ExperimentSpec& raw) {
  const ExperimentSpec spec = raw.with_defaults();
  const bool empirical = spec.mode == "empirical";
  const NoiseModel base(benchmark_ma_taps(), 0.0);

  struct Cell {
    int len;
    double rho;
  };
  std::vector<Cell> cells;
  for (int len : spec.filter_len) {
    for (double rho : spec.rho_u) cells.push_back({len, rho});
  }
  const auto trials = static_cast<std::size_t>(spec.trials);

  // Trial t observes the same circular Gaussian input in every cell.
  std::vector<CVector> inputs(trials);
  parallel_for(trials, spec.threads, [&](std::size_t t) {
    inputs[t] = sample_improper_white(static_cast<std::size_t>(spec.signal_len), 0.0, 1.0,
                                      derive_seed(spec.seed, t));
  });

  std::vector<double> bias(cells.size() * trials);
  parallel_for(bias.size(), spec.threads, [&](std::size_t k) {
    const Cell& cell = cells[k / trials];
    const std::size_t t = k % trials;
    const CovariancePair cov =
        noise_statistics(base.with_rho(cell.rho), cell.len, empirical, spec.noise_len,
                         derive_seed(derive_seed(spec.seed, t), k / trials + 1));
    bias[k] = normalized_snr_bias(inputs[t], cov, cell.len);
  });

  std::ostringstream csv;
  csv << "rho_u,filter_len,normalized_bias\n";
  json cell_summary = json::array();
  double min_bias = 0.0;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    double mean = 0.0;
    for (std::size_t t = 0; t < trials; ++t) mean += bias[c * trials + t];
    mean /= static_cast<double>(trials);
    min_bias = c == 0 ? mean : std::min(min_bias, mean);
    csv << num(cells[c].rho) << ',' << cells[c].len << ',' << num(mean) << '\n';
    cell_summary.push_back({{"rho_u", cells[c].rho}, {"filter_len", cells[c].len}, {"normalized_bias", mean}});
  }
  return {"gain_bias.csv", csv.str(), "gain_bias.json",
          {{"experiment", "gain-bias"}, {"cells", cell_summary}, {"min_bias", min_bias}}};
}

ExperimentResult run_gain_surface(const ExperimentSpec& raw) {
  const ExperimentSpec spec = raw.with_defaults();
  const bool empirical = spec.mode == "empirical";
  const Eigen::Index len = spec.filter_len.front();
  const NoiseModel base(benchmark_ma_taps(), 0.0);

  // The first L samples are laid out so the window at n_p = L is exactly x_o.
  const CVector head = len == 6 ? CVector(reference_matched_sequence().reverse())
                                : sample_improper_white(static_cast<std::size_t>(len), 0.0, 1.0,
                                                        derive_seed(spec.seed, kSignalStream + 1));
  const CVector tail = sample_improper_white(static_cast<std::size_t>(spec.signal_len), 0.0, 1.0,
                                             derive_seed(spec.seed, kSignalStream));
  CVector x(head.size() + tail.size());
  x << head, tail;
  const Eigen::Index windows = x.size() - len + 1;

  const std::size_t n_rho = spec.rho_u.size();
  const std::size_t trials = empirical ? static_cast<std::size_t>(spec.trials) : 1;
  // gains[(r * trials + t) * windows + w]
  std::vector<double> gains(n_rho * trials * static_cast<std::size_t>(windows));
  parallel_for(n_rho * trials, spec.threads, [&](std::size_t k) {
    const std::size_t r = k / trials;
    const std::size_t t = k % trials;
    // Common random numbers across the rho grid: trial t reuses its draws.
    const CovariancePair cov = noise_statistics(base.with_rho(spec.rho_u[r]), len, empirical,
                                                spec.noise_len, derive_seed(spec.seed, t));
    const GainEvaluator eval(cov);
    for (Eigen::Index w = 0; w < windows; ++w) {
      gains[k * static_cast<std::size_t>(windows) + static_cast<std::size_t>(w)] =
          eval.gain(window_at(x, len + w, len));
    }
  });

  std::ostringstream csv;
  csv << "n_p,rho_u,snr_gain\n";
  double min_gain = 0.0;
  bool first = true;
  std::vector<double> matched_slice(n_rho);
  for (Eigen::Index w = 0; w < windows; ++w) {
    for (std::size_t r = 0; r < n_rho; ++r) {
      double mean = 0.0;
      for (std::size_t t = 0; t < trials; ++t) {
        mean += gains[(r * trials + t) * static_cast<std::size_t>(windows) + static_cast<std::size_t>(w)];
      }
      mean /= static_cast<double>(trials);
      if (w == 0) matched_slice[r] = mean;
      min_gain = first ? mean : std::min(min_gain, mean);
      first = false;
      csv << (len + w) << ',' << num(spec.rho_u[r]) << ',' << num(mean) << '\n';
    }
  }
  const auto argmin = static_cast<std::size_t>(
      std::min_element(matched_slice.begin(), matched_slice.end()) - matched_slice.begin());
  json summary = {{"experiment", "gain-surface"},
                  {"signal_total_len", x.size()},
                  {"min_gain", min_gain},
                  {"matched_slice",
                   {{"n_p", len}, {"gains", matched_slice}, {"argmin_rho_u", spec.rho_u[argmin]}}}};
  return {"gain_surface.csv", csv.str(), "gain_surface.json", summary};
}

ExperimentResult run_mf_demo(const ExperimentSpec& raw) {
  const ExperimentSpec spec = raw.with_defaults();
  const Eigen::Index n = spec.signal_len;
  const Eigen::Index len = 3;
  CVector templ(3);
  templ << Complex(-0.1, 1.0), Complex(1.0, 1.0), Complex(-0.5, 1.0);
  const CVector feature = template_to_feature(templ);

  // Feature occupies samples n-3..n-1 (1-based 5..7), ending at the match index 7.
  const Eigen::Index match = n - 1;
  CVector signal = spec.noise_std > 0.0
                       ? CVector(spec.noise_std *
                                 sample_improper_white(static_cast<std::size_t>(n), 0.0, 1.0, spec.seed))
                       : CVector(CVector::Zero(n));
  signal.segment(match - len, len) += feature;

  // The filter input vector is the newest-first window of the feature.
  const CVector matched_input = feature.reverse();
  const CovariancePair white{CMatrix::Identity(len, len), CMatrix::Zero(len, len)};
  const CVector y_sl = apply_filter_sequence(signal, slmf_solve(matched_input, white));
  const CVector y_wl = apply_filter_sequence(signal, wlmf_solve(matched_input, white));

  Eigen::Index sl_peak = 0;
  Eigen::Index wl_peak = 0;
  y_sl.cwiseAbs().maxCoeff(&sl_peak);
  y_wl.cwiseAbs().maxCoeff(&wl_peak);

  std::ostringstream csv;
  csv << "n,input_re,input_im,sl_modulus,wl_modulus\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    csv << i + 1 << ',' << num(signal(i).real()) << ',' << num(signal(i).imag()) << ',';
    if (i + 1 >= len) {
      csv << num(std::abs(y_sl(i + 1 - len))) << ',' << num(std::abs(y_wl(i + 1 - len)));
    } else {
      csv << ',';
    }
    csv << '\n';
  }
  const double sl_max = std::abs(y_sl(sl_peak));
  const double wl_max = std::abs(y_wl(wl_peak));
  json summary = {{"experiment", "mf-demo"},
                  {"template", complex_array(templ)},
                  {"feature", complex_array(feature)},
                  {"sl_peak_index", sl_peak + len},
                  {"wl_peak_index", wl_peak + len},
                  {"sl_peak_modulus", sl_max},
                  {"wl_peak_modulus", wl_max},
                  {"threshold", 0.5 * sl_max}};
  return {"mf_demo.csv", csv.str(), "mf_demo.json", summary};
}

ExperimentResult run_cnn_train(const ExperimentSpec& raw) {
  const ExperimentSpec spec = raw.with_defaults();
  cnn::CnnConfig config;
  config.input_len = spec.signal_len;
  config.filter_len = spec.filter_len.front();
  config.learning_rate = spec.learning_rate;
  config.epochs = spec.epochs;
  config.realizations_per_epoch = spec.realizations;
  config.validate();

  const auto trials = static_cast<std::size_t>(spec.trials);
  // results[2 t] = SL, results[2 t + 1] = WL; both share seed_t.
  std::vector<cnn::TrainResult> results(2 * trials);
  parallel_for(results.size(), spec.threads, [&](std::size_t k) {
    cnn::CnnConfig c = config;
    c.mode = k % 2 == 0 ? cnn::ConvMode::StrictlyLinear : cnn::ConvMode::WidelyLinear;
    results[k] = cnn::train(c, derive_seed(spec.seed, k / 2));
  });

  std::ostringstream csv;
  csv << "iteration,mode,pattern,probability\n";
  for (std::size_t m = 0; m < 2; ++m) {
    const auto mode = m == 0 ? "SL" : "WL";
    for (const auto& tp : results[m].trace) {
      for (int p = 0; p < 2; ++p) {
        csv << tp.iteration << ',' << mode << ',' << p + 1 << ','
            << num(tp.probability[static_cast<std::size_t>(p)]) << '\n';
      }
    }
  }

  const int never = config.epochs * config.realizations_per_epoch + 1;
  json per_seed = json::array();
  int wl_earlier = 0;
  int sl_final_ok = 0;
  int wl_final_ok = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto& sl = results[2 * t];
    const auto& wl = results[2 * t + 1];
    const int sl_it = sl.sustained_correct_iteration.value_or(never);
    const int wl_it = wl.sustained_correct_iteration.value_or(never);
    auto final_mean = [](const cnn::TrainResult& r) {
      if (r.trace.empty()) return 0.0;
      return 0.5 * (r.trace.back().probability[0] + r.trace.back().probability[1]);
    };
    wl_earlier += wl_it < sl_it;
    sl_final_ok += final_mean(sl) > 0.9;
    wl_final_ok += final_mean(wl) > 0.9;
    per_seed.push_back({{"trial", t},
                        {"seed", derive_seed(spec.seed, t)},
                        {"sl_sustained_iteration", sl.sustained_correct_iteration ? json(sl_it) : json(nullptr)},
                        {"wl_sustained_iteration", wl.sustained_correct_iteration ? json(wl_it) : json(nullptr)},
                        {"sl_final_mean_probability", final_mean(sl)},
                        {"wl_final_mean_probability", final_mean(wl)}});
  }
  json summary = {{"experiment", "cnn-train"},
                  {"trace_seed", derive_seed(spec.seed, 0)},
                  {"sl_conv_params", results[0].params.conv_param_count()},
                  {"wl_conv_params", results[1].params.conv_param_count()},
                  {"seeds", per_seed},
                  {"wl_earlier_count", wl_earlier},
                  {"sl_final_above_0_9", sl_final_ok},
                  {"wl_final_above_0_9", wl_final_ok}};
  return {"cnn_train.csv", csv.str(), "cnn_train.json", summary};
}

ExperimentResult run_design_sequence(const ExperimentSpec& raw) {
  const ExperimentSpec spec = raw.with_defaults();
  const Eigen::Index len = spec.filter_len.front();
  const double rho_u = spec.rho_u.front();
  const CovariancePair cov = analytic_covariances(NoiseModel(benchmark_ma_taps(), rho_u), len);
  const AutDecomposition aut = aut_decompose(cov);
  const CVector designed = design_matched_sequence(aut, derive_seed(spec.seed, 0));
  const ImproprietyProfile prof = impropriety_profile(aut, rotated_input(designed, aut));

  RVector target(len);
  for (Eigen::Index i = 0; i < len; ++i) target(i) = epsilon_for_rho(prof.rho(i));
  const double round_trip = (prof.epsilon - target).cwiseAbs().maxCoeff();

  json summary = {{"experiment", "design-sequence"},
                  {"rho_u", rho_u},
                  {"filter_len", len},
                  {"lambda_r", real_array(aut.lambda_r)},
                  {"lambda_c", real_array(aut.lambda_c)},
                  {"lambda_diag", real_array(aut.lambda_diag)},
                  {"offdiag_residual", aut.offdiag_residual},
                  {"rho", real_array(prof.rho)},
                  {"epsilon_target", real_array(target)},
                  {"designed_sequence", complex_array(designed)},
                  {"round_trip_epsilon", real_array(prof.epsilon)},
                  {"round_trip_max_error", round_trip},
                  {"snr_gain", snr_gain(designed, cov)},
                  {"approx_snr_gain", approx_snr_gain(designed, aut)}};
  return {"", "", "design_sequence.json", summary};
}

ExperimentResult run(const ExperimentSpec& spec) {
  const ExperimentSpec s = spec.with_defaults();
  if (s.experiment == "gain-bias") return run_gain_bias(s);
  if (s.experiment == "gain-surface") return run_gain_surface(s);
  if (s.experiment == "mf-demo") return run_mf_demo(s);
  if (s.experiment == "cnn-train") return run_cnn_train(s);
  return run_design_sequence(s);
}

json write_outputs(const ExperimentSpec& spec, const ExperimentResult& result,
                   const std::string& started_at) {
  namespace fs = std::filesystem;
  const fs::path dir(spec.out_dir);
  fs::create_directories(dir);
  json digests = json::object();
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error(ErrorKind::InvalidConfig, "cannot write " + (dir / name).string());
    out << body;
    digests[name] = sha256_hex(body);
  };
  if (!result.csv_name.empty()) write(result.csv_name, result.csv);
  write(result.json_name, result.summary.dump(2) + "\n");

  json manifest = {{"spec", spec.with_defaults().to_json()},
                   {"library_version", kLibraryVersion},
                   {"master_seed", spec.seed},
                   {"seed_rule", "trial t uses derive_seed(master, t) = splitmix64(splitmix64(master) ^ "
                                 "splitmix64(t + 0x632be59bd9b4e019))"},
                   {"started_at", started_at},
                   {"finished_at", utc_timestamp()},
                   {"outputs", digests}};
  std::ofstream(dir / (spec.experiment + ".manifest.json")) << manifest.dump(2) << '\n';
  return manifest;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int size = 0;
  EVP_Digest(data.data(), data.size(), digest, &size, EVP_sha256(), nullptr);
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < size; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw Error(ErrorKind::InvalidConfig, "csv: no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

}  // namespace wlmf::experiments
