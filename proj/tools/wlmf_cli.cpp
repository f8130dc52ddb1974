// Command-line harness for the widely linear matched filter experiments.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "wlmf/error.hpp"
#include "wlmf/experiments.hpp"

namespace {

int report_error(std::string_view kind, const std::string& message) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  using wlmf::experiments::ExperimentSpec;
  ExperimentSpec spec;
  bool print_summary = false;

  CLI::App app{"Widely linear matched filter experiments"};
  app.set_config("--config", "", "Flat key=value file; keys match the long flag names");
  app.add_option("--experiment", spec.experiment, "gain-bias | gain-surface | mf-demo | cnn-train | design-sequence")
      ->required()
      ->check(CLI::IsMember({"gain-bias", "gain-surface", "mf-demo", "cnn-train", "design-sequence"}));
  app.add_option("--rho-u", spec.rho_u, "Comma-separated impropriety grid in [0, 1)")->delimiter(',');
  app.add_option("--filter-len", spec.filter_len, "Comma-separated filter lengths")->delimiter(',');
  app.add_option("--signal-len", spec.signal_len, "Input length N (gain-surface: random tail after x_o)");
  app.add_option("--trials", spec.trials, "Monte Carlo trials / input realizations / CNN seeds");
  app.add_option("--seed", spec.seed, "Master seed");
  app.add_option("--mode", spec.mode, "Noise statistics: analytic | empirical");
  app.add_option("--out-dir", spec.out_dir, "Output directory")->envname("WLMF_OUT_DIR");
  app.add_option("--threads", spec.threads, "Worker threads for trial-level parallelism");
  app.add_option("--noise-len", spec.noise_len, "Noise record length per trial (empirical mode)");
  app.add_option("--noise-std", spec.noise_std, "mf-demo observation noise std (0 = noise free)");
  app.add_option("--learning-rate", spec.learning_rate, "cnn-train SGD step");
  app.add_option("--epochs", spec.epochs, "cnn-train epochs");
  app.add_option("--realizations", spec.realizations, "cnn-train realizations per epoch");
  app.add_flag("--print-summary", print_summary, "Echo the JSON summary to stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("InvalidConfig", e.what());
  }

  try {
    const std::string started = wlmf::experiments::utc_timestamp();
    const auto result = wlmf::experiments::run(spec);
    const auto manifest = wlmf::experiments::write_outputs(spec, result, started);
    if (print_summary) std::cout << result.summary.dump(2) << '\n';
    std::cerr << "wrote " << manifest["outputs"].size() << " file(s) to " << spec.out_dir << '\n';
  } catch (const wlmf::Error& e) {
    return report_error(wlmf::to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    return report_error("InternalError", e.what());
  }
  return EXIT_SUCCESS;
}
