#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "wplap/config.hpp"
#include "wplap/errors.hpp"
#include "wplap/runner.hpp"

// Command-line front end: check-weights, solve, verify, report.  Every run
// reads one config file; --out and --seed override the file, --threads is
// accepted for interface compatibility but execution stays single-threaded
// so identical seeds give byte-identical outputs.
int main(int argc, char** argv) {
  CLI::App app{"variational toolkit for the degenerate p-Laplacian"};
  app.require_subcommand(1);
  app.add_flag_callback(
         "--config-reference",
         []() {
           std::cout << wplap::config_reference();
           throw CLI::Success{};
         },
         "print the annotated config key reference and exit")
      ->trigger_on_parse();

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int threads = 1;
  bool have_out = false, have_seed = false;

  auto add_common = [&](CLI::App* sub, bool need_config) {
    auto* c = sub->add_option("--config", config_path, "experiment config file");
    if (need_config) c->required();
    sub->add_option("--out", out_dir, "output directory (overrides the config)")
        ->each([&](const std::string&) { have_out = true; });
    sub->add_option("--seed", seed, "seed override")
        ->each([&](const std::string&) { have_seed = true; });
    sub->add_option("--threads", threads,
                    "accepted for compatibility; runs single-threaded");
  };

  CLI::App* check = app.add_subcommand(
      "check-weights", "estimate the weight-class constants and exponent ranges");
  add_common(check, true);
  CLI::App* solve = app.add_subcommand(
      "solve", "run both solution branches (ball minimum and pass point)");
  add_common(solve, true);
  CLI::App* verify = app.add_subcommand(
      "verify", "run the inequality, fibering, sphere and oracle checks");
  add_common(verify, true);
  CLI::App* report = app.add_subcommand(
      "report", "merge the outputs of earlier commands into one report");
  add_common(report, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  wplap::RunOutcome out;
  try {
    if (report->parsed() && config_path.empty()) {
      if (!have_out) {
        std::cerr << "report needs --out DIR or --config FILE\n";
        return 2;
      }
      out = wplap::cmd_report(out_dir);
    } else {
      wplap::ExperimentConfig cfg = wplap::parse_config_file(config_path);
      if (have_out) cfg.out_dir = out_dir;
      if (have_seed) {
        cfg.seed = seed;
        cfg.solver.seed = seed;
      }
      if (check->parsed()) out = wplap::cmd_check_weights(cfg);
      else if (solve->parsed()) out = wplap::cmd_solve(cfg);
      else if (verify->parsed()) out = wplap::cmd_verify(cfg);
      else out = wplap::cmd_report(cfg.out_dir);
    }
  } catch (const wplap::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const wplap::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  (out.exit_code == 0 ? std::cout : std::cerr) << out.message << "\n";
  return out.exit_code;
}
