#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "nlres/commands.hpp"

int main(int argc, char** argv) {
  using namespace nlres;
  CLI::App app{"Continuation and brute-force analysis of forced Duffing oscillators"};
  app.require_subcommand(1);

  std::string config_path;
  RunConfig rc;
  for (const auto& name : kCommands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "run configuration file")->required();
    sub->add_option("--out", rc.out, "output directory")->capture_default_str();
    sub->add_option("--threads", rc.threads, "worker threads, 0 = all cores")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--tol-scale", rc.tol_scale, "factor applied to every tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  rc.command = app.get_subcommands().front()->get_name();

  CommandResult r;
  try {
    rc.config = parse_config(load_text(config_path));
    r = run_command(rc);
  } catch (const ConfigError& e) {
    r.exit_code = kExitConfig;
    r.errors.push_back({rc.command, "ConfigError", e.what()});
  } catch (const IoError& e) {
    r.exit_code = kExitIo;
    r.errors.push_back({rc.command, "IoError", e.what()});
  }

  for (const auto& f : r.files) std::cout << f.string() << "\n";
  if (!r.errors.empty()) {
    std::ostringstream ss;
    write_errors(ss, r.errors);
    std::cerr << ss.str();
  }
  return r.exit_code;
}
