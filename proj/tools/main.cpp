#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "config.hpp"
#include "fnlab/error.hpp"
#include "fnlab/parallel.hpp"
#include "run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Dirichlet problems for fully nonlinear elliptic equations on a chart grid"};
  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  int threads = 1;
  app.add_option("--config", config_path, "JSON run config")->required();
  app.add_option("--out", out_dir, "output directory (overrides output_dir)");
  app.add_option("--seed", seed, "sampling seed (overrides seed)")->check(CLI::NonNegativeNumber);
  app.add_option("--threads", threads, "worker threads for node loops")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? 0 : 2;
  }

  fnlab::set_thread_count(threads);
  try {
    fnlab::cli::RunConfig config = fnlab::cli::load_config(config_path);
    if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (config.output_dir.empty()) config.output_dir = "fnlab-out";
    return fnlab::cli::run(config, config.output_dir, std::cerr);
  } catch (const fnlab::Error& e) {
    std::cerr << e.what() << "\n";
    return fnlab::exit_code_for(e.code());
  }
}
