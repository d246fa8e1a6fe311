#include <iostream>

#include "CLI11.hpp"
#include "maxbloch/errors.hpp"
#include "maxbloch/pipelines.hpp"

int main(int argc, char** argv) {
  using namespace maxbloch;
  CLI::App app{"maxbloch: Maxwell-Bloch asymptotics lab"};
  app.require_subcommand(1);
  std::string config;
  RunFlags flags;
  std::string out;
  for (const char* name : {"simulate", "profile", "residual", "converge", "spectral-info"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON run configuration")->required();
    sub->add_option("--threads", flags.threads, "OpenMP threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", out, "output directory (overrides output_dir)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const bool unknown_sub = argc > 1 && std::string(argv[1]).rfind("-", 0) != 0 &&
                             !is_subcommand(argv[1]);
    if (unknown_sub || dynamic_cast<const CLI::RequiredError*>(&e) && argc < 2) {
      std::cerr << app.help();
      return kExitUsage;
    }
    return app.exit(e);
  }
  if (!out.empty()) flags.out_dir = out;
  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    const RunConfig cfg = parse_config(config);
    return dispatch(sub, cfg, flags, std::cout);
  } catch (const ValidationError& e) {
    std::cerr << "invalid configuration:\n";
    for (const auto& i : e.issues()) std::cerr << "  " << i << "\n";
    return kExitPipeline;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPipeline;
  }
}
