#include <cstdio>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "acceptance/suite.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks for the single birth library"};
  std::string filter;
  std::optional<std::size_t> N;
  sbp::acceptance::SuiteOptions options;
  options.models_dir = sbp::acceptance::default_models_dir();
  bool list = false;
  app.add_option("filter", filter, "Run criteria whose id contains this text");
  app.add_option("--N", N, "Truncation override");
  app.add_option("--models", options.models_dir, "Directory of bundled model files");
  app.add_flag("--list", list, "List criterion ids");
  CLI11_PARSE(app, argc, argv);
  options.N = N;

  if (list) {
    for (const auto& c : sbp::acceptance::criteria()) std::printf("%s\n", c.id.c_str());
    return 0;
  }
  int status = 0;
  std::size_t ran = 0;
  for (const auto& c : sbp::acceptance::criteria()) {
    if (c.id.find(filter) == std::string::npos) continue;
    const auto r = sbp::acceptance::run_one(c, options);
    std::printf("%s\n", sbp::acceptance::format_line(r).c_str());
    std::fflush(stdout);
    if (r.outcome != sbp::acceptance::Outcome::Pass) status = 1;
    ++ran;
  }
  if (ran == 0) {
    std::fprintf(stderr, "no criterion matches '%s'\n", filter.c_str());
    return 2;
  }
  return status;
}
