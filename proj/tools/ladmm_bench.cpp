#include <exception>
#include <iostream>

#include "ladmm/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Adaptive linearized ADMM LASSO benchmark"};
  ladmm::bench::RunSpec spec;
  ladmm::cli::Options opts;
  opts.attach(app, spec);
  try {
    app.parse(argc, argv);
    opts.finalize(spec);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  try {
    return ladmm::bench::run(spec, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
