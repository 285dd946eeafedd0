#include <iostream>

#include "common.hpp"

int main(int argc, char** argv) {
  using namespace circlereg::cli;
  CLI::App app{"Field registration from the center circle"};
  app.require_subcommand(1);
  int status = kOk;
  add_simulate(app, status);
  add_derive(app, status);
  add_calibrate(app, status);
  add_evaluate(app, status);
  add_render(app, status);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  } catch (const circlereg::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
  return status;
}
