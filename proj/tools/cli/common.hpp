#pragma once

#include <string>
#include <vector>

#include <CLI11.hpp>

#include "circlereg/error.hpp"
#include "circlereg/field_template.hpp"

namespace circlereg::cli {

enum Exit : int {
  kOk = 0,
  kIo = 1,
  kConfig = 2,
  kInsufficientEvidence = 3,
  kEstimation = 4,
};

int exit_code(ErrorCode code);

/// "a:b:s" -> a, a+s, ... up to b; a bare number is a one-point grid.
/// Throws InvalidConfig.
std::vector<double> parse_sigma_grid(const std::string& text);

/// Template from a JSON file, or the default pitch when path is empty.
TemplateConfig load_template_config(const std::string& path);

void add_simulate(CLI::App& app, int& status);
void add_derive(CLI::App& app, int& status);
void add_calibrate(CLI::App& app, int& status);
void add_evaluate(CLI::App& app, int& status);
void add_render(CLI::App& app, int& status);

}  // namespace circlereg::cli
