#pragma once

#include <functional>
#include <vector>

#include "support.hpp"

namespace cli {

struct Command {
  CLI::App* app;
  std::function<void(Run&)> run;
};

std::vector<Command> register_commands(CLI::App& app);

}  // namespace cli
