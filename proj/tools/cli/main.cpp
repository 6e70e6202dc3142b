#include <cstdlib>
#include <iostream>
#include <string>

#include "commands.hpp"
#include "stereoprop/error.hpp"
#include "stereoprop/parallel.hpp"

namespace {

int fail(const std::string& command, int code, const std::string& kind,
         const std::string& message) {
  const cli::json out = {{"command", command},
                         {"status", "error"},
                         {"error", {{"kind", kind}, {"message", message}}}};
  std::cout << out.dump(2) << std::endl;
  return code;
}

void apply_thread_env() {
  const char* env = std::getenv("STEREOPROP_THREADS");
  if (env == nullptr || *env == '\0') return;
  try {
    const long n = std::stol(env);
    if (n > 0) stereoprop::set_num_threads(static_cast<std::size_t>(n));
  } catch (const std::exception&) {
    throw cli::ValidationError(std::string("STEREOPROP_THREADS is not a number: ") + env);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normal-guided stereo refinement tools", "stereoprop"};
  app.require_subcommand(1);
  const std::vector<cli::Command> commands = cli::register_commands(app);

  // The config reader needs to know which subcommand the keys belong to.
  std::string selected;
  for (int i = 1; i < argc && selected.empty(); ++i) {
    for (const auto& c : commands) {
      if (c.app->get_name() == argv[i]) selected = argv[i];
    }
  }
  app.config_formatter(std::make_shared<cli::JsonConfig>(selected));
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "", "JSON file with option values; flags override it");
  for (const auto& c : commands) c.app->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::FileError& e) {
    return fail(selected, cli::kExitIo, "io", e.what());
  } catch (const CLI::ParseError& e) {
    return fail(selected, cli::kExitValidation, "usage", e.what());
  } catch (const cli::ValidationError& e) {
    return fail(selected, cli::kExitValidation, "validation", e.what());
  }

  for (const auto& c : commands) {
    if (!c.app->parsed()) continue;
    cli::Run run(c.app->get_name());
    try {
      apply_thread_env();
      const auto start = std::chrono::steady_clock::now();
      c.run(run);
      std::cout << run.summary(std::chrono::steady_clock::now() - start).dump(2) << std::endl;
      return run.exit_code();
    } catch (const cli::ValidationError& e) {
      return fail(c.app->get_name(), cli::kExitValidation, "validation", e.what());
    } catch (const stereoprop::Error& e) {
      const bool io = e.code() == stereoprop::ErrorCode::Io;
      return fail(c.app->get_name(), io ? cli::kExitIo : cli::kExitValidation,
                  std::string(stereoprop::to_string(e.code())), e.what());
    } catch (const std::filesystem::filesystem_error& e) {
      return fail(c.app->get_name(), cli::kExitIo, "Io", e.what());
    } catch (const nlohmann::json::exception& e) {
      return fail(c.app->get_name(), cli::kExitValidation, "validation", e.what());
    }
  }
  return fail(selected, cli::kExitValidation, "usage", "no subcommand given");
}
