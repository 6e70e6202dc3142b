#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "stereoprop/grid.hpp"
#include "stereoprop/io_formats.hpp"
#include "stereoprop/maps.hpp"

namespace cli {

using nlohmann::json;
namespace fs = std::filesystem;

inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitCheckFailed = 3;

/// Parameter problems that are not library errors (exit 1).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bookkeeping shared by every command: input hashes, outputs, parameters,
/// and the command-specific result, all echoed in the summary JSON.
class Run {
 public:
  explicit Run(std::string command) : command_(std::move(command)) {}

  stereoprop::Bytes read(const std::string& role, const fs::path& path);
  void write(const std::string& role, const fs::path& path,
             const stereoprop::Bytes& bytes);

  json& params() { return params_; }
  json& result() { return result_; }
  int exit_code() const { return exit_code_; }
  void set_exit_code(int code) { exit_code_ = code; }
  json summary(std::chrono::steady_clock::duration elapsed) const;

 private:
  std::string command_;
  json inputs_ = json::object();
  json outputs_ = json::object();
  json params_ = json::object();
  json result_ = json::object();
  int exit_code_ = 0;
};

std::string sha256_hex(const stereoprop::Bytes& bytes);

/// Grid of any channel count stored as a one-channel PFM of height C*H, one
/// channel plane under the other. PFM itself only holds 1 or 3 channels.
stereoprop::Grid stack_planes(const stereoprop::Grid& g);
stereoprop::Grid unstack_planes(const stereoprop::Grid& stacked, std::size_t channels);

/// Disparity from PFM (non-finite samples invalid) or KITTI PNG.
struct LoadedDisparity {
  stereoprop::DisparityMap disparity;
  stereoprop::Mask valid;
};
LoadedDisparity load_disparity(Run& run, const std::string& role, const fs::path& path);

stereoprop::Grid load_pfm(Run& run, const std::string& role, const fs::path& path);
stereoprop::NormalMap load_normals(Run& run, const std::string& role, const fs::path& path);
stereoprop::Mask load_mask(Run& run, const std::string& role, const fs::path& path);

/// CLI11 config reader for flat JSON objects. Keys are long option names of
/// the selected subcommand; an optional "command" key must name it.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(std::string subcommand) : subcommand_(std::move(subcommand)) {}
  std::string to_config(const CLI::App*, bool, bool, std::string) const override;
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override;

 private:
  std::string subcommand_;
};

}  // namespace cli
