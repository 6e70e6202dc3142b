#include "support.hpp"

#include <openssl/evp.h>

#include <cctype>
#include <cstdio>

#include "stereoprop/error.hpp"

namespace cli {

using namespace stereoprop;

std::string sha256_hex(const Bytes& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    char buf[3];
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

Bytes Run::read(const std::string& role, const fs::path& path) {
  Bytes bytes = read_file(path);
  inputs_[role] = {{"path", path.string()}, {"sha256", sha256_hex(bytes)}};
  return bytes;
}

void Run::write(const std::string& role, const fs::path& path, const Bytes& bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  write_file(path, bytes);
  outputs_[role] = {{"path", path.string()}, {"sha256", sha256_hex(bytes)}};
}

json Run::summary(std::chrono::steady_clock::duration elapsed) const {
  return {{"command", command_},
          {"status", "ok"},
          {"params", params_},
          {"inputs", inputs_},
          {"outputs", outputs_},
          {"result", result_},
          {"elapsed_ms", std::chrono::duration<double, std::milli>(elapsed).count()}};
}

Grid stack_planes(const Grid& g) {
  Grid out(g.channels() * g.height(), g.width());
  for (std::size_t c = 0; c < g.channels(); ++c)
    for (std::size_t y = 0; y < g.height(); ++y)
      for (std::size_t x = 0; x < g.width(); ++x) out(c * g.height() + y, x) = g(y, x, c);
  return out;
}

Grid unstack_planes(const Grid& stacked, std::size_t channels) {
  if (stacked.channels() != 1 || channels == 0 || stacked.height() % channels != 0) {
    throw Error(ErrorCode::ShapeMismatch,
                "stacked PFM must be one channel with height divisible by " +
                    std::to_string(channels));
  }
  const std::size_t h = stacked.height() / channels;
  Grid out(h, stacked.width(), channels);
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < stacked.width(); ++x) out(y, x, c) = stacked(c * h + y, x);
  return out;
}

namespace {

bool has_extension(const fs::path& path, const char* ext) {
  std::string e = path.extension().string();
  for (char& ch : e) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return e == ext;
}

}  // namespace

LoadedDisparity load_disparity(Run& run, const std::string& role, const fs::path& path) {
  const Bytes bytes = run.read(role, path);
  if (has_extension(path, ".png")) {
    KittiDisparity k = read_kitti_disparity(bytes);
    return {std::move(k.disparity), std::move(k.valid)};
  }
  PfmImage img = read_pfm(bytes);
  if (img.grid.channels() != 1) {
    throw Error(ErrorCode::BadChannelCount, role + ": disparity PFM must have one channel");
  }
  return {DisparityMap(std::move(img.grid)), std::move(img.valid)};
}

Grid load_pfm(Run& run, const std::string& role, const fs::path& path) {
  return read_pfm(run.read(role, path)).grid;
}

NormalMap load_normals(Run& run, const std::string& role, const fs::path& path) {
  const Bytes bytes = run.read(role, path);
  if (has_extension(path, ".pfm")) return NormalMap(read_pfm(bytes).grid);
  return read_normal_png(bytes);
}

Mask load_mask(Run& run, const std::string& role, const fs::path& path) {
  return read_mask_png(run.read(role, path));
}

std::string JsonConfig::to_config(const CLI::App*, bool, bool, std::string) const {
  return "{}";
}

std::vector<CLI::ConfigItem> JsonConfig::from_config(std::istream& input) const {
  json j;
  try {
    input >> j;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  std::vector<CLI::ConfigItem> items;
  for (const auto& [key, value] : j.items()) {
    if (key == "command") {
      if (!value.is_string() || value.get<std::string>() != subcommand_) {
        throw ValidationError("config is for command " + value.dump() + ", not " + subcommand_);
      }
      continue;
    }
    CLI::ConfigItem item;
    item.parents = {subcommand_};
    item.name = key;
    auto scalar = [](const json& v) {
      return v.is_string() ? v.get<std::string>() : v.dump();
    };
    if (value.is_array()) {
      for (const auto& v : value) item.inputs.push_back(scalar(v));
    } else if (value.is_boolean()) {
      item.inputs.push_back(value.get<bool>() ? "true" : "false");
    } else if (value.is_object() || value.is_null()) {
      throw ValidationError("config key " + key + " must be a scalar or an array");
    } else {
      item.inputs.push_back(scalar(value));
    }
    items.push_back(std::move(item));
  }
  return items;
}

}  // namespace cli
