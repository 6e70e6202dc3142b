#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "stereoprop/io_formats.hpp"
#include "stereoprop/normals.hpp"
#include "stereoprop/propagation.hpp"

using namespace stereoprop;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  json out;
};

class Workspace {
 public:
  Workspace() {
    static std::atomic<int> counter{0};
    dir_ = fs::temp_directory_path() /
           ("stereoprop_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }

  fs::path operator/(const std::string& name) const { return dir_ / name; }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void text(const std::string& name, const std::string& content) const {
    std::ofstream(dir_ / name) << content;
  }

  Result run(const std::string& args) const {
    const fs::path log = dir_ / "stdout.json";
    const std::string cmd = std::string("\"") + STEREOPROP_CLI + "\" " + args + " > \"" +
                            log.string() + "\" 2>/dev/null";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    r.out = json::parse(ss.str(), nullptr, false);
    return r;
  }

  // Two-plane scene used by most cases.
  void synth(const std::string& out, std::uint64_t seed = 3, double noise = 0.0) const {
    text("planes.json",
         R"([{"a":0,"b":0,"c":8},)"
         R"({"a":0.12,"b":0.04,"c":10,"region":[16,32,48,72],"texture_seed":5}])");
    const Result r = run("synth --planes " + path("planes.json") + " --out " + path(out) +
                         " --seed " + std::to_string(seed) + " --noise " + std::to_string(noise));
    REQUIRE(r.code == 0);
  }

 private:
  fs::path dir_;
};

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("synth writes the scene and echoes hashes") {
    Workspace ws;
    ws.synth("s");
    for (const char* f : {"left.pfm", "right.pfm", "disparity.pfm", "disparity_right.pfm",
                          "disparity.png", "normal.png", "normal.pfm", "occlusion.png",
                          "manifest.json"}) {
      CHECK(fs::exists(ws / ("s/" + std::string(f))));
    }
    const json m = json::parse(std::ifstream(ws / "s/manifest.json"));
    CHECK(m.at("planes").size() == 2);
    CHECK(m.at("seed") == 3);
  }

  TEST_CASE("synth is deterministic in its seed") {
    Workspace ws;
    const std::string args = "synth --planes " + ws.path("p.json") + " --seed 5 --noise 1 --out ";
    ws.text("p.json", R"([{"a":0.01,"b":0,"c":6}])");
    const Result a = ws.run(args + ws.path("a"));
    const Result b = ws.run(args + ws.path("b"));
    const Result c = ws.run("synth --planes " + ws.path("p.json") + " --seed 6 --noise 1 --out " +
                            ws.path("c"));
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    REQUIRE(c.code == 0);
    CHECK(a.out["outputs"]["left"]["sha256"] == b.out["outputs"]["left"]["sha256"]);
    CHECK(a.out["outputs"]["left"]["sha256"] != c.out["outputs"]["left"]["sha256"]);
  }

  TEST_CASE("eval of ground truth against itself is exact") {
    Workspace ws;
    ws.synth("s");
    const Result r = ws.run("eval --gt " + ws.path("s/disparity.pfm") + " --pred " +
                            ws.path("s/disparity.pfm") + " --occlusion " +
                            ws.path("s/occlusion.png"));
    REQUIRE(r.code == 0);
    const json& res = r.out["result"];
    for (const char* region : {"all", "occluded", "non_occluded"}) {
      INFO(region);
      REQUIRE(res[region].is_object());
      for (const char* key : {"epe", "d1", "bad2", "bad4", "rmse", "p1", "p3"}) {
        CHECK(res[region][key].get<double>() == 0.0);
      }
    }
    CHECK(res["all"]["count"].get<std::size_t>() ==
          res["occluded"]["count"].get<std::size_t>() +
              res["non_occluded"]["count"].get<std::size_t>());
  }

  TEST_CASE("normal-gt matches the library byte for byte") {
    Workspace ws;
    ws.synth("s");
    ws.synth("n", 4, 0.0);
    const Result r = ws.run("normal-gt --pseudo " + ws.path("n/disparity.pfm") + " --sparse " +
                            ws.path("s/disparity.png") + " --out " + ws.path("gt.png") +
                            " --mask-out " + ws.path("mask.png") + " --eindex-out " +
                            ws.path("e.png"));
    REQUIRE(r.code == 0);

    const PfmImage pseudo = read_pfm(read_file(ws / "n/disparity.pfm"));
    const KittiDisparity sparse = read_kitti_disparity(read_file(ws / "s/disparity.png"));
    const DisparityMap pd(pseudo.grid);
    const SparseNormals sn = sparse_normal_from_disparity(sparse.disparity, sparse.valid);
    const NormalMap fused = fuse_normal_gt(normal_from_disparity(pd), sn.normals, sn.mask);
    CHECK(read_file(ws / "gt.png") == write_normal_png(fused));
    CHECK(read_file(ws / "mask.png") == write_mask_png(sn.mask));
    CHECK(read_file(ws / "e.png") ==
          write_mask_png(epe_index(pd, sparse.disparity, sparse.valid, 1.0)));
  }

  TEST_CASE("propagate with explicit guidance matches the library") {
    Workspace ws;
    ws.synth("s", 3, 2.0);
    const Result first = ws.run("propagate --disparity " + ws.path("s/disparity.pfm") +
                                " --left " + ws.path("s/left.pfm") + " --right " +
                                ws.path("s/right.pfm") + " --out " + ws.path("p.pfm") +
                                " --offsets-out " + ws.path("o.pfm") + " --affinity-out " +
                                ws.path("a.pfm") + " --offsets-png " + ws.path("vis.png"));
    REQUIRE(first.code == 0);
    CHECK(fs::file_size(ws / "vis.png") > 0);

    const Grid d = read_pfm(read_file(ws / "s/disparity.pfm")).grid;
    Grid conf(d.height(), d.width());
    for (std::size_t y = 0; y < d.height(); ++y)
      for (std::size_t x = 0; x < d.width(); ++x) conf(y, x) = 0.25 + 0.5 * ((x + y) % 2);
    write_file(ws / "c.pfm", write_pfm(conf));

    const Result r = ws.run("propagate --disparity " + ws.path("s/disparity.pfm") +
                            " --confidence " + ws.path("c.pfm") + " --offsets " +
                            ws.path("o.pfm") + " --affinity " + ws.path("a.pfm") +
                            " --steps 2 --out " + ws.path("p2.pfm"));
    REQUIRE(r.code == 0);

    auto unstack = [](const Grid& s, std::size_t c) {
      const std::size_t h = s.height() / c;
      Grid g(h, s.width(), c);
      for (std::size_t k = 0; k < c; ++k)
        for (std::size_t y = 0; y < h; ++y)
          for (std::size_t x = 0; x < s.width(); ++x) g(y, x, k) = s(k * h + y, x);
      return g;
    };
    const OffsetField offsets(unstack(read_pfm(read_file(ws / "o.pfm")).grid, 16));
    const AffinityField affinity(unstack(read_pfm(read_file(ws / "a.pfm")).grid, 8));
    const Grid expected = iterate_propagation(d, offsets, affinity, ConfidenceMap(conf), 2);
    CHECK(read_file(ws / "p2.pfm") == write_pfm(expected));
  }

  TEST_CASE("filter with a center-only window is the identity") {
    Workspace ws;
    Grid f(6, 7, 3), a(9 * 6, 7);
    for (std::size_t i = 0; i < f.size(); ++i) f.data()[i] = double(i % 11) / 7.0;
    for (std::size_t y = 0; y < 6; ++y)
      for (std::size_t x = 0; x < 7; ++x) a(4 * 6 + y, x) = 2.0;
    write_file(ws / "f.pfm", write_pfm(f));
    write_file(ws / "a.pfm", write_pfm(a));
    const Result r = ws.run("filter --features " + ws.path("f.pfm") + " --affinity " +
                            ws.path("a.pfm") + " --out " + ws.path("o.pfm"));
    REQUIRE(r.code == 0);
    const Grid out = read_pfm(read_file(ws / "o.pfm")).grid;
    const Grid in = read_pfm(read_file(ws / "f.pfm")).grid;
    CHECK(std::equal(out.data().begin(), out.data().end(), in.data().begin(), in.data().end()));
    CHECK(ws.run("filter --features " + ws.path("f.pfm") + " --affinity " + ws.path("a.pfm") +
                 " --k 5 --out " + ws.path("o.pfm")).code == 1);
  }

  TEST_CASE("loss totals from numeric manifests") {
    Workspace ws;
    ws.text("m.json", R"({"scales":[{"disparity":1},{"disparity":0},{"disparity":0},{"disparity":0}]})");
    Result r = ws.run("loss --manifest " + ws.path("m.json"));
    REQUIRE(r.code == 0);
    CHECK(r.out["result"]["total"].get<double>() == doctest::Approx(5.0).epsilon(1e-12));
    ws.text("m2.json", R"([{"disparity":1,"normal":0.1,"confidence":1},{},{},{}])");
    r = ws.run("loss --manifest " + ws.path("m2.json") + " --lambda-scale 1 0 0 0");
    REQUIRE(r.code == 0);
    CHECK(r.out["result"]["total"].get<double>() == doctest::Approx(11.0).epsilon(1e-12));
    ws.text("m3.json", R"({"scales":[{}, {}]})");
    CHECK(ws.run("loss --manifest " + ws.path("m3.json")).code == 1);
    CHECK(ws.run("loss --manifest " + ws.path("m.json") + " --c1 2 --c2 1").code == 1);
  }

  TEST_CASE("gradcheck passes and signals failures with code 3") {
    Workspace ws;
    Result r = ws.run("gradcheck --seed 11 --trials 3");
    REQUIRE(r.code == 0);
    CHECK(r.out["result"]["passed"] == true);
    CHECK(r.out["result"]["checks"].size() >= 4);
    r = ws.run("gradcheck --module attention --seed 11 --trials 2 --tolerance 1e-300");
    CHECK(r.code == 3);
    CHECK(r.out["result"]["passed"] == false);
    CHECK(ws.run("gradcheck --module nope --seed 1").code == 1);
    CHECK(ws.run("gradcheck").code == 1);
  }

  TEST_CASE("json config supplies options and flags override it") {
    Workspace ws;
    ws.text("p.json", R"([{"a":0,"b":0,"c":4}])");
    ws.text("cfg.json", R"({"command":"synth","planes":")" + ws.path("p.json") +
                            R"(","out":")" + ws.path("o") + R"(","seed":2,"height":20})");
    Result r = ws.run("synth --config " + ws.path("cfg.json") + " --width 30");
    REQUIRE(r.code == 0);
    CHECK(r.out["params"]["height"] == 20);
    CHECK(r.out["params"]["width"] == 30);

    ws.text("bad.json", R"({"planes":"x","out":"y","seed":1,"bogus":3})");
    CHECK(ws.run("synth --config " + ws.path("bad.json")).code == 1);
    ws.text("other.json", R"({"command":"eval"})");
    CHECK(ws.run("synth --config " + ws.path("other.json")).code == 1);
    CHECK(ws.run("synth --config " + ws.path("missing.json")).code == 2);
  }

  TEST_CASE("error exits are machine readable") {
    Workspace ws;
    Result r = ws.run("eval --gt " + ws.path("none.pfm") + " --pred " + ws.path("none.pfm"));
    CHECK(r.code == 2);
    CHECK(r.out["status"] == "error");
    CHECK(r.out["error"]["kind"] == "Io");

    ws.text("junk.pfm", "P7\n1 1\n-1\n");
    r = ws.run("eval --gt " + ws.path("junk.pfm") + " --pred " + ws.path("junk.pfm"));
    CHECK(r.code == 1);
    CHECK(r.out["error"]["kind"] == "MalformedHeader");

    r = ws.run("eval --gt x.pfm");
    CHECK(r.code == 1);
    CHECK(r.out["error"]["kind"] == "usage");
    CHECK(ws.run("").code == 1);
    CHECK(ws.run("propagate --disparity x.pfm --out y.pfm --steps 0").code == 1);
  }
}
