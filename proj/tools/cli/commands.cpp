#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stereoprop/error.hpp"
#include "stereoprop/filtering.hpp"
#include "stereoprop/gradcheck.hpp"
#include "stereoprop/losses_metrics.hpp"
#include "stereoprop/matching.hpp"
#include "stereoprop/normals.hpp"
#include "stereoprop/propagation.hpp"
#include "stereoprop/synthetic_scenes.hpp"

namespace cli {

using namespace stereoprop;

namespace {

json load_json(Run& run, const std::string& role, const fs::path& path) {
  const Bytes bytes = run.read(role, path);
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw ValidationError(role + " is not valid JSON: " + e.what());
  }
}

template <typename T>
T get_number(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ValidationError(std::string("'") + key + "' must be a number");
  return j.at(key).get<T>();
}

// ------------------------------------------------------------------ synth

PlaneSpec parse_plane(const json& p, std::size_t index) {
  if (!p.is_object()) throw ValidationError("plane " + std::to_string(index) + " must be an object");
  PlaneSpec spec;
  spec.a = get_number<double>(p, "a", 0.0);
  spec.b = get_number<double>(p, "b", 0.0);
  spec.c = get_number<double>(p, "c", 0.0);
  spec.texture_seed = get_number<std::uint64_t>(p, "texture_seed", index + 1);
  if (p.contains("region")) {
    const json& r = p.at("region");
    if (!r.is_array() || r.size() != 4) {
      throw ValidationError("plane region must be [y0, x0, y1, x1]");
    }
    spec.region = Rect{r[0].get<long>(), r[1].get<long>(), r[2].get<long>(), r[3].get<long>()};
  } else if (index != 0) {
    throw ValidationError("plane " + std::to_string(index) + " needs a region");
  }
  return spec;
}

json plane_json(const PlaneSpec& p) {
  return {{"a", p.a},
          {"b", p.b},
          {"c", p.c},
          {"region", {p.region.y0, p.region.x0, p.region.y1, p.region.x1}},
          {"texture_seed", p.texture_seed}};
}

void add_synth(CLI::App& app, std::vector<Command>& commands) {
  struct Opts {
    std::string planes, out;
    std::size_t height = 64, width = 96;
    double noise = 0.0;
    std::uint64_t seed = 0;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* sub = app.add_subcommand("synth", "Render a synthetic slanted-plane stereo scene");
  sub->add_option("--planes", o->planes, "JSON list of planes (first is the background)")->required();
  sub->add_option("--out", o->out, "Output directory")->required();
  sub->add_option("--height", o->height, "Image height")->capture_default_str();
  sub->add_option("--width", o->width, "Image width")->capture_default_str();
  sub->add_option("--noise", o->noise, "Gaussian noise sigma added to both views")
      ->capture_default_str();
  sub->add_option("--seed", o->seed, "Noise seed")->required();
  commands.push_back({sub, [o](Run& run) {
    json j = load_json(run, "planes", o->planes);
    if (j.is_object() && j.contains("planes")) j = j.at("planes");
    if (!j.is_array()) throw ValidationError("planes file must hold a list of planes");
    std::vector<PlaneSpec> specs;
    for (std::size_t i = 0; i < j.size(); ++i) specs.push_back(parse_plane(j[i], i));
    if (o->noise < 0.0) throw ValidationError("--noise must be >= 0");

    const SceneBundle s = gen_planar_scene(specs, o->height, o->width, o->noise, o->seed);
    const fs::path dir = o->out;
    const Mask all = Mask::filled(o->height, o->width, true);
    run.write("left", dir / "left.pfm", write_pfm(s.left));
    run.write("right", dir / "right.pfm", write_pfm(s.right));
    run.write("disparity", dir / "disparity.pfm", write_pfm(s.disparity_gt.grid()));
    run.write("disparity_right", dir / "disparity_right.pfm",
              write_pfm(s.disparity_right_gt.grid()));
    run.write("disparity_png", dir / "disparity.png", write_kitti_disparity(s.disparity_gt, all));
    run.write("normal", dir / "normal.png", write_normal_png(s.normal_gt));
    run.write("normal_pfm", dir / "normal.pfm", write_pfm(s.normal_gt.grid()));
    run.write("occlusion", dir / "occlusion.png", write_mask_png(s.occlusion));

    json manifest = {{"height", o->height},
                     {"width", o->width},
                     {"noise_sigma", o->noise},
                     {"seed", o->seed},
                     {"planes", json::array()}};
    for (const auto& p : specs) manifest["planes"].push_back(plane_json(p));
    const std::string text = manifest.dump(2) + "\n";
    run.write("manifest", dir / "manifest.json", Bytes(text.begin(), text.end()));

    run.params() = {{"height", o->height}, {"width", o->width}, {"noise", o->noise},
                    {"seed", o->seed}, {"planes", manifest["planes"]}};
    run.result() = {{"occluded_pixels", s.occlusion.count()}};
  }});
}

// ------------------------------------------------------------------ normals

void add_normal_from_disp(CLI::App& app, std::vector<Command>& commands) {
  struct Opts {
    std::string disparity, out, out_pfm;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* sub = app.add_subcommand("normal-from-disp", "Dense normals from a disparity map");
  sub->add_option("--disparity", o->disparity, "Disparity (PFM or KITTI PNG)")->required();
  sub->add_option("--out", o->out, "Normal map PNG (16-bit RGB)")->required();
  sub->add_option("--out-pfm", o->out_pfm, "Also write the normals as a 3-channel PFM");
  commands.push_back({sub, [o](Run& run) {
    const LoadedDisparity d = load_disparity(run, "disparity", o->disparity);
    const NormalMap n = normal_from_disparity(d.disparity);
    run.write("normal", o->out, write_normal_png(n));
    if (!o->out_pfm.empty()) run.write("normal_pfm", o->out_pfm, write_pfm(n.grid()));
    run.result() = {{"height", n.height()}, {"width", n.width()}};
  }});
}

void add_normal_gt(CLI::App& app, std::vector<Command>& commands) {
  struct Opts {
    std::string pseudo, sparse, out, out_pfm, mask_out, eindex_out;
    double threshold = 1.0;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* sub = app.add_subcommand(
      "normal-gt", "Fuse pseudo and sparse normal supervision into one ground truth");
  sub->add_option("--pseudo", o->pseudo, "Dense pseudo disparity (PFM or KITTI PNG)")->required();
  sub->add_option("--sparse", o->sparse, "Sparse disparity (KITTI PNG or PFM)")->required();
  sub->add_option("--out", o->out, "Fused normal PNG")->required();
  sub->add_option("--out-pfm", o->out_pfm, "Also write the fused normals as a PFM");
  sub->add_option("--mask-out", o->mask_out, "Sparse-normal mask PNG");
  sub->add_option("--eindex-out", o->eindex_out, "Pseudo-vs-sparse disagreement mask PNG");
  sub->add_option("--threshold", o->threshold, "Disagreement threshold in pixels")
      ->capture_default_str();
  commands.push_back({sub, [o](Run& run) {
    const LoadedDisparity pseudo = load_disparity(run, "pseudo", o->pseudo);
    const LoadedDisparity sparse = load_disparity(run, "sparse", o->sparse);
    const NormalMap pseudo_n = normal_from_disparity(pseudo.disparity);
    const SparseNormals sparse_n = sparse_normal_from_disparity(sparse.disparity, sparse.valid);
    const NormalMap fused = fuse_normal_gt(pseudo_n, sparse_n.normals, sparse_n.mask);
    const Mask e = epe_index(pseudo.disparity, sparse.disparity, sparse.valid, o->threshold);
    run.write("normal", o->out, write_normal_png(fused));
    if (!o->out_pfm.empty()) run.write("normal_pfm", o->out_pfm, write_pfm(fused.grid()));
    if (!o->mask_out.empty()) run.write("sparse_mask", o->mask_out, write_mask_png(sparse_n.mask));
    if (!o->eindex_out.empty()) run.write("e_index", o->eindex_out, write_mask_png(e));
    run.params() = {{"threshold", o->threshold}};
    run.result() = {{"sparse_normal_pixels", sparse_n.mask.count()},
                    {"e_index_pixels", e.count()}};
  }});
}

// ------------------------------------------------------------------ warp-error

void add_warp_error(CLI::App& app, std::vector<Command>& commands) {
  struct Opts {
    std::string left, right, disparity, out, valid_out;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* sub = app.add_subcommand("warp-error", "Photometric error of a disparity estimate");
  sub->add_option("--left", o->left, "Left image PFM")->required();
  sub->add_option("--right", o->right, "Right image PFM")->required();
  sub->add_option("--disparity", o->disparity, "Left disparity (PFM or KITTI PNG)")->required();
  sub->add_option("--out", o->out, "Error PFM")->required();
  sub->add_option("--valid-out", o->valid_out, "Warp validity mask PNG");
  commands.push_back({sub, [o](Run& run) {
    const Grid left = load_pfm(run, "left", o->left);
    const Grid right = load_pfm(run, "right", o->right);
    const LoadedDisparity d = load_disparity(run, "disparity", o->disparity);
    const WarpedError e = warped_error(left, right, d.disparity);
    run.write("error", o->out, write_pfm(e.error));
    if (!o->valid_out.empty()) run.write("valid", o->valid_out, write_mask_png(e.valid));
    double sum = 0.0;
    for (double v : e.error.data()) sum += v;
    run.result() = {{"mean_error", sum / double(e.error.size())},
                    {"valid_pixels", e.valid.count()}};
  }});
}

// ------------------------------------------------------------------ propagate

// Overlay: disparity in gray, anchors red, sampled points green.
Grid offsets_overlay(const Grid& d, const OffsetField& offsets, const AffinityField& a,
                     std::size_t stride) {
  const std::size_t h = d.height(), w = d.width();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : d.data()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = hi > lo ? hi - lo : 1.0;
  Grid rgb(h, w, 3);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < 3; ++c) rgb(y, x, c) = 40.0 + 160.0 * (d(y, x) - lo) / span;
  auto paint = [&](long y, long x, double r, double g, double b) {
    if (y < 0 || x < 0 || y >= long(h) || x >= long(w)) return;
    rgb(std::size_t(y), std::size_t(x), 0) = r;
    rgb(std::size_t(y), std::size_t(x), 1) = g;
    rgb(std::size_t(y), std::size_t(x), 2) = b;
  };
  for (std::size_t y = stride / 2; y < h; y += stride)
    for (std::size_t x = stride / 2; x < w; x += stride) {
      for (std::size_t i = 0; i < kNeighbors; ++i) {
        if (a(y, x, i) == 0.0) continue;
        const auto p = neighbor_position(offsets, y, x, i);
        paint(std::lround(p[0]), std::lround(p[1]), 0.0, 255.0, 0.0);
      }
      paint(long(y), long(x), 255.0, 0.0, 0.0);
    }
  return rgb;
}

void add_propagate(CLI::App& app, std::vector<Command>& commands) {
  struct Opts {
    std::string disparity, normals, confidence, error, left, right, offsets, affinity;
    std::string out, offsets_png, offsets_out, affinity_out;
    std::size_t steps = 1, radius = 4, vis_stride = 8;
    double cos_threshold = 0.995, confidence_tau = 0.02;
    bool unnormalized = false, local = false;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* sub = app.add_subcommand("propagate", "Refine a disparity map by spatial propagation");
  sub->add_option("--disparity", o->disparity, "Coarse disparity (PFM or KITTI PNG)")->required();
  sub->add_option("--out", o->out, "Refined disparity PFM")->required();
  sub->add_option("--normals", o->normals,
                  "Normal map (PNG or 3-channel PFM); default: from the disparity");
  sub->add_option("--confidence", o->confidence,
                  "Confidence PFM in [0, 1]; default: exp(-error / tau)");
  sub->add_option("--error", o->error, "Warped error PFM; default: from --left/--right");
  sub->add_option("--left", o->left, "Left image PFM (for the warped error)");
  sub->add_option("--right", o->right, "Right image PFM (for the warped error)");
  sub->add_option("--offsets", o->offsets,
                  "Offsets as a stacked 16-plane PFM; default: heuristic from normals");
  sub->add_option("--affinity", o->affinity, "Affinities as a stacked 8-plane PFM");
  sub->add_option("--steps", o->steps, "Propagation iterations")->capture_default_str();
  sub->add_option("--radius", o->radius, "Heuristic offset search radius")->capture_default_str();
  sub->add_option("--cos-threshold", o->cos_threshold, "Normal agreement threshold")
      ->capture_default_str();
  sub->add_option("--confidence-tau", o->confidence_tau, "Error scale of the default confidence")
      ->capture_default_str();
  sub->add_flag("--unnormalized", o->unnormalized, "Skip the affinity normalization");
  sub->add_flag("--local", o->local, "Canonical 3x3 neighbors, no offsets");
  sub->add_option("--offsets-png", o->offsets_png, "Sampled-point visualization PNG");
  sub->add_option("--vis-stride", o->vis_stride, "Anchor spacing in the visualization")
      ->capture_default_str();
  sub->add_option("--offsets-out", o->offsets_out, "Write the offsets used (stacked PFM)");
  sub->add_option("--affinity-out", o->affinity_out, "Write the affinities used (stacked PFM)");
  commands.push_back({sub, [o](Run& run) {
    if (o->steps < 1) throw ValidationError("--steps must be >= 1");
    if (o->radius < 1) throw ValidationError("--radius must be >= 1");
    if (o->vis_stride < 1) throw ValidationError("--vis-stride must be >= 1");
    if (!(o->confidence_tau > 0.0)) throw ValidationError("--confidence-tau must be > 0");
    if (o->affinity.empty() != o->offsets.empty() && !o->local) {
      throw ValidationError("--offsets and --affinity must be given together");
    }

    const LoadedDisparity d = load_disparity(run, "disparity", o->disparity);
    const std::size_t h = d.disparity.height(), w = d.disparity.width();

    Grid error;
    const bool need_error = o->confidence.empty() || o->affinity.empty();
    if (!o->error.empty()) {
      error = load_pfm(run, "error", o->error);
    } else if (need_error) {
      if (o->left.empty() || o->right.empty()) {
        throw ValidationError("give --error, or --left and --right, to derive the guidance");
      }
      error = warped_error(load_pfm(run, "left", o->left), load_pfm(run, "right", o->right),
                           d.disparity)
                  .error;
    }

    ConfidenceMap confidence;
    if (!o->confidence.empty()) {
      confidence = ConfidenceMap(load_pfm(run, "confidence", o->confidence));
    } else {
      Grid c(error.height(), error.width());
      for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] = std::exp(-error.data()[i] / o->confidence_tau);
      confidence = ConfidenceMap(std::move(c));
    }

    OffsetField offsets;
    AffinityField affinity;
    if (!o->affinity.empty()) {
      affinity = AffinityField(unstack_planes(load_pfm(run, "affinity", o->affinity), kNeighbors));
      offsets = o->offsets.empty()
                    ? OffsetField::zeros(h, w)
                    : OffsetField(unstack_planes(load_pfm(run, "offsets", o->offsets), 2 * kNeighbors));
    } else {
      const NormalMap normals = o->normals.empty() ? normal_from_disparity(d.disparity)
                                                   : load_normals(run, "normals", o->normals);
      HeuristicOptions opts;
      opts.radius = o->local ? 1 : o->radius;
      opts.cos_threshold = o->cos_threshold;
      HeuristicGuidance g = heuristic_offsets_from_normal(normals, error, opts);
      offsets = std::move(g.offsets);
      affinity = std::move(g.affinities);
    }
    if (o->local) offsets = OffsetField::zeros(h, w);

    const PropagationOptions popts{o->unnormalized};
    Grid refined = d.disparity.grid();
    for (std::size_t s = 0; s < o->steps; ++s) {
      refined = o->local ? propagate_local(refined, affinity, confidence, popts)
                         : propagate_nonlocal(refined, offsets, affinity, confidence, popts);
    }
    run.write("disparity", o->out, write_pfm(refined));
    if (!o->offsets_png.empty()) {
      run.write("offsets_png", o->offsets_png,
                write_rgb8_png(offsets_overlay(d.disparity.grid(), offsets, affinity, o->vis_stride)));
    }
    if (!o->offsets_out.empty()) run.write("offsets", o->offsets_out, write_pfm(stack_planes(offsets.grid())));
    if (!o->affinity_out.empty()) run.write("affinity", o->affinity_out, write_pfm(stack_planes(affinity.grid())));

    run.params() = {{"steps", o->steps},
                    {"radius", o->radius},
                    {"cos_threshold", o->cos_threshold},
                    {"confidence_tau", o->confidence_tau},
                    {"unnormalized", o->unnormalized},
                    {"local", o->local}};
    double change = 0.0;
    for (std::size_t i = 0; i < refined.size(); ++i) {
      change += std::abs(refined.data()[i] - d.disparity.grid().data()[i]);
    }
    run.result() = {{"mean_abs_change", change / double(refined.size())}};
  }});
}

// ------------------------------------------------------------------ filter

void add_filter(CLI::App& app, std::vector<Command>& commands) {
  struct Opts {
    std::string features, attention, affinity, out, normalization = "abs";
    std::size_t k = 3;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* sub = app.add_subcommand("filter", "Error attention and local affinity filtering");
  sub->add_option("--features", o->features, "Feature PFM (1 or 3 channels)")->required();
  sub->add_option("--attention", o->attention, "Error feature PFM (1 channel or matching)");
  sub->add_option("--affinity", o->affinity, "Raw affinities as a stacked k*k-plane PFM")
      ->required();
  sub->add_option("--k", o->k, "Window size (odd)")->capture_default_str();
  sub->add_option("--normalization", o->normalization, "abs or softmax")
      ->check(CLI::IsMember({"abs", "softmax"}))
      ->capture_default_str();
  sub->add_option("--out", o->out, "Filtered feature PFM")->required();
  commands.push_back({sub, [o](Run& run) {
    if (o->k % 2 == 0) throw ValidationError("--k must be odd");
    Grid f = load_pfm(run, "features", o->features);
    if (!o->attention.empty()) f = attention_reweight(f, load_pfm(run, "attention", o->attention));
    const Grid raw = unstack_planes(load_pfm(run, "affinity", o->affinity), o->k * o->k);
    const LocalAffinity a = normalize_local_affinity(
        raw, o->normalization == "softmax" ? AffinityNormalization::Softmax
                                           : AffinityNormalization::AbsoluteSum);
    run.write("features", o->out, write_pfm(local_affinity_filter(f, a)));
    run.params() = {{"k", o->k}, {"normalization", o->normalization},
                    {"attention", !o->attention.empty()}};
  }});
}

// ------------------------------------------------------------------ loss

void add_loss(CLI::App& app, std::vector<Command>& commands) {
  struct Opts {
    std::string manifest;
    LossWeights w;
    std::vector<double> scale;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* sub = app.add_subcommand("loss", "Multi-scale training loss from a manifest");
  sub->add_option("--manifest", o->manifest, "JSON manifest with four scale entries")->required();
  sub->add_option("--lambda-d", o->w.disparity, "Disparity weight")->capture_default_str();
  sub->add_option("--lambda-n", o->w.normal, "Normal weight")->capture_default_str();
  sub->add_option("--lambda-c", o->w.confidence, "Confidence weight")->capture_default_str();
  sub->add_option("--lambda-scale", o->scale, "Four per-scale weights")->expected(4);
  sub->add_option("--c1", o->w.c1, "Low-error confidence threshold")->capture_default_str();
  sub->add_option("--c2", o->w.c2, "High-error confidence threshold")->capture_default_str();
  commands.push_back({sub, [o](Run& run) {
    LossWeights w = o->w;
    if (!o->scale.empty()) std::copy(o->scale.begin(), o->scale.end(), w.scale.begin());
    try {
      w.validate();
    } catch (const Error& e) {
      throw ValidationError(e.what());
    }
    const json m = load_json(run, "manifest", o->manifest);
    const json scales = m.is_object() && m.contains("scales") ? m.at("scales") : m;
    if (!scales.is_array() || scales.size() != 4) {
      throw ValidationError("manifest needs exactly four scale entries");
    }
    const fs::path base = fs::path(o->manifest).parent_path();
    auto path_of = [&](const json& s, const char* key) { return base / s.at(key).get<std::string>(); };

    std::array<ScaleTerms, 4> terms{};
    json per_scale = json::array();
    for (std::size_t i = 0; i < 4; ++i) {
      const json& s = scales[i];
      if (!s.is_object()) throw ValidationError("scale entries must be objects");
      const std::string tag = "scale" + std::to_string(i) + ".";
      ScaleTerms& t = terms[i];
      if (s.contains("disparity_gt")) {
        const LoadedDisparity gt = load_disparity(run, tag + "disparity_gt", path_of(s, "disparity_gt"));
        const LoadedDisparity pred =
            load_disparity(run, tag + "disparity_pred", path_of(s, "disparity_pred"));
        Mask valid = gt.valid;
        if (s.contains("valid")) valid = valid & load_mask(run, tag + "valid", path_of(s, "valid"));
        t.disparity = disparity_loss(gt.disparity, pred.disparity, valid);
        if (s.contains("confidence")) {
          const ConfidenceMap c(load_pfm(run, tag + "confidence", path_of(s, "confidence")));
          t.confidence = confidence_loss(c, gt.disparity, pred.disparity, valid, w.c1, w.c2);
        }
        if (s.contains("normal_gt")) {
          t.normal = normal_loss(load_normals(run, tag + "normal_gt", path_of(s, "normal_gt")),
                                 load_normals(run, tag + "normal_pred", path_of(s, "normal_pred")));
        }
      } else {
        t.disparity = get_number<double>(s, "disparity", 0.0);
        t.normal = get_number<double>(s, "normal", 0.0);
        t.confidence = get_number<double>(s, "confidence", 0.0);
      }
      per_scale.push_back({{"disparity", t.disparity}, {"normal", t.normal},
                           {"confidence", t.confidence}});
    }
    run.params() = {{"lambda_d", w.disparity}, {"lambda_n", w.normal},
                    {"lambda_c", w.confidence}, {"lambda_scale", w.scale},
                    {"c1", w.c1}, {"c2", w.c2}};
    run.result() = {{"total", total_loss(terms, w)}, {"scales", per_scale}};
  }});
}

// ------------------------------------------------------------------ eval

json region_json(const std::optional<RegionMetrics>& r) {
  if (!r) return nullptr;
  return {{"count", r->count}, {"epe", r->epe},   {"p1", r->p1},     {"p3", r->p3},
          {"d1", r->d1},       {"bad2", r->bad2}, {"bad4", r->bad4}, {"rmse", r->rmse},
          {"avg_err", r->avg_err}};
}

void add_eval(CLI::App& app, std::vector<Command>& commands) {
  struct Opts {
    std::string gt, pred, valid, occlusion;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* sub = app.add_subcommand("eval", "Disparity metrics as a JSON report");
  sub->add_option("--gt", o->gt, "Ground truth (PFM or KITTI PNG)")->required();
  sub->add_option("--pred", o->pred, "Prediction (PFM or KITTI PNG)")->required();
  sub->add_option("--valid", o->valid, "Extra evaluation mask PNG");
  sub->add_option("--occlusion", o->occlusion, "Occlusion mask PNG (enables region split)");
  commands.push_back({sub, [o](Run& run) {
    const LoadedDisparity gt = load_disparity(run, "gt", o->gt);
    const LoadedDisparity pred = load_disparity(run, "pred", o->pred);
    Mask valid = gt.valid;
    if (!o->valid.empty()) valid = valid & load_mask(run, "valid", o->valid);
    std::optional<Mask> occlusion;
    if (!o->occlusion.empty()) occlusion = load_mask(run, "occlusion", o->occlusion);
    const MetricReport r = evaluate(gt.disparity, pred.disparity, valid, occlusion);
    run.result() = {{"all", region_json(r.all)},
                    {"occluded", region_json(r.occluded)},
                    {"non_occluded", region_json(r.non_occluded)}};
  }});
}

// ------------------------------------------------------------------ gradcheck

void add_gradcheck(CLI::App& app, std::vector<Command>& commands) {
  struct Opts {
    std::string module = "all";
    std::size_t trials = 20;
    std::uint64_t seed = 0;
    double step = 1e-5, tolerance = 1e-4;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* sub = app.add_subcommand("gradcheck", "Finite-difference check of backward passes");
  std::vector<std::string> modules = gradcheck_modules();
  modules.push_back("all");
  sub->add_option("--module", o->module, "Module to check")
      ->check(CLI::IsMember(modules))
      ->capture_default_str();
  sub->add_option("--trials", o->trials, "Random instances per module")->capture_default_str();
  sub->add_option("--seed", o->seed, "Instance seed")->required();
  sub->add_option("--step", o->step, "Central difference step")->capture_default_str();
  sub->add_option("--tolerance", o->tolerance, "Maximum relative error")->capture_default_str();
  commands.push_back({sub, [o](Run& run) {
    if (o->trials < 1) throw ValidationError("--trials must be >= 1");
    if (!(o->step > 0.0)) throw ValidationError("--step must be > 0");
    const std::vector<std::string> modules =
        o->module == "all" ? gradcheck_modules() : std::vector<std::string>{o->module};
    json checks = json::array();
    bool passed = true;
    for (const std::string& m : modules) {
      for (const GradientCheck& r : gradcheck(m, o->trials, o->seed, o->step)) {
        const bool ok = r.max_rel_error < o->tolerance;
        passed = passed && ok;
        checks.push_back({{"name", r.name}, {"max_rel_error", r.max_rel_error},
                          {"trials", r.trials}, {"entries", r.entries}, {"passed", ok}});
      }
    }
    run.params() = {{"module", o->module}, {"trials", o->trials}, {"seed", o->seed},
                    {"step", o->step}, {"tolerance", o->tolerance}};
    run.result() = {{"passed", passed}, {"checks", checks}};
    if (!passed) run.set_exit_code(kExitCheckFailed);
  }});
}

}  // namespace

std::vector<Command> register_commands(CLI::App& app) {
  std::vector<Command> commands;
  add_synth(app, commands);
  add_normal_from_disp(app, commands);
  add_normal_gt(app, commands);
  add_warp_error(app, commands);
  add_propagate(app, commands);
  add_filter(app, commands);
  add_loss(app, commands);
  add_eval(app, commands);
  add_gradcheck(app, commands);
  return commands;
}

}  // namespace cli
