#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>

#include "stereoprop/error.hpp"
#include "stereoprop/filtering.hpp"
#include "stereoprop/gradcheck.hpp"
#include "stereoprop/io_formats.hpp"
#include "stereoprop/losses_metrics.hpp"
#include "stereoprop/matching.hpp"
#include "stereoprop/normals.hpp"
#include "stereoprop/propagation.hpp"
#include "stereoprop/synthetic_scenes.hpp"

namespace py = pybind11;
using namespace stereoprop;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// (H, W) arrays map to one channel, (H, W, C) to C channels.
Grid to_grid(const Array& a) {
  if (a.ndim() != 2 && a.ndim() != 3) {
    throw Error(ErrorCode::ShapeMismatch, "expected an (H, W) or (H, W, C) array");
  }
  const auto h = static_cast<std::size_t>(a.shape(0));
  const auto w = static_cast<std::size_t>(a.shape(1));
  const auto c = a.ndim() == 3 ? static_cast<std::size_t>(a.shape(2)) : 1;
  return Grid(h, w, c, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Grid& g, bool squeeze = true) {
  std::vector<py::ssize_t> shape{py::ssize_t(g.height()), py::ssize_t(g.width())};
  if (!squeeze || g.channels() != 1) shape.push_back(py::ssize_t(g.channels()));
  Array out(shape);
  std::copy(g.data().begin(), g.data().end(), out.mutable_data());
  return out;
}

Mask to_mask(const py::array& a) {
  Grid g = to_grid(a.cast<Array>());
  for (double& v : g.data()) v = v != 0.0 ? 1.0 : 0.0;
  return Mask(std::move(g));
}

py::array_t<bool> mask_array(const Mask& m) {
  py::array_t<bool> out({py::ssize_t(m.height()), py::ssize_t(m.width())});
  bool* p = out.mutable_data();
  for (double v : m.grid().data()) *p++ = v != 0.0;
  return out;
}

Bytes to_bytes(const py::bytes& b) {
  const std::string s = b;
  return Bytes(s.begin(), s.end());
}

py::bytes from_bytes(const Bytes& b) {
  return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
}

py::object region_dict(const std::optional<RegionMetrics>& r) {
  if (!r) return py::none();
  py::dict d;
  d["count"] = r->count;
  d["epe"] = r->epe;
  d["p1"] = r->p1;
  d["p3"] = r->p3;
  d["d1"] = r->d1;
  d["bad2"] = r->bad2;
  d["bad4"] = r->bad4;
  d["rmse"] = r->rmse;
  d["avg_err"] = r->avg_err;
  return d;
}

}  // namespace

PYBIND11_MODULE(_stereoprop, m) {
  m.doc() = "Normal-guided stereo refinement";

  py::register_exception<Error>(m, "StereopropError", PyExc_ValueError);

  m.def(
      "gen_planar_scene",
      [](const std::vector<py::dict>& planes, std::size_t height, std::size_t width,
         double noise_sigma, std::uint64_t seed) {
        std::vector<PlaneSpec> specs;
        for (const py::dict& p : planes) {
          PlaneSpec s;
          s.a = p.contains("a") ? p["a"].cast<double>() : 0.0;
          s.b = p.contains("b") ? p["b"].cast<double>() : 0.0;
          s.c = p.contains("c") ? p["c"].cast<double>() : 0.0;
          s.texture_seed = p.contains("texture_seed") ? p["texture_seed"].cast<std::uint64_t>()
                                                      : specs.size() + 1;
          if (p.contains("region")) {
            const auto r = p["region"].cast<std::vector<long>>();
            if (r.size() != 4) throw Error(ErrorCode::InvalidArgument, "region is [y0, x0, y1, x1]");
            s.region = Rect{r[0], r[1], r[2], r[3]};
          }
          specs.push_back(s);
        }
        const SceneBundle b = gen_planar_scene(specs, height, width, noise_sigma, seed);
        py::dict out;
        out["left"] = to_array(b.left);
        out["right"] = to_array(b.right);
        out["disparity"] = to_array(b.disparity_gt.grid());
        out["disparity_right"] = to_array(b.disparity_right_gt.grid());
        out["normals"] = to_array(b.normal_gt.grid(), false);
        out["occlusion"] = mask_array(b.occlusion);
        return out;
      },
      py::arg("planes"), py::arg("height"), py::arg("width"), py::arg("noise_sigma") = 0.0,
      py::arg("seed") = 0,
      "Render a textured slanted-plane stereo pair; the first plane is the background.");

  m.def(
      "normal_from_disparity",
      [](const Array& d) {
        return to_array(normal_from_disparity(DisparityMap(to_grid(d))).grid(), false);
      },
      py::arg("disparity"));

  m.def(
      "sparse_normal_from_disparity",
      [](const Array& d, const py::array& valid) {
        const SparseNormals s = sparse_normal_from_disparity(DisparityMap(to_grid(d)), to_mask(valid));
        return py::make_tuple(to_array(s.normals.grid(), false), mask_array(s.mask));
      },
      py::arg("disparity"), py::arg("valid"));

  m.def(
      "fuse_normal_gt",
      [](const Array& pseudo, const Array& sparse, const py::array& mask) {
        return to_array(fuse_normal_gt(NormalMap(to_grid(pseudo)), NormalMap(to_grid(sparse)),
                                       to_mask(mask))
                            .grid(),
                        false);
      },
      py::arg("pseudo"), py::arg("sparse"), py::arg("mask"));

  m.def(
      "warped_error",
      [](const Array& left, const Array& right, const Array& d) {
        const WarpedError e = warped_error(to_grid(left), to_grid(right), DisparityMap(to_grid(d)));
        return py::make_tuple(to_array(e.error), mask_array(e.valid));
      },
      py::arg("left"), py::arg("right"), py::arg("disparity"));

  m.def(
      "propagate_local",
      [](const Array& d, const Array& a, const Array& c, bool unnormalized) {
        return to_array(propagate_local(to_grid(d), AffinityField(to_grid(a)),
                                        ConfidenceMap(to_grid(c)), {unnormalized}));
      },
      py::arg("disparity"), py::arg("affinity"), py::arg("confidence"),
      py::arg("unnormalized") = false);

  m.def(
      "propagate_nonlocal",
      [](const Array& d, const Array& offsets, const Array& a, const Array& c,
         std::size_t steps, bool unnormalized) {
        return to_array(iterate_propagation(to_grid(d), OffsetField(to_grid(offsets)),
                                            AffinityField(to_grid(a)), ConfidenceMap(to_grid(c)),
                                            steps, {unnormalized}));
      },
      py::arg("disparity"), py::arg("offsets"), py::arg("affinity"), py::arg("confidence"),
      py::arg("steps") = 1, py::arg("unnormalized") = false,
      "Offsets are (H, W, 16) as (dy, dx) pairs; affinity and confidence are (H, W, 8) and (H, W).");

  m.def(
      "heuristic_offsets_from_normal",
      [](const Array& normals, const Array& error, std::size_t radius, double cos_threshold) {
        HeuristicOptions o;
        o.radius = radius;
        o.cos_threshold = cos_threshold;
        const HeuristicGuidance g =
            heuristic_offsets_from_normal(NormalMap(to_grid(normals)), to_grid(error), o);
        return py::make_tuple(to_array(g.offsets.grid(), false),
                              to_array(g.affinities.grid(), false));
      },
      py::arg("normals"), py::arg("warped_error"), py::arg("radius") = 4,
      py::arg("cos_threshold") = 0.995);

  m.def(
      "attention_reweight",
      [](const Array& f, const Array& fe) {
        const Grid g = to_grid(f);
        return to_array(attention_reweight(g, to_grid(fe)), f.ndim() == 2);
      },
      py::arg("features"), py::arg("error_features"));

  m.def(
      "normalize_local_affinity",
      [](const Array& raw, bool softmax) {
        return to_array(normalize_local_affinity(to_grid(raw), softmax
                                                                   ? AffinityNormalization::Softmax
                                                                   : AffinityNormalization::AbsoluteSum)
                            .grid(),
                        false);
      },
      py::arg("raw"), py::arg("softmax") = false);

  m.def(
      "local_affinity_filter",
      [](const Array& f, const Array& affinity) {
        const Grid a = to_grid(affinity);
        const LocalAffinity la(a, window_size_from_channels(a.channels()));
        return to_array(local_affinity_filter(to_grid(f), la), f.ndim() == 2);
      },
      py::arg("features"), py::arg("affinity"),
      "Filter with already normalized (H, W, k*k) window weights.");

  m.def(
      "evaluate",
      [](const Array& gt, const Array& pred, const py::array& valid, py::object occlusion) {
        std::optional<Mask> occ;
        if (!occlusion.is_none()) occ = to_mask(occlusion.cast<py::array>());
        const MetricReport r =
            evaluate(DisparityMap(to_grid(gt)), DisparityMap(to_grid(pred)), to_mask(valid), occ);
        py::dict d;
        d["all"] = region_dict(r.all);
        d["occluded"] = region_dict(r.occluded);
        d["non_occluded"] = region_dict(r.non_occluded);
        return d;
      },
      py::arg("gt"), py::arg("pred"), py::arg("valid"), py::arg("occlusion") = py::none());

  m.def(
      "read_pfm",
      [](const py::bytes& b) {
        const PfmImage img = read_pfm(to_bytes(b));
        return py::make_tuple(to_array(img.grid), mask_array(img.valid), img.scale);
      },
      py::arg("data"));
  m.def(
      "write_pfm", [](const Array& g, double scale) { return from_bytes(write_pfm(to_grid(g), scale)); },
      py::arg("grid"), py::arg("scale") = -1.0);
  m.def(
      "read_kitti_disparity",
      [](const py::bytes& b) {
        const KittiDisparity k = read_kitti_disparity(to_bytes(b));
        return py::make_tuple(to_array(k.disparity.grid()), mask_array(k.valid));
      },
      py::arg("data"));
  m.def(
      "write_kitti_disparity",
      [](const Array& d, const py::array& valid) {
        return from_bytes(write_kitti_disparity(DisparityMap(to_grid(d)), to_mask(valid)));
      },
      py::arg("disparity"), py::arg("valid"));

  m.def(
      "gradcheck",
      [](const std::string& module, std::size_t trials, std::uint64_t seed, double step) {
        py::list out;
        for (const GradientCheck& r : gradcheck(module, trials, seed, step)) {
          py::dict d;
          d["name"] = r.name;
          d["max_rel_error"] = r.max_rel_error;
          d["trials"] = r.trials;
          d["entries"] = r.entries;
          out.append(d);
        }
        return out;
      },
      py::arg("module"), py::arg("trials") = 20, py::arg("seed") = 0, py::arg("step") = 1e-5);
}
