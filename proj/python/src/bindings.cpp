#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <sstream>

#include "wamim/commands.hpp"
#include "wamim/config.hpp"
#include "wamim/dwt.hpp"
#include "wamim/errors.hpp"
#include "wamim/loss.hpp"
#include "wamim/masking.hpp"
#include "wamim/model.hpp"
#include "wamim/random.hpp"
#include "wamim/targets.hpp"
#include "wamim/trainer.hpp"
#include "wamim/verify.hpp"

namespace py = pybind11;
using namespace wamim;

namespace {

using F64 = py::array_t<double, py::array::c_style | py::array::forcecast>;
using U8 = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

// (C, H, W) arrays; a 2D array is read as a single channel.
ImageTensor to_image(const F64& a) {
  if (a.ndim() != 2 && a.ndim() != 3) throw DimensionError("expected a (C, H, W) or (H, W) array");
  const std::size_t c = a.ndim() == 3 ? a.shape(0) : 1;
  const std::size_t h = a.shape(a.ndim() - 2), w = a.shape(a.ndim() - 1);
  ImageTensor img(c, h, w);
  std::memcpy(img.data.data(), a.data(), img.data.size() * sizeof(double));
  return img;
}

F64 from_image(const ImageTensor& t) {
  F64 out({t.channels, t.rows, t.cols});
  std::memcpy(out.mutable_data(), t.data.data(), t.data.size() * sizeof(double));
  return out;
}

F64 from_plane(const Plane& p) {
  F64 out({p.rows, p.cols});
  std::memcpy(out.mutable_data(), p.data.data(), p.data.size() * sizeof(double));
  return out;
}

std::vector<std::uint8_t> square_flags(const U8& a, std::size_t& side) {
  if (a.ndim() != 2 || a.shape(0) != a.shape(1)) throw DimensionError("expected a square mask");
  side = a.shape(0);
  return {a.data(), a.data() + a.size()};
}

U8 from_flags(std::size_t side, const std::vector<std::uint8_t>& flags) {
  U8 out({side, side});
  std::memcpy(out.mutable_data(), flags.data(), flags.size());
  return out;
}

py::dict pyramid_to_dict(const WaveletPyramid& p) {
  py::list levels;
  for (const auto& lv : p.levels) {
    py::dict d;
    d["H"] = from_image(lv.h);
    d["V"] = from_image(lv.v);
    d["D"] = from_image(lv.d);
    levels.append(d);
  }
  py::dict out;
  out["levels"] = levels;
  out["approx"] = from_image(p.approx);
  return out;
}

WaveletPyramid pyramid_from_dict(const py::dict& d) {
  WaveletPyramid p;
  p.approx = to_image(d["approx"].cast<F64>());
  for (const auto& item : d["levels"].cast<py::list>()) {
    const auto lv = item.cast<py::dict>();
    p.levels.push_back({to_image(lv["H"].cast<F64>()), to_image(lv["V"].cast<F64>()),
                        to_image(lv["D"].cast<F64>())});
  }
  if (p.levels.empty()) throw StructureError("pyramid has no detail levels");
  p.source_rows = p.levels[0].h.rows * 2;
  p.source_cols = p.levels[0].h.cols * 2;
  p.validate();
  return p;
}

py::dict report_to_dict(const LossReport& r) {
  py::list levels;
  for (const auto& lv : r.levels) {
    py::dict d;
    d["mean"] = lv.mean;
    d["masked"] = lv.masked;
    levels.append(d);
  }
  py::dict out;
  out["levels"] = levels;
  out["weights"] = r.weights;
  out["total"] = r.total;
  return out;
}

py::dict params_to_dict(const ModelParams& ps) {
  py::dict out;
  for (const auto& e : ps.entries()) {
    F64 a(e.value.shape);
    std::memcpy(a.mutable_data(), e.value.data.data(), e.value.data.size() * sizeof(double));
    out[py::str(e.name)] = a;
  }
  return out;
}

RunConfig config_from(const std::optional<std::filesystem::path>& path,
                      std::optional<std::uint64_t> seed) {
  return resolve_config(path, seed);
}

// A run configuration with its initialized parameters. Targets come from the
// image by the configured wavelet selection.
class Model {
 public:
  Model(std::optional<std::filesystem::path> config, std::uint64_t seed)
      : cfg_(resolve_config(config, std::nullopt)),
        model_(cfg_.model_config()),
        params_(init_params(model_, seed)) {}

  py::dict params() const { return params_to_dict(params_); }
  std::size_t grid() const { return model_.grid(); }

  py::list predict(const F64& image, const U8& mask) const {
    py::list out;
    for (const auto& p : wamim::predict(params_, model_, to_image(image), patch_mask(mask))) {
      out.append(from_image(p));
    }
    return out;
  }

  py::dict loss(const F64& image, const U8& mask) const {
    const ImageTensor img = to_image(image);
    return report_to_dict(forward_loss(params_, model_, img, patch_mask(mask), targets(img),
                                       cfg_.metric, cfg_.weights));
  }

  py::tuple loss_and_grad(const F64& image, const U8& mask) const {
    const ImageTensor img = to_image(image);
    const LossAndGrad lg =
        grad(params_, model_, img, patch_mask(mask), targets(img), cfg_.metric, cfg_.weights);
    return py::make_tuple(report_to_dict(lg.report), params_to_dict(lg.grads));
  }

 private:
  PatchMask patch_mask(const U8& mask) const {
    std::size_t side = 0;
    auto flags = square_flags(mask, side);
    if (side != model_.grid()) throw DimensionError("mask side must equal the patch grid");
    return PatchMask::from_flags(side, std::move(flags));
  }

  TargetSet targets(const ImageTensor& img) const {
    TargetSet ts = build_targets(dwt2_multi(img, cfg_.levels), cfg_.level_selection());
    return cfg_.normalize ? normalize_targets(ts, cfg_.norm_epsilon) : ts;
  }

  RunConfig cfg_;
  ModelConfig model_;
  ModelParams params_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Wavelet-target masked image modeling core";

  auto base = py::register_exception<Error>(m, "Error", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<StructureError>(m, "StructureError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DegenerateError>(m, "DegenerateError", base.ptr());
  py::register_exception<GradientError>(m, "GradientError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  m.def(
      "dwt_level",
      [](const F64& plane) {
        if (plane.ndim() != 2) throw DimensionError("expected a 2D plane");
        const Plane p(plane.shape(0), plane.shape(1),
                      std::vector<double>(plane.data(), plane.data() + plane.size()));
        const LevelBands b = dwt2_level(p);
        return py::make_tuple(from_plane(b.ll), from_plane(b.h), from_plane(b.v), from_plane(b.d));
      },
      py::arg("plane"), "One analysis step; returns (ll, h, v, d).");

  m.def(
      "dwt", [](const F64& image, std::size_t levels) { return pyramid_to_dict(dwt2_multi(to_image(image), levels)); },
      py::arg("image"), py::arg("levels"),
      "Multi-level Haar pyramid: {'levels': [{'H','V','D'} finest first], 'approx'}.");
  m.def(
      "idwt", [](const py::dict& p) { return from_image(idwt2_multi(pyramid_from_dict(p))); },
      py::arg("pyramid"));

  m.def(
      "build_targets",
      [](const F64& image, std::size_t levels, std::vector<std::size_t> selected,
         std::vector<std::size_t> taps, std::vector<double> weights, bool approx, bool normalize,
         double epsilon) {
        const LevelSelection sel{std::move(selected), std::move(taps), std::move(weights), approx};
        TargetSet ts = build_targets(dwt2_multi(to_image(image), levels), sel);
        if (normalize) ts = normalize_targets(ts, epsilon);
        py::list out;
        for (const auto& e : ts.entries) out.append(from_image(e.values));
        return out;
      },
      py::arg("image"), py::arg("levels"), py::arg("selected_levels"), py::arg("taps"),
      py::arg("weights"), py::arg("attach_approximation") = true, py::arg("normalize") = true,
      py::arg("epsilon") = kDefaultNormEpsilon);

  m.def("mask_target_count", &mask_target_count, py::arg("grid"), py::arg("ratio"));
  m.def("derive_seed", &derive_seed, py::arg("seed"), py::arg("index"));
  m.def(
      "gen_block_mask",
      [](std::size_t grid, double ratio, std::size_t block, std::uint64_t seed) {
        return from_flags(grid, gen_block_mask(grid, ratio, block, seed).flags);
      },
      py::arg("grid"), py::arg("ratio"), py::arg("block") = kDefaultBlockSide, py::arg("seed") = 0);
  m.def(
      "rescale_mask",
      [](const U8& mask, std::size_t side) {
        std::size_t g = 0;
        auto flags = square_flags(mask, g);
        return from_flags(side, rescale_mask(PatchMask::from_flags(g, std::move(flags)), side).flags);
      },
      py::arg("mask"), py::arg("side"));

  m.def(
      "masked_distance",
      [](const F64& pred, const F64& target, const U8& mask, const std::string& metric) {
        std::size_t side = 0;
        ScaleMask sm;
        sm.flags = square_flags(mask, side);
        sm.side = side;
        const LevelDistance d = masked_distance(to_image(pred), to_image(target), sm, parse_metric(metric));
        return py::make_tuple(d.mean, d.masked);
      },
      py::arg("pred"), py::arg("target"), py::arg("mask"), py::arg("metric") = "l2",
      "Returns (mean over masked cells and channels, masked cell count).");

  py::class_<Model>(m, "Model")
      .def(py::init<std::optional<std::filesystem::path>, std::uint64_t>(),
           py::arg("config") = std::nullopt, py::arg("seed") = 0)
      .def_property_readonly("grid", &Model::grid)
      .def("params", &Model::params)
      .def("predict", &Model::predict, py::arg("image"), py::arg("mask"))
      .def("loss", &Model::loss, py::arg("image"), py::arg("mask"))
      .def("loss_and_grad", &Model::loss_and_grad, py::arg("image"), py::arg("mask"));

  m.def(
      "config_ini",
      [](std::optional<std::filesystem::path> path, std::optional<std::uint64_t> seed) {
        return config_from(path, seed).to_ini();
      },
      py::arg("config") = std::nullopt, py::arg("seed") = std::nullopt,
      "Canonical INI text of the resolved configuration.");

  m.def(
      "verify",
      [](const std::string& suite, std::uint64_t seed) {
        std::ostringstream log;
        bool ok = true;
        for (const auto& r : run_verify(suite, seed)) {
          print_report(log, r);
          ok = ok && r.passed();
        }
        return py::make_tuple(ok, log.str());
      },
      py::arg("suite") = "all", py::arg("seed") = 0, "Returns (passed, report text).");

  // Command wrappers return (exit code, log text), as the CLI would print.
  m.def(
      "cli_dwt",
      [](std::filesystem::path input, std::filesystem::path out, std::optional<std::size_t> levels,
         bool viz, bool inverse, std::optional<std::filesystem::path> config) {
        std::ostringstream log;
        const int code = cmd_dwt({input, levels, out, viz, inverse}, config_from(config, std::nullopt), log);
        return py::make_tuple(code, log.str());
      },
      py::arg("input"), py::arg("out"), py::arg("levels") = std::nullopt, py::arg("viz") = false,
      py::arg("inverse") = false, py::arg("config") = std::nullopt);
  m.def(
      "cli_targets",
      [](std::filesystem::path out, std::optional<std::filesystem::path> input,
         std::optional<std::filesystem::path> config, std::optional<std::uint64_t> seed) {
        std::ostringstream log;
        const int code = cmd_targets(input, config_from(config, seed), out, log);
        return py::make_tuple(code, log.str());
      },
      py::arg("out"), py::arg("input") = std::nullopt, py::arg("config") = std::nullopt,
      py::arg("seed") = std::nullopt);
  m.def(
      "cli_synth",
      [](std::filesystem::path out, std::optional<std::filesystem::path> config,
         std::optional<std::uint64_t> seed) {
        std::ostringstream log;
        const int code = cmd_synth(config_from(config, seed), out, log);
        return py::make_tuple(code, log.str());
      },
      py::arg("out"), py::arg("config") = std::nullopt, py::arg("seed") = std::nullopt);
  m.def(
      "cli_pretrain",
      [](std::filesystem::path out, std::optional<std::filesystem::path> config,
         std::optional<std::uint64_t> seed, std::optional<std::filesystem::path> resume,
         std::optional<std::uint64_t> stop_at) {
        std::ostringstream log;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cmd_pretrain({out, resume, stop_at, true}, config_from(config, seed), log);
        }
        return py::make_tuple(code, log.str());
      },
      py::arg("out"), py::arg("config") = std::nullopt, py::arg("seed") = std::nullopt,
      py::arg("resume") = std::nullopt, py::arg("stop_at") = std::nullopt);
}
