#include "wamim/serialize.hpp"

#include "wamim/errors.hpp"

namespace wamim {

namespace {

std::vector<std::uint32_t> image_dims(const ImageTensor& t) {
  return {static_cast<std::uint32_t>(t.channels), static_cast<std::uint32_t>(t.rows),
          static_cast<std::uint32_t>(t.cols)};
}

ImageTensor read_image_record(const Record& r) {
  if (r.dims.size() != 3) throw FormatError("record '" + r.name + "' is not rank 3");
  ImageTensor t(r.dims[0], r.dims[1], r.dims[2]);
  t.data = r.as_f64();
  return t;
}

}  // namespace

std::string target_record_name(std::size_t k) { return "target_k" + std::to_string(k); }
std::string patch_mask_record_name(std::size_t grid) { return "mask_g" + std::to_string(grid); }
std::string scale_mask_record_name(std::size_t side) { return "mask_s" + std::to_string(side); }

void add_pyramid(TensorContainer& tc, const WaveletPyramid& p) {
  p.validate();
  for (std::size_t l = 1; l <= p.depth(); ++l) {
    for (Orientation o : kOrientations) {
      const ImageTensor& b = p.level(l).band(o);
      tc.add_f64(plane_record_name(l, o), image_dims(b), b.data);
    }
  }
  tc.add_f64(kApproxRecordName, image_dims(p.approx), p.approx.data);
}

WaveletPyramid read_pyramid(const TensorContainer& tc) {
  WaveletPyramid p;
  for (std::size_t l = 1; tc.find(plane_record_name(l, Orientation::H)); ++l) {
    DetailLevel lv;
    for (Orientation o : kOrientations) lv.band(o) = read_image_record(tc.get(plane_record_name(l, o)));
    p.levels.push_back(std::move(lv));
  }
  if (p.levels.empty()) throw FormatError("container holds no pyramid levels");
  p.approx = read_image_record(tc.get(kApproxRecordName));
  p.source_rows = p.levels.front().h.rows * 2;
  p.source_cols = p.levels.front().h.cols * 2;
  try {
    p.validate();
  } catch (const StructureError& e) {
    throw FormatError(std::string("inconsistent pyramid records: ") + e.what());
  }
  return p;
}

void add_targets(TensorContainer& tc, const TargetSet& ts) {
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const TargetEntry& e = ts.entries[k];
    tc.add_f64(target_record_name(k + 1), image_dims(e.values), e.values.data);
    if (!e.stats.empty()) {
      std::vector<double> stats;
      for (const auto& s : e.stats) {
        stats.push_back(s.mean);
        stats.push_back(s.variance);
      }
      tc.add_f64(target_record_name(k + 1) + "_stats",
                 {static_cast<std::uint32_t>(e.stats.size()), 2}, stats);
    }
  }
}

void add_patch_mask(TensorContainer& tc, const PatchMask& pm) {
  const auto g = static_cast<std::uint32_t>(pm.grid);
  tc.add_bool(patch_mask_record_name(pm.grid), {g, g}, pm.flags);
}

void add_scale_mask(TensorContainer& tc, const ScaleMask& sm) {
  const auto s = static_cast<std::uint32_t>(sm.side);
  tc.add_bool(scale_mask_record_name(sm.side), {s, s}, sm.flags);
}

}  // namespace wamim
