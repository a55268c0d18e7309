// Acceptance gate. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. argv[1] is a scratch directory.
//
// Every expected value here comes from code in this file (explicit Haar
// basis images and the rescale rules written out cell by cell) or from the
// stated target geometry, never from the library under test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "wamim/commands.hpp"
#include "wamim/config.hpp"
#include "wamim/container.hpp"
#include "wamim/dwt.hpp"
#include "wamim/loss.hpp"
#include "wamim/masking.hpp"
#include "wamim/model.hpp"
#include "wamim/random.hpp"
#include "wamim/reference_model.hpp"
#include "wamim/targets.hpp"
#include "wamim/trainer.hpp"

#ifndef WAMIM_SOURCE_DIR
#define WAMIM_SOURCE_DIR "."
#endif

using namespace wamim;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

ImageTensor random_image(std::size_t c, std::size_t side, Rng& rng) {
  ImageTensor img(c, side, side);
  for (double& v : img.data) v = rng.uniform(-1.0, 1.0);
  return img;
}

double sum_squares(const ImageTensor& t) {
  long double s = 0;
  for (double v : t.data) s += static_cast<long double>(v) * v;
  return static_cast<double>(s);
}

double pyramid_sum_squares(const WaveletPyramid& p) {
  double s = sum_squares(p.approx);
  for (const auto& lv : p.levels) s += sum_squares(lv.h) + sum_squares(lv.v) + sum_squares(lv.d);
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Relative paths and contents of every regular file under root.
std::vector<std::pair<std::string, std::string>> tree(const fs::path& root) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.emplace_back(fs::relative(e.path(), root).string(), slurp(e.path()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool bits_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

// ---------------------------------------------------------------------------
// Criteria 1 and 2 share one corpus.

Outcome roundtrip(std::vector<ImageTensor>& corpus) {
  Rng rng(1001);
  corpus.clear();
  for (int i = 0; i < 100; ++i) corpus.push_back(random_image(3, 32, rng));
  const auto t0 = Clock::now();
  double worst = 0;
  for (const auto& img : corpus) {
    const ImageTensor back = idwt2_multi(dwt2_multi(img, 3));
    for (std::size_t i = 0; i < img.data.size(); ++i) {
      worst = std::max(worst, std::abs(back.data[i] - img.data[i]));
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-10 && secs < 5.0,
          fmt("max abs error %.3e (tol 1e-10), %.3f s (limit 5 s)", worst, secs)};
}

Outcome parseval(const std::vector<ImageTensor>& corpus) {
  double worst = 0;
  for (const auto& img : corpus) {
    const double e = sum_squares(img);
    worst = std::max(worst, std::abs(pyramid_sum_squares(dwt2_multi(img, 3)) - e) / e);
  }
  return {worst <= 1e-12, fmt("max relative energy mismatch %.3e (tol 1e-12)", worst)};
}

// ---------------------------------------------------------------------------
// Criterion 3: coefficients as inner products with explicit basis images.
// A level-l function lives on a 2^l block; within it H flips sign between
// the left and right halves, V between the top and bottom halves, D does
// both, and the scaling function is flat. Amplitude 2^-l gives unit norm.

double basis_value(int kind, std::size_t level, std::size_t y, std::size_t x) {
  const std::size_t half = std::size_t{1} << (level - 1);
  const double amp = std::ldexp(1.0, -static_cast<int>(level));
  const double sx = (x < half) ? 1.0 : -1.0;
  const double sy = (y < half) ? 1.0 : -1.0;
  switch (kind) {
    case 0: return amp * sx;
    case 1: return amp * sy;
    case 2: return amp * sx * sy;
    default: return amp;
  }
}

double inner(const ImageTensor& img, std::size_t ch, int kind, std::size_t level, std::size_t r,
             std::size_t c) {
  const std::size_t b = std::size_t{1} << level;
  double s = 0;
  for (std::size_t y = 0; y < b; ++y) {
    for (std::size_t x = 0; x < b; ++x) s += img.at(ch, r * b + y, c * b + x) * basis_value(kind, level, y, x);
  }
  return s;
}

Outcome oracle() {
  Rng rng(3003);
  double worst = 0;
  std::size_t compared = 0;
  for (std::size_t side : {8, 16}) {
    for (std::size_t depth = 1; depth <= 3; ++depth) {
      for (int trial = 0; trial < 4; ++trial) {
        const ImageTensor img = random_image(3, side, rng);
        const WaveletPyramid p = dwt2_multi(img, depth);
        for (std::size_t ch = 0; ch < 3; ++ch) {
          for (std::size_t l = 1; l <= depth; ++l) {
            const std::size_t n = side >> l;
            for (int kind = 0; kind < 3; ++kind) {
              const ImageTensor& band = p.level(l).band(kOrientations[kind]);
              for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t c = 0; c < n; ++c) {
                  worst = std::max(worst, std::abs(band.at(ch, r, c) - inner(img, ch, kind, l, r, c)));
                  ++compared;
                }
              }
            }
          }
          const std::size_t n = side >> depth;
          for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) {
              worst = std::max(worst, std::abs(p.approx.at(ch, r, c) - inner(img, ch, 3, depth, r, c)));
              ++compared;
            }
          }
        }
      }
    }
  }
  return {worst < 1e-10, fmt("%.0f coefficients, max abs difference %.3e (tol 1e-10)",
                             static_cast<double>(compared), worst)};
}

// ---------------------------------------------------------------------------

Outcome hand_case() {
  const LevelBands b = dwt2_level(Plane(2, 2, std::vector<double>{1, 3, 5, 7}));
  const bool ok = b.ll.data[0] == 8.0 && b.h.data[0] == -2.0 && b.v.data[0] == -4.0 &&
                  b.d.data[0] == 0.0;
  return {ok, fmt("(ll, h, v, d) = (%g, %g, %g, %g), expected (8, -2, -4, 0)", b.ll.data[0],
                  b.h.data[0], b.v.data[0], b.d.data[0])};
}

// ---------------------------------------------------------------------------

Outcome vit_structure(const fs::path& scratch) {
  const RunConfig cfg = load_config(WAMIM_SOURCE_DIR "/configs/vit_base.ini");
  const std::vector<std::vector<std::uint32_t>> expected{
      {9, 56, 56}, {9, 28, 28}, {9, 14, 14}, {12, 7, 7}};
  std::ostringstream log;
  cmd_targets(std::nullopt, cfg, scratch / "targets_a", log);
  cmd_targets(std::nullopt, cfg, scratch / "targets_b", log);
  const TensorContainer tc = TensorContainer::read(scratch / "targets_a" / "targets.wtns");
  bool dims_ok = cfg.image_side == 224 && cfg.channels == 3 && cfg.levels == 5;
  std::string got;
  for (std::size_t k = 0; k < expected.size(); ++k) {
    const Record* r = tc.find("target_k" + std::to_string(k + 1));
    if (!r) {
      dims_ok = false;
      got += " missing";
      continue;
    }
    dims_ok = dims_ok && r->dims == expected[k];
    got += " (";
    for (std::size_t i = 0; i < r->dims.size(); ++i) got += (i ? "," : "") + std::to_string(r->dims[i]);
    got += ")";
  }
  dims_ok = dims_ok && !tc.find("target_k5");
  const bool same = slurp(scratch / "targets_a" / "targets.wtns") ==
                    slurp(scratch / "targets_b" / "targets.wtns");
  return {dims_ok && same, "dims" + got + (same ? ", regeneration byte-identical"
                                                : ", regeneration DIFFERS")};
}

// ---------------------------------------------------------------------------
// Criterion 6. The expected count rounds half away from zero; the expected
// rescaled mask is spelled out cell by cell.

std::vector<std::uint8_t> expected_rescale(const std::vector<std::uint8_t>& f, std::size_t g,
                                           std::size_t s) {
  std::vector<std::uint8_t> out(s * s, 0);
  for (std::size_t r = 0; r < s; ++r) {
    for (std::size_t c = 0; c < s; ++c) {
      if (s >= g) {
        const std::size_t k = s / g;
        out[r * s + c] = f[(r / k) * g + c / k];
      } else {
        const std::size_t k = g / s;
        bool all = true;
        for (std::size_t y = 0; y < k; ++y) {
          for (std::size_t x = 0; x < k; ++x) all = all && f[(r * k + y) * g + c * k + x];
        }
        out[r * s + c] = all ? 1 : 0;
      }
    }
  }
  return out;
}

Outcome mask_exactness() {
  std::size_t bad_counts = 0, trials = 0;
  for (std::size_t g : {8, 14}) {
    for (double r : {0.4, 0.6, 0.75, 0.9}) {
      const auto want = static_cast<std::size_t>(std::lround(r * static_cast<double>(g * g)));
      for (std::uint64_t t = 0; t < 1000; ++t) {
        const PatchMask pm = gen_block_mask(g, r, kDefaultBlockSide, derive_seed(6006, t));
        std::size_t n = 0;
        for (auto f : pm.flags) n += f ? 1 : 0;
        bad_counts += (n != want) ? 1 : 0;
        ++trials;
      }
    }
  }
  std::size_t bad_rescale = 0, rescales = 0;
  for (std::uint32_t bits = 0; bits < (1u << 16); ++bits) {
    std::vector<std::uint8_t> f(16);
    for (std::size_t i = 0; i < 16; ++i) f[i] = (bits >> i) & 1u;
    const PatchMask pm = PatchMask::from_flags(4, f);
    for (std::size_t s : {1, 2, 4, 8, 16}) {
      bad_rescale += (rescale_mask(pm, s).flags != expected_rescale(f, 4, s)) ? 1 : 0;
      ++rescales;
    }
  }
  return {bad_counts == 0 && bad_rescale == 0,
          fmt("%.0f/%.0f counts exact, %.0f/%.0f rescaled 4x4 masks match",
              static_cast<double>(trials - bad_counts), static_cast<double>(trials),
              static_cast<double>(rescales - bad_rescale), static_cast<double>(rescales))};
}

// ---------------------------------------------------------------------------
// Criterion 7. Central differences are taken on the long double reference
// forward, after confirming it agrees with the double forward at the base
// point.

Outcome gradient_contract() {
  const auto t0 = Clock::now();
  const RunConfig run;
  const ModelConfig cfg = run.model_config();
  Rng rng(7007);
  ModelParams params = init_params(cfg, 7007);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& e = params.entry(i);
    if (!e.trainable) continue;
    for (double& v : e.value.data) v += rng.uniform(-0.05, 0.05);
  }
  ImageTensor image(cfg.channels, cfg.image_side, cfg.image_side);
  for (double& v : image.data) v = rng.uniform(0.0, 1.0);
  const LevelSelection sel = run.level_selection();
  const TargetSet targets = normalize_targets(build_targets(dwt2_multi(image, run.levels), sel));

  PatchMask pm;
  for (std::uint64_t s = 7007;; ++s) {
    pm = gen_block_mask(cfg.grid(), run.mask_ratio, run.mask_block, s);
    bool all = true;
    for (const auto& lv : cfg.levels) all = all && rescale_mask(pm, lv.side).masked_count() > 0;
    if (all) break;
  }

  const LossAndGrad lg = grad(params, cfg, image, pm, targets, run.metric, run.weights);
  const long double base = reference_loss(params, cfg, image, pm, targets, run.metric, run.weights);
  const double fwd = static_cast<double>(std::fabs(base - lg.report.total) / std::fabs(base));

  std::vector<std::pair<std::size_t, std::size_t>> coords;
  std::size_t total = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params.entry(i).trainable) total += params.entry(i).value.numel();
  }
  for (int n = 0; n < 200; ++n) {
    std::size_t flat = rng.bounded(total), entry = 0;
    for (;; ++entry) {
      const auto& e = params.entry(entry);
      if (!e.trainable) continue;
      if (flat < e.value.numel()) break;
      flat -= e.value.numel();
    }
    coords.emplace_back(entry, flat);
  }

  const double h = 1e-5;
  double worst = 0;
  for (const auto& [entry, flat] : coords) {
    double& x = params.entry(entry).value.data[flat];
    const double saved = x;
    x = saved + h;
    const long double up = reference_loss(params, cfg, image, pm, targets, run.metric, run.weights);
    x = saved - h;
    const long double down = reference_loss(params, cfg, image, pm, targets, run.metric, run.weights);
    x = saved;
    const long double step = static_cast<long double>(saved + h) - static_cast<long double>(saved - h);
    const double numeric = static_cast<double>((up - down) / step);
    const double analytic = lg.grads.entry(entry).value.data[flat];
    worst = std::max(worst, std::abs(analytic - numeric) /
                                std::max({std::abs(analytic), std::abs(numeric), 1e-8}));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && fwd < 1e-12 && secs < 120.0,
          fmt("200 coordinates, max relative error %.3e (tol 1e-4), forward agreement %.1e, "
              "%.1f s (limit 120 s)",
              worst, fwd, secs)};
}

// ---------------------------------------------------------------------------
// Criteria 8 and 10 share the full reference run.

std::vector<double> totals_from_log(const fs::path& log) {
  std::vector<double> out;
  std::ifstream in(log);
  std::string line;
  while (std::getline(in, line)) {
    const auto tab = line.rfind('\t');
    if (tab != std::string::npos) out.push_back(std::stod(line.substr(tab + 1)));
  }
  return out;
}

double mean_of(const std::vector<double>& v, std::size_t from, std::size_t to) {
  double s = 0;
  for (std::size_t i = from; i < to; ++i) s += v[i];
  return s / static_cast<double>(to - from);
}

Outcome training_descent(const fs::path& scratch, double& full_run_seconds) {
  const RunConfig cfg = load_config(WAMIM_SOURCE_DIR "/configs/desk_reference.ini");
  std::ostringstream sink;
  PretrainCommand full{scratch / "pretrain_a", std::nullopt, std::nullopt, true};
  const auto t0 = Clock::now();
  cmd_pretrain(full, cfg, sink);
  full_run_seconds = seconds_since(t0);

  const std::vector<double> tot = totals_from_log(full.out / "train.log");
  const bool shape_ok = cfg.steps == 300 && cfg.batch_size == 8 && tot.size() == 300 &&
                        cfg.weights == std::vector<double>{0.8, 0.9, 1.1, 1.2};
  const double first = shape_ok ? mean_of(tot, 0, 20) : 0.0;
  const double last = shape_ok ? mean_of(tot, tot.size() - 20, tot.size()) : 0.0;
  const double ratio = shape_ok ? last / first : 1.0;

  PretrainCommand part{scratch / "pretrain_resumed", std::nullopt, 150, true};
  cmd_pretrain(part, cfg, sink);
  PretrainCommand rest{part.out, checkpoint_dir(part.out, 150), std::nullopt, true};
  cmd_pretrain(rest, cfg, sink);
  // The interrupted run keeps its extra step-150 checkpoint; everything the
  // uninterrupted run wrote must appear there unchanged.
  const auto a = tree(full.out), b = tree(part.out);
  const bool resumed_same =
      !a.empty() && std::includes(b.begin(), b.end(), a.begin(), a.end());

  return {shape_ok && ratio < 0.5 && full_run_seconds < 600.0 && resumed_same,
          fmt("last20/first20 = %.4f / %.4f = %.3f (limit 0.5), %.1f s (limit 600 s)", last, first,
              ratio, full_run_seconds) +
              (resumed_same ? ", resume at 150 reproduces log and checkpoints bit for bit"
                            : ", resumed run DIFFERS")};
}

// ---------------------------------------------------------------------------
// Criterion 9.

Outcome respect_the_mask() {
  Rng rng(9009);
  std::size_t identical = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k_levels = 1 + rng.bounded(4);
    const Metric metric = (trial % 2) ? Metric::L1 : Metric::L2;
    std::vector<LevelDistance> before, after;
    std::vector<double> weights;
    for (std::size_t k = 0; k < k_levels; ++k) {
      const std::size_t side = std::size_t{1} << (1 + rng.bounded(4));
      const std::size_t ch = 1 + rng.bounded(12);
      ScaleMask m;
      m.side = side;
      m.flags.assign(side * side, 0);
      for (auto& f : m.flags) f = rng.uniform() < 0.6 ? 1 : 0;
      m.flags[rng.bounded(side * side)] = 1;
      const ImageTensor target = random_image(ch, side, rng);
      ImageTensor pred = random_image(ch, side, rng);
      before.push_back(masked_distance(pred, target, m, metric));
      for (std::size_t c = 0; c < ch; ++c) {
        for (std::size_t r = 0; r < side; ++r) {
          for (std::size_t x = 0; x < side; ++x) {
            if (!m.flags[r * side + x]) pred.at(c, r, x) += rng.uniform(-1e3, 1e3);
          }
        }
      }
      after.push_back(masked_distance(pred, target, m, metric));
      weights.push_back(rng.uniform(0.5, 1.5));
    }
    const LossReport a = make_report(before, weights), b = make_report(after, weights);
    bool same = bits_equal(a.total, b.total) && a.weights == b.weights &&
                a.levels.size() == b.levels.size();
    for (std::size_t k = 0; same && k < a.levels.size(); ++k) {
      same = bits_equal(a.levels[k].mean, b.levels[k].mean) && a.levels[k].masked == b.levels[k].masked;
    }
    identical += same ? 1 : 0;
  }
  return {identical == 100, fmt("%.0f/100 reports bit-identical", static_cast<double>(identical))};
}

// ---------------------------------------------------------------------------

Outcome determinism(const fs::path& scratch) {
  const RunConfig cfg = load_config(WAMIM_SOURCE_DIR "/configs/desk_reference.ini");
  std::ostringstream sink;
  cmd_targets(std::nullopt, cfg, scratch / "det_targets_a", sink);
  cmd_targets(std::nullopt, cfg, scratch / "det_targets_b", sink);
  const bool targets_same = tree(scratch / "det_targets_a") == tree(scratch / "det_targets_b");

  PretrainCommand second{scratch / "pretrain_b", std::nullopt, std::nullopt, true};
  cmd_pretrain(second, cfg, sink);
  const auto a = tree(scratch / "pretrain_a"), b = tree(scratch / "pretrain_b");
  const bool pretrain_same = !a.empty() && a == b;
  return {targets_same && pretrain_same,
          std::string("targets ") + (targets_same ? "identical" : "DIFFER") + ", pretrain (" +
              std::to_string(a.size()) + " files) " + (pretrain_same ? "identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path scratch = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "wamim_acceptance";
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  std::vector<ImageTensor> corpus;
  double full_run_seconds = 0;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"dwt round-trip", [&] { return roundtrip(corpus); }},
      {"parseval", [&] { return parseval(corpus); }},
      {"oracle equivalence", oracle},
      {"hand case", hand_case},
      {"ViT-B target structure", [&] { return vit_structure(scratch); }},
      {"mask exactness", mask_exactness},
      {"gradient contract", gradient_contract},
      {"training descent", [&] { return training_descent(scratch, full_run_seconds); }},
      {"loss respects the mask", respect_the_mask},
      {"determinism", [&] { return determinism(scratch); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s  %2zu %-24s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
