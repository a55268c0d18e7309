#include "wamim/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#include "wamim/dwt.hpp"
#include "wamim/errors.hpp"
#include "wamim/loss.hpp"
#include "wamim/masking.hpp"
#include "wamim/random.hpp"
#include "wamim/reference_model.hpp"
#include "wamim/targets.hpp"

namespace wamim {

namespace {

ImageTensor random_image(std::size_t c, std::size_t r, std::size_t w, Rng& rng) {
  ImageTensor img(c, r, w);
  for (double& v : img.data) v = rng.uniform(-1.0, 1.0);
  return img;
}

Check at_most(std::string name, double measured, double tol) {
  return {std::move(name), measured, tol, measured <= tol};
}

Check below(std::string name, double measured, double tol) {
  return {std::move(name), measured, tol, measured < tol};
}

SuiteReport dwt_suite(std::uint64_t seed) {
  SuiteReport r{"dwt", {}, 0.0};
  Rng rng(seed);
  double round_trip = 0.0, parseval = 0.0;
  for (int i = 0; i < 100; ++i) {
    const ImageTensor x = random_image(3, 32, 32, rng);
    const WaveletPyramid p = dwt2_multi(x, 3);
    round_trip = std::max(round_trip, max_abs_diff(idwt2_multi(p), x));
    const double ex = energy(x);
    parseval = std::max(parseval, std::abs(p.energy() - ex) / ex);
  }
  r.checks.push_back(below("round-trip max abs error (100 x 32x32x3, J=3)", round_trip, 1e-10));
  r.checks.push_back(at_most("Parseval relative energy mismatch", parseval, 1e-12));

  const LevelBands hand = dwt2_level(Plane(2, 2, {1, 3, 5, 7}));
  const double hand_err = std::max({std::abs(hand.ll.data[0] - 8.0), std::abs(hand.h.data[0] + 2.0),
                                    std::abs(hand.v.data[0] + 4.0), std::abs(hand.d.data[0])});
  r.checks.push_back(at_most("hand case [[1,3],[5,7]] -> (8,-2,-4,0)", hand_err, 0.0));

  ImageTensor constant(3, 16, 16, 0.37);
  const WaveletPyramid cp = dwt2_multi(constant, 4);
  double detail = 0.0;
  for (const auto& lv : cp.levels) {
    for (Orientation o : kOrientations) {
      for (double v : lv.band(o).data) detail = std::max(detail, std::abs(v));
    }
  }
  r.checks.push_back(at_most("constant image detail magnitude", detail, 0.0));
  return r;
}

SuiteReport oracle_suite(std::uint64_t seed) {
  SuiteReport r{"oracle", {}, 0.0};
  Rng rng(seed ^ 0x0c1eULL);
  double worst = 0.0;
  for (std::size_t side : {8u, 16u}) {
    for (std::size_t depth = 1; depth <= 3; ++depth) {
      const ImageTensor x = random_image(3, side, side, rng);
      worst = std::max(worst, max_abs_diff(dwt2_multi(x, depth), dwt2_oracle(x, depth)));
    }
  }
  r.checks.push_back(below("fast vs basis oracle max abs diff (8x8, 16x16, J<=3)", worst, 1e-10));

  double lin = 0.0;
  for (int i = 0; i < 5; ++i) {
    const ImageTensor a = random_image(1, 8, 8, rng), b = random_image(1, 8, 8, rng);
    ImageTensor sum = a;
    for (std::size_t j = 0; j < sum.data.size(); ++j) sum.data[j] += b.data[j];
    const WaveletPyramid pa = dwt2_oracle(a, 3), pb = dwt2_oracle(b, 3), ps = dwt2_oracle(sum, 3);
    WaveletPyramid added = pa;
    for (std::size_t l = 0; l < 3; ++l) {
      for (Orientation o : kOrientations) {
        auto& dst = added.levels[l].band(o).data;
        const auto& src = pb.levels[l].band(o).data;
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
      }
    }
    for (std::size_t j = 0; j < added.approx.data.size(); ++j) added.approx.data[j] += pb.approx.data[j];
    lin = std::max(lin, max_abs_diff(added, ps));
  }
  r.checks.push_back(below("oracle linearity max abs diff", lin, 1e-12));
  return r;
}

SuiteReport mask_suite(std::uint64_t seed) {
  SuiteReport r{"mask", {}, 0.0};
  double count_errors = 0.0;
  for (std::size_t g : {8u, 14u}) {
    for (double ratio : {0.4, 0.6, 0.75, 0.9}) {
      const auto expected = static_cast<double>(std::llround(ratio * static_cast<double>(g * g)));
      for (std::uint64_t t = 0; t < 1000; ++t) {
        const PatchMask pm = gen_block_mask(g, ratio, kDefaultBlockSide, derive_seed(seed, t));
        if (static_cast<double>(pm.masked_count()) != expected) count_errors += 1.0;
      }
    }
  }
  r.checks.push_back(at_most("masks with wrong count (8000 trials)", count_errors, 0.0));

  // Every 4x4 mask against each legal target side, checked cell by cell
  // from the rule statements.
  double rule_errors = 0.0;
  for (std::uint32_t bits = 0; bits < (1u << 16); ++bits) {
    std::vector<std::uint8_t> flags(16);
    for (int i = 0; i < 16; ++i) flags[i] = (bits >> i) & 1u;
    const PatchMask pm = PatchMask::from_flags(4, flags);
    for (std::size_t side : {1u, 2u, 4u, 8u, 16u}) {
      const ScaleMask sm = rescale_mask(pm, side);
      for (std::size_t y = 0; y < side; ++y) {
        for (std::size_t x = 0; x < side; ++x) {
          bool want;
          if (side >= 4) {
            want = flags[(y * 4 / side) * 4 + x * 4 / side] != 0;
          } else {
            const std::size_t f = 4 / side;
            std::size_t covered = 0;
            for (std::size_t py = y * f; py < (y + 1) * f; ++py) {
              for (std::size_t px = x * f; px < (x + 1) * f; ++px) covered += flags[py * 4 + px];
            }
            want = covered == f * f;
          }
          if (sm.masked(y, x) != want) rule_errors += 1.0;
        }
      }
    }
  }
  r.checks.push_back(at_most("rescale rule violations (all 65536 4x4 masks)", rule_errors, 0.0));

  const PatchMask a = gen_block_mask(8, 0.5, 2, 42), b = gen_block_mask(8, 0.5, 2, 42);
  r.checks.push_back(at_most("determinism mismatches (g=8, r=0.5, b=2, seed=42)",
                             a.flags == b.flags ? 0.0 : 1.0, 0.0));
  return r;
}

double loop_reference(const ImageTensor& p, const ImageTensor& t, const ScaleMask& m, Metric metric) {
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t y = 0; y < m.side; ++y) {
    for (std::size_t x = 0; x < m.side; ++x) {
      if (!m.masked(y, x)) continue;
      for (std::size_t c = 0; c < p.channels; ++c) {
        const double d = p.at(c, y, x) - t.at(c, y, x);
        acc += metric == Metric::L1 ? std::fabs(d) : d * d;
        ++n;
      }
    }
  }
  return acc / static_cast<double>(n);
}

SuiteReport loss_suite(std::uint64_t seed) {
  SuiteReport r{"loss", {}, 0.0};
  Rng rng(seed ^ 0x1055ULL);
  double loop_err = 0.0, visible_changes = 0.0;
  for (int i = 0; i < 100; ++i) {
    const PatchMask pm = gen_block_mask(8, 0.6, 2, rng.next());
    const ScaleMask sm = rescale_mask(pm, 8);
    const ImageTensor target = random_image(3, 8, 8, rng);
    ImageTensor pred = random_image(3, 8, 8, rng);
    for (Metric metric : {Metric::L1, Metric::L2}) {
      const LevelDistance d = masked_distance(pred, target, sm, metric);
      loop_err = std::max(loop_err, std::abs(d.mean - loop_reference(pred, target, sm, metric)));
      ImageTensor perturbed = pred;
      for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t j = 0; j < 64; ++j) {
          if (!sm.flags[j]) perturbed.channel(c)[j] += rng.uniform(-5.0, 5.0);
        }
      }
      const LevelDistance dp = masked_distance(perturbed, target, sm, metric);
      const LossReport ra = make_report({d}, {1.1}), rb = make_report({dp}, {1.1});
      if (!(ra == rb)) visible_changes += 1.0;
    }
  }
  r.checks.push_back(below("masked distance vs loop reference", loop_err, 1e-12));
  r.checks.push_back(at_most("reports changed by visible-cell perturbation", visible_changes, 0.0));

  const std::vector<LevelDistance> ones(4, LevelDistance{1.0, 1});
  const std::vector<double> w{0.8, 0.9, 1.1, 1.2};
  r.checks.push_back(at_most("weighted total of unit means vs 4.0", std::abs(total_loss(ones, w) - 4.0),
                             1e-15));
  return r;
}

SuiteReport grad_suite(std::uint64_t seed) {
  SuiteReport r{"grad", {}, 0.0};
  const GradCheckResult g = finite_difference_check(ModelConfig::reference(), 200, 1e-5, seed);
  r.checks.push_back(below("max relative FD error over " + std::to_string(g.coordinates) +
                               " coordinates (worst " + g.worst + ")",
                           g.max_rel_error, 1e-4));
  r.checks.push_back(below("double forward vs long double reference, relative", g.forward_rel_diff,
                           1e-12));
  return r;
}

}  // namespace

bool SuiteReport::passed() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return !checks.empty();
}

const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names{"dwt", "oracle", "grad", "mask", "loss"};
  return names;
}

std::vector<SuiteReport> run_verify(const std::string& name, std::uint64_t seed) {
  using Fn = std::function<SuiteReport(std::uint64_t)>;
  const std::vector<std::pair<std::string, Fn>> suites{
      {"dwt", dwt_suite}, {"oracle", oracle_suite}, {"grad", grad_suite},
      {"mask", mask_suite}, {"loss", loss_suite}};
  std::vector<SuiteReport> out;
  for (const auto& [n, fn] : suites) {
    if (name != "all" && name != n) continue;
    const auto t0 = std::chrono::steady_clock::now();
    SuiteReport rep = fn(seed);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(std::move(rep));
  }
  if (out.empty()) throw ConfigError("unknown verify suite '" + name + "'");
  return out;
}

void print_report(std::ostream& out, const SuiteReport& r) {
  char buf[512];
  for (const auto& c : r.checks) {
    std::snprintf(buf, sizeof buf, "%s  %-7s %-70s measured %.3e  tol %.1e\n",
                  c.pass ? "PASS" : "FAIL", r.suite.c_str(), c.name.c_str(), c.measured,
                  c.tolerance);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "%s  %-7s suite (%.2f s)\n", r.passed() ? "PASS" : "FAIL",
                r.suite.c_str(), r.seconds);
  out << buf;
}

GradCheckResult finite_difference_check(const ModelConfig& cfg, std::size_t coordinates,
                                        double step, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed ^ 0x96adULL);
  ModelParams params = init_params(cfg, seed);
  // Perturb every trainable value so biases, gains and mask tokens sit away
  // from their special init values.
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& e = params.entry(i);
    if (!e.trainable) continue;
    for (double& v : e.value.data) v += rng.uniform(-0.05, 0.05);
  }

  const std::size_t side = cfg.image_side;
  ImageTensor image(cfg.channels, side, side);
  for (double& v : image.data) v = rng.uniform(0.0, 1.0);
  std::size_t depth = 0;
  for (const auto& lv : cfg.levels) depth = std::max(depth, static_cast<std::size_t>(std::log2(side / lv.side)));
  LevelSelection sel;
  for (std::size_t k = 0; k < cfg.levels.size(); ++k) {
    sel.selected_levels.push_back(static_cast<std::size_t>(std::log2(side / cfg.levels[k].side)));
    sel.tap_layers.push_back(cfg.taps[k]);
    sel.weights.push_back(1.0 + 0.1 * static_cast<double>(k));
  }
  sel.attach_approximation = cfg.levels.back().channels == 4 * cfg.channels;
  const TargetSet targets = normalize_targets(build_targets(dwt2_multi(image, depth), sel));

  GradCheckResult res;
  // First mask (by seed) that leaves every level with masked cells.
  PatchMask pm;
  for (std::uint64_t s = seed;; ++s) {
    pm = gen_block_mask(cfg.grid(), 0.75, kDefaultBlockSide, s);
    bool all = true;
    for (const auto& lv : cfg.levels) all = all && rescale_mask(pm, lv.side).masked_count() > 0;
    if (all) break;
  }

  const LossAndGrad lg = grad(params, cfg, image, pm, targets, Metric::L2, sel.weights);
  const long double ref = reference_loss(params, cfg, image, pm, targets, Metric::L2, sel.weights);
  res.forward_rel_diff = static_cast<double>(std::fabs(ref - lg.report.total) / std::fabs(ref));

  std::size_t total = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params.entry(i).trainable) total += params.entry(i).value.numel();
  }
  for (std::size_t n = 0; n < coordinates; ++n) {
    std::size_t flat = rng.bounded(total), entry = 0;
    while (true) {
      const auto& e = params.entry(entry);
      if (e.trainable) {
        if (flat < e.value.numel()) break;
        flat -= e.value.numel();
      }
      ++entry;
    }
    double& x = params.entry(entry).value.data[flat];
    const double saved = x;
    x = saved + step;
    const long double up = reference_loss(params, cfg, image, pm, targets, Metric::L2, sel.weights);
    x = saved - step;
    const long double down = reference_loss(params, cfg, image, pm, targets, Metric::L2, sel.weights);
    x = saved;
    // The step actually taken is the representable (saved + h) - (saved - h).
    const long double taken = static_cast<long double>(saved + step) - static_cast<long double>(saved - step);
    const double numeric = static_cast<double>((up - down) / taken);
    const double analytic = lg.grads.entry(entry).value.data[flat];
    const double rel = std::abs(analytic - numeric) /
                       std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    if (rel >= res.max_rel_error) {
      res.max_rel_error = rel;
      res.worst = params.entry(entry).name + "[" + std::to_string(flat) + "]";
    }
    ++res.coordinates;
  }
  return res;
}

}  // namespace wamim
