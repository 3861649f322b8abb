#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ghostkit/errors.hpp"
#include "ghostkit/grid.hpp"
#include "ghostkit/recon.hpp"
#include "ghostkit/scene.hpp"
#include "ghostkit/thresholding.hpp"

namespace ghostkit {

/// Affine rescale to [0,1]: exact 0 at the minimum, exact 1 at the maximum.
inline Grid<double> normalize_unit(const Grid<double>& img) {
  double lo = img[0], hi = img[0];
  for (double v : img) {
    if (!std::isfinite(v))
      throw precondition_error("cannot normalize a non-finite image");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo == hi)
    throw degenerate_image_error("constant image has no range to normalize");
  const double range = hi - lo;
  Grid<double> out(img.width(), img.height());
  for (std::size_t p = 0; p < img.size(); ++p)
    out[p] = (img[p] - lo) / range;
  return out;
}

inline ReconImage normalize_unit(const ReconImage& img) {
  return {normalize_unit(img.data), img.method, img.frames_used};
}

/// CDF equalization on `levels` uniform bins of [0,1]; the occupied range
/// is rescaled to span [0,1] exactly.
inline Grid<double> equalize_histogram(const Grid<double>& img,
                                       std::uint32_t levels = 256) {
  if (levels < 2)
    throw config_error("equalization needs at least 2 levels");
  std::vector<std::uint64_t> counts(levels, 0);
  auto bin_of = [levels](double v) {
    return std::min<std::uint32_t>(levels - 1,
                                   static_cast<std::uint32_t>(v * levels));
  };
  for (double v : img) {
    if (!(v >= 0.0 && v <= 1.0))
      throw precondition_error("equalization input must lie in [0,1]");
    ++counts[bin_of(v)];
  }

  const double total = static_cast<double>(img.size());
  std::vector<double> cdf(levels);
  std::uint64_t running = 0;
  for (std::uint32_t b = 0; b < levels; ++b) {
    running += counts[b];
    cdf[b] = static_cast<double>(running) / total;
  }
  std::uint32_t first = 0;
  while (counts[first] == 0)
    ++first;
  const double floor_cdf = cdf[first];
  if (floor_cdf == 1.0)
    throw degenerate_image_error("all pixels fall into one histogram bin");

  Grid<double> out(img.width(), img.height());
  for (std::size_t p = 0; p < img.size(); ++p)
    out[p] = (cdf[bin_of(img[p])] - floor_cdf) / (1.0 - floor_cdf);
  return out;
}

/// Reconstruction score: ground-truth variance over squared error. A zero
/// denominator (perfect reconstruction) is reported as a flag, not a value.
struct SnrValue {
  double value = 0.0;
  bool perfect = false;
};

inline SnrValue snr(const Grid<double>& recon, const TransmissionMask& truth) {
  require_same_shape(recon, truth.data, "snr");
  const std::size_t n = recon.size();
  double truth_sum = 0.0;
  for (double v : truth.data)
    truth_sum += v;
  const double truth_mean = truth_sum / static_cast<double>(n);

  double num = 0.0, den = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    const double dt = truth.data[p] - truth_mean;
    num += dt * dt;
    const double e = recon[p] - truth.data[p];
    den += e * e;
  }
  if (den == 0.0)
    return {0.0, true};
  return {num / den, false};
}

/// Pearson correlation of two images over pixels.
inline double pearson(const Grid<double>& a, const Grid<double>& b) {
  require_same_shape(a, b, "pearson");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) {
    ma += a[p];
    mb += b[p];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) {
    const double da = a[p] - ma, db = b[p] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0)
    throw degenerate_image_error("correlation undefined for a constant image");
  return sab / std::sqrt(saa * sbb);
}

/// Quantize a [0,1] image to 8 bits for PNG/PGM dumps.
inline Grid<std::uint8_t> to_gray8(const Grid<double>& unit) {
  Grid<std::uint8_t> out(unit.width(), unit.height());
  for (std::size_t p = 0; p < unit.size(); ++p) {
    const double v = std::clamp(unit[p], 0.0, 1.0);
    out[p] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  return out;
}

// ------------------------------------------------------------------- sweeps

struct SweepCell {
  Method method = Method::GI;
  std::uint64_t frames = 0;
};

/// How register-difference cells pick their thresholds: derived from a
/// frame budget (k = frames/2) around a cheap pre-estimated mean, or an
/// explicit pair applied as-is.
struct ThresholdPolicy {
  enum class Kind { count_driven, explicit_pair };
  Kind kind = Kind::count_driven;
  std::uint64_t n_estimate = 120; ///< pre-estimate length for count_driven
  ThresholdPair pair;             ///< used by explicit_pair
};

struct SnrRow;

struct SweepOptions {
  ThresholdPolicy thresholds;
  std::uint32_t equalize_levels = 256;
  int threads = 1;
  /// Called with each scored [0,1] image as it is produced (for dumps).
  std::function<void(const SnrRow&, const Grid<double>&)> image_sink;
};

struct SnrRow {
  Method method = Method::GI;
  std::uint64_t frames_used = 0;
  bool has_thresholds = false;
  double t0_plus = 0.0;
  double t0_minus = 0.0;
  bool has_k = false;
  std::uint64_t k = 0;
  SnrValue snr;
  bool has_dispersion = false;
  double delta_t0_mean = 0.0; ///< mean of |dT| - t0 over both registers
  double delta_t0_cv = 0.0;   ///< its coefficient of variation
};

struct SnrReport {
  std::vector<SnrRow> rows;
  std::string scene;
  std::uint64_t seed = 0;
};

namespace detail {

struct Dispersion {
  double mean = 0.0, cv = 0.0;
};

// Spread of the threshold excursions |dT| - t0 pooled over both registers.
inline Dispersion register_dispersion(const AcquisitionRun& run,
                                      const Registers& regs) {
  std::vector<double> vals;
  vals.reserve(regs.a.size() + regs.b.size());
  const ThresholdPair& thr = regs.thresholds;
  for (std::uint64_t m : regs.a)
    vals.push_back((run.records[m].T - thr.t_mean_est) - thr.t0_plus);
  for (std::uint64_t m : regs.b)
    vals.push_back((thr.t_mean_est - run.records[m].T) - thr.t0_minus);
  double sum = 0.0;
  for (double v : vals)
    sum += v;
  const double mean = sum / static_cast<double>(vals.size());
  if (vals.size() < 2 || mean == 0.0)
    return {mean, 0.0};
  double ss = 0.0;
  for (double v : vals) {
    const double d = v - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / static_cast<double>(vals.size() - 1));
  return {mean, sd / mean};
}

inline int method_rank(Method m) { return static_cast<int>(m); }

} // namespace detail

namespace detail {

// Shared frame passes for a sweep. Correlator cells at different prefix
// lengths reuse one moment pass (prefix snapshots of the running sums) and
// one centered pass per distinct length. Because each accumulator is
// updated independently and frames are visited in the same ascending
// order, every cell comes out bit-identical to its standalone
// reconstruct_* call.
struct SweepPasses {
  struct Moments {
    Grid<double> sum_i;  // per-pixel intensity sum over the prefix
    Grid<double> sum_ti; // per-pixel sum of T * intensity
  };
  struct Centered {
    Grid<double> acc_s; // sum of dS * dI
    Grid<double> acc_r; // sum of dR * dI
  };
  std::map<std::uint64_t, Moments> moments;   // by prefix length
  std::map<std::uint64_t, Centered> centered; // by prefix length

  void run_passes(const AcquisitionRun& run, const std::set<std::uint64_t>& moment_ns,
                  const std::set<std::uint64_t>& centered_ns, int threads) {
    if (moment_ns.empty())
      return;
    const std::uint32_t w = run.config.width, h = run.config.height;
    const std::uint64_t max_n = *moment_ns.rbegin();

    Grid<double> sum_i(w, h), sum_ti(w, h);
    auto snapshot = moment_ns.begin();
    run.visit_frames(
        0, max_n,
        [&](std::uint64_t m, const Grid<float>& f) {
          const double t = run.records[m].T;
          for (std::size_t p = 0; p < f.size(); ++p) {
            sum_i[p] += f[p];
            sum_ti[p] += t * f[p];
          }
          while (snapshot != moment_ns.end() && m + 1 == *snapshot) {
            moments.emplace(*snapshot, Moments{sum_i, sum_ti});
            ++snapshot;
          }
        },
        threads);

    for (std::uint64_t n : centered_ns) {
      const auto scalars = scalar_means(run, n);
      Grid<double> mean_i = moments.at(n).sum_i;
      for (std::size_t p = 0; p < mean_i.size(); ++p)
        mean_i[p] /= static_cast<double>(n);
      Centered c{Grid<double>(w, h), Grid<double>(w, h)};
      run.visit_frames(
          0, n,
          [&](std::uint64_t m, const Grid<float>& f) {
            const double ds = run.records[m].S - scalars.S;
            const double dr = run.records[m].R - scalars.R;
            for (std::size_t p = 0; p < f.size(); ++p) {
              const double di = f[p] - mean_i[p];
              c.acc_s[p] += ds * di;
              c.acc_r[p] += dr * di;
            }
          },
          threads);
      centered.emplace(n, std::move(c));
    }
  }
};

} // namespace detail

/// Score a set of (method, frame count) cells against the ground truth.
/// Prefix methods (GI, NGI, DGI, CI) use the first n frames; register-
/// difference cells select 2k = n frames from the whole run by threshold.
/// Every cell goes through the same pipeline: reconstruct, normalize to
/// [0,1], histogram-equalize, score. Rows come out sorted by (method, n),
/// and each image matches the standalone reconstruct_* result exactly.
inline SnrReport sweep(const AcquisitionRun& run, const TransmissionMask& truth,
                       std::vector<SweepCell> cells,
                       const SweepOptions& options = {}) {
  if (truth.data.width() != run.config.width ||
      truth.data.height() != run.config.height)
    throw shape_error("truth mask dimensions do not match the run");

  std::stable_sort(cells.begin(), cells.end(),
                   [](const SweepCell& x, const SweepCell& y) {
                     if (x.method != y.method)
                       return detail::method_rank(x.method) <
                              detail::method_rank(y.method);
                     return x.frames < y.frames;
                   });

  // Validate everything and plan the shared passes before touching frames.
  std::set<std::uint64_t> moment_ns, centered_ns;
  for (const SweepCell& cell : cells) {
    switch (cell.method) {
    case Method::GI:
      detail::check_limit(run, cell.frames);
      moment_ns.insert(cell.frames);
      centered_ns.insert(cell.frames);
      break;
    case Method::DGI:
      detail::check_limit(run, cell.frames);
      detail::check_reference_totals(run, cell.frames);
      moment_ns.insert(cell.frames);
      centered_ns.insert(cell.frames);
      break;
    case Method::NGI:
      detail::check_limit(run, cell.frames);
      detail::check_reference_totals(run, cell.frames);
      moment_ns.insert(cell.frames);
      break;
    case Method::CI:
      detail::check_limit(run, cell.frames);
      break;
    case Method::DTTCI:
      if (options.thresholds.kind == ThresholdPolicy::Kind::count_driven &&
          cell.frames % 2 != 0)
        throw config_error("register-difference cells need an even frame "
                           "budget (2k), got " +
                           std::to_string(cell.frames));
      break;
    }
  }

  detail::SweepPasses passes;
  passes.run_passes(run, moment_ns, centered_ns, options.threads);

  SnrReport report;
  report.scene = truth.name;
  report.seed = run.config.master_seed;

  for (const SweepCell& cell : cells) {
    SnrRow row;
    row.method = cell.method;
    row.frames_used = cell.frames;
    const double n = static_cast<double>(cell.frames);
    const std::uint32_t w = run.config.width, h = run.config.height;
    Grid<double> img(1, 1);

    switch (cell.method) {
    case Method::GI: {
      const auto& acc = passes.centered.at(cell.frames).acc_s;
      img = Grid<double>(w, h);
      for (std::size_t p = 0; p < img.size(); ++p)
        img[p] = acc[p] / n;
      break;
    }
    case Method::NGI: {
      const auto scalars = detail::scalar_means(run, cell.frames);
      const auto& mom = passes.moments.at(cell.frames);
      img = Grid<double>(w, h);
      for (std::size_t p = 0; p < img.size(); ++p)
        img[p] = mom.sum_ti[p] / n - scalars.T * (mom.sum_i[p] / n);
      break;
    }
    case Method::DGI: {
      const auto scalars = detail::scalar_means(run, cell.frames);
      const auto& c = passes.centered.at(cell.frames);
      const double ratio = scalars.S / scalars.R;
      img = Grid<double>(w, h);
      for (std::size_t p = 0; p < img.size(); ++p)
        img[p] = c.acc_s[p] / n - ratio * (c.acc_r[p] / n);
      break;
    }
    case Method::CI: {
      const Registers regs = ci_registers(run, cell.frames);
      img = reconstruct_dttci(run, regs, options.threads).data;
      const auto disp = detail::register_dispersion(run, regs);
      row.has_thresholds = true;
      row.t0_plus = regs.thresholds.t0_plus;
      row.t0_minus = regs.thresholds.t0_minus;
      row.has_k = true;
      row.k = regs.k();
      row.has_dispersion = true;
      row.delta_t0_mean = disp.mean;
      row.delta_t0_cv = disp.cv;
      break;
    }
    case Method::DTTCI: {
      Registers regs;
      if (options.thresholds.kind == ThresholdPolicy::Kind::count_driven) {
        const double t_mean =
            estimate_mean_transmission(run, options.thresholds.n_estimate);
        const ThresholdPair thr =
            thresholds_for_count(run, cell.frames / 2, t_mean);
        regs = partition_frames(run, thr);
        regs = balance_registers(regs, run); // exact-count cut: no-op
      } else {
        regs = balance_registers(partition_frames(run, options.thresholds.pair),
                                 run);
        row.frames_used = 2 * regs.k();
      }
      img = reconstruct_dttci(run, regs, options.threads).data;
      const auto disp = detail::register_dispersion(run, regs);
      row.has_thresholds = true;
      row.t0_plus = regs.thresholds.t0_plus;
      row.t0_minus = regs.thresholds.t0_minus;
      row.has_k = true;
      row.k = regs.k();
      row.has_dispersion = true;
      row.delta_t0_mean = disp.mean;
      row.delta_t0_cv = disp.cv;
      break;
    }
    }

    const Grid<double> scored =
        equalize_histogram(normalize_unit(img), options.equalize_levels);
    row.snr = snr(scored, truth);
    if (options.image_sink)
      options.image_sink(row, scored);
    report.rows.push_back(row);
  }
  return report;
}

// ---------------------------------------------------------------------- CSV

namespace detail {

inline std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

} // namespace detail

/// Byte-deterministic CSV rendering of a report. Empty fields mean
/// "not applicable to this method".
inline std::string report_csv(const SnrReport& report) {
  std::string out =
      "method,frames_used,t0_plus,t0_minus,k,snr,delta_t0_mean,delta_t0_cv,seed\n";
  for (const SnrRow& row : report.rows) {
    out += method_name(row.method);
    out += ',';
    out += std::to_string(row.frames_used);
    out += ',';
    if (row.has_thresholds) {
      out += detail::fmt_g(row.t0_plus);
      out += ',';
      out += detail::fmt_g(row.t0_minus);
    } else {
      out += ',';
    }
    out += ',';
    if (row.has_k)
      out += std::to_string(row.k);
    out += ',';
    out += row.snr.perfect ? "inf" : detail::fmt_g(row.snr.value);
    out += ',';
    if (row.has_dispersion) {
      out += detail::fmt_g(row.delta_t0_mean);
      out += ',';
      out += detail::fmt_g(row.delta_t0_cv);
    } else {
      out += ',';
    }
    out += ',';
    out += std::to_string(report.seed);
    out += '\n';
  }
  return out;
}

} // namespace ghostkit
