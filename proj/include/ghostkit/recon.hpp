#pragma once

#include <cstdint>
#include <string>

#include "ghostkit/acquisition.hpp"
#include "ghostkit/errors.hpp"
#include "ghostkit/grid.hpp"
#include "ghostkit/thresholding.hpp"

namespace ghostkit {

enum class Method { GI, NGI, DGI, DTTCI, CI };

inline const char* method_name(Method m) {
  switch (m) {
  case Method::GI:
    return "GI";
  case Method::NGI:
    return "NGI";
  case Method::DGI:
    return "DGI";
  case Method::DTTCI:
    return "DTTCI";
  case Method::CI:
    return "CI";
  }
  return "?";
}

inline Method method_from_name(const std::string& name) {
  for (Method m : {Method::GI, Method::NGI, Method::DGI, Method::DTTCI, Method::CI})
    if (name == method_name(m))
      return m;
  throw config_error("unknown method '" + name +
                     "' (expected GI, NGI, DGI, DTTCI, or CI)");
}

/// Estimator output: signed image proportional to the object's transmission
/// deviation, defined only up to affine scale.
struct ReconImage {
  Grid<double> data;
  Method method = Method::GI;
  std::uint64_t frames_used = 0;
};

namespace detail {

inline void check_limit(const AcquisitionRun& run, std::uint64_t m_limit) {
  if (m_limit < 2)
    throw precondition_error("reconstruction needs at least 2 frames");
  if (m_limit > run.records.size())
    throw insufficient_frames_error("m_limit = " + std::to_string(m_limit) +
                                    " exceeds run length " +
                                    std::to_string(run.records.size()));
}

inline void check_reference_totals(const AcquisitionRun& run, std::uint64_t m_limit) {
  for (std::uint64_t m = 0; m < m_limit; ++m)
    if (!(run.records[m].R > 0.0))
      throw degenerate_frame_error("frame " + std::to_string(m) +
                                   " has non-positive reference total");
}

struct ScalarMeans {
  double S = 0.0, R = 0.0, T = 0.0;
};

inline ScalarMeans scalar_means(const AcquisitionRun& run, std::uint64_t n) {
  ScalarMeans sums;
  for (std::uint64_t m = 0; m < n; ++m) {
    sums.S += run.records[m].S;
    sums.R += run.records[m].R;
    sums.T += run.records[m].T;
  }
  const double dn = static_cast<double>(n);
  return {sums.S / dn, sums.R / dn, sums.T / dn};
}

} // namespace detail

/// Conventional ghost image: covariance of the bucket signal with each
/// reference pixel. Two passes — means first, then centered products.
inline ReconImage reconstruct_gi(const AcquisitionRun& run, std::uint64_t m_limit,
                                 int threads = 1) {
  detail::check_limit(run, m_limit);
  const double n = static_cast<double>(m_limit);
  const auto means = detail::scalar_means(run, m_limit);

  Grid<double> mean_i(run.config.width, run.config.height);
  run.visit_frames(
      0, m_limit,
      [&](std::uint64_t, const Grid<float>& f) {
        for (std::size_t p = 0; p < f.size(); ++p)
          mean_i[p] += f[p];
      },
      threads);
  for (std::size_t p = 0; p < mean_i.size(); ++p)
    mean_i[p] /= n;

  Grid<double> acc(run.config.width, run.config.height);
  run.visit_frames(
      0, m_limit,
      [&](std::uint64_t m, const Grid<float>& f) {
        const double ds = run.records[m].S - means.S;
        for (std::size_t p = 0; p < f.size(); ++p)
          acc[p] += ds * (f[p] - mean_i[p]);
      },
      threads);
  for (std::size_t p = 0; p < acc.size(); ++p)
    acc[p] /= n;
  return {std::move(acc), Method::GI, m_limit};
}

/// Normalized ghost image: correlate the per-frame transmission T = S/R
/// with the reference, removing the bucket's sensitivity to total power.
inline ReconImage reconstruct_ngi(const AcquisitionRun& run, std::uint64_t m_limit,
                                  int threads = 1) {
  detail::check_limit(run, m_limit);
  detail::check_reference_totals(run, m_limit);
  const double n = static_cast<double>(m_limit);
  const auto means = detail::scalar_means(run, m_limit);

  Grid<double> sum_i(run.config.width, run.config.height);
  Grid<double> sum_ti(run.config.width, run.config.height);
  run.visit_frames(
      0, m_limit,
      [&](std::uint64_t m, const Grid<float>& f) {
        const double t = run.records[m].T;
        for (std::size_t p = 0; p < f.size(); ++p) {
          sum_i[p] += f[p];
          sum_ti[p] += t * f[p];
        }
      },
      threads);

  Grid<double> img(run.config.width, run.config.height);
  for (std::size_t p = 0; p < img.size(); ++p)
    img[p] = sum_ti[p] / n - means.T * (sum_i[p] / n);
  return {std::move(img), Method::NGI, m_limit};
}

/// Differential ghost image: the GI covariance minus the reference-total
/// covariance weighted by <S>/<R>.
inline ReconImage reconstruct_dgi(const AcquisitionRun& run, std::uint64_t m_limit,
                                  int threads = 1) {
  detail::check_limit(run, m_limit);
  detail::check_reference_totals(run, m_limit);
  const double n = static_cast<double>(m_limit);
  const auto means = detail::scalar_means(run, m_limit);

  Grid<double> mean_i(run.config.width, run.config.height);
  run.visit_frames(
      0, m_limit,
      [&](std::uint64_t, const Grid<float>& f) {
        for (std::size_t p = 0; p < f.size(); ++p)
          mean_i[p] += f[p];
      },
      threads);
  for (std::size_t p = 0; p < mean_i.size(); ++p)
    mean_i[p] /= n;

  Grid<double> acc_s(run.config.width, run.config.height);
  Grid<double> acc_r(run.config.width, run.config.height);
  run.visit_frames(
      0, m_limit,
      [&](std::uint64_t m, const Grid<float>& f) {
        const double ds = run.records[m].S - means.S;
        const double dr = run.records[m].R - means.R;
        for (std::size_t p = 0; p < f.size(); ++p) {
          const double di = f[p] - mean_i[p];
          acc_s[p] += ds * di;
          acc_r[p] += dr * di;
        }
      },
      threads);

  const double ratio = means.S / means.R;
  Grid<double> img(run.config.width, run.config.height);
  for (std::size_t p = 0; p < img.size(); ++p)
    img[p] = acc_s[p] / n - ratio * (acc_r[p] / n);
  return {std::move(img), Method::DGI, m_limit};
}

/// Grid arithmetic used by the register-difference estimator. The real
/// implementation below; tests substitute an operation-counting double to
/// certify the per-frame work is additions only.
struct GridOps {
  static void accumulate(Grid<double>& acc, const Grid<float>& frame) {
    for (std::size_t p = 0; p < acc.size(); ++p)
      acc[p] += frame[p];
  }
  static Grid<double> mean_difference(const Grid<double>& a, const Grid<double>& b,
                                      double k) {
    Grid<double> out(a.width(), a.height());
    for (std::size_t p = 0; p < out.size(); ++p)
      out[p] = a[p] / k - b[p] / k;
    return out;
  }
  static void scale(Grid<double>& g, double s) {
    for (std::size_t p = 0; p < g.size(); ++p)
      g[p] *= s;
  }
};

/// Register-difference image: mean of register A frames minus mean of
/// register B frames. Each selected frame is touched exactly once, with
/// plain additions — no per-frame scalar multiplies anywhere in the path.
template <typename Ops = GridOps>
ReconImage reconstruct_dttci(const AcquisitionRun& run, const Registers& regs,
                             int threads = 1) {
  if (!regs.balanced())
    throw precondition_error("registers must be balanced (|A| = |B| >= 1) "
                             "before reconstruction");
  Grid<double> sum_a(run.config.width, run.config.height);
  Grid<double> sum_b(run.config.width, run.config.height);
  run.visit_frames_at(
      regs.a, [&](std::uint64_t, const Grid<float>& f) { Ops::accumulate(sum_a, f); },
      threads);
  run.visit_frames_at(
      regs.b, [&](std::uint64_t, const Grid<float>& f) { Ops::accumulate(sum_b, f); },
      threads);
  ReconImage img{Ops::mean_difference(sum_a, sum_b, static_cast<double>(regs.k())),
                 Method::DTTCI, 2 * regs.k()};
  return img;
}

/// Zero-threshold register split over the first m_limit records: frames
/// grouped by the sign of dT against the exact prefix mean, then balanced.
inline Registers ci_registers(const AcquisitionRun& run, std::uint64_t m_limit) {
  detail::check_limit(run, m_limit);
  const double t_mean = estimate_mean_transmission(run, m_limit);
  return balance_registers(
      partition_frames(run, ThresholdPair{t_mean, 0.0, 0.0}, m_limit), run);
}

/// Correspondence imaging: the zero-threshold limit, combined exactly like
/// the register-difference estimator. frames_used reports the prefix length
/// the split drew from; the balanced register size is 2*k.
inline ReconImage reconstruct_ci(const AcquisitionRun& run, std::uint64_t m_limit,
                                 int threads = 1) {
  const Registers regs = ci_registers(run, m_limit);
  ReconImage img = reconstruct_dttci(run, regs, threads);
  img.method = Method::CI;
  img.frames_used = m_limit;
  return img;
}

} // namespace ghostkit
