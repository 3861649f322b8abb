#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "ghostkit/acquisition.hpp"
#include "ghostkit/errors.hpp"

namespace ghostkit {

/// Double threshold around the pre-estimated mean transmission. Both cut
/// magnitudes are nonnegative; the upper cut sits at t_mean_est + t0_plus,
/// the lower at t_mean_est - t0_minus.
struct ThresholdPair {
  double t_mean_est = 0.0;
  double t0_plus = 0.0;
  double t0_minus = 0.0;

  void validate() const {
    if (!std::isfinite(t_mean_est) || !std::isfinite(t0_plus) ||
        !std::isfinite(t0_minus))
      throw precondition_error("thresholds must be finite");
    if (t0_plus < 0.0 || t0_minus < 0.0)
      throw precondition_error("threshold magnitudes must be nonnegative");
  }
};

/// Frame index registers: A holds frames with dT above the upper cut,
/// B frames below the lower cut. Indices stay in ascending frame order.
struct Registers {
  std::vector<std::uint64_t> a;
  std::vector<std::uint64_t> b;
  ThresholdPair thresholds;

  bool balanced() const { return !a.empty() && a.size() == b.size(); }
  std::uint64_t k() const { return a.size(); }
};

namespace detail {

inline std::uint64_t resolve_limit(const AcquisitionRun& run, std::uint64_t m_limit,
                                   const char* what) {
  if (m_limit == 0)
    return run.records.size();
  if (m_limit > run.records.size())
    throw insufficient_frames_error(std::string(what) + ": requested " +
                                    std::to_string(m_limit) + " frames, run has " +
                                    std::to_string(run.records.size()));
  return m_limit;
}

} // namespace detail

/// Arithmetic mean of T over the first n_est records — the cheap stand-in
/// for the full-run mean. n_est equal to the run length gives the exact
/// mean, which the oracle tests use.
inline double estimate_mean_transmission(const AcquisitionRun& run,
                                         std::uint64_t n_est) {
  if (n_est == 0)
    throw precondition_error("mean transmission estimate needs n_est >= 1");
  if (n_est > run.records.size())
    throw insufficient_frames_error(
        "n_est = " + std::to_string(n_est) + " exceeds run length " +
        std::to_string(run.records.size()));
  double sum = 0.0;
  for (std::uint64_t m = 0; m < n_est; ++m)
    sum += run.records[m].T;
  return sum / static_cast<double>(n_est);
}

/// Select frames beyond the thresholds among the first m_limit records
/// (0 = all). Boundary equality lands in neither register.
inline Registers partition_frames(const AcquisitionRun& run, const ThresholdPair& thr,
                                  std::uint64_t m_limit = 0) {
  thr.validate();
  const std::uint64_t limit = detail::resolve_limit(run, m_limit, "partition_frames");

  Registers regs;
  regs.thresholds = thr;
  for (std::uint64_t m = 0; m < limit; ++m) {
    const double dt = run.records[m].T - thr.t_mean_est;
    if (dt > thr.t0_plus)
      regs.a.push_back(m);
    else if (dt < -thr.t0_minus)
      regs.b.push_back(m);
  }
  if (regs.a.empty())
    throw empty_register_error("register A is empty: no frame exceeds "
                               "t_mean_est + t0_plus");
  if (regs.b.empty())
    throw empty_register_error("register B is empty: no frame falls below "
                               "t_mean_est - t0_minus");
  return regs;
}

/// Equalize register sizes by deleting, from the larger register only, the
/// entries with the smallest |dT| (ties: larger frame index goes first).
/// Already-balanced input passes through unchanged.
inline Registers balance_registers(const Registers& regs, const AcquisitionRun& run) {
  if (regs.a.empty() || regs.b.empty())
    throw precondition_error("balance_registers needs both registers nonempty");
  if (regs.a.size() == regs.b.size())
    return regs;

  Registers out = regs;
  std::vector<std::uint64_t>& larger = out.a.size() > out.b.size() ? out.a : out.b;
  const std::size_t excess = larger.size() - std::min(out.a.size(), out.b.size());

  std::vector<std::uint64_t> by_margin = larger;
  std::sort(by_margin.begin(), by_margin.end(),
            [&](std::uint64_t ma, std::uint64_t mb) {
              const double da = std::abs(run.records[ma].T - regs.thresholds.t_mean_est);
              const double db = std::abs(run.records[mb].T - regs.thresholds.t_mean_est);
              if (da != db)
                return da < db;
              return ma > mb;
            });
  std::unordered_set<std::uint64_t> doomed(by_margin.begin(),
                                           by_margin.begin() + excess);
  std::erase_if(larger, [&](std::uint64_t m) { return doomed.contains(m); });
  return out;
}

/// Deterministic replacement for threshold trial-and-error: place each cut
/// midway between the k-th and (k+1)-th largest excursion on its side, so
/// partition_frames yields exactly k frames per register. When k uses up a
/// whole side, the cut sits halfway between the weakest selected excursion
/// and zero. Tied excursions straddling the cut make an exact-k selection
/// impossible and are rejected.
inline ThresholdPair thresholds_for_count(const AcquisitionRun& run, std::uint64_t k,
                                          double t_mean_est,
                                          std::uint64_t m_limit = 0) {
  if (k == 0)
    throw precondition_error("thresholds_for_count needs k >= 1");
  const std::uint64_t limit =
      detail::resolve_limit(run, m_limit, "thresholds_for_count");

  std::vector<double> pos, neg;
  for (std::uint64_t m = 0; m < limit; ++m) {
    const double dt = run.records[m].T - t_mean_est;
    if (dt > 0.0)
      pos.push_back(dt);
    else if (dt < 0.0)
      neg.push_back(-dt);
  }
  if (k > pos.size() || k > neg.size())
    throw insufficient_frames_error(
        "k = " + std::to_string(k) + " exceeds side counts (positive: " +
        std::to_string(pos.size()) + ", negative: " + std::to_string(neg.size()) +
        ")");

  auto cut_for = [k](std::vector<double>& side) {
    std::sort(side.begin(), side.end(), std::greater<>());
    const double kth = side[k - 1];
    if (k == side.size())
      return 0.5 * kth;
    const double next = side[k];
    if (kth == next)
      throw precondition_error("tied transmission excursions: no threshold "
                               "selects exactly k frames on this side");
    double cut = 0.5 * (kth + next);
    if (cut >= kth) // adjacent doubles can round the midpoint up
      cut = next;
    return cut;
  };

  ThresholdPair thr;
  thr.t_mean_est = t_mean_est;
  thr.t0_plus = cut_for(pos);
  thr.t0_minus = cut_for(neg);
  return thr;
}

} // namespace ghostkit
