#pragma once

// Box optimization against the co-saliency, saliency and mediator
// references, and the iterate-until-stable loop around it.

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coloc/costs.hpp"
#include "coloc/error.hpp"
#include "coloc/geometry.hpp"
#include "coloc/imagery.hpp"
#include "coloc/parallel.hpp"
#include "coloc/prior.hpp"

namespace coloc {

struct ReferenceSet {
  BoundingBox cosaliency;  // z_c
  BoundingBox saliency;    // z_s
  BoundingBox mediator;    // z_o
};

struct ReferenceCosts {
  CostMatrix cosaliency;
  CostMatrix saliency;
  CostMatrix mediator;

  ReferenceCosts scaled(double factor) const {
    return {cosaliency.scaled(factor), saliency.scaled(factor), mediator.scaled(factor)};
  }
};

struct SolverConfig {
  double epsilon = 2.0;   // squared L2 step that counts as converged
  int max_iters = 30;
  std::optional<double> clamp_delta;  // default_clamp_delta() when unset
  double edge_threshold = 0.1;

  void validate() const {
    if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
    if (max_iters < 1) throw Error(ErrorCode::InvalidArgument, "max_iters must be at least 1");
    if (clamp_delta && !(*clamp_delta > 0.0 && *clamp_delta < 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "clamp delta must lie in (0,1)");
    }
  }
};

/// Sum over references of (z - z_k)^T M_k (z - z_k).
inline double qp_objective(const ReferenceSet& refs, const ReferenceCosts& costs,
                           const BoxVector& z) {
  const std::array<std::pair<const BoundingBox*, const CostMatrix*>, 3> terms{{
      {&refs.cosaliency, &costs.cosaliency},
      {&refs.saliency, &costs.saliency},
      {&refs.mediator, &costs.mediator},
  }};
  double total = 0.0;
  for (const auto& [box, cost] : terms) {
    const BoxVector ref = to_vector(*box);
    for (std::size_t i = 0; i < 4; ++i) {
      const double d = z[i] - ref[i];
      total += cost->diagonal()[i] * d * d;
    }
  }
  return total;
}

namespace detail {

// min  w_lo (x - c_lo)^2 + w_hi (y - c_hi)^2
// s.t. min_bound <= x,  y <= max_bound,  y >= x + 1
struct AxisProblem {
  double c_lo, w_lo;
  double c_hi, w_hi;
  double min_bound, max_bound;

  double objective(double x, double y) const {
    return w_lo * (x - c_lo) * (x - c_lo) + w_hi * (y - c_hi) * (y - c_hi);
  }
  // Candidates on y = x + 1 are built as x + 1.0, so the gap can land an
  // ulp short of 1.
  bool feasible(double x, double y) const {
    constexpr double kSlack = 1e-9;
    return x >= min_bound && y <= max_bound && y - x >= 1.0 - kSlack;
  }
};

// The feasible set is a triangle, so the minimizer is either the
// unconstrained stationary point or the minimizer along one of its three
// edges. Ties on the objective go to the point nearest the per-coordinate
// targets, which holds a zero-weight coordinate at its target.
inline std::array<double, 2> solve_axis(const AxisProblem& p) {
  if (p.max_bound < p.min_bound + 1.0) {
    throw Error(ErrorCode::InfeasibleConstraints, "edge span shorter than two pixels");
  }
  std::array<std::array<double, 2>, 4> candidates{};
  std::size_t n = 0;
  candidates[n++] = {p.c_lo, p.c_hi};
  candidates[n++] = {p.min_bound, std::clamp(p.c_hi, p.min_bound + 1.0, p.max_bound)};
  candidates[n++] = {std::clamp(p.c_lo, p.min_bound, p.max_bound - 1.0), p.max_bound};
  {
    // along y = x + 1
    const double w = p.w_lo + p.w_hi;
    const double x = w > 0.0 ? (p.w_lo * p.c_lo + p.w_hi * (p.c_hi - 1.0)) / w
                             : 0.5 * (p.c_lo + p.c_hi - 1.0);
    const double xc = std::clamp(x, p.min_bound, p.max_bound - 1.0);
    candidates[n++] = {xc, xc + 1.0};
  }

  std::optional<std::array<double, 2>> best;
  double best_value = 0.0;
  double best_spread = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [x, y] = candidates[i];
    if (!p.feasible(x, y)) continue;
    const double value = p.objective(x, y);
    const double spread = (x - p.c_lo) * (x - p.c_lo) + (y - p.c_hi) * (y - p.c_hi);
    const double tol = 1e-12 * (1.0 + std::abs(best_value));
    const bool better = !best || value < best_value - tol ||
                        (value <= best_value + tol && spread < best_spread);
    if (better) {
      best = candidates[i];
      best_value = value;
      best_spread = spread;
    }
  }
  return *best;
}

// Weighted mean of the three reference values for one coordinate; the
// mediator's value when all weights vanish.
inline std::pair<double, double> coordinate_target(const ReferenceSet& refs,
                                                   const ReferenceCosts& costs, std::size_t i) {
  const BoxVector zc = to_vector(refs.cosaliency);
  const BoxVector zs = to_vector(refs.saliency);
  const BoxVector zo = to_vector(refs.mediator);
  const double mc = costs.cosaliency.diagonal()[i];
  const double ms = costs.saliency.diagonal()[i];
  const double mo = costs.mediator.diagonal()[i];
  const double weight = mc + ms + mo;
  if (weight <= 0.0) return {zo[i], 0.0};
  return {(mc * zc[i] + ms * zs[i] + mo * zo[i]) / weight, weight};
}

}  // namespace detail

/// Global real-valued minimizer of the weighted deviation objective subject
/// to min(rows) <= t, t + 1 <= b <= max(rows) and the same for (l, r) over
/// columns. Diagonal costs decouple the problem into two 2-variable QPs.
inline BoxVector solve_qp(const ReferenceSet& refs, const ReferenceCosts& costs,
                          const EdgeProfile& edges) {
  if (edges.rows.empty() || edges.cols.empty()) {
    throw Error(ErrorCode::InfeasibleConstraints, "empty edge profile");
  }
  std::array<std::pair<double, double>, 4> targets{};
  for (std::size_t i = 0; i < 4; ++i) targets[i] = detail::coordinate_target(refs, costs, i);

  const detail::AxisProblem vertical{targets[0].first, targets[0].second,
                                     targets[1].first, targets[1].second,
                                     static_cast<double>(edges.min_row()),
                                     static_cast<double>(edges.max_row())};
  const detail::AxisProblem horizontal{targets[2].first, targets[2].second,
                                       targets[3].first, targets[3].second,
                                       static_cast<double>(edges.min_col()),
                                       static_cast<double>(edges.max_col())};
  const auto [t, b] = detail::solve_axis(vertical);
  const auto [l, r] = detail::solve_axis(horizontal);
  return {t, b, l, r};
}

inline bool satisfies_edges(const BoundingBox& box, const EdgeProfile& edges) {
  return box.t >= edges.min_row() && box.b <= edges.max_row() && box.b > box.t &&
         box.l >= edges.min_col() && box.r <= edges.max_col() && box.r > box.l;
}

/// Otsu foreground of the map, boxed by its extreme pixels.
inline BoundingBox extract_reference_box(const GrayMap& map) {
  return tight_box(binarize(map, otsu_threshold(map)));
}

enum class Termination { Converged, ForcedBreak };

constexpr std::string_view to_string(Termination t) {
  return t == Termination::Converged ? "Converged" : "ForcedBreak";
}

struct IterationRecord {
  int iteration = 0;  // 1-based
  BoundingBox box;
  BoundingBox anchor;
  std::array<double, 4> cost_cosaliency{};
  std::array<double, 4> cost_saliency{};
  std::array<double, 4> cost_mediator{};
  double step_sq_norm = 0.0;

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

struct IterationTrace {
  std::vector<IterationRecord> records;
  Termination termination = Termination::Converged;
  // Set when one input map was degenerate and the other map's reference box
  // was returned without optimizing.
  std::optional<ErrorCode> fallback;

  std::size_t length() const noexcept { return records.size(); }

  friend bool operator==(const IterationTrace&, const IterationTrace&) = default;
};

struct Colocalization {
  BoundingBox box;
  IterationTrace trace;
};

namespace detail {

inline double squared_step(const BoundingBox& a, const BoundingBox& b) {
  const BoxVector va = to_vector(a);
  const BoxVector vb = to_vector(b);
  double sum = 0.0;
  for (std::size_t i = 0; i < 4; ++i) sum += (va[i] - vb[i]) * (va[i] - vb[i]);
  return sum;
}

inline std::optional<BoundingBox> try_reference_box(const GrayMap& map) {
  try {
    return extract_reference_box(map);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DegenerateMap) return std::nullopt;
    throw;
  }
}

inline double quality_or_floor(const GrayMap& map) {
  try {
    return quality_score(map);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DegenerateMap) return kMinQuality;
    throw;
  }
}

inline Colocalization single_reference(const BoundingBox& box, ErrorCode why) {
  Colocalization out;
  out.box = box;
  IterationRecord record;
  record.iteration = 1;
  record.box = box;
  record.anchor = box;
  out.trace.records.push_back(record);
  out.trace.termination = Termination::Converged;
  out.trace.fallback = why;
  return out;
}

}  // namespace detail

/// Localizes the common object in one image. The mediator starts at the
/// co-saliency box; each round re-anchors on the prior, rebuilds the three
/// cost matrices, solves and rounds, and stops once the squared step falls
/// below epsilon or max_iters rounds have run.
inline Colocalization colocalize_image(const GrayMap& saliency, const GrayMap& cosaliency,
                                       const GrayMap& image, const SolverConfig& cfg) {
  cfg.validate();
  if (!saliency.same_shape(cosaliency) || !saliency.same_shape(image)) {
    throw Error(ErrorCode::DimensionMismatch, "image, saliency and co-saliency sizes differ");
  }
  const int width = image.width();
  const int height = image.height();

  const std::optional<BoundingBox> z_c = detail::try_reference_box(cosaliency);
  const std::optional<BoundingBox> z_s = detail::try_reference_box(saliency);
  if (!z_c && !z_s) {
    throw Error(ErrorCode::DegenerateSaliency, "saliency and co-saliency maps are both constant");
  }
  if (!z_s) return detail::single_reference(*z_c, ErrorCode::DegenerateSaliency);
  if (!z_c) return detail::single_reference(*z_s, ErrorCode::DegenerateCosaliency);

  const QualityScores quality{detail::quality_or_floor(saliency),
                              detail::quality_or_floor(cosaliency)};
  const GrayMap prior = absolute_prior(saliency, cosaliency, quality);
  std::optional<PriorRegions> regions;
  try {
    regions.emplace(prior);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateMap) throw;
  }

  const EdgeProfile edges = edge_profile(image, cfg.edge_threshold);
  const double delta = cfg.clamp_delta.value_or(default_clamp_delta(width, height));

  Colocalization out;
  BoundingBox mediator = *z_c;
  out.trace.termination = Termination::ForcedBreak;
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    const BoundingBox anchor = regions ? regions->anchored(mediator) : mediator;
    const ReferenceSet refs{*z_c, *z_s, mediator};
    const ReferenceCosts costs{rejection_cost(anchor, refs.cosaliency, width, height, delta),
                               rejection_cost(anchor, refs.saliency, width, height, delta),
                               rejection_cost(anchor, refs.mediator, width, height, delta)};
    const BoundingBox z = round_to_box(solve_qp(refs, costs, edges), width, height);
    const double step = detail::squared_step(z, mediator);

    out.trace.records.push_back({iter, z, anchor, costs.cosaliency.diagonal(),
                                 costs.saliency.diagonal(), costs.mediator.diagonal(), step});
    out.box = z;
    if (step < cfg.epsilon) {
      out.trace.termination = Termination::Converged;
      break;
    }
    mediator = z;
  }
  return out;
}

struct CaseMaps {
  GrayMap image;
  GrayMap saliency;
  GrayMap cosaliency;
};

/// Result slot of a batch run: a localization or the error that stopped it.
struct CaseOutcome {
  std::optional<Colocalization> value;
  std::optional<ErrorCode> error;
  std::string message;

  bool ok() const noexcept { return value.has_value(); }
};

/// colocalize_image over every case, `jobs` at a time (0 = all cores).
/// Failures stay in their own slot; output order follows input order.
inline std::vector<CaseOutcome> colocalize_set(const std::vector<CaseMaps>& cases,
                                               const SolverConfig& cfg, unsigned jobs = 0) {
  std::vector<CaseOutcome> outcomes(cases.size());
  parallel_for(cases.size(), jobs, [&](std::size_t i) {
    try {
      outcomes[i].value =
          colocalize_image(cases[i].saliency, cases[i].cosaliency, cases[i].image, cfg);
    } catch (const Error& e) {
      outcomes[i].error = e.code();
      outcomes[i].message = e.what();
    } catch (const std::exception& e) {
      outcomes[i].error = ErrorCode::InvalidArgument;
      outcomes[i].message = e.what();
    }
  });
  return outcomes;
}

}  // namespace coloc
