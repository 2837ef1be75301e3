#pragma once

// Brute-force reference for the box QP: every integer (t, b) and (l, r)
// pair allowed by the edge profile, scored straight from the references.

#include <array>
#include <limits>
#include <random>

#include "coloc/solver.hpp"
#include "test_support.hpp"

namespace coloc::testing {

struct QpInstance {
  int width = 0;
  int height = 0;
  ReferenceSet refs;
  ReferenceCosts costs;
  EdgeProfile edges;
};

/// Full quadratic form sum_k (z - z_k)^T M_k (z - z_k) over all 16 entries.
inline double direct_objective(const QpInstance& q, const std::array<double, 4>& z) {
  const BoundingBox* boxes[3] = {&q.refs.cosaliency, &q.refs.saliency, &q.refs.mediator};
  const CostMatrix* mats[3] = {&q.costs.cosaliency, &q.costs.saliency, &q.costs.mediator};
  double total = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double ref[4] = {double(boxes[k]->t), double(boxes[k]->b), double(boxes[k]->l),
                           double(boxes[k]->r)};
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        total += (z[i] - ref[i]) * (*mats[k])(i, j) * (z[j] - ref[j]);
      }
    }
  }
  return total;
}

/// Least objective over all feasible integer boxes. With diagonal costs the
/// objective is a (t,b) term plus an (l,r) term under separate constraints,
/// so the minimum over the product grid is the sum of the two axis minima;
/// each axis is enumerated exhaustively.
inline double grid_best(const QpInstance& q) {
  const CostMatrix* mats[3] = {&q.costs.cosaliency, &q.costs.saliency, &q.costs.mediator};
  const BoundingBox* boxes[3] = {&q.refs.cosaliency, &q.refs.saliency, &q.refs.mediator};
  auto axis_term = [&](std::size_t first, int x, int y) {
    double total = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double lo_ref = first == 0 ? boxes[k]->t : boxes[k]->l;
      const double hi_ref = first == 0 ? boxes[k]->b : boxes[k]->r;
      total += (*mats[k])(first, first) * (x - lo_ref) * (x - lo_ref);
      total += (*mats[k])(first + 1, first + 1) * (y - hi_ref) * (y - hi_ref);
    }
    return total;
  };
  auto axis_best = [&](std::size_t first, int lo, int hi) {
    double best = std::numeric_limits<double>::infinity();
    for (int x = lo; x <= hi; ++x) {
      for (int y = x + 1; y <= hi; ++y) best = std::min(best, axis_term(first, x, y));
    }
    return best;
  };
  return axis_best(0, q.edges.min_row(), q.edges.max_row()) +
         axis_best(2, q.edges.min_col(), q.edges.max_col());
}

inline QpInstance random_qp_instance(std::mt19937_64& rng, int max_side = 64) {
  QpInstance q;
  q.width = 4 + static_cast<int>(rng() % static_cast<unsigned>(max_side - 3));
  q.height = 4 + static_cast<int>(rng() % static_cast<unsigned>(max_side - 3));
  q.refs = {random_box(rng, q.width, q.height), random_box(rng, q.width, q.height),
            random_box(rng, q.width, q.height)};
  std::uniform_real_distribution<double> cost(0.0, 5.0);
  auto diag = [&] {
    std::array<double, 4> d{};
    for (double& x : d) x = (rng() % 10 == 0) ? 0.0 : cost(rng);
    return CostMatrix(d);
  };
  q.costs = {diag(), diag(), diag()};
  const BoundingBox span = random_box(rng, q.width, q.height);
  q.edges.rows = {span.t, span.b};
  q.edges.cols = {span.l, span.r};
  return q;
}

}  // namespace coloc::testing
