#pragma once

#include "types.hpp"

namespace unmix::prox {

// Feasibility slack used when asserting simplex membership of outputs.
inline constexpr double kSimplexTol = 1e-9;

struct ProxParams {
  double lambda = 0.0;  // regularizer weight
  double step = 1.0;    // quadratic coupling weight (PALM step constant)
  int support_cap = 0;  // optional hard nonzero-count bound, 0 = unbounded
};

// Euclidean projection onto the unit simplex {x >= 0, sum x = 1}.
// Sort-based, O(n log n).
Vector project_simplex(const Vector& x);

// argmin_z lambda*nnz(z) + (step/2)*||z - x||^2  s.t. z >= 0.
// Separable: keep x_j iff x_j > 0 and (step/2) x_j^2 >= lambda; the tie
// (step/2) x_j^2 == lambda keeps the entry. With support_cap > 0 the kept
// entries beyond the cap are dropped smallest-first (index breaks ties).
Vector prox_nonneg_l0(const Vector& x, const ProxParams& p);

// Per class block keep only the largest strictly positive entry, zero the
// rest. A block with no positive entry becomes all zero. Value ties keep the
// lowest index.
Vector prox_nonneg_block_top1(const Vector& x, const GroupingMap& g);

// argmin_z lambda*nnz(z) + (step/2)*||z - x||^2  s.t. z on the simplex.
// Exact via support-size scan: for each v = 1..K project the v largest
// entries of x onto the simplex and score; ties prefer the smaller support.
Vector prox_simplex_l0(const Vector& x, const ProxParams& p);

// argmin_z lambda_group*sum_k||z_k||_2 + lambda_l1*||z||_1
//          + (step/2)*||z - x||^2  s.t. z >= 0.
// Clip to >= 0, soft-threshold by lambda_l1/step, then shrink each class
// block by max(0, 1 - (lambda_group/step)/||block||_2).
Vector prox_sparse_group(const Vector& x, const GroupingMap& g,
                         double lambda_group, double lambda_l1, double step);

}  // namespace unmix::prox
