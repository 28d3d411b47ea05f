#pragma once

#include "mgcn/autodiff.hpp"
#include "mgcn/granular_ball.hpp"
#include "mgcn/matrix.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace mgcn {

// Adjacencies are dense N x N matrices: nonnegative, symmetric, zero diagonal.
// Self-loops appear only inside normalize_adjacency.

/// Complete graph inside every ball.
Matrix intra_adjacency(const GBPartition& p);

/// Complete bipartite block between each ball and its nearest other ball
/// (representative distance, ties to the lower ball index), symmetrized by
/// elementwise max. A single ball yields the zero matrix.
Matrix inter_adjacency(const GBPartition& p, const Matrix& x);

/// alpha * inter + (1 - alpha) * intra.
Matrix fuse_view(double alpha, const Matrix& inter, const Matrix& intra);
ad::Var fuse_view(const ad::Var& alpha, const ad::Var& inter, const ad::Var& intra);

/// Learnable scalars of the topology fusion.
struct TopologyParams {
    double alpha_logit = 0.0;
    std::vector<double> pi_logits;
    bool learnable = true;

    static TopologyParams uniform(std::size_t views, double alpha = 0.5, bool learnable = true);
    double alpha() const;
    std::vector<double> pi() const;
};

double logistic(double x);
double logit(double p);
/// Numerically stable softmax of a vector.
std::vector<double> softmax(std::span<const double> logits);

/// sum_v softmax(pi_logits)_v * per_view[v].
Matrix fuse_views(const TopologyParams& params, std::span<const Matrix> per_view);
/// Differentiable form; pi_logits is a 1 x V row.
ad::Var fuse_views(const ad::Var& pi_logits, std::span<const ad::Var> per_view);

/// D^{-1/2} (A + I) D^{-1/2}.
Matrix normalize_adjacency(const Matrix& a);

/// Fraction of support edges {(i, j): i < j, a(i, j) > 0} whose endpoints
/// share a label. Throws ContractError for an empty edge set.
double homophily_ratio(const Matrix& a, std::span<const int> labels);
std::size_t edge_count(const Matrix& a);

/// Each node linked to its k nearest Euclidean neighbours (ties to the lower
/// index), symmetrized by elementwise max. Requires 1 <= k <= N-1.
Matrix knn_adjacency(const Matrix& x, std::size_t k);

/// Elementwise max over matrices of equal shape (support union).
Matrix elementwise_max(std::span<const Matrix> ms);

} // namespace mgcn
