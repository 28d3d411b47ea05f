#pragma once

#include "mgcn/matrix.hpp"

namespace mgcn {

/// Cosine similarity between the columns of f (d x d). A zero column has
/// similarity 0 with every column, itself included.
Matrix feature_similarity(const Matrix& f);

/// x * s: each row re-expressed through the column similarities.
Matrix similarity_features(const Matrix& x, const Matrix& s);

/// beta * max(x, xs) + (1 - beta) * (x + xs) / 2, pooling over the stacked pair.
Matrix mixed_pool(const Matrix& x, const Matrix& xs, double beta);

/// Full intra-view enhancement: similarity, projection, then mixed pooling.
Matrix enhance_features(const Matrix& x, double beta);

} // namespace mgcn
