#include <doctest.h>

#include "mgcn/errors.hpp"
#include "mgcn/feature_enhance.hpp"
#include "support.hpp"

#include <algorithm>
#include <cmath>

using namespace mgcn;

namespace {

// Cosine of columns i and j computed directly.
double column_cosine(const Matrix& f, std::size_t i, std::size_t j) {
    double dot = 0, ni = 0, nj = 0;
    for (std::size_t r = 0; r < f.rows(); ++r) {
        dot += f(r, i) * f(r, j);
        ni += f(r, i) * f(r, i);
        nj += f(r, j) * f(r, j);
    }
    if (ni == 0 || nj == 0) return 0.0;
    return dot / std::sqrt(ni * nj);
}

} // namespace

TEST_CASE("feature_similarity examples") {
    CHECK(max_abs_diff(feature_similarity(Matrix::identity(2)), Matrix::identity(2)) < 1e-15);

    const auto s = feature_similarity(Matrix::from_rows({{1, 2}, {1, 2}}));
    CHECK(s(0, 1) == doctest::Approx(1.0).epsilon(1e-15));

    const auto z = feature_similarity(Matrix::from_rows({{1, 0, 3}, {2, 0, -1}}));
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(z(1, k) == 0.0);
        CHECK(z(k, 1) == 0.0);
    }
    CHECK(z(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("feature_similarity properties") {
    Rng rng(14);
    Matrix f = testing::random_matrix(25, 6, rng);
    const auto s = feature_similarity(f);
    CHECK(is_symmetric(s, 1e-15));
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = 0; j < 6; ++j) {
            CHECK(s(i, j) >= -1.0);
            CHECK(s(i, j) <= 1.0);
            CHECK(s(i, j) == doctest::Approx(column_cosine(f, i, j)).epsilon(1e-12));
        }
    }
    for (std::size_t r = 0; r < f.rows(); ++r) f(r, 2) *= 37.5;
    CHECK(max_abs_diff(feature_similarity(f), s) < 1e-12);
}

TEST_CASE("similarity_features examples") {
    Rng rng(15);
    const Matrix x = testing::random_matrix(4, 3, rng);
    CHECK(similarity_features(x, Matrix::identity(3)) == x);
    CHECK(similarity_features(Matrix::from_rows({{1, 2}}), Matrix::from_rows({{0, 1}, {1, 0}})) ==
          Matrix::from_rows({{2, 1}}));
    CHECK(similarity_features(x, Matrix(3, 3)) == Matrix(4, 3));
    CHECK_THROWS_AS(similarity_features(x, Matrix(2, 2)), DimensionError);
}

TEST_CASE("mixed_pool examples") {
    const Matrix two = Matrix::from_rows({{2}});
    const Matrix four = Matrix::from_rows({{4}});
    CHECK(mixed_pool(two, four, 1.0)(0, 0) == 4.0);
    CHECK(mixed_pool(two, four, 0.0)(0, 0) == 3.0);
    CHECK(mixed_pool(two, four, 0.6)(0, 0) == doctest::Approx(3.6).epsilon(1e-15));
    CHECK(mixed_pool(four, two, 0.6)(0, 0) == doctest::Approx(3.6).epsilon(1e-15));
    CHECK_THROWS_AS(mixed_pool(two, four, 1.1), ConfigError);
    CHECK_THROWS_AS(mixed_pool(two, four, -0.1), ConfigError);
    CHECK_THROWS_AS(mixed_pool(two, Matrix(1, 2), 0.5), DimensionError);
}

TEST_CASE("mixed_pool properties") {
    Rng rng(16);
    const Matrix x = testing::random_matrix(10, 7, rng, -5, 5);
    for (double beta : {0.0, 0.3, 0.6, 1.0}) CHECK(mixed_pool(x, x, beta) == x);

    // xs >= x: output climbs toward max(x, xs) = xs as beta grows.
    Matrix xs = x;
    for (double& v : xs.data()) v += rng.uniform(0, 2);
    Matrix prev = mixed_pool(x, xs, 0.0);
    for (int k = 1; k <= 10; ++k) {
        const Matrix cur = mixed_pool(x, xs, 0.1 * k);
        for (std::size_t i = 0; i < cur.size(); ++i) CHECK(cur.data()[i] >= prev.data()[i]);
        prev = cur;
    }
    CHECK(max_abs_diff(prev, xs) < 1e-12);
}

TEST_CASE("enhance_features") {
    Rng rng(17);
    const Matrix x = testing::random_matrix(12, 5, rng);
    const auto h = enhance_features(x, 0.6);
    CHECK(h.same_shape(x));
    const Matrix xs = matmul(x, feature_similarity(x));
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double a = x.data()[i], b = xs.data()[i];
        CHECK(h.data()[i] == doctest::Approx(0.6 * std::max(a, b) + 0.4 * (a + b) / 2).epsilon(1e-12));
    }

    // Orthogonal columns give S = I, so enhancement changes nothing.
    const Matrix ortho = Matrix::from_rows({{1, 0}, {0, 2}, {0, 0}});
    CHECK(enhance_features(ortho, 0.6) == ortho);
}
