#pragma once

#include "mgcn/matrix.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mgcn {

enum class RepresentativeStrategy { medoid, center, density_peak };

RepresentativeStrategy parse_representative_strategy(const std::string& name);
std::string to_string(RepresentativeStrategy s);

struct GranularBall {
    std::vector<std::size_t> members;  // ascending node indices
    std::size_t representative = 0;
    /// Set when 2-means could not split an oversized ball (duplicate points).
    bool locked = false;
};

/// Disjoint cover of [0, n) by granular balls.
struct GBPartition {
    std::vector<GranularBall> balls;
    std::size_t n = 0;

    std::size_t locked_count() const;
    /// Ball index of every node.
    std::vector<std::size_t> assignment() const;
};

/// Splits `members` (rows of x) into two clusters with Lloyd iterations
/// started from a farthest-pair seeding. Returns nullopt when no split
/// exists (one side empty, e.g. all points identical).
std::optional<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>>
split_2means(std::span<const std::size_t> members, const Matrix& x, std::size_t max_iterations = 100);

/// Queue-driven splitting of all rows of x until every ball has at most
/// sqrt(N) members or is locked. Representatives use `strategy`.
GBPartition generate_gbs(const Matrix& x, RepresentativeStrategy strategy = RepresentativeStrategy::medoid);

/// Representative node of a nonempty member set; ties go to the lowest index.
std::size_t representative(std::span<const std::size_t> members, const Matrix& x,
                           RepresentativeStrategy strategy);

} // namespace mgcn
