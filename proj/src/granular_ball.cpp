#include "mgcn/granular_ball.hpp"

#include "mgcn/errors.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace mgcn {

RepresentativeStrategy parse_representative_strategy(const std::string& name) {
    if (name == "medoid") return RepresentativeStrategy::medoid;
    if (name == "center") return RepresentativeStrategy::center;
    if (name == "density_peak") return RepresentativeStrategy::density_peak;
    throw ConfigError("unknown representative strategy '" + name + "' (medoid, center, density_peak)");
}

std::string to_string(RepresentativeStrategy s) {
    switch (s) {
    case RepresentativeStrategy::medoid: return "medoid";
    case RepresentativeStrategy::center: return "center";
    case RepresentativeStrategy::density_peak: return "density_peak";
    }
    return "medoid";
}

std::size_t GBPartition::locked_count() const {
    std::size_t count = 0;
    for (const auto& b : balls) count += b.locked ? 1 : 0;
    return count;
}

std::vector<std::size_t> GBPartition::assignment() const {
    std::vector<std::size_t> owner(n, 0);
    for (std::size_t b = 0; b < balls.size(); ++b)
        for (std::size_t i : balls[b].members) owner[i] = b;
    return owner;
}

namespace {

std::vector<double> mean_of(std::span<const std::size_t> members, const Matrix& x) {
    std::vector<double> mean(x.cols(), 0.0);
    for (std::size_t i : members) {
        auto row = x.row_span(i);
        for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += row[c];
    }
    for (double& m : mean) m /= static_cast<double>(members.size());
    return mean;
}

std::size_t farthest_from(std::span<const std::size_t> members, const Matrix& x, std::span<const double> point) {
    std::size_t best = members[0];
    double best_dist = -1.0;
    for (std::size_t i : members) {
        const double d = squared_distance(x.row_span(i), point);
        if (d > best_dist) {
            best_dist = d;
            best = i;
        }
    }
    return best;
}

std::size_t medoid(std::span<const std::size_t> members, const Matrix& x) {
    std::size_t best = members[0];
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t i : members) {
        double cost = 0.0;
        for (std::size_t j : members) cost += euclidean_distance(x.row_span(i), x.row_span(j));
        if (cost < best_cost) {
            best_cost = cost;
            best = i;
        }
    }
    return best;
}

std::size_t nearest_to_mean(std::span<const std::size_t> members, const Matrix& x) {
    const auto mean = mean_of(members, x);
    std::size_t best = members[0];
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i : members) {
        const double d = squared_distance(x.row_span(i), mean);
        if (d < best_dist) {
            best_dist = d;
            best = i;
        }
    }
    return best;
}

std::size_t density_peak(std::span<const std::size_t> members, const Matrix& x) {
    // Gaussian-kernel density with bandwidth = mean pairwise distance.
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < members.size(); ++a) {
        for (std::size_t b = a + 1; b < members.size(); ++b) {
            total += euclidean_distance(x.row_span(members[a]), x.row_span(members[b]));
            ++pairs;
        }
    }
    const double sigma = pairs ? total / static_cast<double>(pairs) : 0.0;
    if (!(sigma > 1e-12)) return medoid(members, x);
    const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
    std::size_t best = members[0];
    double best_density = -1.0;
    for (std::size_t i : members) {
        double density = 0.0;
        for (std::size_t j : members) density += std::exp(-squared_distance(x.row_span(i), x.row_span(j)) * inv_two_var);
        if (density > best_density) {
            best_density = density;
            best = i;
        }
    }
    return best;
}

} // namespace

std::size_t representative(std::span<const std::size_t> members, const Matrix& x, RepresentativeStrategy strategy) {
    if (members.empty()) throw ContractError("representative: empty ball");
    if (members.size() == 1) return members[0];
    switch (strategy) {
    case RepresentativeStrategy::medoid: return medoid(members, x);
    case RepresentativeStrategy::center: return nearest_to_mean(members, x);
    case RepresentativeStrategy::density_peak: return density_peak(members, x);
    }
    return medoid(members, x);
}

std::optional<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>>
split_2means(std::span<const std::size_t> members, const Matrix& x, std::size_t max_iterations) {
    if (members.size() < 2) throw ContractError("split_2means: need at least 2 members");

    const auto mean = mean_of(members, x);
    const std::size_t first = farthest_from(members, x, mean);
    const std::size_t second = farthest_from(members, x, x.row_span(first));
    std::vector<double> c0(x.row_span(first).begin(), x.row_span(first).end());
    std::vector<double> c1(x.row_span(second).begin(), x.row_span(second).end());

    std::vector<char> side(members.size(), 0);
    std::vector<char> previous;
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        for (std::size_t k = 0; k < members.size(); ++k) {
            auto row = x.row_span(members[k]);
            side[k] = squared_distance(row, c1) < squared_distance(row, c0) ? 1 : 0;
        }
        if (side == previous) break;
        previous = side;

        std::vector<std::size_t> left, right;
        for (std::size_t k = 0; k < members.size(); ++k) (side[k] ? right : left).push_back(members[k]);
        if (left.empty() || right.empty()) return std::nullopt;
        c0 = mean_of(left, x);
        c1 = mean_of(right, x);
    }

    std::pair<std::vector<std::size_t>, std::vector<std::size_t>> out;
    for (std::size_t k = 0; k < members.size(); ++k) (side[k] ? out.second : out.first).push_back(members[k]);
    if (out.first.empty() || out.second.empty()) return std::nullopt;
    return out;
}

GBPartition generate_gbs(const Matrix& x, RepresentativeStrategy strategy) {
    GBPartition partition;
    partition.n = x.rows();
    if (x.rows() == 0) return partition;
    const double threshold = std::sqrt(static_cast<double>(x.rows()));

    std::deque<std::vector<std::size_t>> queue;
    std::vector<std::size_t> all(x.rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    queue.push_back(std::move(all));

    while (!queue.empty()) {
        std::vector<std::size_t> members = std::move(queue.front());
        queue.pop_front();
        bool locked = false;
        if (static_cast<double>(members.size()) > threshold) {
            auto halves = split_2means(members, x);
            if (halves) {
                queue.push_back(std::move(halves->first));
                queue.push_back(std::move(halves->second));
                continue;
            }
            locked = true;
        }
        GranularBall ball;
        ball.representative = representative(members, x, strategy);
        ball.members = std::move(members);
        ball.locked = locked;
        partition.balls.push_back(std::move(ball));
    }
    return partition;
}

} // namespace mgcn
