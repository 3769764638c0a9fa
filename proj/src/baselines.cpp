#include "owadd/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "owadd/rng.hpp"
#include "owadd/stats.hpp"

namespace owadd {

KsddDetector::KsddDetector(const Eigen::MatrixXd& first_chunk, int window_size,
                           double threshold)
    : window_size_(window_size), threshold_(threshold), n_features_(first_chunk.cols()) {
    if (window_size < 2) throw std::invalid_argument("KsddDetector: window_size must be >= 2");
    if (first_chunk.rows() == 0) throw std::invalid_argument("KsddDetector: first chunk is empty");
    for (Eigen::Index r = 0; r < first_chunk.rows(); ++r) {
        push_sample(first_chunk.row(r).mean());
    }
}

bool KsddDetector::push_sample(double value) {
    if (reference_.size() < static_cast<std::size_t>(window_size_)) {
        reference_.push_back(value);
        return false;
    }
    current_.push_back(value);
    if (current_.size() > static_cast<std::size_t>(window_size_)) current_.pop_front();
    if (current_.size() < static_cast<std::size_t>(window_size_)) return false;

    const std::vector<double> ref(reference_.begin(), reference_.end());
    const std::vector<double> cur(current_.begin(), current_.end());
    if (ks_two_sample(ref, cur).p_value < threshold_) {
        reference_.assign(current_.begin(), current_.end());
        current_.clear();
        return true;
    }
    return false;
}

bool KsddDetector::process_chunk(const Eigen::MatrixXd& chunk) {
    if (chunk.cols() != n_features_) {
        throw std::invalid_argument("KsddDetector: chunk width mismatch");
    }
    bool drift = false;
    for (Eigen::Index r = 0; r < chunk.rows(); ++r) {
        drift |= push_sample(chunk.row(r).mean());
    }
    return drift;
}

namespace {

Eigen::VectorXi assign_nearest(const Eigen::MatrixXd& rows, const Eigen::MatrixXd& centroids) {
    Eigen::VectorXi assignment(rows.rows());
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        double best = std::numeric_limits<double>::infinity();
        int best_k = 0;
        for (Eigen::Index k = 0; k < centroids.rows(); ++k) {
            const double dist = (rows.row(r) - centroids.row(k)).squaredNorm();
            if (dist < best) {
                best = dist;
                best_k = static_cast<int>(k);
            }
        }
        assignment(r) = best_k;
    }
    return assignment;
}

// Farthest-point seeding: random first center, then repeatedly the sample
// farthest from all chosen centers.
Eigen::MatrixXd seed_centroids(const Eigen::MatrixXd& rows, int k, Rng& rng) {
    Eigen::MatrixXd centroids(k, rows.cols());
    const Eigen::Index first = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(rows.rows())));
    centroids.row(0) = rows.row(first);
    Eigen::VectorXd min_dist =
        (rows.rowwise() - centroids.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        Eigen::Index farthest = 0;
        min_dist.maxCoeff(&farthest);
        centroids.row(c) = rows.row(farthest);
        const Eigen::VectorXd dist =
            (rows.rowwise() - centroids.row(c)).rowwise().squaredNorm();
        min_dist = min_dist.cwiseMin(dist);
    }
    return centroids;
}

} // namespace

CentroidNovelty::CentroidNovelty(const Eigen::MatrixXd& first_chunk, int n_clusters,
                                 std::uint64_t seed) {
    if (n_clusters < 1) throw std::invalid_argument("CentroidNovelty: n_clusters must be >= 1");
    if (first_chunk.rows() < n_clusters) {
        throw std::invalid_argument("CentroidNovelty: fewer samples than clusters");
    }
    Rng rng(seed);
    centroids_ = seed_centroids(first_chunk, n_clusters, rng);

    Eigen::VectorXi assignment = assign_nearest(first_chunk, centroids_);
    for (int iter = 0; iter < 100; ++iter) {
        Eigen::MatrixXd updated = Eigen::MatrixXd::Zero(n_clusters, first_chunk.cols());
        Eigen::VectorXi counts = Eigen::VectorXi::Zero(n_clusters);
        for (Eigen::Index r = 0; r < first_chunk.rows(); ++r) {
            updated.row(assignment(r)) += first_chunk.row(r);
            ++counts(assignment(r));
        }
        for (int c = 0; c < n_clusters; ++c) {
            if (counts(c) > 0) {
                updated.row(c) /= static_cast<double>(counts(c));
            } else {
                // re-seed an empty cluster at the sample farthest from its centroid
                Eigen::Index farthest = 0;
                double best = -1.0;
                for (Eigen::Index r = 0; r < first_chunk.rows(); ++r) {
                    const double dist =
                        (first_chunk.row(r) - centroids_.row(assignment(r))).squaredNorm();
                    if (dist > best) {
                        best = dist;
                        farthest = r;
                    }
                }
                updated.row(c) = first_chunk.row(farthest);
            }
        }
        const double shift = (updated - centroids_).rowwise().norm().maxCoeff();
        centroids_ = std::move(updated);
        assignment = assign_nearest(first_chunk, centroids_);
        if (shift < 1e-10) break;
    }

    // 95th-percentile training distance per centroid (nearest-rank)
    radii_.resize(n_clusters);
    for (int c = 0; c < n_clusters; ++c) {
        std::vector<double> dists;
        for (Eigen::Index r = 0; r < first_chunk.rows(); ++r) {
            if (assignment(r) == c) {
                dists.push_back((first_chunk.row(r) - centroids_.row(c)).norm());
            }
        }
        if (dists.empty()) {
            radii_(c) = 0.0;
            continue;
        }
        std::sort(dists.begin(), dists.end());
        const std::size_t rank =
            static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(dists.size())));
        radii_(c) = dists[std::min(rank == 0 ? 0 : rank - 1, dists.size() - 1)];
    }
}

std::vector<bool> CentroidNovelty::labels(const Eigen::MatrixXd& chunk) const {
    if (chunk.cols() != centroids_.cols()) {
        throw std::invalid_argument("CentroidNovelty: chunk width mismatch");
    }
    std::vector<bool> out(static_cast<std::size_t>(chunk.rows()));
    for (Eigen::Index r = 0; r < chunk.rows(); ++r) {
        bool known = false;
        for (Eigen::Index c = 0; c < centroids_.rows() && !known; ++c) {
            known = (chunk.row(r) - centroids_.row(c)).norm() <= radii_(c);
        }
        out[static_cast<std::size_t>(r)] = known;
    }
    return out;
}

} // namespace owadd
