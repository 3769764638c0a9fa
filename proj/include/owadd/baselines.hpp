#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <deque>
#include <vector>

namespace owadd {

/// Kolmogorov-Smirnov drift detector over per-sample feature means. Two
/// windows slide sample by sample; once the current window is full every
/// new sample triggers a test, and a drift anywhere in a chunk flags the
/// chunk. On drift the reference window is replaced by the current one.
class KsddDetector {
public:
    explicit KsddDetector(const Eigen::MatrixXd& first_chunk, int window_size = 200,
                          double threshold = 0.005);

    bool process_chunk(const Eigen::MatrixXd& chunk);

    int window_size() const { return window_size_; }
    double threshold() const { return threshold_; }

private:
    bool push_sample(double value);

    int window_size_;
    double threshold_;
    Eigen::Index n_features_;
    std::deque<double> reference_;
    std::deque<double> current_;
};

/// Nearest-centroid novelty baseline: k-means centroids fitted on the
/// first chunk, per-centroid radius at the 95th percentile of training
/// distances. Samples beyond every radius are labeled unknown.
class CentroidNovelty {
public:
    CentroidNovelty(const Eigen::MatrixXd& first_chunk, int n_clusters, std::uint64_t seed);

    /// true = known.
    std::vector<bool> labels(const Eigen::MatrixXd& chunk) const;

    const Eigen::MatrixXd& centroids() const { return centroids_; }
    const Eigen::VectorXd& radii() const { return radii_; }

private:
    Eigen::MatrixXd centroids_; // one row per centroid
    Eigen::VectorXd radii_;
};

} // namespace owadd
