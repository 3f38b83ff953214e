#include "simulate.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <unistd.h>

#include "spherestat/sampling.hpp"

namespace spherestat::testing {

namespace {

std::vector<std::vector<double>> draw(const Eigen::MatrixXd& k, int replicates, std::uint64_t seed) {
    const Eigen::Index n = k.rows();
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) throw std::runtime_error("covariance matrix is not positive definite");
    const Eigen::MatrixXd l = llt.matrixL();

    SplitMix64 rng(seed);
    std::vector<std::vector<double>> out;
    Eigen::VectorXd z(n);
    for (int r = 0; r < replicates; ++r) {
        for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
        const Eigen::VectorXd y = l.triangularView<Eigen::Lower>() * z;
        out.emplace_back(y.data(), y.data() + n);
    }
    return out;
}

} // namespace

std::vector<std::vector<double>> gaussianReplicates(const std::vector<UnitVector>& points,
                                                    const std::function<double(double)>& covOfCos, int replicates,
                                                    std::uint64_t seed, double jitter) {
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double c = std::clamp(points[static_cast<std::size_t>(i)].dot(points[static_cast<std::size_t>(j)]), -1.0, 1.0);
            k(i, j) = k(j, i) = covOfCos(i == j ? 1.0 : c);
        }
        k(i, i) += jitter;
    }
    return draw(k, replicates, seed);
}

std::vector<std::vector<double>> gaussianReplicates(std::size_t n, const std::vector<double>& lowerTriangle,
                                                    int replicates, std::uint64_t seed, double jitter) {
    const auto m = static_cast<Eigen::Index>(n);
    if (lowerTriangle.size() != n * (n + 1) / 2) throw std::invalid_argument("lower triangle has the wrong size");
    Eigen::MatrixXd k(m, m);
    std::size_t at = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) k(i, j) = k(j, i) = lowerTriangle[at++];
        k(i, i) += jitter;
    }
    return draw(k, replicates, seed);
}

TempDir::TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("spherestat-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

} // namespace spherestat::testing
