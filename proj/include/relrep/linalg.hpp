#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "relrep/error.hpp"

namespace relrep {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

/// n x d matrix of embeddings, one sample per row. Construction validates
/// that the matrix is non-empty and finite.
class LatentMatrix {
public:
    LatentMatrix() = default;
    explicit LatentMatrix(Matrix data);

    const Matrix& data() const noexcept { return data_; }
    Index rows() const noexcept { return data_.rows(); }
    Index cols() const noexcept { return data_.cols(); }
    auto row(Index i) const { return data_.row(i); }

    bool operator==(const LatentMatrix& other) const {
        return data_.rows() == other.data_.rows() && data_.cols() == other.data_.cols() &&
               data_ == other.data_;
    }

private:
    Matrix data_;
};

bool all_finite(const Matrix& m) noexcept;

/// Selects the given rows, in order.
Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& rows);

/// Seeded random stream with implementation-independent output. The standard
/// distributions are not portable across library vendors, so sampling is done
/// directly on top of mt19937_64, whose output sequence is fully specified.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);
    /// Standard normal via Box-Muller.
    double normal();

    Matrix uniform_matrix(Index rows, Index cols, double lo, double hi);
    Matrix normal_matrix(Index rows, Index cols, double stddev = 1.0);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Derives an independent child seed from a base seed and a stream tag.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

} // namespace relrep
