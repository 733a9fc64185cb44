#include "relrep/linalg.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace relrep {

LatentMatrix::LatentMatrix(Matrix data) : data_(std::move(data)) {
    require(data_.rows() >= 1 && data_.cols() >= 1, ErrorCode::BadShape,
            "latent matrix must have at least one row and one column");
    require(all_finite(data_), ErrorCode::NonFinite, "latent matrix contains non-finite entries");
}

bool all_finite(const Matrix& m) noexcept { return m.allFinite(); }

Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
    Matrix out(static_cast<Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(rows[i] < static_cast<std::size_t>(m.rows()), ErrorCode::BadIndex,
                "row index " + std::to_string(rows[i]) + " out of range");
        out.row(static_cast<Index>(i)) = m.row(static_cast<Index>(rows[i]));
    }
    return out;
}

std::uint64_t Rng::below(std::uint64_t bound) {
    require(bound > 0, ErrorCode::BadSize, "empty sampling range");
    // Rejection keeps the result exactly uniform.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % bound;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

Matrix Rng::uniform_matrix(Index rows, Index cols, double lo, double hi) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = uniform(lo, hi);
    return m;
}

Matrix Rng::normal_matrix(Index rows, Index cols, double stddev) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = stddev * normal();
    return m;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    // splitmix64 finalizer over the combined value
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace relrep
