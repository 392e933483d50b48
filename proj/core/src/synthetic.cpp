#include "aapcd/synthetic.hpp"

#include "aapcd/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aapcd {

namespace {

std::vector<double> gaussian_design(std::size_t rows, std::size_t cols, double density, Rng& rng)
{
    std::vector<double> a(rows * cols, 0.0);
    for (auto& v : a)
        if (density >= 1.0 || rng.uniform() < density) v = rng.normal();
    for (std::size_t j = 0; j < cols; ++j) {
        double sq = 0.0;
        for (std::size_t i = 0; i < rows; ++i) sq += a[i * cols + j] * a[i * cols + j];
        if (sq == 0.0) {
            a[rng.index(rows) * cols + j] = 1.0; // keep every column nonempty
            continue;
        }
        const double s = std::sqrt(static_cast<double>(rows) / sq);
        for (std::size_t i = 0; i < rows; ++i) a[i * cols + j] *= s;
    }
    return a;
}

} // namespace

Dataset make_classification(std::size_t rows, std::size_t cols, std::uint64_t seed, double density,
                            double label_noise)
{
    if (rows == 0 || cols == 0) throw std::invalid_argument("make_classification: empty shape");
    if (!(density > 0.0)) throw std::invalid_argument("make_classification: density must be positive");
    Rng rng(seed);
    const auto a = gaussian_design(rows, cols, density, rng);
    std::vector<double> w(cols);
    for (auto& v : w) v = rng.normal();
    std::vector<double> labels(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        double s = label_noise * std::sqrt(static_cast<double>(cols)) * rng.normal();
        for (std::size_t j = 0; j < cols; ++j) s += a[i * cols + j] * w[j];
        labels[i] = s > 0.0 ? 1.0 : -1.0;
    }
    return Dataset::from_dense(rows, cols, a, std::move(labels));
}

RegressionData make_regression(std::size_t rows, std::size_t cols, std::size_t support,
                               double noise, std::uint64_t seed)
{
    if (rows == 0 || cols == 0) throw std::invalid_argument("make_regression: empty shape");
    Rng rng(seed);
    const auto a = gaussian_design(rows, cols, 1.0, rng);
    RegressionData out;
    out.truth.assign(cols, 0.0);
    for (std::size_t s = 0; s < std::min(support, cols); ++s)
        out.truth[s * cols / std::max<std::size_t>(support, 1)] = rng.normal() + (rng.uniform() < 0.5 ? -1.0 : 1.0);
    out.targets.resize(rows);
    std::vector<double> labels(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        double t = noise * rng.normal();
        for (std::size_t j = 0; j < cols; ++j) t += a[i * cols + j] * out.truth[j];
        out.targets[i] = t;
        labels[i] = t > 0.0 ? 1.0 : -1.0;
    }
    out.data = Dataset::from_dense(rows, cols, a, std::move(labels));
    return out;
}

} // namespace aapcd
