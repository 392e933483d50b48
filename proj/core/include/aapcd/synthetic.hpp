#pragma once

#include "aapcd/dataset.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace aapcd {

/// Gaussian design with entries kept at rate `density`, columns scaled to
/// unit mean square; labels sign(a_i^T w + label_noise * sqrt(cols) * N(0, 1))
/// for a standard Gaussian w, so label_noise is relative to the score spread.
Dataset make_classification(std::size_t rows, std::size_t cols, std::uint64_t seed,
                            double density = 1.0, double label_noise = 0.5);

/// Dense Gaussian design and targets t = A w + noise * N(0, 1), where w has
/// `support` nonzero entries. Labels are sign(t) (the Dataset needs them).
struct RegressionData {
    Dataset data;
    std::vector<double> targets;
    std::vector<double> truth;
};
RegressionData make_regression(std::size_t rows, std::size_t cols, std::size_t support,
                               double noise, std::uint64_t seed);

} // namespace aapcd
