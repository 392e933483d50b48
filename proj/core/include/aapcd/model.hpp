#pragma once

#include "aapcd/dataset.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace aapcd {

/// Contiguous coordinate blocks covering {0, ..., dim-1}.
class BlockPartition {
public:
    BlockPartition() = default;
    /// Blocks of `block_size` coordinates; the last block may be shorter.
    static BlockPartition uniform(std::size_t dim, std::size_t block_size = 1);

    std::size_t count() const { return starts_.empty() ? 0 : starts_.size() - 1; }
    std::size_t dimension() const { return starts_.empty() ? 0 : starts_.back(); }
    std::size_t begin(std::size_t block) const { return starts_[block]; }
    std::size_t end(std::size_t block) const { return starts_[block + 1]; }
    std::size_t size(std::size_t block) const { return end(block) - begin(block); }
    std::size_t block_size() const { return block_size_; }

    bool operator==(const BlockPartition&) const = default;

private:
    std::vector<std::size_t> starts_;
    std::size_t block_size_ = 1;
};

enum class LossKind { logistic, sigmoid, quadratic };
enum class RegularizerKind { none, l1, capped_l1, block_norm };

std::string_view to_string(LossKind kind);
std::string_view to_string(RegularizerKind kind);
LossKind parse_loss(std::string_view name);
RegularizerKind parse_regularizer(std::string_view name);

/// g_j for the separable regularizers. For block_norm the unit is a block:
/// g_B(x_B) = lambda * ||x_B||_2; the others act coordinatewise.
struct Regularizer {
    RegularizerKind kind = RegularizerKind::none;
    double lambda = 0.0;
    double cap = 0.0; ///< capped_l1 threshold

    static Regularizer none() { return {}; }
    static Regularizer l1(double lambda) { return {RegularizerKind::l1, lambda, 0.0}; }
    static Regularizer capped_l1(double lambda, double cap)
    {
        return {RegularizerKind::capped_l1, lambda, cap};
    }
    static Regularizer block_norm(double lambda) { return {RegularizerKind::block_norm, lambda, 0.0}; }

    void validate() const;
    /// Value on one coordinate (not meaningful for block_norm).
    double scalar_value(double x) const;
    /// Value on a block of coordinates.
    double block_value(std::span<const double> xb) const;
    /// Proximal map of eta * g applied to a block.
    void prox(std::span<const double> in, std::span<double> out, double eta) const;

    bool operator==(const Regularizer&) const = default;
};

/// Arguments beyond this magnitude are clamped in the saturating losses.
inline constexpr double kLossArgumentClamp = 40.0;
/// Max |d^2/dz^2 1/(1+e^z)|, attained at z = +/-log(2+sqrt 3).
inline constexpr double kSigmoidCurvatureBound = 0.09622504486493763; // 1/(6 sqrt 3)

/// Per-sample loss l(z; b) and its derivative in z.
double loss_value(LossKind kind, double z, double b);
double loss_derivative(LossKind kind, double z, double b);

/// Composite objective F(x) = f(x) + g(x) with
///   logistic  f = (1/n) sum log(1 + exp(-b_i a_i^T x))
///   sigmoid   f = (1/n) sum 1 / (1 + exp(b_i a_i^T x))
///   quadratic f = (1/2n) sum (a_i^T x - t_i)^2
/// where t defaults to the labels. Immutable after construction apart from
/// the cached Lipschitz constant.
class ProblemSpec {
public:
    ProblemSpec(std::shared_ptr<const Dataset> data, LossKind loss, Regularizer reg,
                std::size_t block_size = 1);

    const Dataset& data() const { return *data_; }
    std::shared_ptr<const Dataset> data_ptr() const { return data_; }
    LossKind loss() const { return loss_; }
    const Regularizer& regularizer() const { return reg_; }
    const BlockPartition& blocks() const { return blocks_; }
    std::size_t dimension() const { return data_->cols(); }

    /// Quadratic-loss targets; equal to the labels unless overridden.
    std::span<const double> targets() const;
    void set_targets(std::vector<double> targets);
    /// b_i for the classification losses, t_i for quadratic.
    double response(std::size_t i) const;

    bool has_lipschitz() const { return lipschitz_.has_value(); }
    double lipschitz() const;
    void set_lipschitz(double L);

    /// f evaluated from a residual z = A x.
    double smooth_from_residual(std::span<const double> z) const;
    /// g(x) summed over blocks.
    double regularizer_value(std::span<const double> x) const;
    double block_regularizer_value(std::size_t block, std::span<const double> x) const;

private:
    std::shared_ptr<const Dataset> data_;
    LossKind loss_;
    Regularizer reg_;
    BlockPartition blocks_;
    std::vector<double> targets_;
    std::optional<double> lipschitz_;
};

/// z = A x kept in step with coordinate updates. The owner refreshes it from
/// scratch every kRefreshInterval updates to bound accumulated rounding.
class ResidualCache {
public:
    static constexpr std::size_t kRefreshInterval = 10'000;

    ResidualCache() = default;
    ResidualCache(const Dataset& data, std::span<const double> x);

    std::span<const double> values() const { return z_; }
    std::span<double> mutable_values() { return z_; }
    std::uint64_t version() const { return version_; }
    std::size_t updates_since_refresh() const { return pending_; }
    bool needs_refresh() const { return pending_ >= kRefreshInterval; }

    /// z += delta * A[:, j]
    void apply(const Dataset& data, std::size_t j, double delta);
    void refresh(const Dataset& data, std::span<const double> x);
    /// max_i |z_i - (A x)_i| / max(1, max_i |(A x)_i|)
    double relative_drift(const Dataset& data, std::span<const double> x) const;

    void swap(ResidualCache& other) noexcept;

private:
    std::vector<double> z_;
    std::uint64_t version_ = 0;
    std::size_t pending_ = 0;
};

/// F(x); O(n + m) when a consistent cache is supplied.
double full_objective(const ProblemSpec& problem, std::span<const double> x,
                      const ResidualCache* cache = nullptr);
double smooth_objective(const ProblemSpec& problem, std::span<const double> x,
                        const ResidualCache* cache = nullptr);

/// grad_j f(x) for each j in `coords`, in the same order. g is never
/// differentiated. Throws on an empty set or an index out of range.
std::vector<double> block_gradient(const ProblemSpec& problem, std::span<const double> x,
                                   std::span<const std::size_t> coords,
                                   const ResidualCache* cache = nullptr);
/// Same, for a contiguous block of the problem's partition.
std::vector<double> block_gradient(const ProblemSpec& problem, std::span<const double> x,
                                   std::size_t block, const ResidualCache* cache = nullptr);
std::vector<double> full_gradient(const ProblemSpec& problem, std::span<const double> x);

/// Hot-path variant: grad_B f from a residual z = A x, written to `out`
/// (size of the block). No allocation, no checks beyond sizes.
void block_gradient_from_residual(const ProblemSpec& problem, std::span<const double> z,
                                  std::size_t block, std::span<double> out);

void update_residual(ResidualCache& cache, const Dataset& data, std::size_t j, double delta);

/// L for grad f by power iteration on A^T A:
///   logistic  sigma_max(A)^2 / (4n)
///   sigmoid   sigma_max(A)^2 / (6 sqrt(3) n)
///   quadratic sigma_max(A)^2 / n
/// Throws std::domain_error for an all-zero matrix and std::runtime_error
/// when the estimate has not settled to `tolerance` within `max_iters`.
double lipschitz_estimate(const ProblemSpec& problem, double tolerance = 1e-10,
                          std::size_t max_iters = 10'000);

/// Largest singular value of A, by the same power iteration.
double spectral_norm(const Dataset& data, double tolerance, std::size_t max_iters);

} // namespace aapcd
