#include "aapcd/model.hpp"

#include "aapcd/prox.hpp"
#include "aapcd/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace aapcd {

BlockPartition BlockPartition::uniform(std::size_t dim, std::size_t block_size)
{
    if (block_size == 0) throw std::invalid_argument("BlockPartition: block size must be positive");
    BlockPartition p;
    p.block_size_ = block_size;
    for (std::size_t s = 0; s < dim; s += block_size) p.starts_.push_back(s);
    p.starts_.push_back(dim);
    return p;
}

std::string_view to_string(LossKind kind)
{
    switch (kind) {
    case LossKind::logistic: return "logistic";
    case LossKind::sigmoid: return "sigmoid";
    case LossKind::quadratic: return "quadratic";
    }
    return "?";
}

std::string_view to_string(RegularizerKind kind)
{
    switch (kind) {
    case RegularizerKind::none: return "none";
    case RegularizerKind::l1: return "l1";
    case RegularizerKind::capped_l1: return "capped_l1";
    case RegularizerKind::block_norm: return "block_norm";
    }
    return "?";
}

LossKind parse_loss(std::string_view name)
{
    if (name == "logistic") return LossKind::logistic;
    if (name == "sigmoid") return LossKind::sigmoid;
    if (name == "quadratic") return LossKind::quadratic;
    throw std::invalid_argument("unknown loss: " + std::string(name));
}

RegularizerKind parse_regularizer(std::string_view name)
{
    if (name == "none") return RegularizerKind::none;
    if (name == "l1") return RegularizerKind::l1;
    if (name == "capped_l1") return RegularizerKind::capped_l1;
    if (name == "block_norm") return RegularizerKind::block_norm;
    throw std::invalid_argument("unknown regularizer: " + std::string(name));
}

// --- regularizer -----------------------------------------------------------

void Regularizer::validate() const
{
    if (!(lambda >= 0.0)) throw std::invalid_argument("regularizer: lambda must be >= 0");
    if (kind == RegularizerKind::capped_l1 && !(cap > 0.0))
        throw std::invalid_argument("regularizer: capped_l1 needs cap > 0");
}

double Regularizer::scalar_value(double x) const
{
    switch (kind) {
    case RegularizerKind::none: return 0.0;
    case RegularizerKind::l1:
    case RegularizerKind::block_norm: return lambda * std::abs(x);
    case RegularizerKind::capped_l1: return lambda * std::min(std::abs(x), cap);
    }
    return 0.0;
}

double Regularizer::block_value(std::span<const double> xb) const
{
    if (kind == RegularizerKind::block_norm) {
        double s = 0.0;
        for (double v : xb) s += v * v;
        return lambda * std::sqrt(s);
    }
    double total = 0.0;
    for (double v : xb) total += scalar_value(v);
    return total;
}

void Regularizer::prox(std::span<const double> in, std::span<double> out, double eta) const
{
    switch (kind) {
    case RegularizerKind::none:
        std::copy(in.begin(), in.end(), out.begin());
        return;
    case RegularizerKind::l1:
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = prox_l1({in[i], eta, lambda, 0.0});
        return;
    case RegularizerKind::capped_l1:
        for (std::size_t i = 0; i < in.size(); ++i)
            out[i] = prox_capped_l1({in[i], eta, lambda, cap});
        return;
    case RegularizerKind::block_norm:
        prox_block_norm(in, out, eta, lambda);
        return;
    }
}

// --- losses ------------------------------------------------------------------

double loss_value(LossKind kind, double z, double b)
{
    switch (kind) {
    case LossKind::logistic: {
        const double s = std::clamp(-b * z, -kLossArgumentClamp, kLossArgumentClamp);
        // log(1 + e^s) without overflow
        return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
    }
    case LossKind::sigmoid: {
        const double s = std::clamp(b * z, -kLossArgumentClamp, kLossArgumentClamp);
        return 1.0 / (1.0 + std::exp(s));
    }
    case LossKind::quadratic: {
        const double r = z - b;
        return 0.5 * r * r;
    }
    }
    return 0.0;
}

double loss_derivative(LossKind kind, double z, double b)
{
    switch (kind) {
    case LossKind::logistic: {
        // d/dz log(1 + e^{-bz}) = -b / (1 + e^{bz})
        const double s = std::clamp(b * z, -kLossArgumentClamp, kLossArgumentClamp);
        return -b / (1.0 + std::exp(s));
    }
    case LossKind::sigmoid: {
        // d/dz 1/(1 + e^{bz}) = -b e^{bz} / (1 + e^{bz})^2
        const double s = std::clamp(b * z, -kLossArgumentClamp, kLossArgumentClamp);
        const double p = 1.0 / (1.0 + std::exp(s));
        return -b * p * (1.0 - p);
    }
    case LossKind::quadratic: return z - b;
    }
    return 0.0;
}

// --- problem -----------------------------------------------------------------

ProblemSpec::ProblemSpec(std::shared_ptr<const Dataset> data, LossKind loss, Regularizer reg,
                         std::size_t block_size)
    : data_(std::move(data)), loss_(loss), reg_(reg)
{
    if (!data_) throw std::invalid_argument("ProblemSpec: dataset required");
    reg_.validate();
    blocks_ = BlockPartition::uniform(data_->cols(), block_size);
}

std::span<const double> ProblemSpec::targets() const
{
    return targets_.empty() ? data_->labels() : std::span<const double>(targets_);
}

void ProblemSpec::set_targets(std::vector<double> targets)
{
    if (targets.size() != data_->rows())
        throw std::invalid_argument("ProblemSpec: one target per row required");
    targets_ = std::move(targets);
}

double ProblemSpec::response(std::size_t i) const
{
    return (loss_ == LossKind::quadratic && !targets_.empty()) ? targets_[i] : data_->labels()[i];
}

double ProblemSpec::lipschitz() const
{
    if (!lipschitz_) throw std::logic_error("ProblemSpec: Lipschitz constant not estimated");
    return *lipschitz_;
}

void ProblemSpec::set_lipschitz(double L)
{
    if (!(L > 0.0) || !std::isfinite(L))
        throw std::invalid_argument("ProblemSpec: Lipschitz constant must be positive");
    lipschitz_ = L;
}

double ProblemSpec::smooth_from_residual(std::span<const double> z) const
{
    const auto n = data_->rows();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += loss_value(loss_, z[i], response(i));
    return total / static_cast<double>(n);
}

double ProblemSpec::regularizer_value(std::span<const double> x) const
{
    if (reg_.kind == RegularizerKind::none) return 0.0;
    double total = 0.0;
    for (std::size_t b = 0; b < blocks_.count(); ++b) total += block_regularizer_value(b, x);
    return total;
}

double ProblemSpec::block_regularizer_value(std::size_t block, std::span<const double> x) const
{
    return reg_.block_value(x.subspan(blocks_.begin(block), blocks_.size(block)));
}

// --- residual cache ----------------------------------------------------------

ResidualCache::ResidualCache(const Dataset& data, std::span<const double> x) : z_(data.rows())
{
    data.multiply(x, z_);
}

void ResidualCache::apply(const Dataset& data, std::size_t j, double delta)
{
    if (j >= data.cols()) throw std::out_of_range("ResidualCache: coordinate out of range");
    ++version_;
    ++pending_;
    if (delta == 0.0) return;
    const auto col = data.column(j);
    for (std::size_t p = 0; p < col.indices.size(); ++p) z_[col.indices[p]] += delta * col.values[p];
}

void ResidualCache::refresh(const Dataset& data, std::span<const double> x)
{
    z_.resize(data.rows());
    data.multiply(x, z_);
    pending_ = 0;
    ++version_;
}

double ResidualCache::relative_drift(const Dataset& data, std::span<const double> x) const
{
    std::vector<double> fresh(data.rows());
    data.multiply(x, fresh);
    double scale = 1.0, err = 0.0;
    for (std::size_t i = 0; i < fresh.size(); ++i) {
        scale = std::max(scale, std::abs(fresh[i]));
        err = std::max(err, std::abs(fresh[i] - z_[i]));
    }
    return err / scale;
}

void ResidualCache::swap(ResidualCache& other) noexcept
{
    z_.swap(other.z_);
    std::swap(version_, other.version_);
    std::swap(pending_, other.pending_);
}

void update_residual(ResidualCache& cache, const Dataset& data, std::size_t j, double delta)
{
    cache.apply(data, j, delta);
}

// --- objective and gradients -------------------------------------------------

namespace {

void check_dimension(const ProblemSpec& problem, std::span<const double> x)
{
    if (x.size() != problem.dimension())
        throw std::invalid_argument("dimension mismatch: expected " +
                                    std::to_string(problem.dimension()) + ", got " +
                                    std::to_string(x.size()));
}

std::vector<double> residual_of(const ProblemSpec& problem, std::span<const double> x)
{
    std::vector<double> z(problem.data().rows());
    problem.data().multiply(x, z);
    return z;
}

} // namespace

double smooth_objective(const ProblemSpec& problem, std::span<const double> x,
                        const ResidualCache* cache)
{
    check_dimension(problem, x);
    if (cache) return problem.smooth_from_residual(cache->values());
    return problem.smooth_from_residual(residual_of(problem, x));
}

double full_objective(const ProblemSpec& problem, std::span<const double> x,
                      const ResidualCache* cache)
{
    return smooth_objective(problem, x, cache) + problem.regularizer_value(x);
}

std::vector<double> block_gradient(const ProblemSpec& problem, std::span<const double> x,
                                   std::span<const std::size_t> coords,
                                   const ResidualCache* cache)
{
    check_dimension(problem, x);
    if (coords.empty()) throw std::invalid_argument("block_gradient: empty block");
    for (auto j : coords)
        if (j >= problem.dimension()) throw std::out_of_range("block_gradient: index out of range");

    std::vector<double> local;
    std::span<const double> z;
    if (cache) {
        z = cache->values();
    } else {
        local = residual_of(problem, x);
        z = local;
    }
    const auto& data = problem.data();
    const double inv_n = 1.0 / static_cast<double>(data.rows());
    std::vector<double> grad(coords.size());
    for (std::size_t c = 0; c < coords.size(); ++c) {
        const auto col = data.column(coords[c]);
        double acc = 0.0;
        for (std::size_t p = 0; p < col.indices.size(); ++p) {
            const auto i = col.indices[p];
            acc += col.values[p] * loss_derivative(problem.loss(), z[i], problem.response(i));
        }
        grad[c] = acc * inv_n;
    }
    return grad;
}

std::vector<double> block_gradient(const ProblemSpec& problem, std::span<const double> x,
                                   std::size_t block, const ResidualCache* cache)
{
    const auto& blocks = problem.blocks();
    if (block >= blocks.count()) throw std::out_of_range("block_gradient: block out of range");
    std::vector<std::size_t> coords(blocks.size(block));
    for (std::size_t c = 0; c < coords.size(); ++c) coords[c] = blocks.begin(block) + c;
    return block_gradient(problem, x, coords, cache);
}

void block_gradient_from_residual(const ProblemSpec& problem, std::span<const double> z,
                                  std::size_t block, std::span<double> out)
{
    const auto& blocks = problem.blocks();
    const auto& data = problem.data();
    if (z.size() != data.rows() || out.size() != blocks.size(block))
        throw std::invalid_argument("block_gradient_from_residual: size mismatch");
    const double inv_n = 1.0 / static_cast<double>(data.rows());
    for (std::size_t c = 0; c < out.size(); ++c) {
        const auto col = data.column(blocks.begin(block) + c);
        double acc = 0.0;
        for (std::size_t p = 0; p < col.indices.size(); ++p) {
            const auto i = col.indices[p];
            acc += col.values[p] * loss_derivative(problem.loss(), z[i], problem.response(i));
        }
        out[c] = acc * inv_n;
    }
}

std::vector<double> full_gradient(const ProblemSpec& problem, std::span<const double> x)
{
    check_dimension(problem, x);
    const auto& data = problem.data();
    const auto z = residual_of(problem, x);
    std::vector<double> r(data.rows());
    const double inv_n = 1.0 / static_cast<double>(data.rows());
    for (std::size_t i = 0; i < r.size(); ++i)
        r[i] = loss_derivative(problem.loss(), z[i], problem.response(i)) * inv_n;
    std::vector<double> g(data.cols());
    data.multiply_transposed(r, g);
    return g;
}

// --- Lipschitz -----------------------------------------------------------------

double spectral_norm(const Dataset& data, double tolerance, std::size_t max_iters)
{
    if (data.rows() == 0 || data.cols() == 0)
        throw std::domain_error("spectral_norm: empty dataset");
    // Fixed-seed start so repeated estimates agree bit-for-bit.
    Rng rng(0x5eed);
    std::vector<double> v(data.cols());
    for (auto& e : v) e = 0.5 + rng.uniform();
    std::vector<double> av(data.rows()), w(data.cols());

    double previous = -1.0;
    for (std::size_t it = 0; it < max_iters; ++it) {
        double norm = 0.0;
        for (double e : v) norm += e * e;
        norm = std::sqrt(norm);
        if (norm == 0.0) throw std::domain_error("spectral_norm: A^T A annihilates the iterate");
        for (auto& e : v) e /= norm;

        data.multiply(v, av);
        double estimate = 0.0; // Rayleigh quotient v^T A^T A v
        for (double e : av) estimate += e * e;
        if (estimate == 0.0 && it == 0) {
            if (data.nonzeros() == 0) throw std::domain_error("spectral_norm: all-zero matrix");
        }
        data.multiply_transposed(av, w);
        v.swap(w);
        if (previous > 0.0 && std::abs(estimate - previous) <= tolerance * estimate)
            return std::sqrt(estimate);
        previous = estimate;
    }
    throw std::runtime_error("spectral_norm: power iteration did not converge; supply L manually");
}

double lipschitz_estimate(const ProblemSpec& problem, double tolerance, std::size_t max_iters)
{
    const auto& data = problem.data();
    if (data.rows() == 0) throw std::invalid_argument("lipschitz_estimate: empty dataset");
    if (data.nonzeros() == 0)
        throw std::domain_error("lipschitz_estimate: all-zero matrix, L undefined");
    const double sigma = spectral_norm(data, tolerance, max_iters);
    const double n = static_cast<double>(data.rows());
    switch (problem.loss()) {
    case LossKind::logistic: return sigma * sigma / (4.0 * n);
    case LossKind::sigmoid: return kSigmoidCurvatureBound * sigma * sigma / n;
    case LossKind::quadratic: return sigma * sigma / n;
    }
    return 0.0;
}

} // namespace aapcd
