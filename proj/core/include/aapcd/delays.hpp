#pragma once

#include "aapcd/random.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aapcd {

// --- series machinery ----------------------------------------------------------

/// Delay probabilities p_j = P(d = j), j >= 0.
class DelayPmf {
public:
    /// Finite support; entries are used as given (no renormalisation).
    static DelayPmf finite(std::vector<double> p);
    /// p_j proportional to (j+1)^{-exponent} on {0, ..., truncation}, renormalised.
    static DelayPmf power_law(double exponent, std::size_t truncation);

    double operator()(std::size_t j) const;
    std::size_t support_end() const { return support_end_; } ///< last j with p_j > 0
    bool is_power_law() const { return exponent_.has_value(); }
    double exponent() const { return exponent_.value_or(0.0); }
    double normaliser() const { return normaliser_; }
    /// sum_j j p_j over the support
    double mean() const;
    /// sum_{j > J} j^2 p_j, bounded analytically for power laws.
    double second_moment_tail_bound(std::size_t J) const;

private:
    std::vector<double> finite_;
    std::optional<double> exponent_;
    double normaliser_ = 1.0;
    std::size_t support_end_ = 0;
};

/// c_k = sum_{t >= 1} t (t + k) p_{t+k} for k = 0..k_max-1.
struct CTable {
    std::vector<double> c;
    /// Upper bound on the part of c_k not captured by the summation.
    std::vector<double> tail_bound;
    /// sum_{j > k} (j-k)(j-k-1)/2 * j p_j: the exact value of sum_{k' > k} c_{k'}
    /// for the summed support. Indexed like c.
    std::vector<double> series_tail;

    double at(std::size_t k) const { return k < c.size() ? c[k] : 0.0; }
    double partial_sum(std::size_t K) const; ///< sum_{k <= K} c_k
};

/// Builds c by suffix sums over j, stopping where the analytic tail bound on
/// sum_{j > J} j^2 p_j drops below `tail_tol` (or at the support end). Throws
/// std::runtime_error if that needs more than `max_terms` terms.
CTable c_table(const DelayPmf& p, std::size_t k_max, double tail_tol = 1e-12,
               std::size_t max_terms = 100'000'000);

/// Analytic bound on sum_{k > K} c_k for a power law with exponent > 4:
/// (K+1)^{4-t} / (2 Z (t - 4)).
double power_law_c_series_tail_bound(const DelayPmf& p, std::size_t K);

/// The sequence eps_i > 0 used by the deterministic Lyapunov function.
struct EpsilonSpec {
    enum class Kind { geometric, explicit_list };
    Kind kind = Kind::geometric;
    double rho = 0.5;
    /// Geometric only: eps_i = 0 for i > truncation (bounded-delay variant).
    std::optional<std::size_t> truncation;
    std::vector<double> values;

    static EpsilonSpec geometric(double rho, std::optional<std::size_t> truncation = {});
    static EpsilonSpec list(std::vector<double> values);

    void validate() const;
    double at(std::size_t i) const;
    /// Index past which every eps is zero, if finite.
    std::optional<std::size_t> support_end() const;
};

/// delta_i = sum_{j >= i} eps_j, mu_d = sum_{h < d} 1/eps_h.
/// mu is +inf once d passes a zero eps.
struct MuDeltaTables {
    std::vector<double> epsilon;
    std::vector<double> delta;
    std::vector<double> mu;

    double delta_at(std::size_t i) const { return i < delta.size() ? delta[i] : 0.0; }
    double mu_at(std::size_t d) const;
};

MuDeltaTables mu_delta_tables(const EpsilonSpec& eps, std::size_t d_max);

/// Closed forms for geometric eps_h = rho^h (no truncation).
double geometric_delta(double rho, std::size_t i);
double geometric_mu(double rho, std::size_t d);

// --- delay schedules -------------------------------------------------------------

enum class DelayMode { bounded, power_law, epsilon_sequence, scripted, measured };

std::string to_string(DelayMode mode);

/// Source of d_k. Simulated modes are deterministic given the seed.
///   bounded(tau)          d_k uniform on {0..min(k, tau)}
///   power_law(t, N)       d_k ~ p_j proportional to (j+1)^{-t} truncated at min(k, N)
///   epsilon_sequence      deterministic sawtooth 0, 1, .., D, 0, 1, .. clamped to k,
///                         carrying the eps sequence for the Lyapunov tables
///   scripted(list)        list[k] clamped to k
///   measured              produced by the real multi-worker engine
class DelaySchedule {
public:
    static DelaySchedule bounded(std::size_t tau, std::uint64_t seed);
    static DelaySchedule power_law(double exponent, std::size_t truncation, std::uint64_t seed);
    static DelaySchedule epsilon_sequence(EpsilonSpec eps, std::size_t max_delay);
    static DelaySchedule scripted(std::vector<std::size_t> delays);
    static DelaySchedule measured();

    DelayMode mode() const { return mode_; }
    /// tau for bounded, D for epsilon_sequence, max of the list for scripted,
    /// N for power_law; nothing for measured.
    std::optional<std::size_t> bound() const;
    std::uint64_t seed() const { return seed_; }
    double exponent() const { return exponent_; }
    std::size_t truncation() const { return truncation_; }
    const EpsilonSpec& epsilon() const { return eps_; }
    std::span<const std::size_t> script() const { return script_; }

    /// Draws d_k. Calls must come in iteration order for the seeded modes.
    /// Throws std::out_of_range when a script is exhausted.
    std::size_t next_delay(std::size_t k);
    /// Rewinds the generator to its seed.
    void reset();

    /// Probability table backing power_law sampling.
    const DelayPmf& pmf() const;

private:
    DelayMode mode_ = DelayMode::bounded;
    std::uint64_t seed_ = 0;
    std::size_t tau_ = 0;
    double exponent_ = 0.0;
    std::size_t truncation_ = 0;
    EpsilonSpec eps_;
    std::vector<std::size_t> script_;
    std::shared_ptr<const std::vector<double>> cdf_;
    std::shared_ptr<const DelayPmf> pmf_;
    Rng rng_{0};
};

std::size_t next_delay(DelaySchedule& schedule, std::size_t k);

/// One integer per line; blank lines and '#' comments skipped.
std::vector<std::size_t> load_schedule(std::istream& in);
std::vector<std::size_t> load_schedule(const std::filesystem::path& path);
void save_schedule(std::ostream& out, std::span<const std::size_t> delays);

// --- history -------------------------------------------------------------------

/// One published update: the block's coordinates before and after, plus
/// ||y^{k+1} - y^k||^2.
struct HistoryRecord {
    std::size_t iteration = 0;
    std::size_t first = 0; ///< first coordinate of the block
    std::vector<double> before;
    std::vector<double> after;
    double step_sq = 0.0;
};

/// Ring of the last `capacity` updates, contiguous in iteration index.
class HistoryRing {
public:
    explicit HistoryRing(std::size_t capacity);

    std::size_t capacity() const { return slots_.size(); }
    std::size_t size() const { return count_; }
    /// Iterations [oldest(), next()) are retained.
    std::size_t oldest() const { return next_ - count_; }
    std::size_t next() const { return next_; }
    bool covers(std::size_t k, std::size_t delay) const;

    /// Appends the update for iteration next(); evicts the oldest when full.
    void push(std::size_t first, std::span<const double> before, std::span<const double> after,
              double step_sq);
    const HistoryRecord& at(std::size_t iteration) const;

private:
    std::vector<HistoryRecord> slots_;
    std::size_t next_ = 0;
    std::size_t count_ = 0;
};

struct ReadPolicy {
    enum class Kind { consistent, inconsistent };
    Kind kind = Kind::consistent;
    std::uint64_t seed = 0;

    static ReadPolicy consistent() { return {}; }
    static ReadPolicy inconsistent(std::uint64_t seed) { return {Kind::inconsistent, seed}; }
};

/// Chooses I(k): all of {k-d, .., k-1} when consistent, a seeded coin-flip
/// subset when inconsistent. Returned in decreasing iteration order.
std::vector<std::size_t> read_set(std::size_t k, std::size_t delay, const ReadPolicy& policy,
                                  Rng* rng);

/// y_hat = y^k - sum_{h in I} (y^{h+1} - y^h). The consistent policy
/// restores stored pre-update values, so y_hat equals y^{k-d} bit-for-bit.
/// Throws std::out_of_range when the history no longer reaches k - d.
std::vector<double> snapshot(const HistoryRing& history, std::span<const double> y, std::size_t k,
                             std::size_t delay, const ReadPolicy& policy, Rng* rng = nullptr);

/// Engine variant: `out` is overwritten with y rolled back over the
/// iterations in `read` (as returned by read_set).
void snapshot_into(const HistoryRing& history, std::span<const double> y,
                   std::span<const std::size_t> read, ReadPolicy::Kind kind,
                   std::span<double> out);

} // namespace aapcd
