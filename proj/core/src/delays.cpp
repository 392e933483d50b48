#include "aapcd/delays.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace aapcd {

// --- pmf -------------------------------------------------------------------------

DelayPmf DelayPmf::finite(std::vector<double> p)
{
    if (p.empty()) throw std::invalid_argument("DelayPmf: empty support");
    for (double v : p)
        if (!(v >= 0.0)) throw std::invalid_argument("DelayPmf: probabilities must be >= 0");
    DelayPmf pmf;
    pmf.finite_ = std::move(p);
    pmf.support_end_ = pmf.finite_.size() - 1;
    while (pmf.support_end_ > 0 && pmf.finite_[pmf.support_end_] == 0.0) --pmf.support_end_;
    return pmf;
}

DelayPmf DelayPmf::power_law(double exponent, std::size_t truncation)
{
    if (!(exponent > 1.0)) throw std::invalid_argument("DelayPmf: power-law exponent must be > 1");
    DelayPmf pmf;
    pmf.exponent_ = exponent;
    pmf.support_end_ = truncation;
    long double z = 0.0L;
    for (std::size_t j = truncation + 1; j-- > 0;)
        z += std::pow(static_cast<long double>(j + 1), -static_cast<long double>(exponent));
    pmf.normaliser_ = static_cast<double>(z);
    return pmf;
}

double DelayPmf::operator()(std::size_t j) const
{
    if (j > support_end_) return 0.0;
    if (exponent_) return std::pow(static_cast<double>(j + 1), -*exponent_) / normaliser_;
    return finite_[j];
}

double DelayPmf::mean() const
{
    long double acc = 0.0L;
    for (std::size_t j = support_end_ + 1; j-- > 1;) acc += static_cast<long double>(j) * (*this)(j);
    return static_cast<double>(acc);
}

double DelayPmf::second_moment_tail_bound(std::size_t J) const
{
    if (J >= support_end_) return 0.0;
    if (!exponent_) {
        long double acc = 0.0L;
        for (std::size_t j = J + 1; j <= support_end_; ++j)
            acc += static_cast<long double>(j) * j * finite_[j];
        return static_cast<double>(acc);
    }
    const double t = *exponent_;
    if (t <= 3.0) return std::numeric_limits<double>::infinity();
    // sum_{j>J} j^2 (j+1)^{-t} / Z <= int_{J+1}^inf x^{2-t} dx / Z
    return std::pow(static_cast<double>(J + 1), 3.0 - t) / (normaliser_ * (t - 3.0));
}

// --- c table -----------------------------------------------------------------------

double CTable::partial_sum(std::size_t K) const
{
    long double acc = 0.0L;
    for (std::size_t k = 0; k <= K && k < c.size(); ++k) acc += c[k];
    return static_cast<double>(acc);
}

CTable c_table(const DelayPmf& p, std::size_t k_max, double tail_tol, std::size_t max_terms)
{
    if (k_max == 0) throw std::invalid_argument("c_table: k_max must be positive");
    std::size_t J = p.support_end();
    if (p.is_power_law()) {
        const double t = p.exponent();
        if (t > 3.0) {
            // smallest J with (J+1)^{3-t} / (Z (t-3)) <= tail_tol
            const double target = tail_tol * p.normaliser() * (t - 3.0);
            const double need = std::ceil(std::pow(target, 1.0 / (3.0 - t)));
            if (need < static_cast<double>(J)) J = static_cast<std::size_t>(std::max(1.0, need));
        }
    }
    if (J > max_terms)
        throw std::runtime_error("c_table: tail bound not reachable within the term cap");

    CTable table;
    table.c.assign(k_max, 0.0);
    table.series_tail.assign(k_max, 0.0);
    table.tail_bound.assign(k_max, p.second_moment_tail_bound(J));

    // Suffix sums S_r(k) = sum_{k < j <= J} j^r p_j, accumulated smallest-first.
    long double s1 = 0.0L, s2 = 0.0L, s3 = 0.0L;
    for (std::size_t j = J; j >= 1; --j) {
        const long double pj = p(j);
        const long double lj = static_cast<long double>(j);
        s1 += lj * pj;
        s2 += lj * lj * pj;
        s3 += lj * lj * lj * pj;
        const std::size_t k = j - 1; // sums now cover j > k
        if (k < k_max) {
            const long double lk = static_cast<long double>(k);
            // c_k = sum_{j>k} (j - k) j p_j
            table.c[k] = static_cast<double>(std::max(0.0L, s2 - lk * s1));
            // sum_{k'>k} c_k' = sum_{j>k} j p_j (j-k)(j-k-1)/2
            const long double tail = 0.5L * (s3 - (2.0L * lk + 1.0L) * s2 + lk * (lk + 1.0L) * s1);
            table.series_tail[k] = static_cast<double>(std::max(0.0L, tail));
        }
    }
    return table;
}

double power_law_c_series_tail_bound(const DelayPmf& p, std::size_t K)
{
    if (!p.is_power_law() || !(p.exponent() > 4.0))
        throw std::invalid_argument("series tail bound needs a power law with exponent > 4");
    const double t = p.exponent();
    return std::pow(static_cast<double>(K + 1), 4.0 - t) / (2.0 * p.normaliser() * (t - 4.0));
}

// --- eps / mu / delta ----------------------------------------------------------------

EpsilonSpec EpsilonSpec::geometric(double rho, std::optional<std::size_t> truncation)
{
    EpsilonSpec e;
    e.kind = Kind::geometric;
    e.rho = rho;
    e.truncation = truncation;
    e.validate();
    return e;
}

EpsilonSpec EpsilonSpec::list(std::vector<double> values)
{
    EpsilonSpec e;
    e.kind = Kind::explicit_list;
    e.values = std::move(values);
    e.validate();
    return e;
}

void EpsilonSpec::validate() const
{
    if (kind == Kind::geometric) {
        if (!(rho > 0.0 && rho < 1.0))
            throw std::invalid_argument("epsilon: geometric rho must lie in (0, 1)");
    } else {
        if (values.empty()) throw std::invalid_argument("epsilon: empty list");
        for (double v : values)
            if (!(v > 0.0)) throw std::invalid_argument("epsilon: entries must be positive");
    }
}

double EpsilonSpec::at(std::size_t i) const
{
    if (kind == Kind::geometric) {
        if (truncation && i > *truncation) return 0.0;
        return std::pow(rho, static_cast<double>(i));
    }
    return i < values.size() ? values[i] : 0.0;
}

std::optional<std::size_t> EpsilonSpec::support_end() const
{
    if (kind == Kind::geometric) return truncation;
    return values.size() - 1;
}

double MuDeltaTables::mu_at(std::size_t d) const
{
    if (d >= mu.size()) throw std::out_of_range("mu table too short for delay " + std::to_string(d));
    return mu[d];
}

MuDeltaTables mu_delta_tables(const EpsilonSpec& eps, std::size_t d_max)
{
    eps.validate();
    MuDeltaTables t;
    t.epsilon.resize(d_max + 1);
    for (std::size_t i = 0; i <= d_max; ++i) t.epsilon[i] = eps.at(i);

    // delta by backward summation from where the tail is known exactly.
    const auto end = eps.support_end();
    long double acc = 0.0L;
    std::size_t start = d_max;
    if (end) {
        start = std::max(d_max, *end);
        for (std::size_t j = start; j > d_max; --j) acc += eps.at(j);
    } else {
        // untruncated geometric: sum_{j > d_max} rho^j = rho^{d_max+1} / (1 - rho)
        acc = static_cast<long double>(geometric_delta(eps.rho, d_max + 1));
    }
    t.delta.resize(d_max + 1);
    for (std::size_t i = d_max + 1; i-- > 0;) {
        acc += t.epsilon[i];
        t.delta[i] = static_cast<double>(acc);
    }

    t.mu.resize(d_max + 1);
    long double mu = 0.0L;
    t.mu[0] = 0.0;
    for (std::size_t d = 1; d <= d_max; ++d) {
        const double e = t.epsilon[d - 1];
        mu = e > 0.0 ? mu + 1.0L / e : std::numeric_limits<long double>::infinity();
        t.mu[d] = static_cast<double>(mu);
    }
    return t;
}

double geometric_delta(double rho, std::size_t i)
{
    return std::pow(rho, static_cast<double>(i)) / (1.0 - rho);
}

double geometric_mu(double rho, std::size_t d)
{
    return (std::pow(rho, -static_cast<double>(d)) - 1.0) / (1.0 / rho - 1.0);
}

// --- schedules -------------------------------------------------------------------------

std::string to_string(DelayMode mode)
{
    switch (mode) {
    case DelayMode::bounded: return "bounded";
    case DelayMode::power_law: return "power_law";
    case DelayMode::epsilon_sequence: return "epsilon_sequence";
    case DelayMode::scripted: return "scripted";
    case DelayMode::measured: return "measured";
    }
    return "?";
}

DelaySchedule DelaySchedule::bounded(std::size_t tau, std::uint64_t seed)
{
    DelaySchedule s;
    s.mode_ = DelayMode::bounded;
    s.tau_ = tau;
    s.seed_ = seed;
    s.rng_ = Rng(seed);
    return s;
}

DelaySchedule DelaySchedule::power_law(double exponent, std::size_t truncation,
                                       std::uint64_t seed)
{
    DelaySchedule s;
    s.mode_ = DelayMode::power_law;
    s.exponent_ = exponent;
    s.truncation_ = truncation;
    s.seed_ = seed;
    s.rng_ = Rng(seed);
    auto pmf = std::make_shared<DelayPmf>(DelayPmf::power_law(exponent, truncation));
    auto cdf = std::make_shared<std::vector<double>>(truncation + 1);
    long double acc = 0.0L;
    for (std::size_t j = 0; j <= truncation; ++j) {
        acc += (*pmf)(j);
        (*cdf)[j] = static_cast<double>(acc);
    }
    s.pmf_ = std::move(pmf);
    s.cdf_ = std::move(cdf);
    return s;
}

DelaySchedule DelaySchedule::epsilon_sequence(EpsilonSpec eps, std::size_t max_delay)
{
    eps.validate();
    DelaySchedule s;
    s.mode_ = DelayMode::epsilon_sequence;
    s.eps_ = std::move(eps);
    s.tau_ = max_delay;
    return s;
}

DelaySchedule DelaySchedule::scripted(std::vector<std::size_t> delays)
{
    DelaySchedule s;
    s.mode_ = DelayMode::scripted;
    s.script_ = std::move(delays);
    return s;
}

DelaySchedule DelaySchedule::measured()
{
    DelaySchedule s;
    s.mode_ = DelayMode::measured;
    return s;
}

std::optional<std::size_t> DelaySchedule::bound() const
{
    switch (mode_) {
    case DelayMode::bounded:
    case DelayMode::epsilon_sequence: return tau_;
    case DelayMode::power_law: return truncation_;
    case DelayMode::scripted:
        return script_.empty() ? 0 : *std::max_element(script_.begin(), script_.end());
    case DelayMode::measured: return std::nullopt;
    }
    return std::nullopt;
}

std::size_t DelaySchedule::next_delay(std::size_t k)
{
    switch (mode_) {
    case DelayMode::bounded: return rng_.index(std::min(k, tau_) + 1);
    case DelayMode::power_law: {
        const auto& cdf = *cdf_;
        const std::size_t limit = std::min(k, truncation_);
        const double u = rng_.uniform() * cdf[limit];
        const auto it = std::upper_bound(cdf.begin(), cdf.begin() + static_cast<std::ptrdiff_t>(limit + 1), u);
        return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), limit);
    }
    case DelayMode::epsilon_sequence: return std::min(k, k % (tau_ + 1));
    case DelayMode::scripted:
        if (k >= script_.size())
            throw std::out_of_range("scripted schedule exhausted at iteration " + std::to_string(k));
        return std::min(script_[k], k);
    case DelayMode::measured:
        throw std::logic_error("measured delays come from the multi-worker engine");
    }
    return 0;
}

void DelaySchedule::reset() { rng_ = Rng(seed_); }

const DelayPmf& DelaySchedule::pmf() const
{
    if (!pmf_) throw std::logic_error("schedule has no pmf");
    return *pmf_;
}

std::size_t next_delay(DelaySchedule& schedule, std::size_t k) { return schedule.next_delay(k); }

std::vector<std::size_t> load_schedule(std::istream& in)
{
    std::vector<std::size_t> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ss(line);
        long long v = -1;
        if (!(ss >> v) || v < 0)
            throw std::runtime_error("schedule line " + std::to_string(line_no) +
                                     ": expected a nonnegative integer");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

std::vector<std::size_t> load_schedule(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open schedule: " + path.string());
    return load_schedule(in);
}

void save_schedule(std::ostream& out, std::span<const std::size_t> delays)
{
    for (auto d : delays) out << d << '\n';
}

// --- history ---------------------------------------------------------------------------

HistoryRing::HistoryRing(std::size_t capacity) : slots_(capacity)
{
    if (capacity == 0) throw std::invalid_argument("HistoryRing: capacity must be positive");
}

bool HistoryRing::covers(std::size_t k, std::size_t delay) const
{
    if (delay == 0) return true;
    if (delay > k || k > next_) return false;
    return k - delay >= oldest();
}

void HistoryRing::push(std::size_t first, std::span<const double> before,
                       std::span<const double> after, double step_sq)
{
    auto& slot = slots_[next_ % slots_.size()];
    slot.iteration = next_;
    slot.first = first;
    slot.before.assign(before.begin(), before.end());
    slot.after.assign(after.begin(), after.end());
    slot.step_sq = step_sq;
    ++next_;
    count_ = std::min(count_ + 1, slots_.size());
}

const HistoryRecord& HistoryRing::at(std::size_t iteration) const
{
    if (iteration >= next_ || iteration < oldest())
        throw std::out_of_range("history evicted: iteration " + std::to_string(iteration) +
                                " not retained (capacity " + std::to_string(capacity()) + ")");
    return slots_[iteration % slots_.size()];
}

std::vector<std::size_t> read_set(std::size_t k, std::size_t delay, const ReadPolicy& policy,
                                  Rng* rng)
{
    std::vector<std::size_t> out;
    out.reserve(delay);
    for (std::size_t h = k; h-- > k - delay;) {
        if (policy.kind == ReadPolicy::Kind::consistent || rng->uniform() < 0.5) out.push_back(h);
    }
    return out;
}

void snapshot_into(const HistoryRing& history, std::span<const double> y,
                   std::span<const std::size_t> read, ReadPolicy::Kind kind,
                   std::span<double> out)
{
    std::copy(y.begin(), y.end(), out.begin());
    for (auto h : read) {
        const auto& rec = history.at(h);
        if (kind == ReadPolicy::Kind::consistent) {
            std::copy(rec.before.begin(), rec.before.end(), out.begin() + static_cast<std::ptrdiff_t>(rec.first));
        } else {
            for (std::size_t i = 0; i < rec.before.size(); ++i)
                out[rec.first + i] -= rec.after[i] - rec.before[i];
        }
    }
}

std::vector<double> snapshot(const HistoryRing& history, std::span<const double> y, std::size_t k,
                             std::size_t delay, const ReadPolicy& policy, Rng* rng)
{
    if (delay > k) throw std::invalid_argument("snapshot: delay exceeds iteration");
    if (!history.covers(k, delay))
        throw std::out_of_range("history evicted: cannot reach iteration " +
                                std::to_string(k - delay));
    Rng local(policy.seed ^ (0x9e3779b97f4a7c15ULL * (k + 1)));
    const auto read = read_set(k, delay, policy, rng ? rng : &local);
    std::vector<double> out(y.size());
    snapshot_into(history, y, read, policy.kind, out);
    return out;
}

} // namespace aapcd
