#include "aapcd/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace aapcd {

Dataset::Dataset(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                 std::vector<std::uint32_t> col_idx, std::vector<double> values,
                 std::vector<double> labels)
    : rows_(rows),
      cols_(cols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)),
      labels_(std::move(labels))
{
    if (row_ptr_.size() != rows_ + 1 || row_ptr_.front() != 0)
        throw std::invalid_argument("Dataset: row_ptr must have rows+1 entries starting at 0");
    if (col_idx_.size() != values_.size() || row_ptr_.back() != values_.size())
        throw std::invalid_argument("Dataset: index/value arrays disagree with row_ptr");
    if (labels_.size() != rows_)
        throw std::invalid_argument("Dataset: one label per row required");
    for (double b : labels_)
        if (b != 1.0 && b != -1.0)
            throw std::invalid_argument("Dataset: labels must be +1 or -1");

    std::vector<std::uint32_t> seen(cols_, UINT32_MAX);
    for (std::size_t i = 0; i < rows_; ++i) {
        if (row_ptr_[i + 1] < row_ptr_[i])
            throw std::invalid_argument("Dataset: row_ptr must be nondecreasing");
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
            const auto j = col_idx_[p];
            if (j >= cols_)
                throw std::invalid_argument("Dataset: column index out of range");
            if (seen[j] == i)
                throw std::invalid_argument("Dataset: duplicate column index within a row");
            seen[j] = static_cast<std::uint32_t>(i);
        }
    }
    build_columns();
}

Dataset Dataset::from_dense(std::size_t rows, std::size_t cols,
                            std::span<const double> row_major, std::vector<double> labels)
{
    if (row_major.size() != rows * cols)
        throw std::invalid_argument("Dataset::from_dense: size mismatch");
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::uint32_t> idx;
    std::vector<double> val;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const double a = row_major[i * cols + j];
            if (a != 0.0) {
                idx.push_back(static_cast<std::uint32_t>(j));
                val.push_back(a);
            }
        }
        row_ptr.push_back(idx.size());
    }
    return Dataset(rows, cols, std::move(row_ptr), std::move(idx), std::move(val),
                   std::move(labels));
}

void Dataset::build_columns()
{
    col_ptr_.assign(cols_ + 1, 0);
    for (auto j : col_idx_) ++col_ptr_[j + 1];
    for (std::size_t j = 0; j < cols_; ++j) col_ptr_[j + 1] += col_ptr_[j];
    row_idx_.resize(values_.size());
    col_values_.resize(values_.size());
    std::vector<std::size_t> fill(col_ptr_.begin(), col_ptr_.end() - 1);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
            const auto dst = fill[col_idx_[p]]++;
            row_idx_[dst] = static_cast<std::uint32_t>(i);
            col_values_[dst] = values_[p];
        }
    }
}

Dataset::SparseView Dataset::row(std::size_t i) const
{
    const auto b = row_ptr_[i], e = row_ptr_[i + 1];
    return {std::span(col_idx_).subspan(b, e - b), std::span(values_).subspan(b, e - b)};
}

Dataset::SparseView Dataset::column(std::size_t j) const
{
    const auto b = col_ptr_[j], e = col_ptr_[j + 1];
    return {std::span(row_idx_).subspan(b, e - b), std::span(col_values_).subspan(b, e - b)};
}

void Dataset::multiply(std::span<const double> x, std::span<double> z) const
{
    for (std::size_t i = 0; i < rows_; ++i) {
        double acc = 0.0;
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
            acc += values_[p] * x[col_idx_[p]];
        z[i] = acc;
    }
}

void Dataset::multiply_transposed(std::span<const double> r, std::span<double> out) const
{
    for (std::size_t j = 0; j < cols_; ++j) {
        double acc = 0.0;
        for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p)
            acc += col_values_[p] * r[row_idx_[p]];
        out[j] = acc;
    }
}

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

template <class T>
void fnv_mix(std::uint64_t& h, const T* data, std::size_t count)
{
    const auto* bytes = reinterpret_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < count * sizeof(T); ++i) {
        h ^= bytes[i];
        h *= kFnvPrime;
    }
}

} // namespace

std::uint64_t Dataset::content_hash() const
{
    std::uint64_t h = kFnvOffset;
    const std::uint64_t dims[2] = {rows_, cols_};
    fnv_mix(h, dims, 2);
    fnv_mix(h, row_ptr_.data(), row_ptr_.size());
    fnv_mix(h, col_idx_.data(), col_idx_.size());
    fnv_mix(h, values_.data(), values_.size());
    fnv_mix(h, labels_.data(), labels_.size());
    return h;
}

Dataset load_libsvm(std::istream& in, std::size_t cols)
{
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::uint32_t> idx;
    std::vector<double> val;
    std::vector<double> labels;
    std::size_t max_col = 0;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;

        std::istringstream tokens(line);
        std::string tok;
        tokens >> tok;
        double label = 0.0;
        try {
            label = std::stod(tok);
        } catch (const std::exception&) {
            throw std::runtime_error("libsvm line " + std::to_string(line_no) + ": bad label '" +
                                     tok + "'");
        }
        labels.push_back(label > 0.0 ? 1.0 : -1.0);

        const auto row_begin = idx.size();
        while (tokens >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos)
                throw std::runtime_error("libsvm line " + std::to_string(line_no) +
                                         ": expected idx:val, got '" + tok + "'");
            unsigned long one_based = 0;
            double v = 0.0;
            try {
                one_based = std::stoul(tok.substr(0, colon));
                v = std::stod(tok.substr(colon + 1));
            } catch (const std::exception&) {
                throw std::runtime_error("libsvm line " + std::to_string(line_no) +
                                         ": malformed entry '" + tok + "'");
            }
            if (one_based == 0)
                throw std::runtime_error("libsvm line " + std::to_string(line_no) +
                                         ": indices are 1-based");
            if (v == 0.0) continue;
            idx.push_back(static_cast<std::uint32_t>(one_based - 1));
            val.push_back(v);
            max_col = std::max<std::size_t>(max_col, one_based);
        }
        // Keep rows column-sorted; libsvm writers usually already are.
        std::vector<std::size_t> order(idx.size() - row_begin);
        for (std::size_t p = 0; p < order.size(); ++p) order[p] = row_begin + p;
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return idx[a] < idx[b]; });
        std::vector<std::uint32_t> sorted_idx;
        std::vector<double> sorted_val;
        for (auto p : order) {
            sorted_idx.push_back(idx[p]);
            sorted_val.push_back(val[p]);
        }
        std::copy(sorted_idx.begin(), sorted_idx.end(), idx.begin() + row_begin);
        std::copy(sorted_val.begin(), sorted_val.end(), val.begin() + row_begin);
        row_ptr.push_back(idx.size());
    }
    if (cols == 0) cols = max_col;
    if (max_col > cols)
        throw std::runtime_error("libsvm: index exceeds declared column count");
    const auto rows = labels.size();
    return Dataset(rows, cols, std::move(row_ptr), std::move(idx), std::move(val),
                   std::move(labels));
}

Dataset load_libsvm(const std::filesystem::path& path, std::size_t cols)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset: " + path.string());
    return load_libsvm(in, cols);
}

} // namespace aapcd
