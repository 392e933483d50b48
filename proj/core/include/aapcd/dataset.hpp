#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <span>
#include <vector>

namespace aapcd {

/// Sparse design matrix with +/-1 labels. Stored row-compressed, with a
/// column-compressed mirror so coordinate updates touch one column only.
class Dataset {
public:
    struct SparseView {
        std::span<const std::uint32_t> indices;
        std::span<const double> values;
    };

    Dataset() = default;

    /// Builds from CSR arrays. Throws std::invalid_argument when an index is
    /// out of range, a row repeats a column, or a label is not +/-1.
    Dataset(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
            std::vector<std::uint32_t> col_idx, std::vector<double> values,
            std::vector<double> labels);

    /// Row-major dense input; exact zeros are dropped.
    static Dataset from_dense(std::size_t rows, std::size_t cols,
                              std::span<const double> row_major,
                              std::vector<double> labels);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t nonzeros() const { return values_.size(); }

    SparseView row(std::size_t i) const;
    SparseView column(std::size_t j) const;
    std::span<const double> labels() const { return labels_; }

    /// z = A x
    void multiply(std::span<const double> x, std::span<double> z) const;
    /// out = A^T r
    void multiply_transposed(std::span<const double> r, std::span<double> out) const;

    /// FNV-1a over the CSR arrays and labels.
    std::uint64_t content_hash() const;

private:
    void build_columns();

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::uint32_t> col_idx_;
    std::vector<double> values_;
    std::vector<double> labels_;

    std::vector<std::size_t> col_ptr_{0};
    std::vector<std::uint32_t> row_idx_;
    std::vector<double> col_values_;
};

/// Parses `label idx:val idx:val ...` lines. Indices are 1-based in the file
/// and stored 0-based; a label > 0 becomes +1, anything else -1. When
/// `cols` is zero the column count is the largest index seen.
Dataset load_libsvm(std::istream& in, std::size_t cols = 0);
Dataset load_libsvm(const std::filesystem::path& path, std::size_t cols = 0);

} // namespace aapcd
