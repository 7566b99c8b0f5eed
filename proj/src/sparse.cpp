#include "oscres/sparse.hpp"

#include <algorithm>

#include "oscres/errors.hpp"

namespace oscres {

CsrMatrix CsrMatrix::from_triplets(int rows, int cols, std::vector<Triplet> entries) {
    if (rows < 0 || cols < 0) throw DimensionError("CSR: negative dimensions");
    for (const auto& t : entries) {
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
            throw DimensionError("CSR: triplet index out of range");
    }
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    for (std::size_t i = 1; i < entries.size(); ++i) {
        if (entries[i].row == entries[i - 1].row && entries[i].col == entries[i - 1].col)
            throw DimensionError("CSR: duplicate entry");
    }

    CsrMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.row_ptr_.assign(static_cast<std::size_t>(rows) + 1, 0);
    m.col_idx_.reserve(entries.size());
    m.values_.reserve(entries.size());
    for (const auto& t : entries) {
        ++m.row_ptr_[static_cast<std::size_t>(t.row) + 1];
        m.col_idx_.push_back(t.col);
        m.values_.push_back(t.value);
    }
    for (int i = 0; i < rows; ++i)
        m.row_ptr_[static_cast<std::size_t>(i) + 1] += m.row_ptr_[static_cast<std::size_t>(i)];
    return m;
}

double CsrMatrix::coeff(int row, int col) const {
    if (row < 0 || row >= rows_ || col < 0 || col >= cols_)
        throw DimensionError("CSR: coeff index out of range");
    const auto begin = col_idx_.begin() + row_ptr_[static_cast<std::size_t>(row)];
    const auto end = col_idx_.begin() + row_ptr_[static_cast<std::size_t>(row) + 1];
    const auto it = std::lower_bound(begin, end, col);
    if (it == end || *it != col) return 0.0;
    return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

std::vector<double> CsrMatrix::to_dense() const {
    std::vector<double> d(static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_), 0.0);
    for (int i = 0; i < rows_; ++i)
        for (int k = row_ptr_[static_cast<std::size_t>(i)]; k < row_ptr_[static_cast<std::size_t>(i) + 1]; ++k)
            d[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) +
              static_cast<std::size_t>(col_idx_[static_cast<std::size_t>(k)])] =
                values_[static_cast<std::size_t>(k)];
    return d;
}

}  // namespace oscres
