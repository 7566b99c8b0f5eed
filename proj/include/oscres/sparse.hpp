#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace oscres {

// Minimal CSR matrix. The step kernel accumulates each row in stored
// (column-ascending) order, which pins the floating-point result and lets
// tests compare it bit-for-bit against a naive dense loop.
class CsrMatrix {
public:
    struct Triplet {
        int row;
        int col;
        double value;
    };

    CsrMatrix() = default;
    static CsrMatrix from_triplets(int rows, int cols, std::vector<Triplet> entries);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int nnz() const { return static_cast<int>(values_.size()); }

    std::span<const int> row_ptr() const { return row_ptr_; }
    std::span<const int> col_idx() const { return col_idx_; }
    std::span<const double> values() const { return values_; }

    // Stored value at (row, col), 0 if the entry is not present.
    double coeff(int row, int col) const;

    // out[i] (+)= sum_j A[i,j] * x[j], terms added in column order.
    template <class T>
    void multiply(std::span<const T> x, std::span<double> out, bool accumulate) const {
        for (int i = 0; i < rows_; ++i) {
            double acc = accumulate ? out[static_cast<std::size_t>(i)] : 0.0;
            for (int k = row_ptr_[static_cast<std::size_t>(i)];
                 k < row_ptr_[static_cast<std::size_t>(i) + 1]; ++k)
                acc += values_[static_cast<std::size_t>(k)] *
                       static_cast<double>(x[static_cast<std::size_t>(col_idx_[static_cast<std::size_t>(k)])]);
            out[static_cast<std::size_t>(i)] = acc;
        }
    }

    std::vector<double> to_dense() const;  // row-major rows x cols

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<int> row_ptr_{0};
    std::vector<int> col_idx_;
    std::vector<double> values_;
};

}  // namespace oscres
