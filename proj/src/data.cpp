#include "reshape/data.hpp"

#include "reshape/errors.hpp"

namespace reshape {

DataMatrix::DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw InvalidInput("DataMatrix: " + std::to_string(data_.size()) + " values for a " +
                           std::to_string(rows_) + "x" + std::to_string(cols_) + " matrix");
    }
}

std::vector<double> DataMatrix::column(std::size_t j) const {
    std::vector<double> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
}

}  // namespace reshape
