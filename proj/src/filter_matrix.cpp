#include "fprune/filter_matrix.hpp"

#include <cmath>

#include "fprune/error.hpp"

namespace fprune {

FilterMatrix::FilterMatrix(std::size_t rows, std::size_t dim, std::vector<float> data,
                           std::string layer_name)
    : rows_(rows), dim_(dim), data_(std::move(data)), layer_name_(std::move(layer_name)) {
  if (rows_ == 0 || dim_ == 0) {
    throw Error(Errc::invalid_argument, "filter matrix needs at least one row and one column");
  }
  if (data_.size() != rows_ * dim_) {
    throw Error(Errc::invalid_argument, "filter matrix data size does not match rows x dim");
  }
  for (float v : data_) {
    if (!std::isfinite(v)) {
      throw Error(Errc::non_finite, "filter matrix '" + layer_name_ + "' contains a non-finite value");
    }
  }
}

FilterMatrix FilterMatrix::from_rows(const std::vector<std::vector<float>>& rows,
                                     std::string layer_name) {
  if (rows.empty()) throw Error(Errc::invalid_argument, "filter matrix needs at least one row");
  const std::size_t dim = rows.front().size();
  std::vector<float> flat;
  flat.reserve(rows.size() * dim);
  for (const auto& r : rows) {
    if (r.size() != dim) throw Error(Errc::invalid_argument, "ragged filter rows");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return FilterMatrix(rows.size(), dim, std::move(flat), std::move(layer_name));
}

}  // namespace fprune
