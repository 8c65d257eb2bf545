#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fprune {

/// One layer's filters as row vectors (row-major, rows() x dim()).
class FilterMatrix {
 public:
  FilterMatrix() = default;
  /// Throws Error(invalid_argument) unless rows, dim >= 1, the data size
  /// matches and every value is finite.
  FilterMatrix(std::size_t rows, std::size_t dim, std::vector<float> data,
               std::string layer_name = {});

  static FilterMatrix from_rows(const std::vector<std::vector<float>>& rows,
                                std::string layer_name = {});

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }
  const std::string& layer_name() const noexcept { return layer_name_; }

  std::span<const float> row(std::size_t j) const noexcept {
    return {data_.data() + j * dim_, dim_};
  }
  const float* row_ptr(std::size_t j) const noexcept { return data_.data() + j * dim_; }
  std::span<const float> data() const noexcept { return data_; }

  friend bool operator==(const FilterMatrix&, const FilterMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> data_;
  std::string layer_name_;
};

}  // namespace fprune
