#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace cpsi {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// D x N data matrix. Rows are components, columns are locations.
//
// Indexing convention used throughout the library: component indices are
// 0-based array indices, locations are 1-based positions in [1, N] so that
// window arithmetic such as [tau - L + 1, tau + L] reads naturally.
// Serialized outputs report both as 1-based (see to_external_component).
class SequenceMatrix {
 public:
  SequenceMatrix() = default;
  explicit SequenceMatrix(RowMatrix values);

  int components() const { return static_cast<int>(values_.rows()); }
  int locations() const { return static_cast<int>(values_.cols()); }

  const RowMatrix& values() const { return values_; }

  // Component i (0-based), location j (1-based).
  double at(int i, int j) const { return values_(i, j - 1); }

  std::span<const double> row(int i) const {
    return {values_.data() + static_cast<std::ptrdiff_t>(i) * values_.cols(),
            static_cast<std::size_t>(values_.cols())};
  }

  // Keeps the given 1-based locations, in order.
  SequenceMatrix select_locations(std::span<const int> locations) const;

 private:
  RowMatrix values_;
};

inline int to_external_component(int i) { return i + 1; }
inline int from_external_component(int i) { return i - 1; }

// Row concatenation: element i*N + j (0-based) is X(i, j).
Eigen::VectorXd vec(const SequenceMatrix& x);
SequenceMatrix unvec(const Eigen::VectorXd& v, int components, int locations);

// One row per component, comma separated, optional header line to skip.
SequenceMatrix parse_csv(std::istream& in, bool skip_header = false);
SequenceMatrix read_csv(const std::string& path, bool skip_header = false);
void write_csv(std::ostream& out, const SequenceMatrix& x);

}  // namespace cpsi
