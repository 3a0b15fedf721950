#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>

namespace defectgeom {

using Vec3 = std::array<double, 3>;

// Axis labels for 0-based storage indices.
inline constexpr int X = 0;
inline constexpr int Y = 1;
inline constexpr int Z = 2;

constexpr int pow3(int r) { return r == 0 ? 1 : 3 * pow3(r - 1); }

// Dense 3D tensor of rank 0..4. Components are stored row-major, so the
// first index is the slowest. Slot meaning is fixed by each producer.
class SmallTensor {
 public:
  static constexpr int kMaxRank = 4;

  SmallTensor() = default;
  explicit SmallTensor(int rank);

  int rank() const { return rank_; }
  int size() const { return pow3(rank_); }

  double& operator[](int flat) { return c_[flat]; }
  double operator[](int flat) const { return c_[flat]; }

  double& at(std::initializer_list<int> idx);
  double at(std::initializer_list<int> idx) const;

  std::span<double> components() { return {c_.data(), static_cast<std::size_t>(size())}; }
  std::span<const double> components() const {
    return {c_.data(), static_cast<std::size_t>(size())};
  }

  double max_abs() const;
  bool all_finite() const;

  SmallTensor& operator+=(const SmallTensor& o);
  SmallTensor& operator-=(const SmallTensor& o);
  SmallTensor& operator*=(double s);

  static SmallTensor identity();
  static SmallTensor from_vector(const Vec3& v);
  Vec3 to_vector() const;

 private:
  int offset(std::initializer_list<int> idx) const;

  int rank_ = 0;
  std::array<double, 81> c_{};
};

SmallTensor operator+(SmallTensor a, const SmallTensor& b);
SmallTensor operator-(SmallTensor a, const SmallTensor& b);
SmallTensor operator*(double s, SmallTensor a);

// Flat offsets for 0-based indices.
constexpr int at2(int i, int j) { return 3 * i + j; }
constexpr int at3(int i, int j, int k) { return 9 * i + 3 * j + k; }
constexpr int at4(int i, int j, int k, int l) { return 27 * i + 9 * j + 3 * k + l; }

// Permutation symbol on 0-based indices; throws std::invalid_argument outside 0..2.
int levi_civita(int i, int j, int k);

// Unchecked variant for inner loops.
constexpr int eps3(int i, int j, int k) {
  return (i - j) * (j - k) * (k - i) / 2;
}

constexpr double kronecker(int i, int j) { return i == j ? 1.0 : 0.0; }

// A_[mn] = A_..m..n.. - A_..n..m.. over slots m, n (0-based slot numbers).
SmallTensor skew_pair(const SmallTensor& a, int m, int n);

SmallTensor sym_part(const SmallTensor& a);
SmallTensor skew_part(const SmallTensor& a);

}  // namespace defectgeom
