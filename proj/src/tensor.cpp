#include "defectgeom/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace defectgeom {

SmallTensor::SmallTensor(int rank) : rank_(rank) {
  if (rank < 0 || rank > kMaxRank)
    throw std::invalid_argument("SmallTensor: rank " + std::to_string(rank) + " outside 0..4");
}

int SmallTensor::offset(std::initializer_list<int> idx) const {
  if (static_cast<int>(idx.size()) != rank_)
    throw std::invalid_argument("SmallTensor: index count does not match rank");
  int off = 0;
  for (int i : idx) {
    if (i < 0 || i > 2) throw std::invalid_argument("SmallTensor: index out of range");
    off = 3 * off + i;
  }
  return off;
}

double& SmallTensor::at(std::initializer_list<int> idx) { return c_[offset(idx)]; }
double SmallTensor::at(std::initializer_list<int> idx) const { return c_[offset(idx)]; }

double SmallTensor::max_abs() const {
  double m = 0.0;
  for (double v : components()) m = std::max(m, std::abs(v));
  return m;
}

bool SmallTensor::all_finite() const {
  for (double v : components())
    if (!std::isfinite(v)) return false;
  return true;
}

SmallTensor& SmallTensor::operator+=(const SmallTensor& o) {
  if (o.rank_ != rank_) throw std::invalid_argument("SmallTensor: rank mismatch in +=");
  for (int i = 0; i < size(); ++i) c_[i] += o.c_[i];
  return *this;
}

SmallTensor& SmallTensor::operator-=(const SmallTensor& o) {
  if (o.rank_ != rank_) throw std::invalid_argument("SmallTensor: rank mismatch in -=");
  for (int i = 0; i < size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

SmallTensor& SmallTensor::operator*=(double s) {
  for (int i = 0; i < size(); ++i) c_[i] *= s;
  return *this;
}

SmallTensor operator+(SmallTensor a, const SmallTensor& b) { return a += b; }
SmallTensor operator-(SmallTensor a, const SmallTensor& b) { return a -= b; }
SmallTensor operator*(double s, SmallTensor a) { return a *= s; }

SmallTensor SmallTensor::identity() {
  SmallTensor t(2);
  for (int i = 0; i < 3; ++i) t[at2(i, i)] = 1.0;
  return t;
}

SmallTensor SmallTensor::from_vector(const Vec3& v) {
  SmallTensor t(1);
  for (int i = 0; i < 3; ++i) t[i] = v[i];
  return t;
}

Vec3 SmallTensor::to_vector() const {
  if (rank_ != 1) throw std::invalid_argument("SmallTensor::to_vector: rank is not 1");
  return {c_[0], c_[1], c_[2]};
}

int levi_civita(int i, int j, int k) {
  for (int v : {i, j, k})
    if (v < 0 || v > 2) throw std::invalid_argument("levi_civita: index out of range");
  return eps3(i, j, k);
}

SmallTensor skew_pair(const SmallTensor& a, int m, int n) {
  const int r = a.rank();
  if (r < 2 || m == n || m < 0 || n < 0 || m >= r || n >= r)
    throw std::invalid_argument("skew_pair: invalid slots");
  SmallTensor out(r);
  std::array<int, 4> idx{};
  for (int flat = 0; flat < a.size(); ++flat) {
    int rem = flat;
    for (int s = r - 1; s >= 0; --s) {
      idx[s] = rem % 3;
      rem /= 3;
    }
    std::swap(idx[m], idx[n]);
    int swapped = 0;
    for (int s = 0; s < r; ++s) swapped = 3 * swapped + idx[s];
    out[flat] = a[flat] - a[swapped];
  }
  return out;
}

SmallTensor sym_part(const SmallTensor& a) {
  if (a.rank() != 2) throw std::invalid_argument("sym_part: rank must be 2");
  SmallTensor s(2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s[at2(i, j)] = 0.5 * (a[at2(i, j)] + a[at2(j, i)]);
  return s;
}

SmallTensor skew_part(const SmallTensor& a) {
  if (a.rank() != 2) throw std::invalid_argument("skew_part: rank must be 2");
  SmallTensor s(2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s[at2(i, j)] = 0.5 * (a[at2(i, j)] - a[at2(j, i)]);
  return s;
}

}  // namespace defectgeom
