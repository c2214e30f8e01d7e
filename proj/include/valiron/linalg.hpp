#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "valiron/errors.hpp"

namespace valiron {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;

/// Hermitian inner product <a, b> = sum a_j conj(b_j).
inline Complex inner(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::invalid_parameter, "inner product of vectors with different lengths");
  }
  Complex acc{0.0, 0.0};
  for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * std::conj(b[j]);
  return acc;
}

inline double norm_sq(std::span<const Complex> a) {
  double acc = 0.0;
  for (const auto& c : a) acc += std::norm(c);
  return acc;
}

inline double norm(std::span<const Complex> a) { return std::sqrt(norm_sq(a)); }

inline CVector scaled(std::span<const Complex> a, Complex s) {
  CVector out(a.begin(), a.end());
  for (auto& c : out) c *= s;
  return out;
}

inline CVector added(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::invalid_parameter, "sum of vectors with different lengths");
  }
  CVector out(a.begin(), a.end());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += b[j];
  return out;
}

inline CVector subtracted(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::invalid_parameter, "difference of vectors with different lengths");
  }
  CVector out(a.begin(), a.end());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] -= b[j];
  return out;
}

inline bool all_finite(std::span<const Complex> a) {
  for (const auto& c : a) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  }
  return true;
}

inline bool is_finite(Complex c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); }

}  // namespace valiron
