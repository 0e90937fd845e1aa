#pragma once

#include "qpj/cocycle.hpp"
#include "qpj/random.hpp"

namespace qpj {

// A u_plus = s_max v_plus, A u_minus = s_min v_minus, with u_plus, u_minus orthonormal
// and v_plus, v_minus orthonormal. The first nonzero component of u_plus and of
// u_minus is real positive.
struct Svd2 {
  Vec2 u_plus, u_minus, v_plus, v_minus;
  double s_max = 0.0;
  double s_min = 0.0;
};

Svd2 svd2(const Mat2& a);

// u1 v2 - u2 v1
inline cplx wedge(const Vec2& u, const Vec2& v) { return u[0] * v[1] - u[1] * v[0]; }

inline cplx inner(const Vec2& u, const Vec2& v) {
  return std::conj(u[0]) * v[0] + std::conj(u[1]) * v[1];
}

inline double norm(const Vec2& v) { return std::sqrt(std::norm(v[0]) + std::norm(v[1])); }

// Complex Gaussian entries, rescaled by a square root of the determinant.
Mat2 random_sl2(Rng& rng);

// Uniformly distributed unit vector in C^2.
Vec2 random_unit_vector(Rng& rng);

// Haar-random element of U(2).
Mat2 random_unitary(Rng& rng);

}  // namespace qpj
