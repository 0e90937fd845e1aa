#pragma once

#include <array>
#include <cstddef>

#include "qpj/sampling.hpp"

namespace qpj {

using Vec2 = std::array<cplx, 2>;

// [[a, b], [c, d]]
struct Mat2 {
  cplx a, b, c, d;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  cplx det() const { return a * d - b * c; }
  double frobenius_sq() const { return std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d); }
  Vec2 operator*(const Vec2& v) const { return {a * v[0] + b * v[1], c * v[0] + d * v[1]}; }
  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  Mat2 operator*(cplx s) const { return {a * s, b * s, c * s, d * s}; }
  Mat2 adjoint() const { return {std::conj(a), std::conj(c), std::conj(b), std::conj(d)}; }
  Mat2 inverse() const;
  cplx& at(int i, int j) { return i == 0 ? (j == 0 ? a : b) : (j == 0 ? c : d); }
  cplx at(int i, int j) const { return i == 0 ? (j == 0 ? a : b) : (j == 0 ? c : d); }
};

// Closed-form spectral norm of a 2x2 matrix.
double operator_norm(const Mat2& m);

// The matrix exp(logscale) * m, with m kept at unit scale.
struct ScaledMatrix {
  Mat2 m = Mat2::identity();
  double logscale = 0.0;

  static ScaledMatrix identity() { return {}; }
  static ScaledMatrix from(const Mat2& m);

  // Rescales m by a power of two so that its largest real/imaginary component lies in
  // [0.5, 1); the max entry modulus then lies in [0.5, 2). Exact in binary arithmetic.
  void renormalize();
  bool is_zero() const;
  double log_norm() const;
  double log_abs_entry(int i, int j) const;
  // Direct determinant from the stored entries. Loses all accuracy on strongly
  // hyperbolic products; CocycleProduct tracks the determinant separately.
  double direct_log_abs_det() const;
  // exp(logscale) * m; overflows for large logscale.
  Mat2 represented() const;

  ScaledMatrix operator*(const ScaledMatrix& o) const;
};

enum class CocycleKind { plain, analytic, unimodular };
enum class BZeroPolicy { strict, skip };
enum class EntryKind { f, f_a, f_u };

const char* to_string(CocycleKind kind);

// Determinant kept as mantissa * 2^exp2 so it survives long products.
struct ScaledComplex {
  cplx mantissa = 1.0;
  long long exp2 = 0;

  void multiply(cplx v);
  void multiply(const ScaledComplex& o);
  double log_abs() const;
  cplx phase() const;
};

struct CocycleProduct {
  ScaledMatrix value;
  CocycleKind kind = CocycleKind::analytic;
  std::size_t n = 0;
  std::size_t skipped_b_zeros = 0;
  PhasePoint start;
  double omega = 0.0;
  cplx energy = 0.0;
  ScaledComplex det;

  double log_norm() const { return value.log_norm(); }
  double log_abs_det() const { return det.log_abs(); }
  PhasePoint end() const { return start.shifted(static_cast<long long>(n), omega); }
};

struct ProductOptions {
  BZeroPolicy policy = BZeroPolicy::strict;
  double zero_tol = kDefaultZeroTol;
  // Optional precomputed rotations; must cover indices 0..n.
  const Orbit* orbit = nullptr;
};

// Step j of the cocycle at phase p:
//   analytic:   [[a(p+j w) - E, -b~(p+j w)], [b(p+(j+1) w), 0]]
//   plain:      analytic / b(p+(j+1) w)
//   unimodular: plain * |b(p+(j+1) w) / b~(p+j w)|^{1/2}
Mat2 step_matrix(CocycleKind kind, const JacobiModel& model, const PhasePoint& p, std::size_t j,
                 cplx energy, double zero_tol = kDefaultZeroTol);

// Incremental form of product(): after advance(k) the current() product covers steps
// 0..steps()-1.
class CocycleStepper {
 public:
  CocycleStepper(CocycleKind kind, const JacobiModel& model, const PhasePoint& p, cplx energy,
                 const ProductOptions& options = {});

  void step();
  void advance(std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) step();
  }
  std::size_t steps() const noexcept { return j_; }
  double log_norm() const;
  double log_abs_det() const { return out_.det.log_abs(); }
  CocycleProduct current() const;

 private:
  cplx site_rotation(std::size_t k) const;

  const JacobiModel* model_;
  ProductOptions options_;
  CocycleProduct out_;
  cplx z0_, w0_;
  cplx a_j_, bt_j_;
  Mat2 m_ = Mat2::identity();
  long long exp2_ = 0;
  std::size_t j_ = 0;
};

// Ordered product S_{n-1} ... S_1 S_0, renormalized after every step.
CocycleProduct product(CocycleKind kind, const JacobiModel& model, const PhasePoint& p,
                       cplx energy, std::size_t n, const ProductOptions& options = {});

CocycleProduct identity_product(CocycleKind kind, const PhasePoint& p, double omega, cplx energy);

struct EntryValue {
  double log_abs = 0.0;  // -infinity for an exact zero
  cplx phase = 1.0;
};

// The (1,1) entry: f_n, f_n^a or f_n^u depending on the product kind.
EntryValue entry_f(const CocycleProduct& prod, EntryKind which);

// left * right, where left starts where right ends.
CocycleProduct compose(const CocycleProduct& left, const CocycleProduct& right);

}  // namespace qpj
