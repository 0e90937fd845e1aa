#include "qpj/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qpj/errors.hpp"

namespace qpj {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

double max_component(const Mat2& m) {
  return std::max({std::abs(m.a.real()), std::abs(m.a.imag()), std::abs(m.b.real()),
                   std::abs(m.b.imag()), std::abs(m.c.real()), std::abs(m.c.imag()),
                   std::abs(m.d.real()), std::abs(m.d.imag())});
}

// Scales m by 2^-e so the largest component is in [0.5, 1); returns e.
int rescale(Mat2& m) {
  const double big = max_component(m);
  if (big == 0.0 || !std::isfinite(big)) return 0;
  int e = 0;
  std::frexp(big, &e);
  if (e != 0) m = m * std::ldexp(1.0, -e);
  return e;
}

double torus_distance(double x, double y) {
  const double d = std::abs(frac(x - y));
  return std::min(d, 1.0 - d);
}

}  // namespace

Mat2 Mat2::inverse() const {
  const cplx dt = det();
  return {d / dt, -b / dt, -c / dt, a / dt};
}

double operator_norm(const Mat2& m) {
  const double f = m.frobenius_sq();
  const double dt = std::abs(m.det());
  const double disc = std::max(f * f - 4.0 * dt * dt, 0.0);
  return std::sqrt(0.5 * (f + std::sqrt(disc)));
}

ScaledMatrix ScaledMatrix::from(const Mat2& m) {
  ScaledMatrix s{m, 0.0};
  s.renormalize();
  return s;
}

void ScaledMatrix::renormalize() {
  const int e = rescale(m);
  logscale += e * kLn2;
}

bool ScaledMatrix::is_zero() const { return max_component(m) == 0.0; }

double ScaledMatrix::log_norm() const {
  const double nrm = operator_norm(m);
  if (nrm == 0.0) return -std::numeric_limits<double>::infinity();
  return logscale + std::log(nrm);
}

double ScaledMatrix::log_abs_entry(int i, int j) const {
  const double v = std::abs(m.at(i, j));
  if (v == 0.0) return -std::numeric_limits<double>::infinity();
  return logscale + std::log(v);
}

double ScaledMatrix::direct_log_abs_det() const {
  const double v = std::abs(m.det());
  if (v == 0.0) return -std::numeric_limits<double>::infinity();
  return 2.0 * logscale + std::log(v);
}

Mat2 ScaledMatrix::represented() const { return m * std::exp(logscale); }

ScaledMatrix ScaledMatrix::operator*(const ScaledMatrix& o) const {
  ScaledMatrix out{m * o.m, logscale + o.logscale};
  out.renormalize();
  return out;
}

const char* to_string(CocycleKind kind) {
  switch (kind) {
    case CocycleKind::plain:
      return "plain";
    case CocycleKind::analytic:
      return "analytic";
    case CocycleKind::unimodular:
      return "unimodular";
  }
  return "?";
}

void ScaledComplex::multiply(cplx v) {
  mantissa *= v;
  const double big = std::max(std::abs(mantissa.real()), std::abs(mantissa.imag()));
  if (big == 0.0 || !std::isfinite(big)) return;
  int e = 0;
  std::frexp(big, &e);
  mantissa *= std::ldexp(1.0, -e);
  exp2 += e;
}

void ScaledComplex::multiply(const ScaledComplex& o) {
  exp2 += o.exp2;
  multiply(o.mantissa);
}

double ScaledComplex::log_abs() const {
  const double v = std::abs(mantissa);
  if (v == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(v) + static_cast<double>(exp2) * kLn2;
}

cplx ScaledComplex::phase() const {
  const double v = std::abs(mantissa);
  return v == 0.0 ? cplx(1.0) : mantissa / v;
}

Mat2 step_matrix(CocycleKind kind, const JacobiModel& model, const PhasePoint& p, std::size_t j,
                 cplx energy, double zero_tol) {
  const auto jj = static_cast<long long>(j);
  const cplx zj = p.z() * rotation(model.omega, jj);
  const cplx zn = p.z() * rotation(model.omega, jj + 1);
  const cplx aj = model.a.at(zj);
  const cplx btj = model.b_tilde.at(zj);
  const cplx bn = model.b.at(zn);
  Mat2 s{aj - energy, -btj, bn, 0.0};
  if (kind == CocycleKind::analytic) return s;
  if (std::abs(bn) <= zero_tol) throw SingularStepError(j, std::abs(bn));
  if (kind == CocycleKind::plain) return s * (1.0 / bn);
  if (std::abs(btj) <= zero_tol) throw SingularStepError(j, std::abs(btj));
  return s * (std::sqrt(std::abs(bn) / std::abs(btj)) / bn);
}

CocycleProduct identity_product(CocycleKind kind, const PhasePoint& p, double omega, cplx energy) {
  CocycleProduct out;
  out.kind = kind;
  out.start = p;
  out.omega = omega;
  out.energy = energy;
  return out;
}

CocycleStepper::CocycleStepper(CocycleKind kind, const JacobiModel& model, const PhasePoint& p,
                               cplx energy, const ProductOptions& options)
    : model_(&model),
      options_(options),
      out_(identity_product(kind, p, model.omega, energy)),
      z0_(p.z()),
      w0_(1.0 / z0_) {
  if (options_.orbit && options_.orbit->omega() != model.omega) options_.orbit = nullptr;
  const cplx rot = site_rotation(0);
  const cplx z = z0_ * rot;
  const cplx w = w0_ * std::conj(rot);
  a_j_ = model.a.at(z, w);
  bt_j_ = model.b_tilde.at(z, w);
}

cplx CocycleStepper::site_rotation(std::size_t k) const {
  if (options_.orbit && k < options_.orbit->length()) return options_.orbit->rotation(k);
  return rotation(model_->omega, static_cast<long long>(k));
}

void CocycleStepper::step() {
  const CocycleKind kind = out_.kind;
  const cplx rot = site_rotation(j_ + 1);
  const cplx z = z0_ * rot;
  const cplx w = w0_ * std::conj(rot);
  const cplx b_next = model_->b.at(z, w);
  const cplx alpha = a_j_ - out_.energy;
  Mat2 next{alpha * m_.a - bt_j_ * m_.c, alpha * m_.b - bt_j_ * m_.d, b_next * m_.a,
            b_next * m_.b};
  cplx det_step = bt_j_ * b_next;
  if (kind != CocycleKind::analytic) {
    const double nb = std::abs(b_next);
    const double nbt = kind == CocycleKind::unimodular ? std::abs(bt_j_) : 1.0;
    const bool singular =
        nb <= options_.zero_tol || (kind == CocycleKind::unimodular && nbt <= options_.zero_tol);
    if (singular) {
      if (options_.policy == BZeroPolicy::strict) throw SingularStepError(j_, std::min(nb, nbt));
      ++out_.skipped_b_zeros;
    } else {
      cplx factor = 1.0 / b_next;
      if (kind == CocycleKind::unimodular) factor *= std::sqrt(nb / nbt);
      next = next * factor;
      det_step *= factor * factor;
    }
  }
  m_ = next;
  exp2_ += rescale(m_);
  out_.det.multiply(det_step);
  a_j_ = model_->a.at(z, w);
  bt_j_ = model_->b_tilde.at(z, w);
  ++j_;
}

double CocycleStepper::log_norm() const {
  return static_cast<double>(exp2_) * kLn2 + std::log(operator_norm(m_));
}

CocycleProduct CocycleStepper::current() const {
  CocycleProduct out = out_;
  out.value.m = m_;
  out.value.logscale = static_cast<double>(exp2_) * kLn2;
  out.n = j_;
  return out;
}

CocycleProduct product(CocycleKind kind, const JacobiModel& model, const PhasePoint& p,
                       cplx energy, std::size_t n, const ProductOptions& options) {
  if (n < 1) throw DomainError("product needs n >= 1");
  CocycleStepper stepper(kind, model, p, energy, options);
  stepper.advance(n);
  return stepper.current();
}

EntryValue entry_f(const CocycleProduct& prod, EntryKind which) {
  const bool match = (which == EntryKind::f && prod.kind == CocycleKind::plain) ||
                     (which == EntryKind::f_a && prod.kind == CocycleKind::analytic) ||
                     (which == EntryKind::f_u && prod.kind == CocycleKind::unimodular);
  if (!match) throw DomainError("entry kind does not match the product normalization");
  const cplx e = prod.value.m.a;
  const double v = std::abs(e);
  if (v == 0.0) return {-std::numeric_limits<double>::infinity(), 1.0};
  return {prod.value.logscale + std::log(v), e / v};
}

CocycleProduct compose(const CocycleProduct& left, const CocycleProduct& right) {
  if (left.kind != right.kind) throw CompositionError("cocycle kinds differ");
  if (left.omega != right.omega || left.energy != right.energy) {
    throw CompositionError("frequency or energy differ");
  }
  const PhasePoint expected = right.end();
  if (torus_distance(left.start.x, expected.x) > 1e-10 ||
      std::abs(left.start.logr - expected.logr) > 1e-10) {
    throw CompositionError("left factor does not start where the right factor ends");
  }
  CocycleProduct out = right;
  out.value = left.value * right.value;
  out.n = left.n + right.n;
  out.skipped_b_zeros = left.skipped_b_zeros + right.skipped_b_zeros;
  out.det.multiply(left.det);
  return out;
}

}  // namespace qpj
