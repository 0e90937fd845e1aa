#pragma once

#include <cstddef>
#include <functional>

#include "qpj/sampling.hpp"

namespace qpj {

// Euclidean disk in the z-plane.
struct Disk {
  cplx center = 1.0;
  double radius = 0.1;

  // Disk of the given radius around the point exp(2 pi i x0) of the unit circle.
  static Disk around(double x0, double radius) { return {PhasePoint{x0, 0.0}.z(), radius}; }
};

struct WindingResult {
  long count = 0;
  std::size_t contour_samples = 0;
  std::size_t refined = 0;
  double min_log_abs_on_contour = 0.0;
  double radius = 0.0;  // radius actually used (after perturbation)
};

struct WindingOptions {
  std::size_t initial_samples = 256;
  std::size_t max_samples = std::size_t{1} << 20;
  // contour values below this fraction of the median modulus count as a zero on the contour
  double zero_ratio = 1e-10;
  // radius perturbation (x1.03) retries in winding_count_perturbed
  int max_attempts = 5;
  AnnulusConfig annulus{};
};

// Zeros (with multiplicity) of z -> f_n^a(z, E0) inside the disk, from the winding of the
// phase along the sampled boundary circle.
WindingResult winding_count(const JacobiModel& model, cplx e0, std::size_t n, const Disk& disk,
                            const WindingOptions& options = {});

// Winding of f_n^a(., E0) along the closed curve t -> contour(t), t in [0, 1), sampled at
// t = k / samples. The curve must stay inside the annulus.
WindingResult winding_count_contour(const JacobiModel& model, cplx e0, std::size_t n,
                                    const std::function<cplx(double)>& contour,
                                    const WindingOptions& options = {});

// Same, retrying with radius * 1.03 on ZeroOnContourError.
WindingResult winding_count_perturbed(const JacobiModel& model, cplx e0, std::size_t n,
                                      Disk disk, const WindingOptions& options = {});

struct JensenResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double radius = 0.0;  // R actually used; the contour is |E - E1| = 4R
  int attempts = 0;
  std::size_t zeros_inside = 0;
};

// lhs = (1/2pi) int log|f_n^a(x, E1 + 4R e^{it})| dt - log|f_n^a(x, E1)|
// rhs = sum over eigenvalues E_j of H^(n)(x) with |E_j - E1| < 4R of log(4R / |E_j - E1|)
JensenResult jensen_check(const JacobiModel& model, const PhasePoint& x, std::size_t n, cplx e1,
                          double radius, std::size_t quad);

}  // namespace qpj
