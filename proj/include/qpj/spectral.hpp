#pragma once

#include <cstddef>
#include <vector>

#include "qpj/sampling.hpp"

namespace qpj {

// H^(n)(x): diag[j] = a(x + j w), superdiagonal -offdiag[j], subdiagonal -conj(offdiag[j]),
// offdiag[j] = b(x + (j+1) w).
struct JacobiSample {
  std::vector<double> diag;
  std::vector<cplx> offdiag;
  // Largest |Im a(x + j w)| seen while building; nonzero means a is not real on T.
  double max_diag_imag = 0.0;

  std::size_t size() const noexcept { return diag.size(); }
};

struct SymmetricTridiagonal {
  std::vector<double> diag;
  std::vector<double> offdiag_abs;
};

struct SpectrumWindow {
  double center = 0.0;
  double radius = 1.0;
};

// f_n^a(z, E) = phase * exp(log_abs).
struct CharPolyEval {
  double log_abs = 0.0;
  cplx phase = 1.0;
  bool underflowed = false;
};

JacobiSample build(const JacobiModel& model, const PhasePoint& x, std::size_t n);

// Diagonal unitary gauge: same spectrum, off-diagonals replaced by their moduli.
SymmetricTridiagonal gauge_to_real(const JacobiSample& sample);

// Number of eigenvalues strictly below e.
std::size_t sturm_count(const SymmetricTridiagonal& t, double e);
// Number of eigenvalues at or below e.
std::size_t sturm_count_at_or_below(const SymmetricTridiagonal& t, double e);

// Gershgorin enclosure [lo, hi] of the spectrum.
std::pair<double, double> gershgorin(const SymmetricTridiagonal& t);

// Eigenvalues in the half-open window (center - radius, center + radius], ascending.
std::vector<double> eigenvalues_in(const SymmetricTridiagonal& t, const SpectrumWindow& w);
std::vector<double> eigenvalues_in(const JacobiSample& sample, const SpectrumWindow& w);
std::vector<double> all_eigenvalues(const SymmetricTridiagonal& t);
// k-th smallest eigenvalue, k in [1, n].
double eigenvalue(const SymmetricTridiagonal& t, std::size_t k);

// Three-term recursion for det(H^(n)(z) - E), carried in scaled form.
CharPolyEval charpoly(const JacobiModel& model, const PhasePoint& p, cplx energy, std::size_t n,
                      const Orbit* orbit = nullptr);

// a(x + k w) and b~(x + k w) b(x + k w), k < n, for repeated evaluation at many energies.
struct SiteTable {
  std::vector<cplx> a;
  std::vector<cplx> beta;
};

SiteTable site_table(const JacobiModel& model, const PhasePoint& p, std::size_t n);
CharPolyEval charpoly(const SiteTable& sites, cplx energy);

struct WindowCountRow {
  double x = 0.0;
  std::size_t count = 0;
  double below = 0.0;  // nearest eigenvalue <= center (NaN if none)
  double above = 0.0;  // nearest eigenvalue > center (NaN if none)
};

struct WindowCountResult {
  std::size_t max_count = 0;
  double argmax_x = 0.0;
  double radius = 0.0;
  std::vector<WindowCountRow> rows;
};

// max over x = i / x_grid of #eigenvalues of H^(n)(x) in (E0 - n^-C1, E0 + n^-C1].
WindowCountResult max_window_count(const JacobiModel& model, std::size_t n, double e0, double c1,
                                   std::size_t x_grid);

}  // namespace qpj
