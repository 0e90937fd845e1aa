#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace qpj {

using int128 = __int128;

struct ContinuedFraction {
  double omega = 0.0;
  std::vector<std::int64_t> quotients;  // a_0, a_1, ...
  std::vector<int128> p, q;             // convergents p_s / q_s, s = 0..
  bool precision_exhausted = false;     // expansion stopped on a quotient above 1e12

  std::size_t size() const noexcept { return quotients.size(); }
};

// Expansion of the exact binary value of omega. Throws RationalError when the expansion
// terminates (or exhausts precision) while the denominator is still small.
ContinuedFraction expand(double omega, std::size_t terms);

// Distance from n * omega to the nearest integer, exact for the binary value of omega.
double torus_norm(double omega, std::int64_t n);

struct DiophantineCheck {
  double C_omega = 0.0;
  double alpha = 2.0;
  std::int64_t N = 0;
  bool ok = true;
  std::int64_t worst_n = 1;
  // min over scanned n of ||n w|| n (log(n+1))^alpha; ok iff it is >= C_omega.
  double worst_ratio = 0.0;
};

// ||n w|| >= C_omega / (n (log(n+1))^alpha) for 1 <= n <= N.
DiophantineCheck verify(double omega, double C_omega, double alpha, std::int64_t N);

}  // namespace qpj
