#include "qpj/zeros.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <functional>
#include <vector>

#include "qpj/errors.hpp"
#include "qpj/parallel.hpp"
#include "qpj/spectral.hpp"

namespace qpj {

namespace {

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

void check_disk(const Disk& disk, const AnnulusConfig& annulus) {
  if (!(disk.radius > 0.0)) throw DomainError("disk radius must be positive");
  const double c = std::abs(disk.center);
  if (c - disk.radius <= 0.0 || !annulus.contains(std::log(c + disk.radius)) ||
      !annulus.contains(std::log(c - disk.radius))) {
    throw DomainError("disk leaves the annulus of analyticity");
  }
}

}  // namespace

WindingResult winding_count(const JacobiModel& model, cplx e0, std::size_t n, const Disk& disk,
                            const WindingOptions& options) {
  check_disk(disk, options.annulus);
  const cplx c = disk.center;
  const double r = disk.radius;
  WindingResult out = winding_count_contour(
      model, e0, n,
      [c, r](double t) { return c + r * cplx(std::cos(kTwoPi * t), std::sin(kTwoPi * t)); },
      options);
  out.radius = r;
  return out;
}

WindingResult winding_count_contour(const JacobiModel& model, cplx e0, std::size_t n,
                                    const std::function<cplx(double)>& contour,
                                    const WindingOptions& options) {
  if (n < 1) throw DomainError("winding_count needs n >= 1");
  const Orbit orbit(model.omega, n);
  auto eval = [&](std::size_t k, std::size_t total) {
    const cplx z = contour(static_cast<double>(k) / static_cast<double>(total));
    const PhasePoint p = PhasePoint::from_complex(z);
    if (!options.annulus.contains(p.logr)) {
      throw DomainError("contour leaves the annulus of analyticity");
    }
    return charpoly(model, p, e0, n, &orbit);
  };

  std::size_t total = options.initial_samples;
  std::vector<CharPolyEval> samples(total);
  parallel_for(total, [&](std::size_t k) { samples[k] = eval(k, total); });

  WindingResult out;
  bool have_prev = false;
  long prev_count = 0;
  for (;;) {
    std::vector<double> logs(total);
    double min_log = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < total; ++k) {
      logs[k] = samples[k].log_abs;
      min_log = std::min(min_log, logs[k]);
    }
    double winding = 0.0;
    bool smooth = std::isfinite(min_log);
    if (smooth) {
      for (std::size_t k = 0; k < total; ++k) {
        const double inc = std::arg(samples[(k + 1) % total].phase / samples[k].phase);
        if (std::abs(inc) >= 0.5 * std::numbers::pi) smooth = false;
        winding += inc;
      }
    }
    const long count = std::lround(winding / kTwoPi);
    out.contour_samples = total;
    out.min_log_abs_on_contour = min_log;
    if (smooth && have_prev && count == prev_count) {
      if (min_log - median(logs) < std::log(options.zero_ratio)) {
        throw ZeroOnContourError("charpoly nearly vanishes on the contour");
      }
      out.count = count;
      return out;
    }
    if (total * 2 > options.max_samples) {
      throw ZeroOnContourError("winding number did not stabilize by " + std::to_string(total) +
                               " samples");
    }
    if (smooth) {
      have_prev = true;
      prev_count = count;
    }
    // Keep old samples at even indices; evaluate the new odd ones.
    std::vector<CharPolyEval> refined(2 * total);
    for (std::size_t k = 0; k < total; ++k) refined[2 * k] = samples[k];
    const std::size_t next_total = 2 * total;
    parallel_for(total, [&](std::size_t k) { refined[2 * k + 1] = eval(2 * k + 1, next_total); });
    samples = std::move(refined);
    total = next_total;
    ++out.refined;
  }
}

WindingResult winding_count_perturbed(const JacobiModel& model, cplx e0, std::size_t n, Disk disk,
                                      const WindingOptions& options) {
  for (int attempt = 1;; ++attempt) {
    try {
      return winding_count(model, e0, n, disk, options);
    } catch (const ZeroOnContourError&) {
      if (attempt >= options.max_attempts) throw;
      disk.radius *= 1.03;
    }
  }
}

JensenResult jensen_check(const JacobiModel& model, const PhasePoint& x, std::size_t n, cplx e1,
                          double radius, std::size_t quad) {
  if (!(radius > 0.0)) throw DomainError("jensen_check needs R > 0");
  if (quad < 16) throw DomainError("jensen_check needs quad >= 16");
  const SiteTable sites = site_table(model, x, n);
  const CharPolyEval center = charpoly(sites, e1);
  if (!std::isfinite(center.log_abs)) throw DomainError("f_n^a vanishes at E1");
  const std::vector<double> zeros = all_eigenvalues(gauge_to_real(build(model, x, n)));

  JensenResult out;
  double r = radius;
  for (int attempt = 1;; ++attempt) {
    const double rad = 4.0 * r;
    bool on_contour = false;
    for (double z : zeros) {
      if (std::abs(std::abs(cplx(z) - e1) - rad) <= 1e-9 * rad) on_contour = true;
    }
    if (on_contour) {
      if (attempt >= 5) throw ZeroOnContourError("eigenvalue on the Jensen contour");
      r *= 1.03;
      continue;
    }
    std::vector<double> values(quad);
    parallel_for(quad, [&](std::size_t k) {
      const double t = kTwoPi * static_cast<double>(k) / static_cast<double>(quad);
      values[k] = charpoly(sites, e1 + rad * cplx(std::cos(t), std::sin(t))).log_abs;
    });
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(quad);
    double rhs = 0.0;
    std::size_t inside = 0;
    for (double z : zeros) {
      const double d = std::abs(cplx(z) - e1);
      if (d < rad) {
        rhs += std::log(rad / d);
        ++inside;
      }
    }
    out.lhs = mean - center.log_abs;
    out.rhs = rhs;
    out.radius = r;
    out.attempts = attempt;
    out.zeros_inside = inside;
    return out;
  }
}

}  // namespace qpj
