#include "dchoice/exact_k3.hpp"

#include <cmath>
#include <stdexcept>

#include "dchoice/errors.hpp"

namespace dchoice {

namespace {

using P2 = std::array<double, 2>;

// Keeps the part of `poly` with a.p <= b (Sutherland-Hodgman, one edge).
std::vector<P2> clip(const std::vector<P2>& poly, double a0, double a1, double b) {
  std::vector<P2> out;
  const double eps = 1e-12 * std::max(1.0, std::abs(b));
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const P2& p = poly[i];
    const P2& q = poly[(i + 1) % poly.size()];
    const double fp = a0 * p[0] + a1 * p[1] - b;
    const double fq = a0 * q[0] + a1 * q[1] - b;
    const bool in_p = fp <= eps, in_q = fq <= eps;
    if (in_p) out.push_back(p);
    if (in_p != in_q && std::abs(fq - fp) > 0.0) {
      const double s = fp / (fp - fq);
      if (s > 0.0 && s < 1.0) out.push_back({p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])});
    }
  }
  return out;
}

}  // namespace

ExactRegionK3 exact_region_k3(const Allocation& a, double sigma) {
  if (a.k != 3 || a.n != 3) throw UnsupportedError("exact region is implemented for k = n = 3 only");
  if (!a.is_replica()) throw UnsupportedError("exact region needs a replica allocation");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  ExactRegionK3 reg;
  reg.simplex_sigma = sigma;
  for (unsigned mask = 1; mask < 8; ++mask) {
    std::vector<std::size_t> S;
    Halfspace h{{0.0, 0.0, 0.0}, 0.0};
    for (std::size_t i = 0; i < 3; ++i)
      if (mask >> i & 1) {
        S.push_back(i);
        h.normal[i] = 1.0;
      }
    h.offset = static_cast<double>(node_expansion(a, S));
    reg.halfspaces.push_back(h);
  }
  for (std::size_t i = 0; i < 3; ++i) {
    Halfspace h{{0.0, 0.0, 0.0}, 0.0};
    h.normal[i] = -1.0;
    reg.halfspaces.push_back(h);
  }

  // work in (rho_1, rho_2) with rho_3 = sigma - rho_1 - rho_2
  std::vector<P2> poly{{0.0, 0.0}, {sigma, 0.0}, {0.0, sigma}};
  for (const auto& h : reg.halfspaces) {
    if (poly.empty()) break;
    poly = clip(poly, h.normal[0] - h.normal[2], h.normal[1] - h.normal[2], h.offset - h.normal[2] * sigma);
  }
  std::vector<P2> uniq;
  for (const auto& p : poly) {
    bool dup = false;
    for (const auto& q : uniq) dup = dup || (std::abs(p[0] - q[0]) <= 1e-12 && std::abs(p[1] - q[1]) <= 1e-12);
    if (!dup) uniq.push_back(p);
  }
  double area2 = 0.0;
  for (std::size_t i = 0; i < uniq.size(); ++i) {
    const P2& p = uniq[i];
    const P2& q = uniq[(i + 1) % uniq.size()];
    area2 += p[0] * q[1] - q[0] * p[1];
  }
  for (const auto& p : uniq) reg.polygon.push_back({p[0], p[1], sigma - p[0] - p[1]});
  reg.p_sigma = std::abs(area2) / (sigma * sigma);
  return reg;
}

double exact_P_sigma_k3(const Allocation& a, double sigma) { return exact_region_k3(a, sigma).p_sigma; }

}  // namespace dchoice
