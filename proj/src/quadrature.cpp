#include "adgm/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace adgm {

namespace {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = 0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2 * j + 1) * z * p1 - j * p2) / (j + 1);
      }
      pp = n * (z * p0 - p1) / (z * z - 1);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1 - z * z) * pp * pp);
  }
}

QuadRule make_edge_rule(int degree) {
  int n = degree / 2 + 1;  // 2n-1 >= degree
  std::vector<double> gx, gw;
  gauss_legendre(n, gx, gw);
  QuadRule r;
  r.exactness = 2 * n - 1;
  for (int i = 0; i < n; ++i) {
    r.x.push_back(0.5 * (gx[i] + 1));
    r.w.push_back(0.5 * gw[i]);
  }
  return r;
}

// Duffy-type conical product: x = u, y = v(1-u), Jacobian (1-u).
QuadRule make_triangle_rule(int degree) {
  int nu = (degree + 3) / 2;  // u-integrand degree <= degree+1
  int nv = (degree + 2) / 2;
  std::vector<double> ux, uw, vx, vw;
  gauss_legendre(nu, ux, uw);
  gauss_legendre(nv, vx, vw);
  QuadRule r;
  r.exactness = degree;
  for (int i = 0; i < nu; ++i) {
    double u = 0.5 * (ux[i] + 1), wu = 0.5 * uw[i];
    for (int j = 0; j < nv; ++j) {
      double v = 0.5 * (vx[j] + 1), wv = 0.5 * vw[j];
      r.x.push_back(u);
      r.y.push_back(v * (1 - u));
      r.w.push_back(wu * wv * (1 - u));
    }
  }
  return r;
}

}  // namespace

const QuadRule& triangle_rule(int degree) {
  static std::map<int, QuadRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, make_triangle_rule(degree)).first;
  return it->second;
}

const QuadRule& edge_rule(int degree) {
  static std::map<int, QuadRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, make_edge_rule(degree)).first;
  return it->second;
}

}  // namespace adgm
