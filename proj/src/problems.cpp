#include "adgm/problems.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace adgm {

namespace {

constexpr double kPi = std::numbers::pi;

ProblemSpec smooth_square() {
  ProblemSpec p;
  p.name = "smooth-square";
  p.domain = "unit-square";
  p.has_exact = true;
  p.functions.f = [](Vec2 x) {
    return 2 * kPi * kPi * std::sin(kPi * x.x) * std::sin(kPi * x.y);
  };
  p.functions.g = nullptr;
  p.functions.exact = [](Vec2 x) { return std::sin(kPi * x.x) * std::sin(kPi * x.y); };
  p.functions.exact_grad = [](Vec2 x) {
    return Vec2{kPi * std::cos(kPi * x.x) * std::sin(kPi * x.y),
                kPi * std::sin(kPi * x.x) * std::cos(kPi * x.y)};
  };
  p.exact_laplacian = [](Vec2 x) {
    return -2 * kPi * kPi * std::sin(kPi * x.x) * std::sin(kPi * x.y);
  };
  return p;
}

// u = rho^{2/3} sin(2 phi / 3) about the reentrant corner, harmonic in the
// slit sector; phi in [0, 3pi/2] measured from the positive x-axis.
double lshape_angle(Vec2 x) {
  double phi = std::atan2(x.y, x.x);  // (-pi, pi]
  if (phi < 0) phi += 2 * kPi;        // [0, 2pi): L-shape occupies [0, 3pi/2]
  return phi;
}

ProblemSpec lshape_singular() {
  ProblemSpec p;
  p.name = "l-shape-singular";
  p.domain = "l-shape";
  p.has_exact = true;
  auto u = [](Vec2 x) {
    double rho = std::hypot(x.x, x.y);
    if (rho == 0) return 0.0;
    return std::pow(rho, 2.0 / 3.0) * std::sin(2.0 / 3.0 * lshape_angle(x));
  };
  p.functions.f = [](Vec2) { return 0.0; };
  p.functions.g = u;
  p.functions.exact = u;
  p.functions.exact_grad = [](Vec2 x) {
    double rho = std::hypot(x.x, x.y);
    if (rho == 0) return Vec2{0, 0};
    double phi = lshape_angle(x);
    double dr = 2.0 / 3.0 * std::pow(rho, -1.0 / 3.0) * std::sin(2.0 / 3.0 * phi);
    double dphi = 2.0 / 3.0 * std::pow(rho, 2.0 / 3.0) * std::cos(2.0 / 3.0 * phi);
    double c = std::cos(phi), s = std::sin(phi);
    return Vec2{dr * c - dphi * s / rho, dr * s + dphi * c / rho};
  };
  p.exact_laplacian = [](Vec2) { return 0.0; };  // harmonic away from the corner
  return p;
}

bool inside_domain(const std::string& domain, Vec2 x) {
  if (domain == "unit-square") return x.x > 0 && x.x < 1 && x.y > 0 && x.y < 1;
  if (domain == "l-shape")
    return x.x > -1 && x.x < 1 && x.y > -1 && x.y < 1 && !(x.x >= 0 && x.y <= 0);
  return false;
}

}  // namespace

ProblemSpec make_problem(const std::string& name) {
  ProblemSpec p;
  if (name == "smooth-square")
    p = smooth_square();
  else if (name == "l-shape-singular")
    p = lshape_singular();
  else
    throw std::runtime_error("unknown problem: " + name);
  smoke_check(p);
  return p;
}

void smoke_check(const ProblemSpec& p, unsigned seed, int samples, double tol) {
  if (!p.has_exact || !p.exact_laplacian) return;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> ux(-1, 1);
  int found = 0;
  while (found < samples) {
    Vec2 x{ux(rng), ux(rng)};
    if (p.domain == "unit-square") x = {0.5 * (x.x + 1), 0.5 * (x.y + 1)};
    if (!inside_domain(p.domain, x)) continue;
    ++found;
    double lap = p.exact_laplacian(x);
    double f = p.functions.f ? p.functions.f(x) : 0.0;
    if (std::abs(lap + f) > tol * (1 + std::abs(f)))
      throw std::runtime_error("problem " + p.name + " fails -Lap u = f smoke check");
  }
}

}  // namespace adgm
