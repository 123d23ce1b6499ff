#include "bloch/polynomial.hpp"

#include "bloch/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bloch {

double Polynomial::operator()(double x) const {
  double acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

std::complex<double> Polynomial::operator()(std::complex<double> x) const {
  std::complex<double> acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (c_.size() <= 1) return Polynomial{0.0};
  std::vector<double> d(c_.size() - 1);
  for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
  return Polynomial(std::move(d));
}

Polynomial Polynomial::pow(int k) const {
  Polynomial out{1.0};
  for (int i = 0; i < k; ++i) out = out * *this;
  return out;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
  for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
  for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] -= o.c_[k];
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.c_.empty() || b.c_.empty()) return Polynomial{};
  std::vector<double> c(a.c_.size() + b.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.c_.size(); ++i)
    for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
  return Polynomial(std::move(c));
}

Polynomial operator*(double s, Polynomial p) {
  for (double& x : p.c_) x *= s;
  return p;
}

Polynomial Polynomial::trimmed(double rel_tol) const {
  double big = 0.0;
  for (double x : c_) big = std::max(big, std::abs(x));
  std::vector<double> c = c_;
  while (!c.empty() && std::abs(c.back()) <= rel_tol * big) c.pop_back();
  return Polynomial(std::move(c));
}

std::string Polynomial::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << "[";
  for (std::size_t k = 0; k < c_.size(); ++k) os << (k ? ", " : "") << c_[k];
  os << "] (ascending)";
  return os.str();
}

RootSet solve_polynomial(const Polynomial& p_in, double imag_tol) {
  const Polynomial p = p_in.trimmed();
  RootSet out;
  if (std::all_of(p.coefficients().begin(), p.coefficients().end(), [](double c) { return c == 0.0; }))
    throw NumericalError("zero polynomial has no isolated roots");
  const int n = p.degree();
  if (n < 1) return out;

  const auto& c = p.coefficients();
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) companion(i, n - 1) = -c[i] / c[n];

  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success)
    throw NumericalError("companion eigenvalue iteration failed for polynomial " + p.to_string());

  const Polynomial dp = p.derivative();
  for (int i = 0; i < n; ++i) {
    const std::complex<double> z = solver.eigenvalues()[i];
    out.all.push_back(z);
    if (std::abs(z.imag()) > imag_tol * (1.0 + std::abs(z.real()))) continue;
    double x = z.real();
    for (int it = 0; it < 2; ++it) {
      const double d = dp(x);
      if (d == 0.0) break;
      const double next = x - p(x) / d;
      if (!std::isfinite(next) || std::abs(p(next)) > std::abs(p(x))) break;
      x = next;
    }
    out.real.push_back(x);
  }
  std::sort(out.real.begin(), out.real.end());
  return out;
}

}  // namespace bloch
