#pragma once

#include <complex>
#include <initializer_list>
#include <string>
#include <vector>

namespace bloch {

/// Dense real polynomial, coefficients in ascending powers.
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(std::initializer_list<double> ascending) : c_(ascending) {}
  explicit Polynomial(std::vector<double> ascending) : c_(std::move(ascending)) {}

  /// (x - root)
  static Polynomial linear_factor(double root) { return Polynomial{-root, 1.0}; }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  const std::vector<double>& coefficients() const { return c_; }

  double operator()(double x) const;
  std::complex<double> operator()(std::complex<double> x) const;
  Polynomial derivative() const;
  Polynomial pow(int k) const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(double s, Polynomial p);

  /// Drops leading coefficients below rel_tol * max|c|.
  Polynomial trimmed(double rel_tol = 1e-14) const;
  std::string to_string() const;

 private:
  std::vector<double> c_;
};

struct RootSet {
  std::vector<double> real;
  std::vector<std::complex<double>> all;
};

/// All roots from the eigenvalues of the companion matrix of the monic
/// polynomial; real roots (|Im| <= imag_tol (1 + |Re|)) are refined by two
/// Newton steps and returned ascending.  Throws NumericalError when the
/// eigenvalue iteration fails, echoing the coefficients.
RootSet solve_polynomial(const Polynomial& p, double imag_tol = 1e-8);

}  // namespace bloch
