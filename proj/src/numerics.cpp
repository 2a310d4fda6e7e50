#include "altbm/numerics.hpp"

#include <numbers>

namespace altbm {

ComplexMatrix to_complex(const Matrix& m) {
  ComplexMatrix c(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) c(i, j) = m(i, j);
  return c;
}

void require_finite(const Matrix& m, const std::string& what) {
  for (double x : m.entries())
    if (!std::isfinite(x)) throw InvalidArgument(what + ": non-finite matrix entry");
}

Vector left_multiply(std::span<const double> v, const Matrix& m) {
  if (v.size() != m.rows()) throw InvalidArgument("left_multiply: size mismatch");
  Vector out(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += v[i] * m(i, j);
  return out;
}

Vector right_multiply(const Matrix& m, std::span<const double> v) {
  if (v.size() != m.cols()) throw InvalidArgument("right_multiply: size mismatch");
  Vector out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i] += m(i, j) * v[j];
  return out;
}

Vector solve_linear(const Matrix& a, std::span<const double> y) {
  Matrix rhs(y.size() ? y.size() : 1, 1);
  if (y.size() != a.rows()) throw InvalidArgument("solve_linear: right-hand side size mismatch");
  for (std::size_t i = 0; i < y.size(); ++i) rhs(i, 0) = y[i];
  const Matrix x = detail::lu_solve(a, std::move(rhs));
  Vector out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = x(i, 0);
  return out;
}

Matrix solve_linear(const Matrix& a, const Matrix& b) { return detail::lu_solve(a, b); }

ComplexMatrix solve_linear(const ComplexMatrix& a, const ComplexMatrix& b) {
  return detail::lu_solve(a, b);
}

bool is_generator(const Matrix& q, double tol) {
  if (!q.square()) return false;
  for (std::size_t i = 0; i < q.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < q.cols(); ++j) {
      if (i != j && q(i, j) < 0.0) return false;
      s += q(i, j);
    }
    if (std::abs(s) > tol * std::max(1.0, std::abs(q(i, i)))) return false;
  }
  return true;
}

namespace {

Matrix repeated_square(Matrix m, int times) {
  for (int k = 0; k < times; ++k) m = m * m;
  return m;
}

// Poisson-weighted sum of powers of the uniformized chain.
Matrix exp_uniformized(const Matrix& q, double t) {
  const std::size_t n = q.rows();
  double rate = 0.0;
  for (std::size_t i = 0; i < n; ++i) rate = std::max(rate, -q(i, i));
  if (rate == 0.0 || t == 0.0) return Matrix::identity(n);

  // Keep the Poisson mean small enough that e^{-mean} does not underflow.
  constexpr double kMaxMean = 30.0;
  int squarings = 0;
  double tau = t;
  while (rate * tau > kMaxMean) {
    tau *= 0.5;
    ++squarings;
  }

  const Matrix p = Matrix::identity(n) + q * (1.0 / rate);
  const double mean = rate * tau;
  double weight = std::exp(-mean);
  double mass = weight;
  Matrix power = Matrix::identity(n);
  Matrix sum = power * weight;
  for (int k = 1; k < 1000 && mass < 1.0 - 1e-17; ++k) {
    power = power * p;
    weight *= mean / k;
    mass += weight;
    sum += power * weight;
    if (weight < 1e-300) break;
  }
  Matrix out = repeated_square(std::move(sum), squarings);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (out(i, j) < 0.0) out(i, j) = 0.0;
      s += out(i, j);
    }
    for (std::size_t j = 0; j < n; ++j) out(i, j) /= s;
  }
  return out;
}

Matrix exp_taylor(const Matrix& q, double t) {
  const std::size_t n = q.rows();
  Matrix a = q * t;
  const double norm = a.norm_inf();
  if (norm == 0.0) return Matrix::identity(n);
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  a *= std::ldexp(1.0, -squarings);

  Matrix term = Matrix::identity(n);
  Matrix sum = term;
  for (int k = 1; k <= 40; ++k) {
    term = term * a;
    term *= 1.0 / k;
    sum += term;
    if (term.norm_inf() <= 1e-18 * sum.norm_inf()) break;
  }
  return repeated_square(std::move(sum), squarings);
}

}  // namespace

Matrix mat_exp(const Matrix& q, double t) {
  if (!q.square()) throw InvalidArgument("mat_exp: matrix is not square");
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("mat_exp: t must be finite and >= 0");
  require_finite(q, "mat_exp");
  if (t == 0.0) return Matrix::identity(q.rows());
  return is_generator(q) ? exp_uniformized(q, t) : exp_taylor(q, t);
}

namespace {

double euler_estimate(const LaplaceEvaluator& f, double t, int m) {
  const double base = m * std::numbers::ln10 / 3.0;
  const double scale = std::pow(10.0, m / 3.0);

  std::vector<double> xi(2 * m + 1, 1.0);
  xi[0] = 0.5;
  xi[2 * m] = std::ldexp(1.0, -m);
  double binom = 1.0;  // C(m, k)
  for (int k = 1; k < m; ++k) {
    binom = binom * (m - k + 1) / k;
    xi[2 * m - k] = xi[2 * m - k + 1] + std::ldexp(binom, -m);
  }

  double sum = 0.0;
  for (int k = 0; k <= 2 * m; ++k) {
    const std::complex<double> s(base / t, std::numbers::pi * k / t);
    const std::complex<double> v = f(s);
    if (!std::isfinite(v.real()))
      throw InversionDiverged("invert_laplace: transform not finite at an abscissa");
    const double eta = (k % 2 == 0 ? scale : -scale) * xi[k];
    sum += eta * v.real();
  }
  return sum / t;
}

}  // namespace

double invert_laplace(const LaplaceEvaluator& f, double t, int terms, double tolerance) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("invert_laplace: t must be > 0");
  if (terms < 9 || terms % 2 == 0)
    throw InvalidArgument("invert_laplace: terms must be odd and >= 9");
  if (!(tolerance > 0.0)) throw InvalidArgument("invert_laplace: tolerance must be > 0");
  const int m = (terms - 1) / 2;
  const double fine = euler_estimate(f, t, m);
  const double coarse = euler_estimate(f, t, m - 2);
  if (!std::isfinite(fine) || std::abs(fine - coarse) > tolerance * std::max(1.0, std::abs(fine)))
    throw InversionDiverged("invert_laplace: Euler sums did not stabilize (" +
                            std::to_string(fine) + " vs " + std::to_string(coarse) + ")");
  return fine;
}

}  // namespace altbm
