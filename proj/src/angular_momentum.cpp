#include "nanotrap/angular_momentum.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>

namespace nanotrap {

namespace {

constexpr int max_factorial = 64;

const std::array<double, max_factorial + 1>& factorials() {
  static const auto table = [] {
    std::array<double, max_factorial + 1> t{};
    t[0] = 1.0;
    for (int i = 1; i <= max_factorial; ++i) t[i] = t[i - 1] * i;
    return t;
  }();
  return table;
}

// Factorial of a doubled argument, n2 = 2n.
double fact2(int n2) { return factorials()[static_cast<std::size_t>(n2 / 2)]; }

bool triangle(int a, int b, int c) {
  return c >= std::abs(a - b) && c <= a + b && (a + b + c) % 2 == 0;
}

double delta(int a, int b, int c) {
  return std::sqrt(fact2(a + b - c) * fact2(a - b + c) * fact2(-a + b + c) / fact2(a + b + c + 2));
}

}  // namespace

double wigner_3j(int j1, int j2, int j3, int m1, int m2, int m3) {
  if (m1 + m2 + m3 != 0 || !triangle(j1, j2, j3)) return 0.0;
  if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(m3) > j3) return 0.0;
  if ((j1 + m1) % 2 || (j2 + m2) % 2 || (j3 + m3) % 2) return 0.0;

  const int kmin = std::max({0, j2 - j3 - m1, j1 - j3 + m2});
  const int kmax = std::min({j1 + j2 - j3, j1 - m1, j2 + m2});
  double sum = 0.0;
  for (int k = kmin; k <= kmax; k += 2) {
    const double term = fact2(k) * fact2(j1 + j2 - j3 - k) * fact2(j1 - m1 - k) * fact2(j2 + m2 - k) *
                        fact2(j3 - j2 + m1 + k) * fact2(j3 - j1 - m2 + k);
    sum += ((k / 2) % 2 ? -1.0 : 1.0) / term;
  }
  const double pre = delta(j1, j2, j3) *
                     std::sqrt(fact2(j1 + m1) * fact2(j1 - m1) * fact2(j2 + m2) * fact2(j2 - m2) *
                               fact2(j3 + m3) * fact2(j3 - m3));
  const int phase = (j1 - j2 - m3) / 2;
  return (phase % 2 ? -1.0 : 1.0) * pre * sum;
}

double wigner_6j(int j1, int j2, int j3, int j4, int j5, int j6) {
  if (!triangle(j1, j2, j3) || !triangle(j1, j5, j6) || !triangle(j4, j2, j6) || !triangle(j4, j5, j3))
    return 0.0;
  const int a1 = j1 + j2 + j3, a2 = j1 + j5 + j6, a3 = j4 + j2 + j6, a4 = j4 + j5 + j3;
  const int b1 = j1 + j2 + j4 + j5, b2 = j2 + j3 + j5 + j6, b3 = j3 + j1 + j6 + j4;
  const int kmin = std::max({a1, a2, a3, a4});
  const int kmax = std::min({b1, b2, b3});
  double sum = 0.0;
  for (int k = kmin; k <= kmax; k += 2) {
    const double term = fact2(k - a1) * fact2(k - a2) * fact2(k - a3) * fact2(k - a4) * fact2(b1 - k) *
                        fact2(b2 - k) * fact2(b3 - k);
    sum += ((k / 2) % 2 ? -1.0 : 1.0) * fact2(k + 2) / term;
  }
  return delta(j1, j2, j3) * delta(j1, j5, j6) * delta(j4, j2, j6) * delta(j4, j5, j3) * sum;
}

double clebsch_gordan(int j1, int m1, int j2, int m2, int J, int M) {
  const int phase = (j1 - j2 + M) / 2;
  return (phase % 2 ? -1.0 : 1.0) * std::sqrt(J + 1.0) * wigner_3j(j1, j2, J, m1, m2, -M);
}

}  // namespace nanotrap
