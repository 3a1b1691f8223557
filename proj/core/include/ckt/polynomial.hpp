#pragma once

#include <complex>
#include <cstdlib>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "ckt/errors.hpp"

namespace ckt {

using MultiIndex = std::vector<int>;

// Monomials are stored in descending lexicographic order, so v1^m comes first.
using MonomialOrder = std::greater<MultiIndex>;

inline int degree_of(const MultiIndex& a) {
  int s = 0;
  for (int x : a) s += x;
  return s;
}

// All exponent tuples of length n summing to m, in MonomialOrder.
inline std::vector<MultiIndex> monomials(int n, int m) {
  std::vector<MultiIndex> out;
  if (n <= 0 || m < 0) return out;
  MultiIndex cur(n, 0);
  std::function<void(int, int)> rec = [&](int i, int left) {
    if (i == n - 1) {
      cur[i] = left;
      out.push_back(cur);
      return;
    }
    for (int e = left; e >= 0; --e) {
      cur[i] = e;
      rec(i + 1, left - e);
    }
  };
  rec(0, m);
  return out;
}

inline std::complex<double> conj_scalar(const std::complex<double>& z) { return std::conj(z); }
template <class T>
T conj_scalar(const T& t) {
  return t;
}

// Homogeneous polynomial of degree m in n variables. A negative degree is the
// zero space: it holds no terms.
template <class T>
class Poly {
 public:
  using Scalar = T;
  using Terms = std::map<MultiIndex, T, MonomialOrder>;

  Poly() = default;
  Poly(int n, int m) : n_(n), m_(m) {
    if (n < 1) throw ValidationError("polynomial needs n >= 1");
  }

  static Poly monomial(const MultiIndex& a, T c = T(1)) {
    Poly p(static_cast<int>(a.size()), degree_of(a));
    p.add(a, c);
    return p;
  }
  static Poly constant(int n, T c) {
    Poly p(n, 0);
    p.add(MultiIndex(n, 0), c);
    return p;
  }

  int n() const { return n_; }
  int m() const { return m_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  T coeff(const MultiIndex& a) const {
    auto it = terms_.find(a);
    return it == terms_.end() ? T(0) : it->second;
  }

  void add(const MultiIndex& a, const T& c) {
    if (static_cast<int>(a.size()) != n_ || degree_of(a) != m_)
      throw ValidationError("monomial does not match polynomial shape");
    for (int x : a)
      if (x < 0) throw ValidationError("negative exponent");
    auto [it, fresh] = terms_.try_emplace(a, c);
    if (!fresh) it->second += c;
    if (it->second == T(0)) terms_.erase(it);
  }

  Poly& operator+=(const Poly& o) {
    check_same(o);
    for (const auto& [a, c] : o.terms_) add(a, c);
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    check_same(o);
    for (const auto& [a, c] : o.terms_) add(a, -c);
    return *this;
  }
  Poly& operator*=(const T& s) {
    if (s == T(0)) {
      terms_.clear();
      return *this;
    }
    for (auto& [a, c] : terms_) c *= s;
    return *this;
  }
  Poly& operator/=(const T& s) {
    for (auto& [a, c] : terms_) c /= s;
    return *this;
  }
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(Poly a, const T& s) { return a *= s; }
  friend Poly operator*(const T& s, Poly a) { return a *= s; }
  friend Poly operator/(Poly a, const T& s) { return a /= s; }
  Poly operator-() const { return *this * T(-1); }

  friend bool operator==(const Poly& a, const Poly& b) {
    return a.n_ == b.n_ && a.m_ == b.m_ && a.terms_ == b.terms_;
  }

  Poly conj() const {
    Poly out(n_, m_);
    for (const auto& [a, c] : terms_) out.terms_.emplace(a, conj_scalar(c));
    return out;
  }

 private:
  void check_same(const Poly& o) const {
    if (o.n_ != n_ || o.m_ != m_) throw ValidationError("polynomial shape mismatch");
  }

  int n_ = 1;
  int m_ = 0;
  Terms terms_;
};

template <class T>
Poly<T> multiply(const Poly<T>& a, const Poly<T>& b) {
  if (a.n() != b.n()) throw ValidationError("polynomial dimension mismatch");
  Poly<T> out(a.n(), a.m() + b.m());
  if (a.m() < 0 || b.m() < 0) return Poly<T>(a.n(), -1);
  MultiIndex s(a.n());
  for (const auto& [ea, ca] : a.terms())
    for (const auto& [eb, cb] : b.terms()) {
      for (int i = 0; i < a.n(); ++i) s[i] = ea[i] + eb[i];
      out.add(s, ca * cb);
    }
  return out;
}

// Partial derivative in coordinate j (0-based).
template <class T>
Poly<T> partial(const Poly<T>& p, int j) {
  if (j < 0 || j >= p.n()) throw ValidationError("coordinate index out of range");
  Poly<T> out(p.n(), p.m() - 1);
  for (const auto& [a, c] : p.terms()) {
    if (a[j] == 0) continue;
    MultiIndex b = a;
    b[j] -= 1;
    out.add(b, c * T(a[j]));
  }
  return out;
}

template <class T>
Poly<T> laplace(const Poly<T>& p) {
  Poly<T> out(p.n(), p.m() - 2);
  for (const auto& [a, c] : p.terms())
    for (int j = 0; j < p.n(); ++j) {
      if (a[j] < 2) continue;
      MultiIndex b = a;
      b[j] -= 2;
      out.add(b, c * T(a[j] * (a[j] - 1)));
    }
  return out;
}

// |v|^{2k} in n variables.
template <class T>
Poly<T> radial_power(int n, int k) {
  Poly<T> sq(n, 2);
  for (int i = 0; i < n; ++i) {
    MultiIndex a(n, 0);
    a[i] = 2;
    sq.add(a, T(1));
  }
  Poly<T> out = Poly<T>::constant(n, T(1));
  for (int i = 0; i < k; ++i) out = multiply(out, sq);
  return out;
}

// p = sum_k |v|^{2k} h_k with h_k harmonic. Zero parts are omitted.
template <class T>
std::vector<std::pair<int, Poly<T>>> harmonic_decompose(const Poly<T>& p) {
  const int n = p.n();
  const int m = p.m();
  std::vector<std::pair<int, Poly<T>>> out;
  if (m < 0) return out;
  const int K = m / 2;
  std::vector<Poly<T>> lap(K + 1);
  lap[0] = p;
  for (int j = 1; j <= K; ++j) lap[j] = laplace(lap[j - 1]);

  // coefficient of |v|^{2(k-j)} h_k in Delta^j(|v|^{2k} h_k)
  auto c = [&](int k, int j) {
    T prod(1);
    const int d = m - 2 * k;
    for (int i = 0; i < j; ++i) {
      const int l = k - i;
      prod *= T(2 * l * (2 * l + n - 2 + 2 * d));
    }
    return prod;
  };

  std::vector<Poly<T>> h(K + 1);
  for (int j = K; j >= 0; --j) {
    Poly<T> rest = lap[j];
    for (int k = j + 1; k <= K; ++k) {
      if (h[k].is_zero()) continue;
      rest -= multiply(radial_power<T>(n, k - j), h[k]) * c(k, j);
    }
    h[j] = rest / c(j, j);
  }
  for (int k = 0; k <= K; ++k)
    if (!h[k].is_zero()) out.emplace_back(k, h[k]);
  return out;
}

template <class T>
Poly<T> reconstruct(int n, int m, const std::vector<std::pair<int, Poly<T>>>& parts) {
  Poly<T> out(n, m);
  for (const auto& [k, h] : parts) out += multiply(radial_power<T>(n, k), h);
  return out;
}

}  // namespace ckt
