#pragma once

#include <cmath>
#include <map>
#include <tuple>
#include <vector>

#include "nhsteer/rational.hpp"

namespace nhsteer {

// Finite sums of c * t^p * cos(k t) and c * t^p * sin(k t) with integer k >= 0,
// closed under products and integration from 0. Used to integrate the
// canonical dynamics exactly under trigonometric inputs.
template <class T>
class TrigSeries {
 public:
  struct Key {
    int power;
    long freq;
    bool sine;
    bool operator<(const Key& o) const {
      return std::tie(power, freq, sine) < std::tie(o.power, o.freq, o.sine);
    }
  };
  using Terms = std::map<Key, T>;

  TrigSeries() = default;
  static TrigSeries constant(const T& c) {
    TrigSeries s;
    s.add(0, 0, false, c);
    return s;
  }
  // c * cos(k t - quarter * pi/2)
  static TrigSeries cosine(const T& c, long k, int quarter) {
    TrigSeries s;
    switch (((quarter % 4) + 4) % 4) {
      case 0: s.add(0, k, false, c); break;
      case 1: s.add(0, k, true, c); break;
      case 2: s.add(0, k, false, -c); break;
      case 3: s.add(0, k, true, -c); break;
    }
    return s;
  }

  const Terms& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  void add(int power, long freq, bool sine, const T& c) {
    if (freq < 0) {
      freq = -freq;
      if (sine) {
        add(power, freq, true, -c);
        return;
      }
    }
    if (sine && freq == 0) return;
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(Key{power, freq, sine}, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  TrigSeries& operator+=(const TrigSeries& o) {
    for (const auto& [k, c] : o.terms_) add(k.power, k.freq, k.sine, c);
    return *this;
  }
  TrigSeries& operator*=(const T& s) {
    if (s == 0) {
      terms_.clear();
      return *this;
    }
    for (auto& [k, c] : terms_) c *= s;
    return *this;
  }
  friend TrigSeries operator+(TrigSeries a, const TrigSeries& b) { return a += b; }
  friend TrigSeries operator*(TrigSeries a, const T& s) { return a *= s; }

  friend TrigSeries operator*(const TrigSeries& a, const TrigSeries& b) {
    TrigSeries out;
    const T half = T(1) / T(2);
    for (const auto& [ka, ca] : a.terms_) {
      for (const auto& [kb, cb] : b.terms_) {
        T c = ca * cb;
        int p = ka.power + kb.power;
        long sum = ka.freq + kb.freq, diff = ka.freq - kb.freq;
        if (ka.freq == 0 && kb.freq == 0) {
          out.add(p, 0, false, c);
        } else if (!ka.sine && !kb.sine) {
          out.add(p, diff, false, c * half);
          out.add(p, sum, false, c * half);
        } else if (ka.sine && kb.sine) {
          out.add(p, diff, false, c * half);
          out.add(p, sum, false, -c * half);
        } else if (ka.sine) {
          // sin a cos b
          out.add(p, sum, true, c * half);
          out.add(p, diff, true, c * half);
        } else {
          // cos a sin b
          out.add(p, sum, true, c * half);
          out.add(p, diff, true, -c * half);
        }
      }
    }
    return out;
  }

  // Antiderivative vanishing at t = 0.
  TrigSeries integrate() const {
    TrigSeries out;
    for (const auto& [k, c] : terms_) out += integrate_term(k.power, k.freq, k.sine) * c;
    return out;
  }

  // Coefficients c_p of t^p at t = 2 pi, i.e. the value there is sum c_p (2 pi)^p.
  std::map<int, T> at_full_period() const {
    std::map<int, T> out;
    for (const auto& [k, c] : terms_) {
      if (k.sine) continue;
      auto [it, inserted] = out.try_emplace(k.power, c);
      if (!inserted) it->second += c;
    }
    for (auto it = out.begin(); it != out.end();) {
      if (it->second == 0) it = out.erase(it);
      else ++it;
    }
    return out;
  }

  // Constant (zero-frequency, t^0) coefficient.
  T mean_coefficient() const {
    auto it = terms_.find(Key{0, 0, false});
    return it == terms_.end() ? T(0) : it->second;
  }

  bool has_secular_terms() const {
    for (const auto& [k, c] : terms_)
      if (k.power > 0) return true;
    return false;
  }

  T coefficient(int power, long freq, bool sine) const {
    auto it = terms_.find(Key{power, freq, sine});
    return it == terms_.end() ? T(0) : it->second;
  }

  double eval(double t) const {
    double s = 0;
    for (const auto& [k, c] : terms_) {
      double v = to_double_value(c) * std::pow(t, k.power);
      s += k.sine ? v * std::sin(static_cast<double>(k.freq) * t) : v * std::cos(static_cast<double>(k.freq) * t);
    }
    return s;
  }

 private:
  static double to_double_value(const T& c) {
    if constexpr (std::is_same_v<T, Rational>) return c.get_d();
    else return static_cast<double>(c);
  }

  static TrigSeries integrate_term(int p, long k, bool sine) {
    TrigSeries out;
    if (k == 0) {
      out.add(p + 1, 0, false, T(1) / T(p + 1));
      return out;
    }
    T inv_k = T(1) / T(k);
    if (!sine) {
      // int_0^t s^p cos(ks) = t^p sin(kt)/k - (p/k) int_0^t s^{p-1} sin(ks)
      out.add(p, k, true, inv_k);
      if (p > 0) out += integrate_term(p - 1, k, true) * (-T(p) * inv_k);
    } else {
      // int_0^t s^p sin(ks) = -t^p cos(kt)/k + (p/k) int_0^t s^{p-1} cos(ks)  (+1/k when p = 0)
      out.add(p, k, false, -inv_k);
      if (p == 0) out.add(0, 0, false, inv_k);
      else out += integrate_term(p - 1, k, false) * (T(p) * inv_k);
    }
    return out;
  }

  Terms terms_;
};

using ExactTrig = TrigSeries<Rational>;

}  // namespace nhsteer
