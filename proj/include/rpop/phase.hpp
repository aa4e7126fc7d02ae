#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "rpop/common.hpp"

namespace rpop {

enum class Phase : std::uint8_t { A = 0, B = 1, C = 2 };

constexpr std::array<Phase, 3> kAllPhases{Phase::A, Phase::B, Phase::C};

inline char phase_char(Phase p) { return "abc"[static_cast<int>(p)]; }

/// Non-empty subset of {a, b, c}.
class PhaseSet {
public:
  PhaseSet() = default;
  explicit PhaseSet(std::uint8_t mask) : mask_(mask) {}

  static PhaseSet parse(const std::string& text, const std::string& element) {
    std::uint8_t mask = 0;
    for (char c : text) {
      int bit;
      switch (c) {
        case 'a': bit = 0; break;
        case 'b': bit = 1; break;
        case 'c': bit = 2; break;
        default:
          throw CaseError(CaseError::Kind::Schema, element, "phases",
                          element + ": invalid phase character '" + std::string(1, c) + "'");
      }
      if (mask & (1u << bit))
        throw CaseError(CaseError::Kind::Invariant, element, "phases",
                        element + ": duplicate phase '" + std::string(1, c) + "'");
      mask |= static_cast<std::uint8_t>(1u << bit);
    }
    if (mask == 0)
      throw CaseError(CaseError::Kind::Invariant, element, "phases", element + ": empty phase set");
    return PhaseSet(mask);
  }

  bool contains(Phase p) const { return (mask_ >> static_cast<int>(p)) & 1u; }
  bool empty() const { return mask_ == 0; }
  int count() const { return ((mask_ >> 0) & 1) + ((mask_ >> 1) & 1) + ((mask_ >> 2) & 1); }

  /// Position of p among the set's members in a..c order; -1 if absent.
  int index_of(Phase p) const {
    if (!contains(p)) return -1;
    int idx = 0;
    for (Phase q : kAllPhases) {
      if (q == p) return idx;
      if (contains(q)) ++idx;
    }
    return -1;
  }

  bool subset_of(PhaseSet other) const { return (mask_ & ~other.mask_) == 0; }

  std::string str() const {
    std::string s;
    for (Phase p : kAllPhases)
      if (contains(p)) s += phase_char(p);
    return s;
  }

  std::uint8_t mask() const { return mask_; }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (Phase p : kAllPhases)
      if (contains(p)) fn(p);
  }

  bool operator==(const PhaseSet&) const = default;

private:
  std::uint8_t mask_ = 0;
};

/// Complex power split into active and reactive parts (per unit).
struct PQ {
  double p = 0.0;
  double q = 0.0;

  PQ operator+(const PQ& o) const { return {p + o.p, q + o.q}; }
  PQ operator-(const PQ& o) const { return {p - o.p, q - o.q}; }
  PQ operator*(double s) const { return {p * s, q * s}; }
  PQ& operator+=(const PQ& o) {
    p += o.p;
    q += o.q;
    return *this;
  }
  bool operator==(const PQ&) const = default;
};

/// Per-phase shunt admittance at a bus.
struct Shunt {
  double g = 0.0;
  double b = 0.0;
  bool operator==(const Shunt&) const = default;
};

}  // namespace rpop
