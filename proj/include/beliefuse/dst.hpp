#pragma once

#include <span>

namespace beliefuse {

// Elements of the power set of the binary detection frame {T, notT}, apart
// from the empty set. kIntermediate is the whole frame {T, notT}.
enum class Hypothesis { kTarget, kNonTarget, kIntermediate };

// Basic probability assignment over the binary detection frame. The empty
// set carries no mass by construction.
class Bpa {
 public:
  // Masses down to -1e-9 are clamped to zero (upstream float noise); anything
  // more negative, non-finite, or an all-zero assignment throws
  // std::invalid_argument. The result is normalized to sum 1.
  static Bpa from_masses(double target, double non_target, double intermediate);

  static Bpa vacuous() noexcept { return Bpa(0.0, 0.0, 1.0); }
  static Bpa certain(Hypothesis h) noexcept;

  double target() const noexcept { return t_; }
  double non_target() const noexcept { return nt_; }
  double intermediate() const noexcept { return i_; }
  double mass(Hypothesis h) const noexcept;

  friend bool operator==(const Bpa&, const Bpa&) = default;

 private:
  Bpa(double t, double nt, double i) noexcept : t_(t), nt_(nt), i_(i) {}
  friend Bpa combine(const Bpa& a, const Bpa& b);
  friend Bpa combine_all_direct(std::span<const Bpa> bpas);

  double t_;
  double nt_;
  double i_;
};

// bel(A): total mass of the subsets of A.
double belief(const Bpa& bpa, Hypothesis h) noexcept;

// Normalizers at or below this value are treated as total conflict.
inline constexpr double kConflictEpsilon = 1e-12;

// Dempster's rule for two sources. Throws TotalConflict when the normalizer
// N = 1 - (a.T b.notT + a.notT b.T) is <= kConflictEpsilon.
Bpa combine(const Bpa& a, const Bpa& b);

// Left fold of combine(). Throws std::invalid_argument on an empty list.
Bpa combine_all(std::span<const Bpa> bpas);

// K-way rule evaluated directly: enumerates every one of the 3^K focal-element
// patterns, accumulates the product of masses on the intersection, and
// normalizes once. Exponential; meant as a reference for small K (<= 16).
Bpa combine_all_direct(std::span<const Bpa> bpas);

struct FusedVerdict {
  Bpa joint;
  double score;  // bel(T) - bel(notT), in [-1, 1]

  static FusedVerdict from_joint(const Bpa& joint) noexcept;
};

}  // namespace beliefuse
